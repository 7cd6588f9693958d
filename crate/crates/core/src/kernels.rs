//! Coordinate-averaged distances `h((1/d) Σ ψ(|u_q - v_q|))` and the pooled
//! distance matrix built from them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// A single observation in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    coords: Vec<f64>,
}

impl Observation {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyObservation);
        }
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// The first `m` points come from sample 1 and the remaining `n` from sample 2.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledSample {
    points: Vec<Observation>,
    m: usize,
    n: usize,
}

impl PooledSample {
    pub fn new(points: Vec<Observation>, m: usize) -> Result<Self> {
        let total = points.len();
        if total < 3 {
            return Err(Error::TooFewPoints { min: 3, got: total });
        }
        if m == 0 || m >= total {
            return Err(Error::InvalidArgument(format!(
                "sample 1 size {m} must lie in 1..{total}"
            )));
        }
        let d = points[0].dim();
        if let Some(p) = points.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch { left: d, right: p.dim() });
        }
        Ok(Self { points, m, n: total - m })
    }

    /// Convenience constructor from raw rows.
    pub fn from_rows(first: &[Vec<f64>], second: &[Vec<f64>]) -> Result<Self> {
        let points = first
            .iter()
            .chain(second)
            .map(|r| Observation::new(r.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, first.len())
    }

    pub fn points(&self) -> &[Observation] {
        &self.points
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }
}

/// Closed set of `(h, ψ)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `d^{-1/2} ||u - v||`, i.e. `h = sqrt`, `ψ(t) = t²`.
    EuclidScaled,
    /// `h(t) = t`, `ψ(t) = t`.
    Lin,
    /// `h(t) = t`, `ψ(t) = log(1 + t)`.
    Log1p,
    /// `h(t) = t`, `ψ(t) = 1 - exp(-t)`.
    ExpNeg,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 4] = [
        KernelFamily::EuclidScaled,
        KernelFamily::Lin,
        KernelFamily::Log1p,
        KernelFamily::ExpNeg,
    ];

    /// Short name used on the command line and in CSV output.
    pub fn as_str(self) -> &'static str {
        match self {
            KernelFamily::EuclidScaled => "euclid",
            KernelFamily::Lin => "lin",
            KernelFamily::Log1p => "log",
            KernelFamily::ExpNeg => "exp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "euclid" | "euclid_scaled" => Some(KernelFamily::EuclidScaled),
            "lin" => Some(KernelFamily::Lin),
            "log" | "log1p" => Some(KernelFamily::Log1p),
            "exp" | "expneg" => Some(KernelFamily::ExpNeg),
            _ => None,
        }
    }

    /// Index of the MADD variant built on this family (`rho0` .. `rho3`).
    pub fn madd_index(self) -> usize {
        match self {
            KernelFamily::EuclidScaled => 0,
            KernelFamily::Lin => 1,
            KernelFamily::Log1p => 2,
            KernelFamily::ExpNeg => 3,
        }
    }

    #[inline]
    fn psi(self, t: f64) -> f64 {
        match self {
            KernelFamily::EuclidScaled => t * t,
            KernelFamily::Lin => t,
            KernelFamily::Log1p => t.ln_1p(),
            KernelFamily::ExpNeg => -(-t).exp_m1(),
        }
    }

    #[inline]
    fn h(self, mean: f64) -> f64 {
        match self {
            KernelFamily::EuclidScaled => mean.sqrt(),
            _ => mean,
        }
    }
}

pub type KernelSpec = KernelFamily;

/// Sum of `f(i)` for `i in 0..len` by pairwise (tree) summation.
fn pairwise_sum(len: usize, f: &impl Fn(usize) -> f64) -> f64 {
    fn rec(lo: usize, hi: usize, f: &impl Fn(usize) -> f64) -> f64 {
        if hi - lo <= 16 {
            let mut s = 0.0;
            for i in lo..hi {
                s += f(i);
            }
            s
        } else {
            let mid = lo + (hi - lo) / 2;
            rec(lo, mid, f) + rec(mid, hi, f)
        }
    }
    rec(0, len, f)
}

#[inline]
fn distance_unchecked(u: &[f64], v: &[f64], k: KernelFamily) -> f64 {
    let d = u.len();
    let total = pairwise_sum(d, &|q| k.psi((u[q] - v[q]).abs()));
    k.h(total / d as f64)
}

/// `φ_{h,ψ}(u, v)` for the chosen family.
pub fn kernel_distance(u: &Observation, v: &Observation, k: KernelSpec) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { left: u.dim(), right: v.dim() });
    }
    Ok(distance_unchecked(u.coords(), v.coords(), k))
}

/// Pairwise distances over the pooled sample, tagged with the kernel used.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    matrix: SymMatrix,
    kernel: KernelSpec,
}

impl DistanceMatrix {
    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn into_matrix(self) -> SymMatrix {
        self.matrix
    }
}

/// Rows are filled in parallel; each entry has a fixed summation order, so the
/// result does not depend on the thread count.
pub fn pairwise_matrix(z: &PooledSample, k: KernelSpec) -> Result<DistanceMatrix> {
    let n = z.len();
    if n < 3 {
        return Err(Error::TooFewPoints { min: 3, got: n });
    }
    let pts = z.points();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| distance_unchecked(pts[i].coords(), pts[j].coords(), k))
                .collect()
        })
        .collect();
    Ok(DistanceMatrix { matrix: SymMatrix::from_upper_rows(n, rows), kernel: k })
}
