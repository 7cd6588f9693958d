//! Mean of absolute differences of pairwise distances (MADD).
//!
//! For a pooled sample of size `N` and a base distance `φ`,
//! `ρ(x_i, x_j) = (N - 2)^{-1} Σ_{l ≠ i, j} |φ(x_i, x_l) - φ(x_j, x_l)|`.
//! With the scaled Euclidean base this is `ρ0`; with the `lin`, `log` and
//! `exp` bases it gives `ρ1`, `ρ2` and `ρ3`.
//!
//! The index is a semi-metric on the pooled points. It depends on the whole
//! pooled set, so it must be recomputed for every new sample.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{DistanceMatrix, KernelSpec};
use crate::matrix::SymMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct MaddMatrix {
    matrix: SymMatrix,
    base_kernel: KernelSpec,
}

impl MaddMatrix {
    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn base_kernel(&self) -> KernelSpec {
        self.base_kernel
    }

    pub fn into_matrix(self) -> SymMatrix {
        self.matrix
    }
}

pub fn madd_matrix(base: &DistanceMatrix) -> Result<MaddMatrix> {
    Ok(MaddMatrix { matrix: madd_of(base.matrix())?, base_kernel: base.kernel() })
}

/// MADD over an arbitrary dissimilarity matrix.
pub fn madd_of(base: &SymMatrix) -> Result<SymMatrix> {
    let n = base.n();
    if n < 3 {
        return Err(Error::TooFewPoints { min: 3, got: n });
    }
    let scale = 1.0 / (n - 2) as f64;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let ri = base.row(i);
            ((i + 1)..n)
                .map(|j| {
                    let rj = base.row(j);
                    let mut s = 0.0;
                    for l in 0..n {
                        if l != i && l != j {
                            s += (ri[l] - rj[l]).abs();
                        }
                    }
                    s * scale
                })
                .collect()
        })
        .collect();
    Ok(SymMatrix::from_upper_rows(n, rows))
}
