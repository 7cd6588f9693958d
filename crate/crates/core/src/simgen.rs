//! Seeded generators for the seven simulation scenarios and the power-study
//! harness that runs batches of tests over a dimension or `γ` grid.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibrate::PermutationPlan;
use crate::error::{Error, Result};
use crate::kernels::{Observation, PooledSample};
use crate::matrix::SymMatrix;
use crate::rng::{derive_seed, Stream};
use crate::stats::LabelVector;
use crate::twosample::{run_on_matrix, Dissimilarity, TestSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioId {
    /// Gaussians with swapped diagonal dispersions `(1, .., 1, 2, .., 2)`.
    Ex1,
    /// `N(0, 5)` against scaled `t_5` coordinates with the same variance.
    Ex2,
    /// `N(0, I)` against `N(0.2·1, I/γ)`.
    Ex3,
    /// Two-component Gaussian mixtures along `1` and the alternating sign vector.
    Ex4,
    /// Uniform cube of side 1 against a mixture of cubes of side 0.9 and 1.1.
    Ex5,
    /// Sparse location and scale shift on `⌈√d⌉` coordinates.
    Ex6,
    /// `t_3` shape change with unit variance on `⌈d^{2/3}⌉` coordinates.
    Ex7,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 7] = [
        ScenarioId::Ex1,
        ScenarioId::Ex2,
        ScenarioId::Ex3,
        ScenarioId::Ex4,
        ScenarioId::Ex5,
        ScenarioId::Ex6,
        ScenarioId::Ex7,
    ];

    pub fn token(self) -> &'static str {
        match self {
            ScenarioId::Ex1 => "ex1",
            ScenarioId::Ex2 => "ex2",
            ScenarioId::Ex3 => "ex3",
            ScenarioId::Ex4 => "ex4",
            ScenarioId::Ex5 => "ex5",
            ScenarioId::Ex6 => "ex6",
            ScenarioId::Ex7 => "ex7",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.token() == s.to_ascii_lowercase())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: ScenarioId,
    pub d: usize,
    /// Precision of the second sample in `Ex3`; ignored elsewhere.
    pub gamma: f64,
    /// Draw both samples from the first distribution.
    pub null: bool,
}

/// Smallest `k` with `k^p >= d^q`, i.e. `⌈d^{q/p}⌉` without floating error.
fn ceil_root_power(d: usize, q: u32, p: u32) -> usize {
    let target = (d as u128).pow(q);
    let mut k = ((d as f64).powf(q as f64 / p as f64).floor() as u128).saturating_sub(1);
    while k.pow(p) < target {
        k += 1;
    }
    k as usize
}

impl Scenario {
    pub fn new(id: ScenarioId, d: usize) -> Self {
        Self { id, d, gamma: 1.0, null: false }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn null_mode(mut self, null: bool) -> Self {
        self.null = null;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if self.id == ScenarioId::Ex1 && self.d % 2 != 0 {
            return Err(Error::InvalidArgument(format!("ex1 needs an even dimension, got {}", self.d)));
        }
        if self.id == ScenarioId::Ex3 && !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma = {} must be positive", self.gamma)));
        }
        Ok(())
    }

    /// Number of coordinates carrying signal in the sparse scenarios.
    pub fn signal_coordinates(&self) -> usize {
        match self.id {
            ScenarioId::Ex6 => ceil_root_power(self.d, 1, 2),
            ScenarioId::Ex7 => ceil_root_power(self.d, 2, 3),
            _ => self.d,
        }
    }

    pub fn theory(&self) -> ScenarioTheory {
        match self.id {
            ScenarioId::Ex1 => ScenarioTheory::known(0.0, 1.5, 1.5),
            ScenarioId::Ex2 => ScenarioTheory::known(0.0, 5.0, 5.0),
            ScenarioId::Ex3 if self.null => ScenarioTheory::known(0.0, 1.0, 1.0),
            ScenarioId::Ex3 => ScenarioTheory::known(0.04, 1.0, 1.0 / self.gamma),
            _ => ScenarioTheory::unavailable(),
        }
    }

    fn draw_first(&self, s: &mut Stream, row: &mut Vec<f64>) {
        let d = self.d;
        match self.id {
            ScenarioId::Ex1 => {
                for q in 0..d {
                    let sd = if q < d / 2 { 1.0 } else { std::f64::consts::SQRT_2 };
                    row.push(sd * s.standard_normal());
                }
            }
            ScenarioId::Ex2 => row.extend((0..d).map(|_| 5f64.sqrt() * s.standard_normal())),
            ScenarioId::Ex3 | ScenarioId::Ex6 | ScenarioId::Ex7 => {
                row.extend((0..d).map(|_| s.standard_normal()))
            }
            ScenarioId::Ex4 => {
                let (mean, sd) = if s.coin() { (0.3, 1.0) } else { (-0.3, 2.0) };
                row.extend((0..d).map(|_| s.normal(mean, sd)));
            }
            ScenarioId::Ex5 => row.extend((0..d).map(|_| s.uniform_in(-0.5, 0.5))),
        }
    }

    fn draw_second(&self, s: &mut Stream, row: &mut Vec<f64>) {
        if self.null {
            return self.draw_first(s, row);
        }
        let d = self.d;
        match self.id {
            ScenarioId::Ex1 => {
                for q in 0..d {
                    let sd = if q < d / 2 { std::f64::consts::SQRT_2 } else { 1.0 };
                    row.push(sd * s.standard_normal());
                }
            }
            ScenarioId::Ex2 => row.extend((0..d).map(|_| 3f64.sqrt() * s.student_t(5))),
            ScenarioId::Ex3 => {
                let sd = (1.0 / self.gamma).sqrt();
                row.extend((0..d).map(|_| s.normal(0.2, sd)));
            }
            ScenarioId::Ex4 => {
                let (shift, sd) = if s.coin() { (0.3, 1.0) } else { (-0.3, 2.0) };
                for q in 0..d {
                    let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                    row.push(s.normal(shift * sign, sd));
                }
            }
            ScenarioId::Ex5 => {
                let half = if s.coin() { 0.45 } else { 0.55 };
                row.extend((0..d).map(|_| s.uniform_in(-half, half)));
            }
            ScenarioId::Ex6 => {
                let k = self.signal_coordinates();
                let log_d = (d as f64).ln();
                let (mean, sd) = ((0.01 * log_d).sqrt(), (0.5 * log_d).sqrt());
                for q in 0..d {
                    row.push(if q < k { s.normal(mean, sd) } else { s.standard_normal() });
                }
            }
            ScenarioId::Ex7 => {
                let k = self.signal_coordinates();
                let scale = (1.0f64 / 3.0).sqrt();
                for q in 0..d {
                    row.push(if q < k { scale * s.student_t(3) } else { s.standard_normal() });
                }
            }
        }
    }
}

/// Limiting scaled quantities of the pair `(F, G)`: `ν²` is the limit of
/// `‖μ_F − μ_G‖²/d`, `σ²` the limits of `tr Σ / d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTheory {
    pub nu2: f64,
    pub sigma_f2: f64,
    pub sigma_g2: f64,
    pub available: bool,
}

impl ScenarioTheory {
    fn known(nu2: f64, sigma_f2: f64, sigma_g2: f64) -> Self {
        Self { nu2, sigma_f2, sigma_g2, available: true }
    }

    fn unavailable() -> Self {
        Self { nu2: f64::NAN, sigma_f2: f64::NAN, sigma_g2: f64::NAN, available: false }
    }

    /// Limits of `d^{-1/2}‖X−X'‖`, `d^{-1/2}‖Y−Y'‖` and `d^{-1/2}‖X−Y‖`.
    pub fn scaled_distance_limits(&self) -> [f64; 3] {
        [
            (2.0 * self.sigma_f2).sqrt(),
            (2.0 * self.sigma_g2).sqrt(),
            (self.sigma_f2 + self.sigma_g2 + self.nu2).sqrt(),
        ]
    }
}

const GENERATE_TAG: u64 = 0x0047_454e;

/// First `m` rows from `F`, next `n` from `G`; deterministic in `(scenario, seed)`.
pub fn generate(sc: &Scenario, m: usize, n: usize, seed: u64) -> Result<(PooledSample, LabelVector)> {
    sc.validate()?;
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("sample sizes must be positive".into()));
    }
    let mut s = Stream::new(seed, &[GENERATE_TAG]);
    let mut points = Vec::with_capacity(m + n);
    for idx in 0..m + n {
        let mut row = Vec::with_capacity(sc.d);
        if idx < m {
            sc.draw_first(&mut s, &mut row);
        } else {
            sc.draw_second(&mut s, &mut row);
        }
        points.push(Observation::new(row)?);
    }
    Ok((PooledSample::new(points, m)?, LabelVector::from_counts(m, n)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Grid {
    Dimensions(Vec<usize>),
    /// `γ` values at a fixed dimension (`Ex3`).
    Gammas { d: usize, gammas: Vec<f64> },
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::Dimensions(ds) => ds.len(),
            Grid::Gammas { gammas, .. } => gammas.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn scenario_at(&self, base: &Scenario, idx: usize) -> Scenario {
        match self {
            Grid::Dimensions(ds) => Scenario { d: ds[idx], ..*base },
            Grid::Gammas { d, gammas } => Scenario { d: *d, gamma: gammas[idx], ..*base },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub scenario: String,
    pub d: usize,
    /// Only meaningful for `Ex3`.
    pub gamma: Option<f64>,
    pub test: String,
    pub kernel: String,
    pub reps: usize,
    pub power: f64,
    pub se: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub rows: Vec<PowerRow>,
}

pub const POWER_HEADER: [&str; 9] =
    ["scenario", "d", "gamma", "test", "kernel", "reps", "power", "se", "seconds"];

/// 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl PowerTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(POWER_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.scenario.clone(),
                r.d.to_string(),
                r.gamma.map(fmt_float).unwrap_or_default(),
                r.test.clone(),
                r.kernel.clone(),
                r.reps.to_string(),
                fmt_float(r.power),
                fmt_float(r.se),
                fmt_float(r.seconds),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn power_of(&self, test: &str, kernel: &str, d: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.test == test && r.kernel == kernel && r.d == d)
            .map(|r| r.power)
    }
}

/// Outcome of one test on one replication.
#[derive(Debug, Clone, Copy)]
pub struct Decision {
    pub reject: bool,
    pub seconds: f64,
}

/// Generic harness: for each grid point and replication, `decide` receives
/// the generated data and a replication seed and returns one decision per
/// test. Replication seeds are `derive_seed(seed, [grid index, rep])`.
pub fn power_study_with<F>(
    base: &Scenario,
    m: usize,
    n: usize,
    grid: &Grid,
    reps: usize,
    seed: u64,
    names: &[(String, String)],
    decide: F,
) -> Result<PowerTable>
where
    F: Fn(&PooledSample, &LabelVector, u64) -> Result<Vec<Decision>> + Sync,
{
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let mut table = PowerTable::default();
    for gi in 0..grid.len() {
        let sc = grid.scenario_at(base, gi);
        sc.validate()?;
        let per_rep: Vec<Vec<Decision>> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let rep_seed = derive_seed(seed, &[gi as u64, r as u64]);
                let (z, lab) = generate(&sc, m, n, rep_seed)?;
                let out = decide(&z, &lab, rep_seed)?;
                if out.len() != names.len() {
                    return Err(Error::InvalidArgument(format!(
                        "decision count {} does not match {} tests",
                        out.len(),
                        names.len()
                    )));
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        for (ti, (test, kernel)) in names.iter().enumerate() {
            let rejections = per_rep.iter().filter(|d| d[ti].reject).count();
            let seconds = per_rep.iter().map(|d| d[ti].seconds).sum::<f64>();
            let power = rejections as f64 / reps as f64;
            table.rows.push(PowerRow {
                scenario: sc.id.token().to_string(),
                d: sc.d,
                gamma: (sc.id == ScenarioId::Ex3).then_some(sc.gamma),
                test: test.clone(),
                kernel: kernel.clone(),
                reps,
                power,
                se: (power * (1.0 - power) / reps as f64).sqrt(),
                seconds,
            });
        }
    }
    Ok(table)
}

/// Rejection rates of `tests` over `reps` seeded replications per grid point.
/// See [`battery`] for how each replication is evaluated.
pub fn power_study(
    base: &Scenario,
    m: usize,
    n: usize,
    grid: &Grid,
    tests: &[TestSpec],
    plan: &PermutationPlan,
    reps: usize,
) -> Result<PowerTable> {
    plan.validate()?;
    for t in tests {
        t.validate()?;
    }
    let names: Vec<(String, String)> = tests
        .iter()
        .map(|t| (t.stat.token().to_string(), t.dissimilarity.label()))
        .collect();
    power_study_with(base, m, n, grid, reps, plan.seed, &names, |z, lab, rep_seed| {
        battery(z, lab, tests, plan, rep_seed)
    })
}

/// Runs every test in `tests` on one dataset. Each dissimilarity matrix is
/// computed once and its cost charged to every test that uses it; test `i`
/// draws its permutations from `derive_seed(rep_seed, [i])`.
pub fn battery(
    z: &PooledSample,
    lab: &LabelVector,
    tests: &[TestSpec],
    plan: &PermutationPlan,
    rep_seed: u64,
) -> Result<Vec<Decision>> {
    let mut kinds: Vec<Dissimilarity> = tests.iter().map(|t| t.dissimilarity).collect();
    kinds.sort();
    kinds.dedup();
    let mut matrices: Vec<(SymMatrix, f64)> = Vec::with_capacity(kinds.len());
    for kd in &kinds {
        let start = Instant::now();
        let dm = kd.matrix(z)?;
        matrices.push((dm, start.elapsed().as_secs_f64()));
    }
    tests
        .iter()
        .enumerate()
        .map(|(ti, t)| {
            let (dm, build) = &matrices[kinds.binary_search(&t.dissimilarity).unwrap()];
            let test_plan = PermutationPlan { seed: derive_seed(rep_seed, &[ti as u64]), ..*plan };
            let start = Instant::now();
            let report = run_on_matrix(dm, t, lab, &test_plan)?;
            Ok(Decision { reject: report.reject, seconds: build + start.elapsed().as_secs_f64() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_coordinate_counts() {
        let s = |id, d| Scenario::new(id, d).signal_coordinates();
        assert_eq!(s(ScenarioId::Ex6, 2), 2);
        assert_eq!(s(ScenarioId::Ex6, 4), 2);
        assert_eq!(s(ScenarioId::Ex6, 1024), 32);
        assert_eq!(s(ScenarioId::Ex6, 1000), 32);
        assert_eq!(s(ScenarioId::Ex7, 8), 4);
        assert_eq!(s(ScenarioId::Ex7, 27), 9);
        assert_eq!(s(ScenarioId::Ex7, 1024), 102);
        assert_eq!(s(ScenarioId::Ex7, 1), 1);
    }

    #[test]
    fn parameter_validation() {
        assert!(Scenario::new(ScenarioId::Ex1, 3).validate().is_err());
        assert!(Scenario::new(ScenarioId::Ex3, 4).with_gamma(0.0).validate().is_err());
        assert!(generate(&Scenario::new(ScenarioId::Ex2, 4), 0, 3, 1).is_err());
    }

    #[test]
    fn reproducible() {
        let sc = Scenario::new(ScenarioId::Ex4, 16);
        let a = generate(&sc, 5, 6, 99).unwrap();
        let b = generate(&sc, 5, 6, 99).unwrap();
        assert_eq!(a, b);
        let c = generate(&sc, 5, 6, 100).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn hypercube_supports() {
        let (z, _) = generate(&Scenario::new(ScenarioId::Ex5, 50), 30, 30, 5).unwrap();
        for (i, p) in z.points().iter().enumerate() {
            let bound = if i < 30 { 0.5 } else { 0.55 };
            assert!(p.coords().iter().all(|c| c.abs() <= bound));
        }
    }

    #[test]
    fn theory_values() {
        let t = Scenario::new(ScenarioId::Ex3, 10).with_gamma(4.0).theory();
        assert!(t.available);
        assert_eq!((t.nu2, t.sigma_f2, t.sigma_g2), (0.04, 1.0, 0.25));
        assert!(!Scenario::new(ScenarioId::Ex5, 10).theory().available);
    }

    #[test]
    fn float_format() {
        assert_eq!(fmt_float(0.05), "5.0000000000000003e-2");
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
    }
}
