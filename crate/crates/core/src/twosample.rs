//! One-call two-sample tests: dissimilarity, graph, statistic, calibration.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::calibrate::{
    exact_null_test_with, permutation_test_prepared, PermutationPlan, PreparedStatistic, TestReport,
};
use crate::error::{Error, Result};
use crate::graphs::ShpMode;
use crate::kernels::{pairwise_matrix, KernelFamily, PooledSample};
use crate::madd::madd_of;
use crate::matrix::SymMatrix;
use crate::stats::{LabelVector, StatKind, StatValue};

/// Edge weights handed to the graph builders: a base distance, or the MADD
/// index built on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dissimilarity {
    pub kernel: KernelFamily,
    pub madd: bool,
}

impl Dissimilarity {
    pub const fn base(kernel: KernelFamily) -> Self {
        Self { kernel, madd: false }
    }

    pub const fn madd(kernel: KernelFamily) -> Self {
        Self { kernel, madd: true }
    }

    /// `euclid`, `lin`, `log`, `exp` for base distances; `rho0` .. `rho3` for MADD.
    pub fn label(&self) -> String {
        if self.madd {
            format!("rho{}", self.kernel.madd_index())
        } else {
            self.kernel.as_str().to_string()
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        if let Some(idx) = s.strip_prefix("rho") {
            let kernel = match idx {
                "0" => KernelFamily::EuclidScaled,
                "1" => KernelFamily::Lin,
                "2" => KernelFamily::Log1p,
                "3" => KernelFamily::ExpNeg,
                _ => return None,
            };
            return Some(Self::madd(kernel));
        }
        KernelFamily::parse(s).map(Self::base)
    }

    pub fn matrix(&self, z: &PooledSample) -> Result<SymMatrix> {
        let base = pairwise_matrix(z, self.kernel)?.into_matrix();
        if self.madd {
            madd_of(&base)
        } else {
            Ok(base)
        }
    }
}

impl fmt::Display for Dissimilarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Calibration {
    Permutation,
    /// Exact null law; only for `SHP_RUN` and `NBP`.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TestSpec {
    pub stat: StatKind,
    pub dissimilarity: Dissimilarity,
    pub k: usize,
    pub calibration: Calibration,
    pub shp_mode: ShpMode,
}

impl TestSpec {
    /// `k = 3`, permutation calibration, automatic SHP solver.
    pub fn new(stat: StatKind, dissimilarity: Dissimilarity) -> Self {
        Self { stat, dissimilarity, k: 3, calibration: Calibration::Permutation, shp_mode: ShpMode::Auto }
    }

    pub fn with_calibration(mut self, calibration: Calibration) -> Self {
        self.calibration = calibration;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    /// `nn:rho3` style name.
    pub fn label(&self) -> String {
        format!("{}:{}", self.stat.token(), self.dissimilarity.label())
    }

    pub fn validate(&self) -> Result<()> {
        if self.calibration == Calibration::Exact && !self.stat.is_distribution_free() {
            return Err(Error::InvalidArgument(format!(
                "exact calibration is only available for shp and nbp, not {}",
                self.stat.token()
            )));
        }
        Ok(())
    }
}

/// Runs `spec` on an already computed dissimilarity matrix. The matrix never
/// depends on the labels, so the graph is built once.
pub fn run_on_matrix(
    dm: &SymMatrix,
    spec: &TestSpec,
    lab: &LabelVector,
    plan: &PermutationPlan,
) -> Result<TestReport> {
    spec.validate()?;
    if dm.n() != lab.len() {
        return Err(Error::SizeMismatch { graph: dm.n(), labels: lab.len() });
    }
    let prepared = PreparedStatistic::build(dm, spec.stat, spec.k, spec.shp_mode, lab.m(), lab.n())?;
    match spec.calibration {
        Calibration::Permutation => permutation_test_prepared(&prepared, lab, plan),
        Calibration::Exact => {
            plan.validate()?;
            let stat = StatValue::new(spec.stat, prepared.evaluate(lab.labels()));
            exact_null_test_with(stat, lab.m(), lab.n(), plan.alpha, plan.ties, plan.seed)
        }
    }
}

/// Full pipeline from a pooled sample.
pub fn run_test(
    z: &PooledSample,
    spec: &TestSpec,
    lab: &LabelVector,
    plan: &PermutationPlan,
) -> Result<TestReport> {
    let dm = spec.dissimilarity.matrix(z)?;
    run_on_matrix(&dm, spec, lab, plan)
}
