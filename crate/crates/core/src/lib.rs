//! Graph-based two-sample tests for high-dimensional, low-sample-size data.
//!
//! The pooled sample is turned into a dissimilarity matrix, either a
//! coordinate-averaged distance `φ_{h,ψ}` ([`kernels`]) or the MADD index
//! built on it ([`madd`]). A graph is then built on that matrix ([`graphs`]),
//! a statistic is read off the graph and the sample labels ([`stats`]), and
//! the statistic is calibrated by label permutation or by its exact null law
//! ([`calibrate`]). [`simgen`] generates the simulation scenarios and runs
//! power studies; [`cli`] is the command-line front end.
//!
//! ```
//! use graphtest::prelude::*;
//!
//! let sc = Scenario::new(ScenarioId::Ex3, 200).with_gamma(5.0);
//! let (z, labels) = generate(&sc, 10, 10, 7).unwrap();
//! let spec = TestSpec::new(StatKind::Nn, Dissimilarity::madd(KernelFamily::EuclidScaled));
//! let plan = PermutationPlan { b: 200, seed: 1, ..Default::default() };
//! let report = run_test(&z, &spec, &labels, &plan).unwrap();
//! assert!(report.p_value > 0.0 && report.p_value <= 1.0);
//! ```

pub mod calibrate;
pub mod cli;
pub mod error;
pub mod graphs;
pub mod kernels;
pub mod madd;
pub mod matrix;
pub mod rng;
pub mod simgen;
pub mod stats;
pub mod twosample;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::calibrate::{
        exact_null_test, nbp_null_cdf, permutation_test, shp_run_null_cdf, Method,
        PermutationPlan, TestReport, TieMode,
    };
    pub use crate::graphs::{knn_digraph, min_weight_matching, mst, shp, ShpMode};
    pub use crate::kernels::{kernel_distance, pairwise_matrix, KernelFamily, Observation, PooledSample};
    pub use crate::madd::{madd_matrix, madd_of};
    pub use crate::matrix::SymMatrix;
    pub use crate::simgen::{generate, power_study, Grid, PowerTable, Scenario, ScenarioId};
    pub use crate::stats::{LabelVector, Sample, StatKind, StatValue};
    pub use crate::twosample::{run_on_matrix, run_test, Calibration, Dissimilarity, TestSpec};
}
