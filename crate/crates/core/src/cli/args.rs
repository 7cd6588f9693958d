use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "graphtest", version, about = "Graph-based two-sample tests for high-dimensional data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one test on a labelled data file.
    Test(TestArgs),
    /// Estimate rejection rates on simulated scenarios or data subsamples.
    Power(PowerArgs),
    /// Time tests across sample sizes and dimensions.
    Bench(BenchArgs),
    /// Draw a class-proportional subsample of a data file.
    Subsample(SubsampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

impl OnOff {
    pub fn is_on(self) -> bool {
        self == OnOff::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Euclid,
    Lin,
    Log,
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestArg {
    Nn,
    Mst,
    Shp,
    Nbp,
    CfNn,
    CfMst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CalibrationArg {
    Perm,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PowerCalibrationArg {
    /// Exact null for shp and nbp, permutations otherwise.
    Auto,
    Perm,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TiesArg {
    /// Count ties as at least as extreme.
    Conservative,
    /// Break ties with an independent uniform, giving exact size.
    Randomized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShpArg {
    Auto,
    Exact,
    TwoOpt,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Delimited file: one observation per row with a class id column.
    #[arg(long)]
    pub data: PathBuf,
    /// Field delimiter; a single character or `tab`.
    #[arg(long, default_value = ",")]
    pub delimiter: String,
    /// Zero-based position of the class id.
    #[arg(long, default_value_t = 0)]
    pub label_column: usize,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrationArgs {
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Number of random permutations.
    #[arg(long, default_value_t = 1000)]
    pub perms: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = TiesArg::Conservative)]
    pub ties: TiesArg,
    /// Neighbours per point for nn and cf-nn.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = ShpArg::Auto)]
    pub shp: ShpArg,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = KernelArg::Euclid)]
    pub kernel: KernelArg,
    /// Use the mean absolute difference of kernel distances.
    #[arg(long, value_enum, default_value_t = OnOff::Off)]
    pub madd: OnOff,
    #[arg(long, value_enum)]
    pub test: TestArg,
    #[arg(long, value_enum, default_value_t = CalibrationArg::Perm)]
    pub calibration: CalibrationArg,
    #[command(flatten)]
    pub cal: CalibrationArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PowerArgs {
    /// Simulated scenario, ex1 to ex7.
    #[arg(long, conflicts_with = "data")]
    pub scenario: Option<String>,
    /// Dimensions, e.g. `2,4,...,1024`.
    #[arg(long, conflicts_with = "gamma_grid")]
    pub d_grid: Option<String>,
    /// Precision values for ex3 at dimension `--d`.
    #[arg(long)]
    pub gamma_grid: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Precision for ex3 when the grid is over dimensions.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 20)]
    pub m: usize,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Draw both samples from the first distribution.
    #[arg(long)]
    pub null: bool,
    /// Data file for subsample power; use with `--size-grid`.
    #[arg(long, requires = "size_grid")]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = ",")]
    pub delimiter: String,
    #[arg(long, default_value_t = 0)]
    pub label_column: usize,
    /// Total subsample sizes, e.g. `20,30,...,60`.
    #[arg(long, requires = "data")]
    pub size_grid: Option<String>,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    /// Comma separated `test:dissimilarity` pairs, e.g. `nn:euclid,mst:rho0`.
    #[arg(long, default_value = "nn:euclid,mst:euclid,nn:rho0,mst:rho0")]
    pub tests: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OnOff::On)]
    pub plot: OnOff,
    #[arg(long, value_enum, default_value_t = PowerCalibrationArg::Perm)]
    pub calibration: PowerCalibrationArg,
    /// Record wall time; `off` writes zero seconds so output is reproducible.
    #[arg(long, value_enum, default_value_t = OnOff::On)]
    pub timing: OnOff,
    #[command(flatten)]
    pub cal: CalibrationArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "20,40")]
    pub m: String,
    #[arg(long, default_value = "20,40")]
    pub n: String,
    #[arg(long, default_value = "200,500,1000")]
    pub d: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value = "nn,mst")]
    pub tests: String,
    /// Dissimilarities to time, e.g. `euclid,rho0`.
    #[arg(long, default_value = "euclid,rho0")]
    pub kernels: String,
    #[arg(long, value_enum, default_value_t = OnOff::On)]
    pub timing: OnOff,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub cal: CalibrationArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SubsampleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Total number of rows to keep.
    #[arg(long)]
    pub size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}
