//! A small power study on the scale-shift scenario, written as CSV to stdout.
//!
//! `cargo run --release --example power_curve -- 200` sets the replication count.

use graphtest::prelude::*;

fn main() -> graphtest::Result<()> {
    let reps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let tests: Vec<TestSpec> = ["nn:euclid", "mst:euclid", "nn:rho0", "mst:rho0", "shp:rho0"]
        .iter()
        .map(|t| {
            let (stat, dis) = t.split_once(':').unwrap();
            TestSpec::new(StatKind::parse(stat).unwrap(), Dissimilarity::parse(dis).unwrap())
        })
        .collect();
    let plan = PermutationPlan { b: 200, seed: 1, ..Default::default() };
    let grid = Grid::Dimensions(vec![4, 16, 64, 256]);
    let table = power_study(&Scenario::new(ScenarioId::Ex3, 4).with_gamma(2.0), 15, 15, &grid, &tests, &plan, reps)?;
    table.write_csv(std::io::stdout().lock())
}
