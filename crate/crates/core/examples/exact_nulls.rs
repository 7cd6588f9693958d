//! Exact null laws of the SHP run count and the cross-match count.

use graphtest::calibrate::{nbp_boundary_probability, shp_three_run_probability};
use graphtest::prelude::*;

fn main() -> graphtest::Result<()> {
    let (m, n) = (20, 20);
    println!("r    P(R <= r)");
    for r in 2..=12 {
        println!("{r:<4} {:.6}", shp_run_null_cdf(m, n, r)?);
    }
    println!("a    P(A <= a)");
    for a in (0..=12).step_by(2) {
        println!("{a:<4} {:.6}", nbp_null_cdf(m, n, a)?);
    }
    println!("P(SHP runs <= 3) = {:.3e}", shp_three_run_probability(m, n));
    println!("P(no cross pairs) = {:.3e}", nbp_boundary_probability(m, n));

    let report = exact_null_test(StatValue::new(StatKind::ShpRun, 14.0), m, n, 0.05)?;
    println!("14 runs: p = {:.4}, reject = {}", report.p_value, report.reject);
    Ok(())
}
