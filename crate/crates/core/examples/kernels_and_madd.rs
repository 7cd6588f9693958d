//! Pairwise dissimilarities on a small pooled sample, with and without MADD.

use graphtest::prelude::*;

fn main() -> graphtest::Result<()> {
    let sc = Scenario::new(ScenarioId::Ex3, 500).with_gamma(4.0);
    let (z, _) = generate(&sc, 4, 4, 11)?;

    for kernel in KernelFamily::ALL {
        let base = pairwise_matrix(&z, kernel)?;
        let rho = madd_matrix(&base)?;
        println!("{}:", kernel.as_str());
        for i in 0..z.len() {
            let row: Vec<String> = (0..z.len())
                .map(|j| format!("{:.3}/{:.3}", base.matrix().get(i, j), rho.matrix().get(i, j)))
                .collect();
            println!("  {}", row.join(" "));
        }
    }

    // Scaled Euclidean distances concentrate: within F near √2, within G near
    // √(2/γ), between near √(ν² + 1 + 1/γ).
    let t = sc.theory();
    let e = pairwise_matrix(&z, KernelFamily::EuclidScaled)?;
    println!(
        "within F {:.3} (limit {:.3}), within G {:.3} (limit {:.3}), between {:.3} (limit {:.3})",
        e.matrix().get(0, 1),
        (2.0 * t.sigma_f2).sqrt(),
        e.matrix().get(4, 5),
        (2.0 * t.sigma_g2).sqrt(),
        e.matrix().get(0, 4),
        (t.nu2 + t.sigma_f2 + t.sigma_g2).sqrt(),
    );
    Ok(())
}
