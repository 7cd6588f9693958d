//! Loads a labelled delimited file, draws a class-proportional subsample and tests it.

use std::io::Write;

use graphtest::cli::dataset::{load_delimited, subsample, DelimitedFormat, SubsampleSpec};
use graphtest::prelude::*;
use graphtest::rng::Stream;

fn main() -> graphtest::Result<()> {
    let mut file = tempfile::NamedTempFile::new()?;
    let mut s = Stream::new(3, &[]);
    for i in 0..121 {
        let (label, shift) = if i < 48 { ("1", 0.0) } else { ("2", 0.6) };
        let row: Vec<String> = (0..64).map(|_| (shift + s.standard_normal()).to_string()).collect();
        writeln!(file, "{label},{}", row.join(","))?;
    }

    let ds = load_delimited(file.path(), DelimitedFormat::default())?;
    println!("loaded {} + {} rows of dimension {}", ds.m(), ds.n(), ds.pooled.dim());

    let plan = PermutationPlan { b: 500, seed: 4, ..Default::default() };
    let spec = TestSpec::new(StatKind::Nn, Dissimilarity::madd(KernelFamily::EuclidScaled));
    for total in [20, 40, 80] {
        let sub = subsample(&ds, SubsampleSpec { total_size: total, seed: 8 })?;
        let r = run_test(&sub.pooled, &spec, &sub.labels, &plan)?;
        println!("size {total}: {} + {}, p = {:.3}", sub.m(), sub.n(), r.p_value);
    }
    Ok(())
}
