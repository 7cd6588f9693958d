//! The four graphs built on one dissimilarity matrix.

use graphtest::graphs::PathMethod;
use graphtest::prelude::*;

fn main() -> graphtest::Result<()> {
    let rows: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64, (i * i % 7) as f64]).collect();
    let dm = SymMatrix::from_rows(
        &rows
            .iter()
            .map(|a| rows.iter().map(|b| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()).collect())
            .collect::<Vec<Vec<f64>>>(),
    )?;

    let knn = knn_digraph(&dm, 2)?;
    for i in 0..dm.n() {
        println!("{i} -> {:?}", knn.neighbours(i));
    }

    let tree = mst(&dm)?;
    println!("mst weight {:.3}: {:?}", tree.total_weight, tree.edges);

    for mode in [ShpMode::Exact, ShpMode::TwoOpt] {
        let path = shp(&dm, mode)?;
        let how = if path.method == PathMethod::Exact { "exact" } else { "two_opt" };
        println!("path ({how}) weight {:.3}: {:?}", path.total_weight, path.order);
    }

    // Nine vertices: one is left out of the matching.
    let matching = min_weight_matching(&dm)?;
    println!("matching weight {:.3}: {:?}, unpaired {:?}", matching.total_weight, matching.pairs, matching.dropped);
    Ok(())
}
