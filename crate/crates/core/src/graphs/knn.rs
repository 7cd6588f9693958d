use rayon::prelude::*;

use super::undirected;
use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// Directed k-nearest-neighbour graph: edge `i -> j` iff `j` is among the `k`
/// nearest neighbours of `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnnDigraph {
    n: usize,
    k: usize,
    /// Targets of vertex `i` are `targets[i*k .. (i+1)*k]`, nearest first.
    targets: Vec<usize>,
}

impl KnnDigraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.targets[i * self.k..(i + 1) * self.k]
    }

    /// All `N·k` directed edges, grouped by source.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| self.neighbours(i).iter().map(move |&j| (i, j)))
            .collect()
    }

    /// Symmetrized graph: `(u, v)` present if either endpoint lists the other.
    /// Edges are deduplicated and sorted.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> =
            self.edges().into_iter().map(|(i, j)| undirected(i, j)).collect();
        e.sort_unstable();
        e.dedup();
        e
    }
}

pub fn knn_digraph(dm: &SymMatrix, k: usize) -> Result<KnnDigraph> {
    let n = dm.n();
    if k == 0 || k + 1 > n {
        return Err(Error::KOutOfRange { k, max: n.saturating_sub(1) });
    }
    let rows: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = dm.row(i);
            let mut cand: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            cand.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
            cand.truncate(k);
            cand
        })
        .collect();
    let targets: Vec<usize> = rows.into_iter().flatten().collect();
    debug_assert_eq!(targets.len(), n * k);
    Ok(KnnDigraph { n, k, targets })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> SymMatrix {
        SymMatrix::from_upper(xs.len(), |i, j| (xs[i] - xs[j]).abs())
    }

    #[test]
    fn ties_go_to_smaller_index() {
        let dm = SymMatrix::from_upper(3, |_, _| 1.0);
        let g = knn_digraph(&dm, 1).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (1, 0), (2, 0)]);
    }

    #[test]
    fn points_on_a_line() {
        let g = knn_digraph(&line(&[0.0, 1.0, 10.0]), 1).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (1, 0), (2, 1)]);
    }

    #[test]
    fn saturated_k_gives_full_digraph() {
        let g = knn_digraph(&line(&[0.0, 1.0, 3.0, 7.0]), 3).unwrap();
        assert_eq!(g.edges().len(), 12);
        assert_eq!(g.undirected_edges().len(), 6);
        for (i, j) in g.edges() {
            assert_ne!(i, j);
        }
    }

    #[test]
    fn k_out_of_range() {
        let dm = line(&[0.0, 1.0, 2.0]);
        assert!(matches!(knn_digraph(&dm, 0), Err(Error::KOutOfRange { .. })));
        assert!(matches!(knn_digraph(&dm, 3), Err(Error::KOutOfRange { .. })));
    }
}
