use super::undirected;
use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Mst {
    /// `N - 1` edges `(min, max)` in the order Kruskal accepted them.
    pub edges: Vec<(usize, usize)>,
    pub total_weight: f64,
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Kruskal over edges ordered by `(weight, min index, max index)`.
pub fn mst(dm: &SymMatrix) -> Result<Mst> {
    let n = dm.n();
    if n < 2 {
        return Err(Error::TooFewPoints { min: 2, got: n });
    }
    let mut all: Vec<(usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            all.push((i, j));
        }
    }
    all.sort_by(|a, b| dm.get(a.0, a.1).total_cmp(&dm.get(b.0, b.1)).then(a.cmp(b)));
    let mut ds = DisjointSet::new(n);
    let mut edges = Vec::with_capacity(n - 1);
    let mut total_weight = 0.0;
    for (i, j) in all {
        if ds.union(i, j) {
            edges.push(undirected(i, j));
            total_weight += dm.get(i, j);
            if edges.len() == n - 1 {
                break;
            }
        }
    }
    debug_assert_eq!(edges.len(), n - 1);
    Ok(Mst { edges, total_weight })
}
