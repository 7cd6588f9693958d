use super::blossom::max_weight_matching;
use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// Minimum-weight perfect matching. For odd `N` one vertex is left out.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// `⌊N/2⌋` disjoint pairs `(a, b)` with `a < b`, sorted.
    pub pairs: Vec<(usize, usize)>,
    pub dropped: Option<usize>,
    pub total_weight: f64,
}

impl Matching {
    pub fn n(&self) -> usize {
        2 * self.pairs.len() + usize::from(self.dropped.is_some())
    }
}

// Weights are mapped to integers on a 2^50 grid so the blossom duals stay
// exact; the result is optimal up to N * wmax * 2^-51.
const GRID: f64 = (1u64 << 50) as f64;

/// Odd `N` adds a phantom vertex at distance zero from everything; its
/// partner is reported as `dropped`, which is the best single vertex to remove.
pub fn min_weight_matching(dm: &SymMatrix) -> Result<Matching> {
    let n = dm.n();
    if n < 2 {
        return Err(Error::TooFewPoints { min: 2, got: n });
    }
    let size = n + n % 2;
    let wmax = dm.as_slice().iter().fold(0.0f64, |a, &b| a.max(b));
    let quant = |w: f64| -> i64 {
        if wmax > 0.0 {
            (w / wmax * GRID).round() as i64
        } else {
            0
        }
    };
    let ceiling = quant(wmax) + 1;
    let mut edges = Vec::with_capacity(size * (size - 1) / 2);
    for i in 0..size {
        for j in (i + 1)..size {
            let w = if j >= n { 0 } else { quant(dm.get(i, j)) };
            // Doubling keeps every S-S slack even.
            edges.push((i, j, 2 * (ceiling - w)));
        }
    }
    let mate = max_weight_matching(size, &edges, true);
    let mut pairs = Vec::with_capacity(n / 2);
    let mut dropped = None;
    for (v, m) in mate.iter().enumerate() {
        let w = m.ok_or_else(|| Error::InvalidMatrix("matching is not perfect".into()))?;
        if v < w {
            if w >= n {
                dropped = Some(v);
            } else {
                pairs.push((v, w));
            }
        }
    }
    let total_weight = pairs.iter().map(|&(a, b)| dm.get(a, b)).sum();
    debug_assert_eq!(pairs.len(), n / 2);
    Ok(Matching { pairs, dropped, total_weight })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_tight_pairs() {
        let dm = SymMatrix::from_upper(4, |i, j| if (i, j) == (0, 1) || (i, j) == (2, 3) { 1.0 } else { 10.0 });
        let m = min_weight_matching(&dm).unwrap();
        assert_eq!(m.pairs, vec![(0, 1), (2, 3)]);
        assert_eq!(m.total_weight, 2.0);
        assert_eq!(m.dropped, None);
    }

    #[test]
    fn two_vertices() {
        let dm = SymMatrix::from_upper(2, |_, _| 4.0);
        let m = min_weight_matching(&dm).unwrap();
        assert_eq!(m.pairs, vec![(0, 1)]);
    }

    #[test]
    fn odd_drops_the_outlier() {
        let xs: [f64; 5] = [0.0, 1.0, 50.0, 2.0, 3.0];
        let dm = SymMatrix::from_upper(5, |i, j| (xs[i] - xs[j]).abs());
        let m = min_weight_matching(&dm).unwrap();
        assert_eq!(m.dropped, Some(2));
        assert_eq!(m.pairs, vec![(0, 1), (3, 4)]);
        assert_eq!(m.n(), 5);
    }

    #[test]
    fn all_zero_weights() {
        let dm = SymMatrix::from_upper(6, |_, _| 0.0);
        let m = min_weight_matching(&dm).unwrap();
        assert_eq!(m.pairs.len(), 3);
        assert_eq!(m.total_weight, 0.0);
    }
}
