//! Brute-force references shared by the integration tests.
#![allow(dead_code)]

use graphtest::matrix::SymMatrix;
use graphtest::rng::Stream;
use graphtest::stats::Sample;

/// Symmetric matrix with i.i.d. uniform off-diagonal entries.
pub fn random_matrix(s: &mut Stream, n: usize) -> SymMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = s.uniform();
            rows[i][j] = w;
            rows[j][i] = w;
        }
    }
    SymMatrix::from_rows(&rows).unwrap()
}

/// Euclidean distances between uniform points in the unit square.
pub fn random_planar(s: &mut Stream, n: usize) -> SymMatrix {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (s.uniform(), s.uniform())).collect();
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            rows[i][j] = ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt();
        }
    }
    SymMatrix::from_rows(&rows).unwrap()
}

fn matching_rec(dm: &SymMatrix, free: &mut Vec<usize>) -> f64 {
    if free.len() < 2 {
        return 0.0;
    }
    let a = free.remove(0);
    let mut best = f64::INFINITY;
    for idx in 0..free.len() {
        let b = free.remove(idx);
        best = best.min(dm.get(a, b) + matching_rec(dm, free));
        free.insert(idx, b);
    }
    free.insert(0, a);
    best
}

/// Minimum total weight over all perfect matchings; for odd `N` also over the
/// vertex left out.
pub fn brute_matching(dm: &SymMatrix) -> f64 {
    let n = dm.n();
    if n % 2 == 0 {
        return matching_rec(dm, &mut (0..n).collect());
    }
    (0..n)
        .map(|skip| matching_rec(dm, &mut (0..n).filter(|&v| v != skip).collect()))
        .fold(f64::INFINITY, f64::min)
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            let w = if a == v { b } else if b == v { a } else { continue };
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|x| x)
}

/// Minimum weight over every `(N-1)`-subset of edges that connects the graph.
pub fn brute_mst(dm: &SymMatrix) -> f64 {
    let n = dm.n();
    let all: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let mut best = f64::INFINITY;
    let mut chosen = Vec::new();
    fn rec(
        all: &[(usize, usize)],
        start: usize,
        need: usize,
        chosen: &mut Vec<(usize, usize)>,
        n: usize,
        dm: &SymMatrix,
        best: &mut f64,
    ) {
        if need == 0 {
            if connected(n, chosen) {
                *best = best.min(chosen.iter().map(|&(a, b)| dm.get(a, b)).sum());
            }
            return;
        }
        for i in start..all.len() {
            if all.len() - i < need {
                break;
            }
            chosen.push(all[i]);
            rec(all, i + 1, need - 1, chosen, n, dm, best);
            chosen.pop();
        }
    }
    rec(&all, 0, n - 1, &mut chosen, n, dm, &mut best);
    if n == 1 {
        0.0
    } else {
        best
    }
}

/// Shortest Hamiltonian path with free endpoints by enumerating permutations.
pub fn brute_path(dm: &SymMatrix) -> f64 {
    let n = dm.n();
    let mut best = f64::INFINITY;
    let mut perm: Vec<usize> = (0..n).collect();
    fn rec(dm: &SymMatrix, perm: &mut Vec<usize>, k: usize, acc: f64, best: &mut f64) {
        let n = perm.len();
        if acc >= *best {
            return;
        }
        if k == n {
            *best = acc;
            return;
        }
        for i in k..n {
            perm.swap(k, i);
            let add = if k == 0 { 0.0 } else { dm.get(perm[k - 1], perm[k]) };
            rec(dm, perm, k + 1, acc + add, best);
            perm.swap(k, i);
        }
    }
    rec(dm, &mut perm, 0, 0.0, &mut best);
    best
}

/// Every labelling of `N = m + n` points with exactly `m` first-sample labels.
pub fn labellings(m: usize, n: usize) -> Vec<Vec<Sample>> {
    let total = m + n;
    (0u32..(1 << total))
        .filter(|mask| mask.count_ones() as usize == m)
        .map(|mask| {
            (0..total)
                .map(|i| if mask >> i & 1 == 1 { Sample::First } else { Sample::Second })
                .collect()
        })
        .collect()
}

/// Runs along the path `0, 1, ..., N-1`.
pub fn runs_on_line(lab: &[Sample]) -> usize {
    1 + lab.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Cross pairs in the matching `(0,1), (2,3), ...`; a trailing vertex is unpaired.
pub fn cross_pairs(lab: &[Sample]) -> usize {
    lab.chunks_exact(2).filter(|c| c[0] != c[1]).count()
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Random simple graph on `n` vertices with edge probability `p`.
pub fn random_graph(s: &mut Stream, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if s.uniform() < p {
                edges.push((i, j));
            }
        }
    }
    edges
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}
