use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// Largest `N` accepted by the exact subset dynamic program.
pub const EXACT_SHP_MAX: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShpMode {
    /// Exact for `N <= EXACT_SHP_MAX`, two-opt otherwise.
    Auto,
    Exact,
    TwoOpt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMethod {
    Exact,
    TwoOpt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamPath {
    pub order: Vec<usize>,
    pub total_weight: f64,
    pub method: PathMethod,
}

impl HamPath {
    /// Consecutive vertex pairs along the path.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.order.windows(2).map(|w| super::undirected(w[0], w[1])).collect()
    }
}

fn path_weight(dm: &SymMatrix, order: &[usize]) -> f64 {
    order.windows(2).map(|w| dm.get(w[0], w[1])).sum()
}

/// Shortest Hamiltonian path with free endpoints.
pub fn shp(dm: &SymMatrix, mode: ShpMode) -> Result<HamPath> {
    let n = dm.n();
    if n < 2 {
        return Err(Error::TooFewPoints { min: 2, got: n });
    }
    let exact = match mode {
        ShpMode::Auto => n <= EXACT_SHP_MAX,
        ShpMode::Exact => {
            if n > EXACT_SHP_MAX {
                return Err(Error::ExactPathTooLarge { n, max: EXACT_SHP_MAX });
            }
            true
        }
        ShpMode::TwoOpt => false,
    };
    let (order, method) = if exact {
        (held_karp(dm), PathMethod::Exact)
    } else {
        (multistart_local_search(dm), PathMethod::TwoOpt)
    };
    let total_weight = path_weight(dm, &order);
    Ok(HamPath { order, total_weight, method })
}

/// Held–Karp over subsets; `best[mask][j]` is the lightest path covering
/// `mask` and ending at `j`, starting anywhere.
fn held_karp(dm: &SymMatrix) -> Vec<usize> {
    let n = dm.n();
    let full = 1usize << n;
    let mut best = vec![f64::INFINITY; full * n];
    let mut prev = vec![usize::MAX; full * n];
    for j in 0..n {
        best[(1 << j) * n + j] = 0.0;
    }
    for mask in 1..full {
        for j in 0..n {
            if mask & (1 << j) == 0 {
                continue;
            }
            let cur = best[mask * n + j];
            if !cur.is_finite() {
                continue;
            }
            for t in 0..n {
                if mask & (1 << t) != 0 {
                    continue;
                }
                let next = mask | (1 << t);
                let cand = cur + dm.get(j, t);
                if cand < best[next * n + t] {
                    best[next * n + t] = cand;
                    prev[next * n + t] = j;
                }
            }
        }
    }
    let last = full - 1;
    let mut end = 0;
    for j in 1..n {
        if best[last * n + j] < best[last * n + end] {
            end = j;
        }
    }
    let mut order = Vec::with_capacity(n);
    let (mut mask, mut j) = (last, end);
    loop {
        order.push(j);
        let p = prev[mask * n + j];
        if p == usize::MAX {
            break;
        }
        mask &= !(1 << j);
        j = p;
    }
    order.reverse();
    order
}

/// Nearest-neighbour path from `start`.
fn greedy_from(dm: &SymMatrix, start: usize) -> Vec<usize> {
    let n = dm.n();
    let mut visited = vec![false; n];
    visited[start] = true;
    let mut order = Vec::with_capacity(n);
    order.push(start);
    let mut cur = start;
    for _ in 1..n {
        let row = dm.row(cur);
        let mut next = usize::MAX;
        for j in 0..n {
            if !visited[j] && (next == usize::MAX || row[j] < row[next]) {
                next = j;
            }
        }
        visited[next] = true;
        order.push(next);
        cur = next;
    }
    order
}

/// Local search from the greedy path of every start vertex; the lightest
/// result wins, ties going to the smaller start.
fn multistart_local_search(dm: &SymMatrix) -> Vec<usize> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for start in 0..dm.n() {
        let order = two_opt(dm, greedy_from(dm, start));
        let cost = path_weight(dm, &order);
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, order));
        }
    }
    best.expect("n >= 2").1
}

/// Segment reversals and short segment moves (or-opt) until no move improves
/// the path or `50 N²` moves have been evaluated. Moves are scanned in a fixed
/// order and applied as soon as found.
fn two_opt(dm: &SymMatrix, mut order: Vec<usize>) -> Vec<usize> {
    let n = order.len();
    if n < 3 {
        return order;
    }
    let budget = 50 * n * n;
    let scale = dm.as_slice().iter().fold(0.0f64, |a, &b| a.max(b));
    let eps = 1e-12 * scale;
    let mut evals = 0usize;
    loop {
        let reversed = reversal_pass(dm, &mut order, &mut evals, budget, eps);
        let moved = evals < budget && segment_pass(dm, &mut order, &mut evals, budget, eps);
        if !(reversed || moved) || evals >= budget {
            break;
        }
    }
    order
}

fn reversal_pass(dm: &SymMatrix, order: &mut [usize], evals: &mut usize, budget: usize, eps: f64) -> bool {
    let n = order.len();
    let mut improved = false;
    for i in 0..n - 1 {
        for j in (i + 1)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if *evals >= budget {
                return improved;
            }
            *evals += 1;
            let mut delta = 0.0;
            if i > 0 {
                delta += dm.get(order[i - 1], order[j]) - dm.get(order[i - 1], order[i]);
            }
            if j < n - 1 {
                delta += dm.get(order[i], order[j + 1]) - dm.get(order[j], order[j + 1]);
            }
            if delta < -eps {
                order[i..=j].reverse();
                improved = true;
            }
        }
    }
    improved
}

/// Relocates segments of up to three vertices, in either orientation, to
/// any gap of the remaining path including both ends.
fn segment_pass(dm: &SymMatrix, order: &mut Vec<usize>, evals: &mut usize, budget: usize, eps: f64) -> bool {
    let n = order.len();
    let mut improved = false;
    for len in 1..=3.min(n - 1) {
        let mut i = 0;
        while i + len <= n {
            let j = i + len - 1;
            let (first, last) = (order[i], order[j]);
            let prev = (i > 0).then(|| order[i - 1]);
            let next = (j + 1 < n).then(|| order[j + 1]);
            let mut removal = 0.0;
            if let Some(p) = prev {
                removal += dm.get(p, first);
            }
            if let Some(q) = next {
                removal += dm.get(last, q);
            }
            if let (Some(p), Some(q)) = (prev, next) {
                removal -= dm.get(p, q);
            }
            // Gaps are (left, right) neighbours in the path without the segment;
            // `None` marks an open end.
            let rest: Vec<usize> = order[..i].iter().chain(&order[j + 1..]).copied().collect();
            let mut found: Option<(usize, bool, f64)> = None;
            'gaps: for g in 0..=rest.len() {
                if g == i {
                    continue;
                }
                let left = g.checked_sub(1).map(|x| rest[x]);
                let right = rest.get(g).copied();
                for rev in [false, true] {
                    if *evals >= budget {
                        break 'gaps;
                    }
                    *evals += 1;
                    let (s, t) = if rev { (last, first) } else { (first, last) };
                    let mut add = 0.0;
                    if let Some(l) = left {
                        add += dm.get(l, s);
                    }
                    if let Some(r) = right {
                        add += dm.get(t, r);
                    }
                    if let (Some(l), Some(r)) = (left, right) {
                        add -= dm.get(l, r);
                    }
                    if add - removal < -eps {
                        found = Some((g, rev, add - removal));
                        break 'gaps;
                    }
                }
            }
            if let Some((g, rev, _)) = found {
                let mut seg: Vec<usize> = order[i..=j].to_vec();
                if rev {
                    seg.reverse();
                }
                let mut rebuilt = Vec::with_capacity(n);
                rebuilt.extend_from_slice(&rest[..g]);
                rebuilt.extend_from_slice(&seg);
                rebuilt.extend_from_slice(&rest[g..]);
                *order = rebuilt;
                improved = true;
            }
            if *evals >= budget {
                return improved;
            }
            i += 1;
        }
    }
    improved
}
