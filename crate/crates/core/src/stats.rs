//! Test statistics computed from a graph artifact and a sample labelling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{KnnDigraph, Matching};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sample {
    First,
    Second,
}

impl Sample {
    pub fn code(self) -> u8 {
        match self {
            Sample::First => 1,
            Sample::Second => 2,
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            Sample::First => Sample::Second,
            Sample::Second => Sample::First,
        }
    }
}

/// Sample membership of each pooled point; both samples are non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<Sample>,
    m: usize,
    n: usize,
}

impl LabelVector {
    pub fn new(labels: Vec<Sample>) -> Result<Self> {
        let m = labels.iter().filter(|&&s| s == Sample::First).count();
        let n = labels.len() - m;
        if m == 0 || n == 0 {
            return Err(Error::InvalidLabels(format!(
                "both samples must be non-empty (m = {m}, n = {n})"
            )));
        }
        Ok(Self { labels, m, n })
    }

    /// `m` points of sample 1 followed by `n` of sample 2.
    pub fn from_counts(m: usize, n: usize) -> Result<Self> {
        let mut labels = vec![Sample::First; m];
        labels.extend(std::iter::repeat_n(Sample::Second, n));
        Self::new(labels)
    }

    /// Labels given as `1` / `2` codes.
    pub fn from_codes(codes: &[u8]) -> Result<Self> {
        let labels = codes
            .iter()
            .map(|&c| match c {
                1 => Ok(Sample::First),
                2 => Ok(Sample::Second),
                other => Err(Error::InvalidLabels(format!("label code {other} is not 1 or 2"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels)
    }

    pub fn labels(&self) -> &[Sample] {
        &self.labels
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Same labelling with the roles of the two samples exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            labels: self.labels.iter().map(|s| s.swapped()).collect(),
            m: self.n,
            n: self.m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StatKind {
    #[serde(rename = "NN")]
    Nn,
    #[serde(rename = "MST_RUN")]
    MstRun,
    #[serde(rename = "SHP_RUN")]
    ShpRun,
    #[serde(rename = "NBP")]
    Nbp,
    #[serde(rename = "CF_NN")]
    CfNn,
    #[serde(rename = "CF_MST")]
    CfMst,
}

impl StatKind {
    pub const ALL: [StatKind; 6] = [
        StatKind::Nn,
        StatKind::MstRun,
        StatKind::ShpRun,
        StatKind::Nbp,
        StatKind::CfNn,
        StatKind::CfMst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StatKind::Nn => "NN",
            StatKind::MstRun => "MST_RUN",
            StatKind::ShpRun => "SHP_RUN",
            StatKind::Nbp => "NBP",
            StatKind::CfNn => "CF_NN",
            StatKind::CfMst => "CF_MST",
        }
    }

    /// Command-line token.
    pub fn token(self) -> &'static str {
        match self {
            StatKind::Nn => "nn",
            StatKind::MstRun => "mst",
            StatKind::ShpRun => "shp",
            StatKind::Nbp => "nbp",
            StatKind::CfNn => "cf-nn",
            StatKind::CfMst => "cf-mst",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        StatKind::ALL.into_iter().find(|k| k.token() == s)
    }

    pub fn side(self) -> Side {
        match self {
            StatKind::Nn | StatKind::CfNn | StatKind::CfMst => Side::RejectLarge,
            StatKind::MstRun | StatKind::ShpRun | StatKind::Nbp => Side::RejectSmall,
        }
    }

    /// Statistics whose null law depends only on `(m, n)`.
    pub fn is_distribution_free(self) -> bool {
        matches!(self, StatKind::ShpRun | StatKind::Nbp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    RejectLarge,
    RejectSmall,
}

impl Side {
    /// Whether `candidate` is at least as extreme as `observed`.
    #[inline]
    pub fn as_extreme(self, candidate: f64, observed: f64) -> bool {
        match self {
            Side::RejectLarge => candidate >= observed,
            Side::RejectSmall => candidate <= observed,
        }
    }

    /// Strictly more extreme.
    #[inline]
    pub fn more_extreme(self, candidate: f64, observed: f64) -> bool {
        match self {
            Side::RejectLarge => candidate > observed,
            Side::RejectSmall => candidate < observed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatValue {
    pub name: StatKind,
    pub value: f64,
    pub side: Side,
}

impl StatValue {
    pub fn new(name: StatKind, value: f64) -> Self {
        Self { name, value, side: name.side() }
    }
}

fn check_size(graph: usize, labels: usize) -> Result<()> {
    if graph != labels {
        return Err(Error::SizeMismatch { graph, labels });
    }
    Ok(())
}

pub(crate) fn nn_same_count(g: &KnnDigraph, lab: &[Sample]) -> usize {
    let mut same = 0;
    for i in 0..g.n() {
        for &j in g.neighbours(i) {
            same += usize::from(lab[i] == lab[j]);
        }
    }
    same
}

pub(crate) fn cross_count(edges: &[(usize, usize)], lab: &[Sample]) -> usize {
    edges.iter().filter(|&&(a, b)| lab[a] != lab[b]).count()
}

/// Fraction of directed k-NN edges joining points of the same sample.
pub fn t_nn(g: &KnnDigraph, lab: &LabelVector) -> Result<StatValue> {
    check_size(g.n(), lab.len())?;
    let same = nn_same_count(g, lab.labels());
    Ok(StatValue::new(StatKind::Nn, same as f64 / (g.n() * g.k()) as f64))
}

/// Run count `1 + #cross-sample edges` along a spanning tree or path.
pub fn t_runs(edges: &[(usize, usize)], lab: &LabelVector, name: StatKind) -> Result<StatValue> {
    if !matches!(name, StatKind::MstRun | StatKind::ShpRun) {
        return Err(Error::InvalidArgument(format!("{} is not a run statistic", name.name())));
    }
    let n = lab.len();
    if edges.len() + 1 != n {
        return Err(Error::EdgeCount { expected: n - 1, got: edges.len() });
    }
    if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= n || b >= n) {
        return Err(Error::SizeMismatch { graph: a.max(b) + 1, labels: n });
    }
    Ok(StatValue::new(name, (1 + cross_count(edges, lab.labels())) as f64))
}

/// Number of matched pairs joining the two samples. The unpaired vertex of an
/// odd matching does not contribute.
pub fn t_nbp(matching: &Matching, lab: &LabelVector) -> Result<StatValue> {
    check_size(matching.n(), lab.len())?;
    Ok(StatValue::new(StatKind::Nbp, cross_count(&matching.pairs, lab.labels()) as f64))
}

/// Exact permutation-null mean and covariance of `S = (S_xx, S_yy)` on a
/// fixed undirected simple graph with `m` first-sample and `n` second-sample
/// labels placed uniformly at random.
#[derive(Debug, Clone, PartialEq)]
pub struct CfMoments {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
    inv: [[f64; 2]; 2],
}

/// `(a)_k / (N)_k`: probability that `k` given vertices all carry a label held by `a` points.
fn falling_ratio(a: usize, total: usize, k: usize) -> f64 {
    (0..k).map(|i| a.saturating_sub(i) as f64 / (total - i) as f64).product()
}

impl CfMoments {
    pub fn new(n_vertices: usize, edges: &[(usize, usize)], m: usize, n: usize) -> Result<Self> {
        let total = m + n;
        if total != n_vertices {
            return Err(Error::SizeMismatch { graph: n_vertices, labels: total });
        }
        if total < 4 {
            return Err(Error::TooFewPoints { min: 4, got: total });
        }
        let mut degree = vec![0u64; total];
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b || a >= total || b >= total {
                return Err(Error::InvalidArgument(format!("bad edge ({a}, {b})")));
            }
            if !seen.insert(crate::graphs::undirected(a, b)) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({a}, {b})")));
            }
            degree[a] += 1;
            degree[b] += 1;
        }
        let e = edges.len() as f64;
        // Ordered pairs of distinct edges sharing one vertex, and disjoint pairs.
        let sharing = degree.iter().map(|&d| (d * d.saturating_sub(1)) as f64).sum::<f64>();
        let disjoint = e * e - e - sharing;

        let moments = |a: usize| {
            let p2 = falling_ratio(a, total, 2);
            let p3 = falling_ratio(a, total, 3);
            let p4 = falling_ratio(a, total, 4);
            let mean = e * p2;
            let second = e * p2 + sharing * p3 + disjoint * p4;
            (mean, second - mean * mean)
        };
        let (mx, vx) = moments(m);
        let (my, vy) = moments(n);
        let q = (m * m.saturating_sub(1) * n * n.saturating_sub(1)) as f64
            / (total * (total - 1) * (total - 2) * (total - 3)) as f64;
        let cxy = disjoint * q - mx * my;

        let det = vx * vy - cxy * cxy;
        let scale = vx.abs().max(vy.abs()).max(f64::MIN_POSITIVE);
        if !(det > 1e-10 * scale * scale) {
            return Err(Error::SingularCovariance(format!(
                "|E| = {}, var = ({vx}, {vy}), cov = {cxy}, det = {det}",
                edges.len()
            )));
        }
        let inv = [[vy / det, -cxy / det], [-cxy / det, vx / det]];
        Ok(Self { mean: [mx, my], cov: [[vx, cxy], [cxy, vy]], inv })
    }

    /// `(S - μ)ᵀ Σ⁻¹ (S - μ)`.
    pub fn quadratic_form(&self, sxx: f64, syy: f64) -> f64 {
        let a = sxx - self.mean[0];
        let b = syy - self.mean[1];
        a * (self.inv[0][0] * a + self.inv[0][1] * b) + b * (self.inv[1][0] * a + self.inv[1][1] * b)
    }
}

/// `(S_xx, S_yy)` counts of within-sample edges.
pub fn within_counts(edges: &[(usize, usize)], lab: &[Sample]) -> (usize, usize) {
    let mut sxx = 0;
    let mut syy = 0;
    for &(a, b) in edges {
        match (lab[a], lab[b]) {
            (Sample::First, Sample::First) => sxx += 1,
            (Sample::Second, Sample::Second) => syy += 1,
            _ => {}
        }
    }
    (sxx, syy)
}

/// Chen–Friedman statistic on an undirected simple graph (undirected k-NN or MST).
pub fn t_cf(edges: &[(usize, usize)], lab: &LabelVector, name: StatKind) -> Result<StatValue> {
    if !matches!(name, StatKind::CfNn | StatKind::CfMst) {
        return Err(Error::InvalidArgument(format!("{} is not a CF statistic", name.name())));
    }
    let moments = CfMoments::new(lab.len(), edges, lab.m(), lab.n())?;
    let (sxx, syy) = within_counts(edges, lab.labels());
    Ok(StatValue::new(name, moments.quadratic_form(sxx as f64, syy as f64)))
}
