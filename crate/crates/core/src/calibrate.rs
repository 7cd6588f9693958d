//! p-values and decisions: label-permutation tests for every statistic and
//! exact null laws for the distribution-free run and cross-match statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{knn_digraph, min_weight_matching, mst, shp, ShpMode};
use crate::matrix::SymMatrix;
use crate::rng::Stream;
use crate::stats::{
    cross_count, nn_same_count, within_counts, CfMoments, LabelVector, Sample, Side, StatKind,
    StatValue,
};

/// How observations tied with the observed statistic enter the p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieMode {
    /// Ties count as at least as extreme. Valid but conservative for
    /// discrete statistics.
    #[default]
    Conservative,
    /// Ties are weighted by an independent uniform draw, giving a test of
    /// exact size `alpha`.
    Randomized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationPlan {
    pub b: usize,
    pub seed: u64,
    pub alpha: f64,
    pub ties: TieMode,
}

impl Default for PermutationPlan {
    fn default() -> Self {
        Self { b: 1000, seed: 0, alpha: 0.05, ties: TieMode::Conservative }
    }
}

impl PermutationPlan {
    pub fn new(b: usize, seed: u64, alpha: f64) -> Result<Self> {
        let plan = Self { b, seed, alpha, ties: TieMode::Conservative };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_ties(mut self, ties: TieMode) -> Self {
        self.ties = ties;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.b == 0 {
            return Err(Error::InvalidArgument("B must be at least 1".into()));
        }
        validate_alpha(self.alpha)
    }
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Permutation,
    ExactNull,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub stat: StatValue,
    pub p_value: f64,
    pub reject: bool,
    pub method: Method,
    pub b_used: usize,
    pub seed: u64,
}

// Stream tags keep permutation draws and tie-breaking uniforms apart.
const PERMUTATION_TAG: u64 = 0x5045_524d;
const TIE_TAG: u64 = 0x5449_4553;

/// A statistic whose graph is fixed; only labels vary between evaluations.
#[derive(Debug, Clone)]
pub enum PreparedStatistic {
    Nn { graph: crate::graphs::KnnDigraph },
    Runs { kind: StatKind, edges: Vec<(usize, usize)> },
    Nbp { pairs: Vec<(usize, usize)> },
    Cf { kind: StatKind, edges: Vec<(usize, usize)>, moments: CfMoments },
}

impl PreparedStatistic {
    /// Builds the graph for `kind` on `dm`. `(m, n)` are needed only for the
    /// CF null moments.
    pub fn build(
        dm: &SymMatrix,
        kind: StatKind,
        k: usize,
        shp_mode: ShpMode,
        m: usize,
        n: usize,
    ) -> Result<Self> {
        Ok(match kind {
            StatKind::Nn => PreparedStatistic::Nn { graph: knn_digraph(dm, k)? },
            StatKind::MstRun => PreparedStatistic::Runs { kind, edges: mst(dm)?.edges },
            StatKind::ShpRun => PreparedStatistic::Runs { kind, edges: shp(dm, shp_mode)?.edges() },
            StatKind::Nbp => PreparedStatistic::Nbp { pairs: min_weight_matching(dm)?.pairs },
            StatKind::CfNn => {
                let edges = knn_digraph(dm, k)?.undirected_edges();
                let moments = CfMoments::new(dm.n(), &edges, m, n)?;
                PreparedStatistic::Cf { kind, edges, moments }
            }
            StatKind::CfMst => {
                let edges = mst(dm)?.edges;
                let moments = CfMoments::new(dm.n(), &edges, m, n)?;
                PreparedStatistic::Cf { kind, edges, moments }
            }
        })
    }

    pub fn kind(&self) -> StatKind {
        match self {
            PreparedStatistic::Nn { .. } => StatKind::Nn,
            PreparedStatistic::Runs { kind, .. } | PreparedStatistic::Cf { kind, .. } => *kind,
            PreparedStatistic::Nbp { .. } => StatKind::Nbp,
        }
    }

    /// Statistic value for a labelling with the `(m, n)` used at build time.
    pub fn evaluate(&self, lab: &[Sample]) -> f64 {
        match self {
            PreparedStatistic::Nn { graph } => {
                nn_same_count(graph, lab) as f64 / (graph.n() * graph.k()) as f64
            }
            PreparedStatistic::Runs { edges, .. } => (1 + cross_count(edges, lab)) as f64,
            PreparedStatistic::Nbp { pairs } => cross_count(pairs, lab) as f64,
            PreparedStatistic::Cf { edges, moments, .. } => {
                let (sxx, syy) = within_counts(edges, lab);
                moments.quadratic_form(sxx as f64, syy as f64)
            }
        }
    }
}

/// `(count_more + w · count_equal) / (B + 1)` with the observed value itself
/// counted among the ties. `w = 1` for conservative ties, `w = U` otherwise.
pub fn permutation_p_value(
    observed: f64,
    side: Side,
    permuted: &[f64],
    ties: TieMode,
    tie_uniform: f64,
) -> f64 {
    let more = permuted.iter().filter(|&&v| side.more_extreme(v, observed)).count();
    let equal = permuted.iter().filter(|&&v| v == observed).count() + 1;
    p_from_counts(more, equal, permuted.len(), ties, tie_uniform)
}

fn p_from_counts(more: usize, equal: usize, b: usize, ties: TieMode, u: f64) -> f64 {
    let w = match ties {
        TieMode::Conservative => 1.0,
        TieMode::Randomized => u,
    };
    (more as f64 + w * equal as f64) / (b + 1) as f64
}

/// Permutation test on a fixed graph: labels are reshuffled `B` times, the
/// `b`-th shuffle drawn from its own `(seed, b)` stream.
pub fn permutation_test_prepared(
    prepared: &PreparedStatistic,
    lab: &LabelVector,
    plan: &PermutationPlan,
) -> Result<TestReport> {
    plan.validate()?;
    let kind = prepared.kind();
    let side = kind.side();
    let observed = prepared.evaluate(lab.labels());
    let (more, equal) = (0..plan.b)
        .into_par_iter()
        .map_init(
            || lab.labels().to_vec(),
            |buf, b| {
                buf.copy_from_slice(lab.labels());
                Stream::new(plan.seed, &[PERMUTATION_TAG, b as u64]).shuffle(buf);
                let v = prepared.evaluate(buf);
                (usize::from(side.more_extreme(v, observed)), usize::from(v == observed))
            },
        )
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let u = Stream::new(plan.seed, &[TIE_TAG]).uniform();
    let p_value = p_from_counts(more, equal + 1, plan.b, plan.ties, u);
    Ok(TestReport {
        stat: StatValue::new(kind, observed),
        p_value,
        reject: p_value <= plan.alpha,
        method: Method::Permutation,
        b_used: plan.b,
        seed: plan.seed,
    })
}

/// Builds the graph once from the label-free matrix and permutes labels.
pub fn permutation_test(
    dm: &SymMatrix,
    kind: StatKind,
    k: usize,
    lab: &LabelVector,
    plan: &PermutationPlan,
) -> Result<TestReport> {
    if dm.n() != lab.len() {
        return Err(Error::SizeMismatch { graph: dm.n(), labels: lab.len() });
    }
    let prepared = PreparedStatistic::build(dm, kind, k, ShpMode::Auto, lab.m(), lab.n())?;
    permutation_test_prepared(&prepared, lab, plan)
}

/// Table of `ln k!` for `k <= max`.
struct LogFactorials(Vec<f64>);

impl LogFactorials {
    fn new(max: usize) -> Self {
        let mut t = Vec::with_capacity(max + 1);
        let mut acc = 0.0f64;
        t.push(0.0);
        for k in 1..=max {
            acc += (k as f64).ln();
            t.push(acc);
        }
        Self(t)
    }

    /// `ln C(n, k)`, or `None` when the coefficient is zero.
    fn ln_choose(&self, n: i64, k: i64) -> Option<f64> {
        if n < 0 || k < 0 || k > n {
            return None;
        }
        let (n, k) = (n as usize, k as usize);
        Some(self.0[n] - self.0[k] - self.0[n - k])
    }
}

/// `exp(Σ ln C(..) - ln C(N, m))`, zero when any coefficient vanishes.
fn ratio(terms: &[Option<f64>], log_denominator: f64, extra: f64) -> f64 {
    let mut acc = extra - log_denominator;
    for t in terms {
        match t {
            Some(v) => acc += v,
            None => return 0.0,
        }
    }
    acc.exp()
}

/// Largest possible run count along a path with `m` and `n` labels.
fn max_runs(m: usize, n: usize) -> usize {
    2 * m.min(n) + usize::from(m != n)
}

/// `P(R = r)` for the number of runs in a uniformly random arrangement.
fn run_pmf(lf: &LogFactorials, m: usize, n: usize, r: usize) -> f64 {
    let (mi, ni) = (m as i64, n as i64);
    let denom = lf.ln_choose(mi + ni, mi).expect("valid sizes");
    if r < 2 {
        return 0.0;
    }
    let k = (r / 2) as i64;
    if r % 2 == 0 {
        ratio(&[lf.ln_choose(mi - 1, k - 1), lf.ln_choose(ni - 1, k - 1)], denom, 2f64.ln())
    } else {
        ratio(&[lf.ln_choose(mi - 1, k - 1), lf.ln_choose(ni - 1, k)], denom, 0.0)
            + ratio(&[lf.ln_choose(mi - 1, k), lf.ln_choose(ni - 1, k - 1)], denom, 0.0)
    }
}

/// `P(T_SHP <= r)` under uniformly random labelling of a fixed path.
pub fn shp_run_null_cdf(m: usize, n: usize, r: usize) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("both samples must be non-empty".into()));
    }
    let total = m + n;
    if r == 0 || r > total {
        return Err(Error::InvalidArgument(format!("run count {r} outside 1..={total}")));
    }
    if r >= max_runs(m, n) {
        return Ok(1.0);
    }
    let lf = LogFactorials::new(total);
    Ok((2..=r).map(|x| run_pmf(&lf, m, n, x)).sum::<f64>().min(1.0))
}

/// `P(T = a)` cross-matches for an even total with `m` first-sample labels.
/// Either count may be zero.
fn nbp_pmf_even(lf: &LogFactorials, m: usize, n: usize, a: usize) -> f64 {
    let total = m + n;
    debug_assert_eq!(total % 2, 0);
    if a > m || a > n || (m - a) % 2 != 0 {
        return 0.0;
    }
    let half = (total / 2) as i64;
    let a = a as i64;
    let denom = lf.ln_choose(total as i64, m as i64).expect("valid sizes");
    ratio(
        &[lf.ln_choose(half, a), lf.ln_choose(half - a, (m as i64 - a) / 2)],
        denom,
        a as f64 * 2f64.ln(),
    )
}

fn nbp_cdf_even(lf: &LogFactorials, m: usize, n: usize, a: usize) -> f64 {
    (0..=a.min(m).min(n)).map(|t| nbp_pmf_even(lf, m, n, t)).sum()
}

/// `P(T_NBP <= a)` under uniformly random labelling of a fixed matching. For
/// odd `N` the unpaired vertex's label is random too, and both cases are mixed
/// with their exact probabilities `m/N` and `n/N`.
pub fn nbp_null_cdf(m: usize, n: usize, a: usize) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("both samples must be non-empty".into()));
    }
    let total = m + n;
    let half = total / 2;
    if a > half {
        return Err(Error::InvalidArgument(format!("cross-match count {a} exceeds {half}")));
    }
    if total % 2 == 0 && (a + m) % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "cross-match count {a} has the wrong parity for m = {m}, n = {n}"
        )));
    }
    if a >= m.min(n) {
        return Ok(1.0);
    }
    let lf = LogFactorials::new(total);
    let p = if total % 2 == 0 {
        nbp_cdf_even(&lf, m, n, a)
    } else {
        let nf = total as f64;
        m as f64 / nf * nbp_cdf_even(&lf, m - 1, n, a)
            + n as f64 / nf * nbp_cdf_even(&lf, m, n - 1, a)
    };
    Ok(p.min(1.0))
}

/// Closed-form `c(m, n)`: the null probability that the cross-match count sits
/// at its smallest attainable value (0 when both counts are even, 1 when both
/// are odd). For odd `N` it is the probability given that the unpaired vertex
/// comes from the sample of odd size.
pub fn nbp_boundary_probability(m: usize, n: usize) -> f64 {
    let total = m + n;
    let lf = LogFactorials::new(total);
    let f = |k: usize| lf.0[k];
    let c = |a: usize, b: usize| lf.ln_choose(a as i64, b as i64).unwrap();
    let ln = match (m % 2, n % 2) {
        (0, 0) => f(total / 2) - c(total, m) - f(m / 2) - f(n / 2),
        (1, 1) => 2f64.ln() + f(total / 2) - c(total, m) - f((m - 1) / 2) - f((n - 1) / 2),
        (0, 1) => f((total - 1) / 2) - c(total - 1, m) - f(m / 2) - f((n - 1) / 2),
        _ => f((total - 1) / 2) - c(total - 1, m - 1) - f((m - 1) / 2) - f(n / 2),
    };
    ln.exp()
}

/// `N / C(N, m)`, the null probability of at most three runs on a path.
pub fn shp_three_run_probability(m: usize, n: usize) -> f64 {
    let total = m + n;
    let lf = LogFactorials::new(total);
    ((total as f64).ln() - lf.ln_choose(total as i64, m as i64).unwrap()).exp()
}

fn exact_parts(stat: &StatValue, m: usize, n: usize) -> Result<(f64, f64)> {
    if !stat.name.is_distribution_free() {
        return Err(Error::UnsupportedStatistic(stat.name.name()));
    }
    let observed = stat.value.round();
    if observed < 0.0 || (observed - stat.value).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("non-integral statistic {}", stat.value)));
    }
    let v = observed as usize;
    match stat.name {
        StatKind::ShpRun => {
            let at = shp_run_null_cdf(m, n, v)?;
            let below = if v <= 1 { 0.0 } else { shp_run_null_cdf(m, n, v - 1)? };
            Ok((below, at))
        }
        StatKind::Nbp => {
            let at = nbp_null_cdf(m, n, v)?;
            let step = if (m + n) % 2 == 0 { 2 } else { 1 };
            let below = if v < step { 0.0 } else { nbp_null_cdf(m, n, v - step)? };
            Ok((below, at))
        }
        other => Err(Error::UnsupportedStatistic(other.name())),
    }
}

/// Left-tail exact p-value for `SHP_RUN` or `NBP`.
pub fn exact_null_test(stat: StatValue, m: usize, n: usize, alpha: f64) -> Result<TestReport> {
    exact_null_test_with(stat, m, n, alpha, TieMode::Conservative, 0)
}

/// As [`exact_null_test`]; with [`TieMode::Randomized`] the probability of
/// the observed value is weighted by a uniform drawn from `seed`.
pub fn exact_null_test_with(
    stat: StatValue,
    m: usize,
    n: usize,
    alpha: f64,
    ties: TieMode,
    seed: u64,
) -> Result<TestReport> {
    validate_alpha(alpha)?;
    let (below, at) = exact_parts(&stat, m, n)?;
    let p_value = match ties {
        TieMode::Conservative => at,
        TieMode::Randomized => {
            let u = Stream::new(seed, &[TIE_TAG]).uniform();
            below + u * (at - below)
        }
    };
    Ok(TestReport {
        stat,
        p_value,
        reject: p_value <= alpha,
        method: Method::ExactNull,
        b_used: 0,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_value_boundaries() {
        let p = permutation_p_value(5.0, Side::RejectLarge, &[1.0, 2.0, 3.0], TieMode::Conservative, 0.5);
        assert_eq!(p, 0.25);
        let p = permutation_p_value(5.0, Side::RejectSmall, &[5.0], TieMode::Conservative, 0.5);
        assert_eq!(p, 1.0);
        let p = permutation_p_value(5.0, Side::RejectSmall, &[5.0], TieMode::Randomized, 0.5);
        assert_eq!(p, 0.5);
    }

    #[test]
    fn plan_validation() {
        assert!(PermutationPlan::new(0, 1, 0.05).is_err());
        assert!(PermutationPlan::new(10, 1, 0.0).is_err());
        assert!(PermutationPlan::new(10, 1, 1.0).is_err());
        let d = PermutationPlan::default();
        assert_eq!((d.b, d.alpha), (1000, 0.05));
    }

    #[test]
    fn three_run_probability() {
        let p = shp_run_null_cdf(3, 3, 3).unwrap();
        assert!((p - 0.3).abs() < 1e-14);
        assert!((shp_three_run_probability(3, 3) - 0.3).abs() < 1e-14);
        assert_eq!(shp_run_null_cdf(3, 4, 7).unwrap(), 1.0);
        assert!(shp_run_null_cdf(3, 3, 0).is_err());
        assert!(shp_run_null_cdf(3, 3, 7).is_err());
    }

    #[test]
    fn cross_match_small_case() {
        let p = nbp_null_cdf(2, 2, 0).unwrap();
        assert!((p - 1.0 / 3.0).abs() < 1e-15);
        assert!((nbp_boundary_probability(2, 2) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(nbp_null_cdf(3, 3, 3).unwrap(), 1.0);
        assert!(nbp_null_cdf(2, 2, 1).is_err());
        assert!(nbp_null_cdf(2, 2, 3).is_err());
    }

    #[test]
    fn exact_test_examples() {
        let r = exact_null_test(StatValue::new(StatKind::ShpRun, 2.0), 10, 10, 0.05).unwrap();
        let expected = 2.0 / 184_756.0;
        assert!((r.p_value - expected).abs() < 1e-12 * expected);
        assert!(r.reject);
        let r = exact_null_test(StatValue::new(StatKind::ShpRun, 20.0), 10, 10, 0.05).unwrap();
        assert_eq!(r.p_value, 1.0);
        let r = exact_null_test(StatValue::new(StatKind::Nbp, 10.0), 10, 10, 0.05).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert!(!r.reject);
        assert!(matches!(
            exact_null_test(StatValue::new(StatKind::Nn, 0.5), 10, 10, 0.05),
            Err(Error::UnsupportedStatistic(_))
        ));
    }
}
