//! Greedy neighborhood recovery with a fixed search order.
//!
//! For a target node `u` the learner grows a candidate superset `S`: at each
//! round it searches candidate subsets `I` of size `r-1, r-2, …, 1` (disjoint
//! from `{u} ∪ S`, lexicographic within a size) for one with `v̂_{u,I|S} > τ`,
//! adds the first size that yields a hit, and restarts from size `r-1`. The
//! loop stops when no size yields a hit or `|S|` exceeds the cap `L`. A single
//! left-to-right pruning pass then drops every `i ∈ S` with
//! `v̂_{u,i|S∖{i}} ≤ τ`; removals take effect immediately, so later nodes are
//! tested against the already-pruned set.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empirics::{threshold_test, EmpiricalProbCache, RowHistogram};
use crate::error::{invalid, MrfError, Result};
use crate::one_based;
use crate::sampler::SampleSet;

/// How a size-`l` search picks among subsets that pass the threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// First passing subset in lexicographic order.
    #[default]
    FirstPassing,
    /// Highest `v̂` over the whole family (lowest subset on ties), kept if it
    /// passes. This is what the max-finding learner computes.
    BestScore,
}

/// Node count and interaction order; all the learner needs from a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub n: usize,
    pub r: usize,
}

impl ModelMeta {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n == 0 || r == 0 {
            return invalid("model meta needs n >= 1 and r >= 1");
        }
        Ok(Self { n, r })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchPlan {
    pub u: usize,
    pub tau: f64,
    pub cap_l: usize,
    /// Subset sizes in search order, strictly decreasing.
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub rule: SelectionRule,
}

impl SearchPlan {
    /// Sizes `r-1 → 1`. For `r = 1` there is nothing to search.
    pub fn new(u: usize, r: usize, tau: f64, cap_l: usize) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return invalid(format!("threshold must be positive and finite, got {tau}"));
        }
        if cap_l == 0 {
            return invalid("cap L must be at least 1");
        }
        let sizes = (1..r).rev().collect();
        Ok(Self { u, tau, cap_l, sizes, rule: SelectionRule::FirstPassing })
    }

    pub fn with_rule(mut self, rule: SelectionRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn for_node(&self, u: usize) -> Self {
        Self { u, ..self.clone() }
    }

    fn check(&self, meta: ModelMeta) -> Result<()> {
        if self.u >= meta.n {
            return invalid(format!("node {} outside 1..={}", self.u + 1, meta.n));
        }
        if !(self.tau > 0.0) || self.cap_l == 0 {
            return invalid("plan needs tau > 0 and cap L >= 1");
        }
        if self.sizes.windows(2).any(|w| w[0] <= w[1]) {
            return invalid("subset sizes must be strictly decreasing");
        }
        if self.sizes.iter().any(|&l| l == 0 || l >= meta.r.max(1)) {
            return invalid(format!("subset sizes must lie in 1..={}", meta.r.saturating_sub(1)));
        }
        Ok(())
    }
}

/// `min(theoretical L, n-1, user cap)`, at least 1.
pub fn default_cap_l(theoretical: Option<f64>, n: usize, user: Option<usize>) -> usize {
    let mut cap = n.saturating_sub(1).max(1);
    if let Some(l) = theoretical {
        if l.is_finite() && l >= 1.0 {
            cap = cap.min(l.floor() as usize);
        }
    }
    if let Some(u) = user {
        cap = cap.min(u.max(1));
    }
    cap
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    #[serde(serialize_with = "one_based::nodes")]
    pub subset: Vec<usize>,
    pub v_hat: f64,
    pub size: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SearchStats {
    /// `v̂` evaluations during the growth loop.
    pub search_evals: u64,
    /// `v̂` evaluations during pruning.
    pub prune_evals: u64,
    pub rounds: u64,
    #[serde(with = "secs")]
    pub wall_time: Duration,
}

mod secs {
    use serde::Serializer;
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeighborhoodResult {
    #[serde(serialize_with = "one_based::node")]
    pub u: usize,
    pub tau: f64,
    #[serde(serialize_with = "one_based::nodes")]
    pub neighbors: Vec<usize>,
    /// `S` at the end of the growth loop, before pruning.
    #[serde(serialize_with = "one_based::nodes")]
    pub superset: Vec<usize>,
    pub superset_trace: Vec<TraceStep>,
    /// Nodes removed by pruning with the `v̂` that removed them.
    #[serde(serialize_with = "one_based::node_values")]
    pub pruned: Vec<(usize, f64)>,
    /// Nodes kept by pruning with their `v̂` at the time of the check.
    #[serde(serialize_with = "one_based::node_values")]
    pub retained: Vec<(usize, f64)>,
    pub cap_terminated: bool,
    pub selection_rule: SelectionRule,
    /// Pruning removes nodes as it goes (later checks see the smaller set).
    pub pruning: &'static str,
    pub stats: SearchStats,
}

impl NeighborhoodResult {
    /// Copy with timing zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        let mut out = self.clone();
        out.stats.wall_time = Duration::ZERO;
        out
    }
}

/// Subsets of size `l` of `[n] ∖ ({u} ∪ S)`, strictly increasing, in
/// lexicographic order. There are `C(n-1-|S|, l)` of them.
pub fn enumerate_candidates(
    n: usize,
    u: usize,
    s_set: &[usize],
    l: usize,
) -> impl Iterator<Item = Vec<usize>> {
    let pool: Vec<usize> = (0..n).filter(|j| *j != u && !s_set.contains(j)).collect();
    let l = if l == 0 { pool.len() + 1 } else { l };
    pool.into_iter().combinations(l)
}

/// Result of one size-`l` search.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub found: Option<(Vec<usize>, f64)>,
    pub evaluations: u64,
}

/// Linear scan over the size-`l` family in lexicographic order.
pub fn find_subset_classical(
    cache: &EmpiricalProbCache<'_>,
    l: usize,
    tau: f64,
    rule: SelectionRule,
) -> Result<SearchOutcome> {
    let ctx = cache.context();
    let n = cache_n(cache);
    let mut evaluations = 0;
    let mut best: Option<(Vec<usize>, f64)> = None;
    for subset in enumerate_candidates(n, ctx.u, &ctx.s_set, l) {
        let v = cache.v_hat(&subset)?;
        evaluations += 1;
        match rule {
            SelectionRule::FirstPassing => {
                if threshold_test(v, tau) {
                    return Ok(SearchOutcome { found: Some((subset, v)), evaluations });
                }
            }
            SelectionRule::BestScore => {
                if best.as_ref().map_or(true, |(_, b)| v > *b) {
                    best = Some((subset, v));
                }
            }
        }
    }
    let found = best.filter(|(_, v)| threshold_test(*v, tau));
    Ok(SearchOutcome { found, evaluations })
}

fn cache_n(cache: &EmpiricalProbCache<'_>) -> usize {
    cache.histogram().n()
}

/// Drives the growth loop and the pruning pass; `find` performs one size-`l`
/// search against the current context.
pub(crate) fn run_greedy<F>(
    hist: &RowHistogram,
    meta: ModelMeta,
    plan: &SearchPlan,
    mut find: F,
) -> Result<NeighborhoodResult>
where
    F: FnMut(&EmpiricalProbCache<'_>, usize) -> Result<SearchOutcome>,
{
    if hist.m_count() == 0 {
        return Err(MrfError::EmptySamples);
    }
    if hist.n() != meta.n {
        return invalid(format!("samples have n = {}, model meta says {}", hist.n(), meta.n));
    }
    plan.check(meta)?;
    let start = Instant::now();
    let u = plan.u;
    let mut stats = SearchStats::default();
    let mut s: BTreeSet<usize> = BTreeSet::new();
    let mut trace = Vec::new();
    let mut cap_terminated = false;

    loop {
        if s.len() > plan.cap_l {
            cap_terminated = true;
            break;
        }
        stats.rounds += 1;
        let s_vec: Vec<usize> = s.iter().copied().collect();
        let available = meta.n - 1 - s_vec.len();
        let cache = EmpiricalProbCache::new(hist, u, &s_vec)?;
        let mut added = None;
        for &l in &plan.sizes {
            if l > available {
                continue;
            }
            let outcome = find(&cache, l)?;
            stats.search_evals += outcome.evaluations;
            if let Some((subset, v)) = outcome.found {
                added = Some(TraceStep { size: subset.len(), subset, v_hat: v });
                break;
            }
        }
        match added {
            Some(step) => {
                s.extend(step.subset.iter().copied());
                trace.push(step);
            }
            None => break,
        }
    }

    let superset: Vec<usize> = s.iter().copied().collect();
    let mut pruned = Vec::new();
    let mut retained = Vec::new();
    for &i in &superset {
        let rest: Vec<usize> = s.iter().copied().filter(|&j| j != i).collect();
        let v = EmpiricalProbCache::new(hist, u, &rest)?.v_hat(&[i])?;
        stats.prune_evals += 1;
        if threshold_test(v, plan.tau) {
            retained.push((i, v));
        } else {
            s.remove(&i);
            pruned.push((i, v));
        }
    }
    stats.wall_time = start.elapsed();

    Ok(NeighborhoodResult {
        u,
        tau: plan.tau,
        neighbors: s.into_iter().collect(),
        superset,
        superset_trace: trace,
        pruned,
        retained,
        cap_terminated,
        selection_rule: plan.rule,
        pruning: "immediate",
        stats,
    })
}

pub fn learn_neighborhood_hist(
    hist: &RowHistogram,
    meta: ModelMeta,
    plan: &SearchPlan,
) -> Result<NeighborhoodResult> {
    run_greedy(hist, meta, plan, |cache, l| {
        find_subset_classical(cache, l, plan.tau, plan.rule)
    })
}

pub fn learn_neighborhood(
    samples: &SampleSet,
    meta: ModelMeta,
    plan: &SearchPlan,
) -> Result<NeighborhoodResult> {
    learn_neighborhood_hist(&RowHistogram::new(samples), meta, plan)
}

/// How per-node estimates are merged into an undirected edge set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetrize {
    /// Edge iff both endpoints list each other.
    #[default]
    And,
    /// Edge iff either endpoint lists the other.
    Or,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveredGraph {
    pub nodes: Vec<NeighborhoodResult>,
    /// Pairs `(u, v)`, `u < v`, where exactly one endpoint lists the other.
    #[serde(serialize_with = "one_based::edges")]
    pub asymmetries: Vec<(usize, usize)>,
    pub rule: Symmetrize,
    #[serde(serialize_with = "one_based::edges")]
    pub edges: Vec<(usize, usize)>,
}

impl RecoveredGraph {
    pub fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().copied().collect()
    }
}

pub(crate) fn assemble_graph(nodes: Vec<NeighborhoodResult>, rule: Symmetrize) -> RecoveredGraph {
    let n = nodes.len();
    let sets: Vec<BTreeSet<usize>> =
        nodes.iter().map(|r| r.neighbors.iter().copied().collect()).collect();
    let mut asymmetries = Vec::new();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let ab = sets[a].contains(&b);
            let ba = sets[b].contains(&a);
            if ab != ba {
                asymmetries.push((a, b));
            }
            let keep = match rule {
                Symmetrize::And => ab && ba,
                Symmetrize::Or => ab || ba,
            };
            if keep {
                edges.push((a, b));
            }
        }
    }
    RecoveredGraph { nodes, asymmetries, rule, edges }
}

/// Runs the learner on every node (in parallel) and merges the results.
pub fn recover_graph_hist(
    hist: &RowHistogram,
    meta: ModelMeta,
    template: &SearchPlan,
    rule: Symmetrize,
) -> Result<RecoveredGraph> {
    let nodes = (0..meta.n)
        .into_par_iter()
        .map(|u| learn_neighborhood_hist(hist, meta, &template.for_node(u)))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_graph(nodes, rule))
}

pub fn recover_graph(
    samples: &SampleSet,
    meta: ModelMeta,
    template: &SearchPlan,
    rule: Symmetrize,
) -> Result<RecoveredGraph> {
    recover_graph_hist(&RowHistogram::new(samples), meta, template, rule)
}

/// Data-driven threshold: `v̂_{u,i|∅}` for every pair, sorted together with
/// a zero floor; `τ` is the midpoint of the largest gap between neighbours.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauCalibration {
    pub tau: f64,
    pub gap: (f64, f64),
    pub values: Vec<f64>,
}

pub fn calibrate_tau(hist: &RowHistogram) -> Result<TauCalibration> {
    let n = hist.n();
    if n < 2 {
        return invalid("calibration needs at least two nodes");
    }
    let mut values = vec![0.0];
    for u in 0..n {
        let cache = EmpiricalProbCache::new(hist, u, &[])?;
        for i in u + 1..n {
            values.push(cache.v_hat(&[i])?);
        }
    }
    values.sort_by(f64::total_cmp);
    let (lo, hi) = values
        .windows(2)
        .map(|w| (w[0], w[1]))
        .fold((0.0, 0.0), |best, g| if g.1 - g.0 > best.1 - best.0 { g } else { best });
    let tau = 0.5 * (lo + hi);
    if !(tau > 0.0) {
        return invalid("all pairwise v̂ are zero; cannot place a threshold");
    }
    Ok(TauCalibration { tau, gap: (lo, hi), values })
}
