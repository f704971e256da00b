//! Neighborhood learning with the subset search done by max finding over the
//! packed index-string space.

use serde::{Deserialize, Serialize};

use super::durr_hoyer::DurrHoyer;
use super::ledger::{MaxFindMode, QueryLedger};
use super::subset::{bits_per_index, code_space_size, decode_string};
use crate::empirics::{threshold_test, EmpiricalProbCache, RowHistogram};
use crate::error::{invalid, MrfError, Result};
use crate::greedy::{
    assemble_graph, enumerate_candidates, run_greedy, ModelMeta, NeighborhoodResult, RecoveredGraph,
    SearchOutcome, SearchPlan, SelectionRule, Symmetrize,
};
use crate::seed::derive_seed;

/// Settings shared by every max-finding call of a learner run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumPlan {
    pub mode: MaxFindMode,
    /// Overall failure budget `w`.
    pub eta_budget: f64,
    pub seed: u64,
    #[serde(skip)]
    pub search: DurrHoyer,
}

impl QuantumPlan {
    pub fn new(mode: MaxFindMode, eta_budget: f64, seed: u64) -> Self {
        Self { mode, eta_budget, seed, search: DurrHoyer::default() }
    }
}

/// Per-call failure probability `w / (2 L (r-1))`.
pub fn per_call_eta(w: f64, cap_l: usize, r: usize) -> Result<f64> {
    if !(w > 0.0 && w < 1.0) {
        return invalid(format!("eta budget w = {w} must lie in (0,1)"));
    }
    Ok(w / (2.0 * cap_l.max(1) as f64 * r.saturating_sub(1).max(1) as f64))
}

/// Max finding over the `(2^{⌈log2 n⌉})^l` codes. Codes that are not valid
/// strings, or that touch `{u} ∪ S`, score `-∞`. The maximum is returned if
/// it clears `tau`.
pub fn find_subset_quantum(
    cache: &EmpiricalProbCache<'_>,
    l: usize,
    tau: f64,
    eta: f64,
    mode: MaxFindMode,
    seed: u64,
    search: &DurrHoyer,
) -> Result<(SearchOutcome, QueryLedger)> {
    let ctx = cache.context();
    let n = cache.histogram().n();
    let size = code_space_size(n, l)?;
    if mode == MaxFindMode::Amplitude && size > search.amplitude_limit as u64 {
        return Err(MrfError::AmplitudeLimit { size: size as usize, limit: search.amplitude_limit });
    }
    if size > 1 << 26 {
        return invalid(format!("code space of {size} states is too large to tabulate"));
    }
    let mut values = vec![f64::NEG_INFINITY; size as usize];
    let b = bits_per_index(n);
    let mut evaluations = 0u64;
    let mut family = 0u64;
    for subset in enumerate_candidates(n, ctx.u, &ctx.s_set, l) {
        let code = subset.iter().fold(0u64, |acc, &j| (acc << b) | j as u64);
        values[code as usize] = cache.v_hat(&subset)?;
        evaluations += 1;
        family += 1;
    }
    let (best, mut ledger) = match mode {
        MaxFindMode::Amplitude => search.amplitude(&values, eta, seed)?,
        MaxFindMode::Accounting => search.accounting(|k| values[k], values.len(), eta, seed)?,
    };
    ledger.classical_equiv_cost = family;
    ledger.membership_comparisons = ledger.oracle_calls * (l as u64).saturating_sub(1);

    let mut exclude = ctx.s_set.clone();
    exclude.push(ctx.u);
    let found = decode_string(best as u64, l, n, &exclude)
        .map(|subset| (subset, values[best]))
        .filter(|(_, v)| threshold_test(*v, tau));
    Ok((SearchOutcome { found, evaluations }, ledger))
}

/// Same control flow as the classical learner (including the restart from the
/// largest size after every addition), with each size-`l` search done by
/// [`find_subset_quantum`] at per-call failure `w / (2L(r-1))`.
pub fn learn_neighborhood_quantum(
    hist: &RowHistogram,
    meta: ModelMeta,
    plan: &SearchPlan,
    qplan: &QuantumPlan,
) -> Result<(NeighborhoodResult, QueryLedger)> {
    let eta = per_call_eta(qplan.eta_budget, plan.cap_l, meta.r)?;
    let mut ledger = QueryLedger::new(qplan.mode);
    let mut call = 0u64;
    let plan = plan.clone().with_rule(SelectionRule::BestScore);
    let result = run_greedy(hist, meta, &plan, |cache, l| {
        let seed = derive_seed(qplan.seed, call);
        call += 1;
        let (out, l_ledger) =
            find_subset_quantum(cache, l, plan.tau, eta, qplan.mode, seed, &qplan.search)?;
        ledger.absorb(&l_ledger);
        Ok(out)
    })?;
    Ok((result, ledger))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantumGraph {
    pub graph: RecoveredGraph,
    pub ledgers: Vec<QueryLedger>,
    pub total: QueryLedger,
}

/// Every node in turn, each with its own derived seed; nodes run in parallel.
pub fn recover_graph_quantum(
    hist: &RowHistogram,
    meta: ModelMeta,
    template: &SearchPlan,
    qplan: &QuantumPlan,
    rule: Symmetrize,
) -> Result<QuantumGraph> {
    use rayon::prelude::*;
    let per_node = (0..meta.n)
        .into_par_iter()
        .map(|u| {
            let q = QuantumPlan { seed: derive_seed(qplan.seed, u as u64), ..*qplan };
            learn_neighborhood_quantum(hist, meta, &template.for_node(u), &q)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = QueryLedger::new(qplan.mode);
    let mut nodes = Vec::with_capacity(per_node.len());
    let mut ledgers = Vec::with_capacity(per_node.len());
    for (r, l) in per_node {
        total.absorb(&l);
        nodes.push(r);
        ledgers.push(l);
    }
    Ok(QuantumGraph { graph: assemble_graph(nodes, rule), ledgers, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{random_model, RandomModelSpec};
    use crate::greedy::{find_subset_classical, learn_neighborhood_hist};
    use crate::model::{CliqueTensor, MrfModel};
    use crate::sampler::{exact_joint, sample_exact};

    fn one_pair() -> MrfModel {
        let c = CliqueTensor::from_fn(vec![0, 3], |x| 0.9 * f64::from(x[0] * x[1])).unwrap();
        MrfModel::new(6, 2, 0.5, 1.0, vec![c]).unwrap()
    }

    #[test]
    fn per_call_eta_value() {
        assert!((per_call_eta(0.1, 5, 3).unwrap() - 0.1 / 20.0).abs() < 1e-15);
        assert!(per_call_eta(1.0, 5, 3).is_err());
    }

    #[test]
    fn single_correlated_pair_is_found() {
        let s = sample_exact(&exact_joint(&one_pair()).unwrap(), 20_000, 1);
        let hist = RowHistogram::new(&s);
        let cache = EmpiricalProbCache::new(&hist, 0, &[]).unwrap();
        for mode in [MaxFindMode::Amplitude, MaxFindMode::Accounting] {
            let (out, ledger) =
                find_subset_quantum(&cache, 1, 0.05, 0.01, mode, 3, &DurrHoyer::default()).unwrap();
            assert_eq!(out.found.unwrap().0, vec![3]);
            assert!(ledger.oracle_calls > 0);
            assert_eq!(ledger.classical_equiv_cost, 5);
        }
    }

    #[test]
    fn independent_model_finds_nothing() {
        let m = MrfModel::new(6, 3, 0.0, 1.0, vec![]).unwrap();
        let s = sample_exact(&exact_joint(&m).unwrap(), 50_000, 2);
        let hist = RowHistogram::new(&s);
        let cache = EmpiricalProbCache::new(&hist, 2, &[]).unwrap();
        let (out, ledger) = find_subset_quantum(
            &cache, 2, 0.05, 0.1, MaxFindMode::Accounting, 0, &DurrHoyer::default(),
        )
        .unwrap();
        assert!(out.found.is_none());
        assert!(ledger.oracle_calls > 0 && ledger.grover_iterations > 0);
    }

    #[test]
    fn returned_subset_has_family_maximum() {
        for seed in 0..10 {
            let m = random_model(&RandomModelSpec::new(7, 3, 3, 0.3, 0.9), seed).unwrap();
            let s = sample_exact(&exact_joint(&m).unwrap(), 5_000, seed);
            let hist = RowHistogram::new(&s);
            let cache = EmpiricalProbCache::new(&hist, 1, &[4]).unwrap();
            let (q, _) = find_subset_quantum(
                &cache, 2, 1e-9, 0.1, MaxFindMode::Accounting, seed, &DurrHoyer::default(),
            )
            .unwrap();
            let c = find_subset_classical(&cache, 2, 1e-9, SelectionRule::BestScore).unwrap();
            assert_eq!(q.found, c.found);
        }
    }

    #[test]
    fn amplitude_limit_is_enforced() {
        let m = MrfModel::new(40, 3, 0.0, 1.0, vec![]).unwrap();
        let data = vec![1i8; 40 * 10];
        let s = crate::sampler::SampleSet::new(40, data, 0).unwrap();
        let hist = RowHistogram::new(&s);
        let cache = EmpiricalProbCache::new(&hist, 0, &[]).unwrap();
        let search = DurrHoyer::default();
        let err = find_subset_quantum(&cache, 3, 0.1, 0.1, MaxFindMode::Amplitude, 0, &search);
        assert!(matches!(err, Err(MrfError::AmplitudeLimit { .. })));
        drop(m);
    }

    #[test]
    fn accounting_learner_matches_best_score_classical() {
        for seed in 0..20 {
            let m = random_model(&RandomModelSpec::new(8, 3, 3, 0.3, 0.9), seed).unwrap();
            let s = sample_exact(&exact_joint(&m).unwrap(), 4_000, seed);
            let hist = RowHistogram::new(&s);
            let meta = ModelMeta::new(8, 3).unwrap();
            let plan = SearchPlan::new((seed % 8) as usize, 3, 0.01, 7).unwrap();
            let c = learn_neighborhood_hist(&hist, meta, &plan.clone().with_rule(SelectionRule::BestScore)).unwrap();
            let (q, ledger) = learn_neighborhood_quantum(
                &hist, meta, &plan, &QuantumPlan::new(MaxFindMode::Accounting, 0.1, seed),
            )
            .unwrap();
            assert_eq!(q.neighbors, c.neighbors);
            assert_eq!(q.superset_trace, c.superset_trace);
            assert!(ledger.searches >= 1);
        }
    }
}
