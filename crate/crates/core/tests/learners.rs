use mrfq_core::greedy::learn_neighborhood_hist;
use mrfq_core::qmaxfind::{learn_neighborhood_quantum, MaxFindMode, QuantumPlan};
use mrfq_core::seed::derive_seed;
use mrfq_core::{
    calibrate_tau, exact_joint, figure1, gibbs_sample, random_model, recover_graph, sample_exact,
    ModelMeta, MrfModel, RandomModelSpec, RowHistogram, SampleSet, SearchPlan, SelectionRule,
    Symmetrize,
};

#[test]
fn amplitude_mode_with_tiny_eta_matches_classical() {
    for k in 0..15u64 {
        let seed = derive_seed(31, k);
        let m = random_model(&RandomModelSpec::new(6, 3, 3, 0.3, 0.9), seed).unwrap();
        let s = sample_exact(&exact_joint(&m).unwrap(), 4_000, seed);
        let hist = RowHistogram::new(&s);
        let tau = calibrate_tau(&hist).map(|c| c.tau).unwrap_or(0.02);
        let meta = ModelMeta::new(6, 3).unwrap();
        for u in 0..6 {
            let plan = SearchPlan::new(u, 3, tau, 5).unwrap();
            let c = learn_neighborhood_hist(&hist, meta, &plan.clone().with_rule(SelectionRule::BestScore)).unwrap();
            let q = QuantumPlan::new(MaxFindMode::Amplitude, 1e-6, derive_seed(seed, u as u64));
            let (qr, ledger) = learn_neighborhood_quantum(&hist, meta, &plan, &q).unwrap();
            assert_eq!(qr.neighbors, c.neighbors, "instance {k} node {u}");
            assert_eq!(qr.superset_trace, c.superset_trace);
            assert!(ledger.grover_iterations > 0);
        }
    }
}

#[test]
fn quantum_to_classical_ratio_falls_with_n() {
    let mut ratios = Vec::new();
    for n in [8usize, 12, 16] {
        let m = MrfModel::new(n, 3, 0.0, 1.0, vec![]).unwrap();
        let data: Vec<i8> = (0..2_000 * n).map(|i| if (i * 7919) % 3 == 0 { 1 } else { -1 }).collect();
        let s = SampleSet::new(n, data, 0).unwrap();
        let hist = RowHistogram::new(&s);
        let plan = SearchPlan::new(0, 3, 0.5, n - 1).unwrap();
        let q = QuantumPlan::new(MaxFindMode::Accounting, 0.1, 3);
        let (_, ledger) = learn_neighborhood_quantum(&hist, ModelMeta::new(n, 3).unwrap(), &plan, &q).unwrap();
        ratios.push(ledger.ratio());
        drop(m);
    }
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
}

#[test]
fn gibbs_samples_recover_figure1() {
    let m = figure1();
    let (s, _) = gibbs_sample(&m, 100_000, 1_000, 5, 4);
    let hist = RowHistogram::new(&s);
    let tau = calibrate_tau(&hist).unwrap().tau;
    let plan = SearchPlan::new(0, 3, tau, 4).unwrap();
    let g = recover_graph(&s, ModelMeta::new(5, 3).unwrap(), &plan, Symmetrize::And).unwrap();
    assert_eq!(g.edge_set(), m.neighborhoods().edges());
}

#[test]
fn superset_contains_neighborhood_in_most_trials() {
    let m = figure1();
    let t = exact_joint(&m).unwrap();
    let nb = m.neighborhoods();
    let mut ok = 0;
    let mut total = 0;
    for k in 0..10u64 {
        let s = sample_exact(&t, 50_000, derive_seed(77, k));
        let hist = RowHistogram::new(&s);
        let tau = calibrate_tau(&hist).unwrap().tau;
        for u in 0..5 {
            let r = learn_neighborhood_hist(&hist, ModelMeta::new(5, 3).unwrap(), &SearchPlan::new(u, 3, tau, 4).unwrap()).unwrap();
            total += 1;
            ok += usize::from(nb.of(u).iter().all(|v| r.superset.contains(v)));
        }
    }
    assert!(ok as f64 >= 0.9 * total as f64, "{ok}/{total}");
}

#[test]
fn model_and_samples_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let m = figure1();
    let mp = dir.path().join("model.json");
    m.save(&mp).unwrap();
    assert_eq!(MrfModel::load(&mp).unwrap(), m);
    let s = sample_exact(&exact_joint(&m).unwrap(), 1_000, 5);
    let sp = dir.path().join("samples.bin");
    s.save(&sp).unwrap();
    assert_eq!(SampleSet::load(&sp).unwrap(), s);
}
