//! End-to-end trials: sample from a ground-truth model, learn the graph, and
//! score it against the truth.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use mrfq_core::greedy::recover_graph_hist;
use mrfq_core::qmaxfind::{recover_graph_quantum, MaxFindMode, QuantumPlan, QueryLedger};
use mrfq_core::seed::{derive_seed, streams};
use mrfq_core::{
    calibrate_tau, default_cap_l, exact_joint, figure1, gibbs_sample, random_model, sample_exact,
    ModelMeta, MrfModel, RandomModelSpec, RowHistogram, SampleSet, SearchPlan, SelectionRule,
    Symmetrize,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelSource {
    Path(PathBuf),
    Preset(String),
    Random(RandomModelSpec),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerMethod {
    #[default]
    Exact,
    Gibbs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerSettings {
    #[serde(default)]
    pub method: SamplerMethod,
    pub m: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_thinning")]
    pub thinning: usize,
}

fn default_burn_in() -> usize {
    1_000
}

fn default_thinning() -> usize {
    5
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauMode {
    #[default]
    Auto,
    Theoretical,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    #[default]
    Classical,
    Quantum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerSettings {
    pub kind: LearnerKind,
    pub tau: TauMode,
    pub cap_l: Option<usize>,
    /// Failure budget `w`, used for the theoretical constants and the
    /// per-call max-finding failure probability.
    pub w: f64,
    pub mode: MaxFindMode,
    pub selection: SelectionRule,
    pub symmetrize: Symmetrize,
}

impl Default for LearnerSettings {
    fn default() -> Self {
        Self {
            kind: LearnerKind::Classical,
            tau: TauMode::Auto,
            cap_l: None,
            w: 0.1,
            mode: MaxFindMode::Accounting,
            selection: SelectionRule::FirstPassing,
            symmetrize: Symmetrize::And,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSource,
    pub sampler: SamplerSettings,
    #[serde(default)]
    pub learner: LearnerSettings,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Loads or builds the ground-truth model and checks it.
pub fn resolve_model(source: &ModelSource, seed: u64) -> Result<MrfModel> {
    let model = match source {
        ModelSource::Path(p) => MrfModel::load(p).with_context(|| format!("loading {}", p.display()))?,
        ModelSource::Preset(name) => preset(name)?,
        ModelSource::Random(spec) => random_model(spec, derive_seed(seed, streams::MODEL))?,
    };
    let violations = model.validate();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(crate::ValidationFailure(list).into());
    }
    Ok(model)
}

pub fn preset(name: &str) -> Result<MrfModel> {
    match name {
        "figure1" => Ok(figure1()),
        other => bail!("unknown preset {other:?} (available: figure1)"),
    }
}

pub fn draw_samples(model: &MrfModel, s: &SamplerSettings, seed: u64) -> Result<SampleSet> {
    if s.m == 0 {
        bail!("sample count must be positive");
    }
    Ok(match s.method {
        SamplerMethod::Exact => sample_exact(&exact_joint(model)?, s.m, seed),
        SamplerMethod::Gibbs => gibbs_sample(model, s.m, s.burn_in, s.thinning, seed).0,
    })
}

/// Threshold in use plus the theoretical value when it is computable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauChoice {
    pub tau: f64,
    pub source: &'static str,
    pub theoretical: Option<f64>,
    pub log2_theoretical: Option<f64>,
    pub theoretical_cap_l: Option<f64>,
}

pub fn choose_tau(
    mode: TauMode,
    hist: &RowHistogram,
    model: Option<&MrfModel>,
    w: f64,
) -> Result<TauChoice> {
    let consts = model.map(|m| m.derived_constants(w)).transpose().ok().flatten();
    let (tau, source) = match mode {
        TauMode::Fixed(t) => (t, "fixed"),
        TauMode::Auto => (calibrate_tau(hist)?.tau, "auto"),
        TauMode::Theoretical => match &consts {
            Some(k) if k.tau > 0.0 => (k.tau, "theoretical"),
            Some(k) => bail!("theoretical threshold underflows (log2 tau = {:.1})", k.log2_tau),
            None => bail!("theoretical threshold needs a model with computable constants"),
        },
    };
    if !(tau > 0.0 && tau.is_finite()) {
        bail!("threshold must be positive and finite, got {tau}");
    }
    Ok(TauChoice {
        tau,
        source,
        theoretical: consts.as_ref().map(|k| k.tau),
        log2_theoretical: consts.as_ref().map(|k| k.log2_tau),
        theoretical_cap_l: consts.as_ref().map(|k| k.cap_l),
    })
}

fn ones(edges: &BTreeSet<(usize, usize)>) -> Vec<[usize; 2]> {
    edges.iter().map(|&(a, b)| [a + 1, b + 1]).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    pub sampler_seed: u64,
    pub learner_seed: u64,
    pub tau: Option<f64>,
    pub edges: Vec<[usize; 2]>,
    pub correct: bool,
    pub precision: f64,
    pub recall: f64,
    pub asymmetries: usize,
    pub cap_terminated: usize,
    pub ledger: Option<QueryLedger>,
    pub error: Option<String>,
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub successes: usize,
    pub trials: usize,
    pub failed_trials: usize,
    pub success_rate: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_oracle_calls: Option<f64>,
    pub mean_classical_equiv_cost: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub version: &'static str,
    pub true_edges: Vec<[usize; 2]>,
    pub summary: Summary,
    pub trials: Vec<TrialReport>,
    pub wall_time: f64,
}

impl RunReport {
    /// Copy with all timing fields zeroed.
    pub fn without_timing(&self) -> Self {
        let mut out = self.clone();
        out.wall_time = 0.0;
        for t in &mut out.trials {
            t.wall_time = 0.0;
        }
        out
    }

    pub fn write_csv(&self, w: impl std::io::Write) -> Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            trial: usize,
            correct: bool,
            precision: f64,
            recall: f64,
            tau: Option<f64>,
            oracle_calls: Option<u64>,
            classical_equiv_cost: Option<u64>,
            error: Option<&'a str>,
        }
        let mut out = csv::Writer::from_writer(w);
        for t in &self.trials {
            out.serialize(Row {
                trial: t.trial,
                correct: t.correct,
                precision: t.precision,
                recall: t.recall,
                tau: t.tau,
                oracle_calls: t.ledger.as_ref().map(|l| l.oracle_calls),
                classical_equiv_cost: t.ledger.as_ref().map(|l| l.classical_equiv_cost),
                error: t.error.as_deref(),
            })?;
        }
        out.flush()?;
        Ok(())
    }
}

fn score(found: &BTreeSet<(usize, usize)>, truth: &BTreeSet<(usize, usize)>) -> (f64, f64) {
    let hit = found.intersection(truth).count() as f64;
    let precision = if found.is_empty() { f64::from(u8::from(truth.is_empty())) } else { hit / found.len() as f64 };
    let recall = if truth.is_empty() { 1.0 } else { hit / truth.len() as f64 };
    (precision, recall)
}

fn run_trial(
    config: &ExperimentConfig,
    model: &MrfModel,
    truth: &BTreeSet<(usize, usize)>,
    k: usize,
) -> TrialReport {
    let start = Instant::now();
    let trial_seed = derive_seed(config.seed, streams::TRIAL_BASE + k as u64);
    let sampler_seed = derive_seed(trial_seed, streams::SAMPLER);
    let learner_seed = derive_seed(trial_seed, streams::LEARNER);
    let mut report = TrialReport {
        trial: k,
        sampler_seed,
        learner_seed,
        tau: None,
        edges: vec![],
        correct: false,
        precision: 0.0,
        recall: 0.0,
        asymmetries: 0,
        cap_terminated: 0,
        ledger: None,
        error: None,
        wall_time: 0.0,
    };
    let outcome = (|| -> Result<()> {
        let samples = draw_samples(model, &config.sampler, sampler_seed)?;
        let hist = RowHistogram::new(&samples);
        let l = &config.learner;
        let tau = choose_tau(l.tau, &hist, Some(model), l.w)?;
        report.tau = Some(tau.tau);
        let meta = ModelMeta::new(model.n(), model.r())?;
        let cap = default_cap_l(tau.theoretical_cap_l, model.n(), l.cap_l);
        let plan = SearchPlan::new(0, model.r(), tau.tau, cap)?.with_rule(l.selection);
        let graph = match l.kind {
            LearnerKind::Classical => recover_graph_hist(&hist, meta, &plan, l.symmetrize)?,
            LearnerKind::Quantum => {
                let q = QuantumPlan::new(l.mode, l.w, learner_seed);
                let g = recover_graph_quantum(&hist, meta, &plan, &q, l.symmetrize)?;
                report.ledger = Some(g.total);
                g.graph
            }
        };
        let found = graph.edge_set();
        let (p, r) = score(&found, truth);
        report.edges = ones(&found);
        report.correct = &found == truth;
        report.precision = p;
        report.recall = r;
        report.asymmetries = graph.asymmetries.len();
        report.cap_terminated = graph.nodes.iter().filter(|n| n.cap_terminated).count();
        Ok(())
    })();
    if let Err(e) = outcome {
        report.error = Some(format!("{e:#}"));
    }
    report.wall_time = start.elapsed().as_secs_f64();
    report
}

/// Runs every trial (in parallel on the current rayon pool). Individual
/// trial failures are recorded; the run fails only if every trial failed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    if config.trials == 0 {
        bail!("trial count must be positive");
    }
    let start = Instant::now();
    let model = resolve_model(&config.model, config.seed)?;
    let truth = model.neighborhoods().edges();
    let trials: Vec<TrialReport> = (0..config.trials)
        .into_par_iter()
        .map(|k| run_trial(config, &model, &truth, k))
        .collect();
    let failed = trials.iter().filter(|t| t.error.is_some()).count();
    if failed == trials.len() {
        bail!("all {failed} trials failed; first error: {}", trials[0].error.as_deref().unwrap_or("?"));
    }
    let ok: Vec<&TrialReport> = trials.iter().filter(|t| t.error.is_none()).collect();
    let mean = |f: &dyn Fn(&TrialReport) -> f64| ok.iter().map(|t| f(t)).sum::<f64>() / ok.len() as f64;
    let ledgers: Vec<&QueryLedger> = ok.iter().filter_map(|t| t.ledger.as_ref()).collect();
    let ledger_mean = |f: &dyn Fn(&QueryLedger) -> u64| {
        (!ledgers.is_empty())
            .then(|| ledgers.iter().map(|l| f(l) as f64).sum::<f64>() / ledgers.len() as f64)
    };
    let successes = trials.iter().filter(|t| t.correct).count();
    let summary = Summary {
        successes,
        trials: trials.len(),
        failed_trials: failed,
        success_rate: successes as f64 / trials.len() as f64,
        mean_precision: mean(&|t| t.precision),
        mean_recall: mean(&|t| t.recall),
        mean_oracle_calls: ledger_mean(&|l| l.oracle_calls),
        mean_classical_equiv_cost: ledger_mean(&|l| l.classical_equiv_cost),
    };
    Ok(RunReport {
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION"),
        true_edges: ones(&truth),
        summary,
        trials,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
