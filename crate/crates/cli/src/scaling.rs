//! Query-count scaling runs and the crossover table.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use mrfq_core::qmaxfind::{
    code_space_size, learn_neighborhood_quantum, predict_costs, CostModel, CostPrediction,
    MaxFindMode, QuantumPlan,
};
use mrfq_core::seed::{derive_seed, streams};
use mrfq_core::{random_model, ModelMeta, RandomModelSpec, RowHistogram, SearchPlan};

use crate::experiment::{choose_tau, draw_samples, SamplerMethod, SamplerSettings, TauMode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub n_list: Vec<usize>,
    pub r: usize,
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    pub m: usize,
    pub trials: usize,
    pub mode: MaxFindMode,
    pub w: f64,
    pub tau: TauMode,
    pub seed: u64,
}

/// One learner run on node 1 of a random model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    /// Size of one size-(r-1) code space.
    #[serde(rename = "K")]
    pub k: u64,
    pub mode: MaxFindMode,
    pub trial: usize,
    pub oracle_calls: u64,
    pub classical_equiv_cost: u64,
    pub success: bool,
}

/// Exact sampling up to this many nodes, Gibbs above.
const EXACT_UP_TO: usize = 16;

pub fn bench_scaling(cfg: &ScalingConfig) -> Result<Vec<ScalingRow>> {
    if cfg.n_list.is_empty() || cfg.trials == 0 {
        bail!("need at least one n and one trial");
    }
    let jobs: Vec<(usize, usize)> =
        cfg.n_list.iter().flat_map(|&n| (0..cfg.trials).map(move |t| (n, t))).collect();
    jobs.par_iter()
        .map(|&(n, t)| {
            let seed = derive_seed(derive_seed(cfg.seed, n as u64), streams::TRIAL_BASE + t as u64);
            let spec = RandomModelSpec::new(n, cfg.r, cfg.d, cfg.alpha, cfg.beta);
            let model = random_model(&spec, derive_seed(seed, streams::MODEL))?;
            let sampler = SamplerSettings {
                method: if n <= EXACT_UP_TO { SamplerMethod::Exact } else { SamplerMethod::Gibbs },
                m: cfg.m,
                burn_in: 500,
                thinning: 2,
            };
            let samples = draw_samples(&model, &sampler, derive_seed(seed, streams::SAMPLER))?;
            let hist = RowHistogram::new(&samples);
            let tau = choose_tau(cfg.tau, &hist, Some(&model), cfg.w)?.tau;
            let plan = SearchPlan::new(0, cfg.r, tau, n - 1)?;
            let q = QuantumPlan::new(cfg.mode, cfg.w, derive_seed(seed, streams::LEARNER));
            let meta = ModelMeta::new(n, cfg.r)?;
            let (result, ledger) = learn_neighborhood_quantum(&hist, meta, &plan, &q)?;
            let truth: Vec<usize> = model.neighborhoods().of(0).iter().copied().collect();
            Ok(ScalingRow {
                n,
                k: code_space_size(n, cfg.r.saturating_sub(1).max(1))?,
                mode: cfg.mode,
                trial: t,
                oracle_calls: ledger.oracle_calls,
                classical_equiv_cost: ledger.classical_equiv_cost,
                success: result.neighbors == truth,
            })
        })
        .collect()
}

pub fn write_rows(rows: &[ScalingRow], w: impl std::io::Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<ScalingRow>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    rdr.deserialize()
        .collect::<std::result::Result<Vec<ScalingRow>, _>>()
        .with_context(|| format!("parsing {}", path.display()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasuredRatio {
    pub n: usize,
    pub runs: usize,
    pub mean_oracle_calls: f64,
    pub mean_classical_equiv_cost: f64,
    /// Mean of per-run `oracle_calls / classical_equiv_cost`.
    pub mean_ratio: f64,
}

pub fn measured_ratios(rows: &[ScalingRow]) -> Vec<MeasuredRatio> {
    let mut by_n: BTreeMap<usize, Vec<&ScalingRow>> = BTreeMap::new();
    for r in rows {
        by_n.entry(r.n).or_default().push(r);
    }
    by_n.into_iter()
        .map(|(n, rs)| {
            let k = rs.len() as f64;
            let valid: Vec<f64> = rs
                .iter()
                .filter(|r| r.classical_equiv_cost > 0)
                .map(|r| r.oracle_calls as f64 / r.classical_equiv_cost as f64)
                .collect();
            MeasuredRatio {
                n,
                runs: rs.len(),
                mean_oracle_calls: rs.iter().map(|r| r.oracle_calls as f64).sum::<f64>() / k,
                mean_classical_equiv_cost: rs.iter().map(|r| r.classical_equiv_cost as f64).sum::<f64>() / k,
                mean_ratio: valid.iter().sum::<f64>() / valid.len().max(1) as f64,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossoverConfig {
    pub n: usize,
    pub r: usize,
    pub d: usize,
    pub m: u64,
    pub w: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub costs: CostModel,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossoverTable {
    pub prediction: CostPrediction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<Vec<MeasuredRatio>>,
}

/// Prediction, plus measured ratios when a scaling CSV is supplied.
pub fn report_crossover(cfg: &CrossoverConfig, scaling_csv: Option<&Path>) -> Result<CrossoverTable> {
    let prediction = predict_costs(cfg.n, cfg.r, cfg.d, cfg.m, cfg.w, cfg.alpha, cfg.beta, &cfg.costs)?;
    let measured = scaling_csv.map(|p| read_rows(p).map(|rows| measured_ratios(&rows))).transpose()?;
    Ok(CrossoverTable { prediction, measured })
}

impl CrossoverTable {
    pub fn render_text(&self) -> String {
        let p = &self.prediction;
        let mut s = String::new();
        s += &format!("n = {}, r = {}, d = {}, M = {}, w = {}\n", p.n, p.r, p.d, p.m, p.w);
        s += &format!("gamma bound       {:.4}\n", p.gamma_bound);
        s += &format!("log2 tau          {:.3}\n", p.log2_tau);
        s += &format!("log2 L            {:.3}\n", p.log2_cap_l);
        for (name, v) in [
            ("membership", p.log2_membership),
            ("prep p(x_I)", p.log2_prep_i),
            ("prep p(x_I,x_S)", p.log2_prep_is),
            ("prep v oracle", p.log2_prep_v),
            ("subset search", p.log2_subset_find),
            ("quantum total", p.log2_total_quantum),
            ("classical total", p.log2_classical),
        ] {
            s += &format!("log2 cost {name:<16} {v:.3}\n");
        }
        s += &format!("log2 crossover n  {:.4e}\n", p.log2_crossover_n);
        s += &format!("log2 closed form  {:.4e}\n", p.log2_crossover_closed_form);
        if let Some(rows) = &self.measured {
            s += "n\truns\tmean_oracle_calls\tmean_classical\tmean_ratio\n";
            for r in rows {
                s += &format!(
                    "{}\t{}\t{:.1}\t{:.1}\t{:.4}\n",
                    r.n, r.runs, r.mean_oracle_calls, r.mean_classical_equiv_cost, r.mean_ratio
                );
            }
        }
        s
    }
}
