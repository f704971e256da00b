use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mrfq_cli::experiment::{
    choose_tau, draw_samples, run_experiment, ExperimentConfig, SamplerMethod, SamplerSettings,
    TauMode,
};
use mrfq_cli::scaling::{bench_scaling, report_crossover, write_rows, CrossoverConfig, ScalingConfig};
use mrfq_cli::{parse_nodes, ValidationFailure};
use mrfq_core::greedy::{learn_neighborhood_hist, recover_graph_hist};
use mrfq_core::qmaxfind::{
    learn_neighborhood_quantum, recover_graph_quantum, CostModel, MaxFindMode, QuantumPlan,
};
use mrfq_core::seed::{derive_seed, streams};
use mrfq_core::{
    default_cap_l, figure1, random_model, EmpiricalProbCache, ModelMeta, MrfError, MrfModel,
    RandomModelSpec, RowHistogram, SampleSet, SearchPlan, SelectionRule, Symmetrize,
};

#[derive(Parser)]
#[command(name = "mrfq", version, about = "Structure learning for binary r-wise Markov random fields")]
struct Cli {
    /// Master seed; falls back to MRF_SEED, then 0.
    #[arg(long, global = true, env = "MRF_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for relative output paths.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Write a preset or random bounded-degree model.
    GenModel(GenModelArgs),
    /// Check a model for degeneracy and print its derived constants.
    Validate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        w: f64,
    },
    /// Draw samples from a model.
    Sample(SampleArgs),
    /// Print v̂ for one (u, S, I) with its per-configuration breakdown.
    Vhat {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        u: usize,
        #[arg(long, default_value = "")]
        s: String,
        #[arg(long)]
        i: String,
    },
    /// Learn the neighborhood of one node.
    Learn(LearnArgs),
    /// Learn every neighborhood and merge them into a graph.
    Recover(RecoverArgs),
    /// Learner with simulated quantum max finding; whole graph unless --u is given.
    Qlearn(QlearnArgs),
    /// Query counts of the quantum learner over a grid of n, as CSV.
    BenchScaling(BenchArgs),
    /// Predicted costs and crossover size, with measured ratios if a scaling CSV is given.
    Crossover(CrossoverArgs),
    /// Run an experiment config end to end and write JSON and CSV reports.
    Report {
        #[arg(long)]
        config: PathBuf,
        /// Base name of the report files in --out-dir.
        #[arg(long, default_value = "report")]
        name: String,
    },
}

#[derive(Args)]
struct GenModelArgs {
    #[arg(long, conflicts_with_all = ["n", "r", "d"])]
    preset: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    /// Maximum degree.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    /// Add a random field on every node.
    #[arg(long)]
    fields: bool,
    #[arg(long, default_value = "model.json")]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    method: Method,
    #[arg(long, default_value_t = 1_000)]
    burn_in: usize,
    #[arg(long, default_value_t = 5)]
    thinning: usize,
    #[arg(long, default_value = "samples.bin")]
    out: PathBuf,
    /// Also export the samples as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Gibbs,
}

#[derive(Args)]
#[group(multiple = false)]
struct TauArgs {
    #[arg(long)]
    tau: Option<f64>,
    /// Use the closed-form threshold (needs --model).
    #[arg(long)]
    tau_theoretical: bool,
    /// Place the threshold at the largest gap of the pairwise v̂ (default).
    #[arg(long)]
    tau_auto: bool,
}

impl TauArgs {
    fn mode(&self) -> TauMode {
        match (self.tau, self.tau_theoretical) {
            (Some(t), _) => TauMode::Fixed(t),
            (None, true) => TauMode::Theoretical,
            _ => TauMode::Auto,
        }
    }
}

#[derive(Args)]
struct CommonLearn {
    #[arg(long)]
    samples: PathBuf,
    /// "n,r"; n must match the samples.
    #[arg(long)]
    model_meta: String,
    #[command(flatten)]
    tau: TauArgs,
    #[arg(long = "cap-L")]
    cap_l: Option<usize>,
    /// Model file, for the theoretical constants.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Failure budget w.
    #[arg(long, default_value_t = 0.1)]
    w: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LearnArgs {
    #[command(flatten)]
    common: CommonLearn,
    #[arg(long)]
    u: usize,
    #[arg(long, value_enum, default_value_t = Selection::FirstPassing)]
    selection: Selection,
}

#[derive(Args)]
struct RecoverArgs {
    #[command(flatten)]
    common: CommonLearn,
    #[arg(long, value_enum, default_value_t = Sym::And)]
    symmetrize: Sym,
    #[arg(long, value_enum, default_value_t = Selection::FirstPassing)]
    selection: Selection,
}

#[derive(Args)]
struct QlearnArgs {
    #[command(flatten)]
    common: CommonLearn,
    #[arg(long)]
    u: Option<usize>,
    #[arg(long, value_enum, default_value_t = Mode::Accounting)]
    mode: Mode,
    /// Overall failure budget; each search gets w / (2 L (r-1)).
    #[arg(long, default_value_t = 0.1)]
    eta_budget: f64,
    #[arg(long, value_enum, default_value_t = Sym::And)]
    symmetrize: Sym,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "8,12,16,20")]
    n_list: String,
    #[arg(long, default_value_t = 3)]
    r: usize,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 0.3)]
    alpha: f64,
    #[arg(long, default_value_t = 0.9)]
    beta: f64,
    #[arg(long, default_value_t = 20_000)]
    m: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = Mode::Accounting)]
    mode: Mode,
    #[arg(long, default_value_t = 0.1)]
    eta_budget: f64,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value = "scaling.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct CrossoverArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 100_000)]
    m: u64,
    #[arg(long, default_value_t = 0.1)]
    w: f64,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    c3: f64,
    #[arg(long, default_value_t = 1.0)]
    c4: f64,
    /// Scaling CSV from bench-scaling.
    #[arg(long)]
    scaling: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Amplitude,
    Accounting,
}

impl From<Mode> for MaxFindMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Amplitude => MaxFindMode::Amplitude,
            Mode::Accounting => MaxFindMode::Accounting,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Sym {
    And,
    Or,
}

impl From<Sym> for Symmetrize {
    fn from(s: Sym) -> Self {
        match s {
            Sym::And => Symmetrize::And,
            Sym::Or => Symmetrize::Or,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Selection {
    FirstPassing,
    BestScore,
}

impl From<Selection> for SelectionRule {
    fn from(s: Selection) -> Self {
        match s {
            Selection::FirstPassing => SelectionRule::FirstPassing,
            Selection::BestScore => SelectionRule::BestScore,
        }
    }
}

/// Bad flag values; exits with status 1.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 1;
    }
    if err.downcast_ref::<ValidationFailure>().is_some() {
        return 2;
    }
    match err.downcast_ref::<MrfError>() {
        Some(MrfError::InvalidArgument(_)) => 1,
        Some(MrfError::Structure(_) | MrfError::DegenerateConstants(_)) => 2,
        _ => 3,
    }
}

struct Ctx {
    out_dir: PathBuf,
    format: Format,
    seed: u64,
}

impl Ctx {
    fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.out_dir.join(p)
        }
    }

    fn create(&self, p: &Path) -> Result<BufWriter<File>> {
        let path = self.path(p);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
    }

    /// Pretty JSON to a file under --out-dir, or to stdout.
    fn emit<T: Serialize>(&self, value: &T, out: Option<&Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        match out {
            Some(p) => {
                let mut f = self.create(p)?;
                writeln!(f, "{text}")?;
                f.flush()?;
            }
            None => writeln!(std::io::stdout().lock(), "{text}")?,
        }
        Ok(())
    }
}

fn parse_meta(text: &str) -> Result<ModelMeta> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [n, r] = parts.as_slice() else {
        return Err(usage(format!("--model-meta wants \"n,r\", got {text:?}")));
    };
    let n = n.parse().map_err(|_| usage(format!("bad n in --model-meta: {n:?}")))?;
    let r = r.parse().map_err(|_| usage(format!("bad r in --model-meta: {r:?}")))?;
    ModelMeta::new(n, r).map_err(|e| usage(e.to_string()))
}

fn node_arg(u: usize, n: usize) -> Result<usize> {
    if u == 0 || u > n {
        return Err(usage(format!("--u {u} outside 1..={n}")));
    }
    Ok(u - 1)
}

fn load_samples(path: &Path) -> Result<SampleSet> {
    SampleSet::load(path).with_context(|| format!("loading samples {}", path.display()))
}

fn load_model(path: &Path) -> Result<MrfModel> {
    MrfModel::load(path).with_context(|| format!("loading model {}", path.display()))
}

/// Samples, histogram, metadata, plan template and threshold report shared by
/// every learning subcommand.
struct Prepared {
    hist: RowHistogram,
    meta: ModelMeta,
    plan: SearchPlan,
    tau: mrfq_cli::experiment::TauChoice,
}

fn prepare(c: &CommonLearn) -> Result<Prepared> {
    let samples = load_samples(&c.samples)?;
    let meta = parse_meta(&c.model_meta)?;
    if samples.n() != meta.n {
        return Err(usage(format!("samples have n = {}, --model-meta says {}", samples.n(), meta.n)));
    }
    let model = c.model.as_deref().map(load_model).transpose()?;
    let hist = RowHistogram::new(&samples);
    let tau = choose_tau(c.tau.mode(), &hist, model.as_ref(), c.w)?;
    let cap = default_cap_l(tau.theoretical_cap_l, meta.n, c.cap_l);
    let plan = SearchPlan::new(0, meta.r, tau.tau, cap)?;
    Ok(Prepared { hist, meta, plan, tau })
}

#[derive(Serialize)]
struct WithTau<'a, T: Serialize> {
    tau_choice: &'a mrfq_cli::experiment::TauChoice,
    #[serde(flatten)]
    result: T,
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| usage(format!("--threads: {e}")))?;
    }
    let ctx = Ctx { out_dir: cli.out_dir, format: cli.format, seed: cli.seed };
    match cli.command {
        Command::GenModel(a) => gen_model(&ctx, a),
        Command::Validate { model, w } => validate(&ctx, &model, w),
        Command::Sample(a) => sample(&ctx, a),
        Command::Vhat { samples, u, s, i } => vhat(&ctx, &samples, u, &s, &i),
        Command::Learn(a) => {
            let p = prepare(&a.common)?;
            let u = node_arg(a.u, p.meta.n)?;
            let plan = p.plan.for_node(u).with_rule(a.selection.into());
            let r = learn_neighborhood_hist(&p.hist, p.meta, &plan)?;
            ctx.emit(&WithTau { tau_choice: &p.tau, result: r }, a.common.out.as_deref())
        }
        Command::Recover(a) => {
            let p = prepare(&a.common)?;
            let plan = p.plan.with_rule(a.selection.into());
            let g = recover_graph_hist(&p.hist, p.meta, &plan, a.symmetrize.into())?;
            ctx.emit(&WithTau { tau_choice: &p.tau, result: g }, a.common.out.as_deref())
        }
        Command::Qlearn(a) => qlearn(&ctx, a),
        Command::BenchScaling(a) => bench(&ctx, a),
        Command::Crossover(a) => crossover(&ctx, a),
        Command::Report { config, name } => report(&ctx, &config, &name),
    }
}

fn gen_model(ctx: &Ctx, a: GenModelArgs) -> Result<()> {
    let model = match (&a.preset, a.n, a.r, a.d) {
        (Some(p), ..) if p == "figure1" => figure1(),
        (Some(p), ..) => return Err(usage(format!("unknown preset {p:?} (available: figure1)"))),
        (None, Some(n), Some(r), Some(d)) => {
            let spec = RandomModelSpec {
                n,
                r,
                d,
                alpha: a.alpha,
                beta: a.beta,
                density: a.density,
                fields: a.fields,
            };
            random_model(&spec, derive_seed(ctx.seed, streams::MODEL))
                .map_err(|e| anyhow::Error::new(ValidationFailure(vec![e.to_string()])))?
        }
        _ => return Err(usage("gen-model needs --preset or all of --n, --r, --d")),
    };
    let path = ctx.path(&a.out);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    model.save(&path)?;
    eprintln!(
        "wrote {} (n = {}, r = {}, {} cliques, {} edges)",
        path.display(),
        model.n(),
        model.r(),
        model.cliques().len(),
        model.neighborhoods().edges().len()
    );
    Ok(())
}

fn validate(ctx: &Ctx, path: &Path, w: f64) -> Result<()> {
    let model = load_model(path)?;
    let violations: Vec<String> = model.validate().iter().map(|v| v.to_string()).collect();
    #[derive(Serialize)]
    struct Out {
        valid: bool,
        violations: Vec<String>,
        n: usize,
        r: usize,
        degree: usize,
        maximal_hyperedges: Vec<Vec<usize>>,
        constants: Option<mrfq_core::DerivedConstants>,
        constants_error: Option<String>,
    }
    let consts = model.derived_constants(w);
    let out = Out {
        valid: violations.is_empty(),
        violations: violations.clone(),
        n: model.n(),
        r: model.r(),
        degree: model.degree(),
        maximal_hyperedges: model
            .maximal_hyperedges()
            .into_iter()
            .map(|h| h.into_iter().map(|v| v + 1).collect())
            .collect(),
        constants_error: consts.as_ref().err().map(|e| e.to_string()),
        constants: consts.ok(),
    };
    ctx.emit(&out, None)?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(ValidationFailure(violations).into())
    }
}

fn sample(ctx: &Ctx, a: SampleArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let settings = SamplerSettings {
        method: match a.method {
            Method::Exact => SamplerMethod::Exact,
            Method::Gibbs => SamplerMethod::Gibbs,
        },
        m: a.m,
        burn_in: a.burn_in,
        thinning: a.thinning,
    };
    let samples = draw_samples(&model, &settings, derive_seed(ctx.seed, streams::SAMPLER))?;
    let mut f = ctx.create(&a.out)?;
    samples.write_to(&mut f)?;
    f.flush()?;
    if let Some(p) = &a.csv {
        let mut f = ctx.create(p)?;
        samples.write_csv(&mut f)?;
        f.flush()?;
    }
    eprintln!("wrote {} samples of {} nodes to {}", samples.len(), samples.n(), ctx.path(&a.out).display());
    Ok(())
}

fn vhat(ctx: &Ctx, path: &Path, u: usize, s: &str, i: &str) -> Result<()> {
    let samples = load_samples(path)?;
    let n = samples.n();
    let u0 = node_arg(u, n)?;
    let s0 = parse_nodes(s, n).map_err(|e| usage(e.to_string()))?;
    let i0 = parse_nodes(i, n).map_err(|e| usage(e.to_string()))?;
    let hist = RowHistogram::new(&samples);
    let cache = EmpiricalProbCache::new(&hist, u0, &s0)?;
    let value = cache.v_hat(&i0)?;
    let terms = cache.breakdown(&i0)?;
    match ctx.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                u: usize,
                s: Vec<usize>,
                i: Vec<usize>,
                m: usize,
                v_hat: f64,
                breakdown: &'a [mrfq_core::empirics::VhatTerm],
            }
            let one = |v: &[usize]| v.iter().map(|x| x + 1).collect();
            ctx.emit(&Out { u, s: one(&s0), i: one(&i0), m: samples.len(), v_hat: value, breakdown: &terms }, None)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(["x_u", "x_i", "x_s", "weight", "deviation", "contribution"])?;
            let join = |v: &[i8]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            for t in &terms {
                w.write_record([
                    t.x_u.to_string(),
                    join(&t.x_i),
                    join(&t.x_s),
                    t.weight.to_string(),
                    t.deviation.to_string(),
                    t.contribution.to_string(),
                ])?;
            }
            w.flush()?;
            eprintln!("v_hat = {value}");
            Ok(())
        }
    }
}

fn qlearn(ctx: &Ctx, a: QlearnArgs) -> Result<()> {
    let p = prepare(&a.common)?;
    let q = QuantumPlan::new(a.mode.into(), a.eta_budget, derive_seed(ctx.seed, streams::LEARNER));
    match a.u {
        Some(u) => {
            let u = node_arg(u, p.meta.n)?;
            let (r, ledger) = learn_neighborhood_quantum(&p.hist, p.meta, &p.plan.for_node(u), &q)?;
            #[derive(Serialize)]
            struct Out {
                #[serde(flatten)]
                result: mrfq_core::NeighborhoodResult,
                ledger: mrfq_core::QueryLedger,
            }
            ctx.emit(&WithTau { tau_choice: &p.tau, result: Out { result: r, ledger } }, a.common.out.as_deref())
        }
        None => {
            let g = recover_graph_quantum(&p.hist, p.meta, &p.plan, &q, a.symmetrize.into())?;
            ctx.emit(&WithTau { tau_choice: &p.tau, result: g }, a.common.out.as_deref())
        }
    }
}

fn bench(ctx: &Ctx, a: BenchArgs) -> Result<()> {
    let n_list = a
        .n_list
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| usage(format!("bad --n-list entry {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let cfg = ScalingConfig {
        n_list,
        r: a.r,
        d: a.d,
        alpha: a.alpha,
        beta: a.beta,
        m: a.m,
        trials: a.trials,
        mode: a.mode.into(),
        w: a.eta_budget,
        tau: a.tau.map_or(TauMode::Auto, TauMode::Fixed),
        seed: ctx.seed,
    };
    let rows = bench_scaling(&cfg)?;
    let mut f = ctx.create(&a.out)?;
    write_rows(&rows, &mut f)?;
    f.flush()?;
    eprintln!("wrote {} rows to {}", rows.len(), ctx.path(&a.out).display());
    Ok(())
}

fn crossover(ctx: &Ctx, a: CrossoverArgs) -> Result<()> {
    let cfg = CrossoverConfig {
        n: a.n,
        r: a.r,
        d: a.d,
        m: a.m,
        w: a.w,
        alpha: a.alpha,
        beta: a.beta,
        costs: CostModel { c3: a.c3, c4: a.c4, ..CostModel::default() },
    };
    let table = report_crossover(&cfg, a.scaling.as_deref())?;
    match ctx.format {
        Format::Json => ctx.emit(&table, None),
        Format::Csv => {
            write!(std::io::stdout().lock(), "{}", table.render_text())?;
            Ok(())
        }
    }
}

fn report(ctx: &Ctx, config: &Path, name: &str) -> Result<()> {
    // A config without a seed takes the global one; the report echoes it.
    let text = std::fs::read_to_string(config)
        .map_err(|e| usage(format!("reading {}: {e}", config.display())))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("parsing {}: {e}", config.display())))?;
    if let Some(obj) = value.as_object_mut() {
        obj.entry("seed").or_insert(ctx.seed.into());
    }
    let cfg: ExperimentConfig =
        serde_json::from_value(value).map_err(|e| usage(format!("config {}: {e}", config.display())))?;
    let report = run_experiment(&cfg)?;
    let json = PathBuf::from(format!("{name}.json"));
    let csv_path = PathBuf::from(format!("{name}.csv"));
    ctx.emit(&report, Some(&json))?;
    let mut f = ctx.create(&csv_path)?;
    report.write_csv(&mut f)?;
    f.flush()?;
    let s = &report.summary;
    eprintln!(
        "recovered the true graph in {}/{} trials ({} failed); reports in {}",
        s.successes,
        s.trials,
        s.failed_trials,
        ctx.out_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed pipe (`| head`) is not a failure.
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
            || c.downcast_ref::<csv::Error>().is_some_and(|c| matches!(c.kind(), csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe))
    })
}
