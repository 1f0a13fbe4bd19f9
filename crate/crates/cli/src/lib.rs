//! Argument parsing and report writing for the `ipod` binary.
//!
//! Case and predictor indices in every report are 1-based.

pub mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;

use ipod::data::{self, Dataset, YColumn};
use ipod::highdim::{self, EtaGridConfig, ScreenConfig, SparseDesign};
use ipod::ipod::{fit_simplified, fit_simplified_lambdas, solution_path, IpodConfig, PathConfig, PathStart};
use ipod::pilot::{self, LtsConfig, PilotEstimate};
use ipod::sim::{self, BenchConfig, Method, SimDesign, SimScale};
use ipod::threshold::{self, ThresholdRule};
use ipod::tune::{self, SelectConfig, TuningReport};
use ipod::RegressionProblem;

/// Version tag written into every JSON report.
pub const SCHEMA: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "ipod",
    version,
    about = "Outlier detection and robust regression on the mean-shift model"
)]
pub struct Cli {
    /// Worker threads for replicate and grid parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Flat key = value file; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the main output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit one model and report coefficients and flagged cases (JSON).
    Fit(FitArgs),
    /// Trace the solution path over a λ grid (CSV).
    Path(PathArgs),
    /// Trace the path and select λ by local BIC* (JSON).
    Tune(PathArgs),
    /// Run a seeded outlier-detection study (JSON, optional CSV).
    Simulate(SimArgs),
    /// Time Θ-IPOD against IRLS along a λ ladder (JSON).
    Bench(BenchArgs),
    /// Large-p fit: screening plus η/λ tuning (JSON).
    Highdim(HighdimArgs),
    /// Tabulate Θ, ψ, loss and penalty of a rule (CSV).
    Curves(CurveArgs),
}

#[derive(Args, Debug)]
pub struct DataArgs {
    /// Built-in dataset (hbk, telef, stars) or path to a headed CSV file.
    #[arg(long, default_value = "hbk")]
    pub data: String,
    /// Response column: header name, 0-based position, or "last".
    #[arg(long, default_value = "last")]
    pub y: String,
    /// Do not prepend an intercept column.
    #[arg(long)]
    pub no_intercept: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RuleArg {
    Soft,
    Hard,
    Hardridge,
}

#[derive(Args, Debug)]
pub struct RuleArgs {
    #[arg(long, value_enum, default_value = "hard")]
    pub rule: RuleArg,
    /// Ridge weight η of the hard-ridge rule.
    #[arg(long)]
    pub eta: Option<f64>,
}

impl RuleArgs {
    fn rule(&self) -> Result<ThresholdRule> {
        let rule = match (self.rule, self.eta) {
            (RuleArg::Soft, None) => ThresholdRule::Soft,
            (RuleArg::Hard, None) => ThresholdRule::Hard,
            (RuleArg::Hardridge, Some(eta)) => ThresholdRule::HardRidge { eta },
            (RuleArg::Hardridge, None) => bail!("cli: --rule hardridge needs --eta"),
            (_, Some(_)) => bail!("cli: --eta only applies to --rule hardridge"),
        };
        rule.validate()?;
        Ok(rule)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PilotArg {
    Lts,
    Zero,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TuneArg {
    Bic,
    Universal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StartArg {
    Cold,
    Warm,
}

#[derive(Args, Debug)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "lts")]
    pub pilot: PilotArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Use a common λ for every case instead of λ√(1 − hᵢ).
    #[arg(long)]
    pub no_leverage_weighting: bool,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub rule: RuleArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Fixed threshold, in response units.
    #[arg(long, conflicts_with = "tune")]
    pub lambda: Option<f64>,
    /// Choose λ by local BIC* (default) or use σ̂√(2(1 − hᵢ) log n).
    #[arg(long, value_enum)]
    pub tune: Option<TuneArg>,
}

#[derive(Args, Debug)]
pub struct PathArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub rule: RuleArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Number of λ values on the geometric grid.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    /// Smallest λ as a fraction of λ_max.
    #[arg(long, default_value_t = 0.05)]
    pub lambda_min_frac: f64,
    #[arg(long, value_enum, default_value = "cold")]
    pub start: StartArg,
    /// Also write γ̂ along the path (one column per λ) to this CSV file.
    #[arg(long)]
    pub gamma_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimArgs {
    /// Named design such as table1-L15-O50 or table2-Lnone-O20.
    #[arg(long, conflicts_with_all = ["n", "p", "outliers"])]
    pub preset: Option<String>,
    /// desk (n = 500, 20 replicates) or full (n = 1000, 100 replicates).
    #[arg(long, default_value = "desk")]
    pub scale: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub outliers: Option<usize>,
    /// Leverage value L, or "none".
    #[arg(long)]
    pub leverage: Option<String>,
    #[arg(long)]
    pub shift: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Comma-separated: hard_tuned, soft_tuned, soft_universal, oracle.
    #[arg(long, value_delimiter = ',', default_value = "hard_tuned,soft_tuned")]
    pub methods: Vec<String>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Plot-ready metrics table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Defaults to n/10.
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Measured passes after one discarded warm-up; the median is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub lambda_floor: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lambda_step: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
}

#[derive(Args, Debug)]
pub struct HighdimArgs {
    /// Headed CSV file (no intercept is added).
    #[arg(long, conflicts_with = "synthetic")]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = "last")]
    pub y: String,
    /// Generate the n = 100, p = 500 sparse scenario with this seed.
    #[arg(long)]
    pub synthetic: Option<u64>,
    /// Screening keeps ⌈αn⌉ parameters per sweep.
    #[arg(long, default_value_t = 0.75)]
    pub alpha: f64,
    #[arg(long, default_value_t = 200)]
    pub screen_iters: usize,
    /// Screen for the full iteration budget even when the support is stable.
    #[arg(long)]
    pub no_stable_stop: bool,
    /// Comma-separated η ladder for the ridge stage.
    #[arg(long, value_delimiter = ',')]
    pub eta_grid: Option<Vec<f64>>,
    /// Comma-separated multiples of η* for the λ stage.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.05,0.005")]
    pub eta_factors: Vec<f64>,
    #[arg(long, default_value_t = 60)]
    pub n_lambda: usize,
    /// Write nonzero coefficients as CSV (block,index,value).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub from: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub to: f64,
    #[arg(long, default_value_t = 601)]
    pub points: usize,
}

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Done,
    NotConverged,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Done => 0,
            Status::NotConverged => 2,
        }
    }
}

/// Sparse vector with 1-based indices.
#[derive(Debug, Serialize, serde::Deserialize, PartialEq)]
pub struct Sparse {
    pub index: Vec<usize>,
    pub value: Vec<f64>,
}

impl Sparse {
    pub fn from_dense(v: &DVector<f64>) -> Self {
        let (index, value) = v
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(i, x)| (i + 1, *x))
            .unzip();
        Sparse { index, value }
    }
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

#[derive(Serialize)]
struct FitReport<'a> {
    schema: u32,
    command: &'static str,
    dataset: &'a str,
    n: usize,
    p: usize,
    intercept: bool,
    rule: ThresholdRule,
    pilot: &'a PilotEstimate,
    tuning: &'static str,
    /// Selected or supplied λ; for the universal rule, σ̂√(2 log n).
    lambda: f64,
    selected_df: usize,
    beta: Vec<f64>,
    gamma: Sparse,
    outliers: Vec<usize>,
    n_iter: usize,
    converged: bool,
}

/// Parses `args` (program name first), runs the command and writes its
/// main output to `--out` or `stdout`.
pub fn run(args: Vec<String>, stdout: &mut dyn Write) -> Result<Status> {
    let args = config::merge_config(args)?;
    let cli = Cli::try_parse_from(args)?;
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("cli: --threads must be at least 1");
        }
        ipod::configure_threads(t);
    }
    let mut file;
    let out: &mut dyn Write = match &cli.out {
        Some(path) => {
            file = BufWriter::new(
                File::create(path).with_context(|| format!("cli: cannot create {}", path.display()))?,
            );
            &mut file
        }
        None => stdout,
    };
    let status = match &cli.command {
        Command::Fit(a) => cmd_fit(a, out)?,
        Command::Path(a) => cmd_path(a, out)?,
        Command::Tune(a) => cmd_tune(a, out)?,
        Command::Simulate(a) => cmd_simulate(a, out)?,
        Command::Bench(a) => cmd_bench(a, out)?,
        Command::Highdim(a) => cmd_highdim(a, out)?,
        Command::Curves(a) => cmd_curves(a, out)?,
    };
    out.flush()?;
    Ok(status)
}

fn load_dataset(data: &str, y: &str) -> Result<Dataset> {
    if let Some(ds) = data::builtin(data) {
        return Ok(ds);
    }
    let yc: YColumn = y.parse().expect("infallible");
    Ok(data::read_csv_path(std::path::Path::new(data), &yc)?)
}

fn load_problem(a: &DataArgs) -> Result<(Dataset, RegressionProblem)> {
    let ds = load_dataset(&a.data, &a.y)?;
    let problem = ds.problem(!a.no_intercept)?;
    Ok((ds, problem))
}

fn make_pilot(problem: &RegressionProblem, s: &SolverArgs) -> Result<PilotEstimate> {
    Ok(match s.pilot {
        PilotArg::Lts => pilot::lts_lite(problem, &LtsConfig::default(), s.seed)?,
        PilotArg::Zero => pilot::zero_pilot(problem, s.seed)?,
    })
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_fit(a: &FitArgs, out: &mut dyn Write) -> Result<Status> {
    let (ds, problem) = load_problem(&a.data)?;
    let rule = a.rule.rule()?;
    let model = problem.factor()?;
    let pilot = make_pilot(&problem, &a.solver)?;
    let gamma0 = pilot.gamma_start(&problem);
    let y = problem.y();
    let mut cfg = IpodConfig::new(rule, 0.0);
    cfg.epsilon = a.solver.epsilon;
    cfg.max_iter = a.solver.max_iter;
    cfg.leverage_weighting = !a.solver.no_leverage_weighting;
    cfg.trace_objective = false;

    let (tuning, lambda, gamma, n_iter, converged) = match (a.lambda, a.tune.unwrap_or(TuneArg::Bic)) {
        (Some(lambda), _) => {
            cfg.lambda = lambda;
            let fit = fit_simplified(&model, y, &cfg, &gamma0)?;
            ("fixed", lambda, fit.gamma, fit.n_iter, fit.converged)
        }
        (None, TuneArg::Universal) => {
            let lambdas = if cfg.leverage_weighting {
                tune::universal_lambda(pilot.sigma0, &model)?
            } else {
                DVector::from_element(
                    problem.n(),
                    pilot.sigma0 * (2.0 * (problem.n() as f64).ln()).sqrt(),
                )
            };
            let fit = fit_simplified_lambdas(&model, y, &cfg, &lambdas, &gamma0)?;
            let base = pilot.sigma0 * (2.0 * (problem.n() as f64).ln()).sqrt();
            ("universal", base, fit.gamma, fit.n_iter, fit.converged)
        }
        (None, TuneArg::Bic) => {
            let pc = path_config(rule, &a.solver, 100, 0.05, StartArg::Cold);
            let path = solution_path(&model, y, &pc, &gamma0)?;
            let report = tune::select_lambda(&path, &SelectConfig::for_n(problem.n()))?;
            let point = &path.points[report.selected_index];
            (
                "bic",
                point.lambda,
                point.gamma.clone(),
                point.n_iter,
                point.converged,
            )
        }
    };
    let beta = model.ols_coef(&(y - &gamma))?;
    let sparse = Sparse::from_dense(&gamma);
    let report = FitReport {
        schema: SCHEMA,
        command: "fit",
        dataset: &ds.name,
        n: problem.n(),
        p: problem.p(),
        intercept: problem.has_intercept(),
        rule,
        pilot: &pilot,
        tuning,
        lambda,
        selected_df: sparse.index.len(),
        beta: beta.iter().copied().collect(),
        outliers: sparse.index.clone(),
        gamma: sparse,
        n_iter,
        converged,
    };
    write_json(out, &report)?;
    Ok(if converged {
        Status::Done
    } else {
        Status::NotConverged
    })
}

fn path_config(rule: ThresholdRule, s: &SolverArgs, grid: usize, frac: f64, start: StartArg) -> PathConfig {
    let mut pc = PathConfig::new(rule);
    pc.n_grid = grid;
    pc.lambda_min_frac = frac;
    pc.epsilon = s.epsilon;
    pc.max_iter = s.max_iter;
    pc.leverage_weighting = !s.no_leverage_weighting;
    pc.start = match start {
        StartArg::Cold => PathStart::Cold,
        StartArg::Warm => PathStart::Warm,
    };
    pc
}

fn trace_path(a: &PathArgs) -> Result<(Dataset, RegressionProblem, ipod::ipod::SolutionPath)> {
    let (ds, problem) = load_problem(&a.data)?;
    let rule = a.rule.rule()?;
    let model = problem.factor()?;
    let pilot = make_pilot(&problem, &a.solver)?;
    let pc = path_config(rule, &a.solver, a.grid, a.lambda_min_frac, a.start);
    let path = solution_path(&model, problem.y(), &pc, &pilot.gamma_start(&problem))?;
    if let Some(g) = &a.gamma_out {
        let f = File::create(g).with_context(|| format!("cli: cannot create {}", g.display()))?;
        path.write_gamma_csv(BufWriter::new(f))?;
    }
    Ok((ds, problem, path))
}

fn cmd_path(a: &PathArgs, out: &mut dyn Write) -> Result<Status> {
    let (_, _, path) = trace_path(a)?;
    path.write_csv(&mut *out)?;
    Ok(Status::Done)
}

#[derive(Serialize)]
struct TuneOutput<'a> {
    schema: u32,
    command: &'static str,
    dataset: &'a str,
    rule: ThresholdRule,
    lambda_max: f64,
    report: &'a TuningReport,
    outliers: Vec<usize>,
}

fn cmd_tune(a: &PathArgs, out: &mut dyn Write) -> Result<Status> {
    let (ds, problem, path) = trace_path(a)?;
    let report = tune::select_lambda(&path, &SelectConfig::for_n(problem.n()))?;
    let gamma = &path.points[report.selected_index].gamma;
    write_json(
        out,
        &TuneOutput {
            schema: SCHEMA,
            command: "tune",
            dataset: &ds.name,
            rule: path.rule,
            lambda_max: path.lambda_max,
            outliers: Sparse::from_dense(gamma).index,
            report: &report,
        },
    )?;
    Ok(Status::Done)
}

#[derive(Serialize)]
struct SimOutput<'a> {
    schema: u32,
    command: &'static str,
    seed: u64,
    reps: usize,
    studies: &'a [sim::StudyReport],
}

fn cmd_simulate(a: &SimArgs, out: &mut dyn Write) -> Result<Status> {
    let scale: SimScale = a.scale.parse()?;
    let mut design = match &a.preset {
        Some(name) => sim::preset(name, scale)?,
        None => {
            let (Some(n), Some(p), Some(o)) = (a.n, a.p, a.outliers) else {
                bail!("cli: simulate needs --preset or all of --n, --p, --outliers");
            };
            let mut d = SimDesign::new(n, p, o, None, 5.0);
            d.intercept = true;
            d
        }
    };
    if let Some(l) = &a.leverage {
        design.leverage = match l.as_str() {
            "none" => None,
            v => Some(v.parse().with_context(|| format!("cli: bad --leverage '{v}'"))?),
        };
    }
    if let Some(s) = a.shift {
        design.shift = s;
    }
    if let Some(r) = a.rho {
        design.rho = r;
    }
    design.seed = a.seed;
    design.validate()?;
    let reps = a.reps.unwrap_or(scale.reps());
    let methods = a
        .methods
        .iter()
        .map(|m| m.parse::<Method>())
        .collect::<ipod::Result<Vec<_>>>()?;
    let studies = methods
        .iter()
        .map(|&m| sim::run_study(&design, m, reps))
        .collect::<ipod::Result<Vec<_>>>()?;
    if let Some(path) = &a.csv {
        let f = File::create(path).with_context(|| format!("cli: cannot create {}", path.display()))?;
        sim::write_study_csv(&studies, BufWriter::new(f))?;
    }
    write_json(
        out,
        &SimOutput {
            schema: SCHEMA,
            command: "simulate",
            seed: a.seed,
            reps,
            studies: &studies,
        },
    )?;
    Ok(Status::Done)
}

#[derive(Serialize)]
struct BenchOutput<'a> {
    schema: u32,
    command: &'static str,
    config: &'a BenchConfig,
    repeats: usize,
    result: &'a sim::BenchReport,
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<Status> {
    let mut cfg = BenchConfig::new(a.n, a.p.unwrap_or(a.n / 10).max(1));
    cfg.reps = a.reps;
    cfg.rule = a.rule.rule()?;
    cfg.seed = a.seed;
    cfg.lambda_floor = a.lambda_floor;
    cfg.lambda_step = a.lambda_step;
    cfg.epsilon = a.epsilon;
    let result = sim::bench_timing_median(&cfg, a.repeats)?;
    write_json(
        out,
        &BenchOutput {
            schema: SCHEMA,
            command: "bench",
            config: &cfg,
            repeats: a.repeats,
            result: &result,
        },
    )?;
    Ok(Status::Done)
}

#[derive(Serialize)]
struct HighdimOutput {
    schema: u32,
    command: &'static str,
    n: usize,
    p: usize,
    screened_predictors: Vec<usize>,
    eta_star: f64,
    eta: f64,
    lambda: f64,
    bic_star: f64,
    per_eta: Vec<highdim::GridCandidate>,
    beta: Sparse,
    gamma: Sparse,
    converged: bool,
    truth: Option<Truth>,
}

#[derive(Serialize)]
struct Truth {
    support_beta: Vec<usize>,
    support_gamma: Vec<usize>,
}

fn cmd_highdim(a: &HighdimArgs, out: &mut dyn Write) -> Result<Status> {
    let (x, y, truth) = match (&a.data, a.synthetic) {
        (Some(path), None) => {
            let yc: YColumn = a.y.parse().expect("infallible");
            let ds = data::read_csv_path(path, &yc)?;
            (ds.x, ds.y, None)
        }
        (None, Some(seed)) => {
            let sc = highdim::sparse_scenario(&SparseDesign::default(), seed)?;
            let truth = Truth {
                support_beta: one_based(&sc.support_beta),
                support_gamma: one_based(&sc.support_gamma),
            };
            (sc.x, sc.y, Some(truth))
        }
        _ => bail!("cli: highdim needs exactly one of --data or --synthetic"),
    };
    let screen = ScreenConfig {
        alpha: a.alpha,
        max_iter: a.screen_iters,
        stable_iters: if a.no_stable_stop { None } else { Some(10) },
        ..ScreenConfig::default()
    };
    let mut grid = EtaGridConfig {
        eta_factors: a.eta_factors.clone(),
        n_lambda: a.n_lambda,
        ..EtaGridConfig::default()
    };
    if let Some(ladder) = &a.eta_grid {
        grid.eta_ladder = ladder.clone();
    }
    let res = highdim::largep_pipeline(&x, &y, &screen, &grid)?;
    let converged = res.tuning.fit.converged;
    if let Some(path) = &a.csv {
        let mut f = BufWriter::new(
            File::create(path).with_context(|| format!("cli: cannot create {}", path.display()))?,
        );
        writeln!(f, "block,index,value")?;
        for (block, v) in [("beta", &res.beta), ("gamma", &res.gamma)] {
            for (i, x) in v.iter().enumerate().filter(|(_, x)| **x != 0.0) {
                writeln!(f, "{block},{},{}", i + 1, ipod::ipod::fmt17(*x))?;
            }
        }
        f.flush()?;
    }
    write_json(
        out,
        &HighdimOutput {
            schema: SCHEMA,
            command: "highdim",
            n: x.nrows(),
            p: x.ncols(),
            screened_predictors: one_based(&res.screen.predictors),
            eta_star: res.tuning.eta_star,
            eta: res.tuning.eta,
            lambda: res.tuning.lambda,
            bic_star: res.tuning.bic_star,
            per_eta: res.tuning.per_eta.clone(),
            beta: Sparse::from_dense(&res.beta),
            gamma: Sparse::from_dense(&res.gamma),
            converged,
            truth,
        },
    )?;
    Ok(if converged {
        Status::Done
    } else {
        Status::NotConverged
    })
}

fn cmd_curves(a: &CurveArgs, out: &mut dyn Write) -> Result<Status> {
    let rule = a.rule.rule()?;
    if a.points < 2 || !(a.to > a.from) {
        bail!("cli: curves needs --points ≥ 2 and --to > --from");
    }
    let step = (a.to - a.from) / (a.points - 1) as f64;
    let grid: Vec<f64> = (0..a.points).map(|k| a.from + step * k as f64).collect();
    let rows = threshold::curve_table(rule, a.lambda, &grid)?;
    threshold::write_curve_csv(&rows, &mut *out)?;
    Ok(Status::Done)
}
