//! Simulation designs with leveraged mean-shift outliers, detection
//! metrics, and the Θ-IPOD vs IRLS timing benchmark.

use std::str::FromStr;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{IpodError, Result};
use crate::ipod::{fit_simplified_lambdas, lambda_max, solution_path, IpodConfig, PathConfig};
use crate::mest::{irls_fit_lambdas, IrlsConfig};
use crate::par;
use crate::pilot::{self, LtsConfig};
use crate::regress::RegressionProblem;
use crate::threshold::ThresholdRule;
use crate::tune::{self, SelectConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimDesign {
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    /// Number of outliers, placed on rows 0..n_out.
    pub n_out: usize,
    /// Rows 0..n_out of X are set to L·1 when present.
    pub leverage: Option<f64>,
    pub shift: f64,
    pub sigma: f64,
    /// Fit with an intercept column.
    pub intercept: bool,
    pub seed: u64,
}

impl SimDesign {
    pub fn new(n: usize, p: usize, n_out: usize, leverage: Option<f64>, shift: f64) -> Self {
        SimDesign {
            n,
            p,
            rho: 0.5,
            n_out,
            leverage,
            shift,
            sigma: 1.0,
            intercept: false,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_out >= self.n || self.p >= self.n || self.p == 0 {
            return Err(crate::error::domain(
                "sim",
                format!(
                    "need 0 < p < n and O < n, got n={} p={} O={}",
                    self.n, self.p, self.n_out
                ),
            ));
        }
        let lo = if self.p > 1 {
            -1.0 / (self.p as f64 - 1.0)
        } else {
            -1.0
        };
        if !(self.rho > lo && self.rho < 1.0) {
            return Err(IpodError::ParameterDomain {
                name: "rho",
                value: self.rho,
            });
        }
        for (name, v) in [("shift", self.shift), ("leverage", self.leverage.unwrap_or(0.0))] {
            if !v.is_finite() {
                return Err(IpodError::ParameterDomain { name, value: v });
            }
        }
        crate::threshold::check_nonneg("sigma", self.sigma)
    }

    /// Indices of the shifted cases.
    pub fn truth(&self) -> Vec<usize> {
        (0..self.n_out).collect()
    }
}

/// Named presets: `table1-L15-O50` (p = 15), `table2-Lnone-O20` (p = 50).
/// Desk scale uses n = 500, full scale n = 1000. Shift 5, with intercept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimScale {
    Desk,
    Full,
}

impl SimScale {
    pub fn n(self) -> usize {
        match self {
            SimScale::Desk => 500,
            SimScale::Full => 1000,
        }
    }

    pub fn reps(self) -> usize {
        match self {
            SimScale::Desk => 20,
            SimScale::Full => 100,
        }
    }
}

impl FromStr for SimScale {
    type Err = IpodError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(SimScale::Desk),
            "full" => Ok(SimScale::Full),
            _ => Err(crate::error::domain(
                "sim",
                format!("unknown scale '{s}' (desk, full)"),
            )),
        }
    }
}

pub fn preset(name: &str, scale: SimScale) -> Result<SimDesign> {
    let bad = || {
        crate::error::domain(
            "sim",
            format!("unknown preset '{name}', expected e.g. table1-L15-O50"),
        )
    };
    let parts: Vec<&str> = name.split('-').collect();
    let [table, lev, out] = parts.as_slice() else {
        return Err(bad());
    };
    let p = match *table {
        "table1" => 15,
        "table2" => 50,
        _ => return Err(bad()),
    };
    let leverage = match lev.strip_prefix('L').ok_or_else(bad)? {
        "none" => None,
        v => Some(v.parse::<f64>().map_err(|_| bad())?),
    };
    let n_out = out
        .strip_prefix('O')
        .and_then(|v| v.parse::<usize>().ok())
        .ok_or_else(bad)?;
    let mut d = SimDesign::new(scale.n(), p, n_out, leverage, 5.0);
    d.intercept = true;
    d.validate()?;
    Ok(d)
}

/// X = UΣ^{1/2} with Uᵢⱼ ~ U(−15, 15) and Σ = (1 − ρ)I + ρ11ᵀ; rows
/// 0..O replaced by L·1 when a leverage value is set.
pub fn gen_design(design: &SimDesign) -> Result<DMatrix<f64>> {
    design.validate()?;
    let (n, p, rho) = (design.n, design.p, design.rho);
    // Σ^{1/2} = aI + b11ᵀ.
    let a = (1.0 - rho).sqrt();
    let b = ((1.0 - rho + rho * p as f64).sqrt() - a) / p as f64;
    let mut rng = par::stream_rng(design.seed, 0);
    let unif = Uniform::new(-15.0, 15.0).expect("valid bounds");
    let mut x = DMatrix::zeros(n, p);
    let mut u = vec![0.0; p];
    for i in 0..n {
        u.iter_mut().for_each(|v| *v = rng.sample(unif));
        let s: f64 = u.iter().sum();
        for j in 0..p {
            x[(i, j)] = a * u[j] + b * s;
        }
    }
    if let Some(l) = design.leverage {
        for i in 0..design.n_out {
            x.row_mut(i).fill(l);
        }
    }
    Ok(x)
}

/// y = γ + σε with γ = (c^O, 0^{n−O}); the true β is zero.
pub fn gen_response(design: &SimDesign) -> Result<DVector<f64>> {
    design.validate()?;
    let mut rng = par::stream_rng(design.seed, 1);
    Ok(DVector::from_fn(design.n, |i, _| {
        let g = if i < design.n_out { design.shift } else { 0.0 };
        g + design.sigma * rng.sample::<f64, _>(StandardNormal)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateScore {
    pub masking: f64,
    pub swamping: f64,
    pub all_detected: bool,
}

/// Masking |truth \ flagged|/|truth| and swamping
/// |flagged \ truth|/(n − |truth|) for one replicate (0-based indices).
pub fn score_detection(flagged: &[usize], truth: &[usize], n: usize) -> Result<ReplicateScore> {
    if truth.is_empty() {
        return Err(crate::error::domain(
            "sim",
            "masking is undefined without true outliers",
        ));
    }
    if let Some(&i) = flagged.iter().chain(truth).find(|&&i| i >= n) {
        return Err(crate::error::domain(
            "sim",
            format!("index {i} out of range for n = {n}"),
        ));
    }
    let mut is_true = vec![false; n];
    truth.iter().for_each(|&i| is_true[i] = true);
    let mut is_flagged = vec![false; n];
    flagged.iter().for_each(|&i| is_flagged[i] = true);
    let n_true = is_true.iter().filter(|&&t| t).count();
    let masked = (0..n).filter(|&i| is_true[i] && !is_flagged[i]).count();
    let swamped = (0..n).filter(|&i| !is_true[i] && is_flagged[i]).count();
    let clean = n - n_true;
    Ok(ReplicateScore {
        masking: masked as f64 / n_true as f64,
        swamping: if clean == 0 {
            0.0
        } else {
            swamped as f64 / clean as f64
        },
        all_detected: masked == 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Hard rule, LTS-lite pilot, local-BIC tuning.
    HardTuned,
    /// Soft rule, LTS-lite pilot, local-BIC tuning.
    SoftTuned,
    /// Soft rule at λᵢ = σ̂√(2(1 − hᵢ) log n).
    SoftUniversal,
    /// Flags exactly the true outliers; β̂ is OLS on the clean cases.
    Oracle,
}

impl FromStr for Method {
    type Err = IpodError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hard_tuned" | "hard" => Ok(Method::HardTuned),
            "soft_tuned" | "soft" => Ok(Method::SoftTuned),
            "soft_universal" => Ok(Method::SoftUniversal),
            "oracle" => Ok(Method::Oracle),
            _ => Err(crate::error::domain(
                "sim",
                format!("unknown method '{s}' (hard_tuned, soft_tuned, soft_universal, oracle)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub masking: f64,
    pub swamping: f64,
    pub joint_detection: f64,
    /// Replicates scored.
    pub reps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub design: SimDesign,
    pub method: Method,
    pub metrics: DetectionMetrics,
    /// Mean ‖β̂ − β‖² over slope coefficients (intercept excluded).
    pub beta_mse: f64,
    /// Replicates whose fit returned an error.
    pub failures: usize,
    pub failure_messages: Vec<String>,
    pub replicates: Vec<ReplicateScore>,
}

/// Flagged cases and β̂ for one replicate.
pub fn fit_replicate(
    problem: &RegressionProblem,
    method: Method,
    truth: &[usize],
    seed: u64,
) -> Result<(Vec<usize>, DVector<f64>)> {
    let model = problem.factor()?;
    let y = problem.y();
    let tuned = |rule: ThresholdRule| -> Result<(Vec<usize>, DVector<f64>)> {
        let start = pilot::lts_lite(problem, &LtsConfig::default(), seed)?;
        let path = solution_path(&model, y, &PathConfig::new(rule), &start.gamma_start(problem))?;
        let report = tune::select_lambda(&path, &SelectConfig::for_n(problem.n()))?;
        let gamma = &path.points[report.selected_index].gamma;
        Ok((crate::ipod::nonzero(gamma), model.ols_coef(&(y - gamma))?))
    };
    match method {
        Method::HardTuned => tuned(ThresholdRule::Hard),
        Method::SoftTuned => tuned(ThresholdRule::Soft),
        Method::SoftUniversal => {
            let start = pilot::lts_lite(problem, &LtsConfig::default(), seed)?;
            let lambdas = tune::universal_lambda(start.sigma0, &model)?;
            let fit = fit_simplified_lambdas(
                &model,
                y,
                &IpodConfig::new(ThresholdRule::Soft, 0.0),
                &lambdas,
                &start.gamma_start(problem),
            )?;
            Ok((fit.outliers, fit.beta))
        }
        Method::Oracle => {
            let keep: Vec<usize> = (0..problem.n()).filter(|i| !truth.contains(i)).collect();
            let clean = problem.x().select_rows(&keep);
            let yc = DVector::from_iterator(keep.len(), keep.iter().map(|&i| y[i]));
            let beta = crate::regress::QrModel::new(&clean)?.ols_coef(&yc)?;
            Ok((truth.to_vec(), beta))
        }
    }
}

/// Design for replicate `rep` under `master`.
pub fn replicate_design(design: &SimDesign, master: u64, rep: usize) -> SimDesign {
    SimDesign {
        seed: par::splitmix64(par::splitmix64(master) ^ rep as u64),
        ..*design
    }
}

/// Runs `reps` independent replicates in parallel. Results depend only on
/// `design.seed`, never on scheduling.
pub fn run_study(design: &SimDesign, method: Method, reps: usize) -> Result<StudyReport> {
    design.validate()?;
    if reps == 0 {
        return Err(crate::error::domain("sim", "reps must be at least 1"));
    }
    if design.n_out == 0 {
        return Err(crate::error::domain(
            "sim",
            "detection metrics need at least one outlier",
        ));
    }
    let truth = design.truth();
    let results: Vec<Result<(ReplicateScore, f64)>> = par::map_indices(reps, |r| {
        let d = replicate_design(design, design.seed, r);
        let problem = RegressionProblem::new(gen_design(&d)?, gen_response(&d)?, d.intercept)?;
        let (flagged, beta) = fit_replicate(&problem, method, &truth, d.seed)?;
        let score = score_detection(&flagged, &truth, d.n)?;
        let offset = usize::from(d.intercept);
        let err = beta.rows(offset, d.p).norm_squared();
        Ok((score, err))
    });
    let mut replicates = Vec::with_capacity(reps);
    let mut failure_messages = Vec::new();
    let mut err_sum = 0.0;
    for res in results {
        match res {
            Ok((score, err)) => {
                replicates.push(score);
                err_sum += err;
            }
            Err(e) => failure_messages.push(e.to_string()),
        }
    }
    let k = replicates.len();
    let mean = |f: &dyn Fn(&ReplicateScore) -> f64| {
        if k == 0 {
            f64::NAN
        } else {
            replicates.iter().map(f).sum::<f64>() / k as f64
        }
    };
    let metrics = DetectionMetrics {
        masking: mean(&|s| s.masking),
        swamping: mean(&|s| s.swamping),
        joint_detection: mean(&|s| f64::from(u8::from(s.all_detected))),
        reps: k,
    };
    Ok(StudyReport {
        design: *design,
        method,
        metrics,
        beta_mse: if k == 0 { f64::NAN } else { err_sum / k as f64 },
        failures: failure_messages.len(),
        failure_messages,
        replicates,
    })
}

/// Plot-ready CSV rows: `method,n,p,L,O,M,S,JD,beta_mse,reps,failures`.
pub fn write_study_csv<W: std::io::Write>(reports: &[StudyReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "method", "n", "p", "L", "O", "M", "S", "JD", "beta_mse", "reps", "failures",
    ])?;
    for r in reports {
        let method = serde_json_name(r.method);
        let lev = r.design.leverage.map_or("none".to_string(), |l| l.to_string());
        w.write_record([
            method.as_str(),
            &r.design.n.to_string(),
            &r.design.p.to_string(),
            &lev,
            &r.design.n_out.to_string(),
            &crate::ipod::fmt17(r.metrics.masking),
            &crate::ipod::fmt17(r.metrics.swamping),
            &crate::ipod::fmt17(r.metrics.joint_detection),
            &crate::ipod::fmt17(r.beta_mse),
            &r.metrics.reps.to_string(),
            &r.failures.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn serde_json_name(m: Method) -> String {
    match m {
        Method::HardTuned => "hard_tuned",
        Method::SoftTuned => "soft_tuned",
        Method::SoftUniversal => "soft_universal",
        Method::Oracle => "oracle",
    }
    .to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub n: usize,
    pub p: usize,
    pub rule: ThresholdRule,
    /// (O, L) combinations; defaults to the nine leveraged cases plus three
    /// unleveraged ones.
    pub combos: Vec<(usize, Option<f64>)>,
    pub reps: usize,
    pub lambda_floor: f64,
    pub lambda_step: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    pub shift: f64,
    pub seed: u64,
}

impl BenchConfig {
    pub fn new(n: usize, p: usize) -> Self {
        let mut combos = Vec::new();
        for l in [15.0, 20.0, 30.0] {
            for o in [5, 10, 20] {
                combos.push((o, Some(l)));
            }
        }
        for o in [5, 10, 20] {
            combos.push((o, None));
        }
        BenchConfig {
            n,
            p,
            rule: ThresholdRule::Hard,
            combos,
            reps: 10,
            lambda_floor: 0.5,
            lambda_step: 0.1,
            epsilon: 1e-4,
            max_iter: 10_000,
            shift: 8.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MethodTiming {
    pub seconds: f64,
    pub iterations: usize,
    pub fits: usize,
    pub nonconverged: usize,
    /// IRLS only: fits abandoned because the weighted design was singular.
    pub singular_wls: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub n: usize,
    pub p: usize,
    pub ipod: MethodTiming,
    pub irls: MethodTiming,
    /// IRLS seconds over Θ-IPOD seconds.
    pub speedup: f64,
    /// Θ-IPOD iterations over IRLS iterations, on λ values both solved.
    pub iteration_ratio: f64,
}

/// λ ladder from λ_max down to `floor` in steps of `step`.
pub fn lambda_ladder(lmax: f64, floor: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && floor >= 0.0 && lmax.is_finite()) {
        return Err(crate::error::domain(
            "sim",
            "ladder needs step > 0, floor ≥ 0, finite λ_max",
        ));
    }
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let l = lmax - step * k as f64;
        if l < floor - 1e-12 {
            break;
        }
        out.push(l);
        k += 1;
    }
    Ok(out)
}

/// One measured pass: for every (O, L) combination and replicate, both
/// methods trace the same λ ladder with warm starts, fixed σ = 1 and a
/// common threshold λ for every case. IRLS singular-WLS failures are
/// counted; the ladder then continues from the last good β.
pub fn bench_timing(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.rule.validate()?;
    if cfg.reps == 0 || cfg.combos.is_empty() {
        return Err(crate::error::domain(
            "sim",
            "bench needs at least one combination and replicate",
        ));
    }
    let mut ipod = MethodTiming::default();
    let mut irls = MethodTiming::default();
    let mut paired_ipod_iter = 0usize;
    let mut paired_irls_iter = 0usize;
    for (c, &(n_out, leverage)) in cfg.combos.iter().enumerate() {
        let base = SimDesign {
            seed: par::splitmix64(cfg.seed ^ c as u64),
            ..SimDesign::new(cfg.n, cfg.p, n_out, leverage, cfg.shift)
        };
        for r in 0..cfg.reps {
            let d = replicate_design(&base, base.seed, r);
            let problem = RegressionProblem::new(gen_design(&d)?, gen_response(&d)?, false)?;
            let model = problem.factor()?;
            let y = problem.y();
            let ladder = lambda_ladder(lambda_max(&model, y, true)?, cfg.lambda_floor, cfg.lambda_step)?;
            let n = problem.n();

            let mut ipod_iters = Vec::with_capacity(ladder.len());
            let started = Instant::now();
            let mut gamma = DVector::zeros(n);
            for &lambda in &ladder {
                let mut fc = IpodConfig::new(cfg.rule, lambda);
                fc.epsilon = cfg.epsilon;
                fc.max_iter = cfg.max_iter;
                fc.trace_objective = false;
                let lambdas = DVector::from_element(n, lambda);
                let fit = fit_simplified_lambdas(&model, y, &fc, &lambdas, &gamma)?;
                ipod_iters.push(fit.n_iter);
                ipod.nonconverged += usize::from(!fit.converged);
                gamma = fit.gamma;
            }
            ipod.seconds += started.elapsed().as_secs_f64();
            ipod.fits += ladder.len();
            ipod.iterations += ipod_iters.iter().sum::<usize>();

            let started = Instant::now();
            let mut beta = model.ols_coef(y)?;
            let mut irls_time = Duration::ZERO;
            for (k, &lambda) in ladder.iter().enumerate() {
                let ic = IrlsConfig {
                    rule: cfg.rule,
                    lambda,
                    sigma: 1.0,
                    epsilon: cfg.epsilon,
                    max_iter: cfg.max_iter,
                    leverage_weighting: false,
                };
                let lambdas = DVector::from_element(n, lambda);
                irls.fits += 1;
                match irls_fit_lambdas(&problem, &ic, &lambdas, &beta) {
                    Ok(fit) => {
                        irls.iterations += fit.n_iter;
                        irls.nonconverged += usize::from(!fit.converged);
                        paired_irls_iter += fit.n_iter;
                        paired_ipod_iter += ipod_iters[k];
                        beta = fit.beta;
                    }
                    Err(IpodError::SingularWls { .. }) => irls.singular_wls += 1,
                    Err(e) => return Err(e),
                }
            }
            irls_time += started.elapsed();
            irls.seconds += irls_time.as_secs_f64();
        }
    }
    Ok(BenchReport {
        n: cfg.n,
        p: cfg.p,
        ipod,
        irls,
        speedup: irls.seconds / ipod.seconds,
        iteration_ratio: paired_ipod_iter as f64 / paired_irls_iter.max(1) as f64,
    })
}

/// Discards one warm-up pass, then reports the pass with the median
/// speedup among `repeats` measured passes.
pub fn bench_timing_median(cfg: &BenchConfig, repeats: usize) -> Result<BenchReport> {
    if repeats == 0 {
        return Err(crate::error::domain("sim", "repeats must be at least 1"));
    }
    bench_timing(cfg)?;
    let mut runs = (0..repeats)
        .map(|_| bench_timing(cfg))
        .collect::<Result<Vec<_>>>()?;
    runs.sort_by(|a, b| a.speedup.total_cmp(&b.speedup));
    Ok(runs.swap_remove(repeats / 2))
}
