//! Θ-IPOD: iterate between least squares for β and thresholding of the
//! residuals for γ.
//!
//! Both solvers minimize, for the canonical penalty P of the rule,
//!
//! ```text
//! f(β, γ) = ½‖y − Xβ − γ‖² + Σᵢ P(γᵢ; λᵢ)
//! ```
//!
//! and never increase it. Substituting the β step into the γ step gives
//! γ ← Θ(Hγ + (I − H)y; λ), so only the outlier vector needs iterating.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{IpodError, Result};
use crate::par;
use crate::pilot::PilotEstimate;
use crate::regress::{QrModel, RegressionProblem};
use crate::threshold::{penalty_unchecked, PenaltyForm, ThresholdRule, Thresholding};
use crate::tune;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IpodConfig {
    pub rule: ThresholdRule,
    pub lambda: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    /// Per-case thresholds λ√(1 − hᵢ) instead of a common λ.
    pub leverage_weighting: bool,
    /// Unit of λ; pass the pilot σ to give λ in noise units.
    pub scale: f64,
    pub trace_objective: bool,
}

impl IpodConfig {
    pub fn new(rule: ThresholdRule, lambda: f64) -> Self {
        IpodConfig {
            rule,
            lambda,
            epsilon: 1e-4,
            max_iter: 10_000,
            leverage_weighting: true,
            scale: 1.0,
            trace_objective: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rule.validate()?;
        crate::threshold::check_nonneg("lambda", self.lambda)?;
        validate_controls(self.epsilon, self.max_iter, self.scale)
    }

    /// Per-case thresholds for this configuration.
    pub fn lambdas(&self, model: &QrModel) -> DVector<f64> {
        case_lambdas(model, self.lambda * self.scale, self.leverage_weighting)
    }
}

fn validate_controls(epsilon: f64, max_iter: usize, scale: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(crate::error::domain(
            "ipod",
            format!("epsilon must be positive, got {epsilon}"),
        ));
    }
    if max_iter == 0 {
        return Err(crate::error::domain("ipod", "max_iter must be at least 1"));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(crate::error::domain(
            "ipod",
            format!("scale must be positive, got {scale}"),
        ));
    }
    Ok(())
}

/// λᵢ = λ√(1 − hᵢ), or λ for every case.
pub fn case_lambdas(model: &QrModel, lambda: f64, leverage_weighting: bool) -> DVector<f64> {
    if leverage_weighting {
        model.leverages().map(|h| lambda * (1.0 - h).max(0.0).sqrt())
    } else {
        DVector::from_element(model.n(), lambda)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IpodFit {
    #[serde(serialize_with = "crate::serde_util::serialize")]
    pub beta: DVector<f64>,
    #[serde(serialize_with = "crate::serde_util::serialize")]
    pub gamma: DVector<f64>,
    pub n_iter: usize,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
    /// 0-based indices with γᵢ ≠ 0.
    pub outliers: Vec<usize>,
}

impl IpodFit {
    pub fn df(&self) -> usize {
        self.outliers.len()
    }
}

/// Explicit two-step iteration: β ← OLS(y − γ), γ ← Θ(y − Xβ; λ).
pub fn fit_full(problem: &RegressionProblem, config: &IpodConfig, pilot: &PilotEstimate) -> Result<IpodFit> {
    config.validate()?;
    let model = problem.factor()?;
    let lambdas = config.lambdas(&model);
    let gamma0 = pilot.gamma_start(problem);
    let x = problem.x();
    let y = problem.y();
    let rule = config.rule;
    let trace = config.trace_objective;

    let mut gamma = gamma0;
    let mut beta = model.ols_unchecked(&(y - &gamma));
    let mut objective_trace = Vec::new();
    if trace {
        objective_trace.push(objective_unchecked(&model, y, rule, &gamma, &lambdas));
    }
    let mut converged = false;
    let mut n_iter = 0;
    while n_iter < config.max_iter {
        n_iter += 1;
        let resid = y - x * &beta;
        let next = threshold_vec(rule, &resid, &lambdas);
        let delta = (&next - &gamma).amax();
        gamma = next;
        beta = model.ols_unchecked(&(y - &gamma));
        if trace {
            objective_trace.push(objective_unchecked(&model, y, rule, &gamma, &lambdas));
        }
        if delta < config.epsilon {
            converged = true;
            break;
        }
    }
    Ok(finish(beta, gamma, n_iter, converged, objective_trace))
}

/// γ-only iteration γ ← Θ(Hγ + (I − H)y; λ), with β recovered at the end.
pub fn fit_simplified(
    model: &QrModel,
    y: &DVector<f64>,
    config: &IpodConfig,
    gamma0: &DVector<f64>,
) -> Result<IpodFit> {
    config.validate()?;
    let lambdas = config.lambdas(model);
    fit_simplified_lambdas(model, y, config, &lambdas, gamma0)
}

/// As [`fit_simplified`] with caller-supplied per-case thresholds;
/// `config.lambda`, `scale` and `leverage_weighting` are ignored.
pub fn fit_simplified_lambdas(
    model: &QrModel,
    y: &DVector<f64>,
    config: &IpodConfig,
    lambdas: &DVector<f64>,
    gamma0: &DVector<f64>,
) -> Result<IpodFit> {
    config.rule.validate()?;
    validate_controls(config.epsilon, config.max_iter, config.scale)?;
    let n = model.n();
    for len in [y.len(), lambdas.len(), gamma0.len()] {
        if len != n {
            return Err(IpodError::Dimension {
                context: "ipod",
                expected: n,
                found: len,
            });
        }
    }
    if let Some(&bad) = lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(IpodError::ParameterDomain {
            name: "lambda",
            value: bad,
        });
    }
    Ok(iterate(model, y, config, lambdas, gamma0.clone()))
}

fn iterate(
    model: &QrModel,
    y: &DVector<f64>,
    config: &IpodConfig,
    lambdas: &DVector<f64>,
    mut gamma: DVector<f64>,
) -> IpodFit {
    let rule = config.rule;
    let resid_y = y - model.hat_unchecked(y);
    let mut objective_trace = Vec::new();
    if config.trace_objective {
        objective_trace.push(objective_unchecked(model, y, rule, &gamma, lambdas));
    }
    let mut converged = false;
    let mut n_iter = 0;
    let mut arg = DVector::zeros(model.n());
    while n_iter < config.max_iter {
        n_iter += 1;
        arg.copy_from(&resid_y);
        arg += model.hat_unchecked(&gamma);
        let mut delta = 0.0f64;
        for i in 0..gamma.len() {
            let g = rule.threshold(arg[i], lambdas[i]);
            delta = delta.max((g - gamma[i]).abs());
            gamma[i] = g;
        }
        if config.trace_objective {
            objective_trace.push(objective_unchecked(model, y, rule, &gamma, lambdas));
        }
        if delta < config.epsilon {
            converged = true;
            break;
        }
    }
    let beta = model.ols_unchecked(&(y - &gamma));
    finish(beta, gamma, n_iter, converged, objective_trace)
}

fn finish(
    beta: DVector<f64>,
    gamma: DVector<f64>,
    n_iter: usize,
    converged: bool,
    objective_trace: Vec<f64>,
) -> IpodFit {
    let outliers = nonzero(&gamma);
    IpodFit {
        beta,
        gamma,
        n_iter,
        converged,
        objective_trace,
        outliers,
    }
}

pub(crate) fn nonzero(v: &DVector<f64>) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, g)| **g != 0.0)
        .map(|(i, _)| i)
        .collect()
}

fn threshold_vec(rule: ThresholdRule, t: &DVector<f64>, lambdas: &DVector<f64>) -> DVector<f64> {
    t.zip_map(lambdas, |ti, li| rule.threshold(ti, li))
}

/// f(β, γ) = ½‖y − Xβ − γ‖² + Σ P(γᵢ; λᵢ) with the canonical penalty.
pub fn objective(
    problem: &RegressionProblem,
    rule: ThresholdRule,
    beta: &DVector<f64>,
    gamma: &DVector<f64>,
    lambdas: &DVector<f64>,
) -> Result<f64> {
    rule.validate()?;
    let n = problem.n();
    if gamma.len() != n || lambdas.len() != n || beta.len() != problem.p() {
        return Err(IpodError::Dimension {
            context: "ipod",
            expected: n,
            found: gamma.len(),
        });
    }
    let resid = problem.y() - problem.x() * beta - gamma;
    Ok(0.5 * resid.norm_squared() + penalty_sum(rule, gamma, lambdas))
}

/// Objective at β = OLS(y − γ), i.e. with β profiled out.
fn objective_unchecked(
    model: &QrModel,
    y: &DVector<f64>,
    rule: ThresholdRule,
    gamma: &DVector<f64>,
    lambdas: &DVector<f64>,
) -> f64 {
    let v = y - gamma;
    let resid = &v - model.hat_unchecked(&v);
    0.5 * resid.norm_squared() + penalty_sum(rule, gamma, lambdas)
}

fn penalty_sum(rule: ThresholdRule, gamma: &DVector<f64>, lambdas: &DVector<f64>) -> f64 {
    let form = PenaltyForm::canonical(rule);
    gamma
        .iter()
        .zip(lambdas.iter())
        .map(|(&g, &l)| penalty_unchecked(form, g, l))
        .sum()
}

/// Largest leverage-standardized OLS residual max |(I − H)y|ᵢ / √(1 − hᵢ)
/// (plain max |(I − H)y|ᵢ without leverage weighting). Above this every
/// case stays below its threshold at γ = 0.
pub fn lambda_max(model: &QrModel, y: &DVector<f64>, leverage_weighting: bool) -> Result<f64> {
    let r = model.residual_apply(y)?;
    let h = model.leverages();
    Ok(r.iter()
        .zip(h.iter())
        .map(|(ri, hi)| {
            if !leverage_weighting {
                ri.abs()
            } else if *hi < 1.0 {
                ri.abs() / (1.0 - hi).sqrt()
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max))
}

/// How each point of a path is initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStart {
    /// Every λ starts from the supplied γ⁰; points are independent.
    Cold,
    /// Each λ starts from the previous solution, the first from γ⁰.
    Warm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub rule: ThresholdRule,
    pub n_grid: usize,
    /// Smallest λ as a fraction of λ_max.
    pub lambda_min_frac: f64,
    /// Explicit descending grid (in units of `scale`); overrides the
    /// geometric grid.
    pub grid: Option<Vec<f64>>,
    pub start: PathStart,
    pub epsilon: f64,
    pub max_iter: usize,
    pub leverage_weighting: bool,
    pub scale: f64,
}

impl PathConfig {
    pub fn new(rule: ThresholdRule) -> Self {
        PathConfig {
            rule,
            n_grid: 100,
            lambda_min_frac: 0.05,
            grid: None,
            start: PathStart::Cold,
            epsilon: 1e-4,
            max_iter: 10_000,
            leverage_weighting: true,
            scale: 1.0,
        }
    }

    fn fit_config(&self, lambda: f64) -> IpodConfig {
        IpodConfig {
            rule: self.rule,
            lambda,
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            leverage_weighting: self.leverage_weighting,
            scale: self.scale,
            trace_objective: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PathPoint {
    pub lambda: f64,
    pub df: usize,
    pub rss: f64,
    /// None when the fit is saturated (zero residual sum of squares).
    pub bic_star: Option<f64>,
    pub converged: bool,
    pub n_iter: usize,
    #[serde(skip)]
    pub gamma: DVector<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionPath {
    pub rule: ThresholdRule,
    pub start: PathStart,
    /// In units of `scale`.
    pub lambda_max: f64,
    pub scale: f64,
    pub leverage_weighting: bool,
    pub n: usize,
    pub p: usize,
    pub points: Vec<PathPoint>,
}

/// Fits the rule over a descending λ grid and records DF = |{i : γᵢ ≠ 0}|,
/// the reduced-model RSS and BIC* at every point.
pub fn solution_path(
    model: &QrModel,
    y: &DVector<f64>,
    cfg: &PathConfig,
    gamma0: &DVector<f64>,
) -> Result<SolutionPath> {
    cfg.rule.validate()?;
    validate_controls(cfg.epsilon, cfg.max_iter, cfg.scale)?;
    if gamma0.len() != model.n() {
        return Err(IpodError::Dimension {
            context: "ipod",
            expected: model.n(),
            found: gamma0.len(),
        });
    }
    let lmax = lambda_max(model, y, cfg.leverage_weighting)? / cfg.scale;
    let grid = match &cfg.grid {
        Some(g) => {
            if g.is_empty() {
                return Err(crate::error::domain("ipod", "explicit λ grid is empty"));
            }
            for &l in g {
                crate::threshold::check_nonneg("lambda", l)?;
            }
            g.clone()
        }
        None => geometric_grid(lmax * (1.0 + 1e-12), lmax * cfg.lambda_min_frac, cfg.n_grid)?,
    };

    let point = |lambda: f64, start: &DVector<f64>| -> PathPoint {
        let fc = cfg.fit_config(lambda);
        let lambdas = fc.lambdas(model);
        let fit = iterate(model, y, &fc, &lambdas, start.clone());
        let v = y - &fit.gamma;
        let rss = (&v - model.hat_unchecked(&v)).norm_squared();
        let df = fit.df();
        PathPoint {
            lambda,
            df,
            rss,
            bic_star: tune::bic_star_value(model.n(), model.p(), rss, df),
            converged: fit.converged,
            n_iter: fit.n_iter,
            gamma: fit.gamma,
        }
    };

    let points = match cfg.start {
        PathStart::Cold => par::map_indices(grid.len(), |k| point(grid[k], gamma0)),
        PathStart::Warm => {
            let mut out: Vec<PathPoint> = Vec::with_capacity(grid.len());
            for &lambda in &grid {
                let start = out.last().map(|p| &p.gamma).unwrap_or(gamma0);
                let next = point(lambda, start);
                out.push(next);
            }
            out
        }
    };
    Ok(SolutionPath {
        rule: cfg.rule,
        start: cfg.start,
        lambda_max: lmax,
        scale: cfg.scale,
        leverage_weighting: cfg.leverage_weighting,
        n: model.n(),
        p: model.p(),
        points,
    })
}

/// `n` points spaced evenly in log scale from `hi` down to `lo`.
pub fn geometric_grid(hi: f64, lo: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(crate::error::domain(
            "ipod",
            format!("grid needs at least 2 points, got {n}"),
        ));
    }
    if !(hi > 0.0 && lo > 0.0 && lo <= hi) {
        return Err(crate::error::domain(
            "ipod",
            format!("geometric grid needs 0 < lo <= hi, got lo = {lo}, hi = {hi}"),
        ));
    }
    let ratio = (lo / hi).ln() / (n - 1) as f64;
    Ok((0..n)
        .map(|k| {
            if k + 1 == n {
                lo
            } else {
                hi * (ratio * k as f64).exp()
            }
        })
        .collect())
}

impl SolutionPath {
    /// Writes `lambda,df,rss,bic_star,converged,n_iter`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lambda", "df", "rss", "bic_star", "converged", "n_iter"])?;
        for p in &self.points {
            w.write_record([
                fmt17(p.lambda),
                p.df.to_string(),
                fmt17(p.rss),
                p.bic_star.map(fmt17).unwrap_or_default(),
                p.converged.to_string(),
                p.n_iter.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// One row per case (`case` is 1-based), one column per grid point.
    pub fn write_gamma_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["case".to_string()];
        header.extend((0..self.points.len()).map(|k| format!("lambda_{k}")));
        w.write_record(&header)?;
        for i in 0..self.n {
            let mut row = vec![(i + 1).to_string()];
            row.extend(self.points.iter().map(|p| fmt17(p.gamma[i])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt17(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return v.to_string();
    }
    let s = format!("{v:.16e}");
    let back: f64 = s.parse().expect("formatted float parses");
    debug_assert_eq!(back, v);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use crate::pilot::{self, LtsConfig};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_problem(seed: u64, n: usize, p: usize, n_out: usize) -> RegressionProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal));
        let mut y = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        for i in 0..n_out {
            y[i] += 6.0;
        }
        RegressionProblem::new(x, y, true).unwrap()
    }

    const RULES: [ThresholdRule; 3] = [
        ThresholdRule::Soft,
        ThresholdRule::Hard,
        ThresholdRule::HardRidge { eta: 0.5 },
    ];

    #[test]
    fn zero_lambda_interpolates() {
        let prob = random_problem(1, 30, 2, 3);
        let model = prob.factor().unwrap();
        let g0 = DVector::zeros(30);
        for rule in [ThresholdRule::Soft, ThresholdRule::Hard] {
            let fit = fit_simplified(&model, prob.y(), &IpodConfig::new(rule, 0.0), &g0).unwrap();
            let resid = prob.y() - prob.x() * &fit.beta - &fit.gamma;
            assert!(resid.amax() < 1e-10);
            assert!(fit.converged && fit.n_iter <= 2);
        }
    }

    #[test]
    fn huge_lambda_is_ols() {
        let prob = random_problem(2, 30, 2, 3);
        let model = prob.factor().unwrap();
        let g0 = prob.y().clone();
        for rule in RULES {
            let fit = fit_simplified(&model, prob.y(), &IpodConfig::new(rule, 1e9), &g0).unwrap();
            assert!(fit.outliers.is_empty());
            let ols = model.ols_coef(prob.y()).unwrap();
            assert!((fit.beta - ols).amax() < 1e-10);
        }
    }

    #[test]
    fn full_and_simplified_agree() {
        for seed in 0..20 {
            let prob = random_problem(seed, 40, 3, 4);
            let model = prob.factor().unwrap();
            let est = PilotEstimate::user(DVector::zeros(4), 1.0).unwrap();
            for rule in RULES {
                let cfg = IpodConfig::new(rule, 2.0);
                let full = fit_full(&prob, &cfg, &est).unwrap();
                let simp = fit_simplified(&model, prob.y(), &cfg, &est.gamma_start(&prob)).unwrap();
                assert!((full.gamma - &simp.gamma).amax() <= 10.0 * cfg.epsilon);
            }
        }
    }

    #[test]
    fn fixed_point_and_descent() {
        for seed in 0..30 {
            let prob = random_problem(100 + seed, 35, 2, 5);
            let model = prob.factor().unwrap();
            for rule in RULES {
                let cfg = IpodConfig::new(rule, 1.5);
                let fit = fit_simplified(&model, prob.y(), &cfg, &DVector::zeros(35)).unwrap();
                for w in fit.objective_trace.windows(2) {
                    assert!(w[1] <= w[0] + 1e-10 * (1.0 + w[0].abs()));
                }
                let lambdas = cfg.lambdas(&model);
                let arg = model.hat_apply(&fit.gamma).unwrap() + model.residual_apply(prob.y()).unwrap();
                let again = threshold_vec(rule, &arg, &lambdas);
                assert!((again - &fit.gamma).amax() <= cfg.epsilon);
                let refit = model.ols_coef(&(prob.y() - &fit.gamma)).unwrap();
                assert!((refit - &fit.beta).amax() <= 1e-10);
            }
        }
    }

    #[test]
    fn objective_examples() {
        let prob = random_problem(3, 20, 2, 0);
        let beta = DVector::from_vec(vec![0.3, -1.0, 2.0]);
        let lam = DVector::from_element(20, 0.7);
        let zero = DVector::zeros(20);
        let f = objective(&prob, ThresholdRule::Hard, &beta, &zero, &lam).unwrap();
        assert!((f - 0.5 * (prob.y() - prob.x() * &beta).norm_squared()).abs() < 1e-12);
        let b0 = DVector::zeros(3);
        let f = objective(&prob, ThresholdRule::Soft, &b0, prob.y(), &lam).unwrap();
        assert!((f - 0.7 * prob.y().abs().sum()).abs() < 1e-12);
    }

    #[test]
    fn hbk_soft_universal() {
        let prob = data::hbk().problem(true).unwrap();
        let model = prob.factor().unwrap();
        let est = pilot::lts_lite(&prob, &LtsConfig::default(), 1).unwrap();
        let lambdas = tune::universal_lambda(est.sigma0, &model).unwrap();
        let cfg = IpodConfig::new(ThresholdRule::Soft, 0.0);
        let fit = fit_simplified_lambdas(&model, prob.y(), &cfg, &lambdas, &est.gamma_start(&prob)).unwrap();
        assert_eq!(fit.outliers, vec![10, 11, 12, 13]);
    }

    #[test]
    fn hbk_hard_path_shape() {
        let prob = data::hbk().problem(true).unwrap();
        let model = prob.factor().unwrap();
        let est = pilot::lts_lite(&prob, &LtsConfig::default(), 1).unwrap();
        let path = solution_path(
            &model,
            prob.y(),
            &PathConfig::new(ThresholdRule::Hard),
            &est.gamma_start(&prob),
        )
        .unwrap();
        assert_eq!(path.points.len(), 100);
        assert_eq!(path.points[0].df, 0);
        assert!(path.points.iter().any(|p| p.df == 10));
        // Monotone from λ_max down to the first point with the ten outliers.
        let stop = path.points.iter().position(|p| p.df == 10).unwrap();
        for w in path.points[..=stop].windows(2) {
            assert!(w[1].df >= w[0].df);
        }
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("lambda,df,rss,bic_star,converged,n_iter\n"));
        assert_eq!(text.lines().count(), 101);
    }

    #[test]
    fn warm_path_starts_empty() {
        let prob = random_problem(4, 50, 2, 5);
        let model = prob.factor().unwrap();
        let mut cfg = PathConfig::new(ThresholdRule::Hard);
        cfg.start = PathStart::Warm;
        cfg.n_grid = 20;
        let path = solution_path(&model, prob.y(), &cfg, &DVector::zeros(50)).unwrap();
        assert_eq!(path.points[0].df, 0);
        assert_eq!(path.start, PathStart::Warm);
    }

    #[test]
    fn grid_shape() {
        let g = geometric_grid(10.0, 0.5, 5).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 10.0);
        assert_eq!(g[4], 0.5);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        assert!(geometric_grid(1.0, 2.0, 5).is_err());
        assert!(geometric_grid(1.0, 0.5, 1).is_err());
    }

    #[test]
    fn fmt17_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, 0.0] {
            assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn bad_config_rejected() {
        let prob = random_problem(5, 20, 1, 0);
        let model = prob.factor().unwrap();
        let mut cfg = IpodConfig::new(ThresholdRule::Hard, 1.0);
        cfg.epsilon = 0.0;
        assert!(fit_simplified(&model, prob.y(), &cfg, &DVector::zeros(20)).is_err());
        let cfg = IpodConfig::new(ThresholdRule::Hard, -1.0);
        assert!(fit_simplified(&model, prob.y(), &cfg, &DVector::zeros(20)).is_err());
        let cfg = IpodConfig::new(ThresholdRule::Hard, 1.0);
        assert!(fit_simplified(&model, prob.y(), &cfg, &DVector::zeros(19)).is_err());
    }
}
