//! Θ-IPOD when p may exceed n: β and γ are both sparse and are estimated
//! together on the augmented design B = [X I].
//!
//! With k₀ ≥ √(‖X‖₂² + 1) and r = y − Xβ − γ, one sweep is
//!
//! ```text
//! β ← Θ(β + Xᵀr/k₀²; λ/k₀²)
//! γ ← Θ(γ + r/k₀²;  λ/k₀²)
//! ```
//!
//! which never increases ½‖y − Bξ‖² + k₀² Σ P(ξⱼ; λ/k₀²).

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{IpodError, Result};
use crate::ipod::{geometric_grid, nonzero};
use crate::par;
use crate::threshold::{penalty_unchecked, PenaltyForm, ThresholdRule, Thresholding};
use crate::tune::{bic_star_value, CurvePoint};

/// Upper bound on √(‖X‖₂² + 1).
///
/// ‖X‖₂ is estimated by power iteration on XᵀX and inflated by 1%; if the
/// iteration has not settled the Frobenius norm is used instead.
pub fn spectral_bound(x: &DMatrix<f64>) -> Result<f64> {
    let fro = x.norm();
    if fro == 0.0 || !fro.is_finite() {
        return Err(crate::error::domain(
            "highdim",
            "design must be nonzero and finite",
        ));
    }
    let p = x.ncols();
    // Deterministic start with no exact zero entries.
    let mut v = DVector::from_fn(p, |j, _| 1.0 + (j as f64 * 0.618_033_988_749_895).fract());
    v /= v.norm();
    let mut est = 0.0;
    let mut settled = false;
    for _ in 0..2000 {
        let w = x.tr_mul(&(x * &v));
        let norm = w.norm();
        if norm == 0.0 {
            break;
        }
        let next = norm.sqrt();
        v = w / norm;
        if (next - est).abs() <= 1e-12 * next {
            est = next;
            settled = true;
            break;
        }
        est = next;
    }
    let op = if settled { (1.01 * est).min(fro) } else { fro };
    Ok((op * op + 1.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighDimConfig {
    pub rule: ThresholdRule,
    pub lambda: f64,
    /// Step scale; `None` uses [`spectral_bound`].
    pub k0: Option<f64>,
    pub epsilon: f64,
    pub max_iter: usize,
    pub trace_objective: bool,
}

impl HighDimConfig {
    pub fn new(rule: ThresholdRule, lambda: f64) -> Self {
        HighDimConfig {
            rule,
            lambda,
            k0: None,
            epsilon: 1e-4,
            max_iter: 10_000,
            trace_objective: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HighDimFit {
    #[serde(serialize_with = "crate::serde_util::serialize")]
    pub beta: DVector<f64>,
    #[serde(serialize_with = "crate::serde_util::serialize")]
    pub gamma: DVector<f64>,
    pub support_beta: Vec<usize>,
    pub support_gamma: Vec<usize>,
    pub n_iter: usize,
    pub converged: bool,
    pub k0: f64,
    pub objective_trace: Vec<f64>,
}

fn check_xy(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(IpodError::Dimension {
            context: "highdim",
            expected: x.nrows(),
            found: y.len(),
        });
    }
    Ok(())
}

/// Runs the coupled iteration from ξ⁰ = (β⁰, γ⁰) (zeros when `None`).
pub fn fit_largep(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &HighDimConfig,
    start: Option<(&DVector<f64>, &DVector<f64>)>,
) -> Result<HighDimFit> {
    check_xy(x, y)?;
    cfg.rule.validate()?;
    crate::threshold::check_nonneg("lambda", cfg.lambda)?;
    if !(cfg.epsilon > 0.0) || cfg.max_iter == 0 {
        return Err(crate::error::domain(
            "highdim",
            "epsilon must be positive and max_iter at least 1",
        ));
    }
    let (n, p) = x.shape();
    let bound = spectral_bound(x)?;
    let k0 = match cfg.k0 {
        Some(k) if k >= bound / 1.01 - 1e-12 => k,
        Some(k) => {
            return Err(crate::error::domain(
                "highdim",
                format!("k0 = {k} is below the convergence bound {:.6}", bound / 1.01),
            ))
        }
        None => bound,
    };
    let (mut beta, mut gamma) = match start {
        Some((b, g)) => {
            if b.len() != p || g.len() != n {
                return Err(IpodError::Dimension {
                    context: "highdim",
                    expected: p + n,
                    found: b.len() + g.len(),
                });
            }
            (b.clone(), g.clone())
        }
        None => (DVector::zeros(p), DVector::zeros(n)),
    };
    let k2 = k0 * k0;
    let level = cfg.lambda / k2;
    let rule = cfg.rule;
    let mut objective_trace = Vec::new();
    if cfg.trace_objective {
        objective_trace.push(augmented_objective(x, y, rule, level, k2, &beta, &gamma));
    }
    let mut converged = false;
    let mut n_iter = 0;
    while n_iter < cfg.max_iter {
        n_iter += 1;
        let r = y - x * &beta - &gamma;
        let xtr = x.tr_mul(&r);
        let mut delta = 0.0f64;
        for j in 0..p {
            let b = rule.threshold(beta[j] + xtr[j] / k2, level);
            delta = delta.max((b - beta[j]).abs());
            beta[j] = b;
        }
        for i in 0..n {
            let g = rule.threshold(gamma[i] + r[i] / k2, level);
            delta = delta.max((g - gamma[i]).abs());
            gamma[i] = g;
        }
        if cfg.trace_objective {
            objective_trace.push(augmented_objective(x, y, rule, level, k2, &beta, &gamma));
        }
        if delta < cfg.epsilon {
            converged = true;
            break;
        }
    }
    Ok(HighDimFit {
        support_beta: nonzero(&beta),
        support_gamma: nonzero(&gamma),
        beta,
        gamma,
        n_iter,
        converged,
        k0,
        objective_trace,
    })
}

/// ½‖y − Xβ − γ‖² + k₀² Σ P(ξⱼ; λ/k₀²) with the canonical penalty.
pub fn augmented_objective(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    rule: ThresholdRule,
    level: f64,
    k2: f64,
    beta: &DVector<f64>,
    gamma: &DVector<f64>,
) -> f64 {
    let form = PenaltyForm::canonical(rule);
    let pen: f64 = beta
        .iter()
        .chain(gamma.iter())
        .map(|&v| penalty_unchecked(form, v, level))
        .sum();
    0.5 * (y - x * beta - gamma).norm_squared() + k2 * pen
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreenConfig {
    pub alpha: f64,
    pub rule: ThresholdRule,
    pub max_iter: usize,
    pub epsilon: f64,
    /// Stop once the support has not changed for this many sweeps.
    pub stable_iters: Option<usize>,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        ScreenConfig {
            alpha: 0.75,
            rule: ThresholdRule::Hard,
            max_iter: 200,
            epsilon: 1e-4,
            stable_iters: Some(10),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScreenResult {
    /// Surviving predictors, ascending.
    pub predictors: Vec<usize>,
    /// Cases carrying a nonzero γ at the end of screening.
    pub cases: Vec<usize>,
    pub n_iter: usize,
    pub converged: bool,
    /// Number of nonzeros kept per sweep, ⌈αn⌉ capped at p + n.
    pub kept: usize,
}

/// Proportional screening: every sweep keeps exactly ⌈αn⌉ of the p + n
/// update arguments (largest magnitudes, ties to the lower index) and
/// zeroes the rest, so the threshold sits at the (⌈αn⌉+1)-th largest
/// magnitude. Stops when ξ moves less than ε, when the support has been
/// stable for `stable_iters` sweeps, or after `max_iter` sweeps.
pub fn proportional_screen(x: &DMatrix<f64>, y: &DVector<f64>, cfg: &ScreenConfig) -> Result<ScreenResult> {
    check_xy(x, y)?;
    cfg.rule.validate()?;
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(crate::error::domain(
            "highdim",
            format!("alpha must lie in (0, 1), got {}", cfg.alpha),
        ));
    }
    let (n, p) = x.shape();
    let keep = ((cfg.alpha * n as f64).ceil() as usize).min(n + p);
    if keep == n + p {
        return Ok(ScreenResult {
            predictors: (0..p).collect(),
            cases: (0..n).collect(),
            n_iter: 1,
            converged: true,
            kept: keep,
        });
    }
    let k2 = spectral_bound(x)?.powi(2);
    let mut xi = DVector::<f64>::zeros(p + n);
    let mut order: Vec<usize> = (0..p + n).collect();
    let mut converged = false;
    let mut n_iter = 0;
    let mut unchanged = 0usize;
    while n_iter < cfg.max_iter {
        n_iter += 1;
        let beta = xi.rows(0, p);
        let gamma = xi.rows(p, n);
        let r = y - x * beta - gamma;
        let xtr = x.tr_mul(&r);
        let arg = DVector::from_fn(p + n, |j, _| {
            if j < p {
                xi[j] + xtr[j] / k2
            } else {
                xi[j] + r[j - p] / k2
            }
        });
        let cmp = |a: &usize, b: &usize| arg[*b].abs().total_cmp(&arg[*a].abs()).then(a.cmp(b));
        order.select_nth_unstable_by(keep, cmp);
        let cut = arg[order[keep]].abs();
        let mut next = DVector::zeros(p + n);
        for &j in &order[..keep] {
            next[j] = cfg.rule.shrink_survivor(arg[j], cut);
        }
        let delta = (&next - &xi).amax();
        let same_support = next
            .iter()
            .zip(xi.iter())
            .all(|(a, b)| (*a != 0.0) == (*b != 0.0));
        unchanged = if same_support { unchanged + 1 } else { 0 };
        xi = next;
        if delta < cfg.epsilon {
            converged = true;
            break;
        }
        if cfg.stable_iters.is_some_and(|k| unchanged >= k) {
            break;
        }
    }
    let kept_idx = |range: std::ops::Range<usize>, offset: usize| -> Vec<usize> {
        range.filter(|&j| xi[j] != 0.0).map(|j| j - offset).collect()
    };
    Ok(ScreenResult {
        predictors: kept_idx(0..p, 0),
        cases: kept_idx(p..p + n, p),
        n_iter,
        converged,
        kept: keep,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaGridConfig {
    /// Stage-one ladder for η.
    pub eta_ladder: Vec<f64>,
    /// Stage-two multipliers of η*.
    pub eta_factors: Vec<f64>,
    pub n_lambda: usize,
    pub lambda_min_frac: f64,
    /// Largest |support β| + |support γ| considered, default ⌊n/2⌋.
    pub max_df: Option<usize>,
    pub epsilon: f64,
    pub max_iter: usize,
}

impl Default for EtaGridConfig {
    fn default() -> Self {
        EtaGridConfig {
            eta_ladder: geometric_grid(1e2, 1e-6, 16).expect("valid ladder"),
            eta_factors: vec![0.5, 0.05, 0.005],
            n_lambda: 60,
            lambda_min_frac: 0.01,
            max_df: None,
            epsilon: 1e-4,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCandidate {
    pub eta: f64,
    pub lambda: f64,
    pub df: usize,
    pub bic_star: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EtaGridResult {
    pub eta_star: f64,
    /// BIC* of the λ = 0 ridge fits along the ladder.
    pub stage_one: Vec<(f64, f64)>,
    /// Best (λ, BIC*) for each stage-two η.
    pub per_eta: Vec<GridCandidate>,
    pub lambda: f64,
    pub eta: f64,
    pub bic_star: f64,
    pub fit: HighDimFit,
}

/// BIC* for the augmented model: m = n, RSS = ‖y − Xβ − γ‖², DF = number
/// of nonzeros in (β, γ).
pub fn bic_star_largep(n: usize, rss: f64, df: usize) -> Option<f64> {
    bic_star_value(n, 0, rss, df)
}

/// Two-stage tuning of the hard-ridge rule on a screened design.
///
/// Stage one sets λ = 0, where the rule reduces to ridge regression on B
/// with penalty ηk₀²; each ladder η is solved in closed form and scored by
/// BIC*, giving η*. Stage two traces a warm-started λ path for each η in
/// `eta_factors`·η* and keeps the overall BIC* minimizer among converged
/// fits within the DF limit.
pub fn eta_grid_tune(x: &DMatrix<f64>, y: &DVector<f64>, cfg: &EtaGridConfig) -> Result<EtaGridResult> {
    check_xy(x, y)?;
    let (n, p) = x.shape();
    if p == 0 {
        return Err(crate::error::domain("highdim", "screened design has no columns"));
    }
    if cfg.eta_ladder.is_empty() || cfg.eta_factors.is_empty() {
        return Err(crate::error::domain(
            "highdim",
            "η ladder and factors must be nonempty",
        ));
    }
    let k0 = spectral_bound(x)?;
    let k2 = k0 * k0;
    let max_df = cfg.max_df.unwrap_or(n / 2);

    // B Bᵀ = X Xᵀ + I.
    let gram = x * x.transpose() + DMatrix::identity(n, n);
    let mut stage_one = Vec::with_capacity(cfg.eta_ladder.len());
    for &eta in &cfg.eta_ladder {
        crate::threshold::check_nonneg("eta", eta)?;
        let mut a = gram.clone();
        for i in 0..n {
            a[(i, i)] += eta * k2;
        }
        let Some(chol) = a.cholesky() else { continue };
        let u = chol.solve(y);
        let beta = x.tr_mul(&u);
        let rss = (y - x * &beta - &u).norm_squared();
        let df = beta.iter().chain(u.iter()).filter(|v| **v != 0.0).count();
        if let Some(b) = bic_star_largep(n, rss, df) {
            stage_one.push((eta, b));
        }
    }
    let eta_star = stage_one
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(b.0.total_cmp(&a.0)))
        .map(|t| t.0)
        .ok_or_else(|| IpodError::Tuning("every ridge fit in stage one is saturated".into()))?;

    let lmax = x.tr_mul(y).amax().max(y.amax()) * (1.0 + 1e-12);
    if lmax == 0.0 {
        return Err(IpodError::Tuning("response is identically zero".into()));
    }
    let grid = geometric_grid(lmax, lmax * cfg.lambda_min_frac, cfg.n_lambda)?;
    let etas: Vec<f64> = cfg.eta_factors.iter().map(|f| f * eta_star).collect();

    let paths: Vec<Result<Option<(GridCandidate, HighDimFit)>>> = par::map_indices(etas.len(), |e| {
        let rule = ThresholdRule::HardRidge { eta: etas[e] };
        let mut scored: Vec<(CurvePoint, HighDimFit)> = Vec::new();
        let mut start: Option<(DVector<f64>, DVector<f64>)> = None;
        for &lambda in &grid {
            let hc = HighDimConfig {
                rule,
                lambda,
                k0: Some(k0),
                epsilon: cfg.epsilon,
                max_iter: cfg.max_iter,
                trace_objective: false,
            };
            let fit = fit_largep(x, y, &hc, start.as_ref().map(|(b, g)| (b, g)))?;
            start = Some((fit.beta.clone(), fit.gamma.clone()));
            let df = fit.support_beta.len() + fit.support_gamma.len();
            if !fit.converged || df > max_df {
                continue;
            }
            let rss = (y - x * &fit.beta - &fit.gamma).norm_squared();
            let Some(b) = bic_star_largep(n, rss, df) else {
                continue;
            };
            scored.push((
                CurvePoint {
                    df,
                    bic_star: b,
                    lambda,
                },
                fit,
            ));
        }
        let curve: Vec<CurvePoint> = scored.iter().map(|(c, _)| *c).collect();
        let pick = (0..curve.len()).min_by(|&a, &b| {
            curve[a]
                .bic_star
                .total_cmp(&curve[b].bic_star)
                .then(curve[b].lambda.total_cmp(&curve[a].lambda))
        });
        let best = pick.map(|k| {
            let c = curve[k];
            let fit = scored.swap_remove(k).1;
            (
                GridCandidate {
                    eta: etas[e],
                    lambda: c.lambda,
                    df: c.df,
                    bic_star: c.bic_star,
                    converged: true,
                },
                fit,
            )
        });
        Ok(best)
    });
    let mut per_eta = Vec::new();
    let mut overall: Option<(GridCandidate, HighDimFit)> = None;
    for res in paths {
        if let Some((cand, fit)) = res? {
            per_eta.push(cand);
            if overall.as_ref().is_none_or(|(c, _)| cand.bic_star < c.bic_star) {
                overall = Some((cand, fit));
            }
        }
    }
    let (cand, fit) = overall
        .ok_or_else(|| IpodError::Tuning("no converged fit within the DF limit in stage two".into()))?;
    Ok(EtaGridResult {
        eta_star,
        stage_one,
        per_eta,
        lambda: cand.lambda,
        eta: cand.eta,
        bic_star: cand.bic_star,
        fit,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LargePResult {
    pub screen: ScreenResult,
    pub tuning: EtaGridResult,
    /// Coefficients on the original column scale, all p entries.
    #[serde(serialize_with = "crate::serde_util::serialize")]
    pub beta: DVector<f64>,
    #[serde(serialize_with = "crate::serde_util::serialize")]
    pub gamma: DVector<f64>,
    pub support_beta: Vec<usize>,
    pub support_gamma: Vec<usize>,
}

/// Screening, then η/λ tuning on the survivors. Columns are scaled to unit
/// Euclidean norm first; coefficients are reported on the original scale.
pub fn largep_pipeline(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    screen_cfg: &ScreenConfig,
    grid_cfg: &EtaGridConfig,
) -> Result<LargePResult> {
    check_xy(x, y)?;
    let norms: Vec<f64> = x.column_iter().map(|c| c.norm()).collect();
    if let Some(j) = norms.iter().position(|&s| s == 0.0) {
        return Err(IpodError::SingularDesign { column: j });
    }
    let mut xs = x.clone();
    for (j, mut col) in xs.column_iter_mut().enumerate() {
        col /= norms[j];
    }
    let screen = proportional_screen(&xs, y, screen_cfg)?;
    if screen.predictors.is_empty() {
        return Err(crate::error::domain("highdim", "screening kept no predictors"));
    }
    let sub = xs.select_columns(&screen.predictors);
    let tuning = eta_grid_tune(&sub, y, grid_cfg)?;
    let mut beta = DVector::zeros(x.ncols());
    for (k, &j) in screen.predictors.iter().enumerate() {
        beta[j] = tuning.fit.beta[k] / norms[j];
    }
    let gamma = tuning.fit.gamma.clone();
    Ok(LargePResult {
        support_beta: nonzero(&beta),
        support_gamma: nonzero(&gamma),
        screen,
        tuning,
        beta,
        gamma,
    })
}

/// Synthetic sparse problem: X with i.i.d. N(0, 1) entries, `n_beta`
/// coefficients of ±`beta_size` at random positions, `n_out` random cases
/// shifted by `shift`, N(0, σ²) noise.
#[derive(Debug, Clone)]
pub struct SparseScenario {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub beta: DVector<f64>,
    pub gamma: DVector<f64>,
    pub support_beta: Vec<usize>,
    pub support_gamma: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparseDesign {
    pub n: usize,
    pub p: usize,
    pub n_beta: usize,
    pub beta_size: f64,
    pub n_out: usize,
    pub shift: f64,
    pub sigma: f64,
}

impl Default for SparseDesign {
    fn default() -> Self {
        SparseDesign {
            n: 100,
            p: 500,
            n_beta: 10,
            beta_size: 3.0,
            n_out: 5,
            shift: 8.0,
            sigma: 1.0,
        }
    }
}

pub fn sparse_scenario(design: &SparseDesign, seed: u64) -> Result<SparseScenario> {
    let SparseDesign {
        n,
        p,
        n_beta,
        beta_size,
        n_out,
        shift,
        sigma,
    } = *design;
    if n_beta > p || n_out > n || n == 0 {
        return Err(crate::error::domain(
            "highdim",
            "support sizes exceed the dimensions",
        ));
    }
    let mut rng = par::stream_rng(seed, 0);
    let x = DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal));
    let mut beta = DVector::zeros(p);
    let mut support_beta = sample(&mut rng, p, n_beta).into_vec();
    support_beta.sort_unstable();
    for &j in &support_beta {
        beta[j] = if rng.random::<bool>() {
            beta_size
        } else {
            -beta_size
        };
    }
    let mut gamma = DVector::zeros(n);
    let mut support_gamma = sample(&mut rng, n, n_out).into_vec();
    support_gamma.sort_unstable();
    for &i in &support_gamma {
        gamma[i] = shift;
    }
    let noise = DVector::from_fn(n, |_, _| sigma * rng.sample::<f64, _>(StandardNormal));
    let y = &x * &beta + &gamma + noise;
    Ok(SparseScenario {
        x,
        y,
        beta,
        gamma,
        support_beta,
        support_gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian(seed: u64, n: usize, p: usize) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn spectral_bound_examples() {
        let k = spectral_bound(&DMatrix::identity(6, 6)).unwrap();
        assert!(k >= 2f64.sqrt());
        assert!(k <= (1.0201f64 + 1.0).sqrt() + 1e-12);
        let mut x = DMatrix::zeros(20, 4);
        x[(3, 1)] = 10.0;
        let k = spectral_bound(&x).unwrap();
        assert!(k >= 101f64.sqrt() && k <= 102.1f64.sqrt());
        for seed in 0..10 {
            let x = gaussian(seed, 30, 12);
            let smax = x.clone().svd(false, false).singular_values.max();
            assert!(spectral_bound(&x).unwrap() >= (smax * smax + 1.0).sqrt());
        }
        assert!(spectral_bound(&DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn huge_lambda_gives_zero() {
        let x = gaussian(1, 20, 40);
        let y = DVector::from_fn(20, |i, _| i as f64);
        let fit = fit_largep(&x, &y, &HighDimConfig::new(ThresholdRule::Hard, 1e9), None).unwrap();
        assert!(fit.support_beta.is_empty() && fit.support_gamma.is_empty());
        assert!(fit.converged);
    }

    #[test]
    fn orthonormal_design_recovers_hard_threshold_of_xty() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = gaussian(2, 50, 5).qr().q();
        let beta_true = DVector::from_vec(vec![5.0, -4.0, 0.3, 0.0, 3.0]);
        let y = &q * &beta_true + DVector::from_fn(50, |_, _| 0.01 * rng.sample::<f64, _>(StandardNormal));
        let mut cfg = HighDimConfig::new(ThresholdRule::Hard, 1.0);
        cfg.epsilon = 1e-10;
        cfg.max_iter = 100_000;
        let fit = fit_largep(&q, &y, &cfg, None).unwrap();
        let expected = ThresholdRule::Hard
            .apply_vec(q.tr_mul(&y).as_slice(), &[1.0])
            .unwrap();
        assert_eq!(fit.support_beta, vec![0, 1, 4]);
        assert!(fit.support_gamma.is_empty());
        for j in 0..5 {
            assert!((fit.beta[j] - expected[j]).abs() < 1e-6);
        }
    }

    #[test]
    fn matches_generic_tisp_update() {
        let (n, p) = (8, 12);
        let x = gaussian(3, n, p);
        let y = DVector::from_fn(n, |i, _| (i as f64).sin() * 3.0);
        let mut b = DMatrix::zeros(n, p + n);
        b.columns_mut(0, p).copy_from(&x);
        b.columns_mut(p, n).copy_from(&DMatrix::identity(n, n));
        let rule = ThresholdRule::HardRidge { eta: 0.3 };
        let lambda = 0.8;
        let mut cfg = HighDimConfig::new(rule, lambda);
        let k0 = spectral_bound(&x).unwrap();
        cfg.k0 = Some(k0);
        let k2 = k0 * k0;
        let mut xi = DVector::zeros(p + n);
        for steps in 1..15 {
            cfg.max_iter = steps;
            cfg.epsilon = 1e-300;
            let fit = fit_largep(&x, &y, &cfg, None).unwrap();
            let arg = b.tr_mul(&y) / k2 + &xi - b.tr_mul(&(&b * &xi)) / k2;
            xi = arg.map(|t| rule.threshold(t, lambda / k2));
            let ours = DVector::from_iterator(p + n, fit.beta.iter().chain(fit.gamma.iter()).copied());
            assert!((ours - &xi).amax() <= 1e-10);
        }
    }

    #[test]
    fn augmented_objective_descends() {
        for seed in 0..20 {
            let x = gaussian(10 + seed, 15, 30);
            let y = DVector::from_fn(15, |i, _| ((i * 7 + seed as usize) % 5) as f64 - 2.0);
            for rule in [
                ThresholdRule::Soft,
                ThresholdRule::Hard,
                ThresholdRule::HardRidge { eta: 0.2 },
            ] {
                let mut cfg = HighDimConfig::new(rule, 0.7);
                cfg.trace_objective = true;
                let fit = fit_largep(&x, &y, &cfg, None).unwrap();
                for w in fit.objective_trace.windows(2) {
                    assert!(w[1] <= w[0] + 1e-10 * (1.0 + w[0].abs()));
                }
            }
        }
    }

    #[test]
    fn k0_below_bound_rejected() {
        let x = gaussian(4, 10, 20);
        let mut cfg = HighDimConfig::new(ThresholdRule::Hard, 1.0);
        cfg.k0 = Some(0.5);
        assert!(fit_largep(&x, &DVector::zeros(10), &cfg, None).is_err());
    }

    #[test]
    fn screening_keeps_exactly_the_quota() {
        let x = gaussian(5, 30, 60);
        let y = DVector::from_fn(30, |i, _| i as f64 * 0.1);
        for max_iter in [1, 2, 7] {
            let cfg = ScreenConfig {
                alpha: 0.5,
                max_iter,
                ..ScreenConfig::default()
            };
            let res = proportional_screen(&x, &y, &cfg).unwrap();
            assert_eq!(res.kept, 15);
            assert_eq!(res.predictors.len() + res.cases.len(), 15);
        }
        let tiny = gaussian(6, 10, 2);
        let cfg = ScreenConfig {
            alpha: 1.0,
            ..ScreenConfig::default()
        };
        assert!(proportional_screen(&tiny, &DVector::zeros(10), &cfg).is_err());
    }

    #[test]
    fn quota_covering_everything_keeps_everything() {
        let x = gaussian(8, 2, 1);
        let cfg = ScreenConfig {
            alpha: 0.99,
            ..ScreenConfig::default()
        };
        // ⌈0.99·2⌉ = 2 < p + n = 3: one parameter is dropped.
        let res = proportional_screen(&x, &DVector::from_element(2, 1.0), &cfg).unwrap();
        assert_eq!(res.predictors.len() + res.cases.len(), 2);
        let x1 = DMatrix::from_element(1, 0, 0.0);
        let res = proportional_screen(&x1, &DVector::from_element(1, 1.0), &cfg).unwrap();
        assert_eq!((res.kept, res.n_iter), (1, 1));
        assert_eq!(res.cases, vec![0]);
    }

    #[test]
    fn ridge_stage_prefers_small_eta_on_clean_data() {
        let x = gaussian(9, 60, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let beta = DVector::from_vec(vec![3.0, -2.0, 1.0, 0.0, 2.0]);
        let y = &x * &beta + DVector::from_fn(60, |_, _| 0.1 * rng.sample::<f64, _>(StandardNormal));
        let res = eta_grid_tune(&x, &y, &EtaGridConfig::default()).unwrap();
        assert!(res.eta_star <= 1e-2);
        for c in &res.per_eta {
            assert!(res.bic_star <= c.bic_star);
        }
    }

    #[test]
    fn scenario_shapes() {
        let s = sparse_scenario(&SparseDesign::default(), 3).unwrap();
        assert_eq!(s.x.shape(), (100, 500));
        assert_eq!(s.support_beta.len(), 10);
        assert_eq!(s.support_gamma.len(), 5);
        assert!(s.support_beta.iter().all(|&j| s.beta[j].abs() == 3.0));
        let again = sparse_scenario(&SparseDesign::default(), 3).unwrap();
        assert_eq!(s.y, again.y);
    }
}
