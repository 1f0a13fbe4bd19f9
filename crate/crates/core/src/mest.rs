//! M-estimation baselines: IRLS with weights ψ(t)/t, and Huber's
//! regression with concomitant scale, fitted two independent ways.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{IpodError, Result};
use crate::ipod::{case_lambdas, nonzero};
use crate::regress::RegressionProblem;
use crate::threshold::{ThresholdRule, Thresholding};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrlsConfig {
    pub rule: ThresholdRule,
    pub lambda: f64,
    /// Fixed noise scale.
    pub sigma: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    /// ψ(t; λ√(1 − hᵢ)) per case, matching leverage-weighted Θ-IPOD.
    pub leverage_weighting: bool,
}

impl IrlsConfig {
    pub fn new(rule: ThresholdRule, lambda: f64) -> Self {
        IrlsConfig {
            rule,
            lambda,
            sigma: 1.0,
            epsilon: 1e-4,
            max_iter: 10_000,
            leverage_weighting: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IrlsFit {
    #[serde(serialize_with = "crate::serde_util::serialize")]
    pub beta: DVector<f64>,
    pub n_iter: usize,
    pub converged: bool,
}

/// Iteratively reweighted least squares for Σ ρ((yᵢ − xᵢᵀβ)/σ; λᵢ) with
/// ψ = t − Θ. Stops when σΘ(r/σ; λᵢ), the outlier estimate implied by the
/// current residuals, moves less than ε in max norm.
///
/// Every iteration forms and factors the weighted normal equations. Fewer
/// than p positive weights, or a singular weighted design, is reported as
/// [`IpodError::SingularWls`].
pub fn irls_fit(problem: &RegressionProblem, cfg: &IrlsConfig, beta0: &DVector<f64>) -> Result<IrlsFit> {
    let lambdas = if cfg.leverage_weighting {
        case_lambdas(&problem.factor()?, cfg.lambda, true)
    } else {
        DVector::from_element(problem.n(), cfg.lambda)
    };
    irls_fit_lambdas(problem, cfg, &lambdas, beta0)
}

/// As [`irls_fit`] with explicit per-case λᵢ (in units of σ).
pub fn irls_fit_lambdas(
    problem: &RegressionProblem,
    cfg: &IrlsConfig,
    lambdas: &DVector<f64>,
    beta0: &DVector<f64>,
) -> Result<IrlsFit> {
    cfg.rule.validate()?;
    crate::threshold::check_nonneg("lambda", cfg.lambda)?;
    if !(cfg.sigma > 0.0 && cfg.sigma.is_finite()) {
        return Err(IpodError::ParameterDomain {
            name: "sigma",
            value: cfg.sigma,
        });
    }
    if !(cfg.epsilon > 0.0) || cfg.max_iter == 0 {
        return Err(crate::error::domain(
            "mest",
            "epsilon must be positive and max_iter at least 1",
        ));
    }
    let (n, p) = (problem.n(), problem.p());
    if beta0.len() != p || lambdas.len() != n {
        return Err(IpodError::Dimension {
            context: "mest",
            expected: p,
            found: beta0.len(),
        });
    }
    let x = problem.x();
    let y = problem.y();
    let sigma = cfg.sigma;
    let implied_gamma = |r: &DVector<f64>| -> DVector<f64> {
        r.zip_map(lambdas, |ri, li| sigma * cfg.rule.threshold(ri / sigma, li))
    };

    let mut beta = beta0.clone();
    let mut resid = y - x * &beta;
    let mut gamma = implied_gamma(&resid);
    let mut n_iter = 0;
    while n_iter < cfg.max_iter {
        n_iter += 1;
        let w = resid.zip_map(lambdas, |ri, li| psi_weight(cfg.rule, ri / sigma, li));
        beta = weighted_ls(x, y, &w)?;
        resid = y - x * &beta;
        let next = implied_gamma(&resid);
        let delta = (&next - &gamma).amax();
        gamma = next;
        if delta < cfg.epsilon {
            return Ok(IrlsFit {
                beta,
                n_iter,
                converged: true,
            });
        }
    }
    Ok(IrlsFit {
        beta,
        n_iter,
        converged: false,
    })
}

/// w(t) = ψ(t; λ)/t with 0/0 taken as 0.
pub fn psi_weight(rule: ThresholdRule, t: f64, lambda: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        rule.psi(t, lambda) / t
    }
}

/// Solves XᵀWX β = XᵀWy by Cholesky.
fn weighted_ls(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
    let p = x.ncols();
    let positive = w.iter().filter(|&&wi| wi > 0.0).count();
    if positive < p {
        return Err(IpodError::SingularWls { positive, p });
    }
    let mut xw = x.clone();
    for (i, mut row) in xw.row_iter_mut().enumerate() {
        row *= w[i].sqrt();
    }
    let yw = y.component_mul(&w.map(f64::sqrt));
    let gram = xw.tr_mul(&xw);
    let rhs = xw.tr_mul(&yw);
    let scale = gram.diagonal().amax();
    let chol = gram.cholesky().ok_or(IpodError::SingularWls { positive, p })?;
    let l_diag_min = chol
        .l_dirty()
        .diagonal()
        .iter()
        .fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if l_diag_min * l_diag_min <= 1e-12 * scale {
        return Err(IpodError::SingularWls { positive, p });
    }
    Ok(chol.solve(&rhs))
}

#[derive(Debug, Clone, Serialize)]
pub struct HuberJointFit {
    #[serde(serialize_with = "crate::serde_util::serialize")]
    pub beta: DVector<f64>,
    #[serde(serialize_with = "crate::serde_util::serialize")]
    pub gamma: DVector<f64>,
    pub sigma: f64,
    pub n_iter: usize,
    pub converged: bool,
    /// ‖Xᵀψ((y − Xβ)/σ; λ)‖∞.
    pub kkt_beta: f64,
    /// |σ² − ‖r_G‖²/(cn − λ²|O|)|.
    pub kkt_sigma: f64,
    /// 0-based cases with |rᵢ| > λσ.
    pub outliers: Vec<usize>,
}

fn check_huber_args(n: usize, lambda: f64, c: f64, epsilon: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(IpodError::ParameterDomain {
            name: "lambda",
            value: lambda,
        });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(IpodError::ParameterDomain { name: "c", value: c });
    }
    if !(epsilon > 0.0) {
        return Err(crate::error::domain("mest", "epsilon must be positive"));
    }
    // With every case outside λσ the scale equation reads cn − λ²n = 0;
    // unless that is negative the criterion keeps falling as σ → 0.
    let lim = c * n as f64 - lambda * lambda * n as f64;
    if lim >= 0.0 {
        return Err(IpodError::ScaleCollapse(lim));
    }
    Ok(())
}

/// Minimizes ‖y − Xβ − γ‖²/(2σ) + cnσ/2 + λ‖γ‖₁ by cycling through the
/// three exact block updates β ← OLS(y − γ), γ ← Θ_soft(y − Xβ; λσ),
/// σ² ← ‖y − Xβ − γ‖²/(cn). The (β, σ) it returns minimize Huber's
/// criterion with concomitant scale.
pub fn huber_joint_fit(
    problem: &RegressionProblem,
    lambda: f64,
    c: f64,
    epsilon: f64,
    max_iter: usize,
) -> Result<HuberJointFit> {
    check_huber_args(problem.n(), lambda, c, epsilon)?;
    let model = problem.factor()?;
    let x = problem.x();
    let y = problem.y();
    let cn = c * problem.n() as f64;

    let mut gamma = DVector::zeros(problem.n());
    let mut beta = model.ols_unchecked(y);
    let mut sigma = ((y - x * &beta).norm_squared() / cn).sqrt();
    let mut converged = false;
    let mut n_iter = 0;
    while n_iter < max_iter {
        n_iter += 1;
        let resid = y - x * &beta;
        let next_gamma = resid.map(|r| ThresholdRule::Soft.threshold(r, lambda * sigma));
        let next_beta = model.ols_unchecked(&(y - &next_gamma));
        let e = y - x * &next_beta - &next_gamma;
        let next_sigma = (e.norm_squared() / cn).sqrt();
        if !(next_sigma > 0.0) {
            return Err(IpodError::ScaleCollapse(0.0));
        }
        let delta = (&next_gamma - &gamma)
            .amax()
            .max((&next_beta - &beta).amax())
            .max((next_sigma - sigma).abs());
        gamma = next_gamma;
        beta = next_beta;
        sigma = next_sigma;
        if delta < epsilon {
            converged = true;
            break;
        }
    }
    huber_summary(problem, beta, Some(gamma), sigma, lambda, cn, n_iter, converged)
}

/// Minimizes Huber's concomitant criterion Σ ρ(rᵢ/σ; λ)σ + cnσ/2 directly:
/// one weighted least-squares step in β, then an exact one-dimensional
/// solve of the scale equation by bisection.
pub fn huber_concomitant_irls(
    problem: &RegressionProblem,
    lambda: f64,
    c: f64,
    epsilon: f64,
    max_iter: usize,
) -> Result<HuberJointFit> {
    check_huber_args(problem.n(), lambda, c, epsilon)?;
    let model = problem.factor()?;
    let x = problem.x();
    let y = problem.y();
    let cn = c * problem.n() as f64;

    let mut beta = model.ols_unchecked(y);
    let mut sigma = scale_root(&(y - x * &beta), lambda, cn)?;
    let mut converged = false;
    let mut n_iter = 0;
    while n_iter < max_iter {
        n_iter += 1;
        let resid = y - x * &beta;
        let w = resid.map(|r| {
            let t = r / sigma;
            if t.abs() <= lambda {
                1.0
            } else {
                lambda / t.abs()
            }
        });
        let next_beta = weighted_ls(x, y, &w)?;
        let next_sigma = scale_root(&(y - x * &next_beta), lambda, cn)?;
        let delta = (&next_beta - &beta).amax().max((next_sigma - sigma).abs());
        beta = next_beta;
        sigma = next_sigma;
        if delta < epsilon {
            converged = true;
            break;
        }
    }
    huber_summary(problem, beta, None, sigma, lambda, cn, n_iter, converged)
}

/// Root in σ of cn − λ²|O(σ)| − Σ_{G(σ)} rᵢ²/σ², which is nondecreasing in
/// σ; G(σ) = {|rᵢ| ≤ λσ}.
fn scale_root(resid: &DVector<f64>, lambda: f64, cn: f64) -> Result<f64> {
    let f = |s: f64| -> f64 {
        let mut acc = cn;
        for &r in resid.iter() {
            if r.abs() <= lambda * s {
                acc -= (r / s).powi(2);
            } else {
                acc -= lambda * lambda;
            }
        }
        acc
    };
    let mut hi = resid.amax().max(f64::MIN_POSITIVE) / lambda;
    let mut lo = hi;
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    while f(lo) >= 0.0 && lo > 1e-300 {
        lo *= 0.5;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[allow(clippy::too_many_arguments)]
fn huber_summary(
    problem: &RegressionProblem,
    beta: DVector<f64>,
    gamma: Option<DVector<f64>>,
    sigma: f64,
    lambda: f64,
    cn: f64,
    n_iter: usize,
    converged: bool,
) -> Result<HuberJointFit> {
    let resid = problem.y() - problem.x() * &beta;
    let psi = resid.map(|r| ThresholdRule::Soft.psi(r / sigma, lambda));
    let kkt_beta = problem.x().tr_mul(&psi).amax();
    let cut = lambda * sigma;
    let n_out = resid.iter().filter(|r| r.abs() > cut).count();
    let good_ss: f64 = resid.iter().filter(|r| r.abs() <= cut).map(|r| r * r).sum();
    let denom = cn - lambda * lambda * n_out as f64;
    if denom <= 0.0 {
        return Err(IpodError::ScaleCollapse(denom));
    }
    let kkt_sigma = (sigma * sigma - good_ss / denom).abs();
    let gamma = gamma.unwrap_or_else(|| resid.map(|r| ThresholdRule::Soft.threshold(r, cut)));
    let outliers = nonzero(&gamma);
    Ok(HuberJointFit {
        beta,
        gamma,
        sigma,
        n_iter,
        converged,
        kkt_beta,
        kkt_sigma,
        outliers,
    })
}
