//! Robust starting values for the outlier iterations.
//!
//! The main route is a light least-trimmed-squares fit: random elemental
//! subsets, a couple of concentration steps each, then the best few
//! candidates are concentrated to convergence. Scales are made consistent
//! at the normal model.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{IpodError, Result};
use crate::par;
use crate::regress::{RegressionProblem, RANK_TOL};

/// Normal-consistency factor for the root mean of the smallest half of the
/// squared residuals: 1 / √(1 − 4 q φ(q)) with q = Φ⁻¹(3/4).
pub const LTS_CONSISTENCY: f64 = 2.647_654_535_566_004_6;

/// 1 / Φ⁻¹(3/4).
pub const MAD_CONSISTENCY: f64 = 1.4826;

/// √(π/2), the normal-consistency factor of the mean absolute deviation.
pub const MEAN_ABS_CONSISTENCY: f64 = 1.253_314_137_315_500_1;

/// Above this many columns elemental subsets are hopeless and the zero
/// start is used instead.
pub const LTS_MAX_P: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PilotMethod {
    LtsLite,
    Zero,
    UserSupplied,
}

#[derive(Debug, Clone, Serialize)]
pub struct PilotEstimate {
    #[serde(serialize_with = "crate::serde_util::serialize")]
    pub beta0: DVector<f64>,
    pub sigma0: f64,
    pub method: PilotMethod,
    pub seed: u64,
    /// Set when a requested method had to be replaced.
    pub warning: Option<String>,
}

impl PilotEstimate {
    pub fn user(beta0: DVector<f64>, sigma0: f64) -> Result<Self> {
        if !(sigma0 > 0.0 && sigma0.is_finite()) {
            return Err(IpodError::Pilot(format!("sigma0 must be positive, got {sigma0}")));
        }
        Ok(PilotEstimate {
            beta0,
            sigma0,
            method: PilotMethod::UserSupplied,
            seed: 0,
            warning: None,
        })
    }

    /// Starting outlier vector: the pilot residuals, or zero for the zero
    /// start.
    pub fn gamma_start(&self, problem: &RegressionProblem) -> DVector<f64> {
        match self.method {
            PilotMethod::Zero => DVector::zeros(problem.n()),
            _ => problem.y() - problem.x() * &self.beta0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LtsConfig {
    pub n_subsets: usize,
    pub n_csteps: usize,
    pub n_refine: usize,
    /// Redraws allowed per subset when an elemental fit is singular.
    pub max_redraws: usize,
    pub max_refine_steps: usize,
}

impl Default for LtsConfig {
    fn default() -> Self {
        LtsConfig {
            n_subsets: 500,
            n_csteps: 2,
            n_refine: 10,
            max_redraws: 100,
            max_refine_steps: 500,
        }
    }
}

/// 1.4826 · MAD, falling back to the scaled mean absolute deviation when
/// more than half the values coincide.
pub fn mad_scale(residuals: &[f64]) -> Result<f64> {
    if residuals.is_empty() {
        return Err(IpodError::Pilot("mad_scale needs at least one value".into()));
    }
    let med = median(residuals);
    let dev: Vec<f64> = residuals.iter().map(|r| (r - med).abs()).collect();
    let mad = median(&dev);
    if mad > 0.0 {
        return Ok(MAD_CONSISTENCY * mad);
    }
    let mean = residuals.iter().sum::<f64>() / residuals.len() as f64;
    let mean_abs = residuals.iter().map(|r| (r - mean).abs()).sum::<f64>() / residuals.len() as f64;
    if mean_abs > 0.0 {
        Ok(MEAN_ABS_CONSISTENCY * mean_abs)
    } else {
        Err(IpodError::DegenerateScale)
    }
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

/// β = 0 and σ from the MAD of y.
pub fn zero_pilot(problem: &RegressionProblem, seed: u64) -> Result<PilotEstimate> {
    Ok(PilotEstimate {
        beta0: DVector::zeros(problem.p()),
        sigma0: mad_scale(problem.y().as_slice())?,
        method: PilotMethod::Zero,
        seed,
        warning: None,
    })
}

/// Least trimmed squares with coverage h = ⌊(n + p + 1)/2⌋.
pub fn lts_lite(problem: &RegressionProblem, cfg: &LtsConfig, seed: u64) -> Result<PilotEstimate> {
    let (n, p) = (problem.n(), problem.p());
    if p >= LTS_MAX_P {
        let mut est = zero_pilot(problem, seed)?;
        est.warning = Some(format!(
            "LTS pilot skipped for p = {p} >= {LTS_MAX_P}; using zero start with MAD scale"
        ));
        return Ok(est);
    }
    if cfg.n_subsets < 50 {
        return Err(IpodError::Pilot(format!(
            "need at least 50 subsets, got {}",
            cfg.n_subsets
        )));
    }
    if n <= 2 * p {
        return Err(IpodError::Pilot(format!(
            "LTS needs n > 2p, got n = {n}, p = {p}"
        )));
    }
    let h = (n + p + 1) / 2;
    let x = problem.x();
    let y = problem.y();

    let starts: Vec<Result<Candidate>> = par::map_indices(cfg.n_subsets, |s| {
        let mut rng = par::stream_rng(seed, s as u64);
        let mut beta = None;
        for _ in 0..=cfg.max_redraws {
            let idx = sample(&mut rng, n, p).into_vec();
            if let Some(b) = lstsq(&x.select_rows(&idx), &y.select_rows(&idx)) {
                beta = Some(b);
                break;
            }
        }
        let mut beta = beta.ok_or_else(|| {
            IpodError::Pilot(format!(
                "subset {s}: every elemental fit was singular after {} redraws",
                cfg.max_redraws
            ))
        })?;
        let mut obj = trimmed_objective(x, y, &beta, h).0;
        for _ in 0..cfg.n_csteps {
            let (next, next_obj) = c_step(x, y, &beta, h);
            if next_obj >= obj {
                break;
            }
            beta = next;
            obj = next_obj;
        }
        Ok(Candidate { beta, obj, id: s })
    });
    let mut cands = starts.into_iter().collect::<Result<Vec<_>>>()?;
    cands.sort_by(|a, b| a.obj.total_cmp(&b.obj).then(a.id.cmp(&b.id)));
    cands.truncate(cfg.n_refine.max(1));

    let refined: Vec<Candidate> = par::map_indices(cands.len(), |k| {
        let mut c = cands[k].clone();
        for _ in 0..cfg.max_refine_steps {
            let (next, next_obj) = c_step(x, y, &c.beta, h);
            if next_obj >= c.obj {
                break;
            }
            c.beta = next;
            c.obj = next_obj;
        }
        c
    });
    let best = refined
        .into_iter()
        .min_by(|a, b| a.obj.total_cmp(&b.obj).then(a.id.cmp(&b.id)))
        .expect("at least one candidate");

    let sigma0 = LTS_CONSISTENCY * (best.obj / h as f64).sqrt();
    if !(sigma0 > 0.0) {
        return Err(IpodError::DegenerateScale);
    }
    Ok(PilotEstimate {
        beta0: best.beta,
        sigma0,
        method: PilotMethod::LtsLite,
        seed,
        warning: None,
    })
}

#[derive(Debug, Clone)]
struct Candidate {
    beta: DVector<f64>,
    obj: f64,
    id: usize,
}

/// Sum of the h smallest squared residuals and the cases achieving it
/// (ties broken by lower index).
fn trimmed_objective(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, h: usize) -> (f64, Vec<usize>) {
    let r2: Vec<f64> = (y - x * beta).iter().map(|r| r * r).collect();
    let mut idx: Vec<usize> = (0..r2.len()).collect();
    let cmp = |a: &usize, b: &usize| r2[*a].total_cmp(&r2[*b]).then(a.cmp(b));
    idx.select_nth_unstable_by(h - 1, cmp);
    idx.truncate(h);
    idx.sort_unstable();
    (idx.iter().map(|&i| r2[i]).sum(), idx)
}

/// One concentration step: refit on the h best-fitting cases. Returns the
/// new coefficients and their trimmed objective; a singular refit keeps
/// the current coefficients.
fn c_step(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, h: usize) -> (DVector<f64>, f64) {
    let (obj, keep) = trimmed_objective(x, y, beta, h);
    match lstsq(&x.select_rows(&keep), &y.select_rows(&keep)) {
        Some(next) => {
            let next_obj = trimmed_objective(x, y, &next, h).0;
            (next, next_obj)
        }
        None => (beta.clone(), obj),
    }
}

/// Least squares through QR; None when the design is numerically rank
/// deficient.
fn lstsq(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<DVector<f64>> {
    let p = x.ncols();
    let qr = x.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || (0..p).any(|j| r[(j, j)].abs() <= RANK_TOL * scale) {
        return None;
    }
    r.solve_upper_triangular(&qr.q().tr_mul(y))
}
