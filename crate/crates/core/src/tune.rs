//! Choosing λ: BIC* on the reduced model and a local-minimum rule that
//! prefers the widest basin of a smoothed BIC*-versus-DF curve.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{IpodError, Result};
use crate::ipod::SolutionPath;
use crate::regress::QrModel;

/// m·log(RSS/m) + k·(log m + 1) with m = n − p and k = df + 1. None when
/// RSS is zero or m is not positive.
pub fn bic_star_value(n: usize, p: usize, rss: f64, df: usize) -> Option<f64> {
    if n <= p || !(rss > 0.0) {
        return None;
    }
    let m = (n - p) as f64;
    let k = (df + 1) as f64;
    Some(m * (rss / m).ln() + k * (m.ln() + 1.0))
}

/// BIC* of an outlier estimate, with RSS = ‖(I − H)(y − γ)‖².
pub fn bic_star(model: &QrModel, y: &DVector<f64>, gamma: &DVector<f64>, df: usize) -> Result<f64> {
    let rss = model.residual_apply(&(y - gamma))?.norm_squared();
    bic_star_value(model.n(), model.p(), rss, df).ok_or(IpodError::SaturatedFit)
}

/// ‖ỹ − Aγ‖² computed through the reduced model.
pub fn reduced_rss(model: &QrModel, y: &DVector<f64>, gamma: &DVector<f64>) -> Result<f64> {
    let (a, yt) = model.reduced_model(y)?;
    if gamma.len() != model.n() {
        return Err(IpodError::Dimension {
            context: "tune",
            expected: model.n(),
            found: gamma.len(),
        });
    }
    Ok((yt - a * gamma).norm_squared())
}

/// λᵢ = σ√(2(1 − hᵢ) log n).
pub fn universal_lambda(sigma: f64, model: &QrModel) -> Result<DVector<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(IpodError::ParameterDomain {
            name: "sigma",
            value: sigma,
        });
    }
    let log_n = (model.n() as f64).ln();
    Ok(model
        .leverages()
        .map(|h| sigma * (2.0 * (1.0 - h).max(0.0) * log_n).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectConfig {
    pub nu_l: usize,
    pub nu_u: usize,
    /// Kernel bandwidth as a fraction of the DF range in the window.
    pub bandwidth_frac: f64,
}

impl SelectConfig {
    /// Window [0, ⌊n/2⌋], bandwidth 0.1.
    pub fn for_n(n: usize) -> Self {
        SelectConfig {
            nu_l: 0,
            nu_u: n / 2,
            bandwidth_frac: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub df: usize,
    pub bic_star: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedPoint {
    pub df: usize,
    /// Best raw BIC* among path points with this DF.
    pub raw: f64,
    pub smoothed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Basin {
    pub df: usize,
    pub left_df: usize,
    pub right_df: usize,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    pub selected_lambda: f64,
    pub selected_df: usize,
    pub selected_bic_star: f64,
    /// Position of the chosen point in the path.
    pub selected_index: usize,
    pub bic_curve: Vec<CurvePoint>,
    pub smoothed_curve: Vec<SmoothedPoint>,
    pub candidate_minima: Vec<Basin>,
    pub nu_bounds: (usize, usize),
    pub bandwidth: f64,
}

/// Local-BIC selection.
///
/// Keeps converged points with DF in [ν_L, ν_U], takes the best BIC* at
/// each DF, smooths that curve with a Gaussian Nadaraya-Watson kernel,
/// and picks the local minimum whose basin (distance between the flanking
/// local maxima, curve ends included) is widest; ties go to the smaller
/// DF. The returned λ is the one with the best raw BIC* inside that basin,
/// ties going to the larger λ.
pub fn select_lambda(path: &SolutionPath, cfg: &SelectConfig) -> Result<TuningReport> {
    if cfg.nu_u > path.n / 2 {
        return Err(crate::error::domain(
            "tune",
            format!("nu_u = {} exceeds floor(n/2) = {}", cfg.nu_u, path.n / 2),
        ));
    }
    if cfg.nu_l > cfg.nu_u {
        return Err(crate::error::domain(
            "tune",
            format!("empty DF window [{}, {}]", cfg.nu_l, cfg.nu_u),
        ));
    }
    if !(cfg.bandwidth_frac > 0.0 && cfg.bandwidth_frac.is_finite()) {
        return Err(crate::error::domain(
            "tune",
            format!("bandwidth_frac must be positive, got {}", cfg.bandwidth_frac),
        ));
    }
    if path.points.is_empty() {
        return Err(IpodError::Tuning("solution path is empty".into()));
    }
    if path.points.iter().all(|p| !p.converged) {
        return Err(IpodError::Tuning("no fit on the path converged".into()));
    }

    let in_window: Vec<(usize, CurvePoint)> = path
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.converged && (cfg.nu_l..=cfg.nu_u).contains(&p.df))
        .filter_map(|(k, p)| {
            p.bic_star.map(|b| {
                (
                    k,
                    CurvePoint {
                        df: p.df,
                        bic_star: b,
                        lambda: p.lambda,
                    },
                )
            })
        })
        .collect();
    if in_window.is_empty() {
        return Err(crate::error::domain(
            "tune",
            format!(
                "no converged, unsaturated fit has DF in [{}, {}]",
                cfg.nu_l, cfg.nu_u
            ),
        ));
    }

    let curve: Vec<CurvePoint> = in_window.iter().map(|(_, c)| *c).collect();
    let local = local_select(&curve, cfg.bandwidth_frac);
    let (selected_index, chosen) = in_window[local.chosen];

    let mut bic_curve: Vec<CurvePoint> = in_window.iter().map(|(_, c)| *c).collect();
    bic_curve.sort_by(|a, b| b.lambda.total_cmp(&a.lambda));
    Ok(TuningReport {
        selected_lambda: chosen.lambda,
        selected_df: chosen.df,
        selected_bic_star: chosen.bic_star,
        selected_index,
        bic_curve,
        smoothed_curve: local
            .dfs
            .iter()
            .zip(local.raw.iter().zip(&local.smoothed))
            .map(|(&df, (&raw, &smoothed))| SmoothedPoint { df, raw, smoothed })
            .collect(),
        candidate_minima: local.basins,
        nu_bounds: (cfg.nu_l, cfg.nu_u),
        bandwidth: local.bandwidth,
    })
}

struct LocalSelection {
    dfs: Vec<usize>,
    raw: Vec<f64>,
    smoothed: Vec<f64>,
    basins: Vec<Basin>,
    bandwidth: f64,
    chosen: usize,
}

fn local_select(curve: &[CurvePoint], bandwidth_frac: f64) -> LocalSelection {
    let mut dfs: Vec<usize> = curve.iter().map(|c| c.df).collect();
    dfs.sort_unstable();
    dfs.dedup();
    let raw: Vec<f64> = dfs
        .iter()
        .map(|&d| {
            curve
                .iter()
                .filter(|c| c.df == d)
                .map(|c| c.bic_star)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();

    let range = (dfs[dfs.len() - 1] - dfs[0]) as f64;
    let bandwidth = bandwidth_frac * range;
    let smoothed = nw_smooth(&dfs, &raw, bandwidth);
    let basins = basins(&dfs, &smoothed);
    let best = basins
        .iter()
        .copied()
        .min_by(|a, b| b.width.cmp(&a.width).then(a.df.cmp(&b.df)))
        .expect("a nonempty curve has a minimum");

    let chosen = (0..curve.len())
        .filter(|&k| (best.left_df..=best.right_df).contains(&curve[k].df))
        .min_by(|&a, &b| {
            curve[a]
                .bic_star
                .total_cmp(&curve[b].bic_star)
                .then(curve[b].lambda.total_cmp(&curve[a].lambda))
        })
        .expect("the basin contains its own minimum");
    LocalSelection {
        dfs,
        raw,
        smoothed,
        basins,
        bandwidth,
        chosen,
    }
}

/// Gaussian-kernel Nadaraya-Watson smoother evaluated at the design
/// points. A zero bandwidth returns the data unchanged.
pub fn nw_smooth(x: &[usize], y: &[f64], bandwidth: f64) -> Vec<f64> {
    if bandwidth <= 0.0 {
        return y.to_vec();
    }
    x.iter()
        .map(|&x0| {
            let (mut num, mut den) = (0.0, 0.0);
            for (&xi, &yi) in x.iter().zip(y) {
                let u = (xi as f64 - x0 as f64) / bandwidth;
                let w = (-0.5 * u * u).exp();
                num += w * yi;
                den += w;
            }
            num / den
        })
        .collect()
}

/// Local minima of `s` with the DF span between their flanking maxima.
/// The first and last points always count as maxima; on a flat stretch the
/// first point is the representative.
pub fn basins(df: &[usize], s: &[f64]) -> Vec<Basin> {
    let n = s.len();
    if n == 1 {
        return vec![Basin {
            df: df[0],
            left_df: df[0],
            right_df: df[0],
            width: 0,
        }];
    }
    let is_min = |j: usize| (j == 0 || s[j] < s[j - 1]) && (j + 1 == n || s[j] <= s[j + 1]);
    let is_max = |j: usize| j == 0 || j + 1 == n || (s[j] >= s[j - 1] && s[j] > s[j + 1]);
    (0..n)
        .filter(|&j| is_min(j))
        .map(|j| {
            let left = (0..j).rev().find(|&k| is_max(k)).unwrap_or(j);
            let right = (j + 1..n).find(|&k| is_max(k)).unwrap_or(j);
            Basin {
                df: df[j],
                left_df: df[left],
                right_df: df[right],
                width: df[right] - df[left],
            }
        })
        .collect()
}
