//! wasm-bindgen entry points for `www/index.html`. Each export returns a
//! JSON string; the plain functions below them do the work and are what
//! the native tests exercise.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use ipod::data;
use ipod::ipod::{fit_simplified, fit_simplified_lambdas, solution_path, IpodConfig, PathConfig};
use ipod::pilot::{self, LtsConfig};
use ipod::threshold::{self, ThresholdRule};
use ipod::tune::{self, SelectConfig};

fn parse_rule(rule: &str, eta: f64) -> Result<ThresholdRule, String> {
    let r = match rule {
        "soft" => ThresholdRule::Soft,
        "hard" => ThresholdRule::Hard,
        "hardridge" => ThresholdRule::HardRidge { eta },
        other => return Err(format!("unknown rule '{other}'")),
    };
    r.validate().map_err(|e| e.to_string())?;
    Ok(r)
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Θ, ψ, loss and penalty on an even grid over [from, to].
pub fn curves_json(
    rule: &str,
    eta: f64,
    lambda: f64,
    from: f64,
    to: f64,
    points: usize,
) -> Result<String, String> {
    let rule = parse_rule(rule, eta)?;
    if points < 2 || !(to > from) {
        return Err("need at least two points and to > from".into());
    }
    let step = (to - from) / (points - 1) as f64;
    let grid: Vec<f64> = (0..points).map(|k| from + step * k as f64).collect();
    let rows = threshold::curve_table(rule, lambda, &grid).map_err(|e| e.to_string())?;
    to_json(&rows)
}

#[derive(Serialize)]
struct PathView {
    lambda_max: f64,
    points: Vec<PointView>,
    selected_index: usize,
    selected_lambda: f64,
    selected_df: usize,
    /// (DF, smoothed BIC*) pairs of the selection curve.
    smoothed: Vec<(usize, f64)>,
    outliers: Vec<usize>,
    /// γ̂ of the first 14 cases at every λ.
    gamma_head: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct PointView {
    lambda: f64,
    df: usize,
    bic_star: Option<f64>,
}

/// HBK solution path from the LTS-lite start, with the local-BIC* choice.
pub fn hbk_path_json(rule: &str, eta: f64, grid: usize, seed: u64) -> Result<String, String> {
    let rule = parse_rule(rule, eta)?;
    let problem = data::hbk().problem(true).map_err(|e| e.to_string())?;
    let model = problem.factor().map_err(|e| e.to_string())?;
    let start = pilot::lts_lite(&problem, &LtsConfig::default(), seed).map_err(|e| e.to_string())?;
    let mut cfg = PathConfig::new(rule);
    cfg.n_grid = grid;
    let path =
        solution_path(&model, problem.y(), &cfg, &start.gamma_start(&problem)).map_err(|e| e.to_string())?;
    let report = tune::select_lambda(&path, &SelectConfig::for_n(problem.n())).map_err(|e| e.to_string())?;
    let chosen = &path.points[report.selected_index].gamma;
    to_json(&PathView {
        lambda_max: path.lambda_max,
        points: path
            .points
            .iter()
            .map(|p| PointView {
                lambda: p.lambda,
                df: p.df,
                bic_star: p.bic_star,
            })
            .collect(),
        selected_index: report.selected_index,
        selected_lambda: report.selected_lambda,
        selected_df: report.selected_df,
        smoothed: report.smoothed_curve.iter().map(|s| (s.df, s.smoothed)).collect(),
        outliers: (0..chosen.len())
            .filter(|&i| chosen[i] != 0.0)
            .map(|i| i + 1)
            .collect(),
        gamma_head: path
            .points
            .iter()
            .map(|p| p.gamma.iter().take(14).copied().collect())
            .collect(),
    })
}

#[derive(Serialize)]
struct FitView {
    lambda: f64,
    sigma0: f64,
    beta: Vec<f64>,
    gamma: Vec<f64>,
    outliers: Vec<usize>,
    n_iter: usize,
    converged: bool,
    /// Leverage-standardized residuals from the final β̂.
    residuals: Vec<f64>,
}

/// One HBK fit. `lambda` ≤ 0 selects the universal threshold
/// σ̂√(2(1 − hᵢ) log n).
pub fn hbk_fit_json(rule: &str, eta: f64, lambda: f64, seed: u64) -> Result<String, String> {
    let rule = parse_rule(rule, eta)?;
    let problem = data::hbk().problem(true).map_err(|e| e.to_string())?;
    let model = problem.factor().map_err(|e| e.to_string())?;
    let start = pilot::lts_lite(&problem, &LtsConfig::default(), seed).map_err(|e| e.to_string())?;
    let gamma0 = start.gamma_start(&problem);
    let (fit, used) = if lambda > 0.0 {
        let cfg = IpodConfig::new(rule, lambda);
        (fit_simplified(&model, problem.y(), &cfg, &gamma0), lambda)
    } else {
        let lambdas = tune::universal_lambda(start.sigma0, &model).map_err(|e| e.to_string())?;
        let universal = start.sigma0 * (2.0 * (problem.n() as f64).ln()).sqrt();
        let cfg = IpodConfig::new(rule, 0.0);
        (
            fit_simplified_lambdas(&model, problem.y(), &cfg, &lambdas, &gamma0),
            universal,
        )
    };
    let fit = fit.map_err(|e| e.to_string())?;
    let resid = problem.y() - problem.x() * &fit.beta;
    let h = model.leverages();
    to_json(&FitView {
        lambda: used,
        sigma0: start.sigma0,
        beta: fit.beta.iter().copied().collect(),
        gamma: fit.gamma.iter().copied().collect(),
        outliers: fit.outliers.iter().map(|i| i + 1).collect(),
        n_iter: fit.n_iter,
        converged: fit.converged,
        residuals: (0..resid.len())
            .map(|i| resid[i] / (1.0 - h[i]).max(1e-12).sqrt())
            .collect(),
    })
}

#[wasm_bindgen]
pub fn threshold_curves(
    rule: &str,
    eta: f64,
    lambda: f64,
    from: f64,
    to: f64,
    points: usize,
) -> Result<String, JsError> {
    curves_json(rule, eta, lambda, from, to, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn hbk_path(rule: &str, eta: f64, grid: usize, seed: u64) -> Result<String, JsError> {
    hbk_path_json(rule, eta, grid, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn hbk_fit(rule: &str, eta: f64, lambda: f64, seed: u64) -> Result<String, JsError> {
    hbk_fit_json(rule, eta, lambda, seed).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> serde_json::Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn curves_have_requested_length() {
        let v = parse(&curves_json("hardridge", 0.25, 1.0, -3.0, 3.0, 61).unwrap());
        let rows = v.as_array().unwrap();
        assert_eq!(rows.len(), 61);
        assert_eq!(rows[0].as_object().unwrap().len(), 5);
        assert!(curves_json("hard", 0.0, 1.0, 1.0, 0.0, 10).is_err());
        assert!(curves_json("median", 0.0, 1.0, -1.0, 1.0, 10).is_err());
    }

    #[test]
    fn hbk_path_selects_ten_outliers() {
        let v = parse(&hbk_path_json("hard", 0.0, 100, 1).unwrap());
        assert_eq!(v["selected_df"], 10);
        let outliers: Vec<u64> = v["outliers"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_u64().unwrap())
            .collect();
        assert_eq!(outliers, (1..=10).collect::<Vec<_>>());
        assert_eq!(v["points"].as_array().unwrap().len(), 100);
    }

    #[test]
    fn universal_soft_fit_swamps() {
        let v = parse(&hbk_fit_json("soft", 0.0, 0.0, 1).unwrap());
        let outliers: Vec<u64> = v["outliers"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_u64().unwrap())
            .collect();
        assert_eq!(outliers, vec![11, 12, 13, 14]);
        let huge = parse(&hbk_fit_json("hard", 0.0, 1e9, 1).unwrap());
        assert!(huge["outliers"].as_array().unwrap().is_empty());
    }
}
