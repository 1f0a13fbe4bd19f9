//! Thresholding rules, their ψ companions and the penalties they induce.
//!
//! A thresholding rule Θ(t; λ) is odd, monotone nondecreasing, unbounded and
//! shrinks toward zero (0 ≤ Θ(t; λ) ≤ t for t ≥ 0). Every such rule has a
//! score function ψ = t − Θ and a penalty built from its generalized inverse:
//!
//! ```text
//! Θ⁻¹(u; λ) = sup { t : Θ(t; λ) ≤ u }
//! s(u; λ)   = Θ⁻¹(u; λ) − u
//! P(θ; λ)   = ∫₀^|θ| s(u; λ) du
//! ```
//!
//! [`ThresholdRule`] ships the soft, hard and hard-ridge rules with closed
//! forms. Other rules can plug into the generic machinery
//! ([`penalty_numeric`]) by implementing [`Thresholding`].

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{IpodError, Result};

/// Minimal interface a shrinkage rule must provide.
///
/// Implementations may assume `lambda >= 0` and, for `inverse`, `u >= 0`;
/// validation happens at the public entry points of [`ThresholdRule`].
pub trait Thresholding {
    fn threshold(&self, t: f64, lambda: f64) -> f64;

    /// Generalized inverse sup{t : Θ(t; λ) ≤ u} for u ≥ 0.
    fn inverse(&self, u: f64, lambda: f64) -> f64;

    fn psi(&self, t: f64, lambda: f64) -> f64 {
        t - self.threshold(t, lambda)
    }
}

/// The shipped thresholding rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdRule {
    /// x − sgn(x)λ above the threshold, 0 at or below it.
    Soft,
    /// x above the threshold, 0 at or below it.
    Hard,
    /// x / (1 + η) at or above the threshold, 0 below it.
    HardRidge { eta: f64 },
}

impl ThresholdRule {
    pub fn name(&self) -> &'static str {
        match self {
            ThresholdRule::Soft => "soft",
            ThresholdRule::Hard => "hard",
            ThresholdRule::HardRidge { .. } => "hardridge",
        }
    }

    /// Ridge weight, zero for rules without one.
    pub fn eta(&self) -> f64 {
        match self {
            ThresholdRule::HardRidge { eta } => *eta,
            _ => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ThresholdRule::HardRidge { eta } = self {
            check_nonneg("eta", *eta)?;
        }
        Ok(())
    }

    /// Θ(t; λ).
    pub fn apply(&self, t: f64, lambda: f64) -> Result<f64> {
        self.validate()?;
        check_nonneg("lambda", lambda)?;
        Ok(self.threshold(t, lambda))
    }

    /// Componentwise Θ. `lambda` either matches `t` in length or holds a
    /// single value that is broadcast.
    pub fn apply_vec(&self, t: &[f64], lambda: &[f64]) -> Result<Vec<f64>> {
        self.validate()?;
        for &l in lambda {
            check_nonneg("lambda", l)?;
        }
        match lambda.len() {
            1 => Ok(t.iter().map(|&ti| self.threshold(ti, lambda[0])).collect()),
            len if len == t.len() => Ok(t
                .iter()
                .zip(lambda)
                .map(|(&ti, &li)| self.threshold(ti, li))
                .collect()),
            len => Err(IpodError::Dimension {
                context: "threshold",
                expected: t.len(),
                found: len,
            }),
        }
    }

    /// ψ(t; λ) = t − Θ(t; λ).
    pub fn psi_checked(&self, t: f64, lambda: f64) -> Result<f64> {
        self.validate()?;
        check_nonneg("lambda", lambda)?;
        Ok(self.psi(t, lambda))
    }

    pub fn theta_inverse(&self, u: f64, lambda: f64) -> Result<f64> {
        self.validate()?;
        check_nonneg("lambda", lambda)?;
        check_nonneg("u", u)?;
        Ok(self.inverse(u, lambda))
    }

    /// ∫₀^t ψ(s; λ) ds, the loss function of the associated M-estimator.
    pub fn loss(&self, t: f64, lambda: f64) -> f64 {
        let a = t.abs();
        match *self {
            ThresholdRule::Soft => {
                if a <= lambda {
                    0.5 * a * a
                } else {
                    lambda * a - 0.5 * lambda * lambda
                }
            }
            ThresholdRule::Hard => 0.5 * a.min(lambda).powi(2),
            ThresholdRule::HardRidge { eta } => {
                if a < lambda {
                    0.5 * a * a
                } else {
                    0.5 * lambda * lambda + 0.5 * eta / (1.0 + eta) * (a * a - lambda * lambda)
                }
            }
        }
    }

    /// Value of the nonzero branch for an argument that survives a cut at
    /// `lambda`. Used by proportional screening, which decides survival by
    /// rank rather than by comparison.
    pub(crate) fn shrink_survivor(&self, t: f64, lambda: f64) -> f64 {
        match *self {
            ThresholdRule::Soft => t.signum() * (t.abs() - lambda).max(0.0),
            ThresholdRule::Hard => t,
            ThresholdRule::HardRidge { eta } => t / (1.0 + eta),
        }
    }
}

impl Thresholding for ThresholdRule {
    #[inline]
    fn threshold(&self, t: f64, lambda: f64) -> f64 {
        let a = t.abs();
        match *self {
            ThresholdRule::Soft => {
                if a <= lambda {
                    0.0
                } else {
                    t - t.signum() * lambda
                }
            }
            ThresholdRule::Hard => {
                if a <= lambda {
                    0.0
                } else {
                    t
                }
            }
            ThresholdRule::HardRidge { eta } => {
                // Nonzero branch includes the boundary; at λ = 0 the origin
                // still maps to 0 through t / (1 + η).
                if a < lambda {
                    0.0
                } else {
                    t / (1.0 + eta)
                }
            }
        }
    }

    #[inline]
    fn inverse(&self, u: f64, lambda: f64) -> f64 {
        match *self {
            ThresholdRule::Soft => u + lambda,
            ThresholdRule::Hard => u.max(lambda),
            ThresholdRule::HardRidge { eta } => {
                let t = u * (1.0 + eta);
                if t >= lambda {
                    t
                } else {
                    lambda
                }
            }
        }
    }
}

/// Which member of the family of penalties inducing the same rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyVariant {
    /// The three-step construction (smallest curvature, continuous).
    Canonical,
    /// Canonical plus a nonnegative term vanishing on the range of Θ; an L0
    /// penalty for hard thresholding, L0 + ridge for hard-ridge.
    AlternativeL0,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyForm {
    pub rule: ThresholdRule,
    pub variant: PenaltyVariant,
}

impl PenaltyForm {
    pub fn canonical(rule: ThresholdRule) -> Self {
        PenaltyForm {
            rule,
            variant: PenaltyVariant::Canonical,
        }
    }

    pub fn l0(rule: ThresholdRule) -> Self {
        PenaltyForm {
            rule,
            variant: PenaltyVariant::AlternativeL0,
        }
    }
}

/// Closed-form penalty P(θ; λ).
pub fn penalty(form: PenaltyForm, theta: f64, lambda: f64) -> Result<f64> {
    form.rule.validate()?;
    check_nonneg("lambda", lambda)?;
    match (form.variant, form.rule) {
        (PenaltyVariant::AlternativeL0, ThresholdRule::Soft) => Err(IpodError::UnsupportedVariant("soft")),
        _ => Ok(penalty_unchecked(form, theta, lambda)),
    }
}

/// Penalty evaluation without validation; Soft + AlternativeL0 falls back to
/// the canonical form.
#[inline]
pub(crate) fn penalty_unchecked(form: PenaltyForm, theta: f64, lambda: f64) -> f64 {
    let a = theta.abs();
    match (form.variant, form.rule) {
        (_, ThresholdRule::Soft) => lambda * a,
        (PenaltyVariant::Canonical, ThresholdRule::Hard) => {
            if a < lambda {
                lambda * a - 0.5 * a * a
            } else {
                0.5 * lambda * lambda
            }
        }
        (PenaltyVariant::AlternativeL0, ThresholdRule::Hard) => {
            if a != 0.0 {
                0.5 * lambda * lambda
            } else {
                0.0
            }
        }
        (PenaltyVariant::Canonical, ThresholdRule::HardRidge { eta }) => {
            if a < lambda / (1.0 + eta) {
                lambda * a - 0.5 * a * a
            } else {
                0.5 * eta * a * a + 0.5 * lambda * lambda / (1.0 + eta)
            }
        }
        (PenaltyVariant::AlternativeL0, ThresholdRule::HardRidge { eta }) => {
            let l0 = if a != 0.0 {
                0.5 * lambda * lambda / (1.0 + eta)
            } else {
                0.0
            };
            l0 + 0.5 * eta * a * a
        }
    }
}

/// Trapezoid quadrature of s(u; λ) = Θ⁻¹(u; λ) − u over [0, |θ|].
///
/// Works for any [`Thresholding`]; serves as an independent check on the
/// closed forms in [`penalty`].
pub fn penalty_numeric<R: Thresholding + ?Sized>(
    rule: &R,
    theta: f64,
    lambda: f64,
    quad_steps: usize,
) -> Result<f64> {
    check_nonneg("lambda", lambda)?;
    if quad_steps < 100 {
        return Err(crate::error::domain(
            "threshold",
            format!("quad_steps must be at least 100, got {quad_steps}"),
        ));
    }
    let upper = theta.abs();
    if upper == 0.0 {
        return Ok(0.0);
    }
    let h = upper / quad_steps as f64;
    let s = |u: f64| rule.inverse(u, lambda) - u;
    let mut acc = 0.5 * (s(0.0) + s(upper));
    for k in 1..quad_steps {
        acc += s(k as f64 * h);
    }
    Ok(acc * h)
}

/// One row of the data behind a ψ / loss / Θ / penalty plot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub t: f64,
    pub theta: f64,
    pub psi: f64,
    pub loss: f64,
    pub penalty: f64,
}

pub fn curve_table(rule: ThresholdRule, lambda: f64, grid: &[f64]) -> Result<Vec<CurveRow>> {
    rule.validate()?;
    check_nonneg("lambda", lambda)?;
    if let Some(bad) = grid.iter().find(|t| !t.is_finite()) {
        return Err(crate::error::domain(
            "threshold",
            format!("curve grid must be finite, found {bad}"),
        ));
    }
    let form = PenaltyForm::canonical(rule);
    Ok(grid
        .iter()
        .map(|&t| CurveRow {
            t,
            theta: rule.threshold(t, lambda),
            psi: rule.psi(t, lambda),
            loss: rule.loss(t, lambda),
            penalty: penalty_unchecked(form, t, lambda),
        })
        .collect())
}

/// Writes a curve table as CSV with header `t,theta,psi,loss,penalty`.
pub fn write_curve_csv<W: Write>(rows: &[CurveRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "theta", "psi", "loss", "penalty"])?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            r.theta.to_string(),
            r.psi.to_string(),
            r.loss.to_string(),
            r.penalty.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn check_nonneg(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(IpodError::ParameterDomain { name, value })
    }
}
