//! Mean squared displacement from the spectral density,
//!
//! ```text
//! MSD(t) = 4∫₀^∞ (1 − cos tω)/ω² · r̂(ω) dω = 4t ∫₀^∞ (1 − cos z)/z² · r̂(z/t) dz,
//! ```
//!
//! the regime asymptotes `MSD ~ constant·g(t)`, and fits of the deviation
//! from them.
//!
//! The `z`-integral is split at `z₁ = 3.5π`. Below `z₁` the full integrand is
//! integrated adaptively on geometric panels. Above `z₁` the factor
//! `1 − cos z` is expanded: the smooth part `∫ r̂(z/t)/z² dz` is integrated in
//! `ω = z/t` up to a cut `Ω` past which an `ω^{-2}` majorant of `r̂` is
//! charged, and the oscillatory part `∫ cos z · r̂(z/t)/z² dz` is summed
//! half-period by half-period with Euler acceleration.

use crate::error::{invalid, Error, Result};
use crate::fit;
use crate::grid;
use crate::kernel::{RegimeTag, Verdict};
use crate::quad::{self, SeriesOptions, Tolerance};
use crate::spectral::{subdiffusive_rhat_limit, SpectralModel};
use crate::special;
use crate::transform;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// One MSD evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MsdValue {
    pub t: f64,
    pub value: f64,
    pub abs_error: f64,
}

/// MSD on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MsdCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    /// Label of the model's kernel.
    pub kernel: String,
    pub m: f64,
    pub beta: f64,
}

impl MsdCurve {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sub-curve restricted to `lo ≤ t ≤ hi`.
    pub fn window(&self, lo: f64, hi: f64) -> MsdCurve {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.times[i] >= lo && self.times[i] <= hi).collect();
        MsdCurve {
            times: keep.iter().map(|&i| self.times[i]).collect(),
            values: keep.iter().map(|&i| self.values[i]).collect(),
            errors: keep.iter().map(|&i| self.errors[i]).collect(),
            kernel: self.kernel.clone(),
            m: self.m,
            beta: self.beta,
        }
    }
}

const Z1: f64 = 3.5 * PI;
const Z_LO_FACTOR: f64 = 1e-10;

/// `(1 − cos z)/z²`, computed as `2 sin²(z/2)/z²` to avoid cancellation.
#[inline]
fn one_minus_cos_over_sq(z: f64) -> f64 {
    if z < 1e-4 {
        0.5 - z * z / 24.0
    } else {
        let s = (0.5 * z).sin();
        2.0 * s * s / (z * z)
    }
}

/// Panels of region C extrapolate reliably only past the peak of `r̂`, i.e.
/// `z ≳ 4·ω_peak·t`; capped at 64 panels, beyond which the spectral features
/// vary slowly on the panel scale.
fn accelerate_from(start: f64, omega_peak: f64, t: f64) -> f64 {
    start + (4.0 * omega_peak * t).min(64.0 * PI)
}

/// `MSD(t)` with relative tolerance `tol`.
pub fn msd(model: &SpectralModel, t: f64, tol: f64) -> Result<MsdValue> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("time must be positive and finite, got {t}")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let ttol = tol * 1e-2;
    let sup = model.rhat_sup();
    let failure = OnceLock::new();
    let rhat = |w: f64| match model.rhat(w, ttol) {
        Ok(v) => (v.rhat, v.abs_error),
        Err(e) => {
            let _ = failure.set(e);
            (0.0, 0.0)
        }
    };

    // Region A: [z_lo, z₁]; [0, z_lo] is charged via (1 − cos z)/z² ≤ 1/2.
    // When the integral is small (slow growth, large t) z_lo is pushed down
    // until that charge fits the budget.
    let region_a = |lo: f64, hi: f64| {
        quad::integrate_with_density(
            |z| {
                let g = one_minus_cos_over_sq(z);
                let (r, e) = rhat(z / t);
                (g * r, g * e)
            },
            &quad::geometric_breaks(lo, hi, 10.0),
            Tolerance::abs(0.0).with_rel(tol / 4.0),
        )
    };
    let mut z_lo = Z1 * Z_LO_FACTOR;
    let a = region_a(z_lo, Z1);
    if let Some(e) = failure.get() {
        return Err(e.clone());
    }
    let (mut a_value, mut a_error) = (a.value, a.total_error());
    let scale = a_value.abs().max(f64::MIN_POSITIVE);
    let budget = tol * scale / 8.0;
    if 0.5 * z_lo * sup > budget {
        let lower = (2.0 * budget / sup).max(f64::MIN_POSITIVE * 1e10);
        let extra = region_a(lower, z_lo);
        if let Some(e) = failure.get() {
            return Err(e.clone());
        }
        a_value += extra.value;
        a_error += extra.total_error();
        z_lo = lower;
    }
    let head_charge = 0.5 * z_lo * sup;

    // Region B in ω-space: ∫_{z₁}^∞ r̂(z/t)/z² dz = (1/t)∫_{ω₁}^∞ r̂(ω)/ω² dω.
    let w1 = Z1 / t;
    let w_cut = (1e3f64).max(1e3 * w1);
    let b = quad::integrate_with_density(
        |w| {
            let (r, e) = rhat(w);
            (r / (w * w), e / (w * w))
        },
        &quad::geometric_breaks(w1, w_cut, 10.0),
        Tolerance::abs(tol * scale * t / 8.0).with_rel(tol / 8.0),
    );
    if let Some(e) = failure.get() {
        return Err(e.clone());
    }
    let (rc, ec) = rhat(w_cut);
    let b_tail = (rc + ec) / (3.0 * w_cut);

    // Region C: ∫_{z₁}^∞ cos z · r̂(z/t)/z² dz; z₁ is a zero of cos.
    let c = quad::panel_series(
        |z| {
            let (r, e) = rhat(z / t);
            let cz = z.cos();
            (cz * r / (z * z), e / (z * z))
        },
        Z1,
        PI,
        |z| sup / z,
        SeriesOptions {
            accelerate_from: accelerate_from(Z1, model.rhat_peak(), t),
            ..SeriesOptions::new(tol * scale / 8.0)
        },
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }

    let integral = a_value + b.value / t - c.value;
    let err = a_error + head_charge + (b.total_error() + b_tail) / t + c.quad_error + c.remainder;
    Ok(MsdValue {
        t,
        value: (4.0 * t * integral).max(0.0),
        abs_error: 4.0 * t * err,
    })
}

/// [`msd`] on a positive, strictly increasing grid, evaluated in parallel.
pub fn msd_curve(model: &SpectralModel, times: &[f64], tol: f64) -> Result<MsdCurve> {
    if times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(invalid("time grid must be positive and finite"));
    }
    if !grid::is_strictly_increasing(times) {
        return Err(invalid("time grid must be strictly increasing"));
    }
    // Warm the shared supremum estimate before fanning out.
    if !times.is_empty() {
        model.rhat_sup();
    }
    let pts: Vec<MsdValue> = times
        .par_iter()
        .map(|&t| msd(model, t, tol))
        .collect::<Result<_>>()?;
    Ok(MsdCurve {
        times: times.to_vec(),
        values: pts.iter().map(|p| p.value).collect(),
        errors: pts.iter().map(|p| p.abs_error).collect(),
        kernel: model.kernel().label(),
        m: model.m(),
        beta: model.beta(),
    })
}

/// Growth law `g(t)` of the MSD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trend {
    /// `g(t) = t`.
    Linear,
    /// `g(t) = t^α`.
    Power { alpha: f64 },
    /// `g(t) = t / log t`.
    LinearOverLog,
}

impl Trend {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Trend::Linear => t,
            Trend::Power { alpha } => t.powf(alpha),
            Trend::LinearOverLog => t / t.ln(),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Trend::Linear => "t".into(),
            Trend::Power { alpha } => format!("t^{alpha}"),
            Trend::LinearOverLog => "t/log(t)".into(),
        }
    }
}

/// Predicted decay of `MSD/g − constant`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rate {
    /// `O(t^{-exponent})`.
    Power { exponent: f64 },
    /// `O(1/log t)`.
    InverseLog,
}

/// Trend, constant and predicted deviation rate of a regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoteSpec {
    pub regime: &'static str,
    pub trend: Trend,
    pub constant: f64,
    pub predicted_rate: Rate,
}

/// Subdiffusive constant in its original form:
/// `−4 I_c Γ(−α) cos(απ/2) / (πβC_α(I_c² + I_s²))`.
pub fn subdiffusive_constant(alpha: f64, c_alpha: f64, beta: f64) -> f64 {
    // 4·lim r̂(ω)/ω^{1−α} times ∫₀^∞ (1 − cos z)/z^{1+α} dz = −Γ(−α)cos(απ/2).
    let plateau = subdiffusive_rhat_limit(alpha, c_alpha, beta);
    -4.0 * plateau * special::gamma(-alpha) * (alpha * PI / 2.0).cos()
}

/// The same constant after `I_c² + I_s² = Γ(1−α)²` and `−αΓ(−α) = Γ(1−α)`:
/// `2 sin(απ) / (απβC_α)`.
pub fn subdiffusive_constant_simplified(alpha: f64, c_alpha: f64, beta: f64) -> f64 {
    2.0 * (alpha * PI).sin() / (alpha * PI * beta * c_alpha)
}

/// Asymptote of the model's regime:
///
/// * diffusive: `2t/(βK_cos(0))`, deviation `O(t^{−γ₀/2})`;
/// * subdiffusive: `constant·t^α`, deviation `O(t^{−η/2})`, `η = min{α, 1−α, αβ_α}`;
/// * critical: `2t/(βC₁ log t)`, deviation `O(1/log t)`.
pub fn asymptotic_constant(model: &SpectralModel, tol: f64) -> Result<AsymptoteSpec> {
    let beta = model.beta();
    match model.kernel().regime() {
        regime @ RegimeTag::Diffusive { .. } => {
            let k0 = transform::kcos(model.kernel(), 0.0, tol)?;
            Ok(AsymptoteSpec {
                regime: "diffusive",
                trend: Trend::Linear,
                constant: 2.0 / (beta * k0.value),
                predicted_rate: Rate::Power {
                    exponent: regime.gamma0().expect("diffusive") / 2.0,
                },
            })
        }
        RegimeTag::Subdiffusive {
            alpha,
            c_alpha,
            beta_alpha,
        } => {
            let eta = alpha.min(1.0 - alpha).min(alpha * beta_alpha);
            Ok(AsymptoteSpec {
                regime: "subdiffusive",
                trend: Trend::Power { alpha },
                constant: subdiffusive_constant(alpha, c_alpha, beta),
                predicted_rate: Rate::Power { exponent: eta / 2.0 },
            })
        }
        RegimeTag::Critical { c1, .. } => Ok(AsymptoteSpec {
            regime: "critical",
            trend: Trend::LinearOverLog,
            constant: 2.0 / (beta * c1),
            predicted_rate: Rate::InverseLog,
        }),
        RegimeTag::Unclassified => Err(Error::WrongRegime {
            expected: "classified",
            found: "unclassified",
        }),
    }
}

/// Fit of the deviation `|MSD/g − constant|` over a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationFit {
    /// Fitted `δ̂` in `|MSD/g − constant| ~ t^{−δ̂}` (power-law regimes).
    pub exponent: Option<f64>,
    /// `sup |MSD/g − constant|·log t` over the window (critical regime).
    pub sup_product: Option<f64>,
    pub residual: Option<f64>,
    pub window: (f64, f64),
    pub points_used: usize,
    pub predicted: Rate,
    pub verdict: Verdict,
    pub detail: String,
}

pub const DIFFUSIVE_SLACK: f64 = 0.2;
pub const SUBDIFFUSIVE_SLACK: f64 = 0.1;
pub const CRITICAL_SUP_LIMIT: f64 = 20.0;

/// Compares a curve with its asymptote. The theorems give one-sided bounds,
/// so a faster decay than predicted passes; deviations at the noise level
/// give an inconclusive verdict rather than a failure.
pub fn deviation_fit(curve: &MsdCurve, spec: &AsymptoteSpec) -> Result<DeviationFit> {
    let n = curve.len();
    if n < 3 || curve.times[n - 1] < 100.0 * curve.times[0] {
        return Err(Error::InsufficientData(
            "deviation window must span at least two decades".into(),
        ));
    }
    let window = (curve.times[0], curve.times[n - 1]);
    let c = spec.constant;
    let ratio = |i: usize| curve.values[i] / spec.trend.eval(curve.times[i]);
    let noise = |i: usize| curve.errors[i] / spec.trend.eval(curve.times[i]);
    match spec.predicted_rate {
        Rate::Power { exponent } => {
            let slack = if spec.regime == "diffusive" {
                DIFFUSIVE_SLACK
            } else {
                SUBDIFFUSIVE_SLACK
            };
            let (xs, ys): (Vec<f64>, Vec<f64>) = (0..n)
                .map(|i| (curve.times[i], (ratio(i) - c).abs(), noise(i)))
                .filter(|&(_, d, e)| d > 3.0 * e && d > 1e-12 * c)
                .map(|(t, d, _)| (t, d))
                .unzip();
            let used = xs.len();
            let Some(f) = (used >= 3).then(|| fit::log_log_fit(&xs, &ys)).flatten() else {
                return Ok(DeviationFit {
                    exponent: None,
                    sup_product: None,
                    residual: None,
                    window,
                    points_used: used,
                    predicted: spec.predicted_rate,
                    verdict: Verdict::Inconclusive,
                    detail: format!("only {used} points resolve the deviation above quadrature error"),
                });
            };
            let delta = -f.slope;
            let pass = delta >= exponent - slack;
            Ok(DeviationFit {
                exponent: Some(delta),
                sup_product: None,
                residual: Some(f.rms_residual),
                window,
                points_used: used,
                predicted: spec.predicted_rate,
                verdict: if pass { Verdict::Pass } else { Verdict::Fail },
                detail: format!("fitted {delta:.3} against predicted {exponent} (slack {slack})"),
            })
        }
        Rate::InverseLog => {
            let prods: Vec<(f64, f64)> = (0..n)
                .filter(|&i| curve.times[i] > std::f64::consts::E)
                .map(|i| (curve.times[i], (ratio(i) - c).abs() * curve.times[i].ln()))
                .collect();
            if prods.len() < 4 {
                return Err(Error::InsufficientData("need at least 4 times with log t > 1".into()));
            }
            let sup = prods.iter().map(|p| p.1).fold(0.0, f64::max);
            let half = prods.len() / 2;
            let first = prods[..half].iter().map(|p| p.1).fold(0.0, f64::max);
            let last = prods[half..].iter().map(|p| p.1).fold(0.0, f64::max);
            let no_growth = last <= 1.25 * first;
            let pass = sup.is_finite() && sup < CRITICAL_SUP_LIMIT && no_growth;
            Ok(DeviationFit {
                exponent: None,
                sup_product: Some(sup),
                residual: None,
                window,
                points_used: prods.len(),
                predicted: spec.predicted_rate,
                verdict: if pass { Verdict::Pass } else { Verdict::Fail },
                detail: format!(
                    "sup {sup:.4} (limit {CRITICAL_SUP_LIMIT}); max over late half {last:.4} vs early half {first:.4}"
                ),
            })
        }
    }
}

/// Exponent and log-correction flag read off an MSD curve alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    /// Slope of `log MSD` against `log t`.
    pub alpha_hat: f64,
    /// Set when `MSD·log t` is materially closer to a power law than `MSD`.
    pub log_flag: bool,
    pub plain_residual: f64,
    pub log_residual: f64,
}

/// Fits `log MSD` against `log t`, then checks whether `log(MSD·log t)` fits
/// a line with under half the residual.
pub fn classify_from_msd(curve: &MsdCurve) -> Result<Classification> {
    let idx: Vec<usize> = (0..curve.len())
        .filter(|&i| curve.times[i] > std::f64::consts::E && curve.values[i] > 0.0)
        .collect();
    let times: Vec<f64> = idx.iter().map(|&i| curve.times[i]).collect();
    if times.len() < 4 || grid::decades(&times) < 3.0 - 1e-9 {
        return Err(Error::InsufficientData(
            "classification needs at least 3 decades of times above e".into(),
        ));
    }
    let lx: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let plain: Vec<f64> = idx.iter().map(|&i| curve.values[i].ln()).collect();
    let corrected: Vec<f64> = plain.iter().zip(&lx).map(|(y, x)| y + x.ln()).collect();
    let p = fit::linear_fit(&lx, &plain).expect("distinct times");
    let l = fit::linear_fit(&lx, &corrected).expect("distinct times");
    Ok(Classification {
        alpha_hat: p.slope,
        log_flag: l.rms_residual < 0.5 * p.rms_residual,
        plain_residual: p.rms_residual,
        log_residual: l.rms_residual,
    })
}
