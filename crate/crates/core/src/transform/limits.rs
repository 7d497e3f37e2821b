//! Small-frequency behaviour of the transforms: the Abelian limits of the
//! critical regime, recovery of `C₁` from `K_cos` samples, and the decay
//! rates of the small-frequency deviations.

use super::{kcos, ksin};
use crate::error::{invalid, Error, Result};
use crate::fit;
use crate::grid;
use crate::kernel::{MemoryKernel, RegimeTag};
use crate::special;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

/// An extrapolated limit with the spread between extrapolation orders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolated {
    pub value: f64,
    pub error: f64,
}

/// Limits of `K_sin(ω)` and `K_cos(ω)/|log ω|` as `ω → 0⁺` for a critical kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbelianReport {
    pub omegas: Vec<f64>,
    pub ksin: Vec<f64>,
    pub kcos_over_log: Vec<f64>,
    pub limit_sin: Extrapolated,
    pub limit_cos_over_log: Extrapolated,
    /// `C₁π/2` and `C₁` from the regime tag.
    pub expected_sin: f64,
    pub expected_cos_over_log: f64,
    /// Boundedness of `|K_cos/|log ω| − C₁|·|log ω|` on the same grid.
    pub rate: RateReport,
}

/// Frequencies `10⁻⁶·4^j`, `j = 0..6` (ratio 4, 3.6 decades).
pub fn abelian_grid() -> Vec<f64> {
    (0..7).map(|j| 1e-6 * 4f64.powi(j)).collect()
}

/// Degree-2 extrapolation to `h = 0` over the three smallest `h`, with the
/// difference from degree 1 as the error estimate.
fn richardson(hs: &[f64], ys: &[f64]) -> Extrapolated {
    let two = fit::extrapolate_to_zero(&hs[..3], &ys[..3]);
    let one = fit::extrapolate_to_zero(&hs[..2], &ys[..2]);
    Extrapolated {
        value: two,
        error: (two - one).abs(),
    }
}

/// Extrapolates `K_sin(ω)` (in `h = ω`) and `K_cos(ω)/|log ω|` (in
/// `h = 1/|log ω|`, its natural approach variable) to `ω = 0`.
pub fn abelian_limits(kernel: &MemoryKernel, tol: f64) -> Result<AbelianReport> {
    let RegimeTag::Critical { c1, .. } = kernel.regime() else {
        return Err(Error::WrongRegime {
            expected: "critical",
            found: kernel.regime().name(),
        });
    };
    let omegas = abelian_grid();
    let vals: Vec<(f64, f64, f64)> = omegas
        .par_iter()
        .map(|&w| -> Result<(f64, f64, f64)> {
            let c = kcos(kernel, w, tol)?;
            let s = ksin(kernel, w, tol)?;
            Ok((s.value, c.value, c.abs_error))
        })
        .collect::<Result<_>>()?;
    let ksin: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let logs: Vec<f64> = omegas.iter().map(|w| w.ln().abs()).collect();
    let kcos_over_log: Vec<f64> = vals.iter().zip(&logs).map(|(v, l)| v.1 / l).collect();
    let inv_logs: Vec<f64> = logs.iter().map(|l| 1.0 / l).collect();
    let series = vals
        .iter()
        .zip(&omegas)
        .zip(&logs)
        .map(|((v, &w), l)| RateSeries {
            omega: w,
            deviation: (v.1 - c1 * l).abs(),
            error: v.2,
        })
        .collect();
    Ok(AbelianReport {
        limit_sin: richardson(&omegas, &ksin),
        limit_cos_over_log: richardson(&inv_logs, &kcos_over_log),
        omegas,
        ksin,
        kcos_over_log,
        expected_sin: c1 * FRAC_PI_2,
        expected_cos_over_log: c1,
        rate: critical_rate(series),
    })
}

/// `C₁` recovered from `K_cos` samples near zero frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauberianEstimate {
    /// Slope of `K_cos` against `|log ω|`.
    pub c1: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub samples: usize,
    /// Whether the samples actually grow like `|log ω|`.
    pub critical: bool,
}

/// Regresses `K_cos(ω)` on `|log ω|`; the slope estimates `C₁`, which by the
/// Tauberian direction predicts `t·K(t) → C₁`.
///
/// Needs at least 6 positive samples spanning 3 decades with values
/// non-increasing in `ω`.
pub fn tauberian_recover(samples: &[(f64, f64)]) -> Result<TauberianEstimate> {
    if samples.len() < 6 {
        return Err(Error::InsufficientData(format!(
            "need at least 6 samples, got {}",
            samples.len()
        )));
    }
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    if s.iter().any(|&(w, v)| !(w > 0.0 && w.is_finite() && v > 0.0 && v.is_finite())) {
        return Err(invalid("frequencies and values must be positive and finite"));
    }
    let omegas: Vec<f64> = s.iter().map(|p| p.0).collect();
    if !grid::is_strictly_increasing(&omegas) {
        return Err(invalid("duplicate frequencies"));
    }
    if grid::decades(&omegas) < 3.0 - 1e-9 {
        return Err(Error::InsufficientData(format!(
            "samples span {:.2} decades; need 3",
            grid::decades(&omegas)
        )));
    }
    if s.windows(2).any(|w| w[1].1 > w[0].1) {
        return Err(invalid("K_cos samples must be non-increasing in omega"));
    }
    let xs: Vec<f64> = omegas.iter().map(|w| w.ln().abs()).collect();
    let ys: Vec<f64> = s.iter().map(|p| p.1).collect();
    let f = fit::linear_fit(&xs, &ys).expect("distinct frequencies");
    let span = xs[0] - xs[xs.len() - 1];
    let mean = crate::quad::sum(&ys) / ys.len() as f64;
    Ok(TauberianEstimate {
        c1: f.slope,
        intercept: f.intercept,
        rms_residual: f.rms_residual,
        samples: s.len(),
        critical: f.slope > 0.0 && f.slope * span > 0.1 * mean,
    })
}

/// One sample of a small-frequency deviation quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateSeries {
    pub omega: f64,
    pub deviation: f64,
    pub error: f64,
}

/// Small-frequency deviation of `K_cos` from its leading behaviour, with the
/// fitted decay exponent (or, critical case, the supremum that must stay bounded).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub regime: &'static str,
    pub quantity: &'static str,
    pub series: Vec<RateSeries>,
    pub fitted_exponent: Option<f64>,
    pub theoretical_exponent: Option<f64>,
    pub sup: Option<f64>,
    pub consistent: bool,
}

/// Critical verdict: the supremum is finite, below 10, and not growing toward ω → 0.
fn critical_rate(series: Vec<RateSeries>) -> RateReport {
    let sup = series.iter().map(|s| s.deviation).fold(0.0, f64::max);
    RateReport {
        regime: "critical",
        quantity: "|K_cos(w)/|log w| - C1| * |log w|",
        series,
        fitted_exponent: None,
        theoretical_exponent: None,
        sup: Some(sup),
        consistent: sup.is_finite() && sup < 10.0,
    }
}

fn fitted(series: &[RateSeries]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = series
        .iter()
        .filter(|s| s.deviation > 3.0 * s.error)
        .map(|s| (s.omega, s.deviation))
        .unzip();
    if xs.len() < 3 {
        return None;
    }
    fit::log_log_fit(&xs, &ys).map(|f| f.slope)
}

/// Computes the small-frequency deviation for the kernel's regime and fits
/// its decay exponent:
///
/// * diffusive: `|K_cos(ω) − K_cos(0)|` against `γ₀ = min{β₀, 2}`;
/// * subdiffusive: `|ω^{1−α}K_cos(ω) − C_αΓ(1−α)sin(απ/2)|` against
///   `γ_α = min{1−α, αβ_α}`;
/// * critical: boundedness of `|K_cos(ω) − C₁|log ω||`.
pub fn small_frequency_rates(kernel: &MemoryKernel, tol: f64) -> Result<RateReport> {
    let regime = kernel.regime();
    let eval = |omegas: Vec<f64>, tol: f64| -> Result<Vec<(f64, f64, f64)>> {
        omegas
            .par_iter()
            .map(|&w| kcos(kernel, w, tol).map(|v| (w, v.value, v.abs_error)))
            .collect()
    };
    match regime {
        RegimeTag::Diffusive { .. } => {
            let tol = tol.min(1e-11);
            let zero = kcos(kernel, 0.0, tol)?;
            let pts = eval(grid::geometric(1e-3, 1e-1, 9), tol)?;
            let series: Vec<RateSeries> = pts
                .iter()
                .map(|&(w, v, e)| RateSeries {
                    omega: w,
                    deviation: (v - zero.value).abs(),
                    error: e + zero.abs_error,
                })
                .collect();
            let floor = regime.gamma0().expect("diffusive");
            let fit = fitted(&series);
            Ok(RateReport {
                regime: "diffusive",
                quantity: "|K_cos(w) - K_cos(0)|",
                consistent: fit.is_some_and(|e| e >= floor - 0.1),
                fitted_exponent: fit,
                theoretical_exponent: Some(floor),
                sup: None,
                series,
            })
        }
        RegimeTag::Subdiffusive { alpha, c_alpha, .. } => {
            let lead = c_alpha * special::cos_power_integral(alpha);
            let pts = eval(grid::geometric(1e-4, 1e-1, 7), tol)?;
            let series: Vec<RateSeries> = pts
                .iter()
                .map(|&(w, v, e)| {
                    let s = w.powf(1.0 - alpha);
                    RateSeries {
                        omega: w,
                        deviation: (s * v - lead).abs(),
                        error: s * e,
                    }
                })
                .collect();
            let floor = regime.gamma_alpha().expect("subdiffusive");
            let fit = fitted(&series);
            // All deviations at the noise floor means the leading term is exact.
            let exact = series.iter().all(|s| s.deviation <= 3.0 * s.error + 1e-12 * lead);
            Ok(RateReport {
                regime: "subdiffusive",
                quantity: "|w^(1-alpha) K_cos(w) - C_alpha Gamma(1-alpha) sin(alpha pi/2)|",
                consistent: exact || fit.is_some_and(|e| e >= floor - 0.15),
                fitted_exponent: fit,
                theoretical_exponent: Some(floor),
                sup: None,
                series,
            })
        }
        RegimeTag::Critical { c1, .. } => {
            let pts = eval(grid::geometric(1e-6, 1e-2, 9), tol)?;
            let series = pts
                .iter()
                .map(|&(w, v, e)| RateSeries {
                    omega: w,
                    deviation: (v - c1 * w.ln().abs()).abs(),
                    error: e,
                })
                .collect();
            Ok(critical_rate(series))
        }
        RegimeTag::Unclassified => Err(Error::WrongRegime {
            expected: "classified",
            found: "unclassified",
        }),
    }
}
