//! Spectral density of the reduced GLE `m·dv = −β(K∗v) dt + noise`,
//!
//! ```text
//! r̂(ω) = (1/π) · βK_cos(ω) / ([βK_cos(ω)]² + [mω − βK_sin(ω)]²),
//! ```
//!
//! its regime-dependent behaviour at small `ω`, and a numerical check that it
//! is integrable.

use crate::error::{invalid, Error, Result};
use crate::fit;
use crate::grid;
use crate::kernel::{MemoryKernel, RegimeTag};
use crate::quad::{self, Tolerance};
use crate::special;
use crate::transform::{self, TransformValue};
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Mass, drag and memory kernel of the reduced GLE.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    m: f64,
    beta: f64,
    kernel: MemoryKernel,
    /// `(sup r̂ estimate, location of the sampled maximum)`.
    sup: OnceLock<(f64, f64)>,
}

/// `r̂(ω)` with its propagated error and the transforms it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralValue {
    pub omega: f64,
    pub rhat: f64,
    pub abs_error: f64,
    pub kcos: f64,
    pub ksin: f64,
}

impl SpectralValue {
    /// The bound `1/(πβK_cos(ω))`, which `r̂` never exceeds.
    pub fn plateau_bound(&self, beta: f64) -> f64 {
        1.0 / (PI * beta * self.kcos)
    }
}

impl SpectralModel {
    pub fn new(m: f64, beta: f64, kernel: MemoryKernel) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(invalid(format!("mass must be positive, got {m}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid(format!("beta must be positive, got {beta}")));
        }
        Ok(SpectralModel {
            m,
            beta,
            kernel,
            sup: OnceLock::new(),
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn kernel(&self) -> &MemoryKernel {
        &self.kernel
    }

    /// `r̂(ω)`, even in `ω`. Errors of the transforms are propagated through
    /// the first-order sensitivities of the rational expression.
    pub fn rhat(&self, omega: f64, tol: f64) -> Result<SpectralValue> {
        if omega == 0.0 || !omega.is_finite() {
            return Err(invalid("r̂ is evaluated only at finite non-zero omega"));
        }
        let w = omega.abs();
        let c = transform::kcos(&self.kernel, w, tol)?;
        let s = transform::ksin(&self.kernel, w, tol)?;
        self.compose(omega, c, s)
    }

    fn compose(&self, omega: f64, c: TransformValue, s: TransformValue) -> Result<SpectralValue> {
        let w = omega.abs();
        if c.value <= 0.0 {
            return Err(Error::ModelInvalid(format!(
                "K_cos({w:e}) = {:e} is not positive, so the kernel violates positivity of its cosine transform",
                c.value
            )));
        }
        let b = self.beta;
        let bc = b * c.value;
        let d = self.m * w - b * s.value;
        let den = bc * bc + d * d;
        let r = bc / (PI * den);
        let dr_dc = b * (d * d - bc * bc) / (PI * den * den);
        let dr_ds = 2.0 * b * bc * d / (PI * den * den);
        let err = dr_dc.abs() * c.abs_error + dr_ds.abs() * s.abs_error + 4.0 * f64::EPSILON * r;
        Ok(SpectralValue {
            omega,
            rhat: r,
            abs_error: err,
            kcos: c.value,
            ksin: s.value,
        })
    }

    /// Estimate of `sup r̂` from a log grid over `[10⁻⁸, 10⁴]` with a 50%
    /// safety margin. Computed once per model.
    pub fn rhat_sup(&self) -> f64 {
        self.peak_scan().0
    }

    /// Frequency of the largest sampled `r̂` on the same grid.
    pub fn rhat_peak(&self) -> f64 {
        self.peak_scan().1
    }

    fn peak_scan(&self) -> (f64, f64) {
        *self.sup.get_or_init(|| {
            let (mut best, mut at) = (0.0f64, 1.0);
            for w in grid::geometric(1e-8, 1e4, 61) {
                if let Ok(v) = self.rhat(w, 1e-9) {
                    if v.rhat + v.abs_error > best {
                        best = v.rhat + v.abs_error;
                        at = w;
                    }
                }
            }
            (1.5 * best, at)
        })
    }
}

/// Theoretical and observed small-frequency behaviour of `r̂`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NearZero {
    pub regime: &'static str,
    /// The quantity that tends to `limit`: `r̂(ω)`, `r̂(ω)/ω^{1−α}` or `|log ω|·r̂(ω)`.
    pub quantity: &'static str,
    pub limit: f64,
    pub omegas: Vec<f64>,
    pub observed: Vec<f64>,
    /// Observed quantity extrapolated to `ω = 0`.
    pub extrapolated: f64,
    /// Decay exponent of `|observed − limit|` (power-law regimes).
    pub fitted_exponent: Option<f64>,
    pub predicted_exponent: Option<f64>,
}

/// `lim r̂(ω)/ω^{1−α}` for a subdiffusive kernel:
/// `I_c / (πβC_α(I_c² + I_s²))` with `I_c = ∫₀^∞ cos z/z^α dz`, `I_s = ∫₀^∞ sin z/z^α dz`.
pub fn subdiffusive_rhat_limit(alpha: f64, c_alpha: f64, beta: f64) -> f64 {
    let ic = special::cos_power_integral(alpha);
    let is = special::sin_power_integral(alpha);
    ic / (PI * beta * c_alpha * (ic * ic + is * is))
}

/// Describes and numerically verifies the small-`ω` asymptote of `r̂`:
///
/// * diffusive: `r̂(0⁺) = 1/(πβK_cos(0))`;
/// * subdiffusive: `r̂(ω)/ω^{1−α}` tends to [`subdiffusive_rhat_limit`];
/// * critical: `|log ω|·r̂(ω) → 1/(πβC₁)`.
pub fn rhat_near_zero(model: &SpectralModel, tol: f64) -> Result<NearZero> {
    let beta = model.beta;
    let eval = |omegas: &[f64], tol: f64| -> Result<Vec<f64>> {
        use rayon::prelude::*;
        omegas.par_iter().map(|&w| model.rhat(w, tol).map(|v| v.rhat)).collect()
    };
    let fit_decay = |omegas: &[f64], obs: &[f64], limit: f64| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = omegas
            .iter()
            .zip(obs)
            .map(|(&w, &o)| (w, (o - limit).abs()))
            .filter(|&(_, d)| d > 1e-9 * limit.abs())
            .unzip();
        if xs.len() < 3 {
            return None;
        }
        fit::log_log_fit(&xs, &ys).map(|f| f.slope)
    };
    match model.kernel.regime() {
        regime @ RegimeTag::Diffusive { .. } => {
            let tol = tol.min(1e-11);
            let k0 = transform::kcos(&model.kernel, 0.0, tol)?;
            let limit = 1.0 / (PI * beta * k0.value);
            let omegas = grid::geometric(1e-3, 1e-1, 9);
            let observed = eval(&omegas, tol)?;
            Ok(NearZero {
                regime: "diffusive",
                quantity: "rhat(w)",
                limit,
                extrapolated: fit::extrapolate_to_zero(&omegas[..3], &observed[..3]),
                fitted_exponent: fit_decay(&omegas, &observed, limit),
                predicted_exponent: regime.gamma0(),
                omegas,
                observed,
            })
        }
        regime @ RegimeTag::Subdiffusive { alpha, c_alpha, .. } => {
            let limit = subdiffusive_rhat_limit(alpha, c_alpha, beta);
            let omegas = grid::geometric(1e-6, 1e-2, 9);
            let observed: Vec<f64> = eval(&omegas, tol)?
                .into_iter()
                .zip(&omegas)
                .map(|(r, w)| r / w.powf(1.0 - alpha))
                .collect();
            let gamma = regime.gamma_alpha().expect("subdiffusive");
            let hs: Vec<f64> = omegas.iter().map(|w| w.powf(gamma)).collect();
            Ok(NearZero {
                regime: "subdiffusive",
                quantity: "rhat(w)/w^(1-alpha)",
                limit,
                extrapolated: fit::extrapolate_to_zero(&hs[..2], &observed[..2]),
                fitted_exponent: fit_decay(&omegas, &observed, limit),
                predicted_exponent: Some(gamma),
                omegas,
                observed,
            })
        }
        RegimeTag::Critical { c1, .. } => {
            let limit = 1.0 / (PI * beta * c1);
            let omegas = transform::abelian_grid();
            let observed: Vec<f64> = eval(&omegas, tol)?
                .into_iter()
                .zip(&omegas)
                .map(|(r, w)| r * w.ln().abs())
                .collect();
            let hs: Vec<f64> = omegas.iter().map(|w| 1.0 / w.ln().abs()).collect();
            Ok(NearZero {
                regime: "critical",
                quantity: "|log w| rhat(w)",
                limit,
                extrapolated: fit::extrapolate_to_zero(&hs[..3], &observed[..3]),
                fitted_exponent: None,
                predicted_exponent: None,
                omegas,
                observed,
            })
        }
        RegimeTag::Unclassified => Err(Error::WrongRegime {
            expected: "classified",
            found: "unclassified",
        }),
    }
}

/// `∫_ℝ r̂` split as quadrature over `(0, Ω]` plus an `ω^{-2}` majorant beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrabilityReport {
    /// `∫_ℝ r̂ = 2∫₀^∞ r̂`.
    pub total: f64,
    pub abs_error: f64,
    pub omega_cut: f64,
    /// `2∫_Ω^∞ r̂(Ω)Ω²/ω² dω`, charged as error.
    pub tail_majorant: f64,
    /// `r̂` at the smallest evaluated frequency.
    pub rhat_near_origin: f64,
}

pub const DEFAULT_OMEGA_CUT: f64 = 1e3;

/// Integrates `r̂` numerically; a non-positive `K_cos` anywhere on the path
/// makes the model invalid.
pub fn check_integrability(model: &SpectralModel, omega_cut: f64, tol: f64) -> Result<IntegrabilityReport> {
    if !(omega_cut > 1e-6) {
        return Err(invalid("cut frequency must exceed 1e-6"));
    }
    const W0: f64 = 1e-8;
    let failure = OnceLock::new();
    let f = |w: f64| match model.rhat(w, tol * 1e-2) {
        Ok(v) => (v.rhat, v.abs_error),
        Err(e) => {
            let _ = failure.set(e);
            (0.0, 0.0)
        }
    };
    let q = quad::integrate_with_density(
        f,
        &quad::geometric_breaks(W0, omega_cut, 10.0),
        Tolerance::abs(tol / 4.0).with_rel(tol),
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let at_cut = model.rhat(omega_cut, tol * 1e-2)?;
    let near = model.rhat(W0, tol * 1e-2)?;
    let tail = 2.0 * (at_cut.rhat + at_cut.abs_error) * omega_cut;
    let head_charge = 2.0 * W0 * model.rhat_sup();
    Ok(IntegrabilityReport {
        total: 2.0 * q.value,
        abs_error: 2.0 * q.total_error() + tail + head_charge,
        omega_cut,
        tail_majorant: tail,
        rhat_near_origin: near.rhat,
    })
}
