//! Memory kernels `K(t)`, their tail-regime metadata, and a numerical
//! checker for the standing kernel hypotheses.
//!
//! Every kernel is stored for `t > 0`; the symmetric extension
//! `K(-t) = K(t)` is implicit and [`MemoryKernel::eval`] folds negative
//! arguments onto the positive axis.

mod table;
mod validate;

pub use table::KernelTable;
pub use validate::{
    validate_assumptions, AssumptionReport, ConditionCheck, GridPoint, Verdict, EVENTUAL_DECREASE, KCOS_POSITIVITY,
    POSITIVITY, TAIL_CONSTANT, TAIL_RATE,
};

use crate::error::{invalid, Error, Result};
use crate::special;
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

/// Large-time behaviour of a kernel, with the constants the rate theorems consume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum RegimeTag {
    /// Integrable kernel with `t^β₀ K(t)` integrable.
    Diffusive { beta0: f64 },
    /// `|t^α K(t) − C_α| = O(t^{−β_α})`, `α ∈ (0,1)`. `beta_alpha = ∞` marks an exact power law.
    Subdiffusive {
        alpha: f64,
        c_alpha: f64,
        beta_alpha: f64,
    },
    /// `|t K(t) − C₁| = O(t^{−β₁})`.
    Critical { c1: f64, beta1: f64 },
    Unclassified,
}

impl RegimeTag {
    pub fn diffusive(beta0: f64) -> Result<Self> {
        if !(beta0 > 0.0) {
            return Err(invalid(format!("beta0 must be positive, got {beta0}")));
        }
        Ok(RegimeTag::Diffusive { beta0 })
    }

    pub fn subdiffusive(alpha: f64, c_alpha: f64, beta_alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("subdiffusive alpha must lie in (0,1), got {alpha}")));
        }
        if !(c_alpha > 0.0) || !(beta_alpha > 0.0) {
            return Err(invalid("subdiffusive constants must be positive"));
        }
        Ok(RegimeTag::Subdiffusive {
            alpha,
            c_alpha,
            beta_alpha,
        })
    }

    pub fn critical(c1: f64, beta1: f64) -> Result<Self> {
        if !(c1 > 0.0) || !(beta1 > 0.0) {
            return Err(invalid("critical constants must be positive"));
        }
        Ok(RegimeTag::Critical { c1, beta1 })
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegimeTag::Diffusive { .. } => "diffusive",
            RegimeTag::Subdiffusive { .. } => "subdiffusive",
            RegimeTag::Critical { .. } => "critical",
            RegimeTag::Unclassified => "unclassified",
        }
    }

    /// True when `∫₀^∞ K` is finite.
    pub fn is_integrable(&self) -> bool {
        matches!(self, RegimeTag::Diffusive { .. })
    }

    /// Power `κ` such that `t^κ K(t)` tends to the tail constant.
    pub fn tail_power(&self) -> Option<f64> {
        match *self {
            RegimeTag::Diffusive { .. } => Some(1.0),
            RegimeTag::Subdiffusive { alpha, .. } => Some(alpha),
            RegimeTag::Critical { .. } => Some(1.0),
            RegimeTag::Unclassified => None,
        }
    }

    /// `γ₀ = min{β₀, 2}` (diffusive small-frequency exponent).
    pub fn gamma0(&self) -> Option<f64> {
        match *self {
            RegimeTag::Diffusive { beta0 } => Some(beta0.min(2.0)),
            _ => None,
        }
    }

    /// `γ_α = min{1−α, αβ_α}` (subdiffusive small-frequency exponent).
    pub fn gamma_alpha(&self) -> Option<f64> {
        match *self {
            RegimeTag::Subdiffusive {
                alpha, beta_alpha, ..
            } => Some((1.0 - alpha).min(alpha * beta_alpha)),
            _ => None,
        }
    }

    fn scaled(self, c: f64) -> Self {
        match self {
            RegimeTag::Subdiffusive {
                alpha,
                c_alpha,
                beta_alpha,
            } => RegimeTag::Subdiffusive {
                alpha,
                c_alpha: c_alpha * c,
                beta_alpha,
            },
            RegimeTag::Critical { c1, beta1 } => RegimeTag::Critical { c1: c1 * c, beta1 },
            other => other,
        }
    }
}

impl fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RegimeTag::Diffusive { beta0 } => write!(f, "diffusive(beta0={beta0})"),
            RegimeTag::Subdiffusive {
                alpha,
                c_alpha,
                beta_alpha,
            } => write!(
                f,
                "subdiffusive(alpha={alpha}, c_alpha={c_alpha}, beta_alpha={beta_alpha})"
            ),
            RegimeTag::Critical { c1, beta1 } => write!(f, "critical(c1={c1}, beta1={beta1})"),
            RegimeTag::Unclassified => write!(f, "unclassified"),
        }
    }
}

/// Which constructor produced a kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Exponential { lambda: f64 },
    PowerLaw { alpha: f64 },
    PurePower { alpha: f64 },
    Tabulated { samples: usize },
    Custom { name: String },
}

type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type ClosedFormFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// A memory kernel: an evaluatable `K(t)` plus regime metadata.
///
/// Values are immutable after construction and cheap to clone.
#[derive(Clone)]
pub struct MemoryKernel {
    family: Family,
    scale: f64,
    eval: EvalFn,
    /// Exponent `a` with `K(t) ~ t^{-a}` as `t → 0⁺`, if singular.
    singularity: Option<f64>,
    regime: RegimeTag,
    decrease_onset: f64,
    support_end: Option<f64>,
    breakpoints: Vec<f64>,
    closed_form: Option<ClosedFormFn>,
}

impl fmt::Debug for MemoryKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MemoryKernel")
            .field("family", &self.family)
            .field("scale", &self.scale)
            .field("regime", &self.regime)
            .field("singularity", &self.singularity)
            .field("decrease_onset", &self.decrease_onset)
            .finish()
    }
}

impl MemoryKernel {
    /// `K(t) = e^{−λt}`.
    ///
    /// Any `β₀ > 0` satisfies the diffusive rate condition; the tag records
    /// `β₀ = 2` because only `γ₀ = min{β₀, 2}` is ever consumed.
    pub fn exponential(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("exponential rate must be positive, got {lambda}")));
        }
        Ok(MemoryKernel {
            family: Family::Exponential { lambda },
            scale: 1.0,
            eval: Arc::new(move |t: f64| (-lambda * t).exp()),
            singularity: None,
            regime: RegimeTag::Diffusive { beta0: 2.0 },
            decrease_onset: 0.0,
            support_end: None,
            breakpoints: Vec::new(),
            closed_form: Some(Arc::new(move |w: f64| {
                let d = lambda * lambda + w * w;
                (lambda / d, w / d)
            })),
        })
    }

    /// `K(t) = (1+t)^{−α}` for `α ∈ (0,1]`.
    ///
    /// `α < 1` is subdiffusive with `C_α = 1`, `β_α = 1`; `α = 1` is the
    /// critical kernel with `C₁ = 1`, `β₁ = 1`.
    pub fn power_law(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid(format!("power-law alpha must lie in (0,1], got {alpha}")));
        }
        let (regime, closed_form): (RegimeTag, Option<ClosedFormFn>) = if alpha == 1.0 {
            (
                RegimeTag::Critical { c1: 1.0, beta1: 1.0 },
                Some(Arc::new(critical_closed_form)),
            )
        } else {
            (
                RegimeTag::Subdiffusive {
                    alpha,
                    c_alpha: 1.0,
                    beta_alpha: 1.0,
                },
                None,
            )
        };
        let eval: EvalFn = if alpha == 1.0 {
            Arc::new(|t: f64| 1.0 / (1.0 + t))
        } else {
            Arc::new(move |t: f64| (1.0 + t).powf(-alpha))
        };
        Ok(MemoryKernel {
            family: Family::PowerLaw { alpha },
            scale: 1.0,
            eval,
            singularity: None,
            regime,
            decrease_onset: 0.0,
            support_end: None,
            breakpoints: Vec::new(),
            closed_form,
        })
    }

    /// `K(t) = t^{−α}` for `α ∈ (0,1)`; singular at the origin.
    pub fn pure_power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(invalid(format!("pure-power alpha must be positive, got {alpha}")));
        }
        if alpha >= 1.0 {
            return Err(invalid(format!(
                "pure-power alpha = {alpha} is not locally integrable at t = 0; need alpha < 1"
            )));
        }
        let g = special::gamma(1.0 - alpha);
        let (s, c) = (alpha * FRAC_PI_2).sin_cos();
        Ok(MemoryKernel {
            family: Family::PurePower { alpha },
            scale: 1.0,
            eval: Arc::new(move |t: f64| t.powf(-alpha)),
            singularity: Some(alpha),
            regime: RegimeTag::Subdiffusive {
                alpha,
                c_alpha: 1.0,
                beta_alpha: f64::INFINITY,
            },
            decrease_onset: 0.0,
            support_end: None,
            breakpoints: Vec::new(),
            closed_form: Some(Arc::new(move |w: f64| {
                let p = w.powf(alpha - 1.0) * g;
                (p * s, p * c)
            })),
        })
    }

    /// Kernel interpolated from `(t, K(t))` samples.
    ///
    /// Interpolation is linear in log-log space (semi-log on a segment that
    /// starts at `t = 0`, linear where a value is zero). Queries below the
    /// first sample return the first value; queries past the last sample
    /// follow the tail tag. Tabulated kernels are treated as non-singular.
    pub fn tabulated(samples: &[(f64, f64)], tail: RegimeTag) -> Result<Self> {
        let table = Arc::new(KernelTable::new(samples, tail)?);
        let onset = table.decrease_onset();
        let end = table.last_time();
        let breakpoints = table.times().to_vec();
        let t2 = Arc::clone(&table);
        Ok(MemoryKernel {
            family: Family::Tabulated {
                samples: samples.len(),
            },
            scale: 1.0,
            eval: Arc::new(move |t: f64| t2.eval(t)),
            singularity: None,
            regime: tail,
            decrease_onset: onset,
            support_end: matches!(tail, RegimeTag::Unclassified).then_some(end),
            breakpoints,
            closed_form: None,
        })
    }

    /// Arbitrary kernel given as a closure. `decrease_onset` is the time past
    /// which `K` is non-increasing.
    pub fn custom<F>(
        name: impl Into<String>,
        f: F,
        regime: RegimeTag,
        decrease_onset: f64,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(decrease_onset >= 0.0 && decrease_onset.is_finite()) {
            return Err(invalid("decrease onset must be finite and non-negative"));
        }
        Ok(MemoryKernel {
            family: Family::Custom { name: name.into() },
            scale: 1.0,
            eval: Arc::new(f),
            singularity: None,
            regime,
            decrease_onset,
            support_end: None,
            breakpoints: Vec::new(),
            closed_form: None,
        })
    }

    /// Marks the kernel as singular like `t^{-a}` at the origin.
    pub fn with_singularity(mut self, a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(invalid("singularity exponent must lie in (0,1)"));
        }
        self.singularity = Some(a);
        Ok(self)
    }

    /// `c·K(t)`; regime constants and closed forms scale along.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid(format!("scale factor must be positive, got {c}")));
        }
        let inner = Arc::clone(&self.eval);
        let closed_form = self.closed_form.as_ref().map(|cf| {
            let cf = Arc::clone(cf);
            Arc::new(move |w: f64| {
                let (a, b) = cf(w);
                (c * a, c * b)
            }) as ClosedFormFn
        });
        Ok(MemoryKernel {
            family: self.family.clone(),
            scale: self.scale * c,
            eval: Arc::new(move |t: f64| c * inner(t)),
            singularity: self.singularity,
            regime: self.regime.scaled(c),
            decrease_onset: self.decrease_onset,
            support_end: self.support_end,
            breakpoints: self.breakpoints.clone(),
            closed_form,
        })
    }

    /// `K(t)`; negative arguments use the symmetric extension.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t.abs())
    }

    /// `K(t)`, rejecting queries where the kernel is undefined (past the end
    /// of an unclassified table).
    pub fn try_eval(&self, t: f64) -> Result<f64> {
        let t = t.abs();
        if let Some(end) = self.support_end {
            if t > end {
                return Err(Error::OutsideTable { t, end });
            }
        }
        Ok(self.eval(t))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Short human-readable label, e.g. `power_law(alpha=0.5)`.
    pub fn label(&self) -> String {
        let base = match &self.family {
            Family::Exponential { lambda } => format!("exponential(lambda={lambda})"),
            Family::PowerLaw { alpha } => format!("power_law(alpha={alpha})"),
            Family::PurePower { alpha } => format!("pure_power(alpha={alpha})"),
            Family::Tabulated { samples } => format!("tabulated(samples={samples})"),
            Family::Custom { name } => name.clone(),
        };
        if self.scale == 1.0 {
            base
        } else {
            format!("{}*{base}", self.scale)
        }
    }

    pub fn regime(&self) -> RegimeTag {
        self.regime
    }

    pub fn singular_at_origin(&self) -> bool {
        self.singularity.is_some()
    }

    pub fn singularity_exponent(&self) -> Option<f64> {
        self.singularity
    }

    /// Time past which the kernel is non-increasing.
    pub fn decrease_onset(&self) -> f64 {
        self.decrease_onset
    }

    /// Last time at which the kernel is defined, if finite.
    pub fn support_end(&self) -> Option<f64> {
        self.support_end
    }

    /// Points where the kernel is only piecewise smooth (table nodes).
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form.is_some()
    }

    /// Exact `(K_cos(ω), K_sin(ω))` for `ω > 0`, when known.
    pub fn closed_form(&self, omega: f64) -> Option<(f64, f64)> {
        self.closed_form.as_ref().map(|cf| cf(omega))
    }
}

/// Exact transforms of `1/(1+t)` through the sine and cosine integrals.
fn critical_closed_form(w: f64) -> (f64, f64) {
    let (si, ci) = special::sici(w);
    let (s, c) = w.sin_cos();
    let aux = FRAC_PI_2 - si;
    (-c * ci + s * aux, s * ci + c * aux)
}
