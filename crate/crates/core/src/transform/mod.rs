//! Fourier-type transforms of a memory kernel,
//!
//! ```text
//! K_cos(ω) = ∫₀^∞ K(t) cos(tω) dt,   K_sin(ω) = ∫₀^∞ K(t) sin(tω) dt,
//! ```
//!
//! computed as improper oscillatory integrals with a certified error.
//!
//! The head `[0, T₀]` (up to the first zero of the trigonometric factor past
//! the kernel's decrease onset) is integrated adaptively; an `x^{-a}`
//! singularity at the origin is removed by the substitution `u = t^{1−a}`.
//! Past `T₀` the integrand alternates in sign every half period `π/ω`, so the
//! panel integrals form an alternating series. It is summed with Euler
//! acceleration, or truncated at a cutoff `T` where the remainder bound
//! `4K(T)/|ω|` is charged, whichever certifies the smaller error.

mod limits;

pub use limits::{
    abelian_grid, abelian_limits, small_frequency_rates, tauberian_recover, AbelianReport,
    Extrapolated, RateReport, RateSeries, TauberianEstimate,
};

use crate::error::{invalid, Error, Result};
use crate::kernel::MemoryKernel;
use crate::quad::{self, SeriesOptions, TailMethod, Tolerance};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// A computed `K_cos(ω)` or `K_sin(ω)` with its error certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformValue {
    pub value: f64,
    /// Quadrature error plus the charged remainder.
    pub abs_error: f64,
    /// Where panel integration stopped.
    pub cutoff_time: f64,
    /// Remainder charged for `∫_cutoff^∞`: either `4K(T)/|ω|` (truncated)
    /// or the acceleration's convergence estimate.
    pub tail_bound: f64,
    pub tail_method: TailMethod,
}

impl TransformValue {
    fn exact_zero() -> Self {
        TransformValue {
            value: 0.0,
            abs_error: 0.0,
            cutoff_time: 0.0,
            tail_bound: 0.0,
            tail_method: TailMethod::Truncated,
        }
    }

    fn negated(self) -> Self {
        TransformValue {
            value: -self.value,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Trig {
    Cos,
    Sin,
}

impl Trig {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Trig::Cos => x.cos(),
            Trig::Sin => x.sin(),
        }
    }
}

fn check_args(kernel: &MemoryKernel, omega: f64, tol: f64) -> Result<()> {
    if !omega.is_finite() {
        return Err(invalid(format!("omega must be finite, got {omega}")));
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    if let Some(end) = kernel.support_end() {
        return Err(Error::OutsideTable {
            t: f64::INFINITY,
            end,
        });
    }
    Ok(())
}

/// `K_cos(ω)`. Even in `ω`; at `ω = 0` this is `∫₀^∞ K`, which diverges
/// unless the kernel is diffusive.
pub fn kcos(kernel: &MemoryKernel, omega: f64, tol: f64) -> Result<TransformValue> {
    check_args(kernel, omega, tol)?;
    if omega == 0.0 {
        return kernel_integral(kernel, tol);
    }
    oscillatory(kernel, omega.abs(), Trig::Cos, tol)
}

/// `K_sin(ω)`. Odd in `ω`: computed at `|ω|` and sign-flipped.
pub fn ksin(kernel: &MemoryKernel, omega: f64, tol: f64) -> Result<TransformValue> {
    check_args(kernel, omega, tol)?;
    if omega == 0.0 {
        return Ok(TransformValue::exact_zero());
    }
    let v = oscillatory(kernel, omega.abs(), Trig::Sin, tol)?;
    Ok(if omega < 0.0 { v.negated() } else { v })
}

/// The remainder bound `4K(T)/|ω|` for `|∫_T^∞ K(s) trig(sω) ds|`.
///
/// Valid once `K` is non-increasing, so `T` before the kernel's decrease
/// onset is rejected.
pub fn tail_remainder_bound(kernel: &MemoryKernel, t: f64, omega: f64) -> Result<f64> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(invalid("tail bound needs a finite non-zero omega"));
    }
    if !(t > 0.0) || t < kernel.decrease_onset() {
        return Err(invalid(format!(
            "T = {t} precedes the decrease onset {} of the kernel",
            kernel.decrease_onset()
        )));
    }
    Ok(4.0 * kernel.try_eval(t)? / omega.abs())
}

/// Breakpoints for `[lo, hi]`: geometric (ratio 4) above `t = 1` plus table nodes.
fn head_breaks(kernel: &MemoryKernel, lo: f64, hi: f64) -> Vec<f64> {
    let mut b = vec![lo];
    let mut x = 1.0;
    while x < hi {
        if x > lo {
            b.push(x);
        }
        x *= 4.0;
    }
    let nodes = kernel.breakpoints();
    if nodes.len() <= 4000 {
        b.extend(nodes.iter().copied().filter(|&t| t > lo && t < hi));
    }
    b.push(hi);
    b.sort_by(|a, c| a.partial_cmp(c).expect("finite"));
    b.dedup();
    b
}

/// `∫₀^{hi} K(t) trig(ωt) dt`, treating a `t^{-a}` singularity at the origin.
fn head_integral(
    kernel: &MemoryKernel,
    omega: f64,
    trig: Trig,
    hi: f64,
    tol: f64,
) -> quad::Quadrature {
    let f = |t: f64| kernel.eval(t) * trig.apply(omega * t);
    match kernel.singularity_exponent() {
        Some(a) => {
            let t0 = hi.min(1.0).min(0.5 * PI / omega);
            let p = 1.0 / (1.0 - a);
            // t = u^p, dt = p u^{p-1} du and t^{-a} u^{p-1} = 1, so the integrand is smooth.
            let g = |u: f64| {
                let t = u.powf(p);
                kernel.eval(t) * t.powf(a) * trig.apply(omega * t) * p
            };
            let near = quad::integrate(g, &[0.0, t0.powf(1.0 - a)], Tolerance::abs(tol / 2.0).with_rel(REL_FLOOR));
            if t0 >= hi {
                return near;
            }
            let far = quad::integrate(f, &head_breaks(kernel, t0, hi), Tolerance::abs(tol / 2.0).with_rel(REL_FLOOR));
            quad::Quadrature {
                value: near.value + far.value,
                abs_error: near.abs_error + far.abs_error,
                propagated: 0.0,
                evaluations: near.evaluations + far.evaluations,
                converged: near.converged && far.converged,
            }
        }
        None => quad::integrate(f, &head_breaks(kernel, 0.0, hi), Tolerance::abs(tol).with_rel(REL_FLOOR)),
    }
}

const REL_FLOOR: f64 = 1e-12;

fn oscillatory(kernel: &MemoryKernel, omega: f64, trig: Trig, tol: f64) -> Result<TransformValue> {
    let half = PI / omega;
    let onset = kernel.decrease_onset();
    // First zero of the trigonometric factor at or past the onset.
    let start = match trig {
        Trig::Cos => {
            let k = (onset / half - 0.5).ceil().max(0.0);
            (k + 0.5) * half
        }
        Trig::Sin => {
            let k = (onset / half).ceil().max(1.0);
            k * half
        }
    };
    let head = head_integral(kernel, omega, trig, start, tol / 2.0);
    // Below ~1e-12 relative to the head, an absolute target is unreachable in f64.
    let series_tol = (tol / 2.0).max(REL_FLOOR * head.value.abs());
    let series = quad::panel_series(
        |t: f64| (kernel.eval(t) * trig.apply(omega * t), 0.0),
        start,
        half,
        |t: f64| 4.0 * kernel.eval(t) / omega,
        SeriesOptions::new(series_tol),
    );
    let value = head.value + series.value;
    if !value.is_finite() {
        return Err(Error::Divergent(format!(
            "transform of {} at omega = {omega} is not finite",
            kernel.label()
        )));
    }
    Ok(TransformValue {
        value,
        abs_error: head.abs_error + series.quad_error + series.remainder,
        cutoff_time: series.cutoff,
        tail_bound: series.remainder,
        tail_method: series.method,
    })
}

/// `K_cos(0) = ∫₀^∞ K(t) dt` for integrable kernels.
///
/// Integrates over geometric panels until the remaining tail, extrapolated
/// from the local log-log slope, is below tolerance; that extrapolated tail
/// is added and also charged as error.
pub fn kernel_integral(kernel: &MemoryKernel, tol: f64) -> Result<TransformValue> {
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    match kernel.regime() {
        crate::kernel::RegimeTag::Subdiffusive { .. } | crate::kernel::RegimeTag::Critical { .. } => {
            return Err(Error::Divergent(format!(
                "K_cos(0) = ∫K diverges for the {} kernel {}",
                kernel.regime().name(),
                kernel.label()
            )));
        }
        _ => {}
    }
    if let Some(end) = kernel.support_end() {
        return Err(Error::OutsideTable {
            t: f64::INFINITY,
            end,
        });
    }
    let head = head_integral(kernel, 0.0, Trig::Cos, 1.0, tol / 8.0);
    let mut total = quad::NeumaierSum::new();
    total.add(head.value);
    let mut err = head.abs_error;
    let mut lo = 1.0;
    const T_MAX: f64 = 1e15;
    loop {
        let hi = 4.0 * lo;
        let q = quad::integrate(
            |t| kernel.eval(t),
            &head_breaks(kernel, lo, hi),
            Tolerance::abs(tol / 64.0).with_rel(REL_FLOOR),
        );
        total.add(q.value);
        err += q.abs_error;
        lo = hi;
        let (k_hi, k_lo) = (kernel.eval(hi), kernel.eval(hi / 4.0));
        let tail = if k_hi <= 0.0 {
            Some(0.0)
        } else {
            let p = (k_lo / k_hi).ln() / 4f64.ln();
            (p > 1.05).then(|| k_hi * hi / (p - 1.0))
        };
        match tail {
            Some(tail) if tail <= tol / 4.0 && hi >= kernel.decrease_onset() => {
                total.add(tail);
                return Ok(TransformValue {
                    value: total.value(),
                    abs_error: err + tail,
                    cutoff_time: hi,
                    tail_bound: tail,
                    tail_method: TailMethod::Truncated,
                });
            }
            _ if hi >= T_MAX => {
                return Err(Error::Divergent(format!(
                    "∫K for {} did not settle by t = {T_MAX:e}",
                    kernel.label()
                )))
            }
            _ => {}
        }
    }
}

/// One row of [`transform_grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransformPoint {
    pub omega: f64,
    pub kcos: Result<TransformValue>,
    pub ksin: Result<TransformValue>,
}

/// `kcos` and `ksin` on a sorted positive grid, evaluated in parallel.
/// Failures are reported per point.
pub fn transform_grid(kernel: &MemoryKernel, omegas: &[f64], tol: f64) -> Result<Vec<TransformPoint>> {
    if omegas.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(invalid("frequency grid must be positive and finite"));
    }
    if !crate::grid::is_strictly_increasing(omegas) {
        return Err(invalid("frequency grid must be strictly increasing"));
    }
    Ok(omegas
        .par_iter()
        .map(|&omega| TransformPoint {
            omega,
            kcos: kcos(kernel, omega, tol),
            ksin: ksin(kernel, omega, tol),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp1() -> MemoryKernel {
        MemoryKernel::exponential(1.0).unwrap()
    }

    #[test]
    fn exponential_at_one() {
        let c = kcos(&exp1(), 1.0, 1e-10).unwrap();
        let s = ksin(&exp1(), 1.0, 1e-10).unwrap();
        assert!((c.value - 0.5).abs() < 1e-8, "{c:?}");
        assert!((s.value - 0.5).abs() < 1e-8, "{s:?}");
        assert!(c.tail_bound <= c.abs_error);
    }

    #[test]
    fn odd_and_even_symmetry_exact() {
        let k = MemoryKernel::power_law(0.5).unwrap();
        for w in [0.01, 2.0, 30.0] {
            assert_eq!(ksin(&k, -w, 1e-8).unwrap().value, -ksin(&k, w, 1e-8).unwrap().value);
            assert_eq!(kcos(&k, -w, 1e-8).unwrap().value, kcos(&k, w, 1e-8).unwrap().value);
        }
    }

    #[test]
    fn zero_frequency() {
        assert!(matches!(
            kcos(&MemoryKernel::power_law(1.0).unwrap(), 0.0, 1e-8),
            Err(Error::Divergent(_))
        ));
        assert!(matches!(
            kcos(&MemoryKernel::pure_power(0.3).unwrap(), 0.0, 1e-8),
            Err(Error::Divergent(_))
        ));
        let c0 = kcos(&exp1(), 0.0, 1e-10).unwrap();
        assert!((c0.value - 1.0).abs() < 1e-9, "{c0:?}");
        let c0 = kernel_integral(&MemoryKernel::exponential(4.0).unwrap(), 1e-10).unwrap();
        assert!((c0.value - 0.25).abs() < 1e-9);
        assert_eq!(ksin(&exp1(), 0.0, 1e-8).unwrap().value, 0.0);
    }

    #[test]
    fn tail_bound_formula() {
        let crit = MemoryKernel::power_law(1.0).unwrap();
        let b = tail_remainder_bound(&crit, 100.0, 1.0).unwrap();
        assert!((b - 4.0 / 101.0).abs() < 1e-15);
        let b = tail_remainder_bound(&exp1(), 20.0, 0.5).unwrap();
        assert!((b - 8.0 * (-20.0f64).exp()).abs() < 1e-22);
        assert!(tail_remainder_bound(&exp1(), 1.0, 0.0).is_err());
    }

    #[test]
    fn tail_bound_rejects_before_onset() {
        let k = MemoryKernel::custom("bumped", |t: f64| 1.0 / (1.0 + t), crate::kernel::RegimeTag::Unclassified, 5.0)
            .unwrap();
        assert!(tail_remainder_bound(&k, 2.0, 1.0).is_err());
        assert!(tail_remainder_bound(&k, 6.0, 1.0).is_ok());
    }

    #[test]
    fn pure_power_against_closed_form() {
        let k = MemoryKernel::pure_power(0.5).unwrap();
        for w in [1e-3, 0.1, 1.0, 10.0, 1e3] {
            let (ec, es) = k.closed_form(w).unwrap();
            let c = kcos(&k, w, 1e-8).unwrap();
            let s = ksin(&k, w, 1e-8).unwrap();
            assert!((c.value - ec).abs() <= c.abs_error.max(1e-9), "w={w} {c:?} vs {ec}");
            assert!((s.value - es).abs() <= s.abs_error.max(1e-9), "w={w} {s:?} vs {es}");
            assert!(c.abs_error <= 1e-6 && s.abs_error <= 1e-6);
        }
    }

    #[test]
    fn grid_preserves_order_and_handles_empty() {
        let g = transform_grid(&exp1(), &[], 1e-8).unwrap();
        assert!(g.is_empty());
        let g = transform_grid(&exp1(), &[1.0], 1e-10).unwrap();
        assert_eq!(g[0].kcos.as_ref().unwrap(), &kcos(&exp1(), 1.0, 1e-10).unwrap());
        assert!(transform_grid(&exp1(), &[2.0, 1.0], 1e-8).is_err());
        assert!(transform_grid(&exp1(), &[-1.0], 1e-8).is_err());
    }

    #[test]
    fn unclassified_table_cannot_be_transformed() {
        let s: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, (-(i as f64)).exp())).collect();
        let k = MemoryKernel::tabulated(&s, crate::kernel::RegimeTag::Unclassified).unwrap();
        assert!(matches!(kcos(&k, 1.0, 1e-8), Err(Error::OutsideTable { .. })));
    }

    #[test]
    fn tabulated_exponential_close_to_closed_form() {
        let s: Vec<(f64, f64)> = (0..=400)
            .map(|i| {
                let t = 0.1 * i as f64;
                (t, (-t).exp())
            })
            .collect();
        let k = MemoryKernel::tabulated(&s, crate::kernel::RegimeTag::Diffusive { beta0: 2.0 }).unwrap();
        let c = kcos(&k, 1.0, 1e-9).unwrap();
        assert!((c.value - 0.5).abs() < 2e-3, "{c:?}");
    }
}
