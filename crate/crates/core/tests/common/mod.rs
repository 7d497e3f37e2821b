//! Independent reference values for the integration tests. Nothing here
//! calls into the library's quadrature or special functions.

#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
pub const GAMMA_HALF: f64 = 1.772_453_850_905_516; // √π
pub const GAMMA_QUARTER: f64 = 3.625_609_908_221_908;
pub const GAMMA_THREE_QUARTERS: f64 = 1.225_416_702_465_178;

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre_rule(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule
}

/// Composite 20-point Gauss–Legendre with `panels` equal panels on `[a, b]`.
pub fn gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gauss_legendre_rule(20);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        total += rule.iter().map(|&(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h;
    }
    total
}

/// Composite Gauss–Legendre over geometric panels `[lo, lo·r, …, hi]`.
pub fn gl_geometric<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, per_panel: usize) -> f64 {
    let n = ((hi / lo).ln() / 2f64.ln()).ceil().max(1.0) as usize;
    let r = (hi / lo).powf(1.0 / n as f64);
    (0..n)
        .map(|i| {
            let a = lo * r.powi(i as i32);
            let b = if i + 1 == n { hi } else { a * r };
            gl(&f, a, b, per_panel)
        })
        .sum()
}

/// `(K_cos, K_sin)` of `e^{−λt}`.
pub fn exp_transforms(lambda: f64, w: f64) -> (f64, f64) {
    let d = lambda * lambda + w * w;
    (lambda / d, w / d)
}

/// `r̂` of the exponential model with `m = β = λ = 1`: `(1+ω²)/(π(1+ω⁶))`.
pub fn exp_rhat(w: f64) -> f64 {
    (1.0 + w * w) / (PI * (1.0 + w.powi(6)))
}

/// `r̂` from transforms by the defining formula.
pub fn rhat_from(m: f64, beta: f64, w: f64, kc: f64, ks: f64) -> f64 {
    let a = beta * kc;
    let d = m * w - beta * ks;
    a / (PI * (a * a + d * d))
}

/// Exact MSD of the exponential model with `m = β = λ = 1`.
///
/// The velocity autocorrelation has Laplace transform `(p+1)/(p²+p+1)`, so
/// `C(s) = Re(A e^{λs})` with `λ = −1/2 + i√3/2`, `A = 1 − i/√3`, and
/// `MSD(t) = 2∫₀ᵗ(t−s)C(s)ds = 2 Re(A(e^{λt} − 1 − λt)/λ²)`.
pub fn exp_msd(t: f64) -> f64 {
    let lam = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let a = Complex64::new(1.0, -1.0 / 3f64.sqrt());
    let v = a * ((lam * t).exp() - 1.0 - lam * t) / (lam * lam);
    2.0 * v.re
}

/// `E X(t)X(s)` for the exponential model, from [`exp_msd`].
pub fn exp_covariance(t: f64, s: f64) -> f64 {
    let m = |x: f64| if x == 0.0 { 0.0 } else { exp_msd(x) };
    0.5 * (m(t) + m(s) - m((t - s).abs()))
}

/// `(Si(x), Ci(x))` by direct quadrature of their integral definitions.
pub fn sici_quadrature(x: f64) -> (f64, f64) {
    let panels = (x.ceil() as usize).max(4) * 2;
    let sinc = |t: f64| if t == 0.0 { 1.0 } else { t.sin() / t };
    let cosm1 = |t: f64| {
        if t < 1e-4 {
            -0.5 * t + t * t * t / 24.0
        } else {
            (t.cos() - 1.0) / t
        }
    };
    (gl(sinc, 0.0, x, panels), EULER_GAMMA + x.ln() + gl(cosm1, 0.0, x, panels))
}

/// `(K_cos, K_sin)` of `1/(1+t)` from the shift `u = 1 + t`:
/// `∫₁^∞ e^{iω(u−1)}/u du` in terms of `Si` and `Ci`.
pub fn critical_transforms(w: f64) -> (f64, f64) {
    let (si, ci) = sici_quadrature(w);
    let (s, c) = w.sin_cos();
    let rest = PI / 2.0 - si;
    (-c * ci + s * rest, c * rest + s * ci)
}

/// `(K_cos, K_sin)` of `(1+t)^{−1/2}` by the same shift:
/// `e^{−iω}(∫₀^∞ − ∫₀¹) u^{−1/2}e^{iωu} du`, the first piece in closed form
/// `Γ(1/2)ω^{−1/2}e^{iπ/4}`, the second by quadrature after `u = v²`.
pub fn half_power_law_transforms(w: f64) -> (f64, f64) {
    let full = Complex64::from_polar(GAMMA_HALF / w.sqrt(), PI / 4.0);
    let panels = (4.0 * w).ceil().max(8.0) as usize;
    let re = gl(|v| 2.0 * (w * v * v).cos(), 0.0, 1.0, panels);
    let im = gl(|v| 2.0 * (w * v * v).sin(), 0.0, 1.0, panels);
    let z = Complex64::from_polar(1.0, -w) * (full - Complex64::new(re, im));
    (z.re, z.im)
}

/// `(K_cos, K_sin)` of `t^{−α}` for `α ∈ {1/4, 1/2, 3/4}`:
/// `Γ(1−α)ω^{α−1}(sin(απ/2), cos(απ/2))`.
pub fn pure_power_transforms(alpha: f64, w: f64) -> (f64, f64) {
    let g = if alpha == 0.25 {
        GAMMA_THREE_QUARTERS
    } else if alpha == 0.5 {
        GAMMA_HALF
    } else if alpha == 0.75 {
        GAMMA_QUARTER
    } else {
        panic!("no tabulated Γ(1−α) for α = {alpha}")
    };
    let p = g * w.powf(alpha - 1.0);
    (p * (alpha * PI / 2.0).sin(), p * (alpha * PI / 2.0).cos())
}

/// `∫₀^∞ (1 − cos z) z^{−3/2} dz` by quadrature: `z = s²` on `[0, Z]` with
/// `Z = 2000π`, plus the tail `2/√Z` of the non-oscillatory part. The
/// oscillatory tail is `O(Z^{−5/2})`, below 1e-9.
pub fn one_minus_cos_half_integral() -> f64 {
    let z = 2000.0 * PI;
    let f = |s: f64| {
        if s < 1e-3 {
            s * s - s.powi(6) / 12.0
        } else {
            2.0 * (1.0 - (s * s).cos()) / (s * s)
        }
    };
    let head = gl(f, 0.0, z.sqrt(), 4000);
    head + 2.0 / z.sqrt()
}

/// Mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}
