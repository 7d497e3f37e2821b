//! Special functions used by closed-form transforms and asymptotic constants.
//!
//! The gamma function comes from `statrs`; the sine and cosine integrals are
//! implemented here (power series below x = 2, a continued fraction for the
//! complex exponential integral above).

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Γ(x), including negative non-integer arguments.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Returns `(Si(x), Ci(x))` for `x > 0`.
///
/// Relative accuracy is close to machine precision across the positive axis.
pub fn sici(x: f64) -> (f64, f64) {
    assert!(x > 0.0, "sici requires x > 0, got {x}");
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;
    const MAXIT: usize = 200;

    if x > 2.0 {
        // Modified Lentz on the continued fraction for E1(ix).
        let mut b = Complex64::new(1.0, x);
        let mut c = Complex64::new(1.0 / TINY, 0.0);
        let mut d = Complex64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 2..MAXIT {
            let a = -(((i - 1) * (i - 1)) as f64);
            b += Complex64::new(2.0, 0.0);
            d = Complex64::new(1.0, 0.0) / (d * a + b);
            c = b + Complex64::new(a, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < EPS {
                break;
            }
        }
        h *= Complex64::new(x.cos(), -x.sin());
        (FRAC_PI_2 + h.im, -h.re)
    } else {
        let x2 = x * x;
        // Si: sum (-1)^k x^(2k+1) / ((2k+1) (2k+1)!)
        let mut si = 0.0;
        let mut term = x; // x^(2k+1)/(2k+1)!
        let mut k = 0usize;
        loop {
            let add = term / (2 * k + 1) as f64;
            si += add;
            if add.abs() < EPS * si.abs() {
                break;
            }
            k += 1;
            term *= -x2 / ((2 * k) as f64 * (2 * k + 1) as f64);
        }
        // Ci: gamma + ln x + sum_{k>=1} (-1)^k x^(2k) / (2k (2k)!)
        let mut ci = 0.0;
        let mut term = 1.0; // x^(2k)/(2k)!
        let mut k = 1usize;
        loop {
            term *= -x2 / ((2 * k - 1) as f64 * (2 * k) as f64);
            let add = term / (2 * k) as f64;
            ci += add;
            if add.abs() < EPS * (EULER_GAMMA + x.ln() + ci).abs().max(EPS) {
                break;
            }
            k += 1;
        }
        (si, EULER_GAMMA + x.ln() + ci)
    }
}

/// ∫₀^∞ cos(z) z^(-α) dz = Γ(1−α) sin(απ/2), for α in (0,1).
pub fn cos_power_integral(alpha: f64) -> f64 {
    gamma(1.0 - alpha) * (alpha * FRAC_PI_2).sin()
}

/// ∫₀^∞ sin(z) z^(-α) dz = Γ(1−α) cos(απ/2), for α in (0,1).
pub fn sin_power_integral(alpha: f64) -> f64 {
    gamma(1.0 - alpha) * (alpha * FRAC_PI_2).cos()
}
