mod common;

use common::*;
use glekit::kernel::Verdict;
use glekit::msd::{
    asymptotic_constant, classify_from_msd, deviation_fit, msd, msd_curve, subdiffusive_constant,
    subdiffusive_constant_simplified, Rate, Trend,
};
use glekit::spectral::SpectralModel;
use glekit::{grid, MemoryKernel};
use proptest::prelude::*;
use std::f64::consts::PI;

fn model(k: MemoryKernel) -> SpectralModel {
    SpectralModel::new(1.0, 1.0, k).unwrap()
}

#[test]
fn exponential_matches_exact_msd() {
    let m = model(MemoryKernel::exponential(1.0).unwrap());
    for t in [1e-2, 0.5, 1.0, 3.0, 10.0, 100.0, 1e3, 1e4] {
        let v = msd(&m, t, 1e-9).unwrap();
        let e = exp_msd(t);
        assert!((v.value - e).abs() <= 1e-7 * e, "t {t}: {} vs {e}", v.value);
        assert!((v.value - e).abs() <= v.abs_error.max(1e-12 * e) * 10.0, "t {t}: error estimate {} too small", v.abs_error);
    }
}

#[test]
fn short_time_is_ballistic() {
    // MSD(t) ≈ t²·E V² = t²/m for t → 0.
    let m = SpectralModel::new(2.0, 1.0, MemoryKernel::power_law(0.5).unwrap()).unwrap();
    let t = 1e-3;
    let v = msd(&m, t, 1e-8).unwrap().value;
    assert!((v / (t * t) - 0.5).abs() < 1e-3, "{v}");
}

#[test]
fn diffusive_constant_is_two_over_beta_integral() {
    // Sanity identity: MSD/t → 2/(β∫K) = 2λ/β for e^{−λt}.
    let m = SpectralModel::new(1.0, 3.0, MemoryKernel::exponential(2.0).unwrap()).unwrap();
    let spec = asymptotic_constant(&m, 1e-10).unwrap();
    assert!((spec.constant - 4.0 / 3.0).abs() < 1e-9);
    assert_eq!(spec.trend, Trend::Linear);
    let t = 1e5;
    let r = msd(&m, t, 1e-9).unwrap().value / t;
    assert!((r - 4.0 / 3.0).abs() < 1e-4, "{r}");
}

#[test]
fn subdiffusive_constant_two_routes_and_quadrature() {
    // Both closed forms agree with 4/π at α = 1/2 ...
    assert!((subdiffusive_constant(0.5, 1.0, 1.0) - 4.0 / PI).abs() < 1e-12);
    assert!((subdiffusive_constant_simplified(0.5, 1.0, 1.0) - 4.0 / PI).abs() < 1e-15);
    for alpha in [0.2, 0.35, 0.7, 0.9] {
        let a = subdiffusive_constant(alpha, 1.3, 0.7);
        let b = subdiffusive_constant_simplified(alpha, 1.3, 0.7);
        assert!((a - b).abs() < 1e-12 * b, "alpha {alpha}: {a} vs {b}");
    }
    // ... and with 4·lim(r̂/ω^{1/2})·∫(1−cos z)z^{−3/2}dz from plain quadrature.
    let integral = one_minus_cos_half_integral();
    assert!((integral - (2.0 * PI).sqrt()).abs() < 1e-8, "{integral}");
    let plateau = (PI / 4.0).sin() / (PI * GAMMA_HALF);
    assert!((4.0 * plateau * integral - 4.0 / PI).abs() < 1e-8);
}

#[test]
fn subdiffusive_ratio_approaches_constant() {
    let m = model(MemoryKernel::power_law(0.5).unwrap());
    let r = msd(&m, 1e4, 1e-8).unwrap().value / 1e2;
    assert!((r - 4.0 / PI).abs() < 0.03 * 4.0 / PI, "{r}");
    let spec = asymptotic_constant(&m, 1e-10).unwrap();
    assert_eq!(spec.predicted_rate, Rate::Power { exponent: 0.25 });
}

#[test]
fn critical_law() {
    let m = model(MemoryKernel::power_law(1.0).unwrap());
    let spec = asymptotic_constant(&m, 1e-10).unwrap();
    assert_eq!(spec.trend, Trend::LinearOverLog);
    assert_eq!(spec.predicted_rate, Rate::InverseLog);
    let t = 1e6;
    let r = msd(&m, t, 1e-8).unwrap().value * t.ln() / t;
    assert!((r - 2.0).abs() < 0.15 * 2.0, "{r}");
}

#[test]
fn deviation_fits() {
    let m = model(MemoryKernel::exponential(1.0).unwrap());
    let curve = msd_curve(&m, &grid::geometric(10.0, 1e4, 31), 1e-10).unwrap();
    let fit = deviation_fit(&curve, &asymptotic_constant(&m, 1e-12).unwrap()).unwrap();
    assert_eq!(fit.verdict, Verdict::Pass, "{fit:?}");
    assert!(fit.exponent.unwrap() >= 0.8);

    let m = model(MemoryKernel::power_law(0.5).unwrap());
    let curve = msd_curve(&m, &grid::geometric(10.0, 1e4, 13), 1e-8).unwrap();
    let fit = deviation_fit(&curve, &asymptotic_constant(&m, 1e-10).unwrap()).unwrap();
    assert!(fit.exponent.unwrap() >= 0.15, "{fit:?}");

    let m = model(MemoryKernel::power_law(1.0).unwrap());
    let curve = msd_curve(&m, &grid::geometric(1e3, 1e7, 5), 1e-8).unwrap();
    let fit = deviation_fit(&curve, &asymptotic_constant(&m, 1e-10).unwrap()).unwrap();
    assert_eq!(fit.verdict, Verdict::Pass, "{fit:?}");
}

#[test]
fn wrong_constant_fails_fit() {
    let m = model(MemoryKernel::exponential(1.0).unwrap());
    let curve = msd_curve(&m, &grid::geometric(10.0, 1e4, 31), 1e-10).unwrap();
    let mut spec = asymptotic_constant(&m, 1e-12).unwrap();
    spec.constant = 2.1;
    assert_eq!(deviation_fit(&curve, &spec).unwrap().verdict, Verdict::Fail);
}

#[test]
fn classification_across_regimes() {
    let times = grid::geometric(10.0, 1e5, 21);
    let c = classify_from_msd(&msd_curve(&model(MemoryKernel::exponential(1.0).unwrap()), &times, 1e-8).unwrap()).unwrap();
    assert!((c.alpha_hat - 1.0).abs() < 0.05 && !c.log_flag, "{c:?}");
    let c = classify_from_msd(&msd_curve(&model(MemoryKernel::power_law(0.5).unwrap()), &times, 1e-8).unwrap()).unwrap();
    assert!((c.alpha_hat - 0.5).abs() < 0.05 && !c.log_flag, "{c:?}");
    let times = grid::geometric(1e3, 1e7, 9);
    let c = classify_from_msd(&msd_curve(&model(MemoryKernel::power_law(1.0).unwrap()), &times, 1e-8).unwrap()).unwrap();
    assert!(c.log_flag, "{c:?}");
}

#[test]
fn unclassified_kernel_has_no_asymptote() {
    let samples: Vec<(f64, f64)> = (0..50).map(|i| (i as f64 * 0.2, (-(i as f64) * 0.2).exp())).collect();
    let k = MemoryKernel::tabulated(&samples, glekit::RegimeTag::Unclassified).unwrap();
    assert!(asymptotic_constant(&model(k), 1e-8).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn msd_nonnegative_and_increasing(kind in 0u8..3, lt in -1.0f64..4.0, f in 1.01f64..3.0) {
        let k = match kind {
            0 => MemoryKernel::exponential(1.0).unwrap(),
            1 => MemoryKernel::power_law(0.5).unwrap(),
            _ => MemoryKernel::power_law(1.0).unwrap(),
        };
        let m = model(k);
        let t = 10f64.powf(lt);
        let a = msd(&m, t, 1e-8).unwrap();
        let b = msd(&m, t * f, 1e-8).unwrap();
        prop_assert!(a.value > 0.0);
        prop_assert!(b.value + b.abs_error >= a.value - a.abs_error);
    }

    #[test]
    fn tolerance_refinement_is_consistent(lt in -1.0f64..4.0) {
        let m = model(MemoryKernel::power_law(0.5).unwrap());
        let t = 10f64.powf(lt);
        let coarse = msd(&m, t, 1e-5).unwrap();
        let fine = msd(&m, t, 1e-9).unwrap();
        prop_assert!((coarse.value - fine.value).abs() <= coarse.abs_error + fine.abs_error);
    }
}
