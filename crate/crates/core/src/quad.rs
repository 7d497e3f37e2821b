//! Quadrature building blocks.
//!
//! * [`NeumaierSum`]: compensated accumulation, so reductions are stable and
//!   independent of how many terms are added.
//! * [`integrate`]: globally adaptive 10/21-point Gauss–Kronrod over a set of
//!   initial breakpoints.
//! * [`euler_limit`]: Euler transform (repeated averaging of partial sums)
//!   for alternating series.
//! * [`panel_series`]: integrates `∫_a^∞ f` for an oscillating `f` one
//!   half-period at a time and sums the panels with Euler acceleration, or
//!   truncates and charges a caller-supplied remainder bound when that is the
//!   smaller certified error.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Kahan–Babuška–Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of a slice.
pub fn sum(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<NeumaierSum>().value()
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_208_508_040,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One Gauss–Kronrod 21-point panel.
#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Kronrod integral of the integrand's error density.
    propagated: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.a.partial_cmp(&self.a).unwrap_or(Ordering::Equal))
    }
}

fn gk21<F>(f: &F, a: f64, b: f64) -> Panel
where
    F: Fn(f64) -> (f64, f64),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let (fc, ec) = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = fc.abs() * WGK[10];
    let mut prop = ec.abs() * WGK[10];
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let (f1, e1) = f(center - dx);
        let (f2, e2) = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        prop += WGK[j] * (e1.abs() + e2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let abs_half = half.abs();
    let value = res_k * half;
    let res_abs = res_abs * abs_half;
    let res_asc = res_asc * abs_half;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel {
        a,
        b,
        value,
        error: err,
        propagated: prop * abs_half,
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Estimated discretization error.
    pub abs_error: f64,
    /// Integral of the integrand's own error density (zero for exact integrands).
    pub propagated: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl Quadrature {
    /// Discretization plus propagated error.
    pub fn total_error(&self) -> f64 {
        self.abs_error + self.propagated
    }
}

/// Adaptive limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Tolerance {
    pub fn abs(abs: f64) -> Self {
        Tolerance {
            abs,
            rel: 0.0,
            max_panels: 4000,
        }
    }

    pub fn with_rel(mut self, rel: f64) -> Self {
        self.rel = rel;
        self
    }
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from the given
/// breakpoints and bisecting the worst panel until the error target is met.
///
/// `f` returns `(value, error_density)`; the error density is integrated with
/// the Kronrod weights and reported as [`Quadrature::propagated`].
pub fn integrate_with_density<F>(f: F, breaks: &[f64], tol: Tolerance) -> Quadrature
where
    F: Fn(f64) -> (f64, f64),
{
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(gk21(&f, w[0], w[1]));
            evals += 21;
        }
    }
    let totals = |heap: &BinaryHeap<Panel>| {
        let v: NeumaierSum = heap.iter().map(|p| p.value).collect();
        let e: NeumaierSum = heap.iter().map(|p| p.error).collect();
        (v.value(), e.value())
    };
    let (mut value, mut error) = totals(&heap);
    let mut converged = error <= tol.abs.max(tol.rel * value.abs());
    while !converged && heap.len() < tol.max_panels {
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted at machine resolution.
            heap.push(worst);
            break;
        }
        heap.push(gk21(&f, worst.a, mid));
        heap.push(gk21(&f, mid, worst.b));
        evals += 42;
        let (v, e) = totals(&heap);
        value = v;
        error = e;
        converged = error <= tol.abs.max(tol.rel * value.abs());
    }
    // Final reduction in a fixed (left-to-right) order.
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap_or(Ordering::Equal));
    let value: NeumaierSum = panels.iter().map(|p| p.value).collect();
    let error: NeumaierSum = panels.iter().map(|p| p.error).collect();
    let prop: NeumaierSum = panels.iter().map(|p| p.propagated).collect();
    Quadrature {
        value: value.value(),
        abs_error: error.value(),
        propagated: prop.value(),
        evaluations: evals,
        converged,
    }
}

/// [`integrate_with_density`] for an exact integrand.
pub fn integrate<F>(f: F, breaks: &[f64], tol: Tolerance) -> Quadrature
where
    F: Fn(f64) -> f64,
{
    integrate_with_density(|x| (f(x), 0.0), breaks, tol)
}

/// Geometric breakpoints `lo, lo·q, lo·q², …` capped by `hi` (both included).
pub fn geometric_breaks(lo: f64, hi: f64, ratio: f64) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && ratio > 1.0);
    let mut v = vec![lo];
    let mut x = lo * ratio;
    while x < hi * (1.0 - 1e-12) {
        v.push(x);
        x *= ratio;
    }
    v.push(hi);
    v
}

/// Euler-transformed limit of the series whose partial sums are given,
/// computed by repeated pairwise averaging of (at most `window`) trailing
/// partial sums.
pub fn euler_limit(partial_sums: &[f64], window: usize) -> f64 {
    let n = partial_sums.len();
    assert!(n > 0);
    let w = n.min(window.max(1));
    let mut row: Vec<f64> = partial_sums[n - w..].to_vec();
    while row.len() > 1 {
        for i in 0..row.len() - 1 {
            row[i] = 0.5 * (row[i] + row[i + 1]);
        }
        row.pop();
    }
    row[0]
}

/// How the remainder of an oscillatory series was certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    /// Partial sum stopped at the cutoff; the caller's remainder bound is charged.
    Truncated,
    /// Euler-accelerated panel sum; the charged remainder is the acceleration's
    /// convergence estimate.
    Accelerated,
}

/// Outcome of [`panel_series`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelSeries {
    pub value: f64,
    /// Quadrature error accumulated over the panels (including propagated).
    pub quad_error: f64,
    /// Remainder actually charged for the part of the series not summed.
    pub remainder: f64,
    /// End of the last integrated panel.
    pub cutoff: f64,
    pub method: TailMethod,
    pub panels: usize,
}

/// Settings for [`panel_series`].
#[derive(Debug, Clone, Copy)]
pub struct SeriesOptions {
    pub tol: f64,
    pub min_panels: usize,
    pub max_panels: usize,
    pub euler_window: usize,
    /// Acceleration is only trusted once the panels reach this point; before
    /// it the partial sum and the caller's remainder bound are used.
    pub accelerate_from: f64,
}

impl SeriesOptions {
    pub fn new(tol: f64) -> Self {
        SeriesOptions {
            tol,
            min_panels: 4,
            max_panels: 400,
            euler_window: 60,
            accelerate_from: f64::NEG_INFINITY,
        }
    }
}

/// Computes `∫_start^∞ f` where `f` changes sign every `half_period`
/// starting at `start`.
///
/// Each half-period panel is integrated adaptively; the panel integrals form
/// an alternating series summed with [`euler_limit`]. `remainder_bound(T)`
/// must bound `|∫_T^∞ f|` for every panel edge `T`; when it is below the
/// Euler convergence estimate the plain partial sum is returned and that bound
/// is charged instead.
pub fn panel_series<F, B>(
    f: F,
    start: f64,
    half_period: f64,
    remainder_bound: B,
    opts: SeriesOptions,
) -> PanelSeries
where
    F: Fn(f64) -> (f64, f64),
    B: Fn(f64) -> f64,
{
    let mut partial = Vec::with_capacity(64);
    let mut running = NeumaierSum::new();
    let mut quad_err = NeumaierSum::new();
    let mut prev_est = f64::NAN;
    let mut prev_diff = f64::INFINITY;
    let panel_tol = opts.tol / 16.0;
    let mut k = 0usize;
    let mut best: Option<PanelSeries> = None;

    loop {
        let a = start + k as f64 * half_period;
        let b = start + (k + 1) as f64 * half_period;
        let q = integrate_with_density(&f, &[a, b], Tolerance::abs(panel_tol).with_rel(1e-13));
        running.add(q.value);
        quad_err.add(q.total_error());
        partial.push(running.value());
        k += 1;

        let est = euler_limit(&partial, opts.euler_window);
        let diff = (est - prev_est).abs();
        let accel_err = 2.0 * diff.max(prev_diff);
        let lemma = remainder_bound(b).abs();
        prev_est = est;
        prev_diff = if diff.is_nan() { f64::INFINITY } else { diff };

        let candidate = if lemma <= accel_err || b < opts.accelerate_from {
            PanelSeries {
                value: running.value(),
                quad_error: quad_err.value(),
                remainder: lemma,
                cutoff: b,
                method: TailMethod::Truncated,
                panels: k,
            }
        } else {
            PanelSeries {
                value: est,
                quad_error: quad_err.value(),
                remainder: accel_err,
                cutoff: b,
                method: TailMethod::Accelerated,
                panels: k,
            }
        };
        let cand_total = candidate.quad_error + candidate.remainder;
        if best.map_or(true, |p| cand_total < p.quad_error + p.remainder) {
            best = Some(candidate);
        }
        if k >= opts.min_panels && cand_total <= opts.tol {
            return candidate;
        }
        if k >= opts.max_panels {
            return best.expect("at least one panel");
        }
    }
}
