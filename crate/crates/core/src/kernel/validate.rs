use super::{MemoryKernel, RegimeTag};
use crate::fit;
use crate::grid;
use crate::transform;
use serde::Serialize;

/// Outcome of one numerical check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Fail dominates Inconclusive, which dominates Pass.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

/// A grid point cited as evidence: `x` is a time or a frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub condition: &'static str,
    pub verdict: Verdict,
    pub detail: String,
    pub evidence: Vec<GridPoint>,
}

impl ConditionCheck {
    fn new(condition: &'static str, verdict: Verdict, detail: impl Into<String>, evidence: Vec<GridPoint>) -> Self {
        ConditionCheck {
            condition,
            verdict,
            detail: detail.into(),
            evidence,
        }
    }
}

/// Per-condition verdicts for a kernel against its declared regime.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub kernel: String,
    pub regime: RegimeTag,
    pub checks: Vec<ConditionCheck>,
    /// Estimate of `t^κ K(t)` at the largest grid times.
    pub tail_constant: Option<f64>,
    /// Fitted decay exponent of the tail deviation.
    pub rate_exponent: Option<f64>,
    pub verdict: Verdict,
}

impl AssumptionReport {
    pub fn check(&self, condition: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.condition == condition)
    }
}

pub const POSITIVITY: &str = "positivity";
pub const EVENTUAL_DECREASE: &str = "eventual_decrease";
pub const KCOS_POSITIVITY: &str = "kcos_positivity";
pub const TAIL_CONSTANT: &str = "tail_constant";
pub const TAIL_RATE: &str = "tail_rate";

const MIN_DECADES: f64 = 4.0;
const TAIL_TOLERANCE: f64 = 0.1;

/// Checks positivity, eventual decrease, positivity of `K_cos`, and the
/// declared tail constant and rate on a time grid.
///
/// Never fails: a grid that cannot support a conclusion (fewer than 4
/// decades, unsorted, non-positive) yields inconclusive verdicts.
pub fn validate_assumptions(kernel: &MemoryKernel, times: &[f64]) -> AssumptionReport {
    let regime = kernel.regime();
    let mut report = AssumptionReport {
        kernel: kernel.label(),
        regime,
        checks: Vec::new(),
        tail_constant: None,
        rate_exponent: None,
        verdict: Verdict::Pass,
    };
    let usable = times.len() >= 8
        && times.iter().all(|&t| t > 0.0 && t.is_finite())
        && grid::is_strictly_increasing(times);
    if !usable || grid::decades(times) < MIN_DECADES {
        let why = if usable {
            format!("grid spans {:.2} decades; need {MIN_DECADES}", grid::decades(times))
        } else {
            "grid must hold at least 8 positive, strictly increasing times".to_string()
        };
        for c in [POSITIVITY, EVENTUAL_DECREASE, KCOS_POSITIVITY, TAIL_CONSTANT, TAIL_RATE] {
            report.checks.push(ConditionCheck::new(c, Verdict::Inconclusive, why.clone(), Vec::new()));
        }
        report.verdict = Verdict::Inconclusive;
        return report;
    }
    let values: Vec<f64> = times
        .iter()
        .map(|&t| kernel.try_eval(t).unwrap_or(f64::NAN))
        .collect();

    report.checks.push(positivity(times, &values));
    report.checks.push(eventual_decrease(kernel, times, &values));
    report.checks.push(kcos_positivity(kernel));
    let (constant, rate) = tail_checks(regime, times, &values);
    report.tail_constant = tail_estimate(regime, times, &values);
    report.rate_exponent = rate_estimate(regime, times, &values);
    report.checks.push(constant);
    report.checks.push(rate);
    report.verdict = report
        .checks
        .iter()
        .fold(Verdict::Pass, |v, c| v.combine(c.verdict));
    report
}

fn points(times: &[f64], values: &[f64], idx: impl IntoIterator<Item = usize>) -> Vec<GridPoint> {
    idx.into_iter()
        .map(|i| GridPoint {
            x: times[i],
            value: values[i],
        })
        .collect()
}

fn positivity(times: &[f64], values: &[f64]) -> ConditionCheck {
    let undefined: Vec<usize> = (0..times.len()).filter(|&i| !values[i].is_finite()).collect();
    if !undefined.is_empty() {
        return ConditionCheck::new(
            POSITIVITY,
            Verdict::Inconclusive,
            format!("kernel undefined at {} grid points", undefined.len()),
            points(times, values, undefined),
        );
    }
    let bad: Vec<usize> = (0..times.len()).filter(|&i| values[i] < 0.0).collect();
    if !bad.is_empty() {
        return ConditionCheck::new(
            POSITIVITY,
            Verdict::Fail,
            format!("negative at {} grid points", bad.len()),
            points(times, values, bad),
        );
    }
    // Zeros far out are underflow of a fast-decaying kernel; zeros before any
    // positive value would contradict positivity.
    let zeros: Vec<usize> = (0..times.len()).filter(|&i| values[i] == 0.0).collect();
    let last_positive = values.iter().rposition(|&v| v > 0.0);
    match (zeros.first(), last_positive) {
        (Some(&z), Some(p)) if z < p => ConditionCheck::new(
            POSITIVITY,
            Verdict::Fail,
            "zero before the tail",
            points(times, values, zeros),
        ),
        (_, None) => ConditionCheck::new(POSITIVITY, Verdict::Fail, "identically zero on grid", Vec::new()),
        _ => {
            let min = (0..times.len())
                .filter(|&i| values[i] > 0.0)
                .min_by(|&a, &b| values[a].total_cmp(&values[b]))
                .expect("some positive value");
            ConditionCheck::new(
                POSITIVITY,
                Verdict::Pass,
                format!("positive on {} of {} points (rest underflow)", times.len() - zeros.len(), times.len()),
                points(times, values, [min]),
            )
        }
    }
}

fn eventual_decrease(kernel: &MemoryKernel, times: &[f64], values: &[f64]) -> ConditionCheck {
    let n = times.len();
    let last = (0..n - 1).rfind(|&i| values[i + 1] > values[i] * (1.0 + 1e-12));
    match last {
        None => ConditionCheck::new(
            EVENTUAL_DECREASE,
            Verdict::Pass,
            "non-increasing on the whole grid",
            points(times, values, [0, n - 1]),
        ),
        Some(i) => {
            let t = times[i + 1];
            let past_onset = t > kernel.decrease_onset();
            let late = i + 1 >= n / 2;
            let verdict = if past_onset || late { Verdict::Fail } else { Verdict::Pass };
            ConditionCheck::new(
                EVENTUAL_DECREASE,
                verdict,
                format!(
                    "last increase at t = {t:e} (declared onset {:e})",
                    kernel.decrease_onset()
                ),
                points(times, values, [i, i + 1]),
            )
        }
    }
}

fn kcos_positivity(kernel: &MemoryKernel) -> ConditionCheck {
    let omegas = grid::geometric(1e-3, 1e3, 121);
    let mut evidence = Vec::new();
    let mut verdict = Verdict::Pass;
    let mut detail = String::from("positive on [1e-3, 1e3]");
    for &w in &omegas {
        match transform::kcos(kernel, w, 1e-8) {
            Ok(v) => {
                evidence.push(GridPoint { x: w, value: v.value });
                if v.value + v.abs_error < 0.0 {
                    verdict = Verdict::Fail;
                    detail = format!("K_cos({w:e}) = {:e} is negative", v.value);
                } else if v.value - v.abs_error <= 0.0 && verdict == Verdict::Pass {
                    verdict = Verdict::Inconclusive;
                    detail = format!("K_cos({w:e}) = {:e} not resolved from zero", v.value);
                }
            }
            Err(e) => {
                verdict = verdict.combine(Verdict::Inconclusive);
                detail = format!("K_cos({w:e}) unavailable: {e}");
                break;
            }
        }
    }
    ConditionCheck::new(KCOS_POSITIVITY, verdict, detail, evidence)
}

/// Indices of the upper half of the grid where `t ≥ 1` and the value is usable.
fn tail_indices(times: &[f64], values: &[f64]) -> Vec<usize> {
    (times.len() / 2..times.len())
        .filter(|&i| times[i] >= 1.0 && values[i].is_finite())
        .collect()
}

fn tail_estimate(regime: RegimeTag, times: &[f64], values: &[f64]) -> Option<f64> {
    let kappa = regime.tail_power()?;
    let n = times.len();
    let last: Vec<f64> = (n.saturating_sub(3)..n)
        .map(|i| times[i].powf(kappa) * values[i])
        .collect();
    last.iter().all(|v| v.is_finite()).then(|| crate::quad::sum(&last) / last.len() as f64)
}

fn declared_constant(regime: RegimeTag) -> Option<(f64, f64)> {
    match regime {
        RegimeTag::Diffusive { .. } => Some((0.0, f64::NAN)),
        RegimeTag::Subdiffusive {
            c_alpha, beta_alpha, ..
        } => Some((c_alpha, beta_alpha)),
        RegimeTag::Critical { c1, beta1 } => Some((c1, beta1)),
        RegimeTag::Unclassified => None,
    }
}

fn rate_estimate(regime: RegimeTag, times: &[f64], values: &[f64]) -> Option<f64> {
    let idx = tail_indices(times, values);
    match regime {
        RegimeTag::Diffusive { .. } => {
            // Largest β with t^β K integrable, from the log-log slope of K.
            let pos: Vec<usize> = idx.into_iter().filter(|&i| values[i] > 0.0).collect();
            if pos.len() < 3 {
                return Some(f64::INFINITY);
            }
            let (xs, ys): (Vec<f64>, Vec<f64>) = pos.iter().map(|&i| (times[i], values[i])).unzip();
            fit::log_log_fit(&xs, &ys).map(|f| -f.slope - 1.0)
        }
        RegimeTag::Subdiffusive { .. } | RegimeTag::Critical { .. } => {
            let kappa = regime.tail_power()?;
            let (c, _) = declared_constant(regime)?;
            let scale = c.abs().max(f64::MIN_POSITIVE);
            let (xs, ys): (Vec<f64>, Vec<f64>) = idx
                .iter()
                .map(|&i| (times[i], (times[i].powf(kappa) * values[i] - c).abs()))
                .filter(|&(_, d)| d > 1e-13 * scale)
                .unzip();
            if xs.len() < 3 {
                // Deviation at rounding level throughout: exact power law.
                return Some(f64::INFINITY);
            }
            fit::log_log_fit(&xs, &ys).map(|f| -f.slope)
        }
        RegimeTag::Unclassified => None,
    }
}

fn tail_checks(regime: RegimeTag, times: &[f64], values: &[f64]) -> (ConditionCheck, ConditionCheck) {
    let Some((c, beta)) = declared_constant(regime) else {
        let why = "no declared regime to compare against";
        return (
            ConditionCheck::new(TAIL_CONSTANT, Verdict::Inconclusive, why, Vec::new()),
            ConditionCheck::new(TAIL_RATE, Verdict::Inconclusive, why, Vec::new()),
        );
    };
    let idx = tail_indices(times, values);
    let kappa = regime.tail_power().expect("classified");
    let scaled: Vec<f64> = times.iter().zip(values).map(|(t, v)| t.powf(kappa) * v).collect();
    let evidence = points(times, &scaled, idx.iter().rev().take(3).rev().copied());
    let c_hat = tail_estimate(regime, times, values);

    let constant = match c_hat {
        None => ConditionCheck::new(TAIL_CONSTANT, Verdict::Inconclusive, "tail undefined", evidence.clone()),
        Some(ch) => {
            let ok = if c == 0.0 {
                // Diffusive: t K(t) → 0, so the estimate must be small against K's scale.
                let k_max = values.iter().cloned().fold(0.0, f64::max);
                ch.abs() <= TAIL_TOLERANCE * k_max.max(f64::MIN_POSITIVE)
            } else {
                ((ch - c) / c).abs() <= TAIL_TOLERANCE
            };
            ConditionCheck::new(
                TAIL_CONSTANT,
                if ok { Verdict::Pass } else { Verdict::Fail },
                format!("t^{kappa} K(t) -> {ch:.6e} (declared {c})"),
                evidence.clone(),
            )
        }
    };

    let rate = match (rate_estimate(regime, times, values), regime) {
        (None, _) => ConditionCheck::new(TAIL_RATE, Verdict::Inconclusive, "too few tail points", evidence),
        (Some(r), RegimeTag::Diffusive { beta0 }) => ConditionCheck::new(
            TAIL_RATE,
            if r >= (1.0 - TAIL_TOLERANCE) * beta0 { Verdict::Pass } else { Verdict::Fail },
            format!("t^b K(t) integrable for b < {r:.3} (declared beta0 = {beta0})"),
            evidence,
        ),
        (Some(r), _) => {
            let ok = if beta.is_infinite() {
                r.is_infinite()
            } else {
                r >= (1.0 - TAIL_TOLERANCE) * beta
            };
            ConditionCheck::new(
                TAIL_RATE,
                if ok { Verdict::Pass } else { Verdict::Fail },
                format!("deviation decays like t^-{r:.3} (declared {beta})"),
                evidence,
            )
        }
    };
    (constant, rate)
}
