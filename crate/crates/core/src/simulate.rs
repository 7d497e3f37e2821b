//! Gaussian paths `X(t)` by spectral synthesis, plus the ensemble and
//! time-averaged statistics used to cross-check the quadrature MSD.
//!
//! With frequency cells `[a_j, b_j]`, nodes `ω_j` and weights
//! `w_j = ∫_{a_j}^{b_j} r̂`, a path is
//!
//! ```text
//! X(t) = Σ_j √(2w_j) · [ (1 − cos ω_j t)/ω_j · ξ_j + sin(ω_j t)/ω_j · η_j ]
//! ```
//!
//! with independent standard Gaussians `ξ_j, η_j`. Then `E X(t)² =
//! 4 Σ_j w_j (1 − cos ω_j t)/ω_j²`, the discretized MSD integral, and
//! `E X(t)X(s) = (MSD(t) + MSD(s) − MSD(|t−s|))/2` up to the same discretization.

use crate::error::{invalid, Error, Result};
use crate::grid;
use crate::msd;
use crate::quad::{self, Tolerance};
use crate::spectral::SpectralModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

/// Frequency discretization: one cell `[0, ω_min]`, log-spaced cells up to
/// `min(1, ω_max)`, linear cells above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyGrid {
    pub modes: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    /// Share of the modes given to the log-spaced part when `ω_max > 1`.
    pub log_fraction: f64,
}

impl FrequencyGrid {
    pub fn new(modes: usize, omega_min: f64, omega_max: f64) -> Self {
        FrequencyGrid {
            modes,
            omega_min,
            omega_max,
            log_fraction: 0.5,
        }
    }

    /// Cell edges, `modes + 1` values starting at 0.
    pub fn edges(&self) -> Result<Vec<f64>> {
        let FrequencyGrid {
            modes,
            omega_min,
            omega_max,
            log_fraction,
        } = *self;
        if modes < 16 {
            return Err(Error::Simulation(format!("need at least 16 modes, got {modes}")));
        }
        if !(omega_min > 0.0 && omega_max > omega_min && omega_max.is_finite()) {
            return Err(Error::Simulation("need 0 < omega_min < omega_max < inf".into()));
        }
        if !(log_fraction > 0.0 && log_fraction <= 1.0) {
            return Err(Error::Simulation("log_fraction must lie in (0, 1]".into()));
        }
        // modes - 1 cells above omega_min.
        let rest = modes - 1;
        let mut edges = vec![0.0];
        if omega_max <= 1.0 || omega_min >= 1.0 {
            let split = if omega_min >= 1.0 {
                grid::linear(omega_min, omega_max, rest + 1)
            } else {
                grid::geometric(omega_min, omega_max, rest + 1)
            };
            edges.extend(split);
        } else {
            let n_log = ((rest as f64 * log_fraction).round() as usize).clamp(1, rest - 1);
            let n_lin = rest - n_log;
            edges.extend(grid::geometric(omega_min, 1.0, n_log + 1));
            edges.extend(grid::linear(1.0, omega_max, n_lin + 1).into_iter().skip(1));
        }
        if !grid::is_strictly_increasing(&edges) {
            return Err(Error::Simulation("degenerate frequency cells".into()));
        }
        Ok(edges)
    }
}

/// Mode nodes and cell weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `2∫_{ω_max}^∞ r̂`, bounded through the `ω^{-2}` majorant; not represented by any mode.
    pub tail_mass: f64,
}

/// Nodes (geometric midpoints of log cells, arithmetic midpoints otherwise)
/// and weights `w_j = ∫_cell r̂`.
pub fn discretize(model: &SpectralModel, grid: &FrequencyGrid, bias_budget: f64) -> Result<Spectrum> {
    let edges = grid.edges()?;
    let tol = 1e-10;
    let at_max = model.rhat(grid.omega_max, tol)?;
    let tail_mass = 2.0 * (at_max.rhat + at_max.abs_error) * grid.omega_max;
    if !(tail_mass < bias_budget) {
        return Err(Error::Simulation(format!(
            "spectral mass beyond omega_max = {} is {tail_mass:.3e}, over the bias budget {bias_budget:.3e}; raise omega_max",
            grid.omega_max
        )));
    }
    let cells: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    let weights: Vec<f64> = cells
        .par_iter()
        .map(|&(a, b)| -> Result<f64> {
            let failure = std::sync::OnceLock::new();
            let q = quad::integrate(
                |w| match model.rhat(w, tol) {
                    Ok(v) => v.rhat,
                    Err(e) => {
                        let _ = failure.set(e);
                        0.0
                    }
                },
                &[a, b],
                Tolerance::abs(0.0).with_rel(1e-8),
            );
            match failure.into_inner() {
                Some(e) => Err(e),
                None => Ok(q.value),
            }
        })
        .collect::<Result<_>>()?;
    if let Some(j) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::Simulation(format!("cell {j} has weight {}", weights[j])));
    }
    let nodes = cells
        .iter()
        .map(|&(a, b)| {
            if a == 0.0 {
                0.5 * b
            } else if b <= 1.0 {
                (a * b).sqrt()
            } else {
                0.5 * (a + b)
            }
        })
        .collect();
    Ok(Spectrum {
        nodes,
        weights,
        tail_mass,
    })
}

/// Settings for [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationParams {
    pub grid: FrequencyGrid,
    /// Largest tolerated spectral mass beyond `ω_max`.
    pub bias_budget: f64,
    pub seed: u64,
    pub paths: usize,
}

/// `P` paths on a common time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathEnsemble {
    pub times: Vec<f64>,
    /// `paths[p][i] = X_p(t_i)`.
    pub paths: Vec<Vec<f64>>,
    pub seed: u64,
    pub grid: FrequencyGrid,
    pub tail_mass: f64,
}

impl PathEnsemble {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Index of `t` on the time grid, if present.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
    }
}

/// Synthesizes `params.paths` paths on `times` (which must start at 0).
///
/// Path `p` draws from ChaCha8 seeded with `params.seed` on stream `p`, so
/// every path is reproducible on its own and the ensemble does not depend on
/// thread scheduling.
pub fn simulate(model: &SpectralModel, times: &[f64], params: &SimulationParams) -> Result<PathEnsemble> {
    if times.first() != Some(&0.0) {
        return Err(invalid("time grid must start at t = 0"));
    }
    if !grid::is_strictly_increasing(times) || times.iter().any(|t| !t.is_finite()) {
        return Err(invalid("time grid must be finite and strictly increasing"));
    }
    if params.paths == 0 {
        return Err(invalid("need at least one path"));
    }
    let spec = discretize(model, &params.grid, params.bias_budget)?;
    let m = spec.nodes.len();
    let n = times.len();
    // Row i holds the 2m coefficients of (ξ_0, η_0, ξ_1, η_1, …) for X(t_i).
    let basis: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| {
            let mut row = Vec::with_capacity(2 * m);
            for (&w, &wt) in spec.nodes.iter().zip(&spec.weights) {
                let amp = (2.0 * wt).sqrt() / w;
                let s = (0.5 * w * t).sin();
                row.push(amp * 2.0 * s * s);
                row.push(amp * (w * t).sin());
            }
            row
        })
        .collect();
    let paths: Vec<Vec<f64>> = (0..params.paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(p as u64);
            let z: Vec<f64> = (0..2 * m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let mut x = Vec::with_capacity(n);
            for (i, row) in basis.iter().enumerate() {
                if i == 0 {
                    x.push(0.0);
                    continue;
                }
                x.push(dot(row, &z));
            }
            x
        })
        .collect();
    Ok(PathEnsemble {
        times: times.to_vec(),
        paths,
        seed: params.seed,
        grid: params.grid,
        tail_mass: spec.tail_mass,
    })
}

/// Dot product with eight fixed-order partial sums, so the result does not
/// depend on the thread count.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let (ca, ra) = a.as_chunks::<8>();
    let (cb, rb) = b.as_chunks::<8>();
    for (x, y) in ca.iter().zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    acc.iter().sum::<f64>() + tail
}

/// Sample mean of `xs` with its standard error `sd/√n`.
fn mean_se(xs: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.clone().collect::<quad::NeumaierSum>().value() / n;
    if n < 2.0 {
        return (mean, f64::NAN);
    }
    let ss = xs.map(|x| (x - mean) * (x - mean)).collect::<quad::NeumaierSum>().value();
    (mean, (ss / (n - 1.0)).sqrt() / n.sqrt())
}

/// Ensemble mean of `X(t)²` with standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalMsd {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

pub fn empirical_msd(ensemble: &PathEnsemble) -> Result<EmpiricalMsd> {
    if ensemble.len() < 2 {
        return Err(Error::InsufficientData("empirical MSD needs at least 2 paths".into()));
    }
    let (mean, stderr) = (0..ensemble.times.len())
        .map(|i| mean_se(ensemble.paths.iter().map(|p| p[i] * p[i])))
        .unzip();
    Ok(EmpiricalMsd {
        times: ensemble.times.clone(),
        mean,
        stderr,
    })
}

/// Empirical `E X(t_i)X(t_j)` with its standard error.
pub fn empirical_covariance(ensemble: &PathEnsemble, i: usize, j: usize) -> (f64, f64) {
    mean_se(ensemble.paths.iter().map(|p| p[i] * p[j]))
}

/// Target covariance `(MSD(t) + MSD(s) − MSD(|t−s|))/2`, with `MSD(0) = 0`.
pub fn target_covariance(model: &SpectralModel, t: f64, s: f64, tol: f64) -> Result<f64> {
    let m = |x: f64| -> Result<f64> {
        if x == 0.0 {
            Ok(0.0)
        } else {
            msd::msd(model, x, tol).map(|v| v.value)
        }
    };
    Ok(0.5 * (m(t)? + m(s)? - m((t - s).abs())?))
}

/// Per-path time-averaged MSD with the ensemble mean and its standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TamsdCurve {
    pub lags: Vec<f64>,
    /// `per_path[p][j]` is path `p`'s TAMSD at `lags[j]`.
    pub per_path: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(invalid("need at least two time points"));
    }
    let step = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step)
    {
        return Err(invalid("time grid must be uniform"));
    }
    Ok(step)
}

fn lag_steps(lag: f64, step: f64, horizon: f64) -> Result<usize> {
    if !(lag > 0.0) {
        return Err(invalid(format!("lag must be positive, got {lag}")));
    }
    if lag >= horizon {
        return Err(invalid(format!("lag {lag} is not below the horizon {horizon}")));
    }
    let k = (lag / step).round();
    if (k * step - lag).abs() > 1e-9 * lag {
        return Err(invalid(format!("lag {lag} is not a multiple of the step {step}")));
    }
    Ok(k as usize)
}

/// `TAMSD(Δ) = (1/(N−k+1)) Σ_{i=0}^{N−k} (X(t_{i+k}) − X(t_i))²` for `Δ = k·step`.
pub fn tamsd_path(x: &[f64], k: usize) -> f64 {
    let count = x.len() - k;
    let s: quad::NeumaierSum = (0..count)
        .map(|i| {
            let d = x[i + k] - x[i];
            d * d
        })
        .collect();
    s.value() / count as f64
}

pub fn tamsd(ensemble: &PathEnsemble, lags: &[f64]) -> Result<TamsdCurve> {
    let step = uniform_step(&ensemble.times)?;
    let horizon = ensemble.times[ensemble.times.len() - 1] - ensemble.times[0];
    let ks: Vec<usize> = lags
        .iter()
        .map(|&l| lag_steps(l, step, horizon))
        .collect::<Result<_>>()?;
    let per_path: Vec<Vec<f64>> = ensemble
        .paths
        .par_iter()
        .map(|x| ks.iter().map(|&k| tamsd_path(x, k)).collect())
        .collect();
    let (mean, stderr) = (0..ks.len())
        .map(|j| mean_se(per_path.iter().map(|v| v[j])))
        .unzip();
    Ok(TamsdCurve {
        lags: lags.to_vec(),
        per_path,
        mean,
        stderr,
    })
}

/// Increment variances at several start times and their largest pairwise z-score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarityReport {
    pub lag: f64,
    pub shifts: Vec<f64>,
    pub variance: Vec<f64>,
    pub stderr: Vec<f64>,
    pub max_z: f64,
}

/// Compares the sample variance of `X(s+Δ) − X(s)` across the shifts `s`.
pub fn stationarity_check(ensemble: &PathEnsemble, lag: f64, shifts: &[f64]) -> Result<StationarityReport> {
    let step = uniform_step(&ensemble.times)?;
    let horizon = ensemble.times[ensemble.times.len() - 1];
    let k = lag_steps(lag, step, horizon)?;
    let mut variance = Vec::new();
    let mut stderr = Vec::new();
    for &s in shifts {
        let i = ensemble
            .index_of(s)
            .ok_or_else(|| invalid(format!("shift {s} is not on the time grid")))?;
        if i + k >= ensemble.times.len() {
            return Err(invalid(format!("shift {s} plus lag {lag} exceeds the horizon")));
        }
        let (v, e) = mean_se(ensemble.paths.iter().map(|p| {
            let d = p[i + k] - p[i];
            d * d
        }));
        variance.push(v);
        stderr.push(e);
    }
    let mut max_z: f64 = 0.0;
    for a in 0..variance.len() {
        for b in a + 1..variance.len() {
            let diff = (variance[a] - variance[b]).abs();
            let se = (stderr[a] * stderr[a] + stderr[b] * stderr[b]).sqrt();
            let z = if diff == 0.0 { 0.0 } else { diff / se };
            max_z = max_z.max(z);
        }
    }
    Ok(StationarityReport {
        lag,
        shifts: shifts.to_vec(),
        variance,
        stderr,
        max_z,
    })
}

/// Jarque–Bera statistic and its asymptotic p-value `exp(−JB/2)` (χ² with 2 dof).
pub fn jarque_bera(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = quad::sum(xs) / n;
    let m = |p: i32| xs.iter().map(|x| (x - mean).powi(p)).collect::<quad::NeumaierSum>().value() / n;
    let (m2, m3, m4) = (m(2), m(3), m(4));
    let skew = m3 / m2.powf(1.5);
    let kurt = m4 / (m2 * m2);
    let jb = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0).powi(2));
    (jb, (-0.5 * jb).exp())
}
