//! Plain-text run configuration: one `section.key = value` per line, `#`
//! starts a comment. Unknown keys are rejected so typos surface early.

use crate::error::{Error, Result};
use crate::grid;
use crate::kernel::{MemoryKernel, RegimeTag};
use crate::simulate::{FrequencyGrid, SimulationParams};
use crate::spectral::SpectralModel;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

const KNOWN_KEYS: &[&str] = &[
    "kernel.family",
    "kernel.lambda",
    "kernel.alpha",
    "kernel.scale",
    "kernel.table_path",
    "kernel.tail",
    "kernel.beta0",
    "kernel.c_alpha",
    "kernel.beta_alpha",
    "kernel.c1",
    "kernel.beta1",
    "model.m",
    "model.beta",
    "validate.t_min",
    "validate.t_max",
    "validate.points",
    "transform.omega_min",
    "transform.omega_max",
    "transform.points",
    "transform.omegas",
    "transform.tol",
    "spectrum.omega_min",
    "spectrum.omega_max",
    "spectrum.points",
    "spectrum.omegas",
    "spectrum.tol",
    "msd.t_min",
    "msd.t_max",
    "msd.points",
    "msd.times",
    "msd.tol",
    "deviation.t_min",
    "deviation.t_max",
    "simulate.paths",
    "simulate.modes",
    "simulate.omega_min",
    "simulate.omega_max",
    "simulate.bias_budget",
    "simulate.seed",
    "simulate.t_max",
    "simulate.step",
    "tamsd.lags",
    "threads",
    "output.dir",
];

const NON_SEMANTIC: &[&str] = &["threads", "output.dir"];

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parsed key-value configuration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
    base_dir: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| cfg(format!("line {}: expected key = value", n + 1)))?;
            let k = k.trim();
            if c.values.contains_key(k) {
                return Err(cfg(format!("line {}: duplicate key {k}", n + 1)));
            }
            c.set(k, v.trim()).map_err(|e| cfg(format!("line {}: {e}", n + 1)))?;
        }
        Ok(c)
    }

    /// Reads a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg(format!("cannot read {}: {e}", path.display())))?;
        let mut c = Self::parse(&text)?;
        c.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(c)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(cfg(format!("unknown key {key}")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| cfg(format!("override {kv:?} is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Sorted `key=value` lines; the hash is taken over this form.
    /// Keys that cannot change results (`threads`, `output.dir`) are left out.
    pub fn canonical(&self) -> String {
        self.values
            .iter()
            .filter(|(k, _)| !NON_SEMANTIC.contains(&k.as_str()))
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| cfg(format!("{key}: {v:?} is not a number"))),
        }
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        let v = self.get(key).ok_or_else(|| cfg(format!("missing required key {key}")))?;
        v.parse().map_err(|_| cfg(format!("{key}: {v:?} is not a number")))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| cfg(format!("{key}: {v:?} is not a non-negative integer"))),
        }
    }

    /// Comma-separated numbers; an empty value is an empty list.
    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| cfg(format!("{key}: {s:?} is not a number"))))
            .collect::<Result<Vec<f64>>>()
            .map(Some)
    }

    pub fn kernel(&self) -> Result<MemoryKernel> {
        let family = self.get("kernel.family").ok_or_else(|| cfg("missing required key kernel.family"))?;
        let k = match family {
            "exponential" => MemoryKernel::exponential(self.f64_or("kernel.lambda", 1.0)?)?,
            "power_law" => MemoryKernel::power_law(self.require_f64("kernel.alpha")?)?,
            "pure_power" => MemoryKernel::pure_power(self.require_f64("kernel.alpha")?)?,
            "tabulated" => {
                let rel = self
                    .get("kernel.table_path")
                    .ok_or_else(|| cfg("tabulated kernel needs kernel.table_path"))?;
                let samples = read_table(&self.base_dir.join(rel))?;
                MemoryKernel::tabulated(&samples, self.tail_tag()?)?
            }
            other => {
                return Err(cfg(format!(
                    "kernel.family {other:?} is not one of exponential, power_law, pure_power, tabulated"
                )))
            }
        };
        match self.get("kernel.scale") {
            None => Ok(k),
            Some(_) => k.scaled(self.require_f64("kernel.scale")?),
        }
    }

    fn tail_tag(&self) -> Result<RegimeTag> {
        match self.get("kernel.tail").unwrap_or("unclassified") {
            "diffusive" => RegimeTag::diffusive(self.f64_or("kernel.beta0", 2.0)?),
            "subdiffusive" => RegimeTag::subdiffusive(
                self.require_f64("kernel.alpha")?,
                self.require_f64("kernel.c_alpha")?,
                self.require_f64("kernel.beta_alpha")?,
            ),
            "critical" => RegimeTag::critical(self.require_f64("kernel.c1")?, self.require_f64("kernel.beta1")?),
            "unclassified" => Ok(RegimeTag::Unclassified),
            other => Err(cfg(format!("kernel.tail {other:?} is not a regime"))),
        }
    }

    pub fn model(&self) -> Result<SpectralModel> {
        SpectralModel::new(
            self.f64_or("model.m", 1.0)?,
            self.f64_or("model.beta", 1.0)?,
            self.kernel()?,
        )
    }

    /// Explicit `<section>.<list_key>` or a geometric grid from
    /// `<section>.<lo>/<hi>/points`.
    fn geometric_grid(&self, section: &str, list_key: &str, names: (&str, &str), defaults: (f64, f64, usize)) -> Result<Vec<f64>> {
        if let Some(v) = self.list(&format!("{section}.{list_key}"))? {
            return Ok(v);
        }
        let lo = self.f64_or(&format!("{section}.{}", names.0), defaults.0)?;
        let hi = self.f64_or(&format!("{section}.{}", names.1), defaults.1)?;
        let n = self.usize_or(&format!("{section}.points"), defaults.2)?;
        if n == 0 {
            return Ok(Vec::new());
        }
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(cfg(format!("{section}: need 0 < {} <= {}", names.0, names.1)));
        }
        Ok(grid::geometric(lo, hi, n))
    }

    pub fn omega_grid(&self, section: &str) -> Result<Vec<f64>> {
        self.geometric_grid(section, "omegas", ("omega_min", "omega_max"), (1e-3, 1e3, 50))
    }

    pub fn msd_times(&self) -> Result<Vec<f64>> {
        self.geometric_grid("msd", "times", ("t_min", "t_max"), (1.0, 1e4, 25))
    }

    pub fn validate_times(&self) -> Result<Vec<f64>> {
        self.geometric_grid("validate", "times_unused", ("t_min", "t_max"), (1e-2, 1e8, 101))
    }

    pub fn tol(&self, section: &str, default: f64) -> Result<f64> {
        let t = self.f64_or(&format!("{section}.tol"), default)?;
        if !(t > 0.0) {
            return Err(cfg(format!("{section}.tol must be positive")));
        }
        Ok(t)
    }

    /// Uniform simulation grid `0, step, …, t_max` and the synthesis settings.
    /// The seed is mandatory.
    pub fn simulation(&self) -> Result<(Vec<f64>, SimulationParams)> {
        let seed = self
            .get("simulate.seed")
            .ok_or_else(|| cfg("simulation requires simulate.seed (or --seed)"))?;
        let seed: u64 = seed
            .parse()
            .map_err(|_| cfg(format!("simulate.seed: {seed:?} is not an unsigned integer")))?;
        let t_max = self.f64_or("simulate.t_max", 100.0)?;
        let step = self.f64_or("simulate.step", 0.5)?;
        if !(step > 0.0 && t_max > step) {
            return Err(cfg("simulate: need 0 < step < t_max"));
        }
        let n = (t_max / step).round() as usize;
        if ((n as f64) * step - t_max).abs() > 1e-9 * t_max {
            return Err(cfg("simulate.t_max must be a multiple of simulate.step"));
        }
        let times = (0..=n).map(|i| i as f64 * step).collect();
        let params = SimulationParams {
            grid: FrequencyGrid::new(
                self.usize_or("simulate.modes", 4096)?,
                self.f64_or("simulate.omega_min", 1e-6)?,
                self.f64_or("simulate.omega_max", 100.0)?,
            ),
            bias_budget: self.f64_or("simulate.bias_budget", 1e-6)?,
            seed,
            paths: self.usize_or("simulate.paths", 1000)?,
        };
        Ok((times, params))
    }

    pub fn tamsd_lags(&self) -> Result<Vec<f64>> {
        Ok(self.list("tamsd.lags")?.unwrap_or_else(|| vec![1.0, 5.0, 20.0]))
    }

    /// Worker threads; 0 means one per core.
    pub fn threads(&self) -> Result<usize> {
        self.usize_or("threads", 0)
    }

    pub fn output_dir(&self) -> PathBuf {
        PathBuf::from(self.get("output.dir").unwrap_or("out"))
    }
}

/// Two-column `t,K` CSV with a mandatory header row.
pub fn read_table(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidTable(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::InvalidTable("empty table".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["t", "K"] {
        return Err(Error::InvalidTable(format!("header must be t,K; got {header:?}")));
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let mut it = l.split(',').map(str::trim);
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::InvalidTable(format!("row {}: {l:?}", i + 1)))
            };
            let t = parse(it.next())?;
            let k = parse(it.next())?;
            if it.next().is_some() {
                return Err(Error::InvalidTable(format!("row {}: more than two columns", i + 1)));
            }
            Ok((t, k))
        })
        .collect()
}
