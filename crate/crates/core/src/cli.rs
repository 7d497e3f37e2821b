//! `glekit` command line: one subcommand per pipeline stage.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure (a requested
//! tolerance was not met or an integral diverged), 3 assumption check failed.

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io::{num, write_csv, write_json, Meta};
use crate::kernel::{validate_assumptions, Verdict};
use crate::msd::{self, asymptotic_constant, classify_from_msd, deviation_fit, msd_curve, AsymptoteSpec, MsdCurve};
use crate::simulate::{empirical_msd, simulate, tamsd, PathEnsemble};
use crate::spectral::{check_integrability, rhat_near_zero, SpectralModel, DEFAULT_OMEGA_CUT};
use crate::transform::transform_grid;
use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_ASSUMPTION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "glekit", version, about = "Spectral and MSD analysis of the reduced generalized Langevin equation")]
pub struct Args {
    /// Pipeline stage to run.
    #[arg(value_enum)]
    pub stage: Stage,
    /// Run configuration (key = value lines).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override a config key, e.g. `--set model.beta=2`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Simulation seed; overrides `simulate.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stage {
    Validate,
    Transform,
    Spectrum,
    Msd,
    Asymptote,
    Deviation,
    Simulate,
    Tamsd,
    Report,
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Divergent(_) => EXIT_NUMERICAL,
        Error::ModelInvalid(_) => EXIT_ASSUMPTION,
        _ => EXIT_INVALID,
    }
}

/// Parses `argv` and runs; returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Args::try_parse_from(argv) {
        Ok(args) => run(&args),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

pub fn run(args: &Args) -> i32 {
    match execute(args) {
        Ok(out) => {
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Files written by a stage and the exit code it settled on.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub code: i32,
}

impl Outcome {
    fn raise(&mut self, code: i32, warning: impl Into<String>) {
        self.code = self.code.max(code);
        self.warnings.push(warning.into());
    }
}

struct Ctx {
    cfg: RunConfig,
    meta: Meta,
    out_dir: PathBuf,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

pub fn execute(args: &Args) -> Result<Outcome> {
    let mut cfg = RunConfig::load(&args.config)?;
    for kv in &args.set {
        cfg.apply_override(kv)?;
    }
    if let Some(s) = args.seed {
        cfg.set("simulate.seed", &s.to_string())?;
    }
    if let Some(t) = args.threads {
        cfg.set("threads", &t.to_string())?;
    }
    // A global pool can be built once per process; later builds are no-ops.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads()?).build_global();
    let out_dir = args.out.clone().unwrap_or_else(|| cfg.output_dir());
    std::fs::create_dir_all(&out_dir)?;
    let ctx = Ctx {
        meta: Meta::new(cfg.hash()),
        cfg,
        out_dir,
    };
    let mut out = Outcome::default();
    match args.stage {
        Stage::Validate => stage_validate(&ctx, &mut out)?,
        Stage::Transform => stage_transform(&ctx, &mut out)?,
        Stage::Spectrum => stage_spectrum(&ctx, &mut out)?,
        Stage::Msd => stage_msd(&ctx, &mut out)?,
        Stage::Asymptote => stage_asymptote(&ctx, &mut out)?,
        Stage::Deviation => stage_deviation(&ctx, &mut out)?,
        Stage::Simulate => stage_simulate(&ctx, &mut out)?,
        Stage::Tamsd => stage_tamsd(&ctx, &mut out)?,
        Stage::Report => stage_report(&ctx, &mut out)?,
    }
    Ok(out)
}

fn push(out: &mut Outcome, p: &Path) {
    out.files.push(p.to_path_buf());
}

fn kernel_json(model: &SpectralModel) -> Value {
    json!({
        "label": model.kernel().label(),
        "tail": model.kernel().regime(),
        "m": model.m(),
        "beta": model.beta(),
    })
}

fn stage_validate(ctx: &Ctx, out: &mut Outcome) -> Result<()> {
    let kernel = ctx.cfg.kernel()?;
    let report = validate_assumptions(&kernel, &ctx.cfg.validate_times()?);
    let p = ctx.path("validate.json");
    write_json(&p, &ctx.meta, json!({ "report": report }))?;
    push(out, &p);
    match report.verdict {
        Verdict::Fail => out.raise(EXIT_ASSUMPTION, "kernel assumption check failed"),
        Verdict::Inconclusive => out.warnings.push("assumption checks inconclusive".into()),
        Verdict::Pass => {}
    }
    Ok(())
}

fn stage_transform(ctx: &Ctx, out: &mut Outcome) -> Result<()> {
    let kernel = ctx.cfg.kernel()?;
    let omegas = ctx.cfg.omega_grid("transform")?;
    let tol = ctx.cfg.tol("transform", 1e-10)?;
    let points = transform_grid(&kernel, &omegas, tol)?;
    let mut rows = Vec::with_capacity(points.len());
    for p in points {
        let mut row = vec![num(p.omega)];
        for r in [&p.kcos, &p.ksin] {
            match r {
                Ok(v) => {
                    if !(v.abs_error <= 10.0 * tol.max(1e-12 * v.value.abs())) {
                        out.raise(EXIT_NUMERICAL, format!("tolerance not met at omega = {:e}", p.omega));
                    }
                    row.push(num(v.value));
                    row.push(num(v.abs_error));
                }
                Err(e) => {
                    out.raise(exit_code(e), format!("omega = {:e}: {e}", p.omega));
                    row.push(num(f64::NAN));
                    row.push(num(f64::NAN));
                }
            }
        }
        rows.push(row);
    }
    let p = ctx.path("transform.csv");
    write_csv(&p, &ctx.meta, &["omega", "kcos", "kcos_err", "ksin", "ksin_err"], &rows)?;
    push(out, &p);
    Ok(())
}

fn stage_spectrum(ctx: &Ctx, out: &mut Outcome) -> Result<()> {
    let model = ctx.cfg.model()?;
    let omegas = ctx.cfg.omega_grid("spectrum")?;
    if omegas.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidParameter("spectrum grid must be positive and finite".into()));
    }
    let tol = ctx.cfg.tol("spectrum", 1e-10)?;
    let values: Vec<_> = omegas.par_iter().map(|&w| model.rhat(w, tol)).collect();
    let mut rows = Vec::with_capacity(values.len());
    for (w, v) in omegas.iter().zip(values) {
        match v {
            Ok(v) => {
                if !(v.abs_error <= 0.1 * v.rhat) {
                    out.raise(EXIT_NUMERICAL, format!("r̂ unresolved at omega = {w:e}"));
                }
                rows.push(vec![num(*w), num(v.rhat), num(v.abs_error)]);
            }
            Err(e) => {
                out.raise(exit_code(&e), format!("omega = {w:e}: {e}"));
                rows.push(vec![num(*w), num(f64::NAN), num(f64::NAN)]);
            }
        }
    }
    let p = ctx.path("spectrum.csv");
    write_csv(&p, &ctx.meta, &["omega", "rhat", "rhat_err"], &rows)?;
    push(out, &p);

    let near_zero = rhat_near_zero(&model, tol).ok();
    let integrability = check_integrability(&model, DEFAULT_OMEGA_CUT, 1e-6)?;
    let p = ctx.path("spectrum.json");
    write_json(
        &p,
        &ctx.meta,
        json!({ "kernel": kernel_json(&model), "near_zero": near_zero, "integrability": integrability }),
    )?;
    push(out, &p);
    Ok(())
}

fn check_curve(curve: &MsdCurve, tol: f64, out: &mut Outcome) {
    for i in 0..curve.len() {
        if !(curve.errors[i] <= 10.0 * tol * curve.values[i].abs()) {
            out.raise(EXIT_NUMERICAL, format!("MSD tolerance not met at t = {:e}", curve.times[i]));
        }
    }
}

fn stage_msd(ctx: &Ctx, out: &mut Outcome) -> Result<()> {
    let model = ctx.cfg.model()?;
    let tol = ctx.cfg.tol("msd", 1e-8)?;
    let curve = msd_curve(&model, &ctx.cfg.msd_times()?, tol)?;
    check_curve(&curve, tol, out);
    let spec = asymptotic_constant(&model, tol).ok();
    let rows: Vec<Vec<String>> = (0..curve.len())
        .map(|i| {
            let t = curve.times[i];
            let (trend, ratio) = spec.map_or((f64::NAN, f64::NAN), |s| {
                let g = s.trend.eval(t);
                (s.constant * g, curve.values[i] / g)
            });
            vec![num(t), num(curve.values[i]), num(curve.errors[i]), num(trend), num(ratio)]
        })
        .collect();
    let p = ctx.path("msd.csv");
    write_csv(&p, &ctx.meta, &["t", "msd", "msd_err", "trend", "ratio"], &rows)?;
    push(out, &p);
    Ok(())
}

fn asymptote_json(model: &SpectralModel, spec: &AsymptoteSpec) -> Value {
    let mut v = json!({
        "regime": spec.regime,
        "trend": spec.trend.describe(),
        "trend_form": spec.trend,
        "constant": spec.constant,
        "predicted_rate": spec.predicted_rate,
    });
    if let crate::RegimeTag::Subdiffusive { alpha, c_alpha, .. } = model.kernel().regime() {
        v["constant_simplified"] = json!(msd::subdiffusive_constant_simplified(alpha, c_alpha, model.beta()));
    }
    v
}

fn stage_asymptote(ctx: &Ctx, out: &mut Outcome) -> Result<()> {
    let model = ctx.cfg.model()?;
    let spec = asymptotic_constant(&model, ctx.cfg.tol("msd", 1e-8)?)?;
    let p = ctx.path("asymptote.json");
    write_json(
        &p,
        &ctx.meta,
        json!({ "kernel": kernel_json(&model), "asymptote": asymptote_json(&model, &spec) }),
    )?;
    push(out, &p);
    Ok(())
}

fn deviation_window(ctx: &Ctx, curve: &MsdCurve) -> Result<MsdCurve> {
    let lo = ctx.cfg.f64_or("deviation.t_min", 0.0)?;
    let hi = ctx.cfg.f64_or("deviation.t_max", f64::INFINITY)?;
    Ok(curve.window(lo, hi))
}

fn stage_deviation(ctx: &Ctx, out: &mut Outcome) -> Result<()> {
    let model = ctx.cfg.model()?;
    let tol = ctx.cfg.tol("msd", 1e-8)?;
    let spec = asymptotic_constant(&model, tol)?;
    let curve = msd_curve(&model, &ctx.cfg.msd_times()?, tol)?;
    check_curve(&curve, tol, out);
    let window = deviation_window(ctx, &curve)?;
    let fit = deviation_fit(&window, &spec)?;
    let class = classify_from_msd(&curve).ok();
    let ratio: Vec<f64> = (0..curve.len()).map(|i| curve.values[i] / spec.trend.eval(curve.times[i])).collect();
    let p = ctx.path("deviation.json");
    write_json(
        &p,
        &ctx.meta,
        json!({
            "kernel": kernel_json(&model),
            "asymptote": asymptote_json(&model, &spec),
            "fit": fit,
            "classification": class,
            "curve": { "t": curve.times, "msd": curve.values, "msd_err": curve.errors, "msd_over_trend": ratio },
        }),
    )?;
    push(out, &p);
    Ok(())
}

fn run_simulation(ctx: &Ctx, out: &mut Outcome) -> Result<(SpectralModel, PathEnsemble)> {
    let model = ctx.cfg.model()?;
    let (times, params) = ctx.cfg.simulation()?;
    let ens = simulate(&model, &times, &params)?;
    let p = ctx.path("simulate.json");
    write_json(
        &p,
        &ctx.meta,
        json!({
            "kernel": kernel_json(&model),
            "params": params,
            "tail_mass": ens.tail_mass,
            "paths": ens.len(),
            "points": times.len(),
        }),
    )?;
    push(out, &p);
    Ok((model, ens))
}

/// Quadrature MSD on `times`, with `MSD(0) = 0`.
fn target_msd(model: &SpectralModel, times: &[f64], tol: f64) -> Result<Vec<f64>> {
    let pos: Vec<f64> = times.iter().copied().filter(|&t| t > 0.0).collect();
    let curve = msd_curve(model, &pos, tol)?;
    let mut it = curve.values.into_iter();
    Ok(times.iter().map(|&t| if t > 0.0 { it.next().unwrap_or(f64::NAN) } else { 0.0 }).collect())
}

fn stage_simulate(ctx: &Ctx, out: &mut Outcome) -> Result<()> {
    let (model, ens) = run_simulation(ctx, out)?;
    let mut rows = Vec::with_capacity(ens.len() * ens.times.len());
    for (pi, path) in ens.paths.iter().enumerate() {
        for (t, x) in ens.times.iter().zip(path) {
            rows.push(vec![pi.to_string(), num(*t), num(*x)]);
        }
    }
    let p = ctx.path("ensemble.csv");
    write_csv(&p, &ctx.meta, &["path_id", "t", "x"], &rows)?;
    push(out, &p);

    let emp = empirical_msd(&ens)?;
    let target = target_msd(&model, &emp.times, 1e-6)?;
    let rows: Vec<Vec<String>> = (0..emp.times.len())
        .map(|i| vec![num(emp.times[i]), num(emp.mean[i]), num(emp.stderr[i]), num(target[i])])
        .collect();
    let p = ctx.path("empirical_msd.csv");
    write_csv(&p, &ctx.meta, &["t", "msd_mean", "msd_stderr", "msd_quadrature"], &rows)?;
    push(out, &p);
    Ok(())
}

fn stage_tamsd(ctx: &Ctx, out: &mut Outcome) -> Result<()> {
    let (_, ens) = run_simulation(ctx, out)?;
    let lags = ctx.cfg.tamsd_lags()?;
    let curve = tamsd(&ens, &lags)?;
    let rows: Vec<Vec<String>> = (0..curve.lags.len())
        .map(|i| vec![num(curve.lags[i]), num(curve.mean[i]), num(curve.stderr[i])])
        .collect();
    let p = ctx.path("tamsd.csv");
    write_csv(&p, &ctx.meta, &["lag", "mean", "stderr"], &rows)?;
    push(out, &p);
    Ok(())
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

/// Transforms on the `transform` grid against the kernel's closed form when
/// it has one; otherwise only finiteness and `K_cos > 0` are checked.
fn transform_check(ctx: &Ctx, model: &SpectralModel) -> Result<Value> {
    let tol = ctx.cfg.tol("transform", 1e-10)?;
    let points = transform_grid(model.kernel(), &ctx.cfg.omega_grid("transform")?, tol)?;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for p in &points {
        let (Ok(c), Ok(s)) = (&p.kcos, &p.ksin) else {
            ok = false;
            continue;
        };
        ok &= c.value > 0.0;
        if let Some((ec, es)) = model.kernel().closed_form(p.omega) {
            let d = (c.value - ec).abs().max((s.value - es).abs());
            worst = worst.max(d);
            ok &= d <= 10.0 * tol + c.abs_error.max(s.abs_error);
        }
    }
    let detail = if model.kernel().has_closed_form() {
        format!("{} points, max deviation from closed form {worst:.2e}", points.len())
    } else {
        format!("{} points, no closed form; K_cos positive and finite", points.len())
    };
    Ok(json!({ "name": "transform_grid", "verdict": pass_fail(ok), "detail": detail }))
}

/// `r̂ ≥ 0` and `r̂(−ω) = r̂(ω)` on the `spectrum` grid.
fn spectrum_check(ctx: &Ctx, model: &SpectralModel) -> Result<Value> {
    let tol = ctx.cfg.tol("spectrum", 1e-10)?;
    let omegas = ctx.cfg.omega_grid("spectrum")?;
    let results: Vec<Result<bool>> = omegas
        .par_iter()
        .map(|&w| {
            let a = model.rhat(w, tol)?;
            let b = model.rhat(-w, tol)?;
            Ok(a.rhat >= 0.0 && a.rhat == b.rhat)
        })
        .collect();
    let mut ok = true;
    for r in results {
        ok &= r?;
    }
    Ok(json!({
        "name": "spectrum_nonnegative_even",
        "verdict": pass_fail(ok),
        "detail": format!("{} frequencies", omegas.len()),
    }))
}

fn stage_report(ctx: &Ctx, out: &mut Outcome) -> Result<()> {
    let model = ctx.cfg.model()?;
    let tol = ctx.cfg.tol("msd", 1e-8)?;
    let validation = validate_assumptions(model.kernel(), &ctx.cfg.validate_times()?);
    let mut checks: Vec<Value> = validation
        .checks
        .iter()
        .map(|c| json!({ "name": c.condition, "verdict": verdict_str(c.verdict), "detail": c.detail }))
        .collect();
    if validation.verdict == Verdict::Fail {
        out.raise(EXIT_ASSUMPTION, "kernel assumption check failed");
    }

    checks.push(transform_check(ctx, &model)?);
    checks.push(spectrum_check(ctx, &model)?);
    let integ = check_integrability(&model, DEFAULT_OMEGA_CUT, 1e-6)?;
    let expected = 1.0 / model.m();
    let mass_ok = (integ.total - expected).abs() <= 1e-3 * expected + integ.abs_error;
    checks.push(json!({
        "name": "rhat_total_mass",
        "verdict": pass_fail(mass_ok),
        "detail": format!("integral of r̂ over the real line = {:.6} ± {:.1e}, expected 1/m = {expected:.6}", integ.total, integ.abs_error),
    }));

    let curve = msd_curve(&model, &ctx.cfg.msd_times()?, tol)?;
    check_curve(&curve, tol, out);
    let class = classify_from_msd(&curve).ok();

    let (regime, asymptote, deviation) = match asymptotic_constant(&model, tol) {
        Ok(spec) => {
            let fit = deviation_fit(&deviation_window(ctx, &curve)?, &spec)?;
            checks.push(json!({
                "name": "deviation_rate",
                "verdict": verdict_str(fit.verdict),
                "detail": fit.detail,
            }));
            let fitted = fit.exponent.or(fit.sup_product);
            (
                spec.regime,
                json!({ "trend": spec.trend.describe(), "constant": spec.constant, "predicted_rate": spec.predicted_rate }),
                json!({ "fitted": fitted, "verdict": verdict_str(fit.verdict), "window": fit.window, "points_used": fit.points_used }),
            )
        }
        Err(Error::WrongRegime { .. }) => (model.kernel().regime().name(), Value::Null, Value::Null),
        Err(e) => return Err(e),
    };

    let p = ctx.path("report.json");
    write_json(
        &p,
        &ctx.meta,
        json!({
            "kernel": kernel_json(&model),
            "regime": regime,
            "asymptote": asymptote,
            "deviation": deviation,
            "classification": class,
            "checks": checks,
        }),
    )?;
    push(out, &p);
    Ok(())
}
