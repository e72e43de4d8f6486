use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use semigraph_core::borel::{BorelError, BorelSetSpec};
use semigraph_core::dimension::{self, DimensionError, DimensionInputs};
use semigraph_core::estimators::{
    box_count_graph, box_count_range, default_box_scales, default_gamma_grid, default_radii, energy_dimension,
    sojourn_mc, EstimatorError, FIT_DROP,
};
use semigraph_core::fit::ScalingFit;
use semigraph_core::harness::{self, HarnessError, Scenario, Stages, SweepSpec, Verdict};
use semigraph_core::io::{fmt_f64, plot_csv, write_csv, write_path_dump, write_sidecar, Sidecar};
use semigraph_core::sim::{BlockLaw, ProcessModel, SimError};
use semigraph_core::spectral::{decompose as spectral_decompose, ExponentSpec, SpectralError};
use semigraph_core::stats;

use crate::{DimArgs, EstimateArgs, ModelArgs, SimulateArgs, SojournArgs, SweepArgs, VerifyArgs, VERSION};

/// Bad flag combinations or values the parsers cannot catch.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Stable name of the root cause, for diagnostics and exit handling.
pub fn error_name(e: &anyhow::Error) -> String {
    for cause in e.chain() {
        if let Some(x) = cause.downcast_ref::<SpectralError>() {
            return x.name().into();
        }
        if let Some(x) = cause.downcast_ref::<SimError>() {
            return x.name().into();
        }
        if let Some(x) = cause.downcast_ref::<EstimatorError>() {
            return x.name().into();
        }
        if let Some(x) = cause.downcast_ref::<HarnessError>() {
            return x.name().into();
        }
        if cause.downcast_ref::<DimensionError>().is_some() {
            return "InvalidInputs".into();
        }
        if cause.downcast_ref::<BorelError>().is_some() {
            return "InvalidSet".into();
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return "InvalidConfig".into();
        }
        if cause.downcast_ref::<UsageError>().is_some() {
            return "InvalidArguments".into();
        }
        if cause.downcast_ref::<io::Error>().is_some() {
            return "Io".into();
        }
    }
    "Error".into()
}

/// The message without a leading `Name: ` already carried by the name.
pub fn strip_name(e: &anyhow::Error) -> String {
    let name = error_name(e);
    let msg = format!("{e:#}");
    msg.strip_prefix(&format!("{name}: ")).map(str::to_string).unwrap_or(msg)
}

fn load_config<T: DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

/// Inline JSON if it starts with `{` or `[`, otherwise a file path.
fn json_arg<T: DeserializeOwned>(arg: &str) -> Result<T> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        Ok(serde_json::from_str(t)?)
    } else {
        let text = fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn default_exponent() -> ExponentSpec {
    ExponentSpec::diagonal(&[0.5], 2.0).expect("Brownian exponent is valid")
}

fn apply_model(args: &ModelArgs, exponent: &mut ExponentSpec, laws: &mut Option<Vec<BlockLaw>>) -> Result<()> {
    if let Some(e) = &args.exponent {
        *exponent = json_arg(e)?;
    }
    if let Some(a) = args.alpha {
        if !(a > 0.0 && a <= 2.0) {
            return Err(SimError::AlphaOutOfRange(a).into());
        }
        *exponent = ExponentSpec::diagonal(&[1.0 / a], 2.0)?;
        *laws = Some(vec![BlockLaw::StableSymmetric { alpha: a }]);
    }
    if let Some(l) = &args.laws {
        *laws = Some(json_arg(l)?);
    }
    Ok(())
}

fn build_model(exponent: &ExponentSpec, laws: &Option<Vec<BlockLaw>>) -> Result<ProcessModel> {
    Ok(match laws {
        Some(l) => ProcessModel::new(exponent.clone(), l.clone())?,
        None => ProcessModel::stable(exponent.clone())?,
    })
}

fn fullness_warnings(model: &ProcessModel, seed: u64) -> Vec<String> {
    match model.fullness(20_000, seed) {
        Ok(f) if !f.full => vec![format!(
            "law may not be full: spatial-sign covariance eigenvalue {:.3e} below {:.3e}",
            f.min_eigenvalue, f.threshold
        )],
        _ => vec![],
    }
}

struct Artifacts {
    dir: PathBuf,
    command: &'static str,
    seed: Option<u64>,
    config: Value,
    start: Instant,
}

impl Artifacts {
    fn new<C: Serialize>(dir: &Path, command: &'static str, seed: Option<u64>, config: &C) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command,
            seed,
            config: serde_json::to_value(config)?,
            start: Instant::now(),
        })
    }

    /// Writes `bytes` to `name` and its sidecar.
    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        let sidecar = Sidecar {
            artifact: name.into(),
            command: self.command.into(),
            version: VERSION.into(),
            seed: self.seed,
            config: self.config.clone(),
            wall_clock_secs: self.start.elapsed().as_secs_f64(),
            finished_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        };
        write_sidecar(&path, &sidecar)?;
        Ok(path)
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let _ = io::stdout().lock().write_all(text.as_bytes());
}

fn print_json(v: &Value) {
    emit(&(serde_json::to_string_pretty(v).expect("json") + "\n"));
}

pub fn decompose(file: &Path) -> Result<u8> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        c: f64,
        matrix: Vec<Vec<f64>>,
    }
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let raw: Raw = serde_json::from_str(&text)?;
    let spec = ExponentSpec::from_rows(&raw.matrix, raw.c)?;
    let dec = spectral_decompose(&spec)?;
    print_json(&serde_json::to_value(&dec)?);
    Ok(0)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct DimConfig {
    alpha1: Option<f64>,
    alpha2: Option<f64>,
    d1: Option<usize>,
    s: Option<f64>,
    d: Option<usize>,
}

pub fn dim(a: DimArgs) -> Result<u8> {
    let mut c: DimConfig = load_config(&a.config)?;
    c.alpha1 = a.alpha1.or(c.alpha1);
    c.alpha2 = a.alpha2.or(c.alpha2);
    c.d1 = a.d1.or(c.d1);
    c.s = a.s.or(c.s);
    c.d = a.d.or(c.d);
    let alpha1 = c.alpha1.ok_or_else(|| usage("--alpha1 is required"))?;
    let d1 = c.d1.unwrap_or(1);
    let s = c.s.unwrap_or(1.0);
    let d = c.d.unwrap_or(if c.alpha2.is_some() { d1 + 1 } else { d1 });
    if d < d1 {
        return Err(usage(format!("d = {d} is smaller than d1 = {d1}")));
    }
    let inp = DimensionInputs::new(alpha1, c.alpha2, d1, s);
    let graph = dimension::graph_dimension_for(d, &inp)?;
    let mut warnings = Vec::new();
    let (range, range_branch) = if d == 1 {
        warnings.push("range dimension is not defined by the formula in dimension one".to_string());
        (Value::Null, Value::Null)
    } else {
        let r = dimension::range_dimension(&inp)?;
        (json!(r.value), json!(r.branch))
    };
    let (case, exponent) = dimension::sojourn_exponent(alpha1, c.alpha2, d1);
    print_json(&json!({
        "graph": graph.value,
        "graph_branch": graph.branch,
        "graph_formula": graph.formula,
        "range": range,
        "range_branch": range_branch,
        "sojourn_case": case,
        "sojourn_exponent": exponent,
        "inputs": {"alpha1": alpha1, "alpha2": c.alpha2, "d1": d1, "d": d, "s": s},
        "warnings": warnings,
    }));
    Ok(0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SimulateConfig {
    exponent: ExponentSpec,
    laws: Option<Vec<BlockLaw>>,
    n: u32,
    seed: u64,
    stream: String,
    csv: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            exponent: default_exponent(),
            laws: None,
            n: 12,
            seed: 0,
            stream: "simulate/path/0".into(),
            csv: false,
        }
    }
}

pub fn simulate(a: SimulateArgs) -> Result<u8> {
    let mut c: SimulateConfig = load_config(&a.config)?;
    apply_model(&a.model, &mut c.exponent, &mut c.laws)?;
    c.n = a.n.unwrap_or(c.n);
    c.seed = a.seed.unwrap_or(c.seed);
    c.csv |= a.csv;
    let model = build_model(&c.exponent, &c.laws)?;
    let out = Artifacts::new(&a.out, "simulate", Some(c.seed), &c)?;
    let path = model.simulate(c.n, c.seed, &c.stream)?;
    let mut bytes = Vec::new();
    write_path_dump(&path, &mut bytes)?;
    let sha = Sha256::digest(&bytes);
    let dump = out.write("path.bin", &bytes)?;
    let mut files = vec![dump.display().to_string()];
    if c.csv {
        let mut buf = Vec::new();
        semigraph_core::io::path_csv(&path, &mut buf)?;
        files.push(out.write("path.csv", &buf)?.display().to_string());
    }
    let hex: String = sha.iter().map(|b| format!("{b:02x}")).collect();
    print_json(&json!({
        "points": path.len(),
        "d": path.d,
        "n": c.n,
        "seed": c.seed,
        "sha256": hex,
        "files": files,
        "warnings": fullness_warnings(&model, c.seed),
    }));
    Ok(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Method {
    Box,
    Range,
    Energy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EstimateConfig {
    exponent: ExponentSpec,
    laws: Option<Vec<BlockLaw>>,
    set: BorelSetSpec,
    method: Method,
    n: u32,
    paths: usize,
    seed: u64,
    /// Energy subsample size (the larger sample has 2m points).
    m: usize,
    tolerance: f64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            exponent: default_exponent(),
            laws: None,
            set: BorelSetSpec::unit_interval(),
            method: Method::Box,
            n: 16,
            paths: 1,
            seed: 0,
            m: 1024,
            tolerance: 0.12,
        }
    }
}

fn column_stats(rows: &[Vec<f64>], i: usize) -> (f64, f64) {
    let col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
    let se = if col.len() > 1 { stats::std_err(&col) } else { 0.0 };
    (stats::mean(&col), se)
}

pub fn estimate(a: EstimateArgs) -> Result<u8> {
    let mut c: EstimateConfig = load_config(&a.config)?;
    apply_model(&a.model, &mut c.exponent, &mut c.laws)?;
    if let Some(s) = &a.set {
        c.set = json_arg(s)?;
    }
    if let Some(m) = &a.method {
        c.method = serde_json::from_value(Value::String(m.clone()))
            .map_err(|_| usage(format!("unknown method {m:?}; expected box, range or energy")))?;
    }
    c.n = a.n.unwrap_or(c.n);
    c.paths = a.paths.unwrap_or(c.paths);
    c.seed = a.seed.unwrap_or(c.seed);
    if c.paths == 0 {
        return Err(usage("paths must be at least 1"));
    }
    c.set.validate()?;
    let model = build_model(&c.exponent, &c.laws)?;
    let expected = harness::theory(&c.exponent, &c.set)?;
    let theory = match c.method {
        Method::Range => expected.range,
        _ => Some(expected.graph),
    };
    let out = Artifacts::new(&a.out, "estimate", Some(c.seed), &c)?;
    let scales = default_box_scales(c.n);
    let gammas = default_gamma_grid();

    // Per path: (estimate, statistic per scale).
    let per_path: Vec<(f64, Vec<f64>)> = (0..c.paths)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let path = model.simulate(c.n, c.seed, &format!("estimate/path/{i}"))?;
            Ok(match c.method {
                Method::Box => {
                    let e = box_count_graph(&path, &c.set, &scales)?;
                    (e.dimension, e.counts.iter().map(|x| *x as f64).collect())
                }
                Method::Range => {
                    let e = box_count_range(&path, &c.set, &scales)?;
                    (e.dimension, e.counts.iter().map(|x| *x as f64).collect())
                }
                Method::Energy => {
                    let e = energy_dimension(&path, &c.set, &gammas, c.m, 0.5)?;
                    (e.estimate, e.log_ratios)
                }
            })
        })
        .collect::<Result<_>>()?;
    let estimates: Vec<f64> = per_path.iter().map(|p| p.0).collect();
    let estimate = stats::median(&estimates);
    let stderr = if estimates.len() > 1 {
        1.2533 * stats::std_dev(&estimates) / (estimates.len() as f64).sqrt()
    } else {
        f64::INFINITY
    };
    let width = per_path.iter().map(|p| p.1.len()).min().unwrap_or(0);
    let rows: Vec<Vec<f64>> = per_path.iter().map(|p| p.1[..width].to_vec()).collect();
    let xs: Vec<f64> = match c.method {
        Method::Energy => gammas[..width].to_vec(),
        _ => scales[..width].to_vec(),
    };
    let table: Vec<Vec<f64>> = (0..width)
        .map(|i| {
            let (m, se) = column_stats(&rows, i);
            vec![xs[i], m, se]
        })
        .collect();
    let mut buf = Vec::new();
    let header = match c.method {
        Method::Energy => ["gamma", "log_ratio", "stderr"],
        _ => ["scale", "count", "stderr"],
    };
    write_csv(&mut buf, &header, &table)?;
    out.write("estimate.csv", &buf)?;
    let mut summary = json!({
        "method": c.method,
        "estimate": estimate,
        "stderr": stderr,
        "per_path": estimates,
        "theory": theory,
    });
    if c.method != Method::Energy {
        let means: Vec<f64> = table.iter().map(|r| r[1]).collect();
        let k = xs.len();
        let fit = ScalingFit::log_log(&xs[FIT_DROP..k - FIT_DROP], &means[FIT_DROP..k - FIT_DROP])?;
        let mut buf = Vec::new();
        plot_csv(&mut buf, &xs, &means)?;
        out.write("estimate_plot.csv", &buf)?;
        summary["slope"] = json!(fit.slope);
        summary["intercept"] = json!(fit.intercept);
        summary["window"] = json!([fit.scale_min, fit.scale_max]);
    }
    summary["verdict"] = match theory {
        Some(t) => json!(Verdict::judge(estimate, t, c.tolerance, stderr)),
        None => Value::Null,
    };
    summary["warnings"] = json!(fullness_warnings(&model, c.seed));
    out.write("estimate_summary.json", serde_json::to_string_pretty(&summary)?.as_bytes())?;
    print_json(&summary);
    Ok(0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SojournConfig {
    exponent: ExponentSpec,
    laws: Option<Vec<BlockLaw>>,
    n: u32,
    paths: usize,
    horizon: f64,
    seed: u64,
    radii: Option<Vec<f64>>,
    tolerance: f64,
}

impl Default for SojournConfig {
    fn default() -> Self {
        Self {
            exponent: default_exponent(),
            laws: None,
            n: 14,
            paths: 200,
            horizon: 1.0,
            seed: 0,
            radii: None,
            tolerance: 0.15,
        }
    }
}

pub fn sojourn(a: SojournArgs) -> Result<u8> {
    let mut c: SojournConfig = load_config(&a.config)?;
    apply_model(&a.model, &mut c.exponent, &mut c.laws)?;
    c.n = a.n.unwrap_or(c.n);
    c.paths = a.paths.unwrap_or(c.paths);
    c.horizon = a.horizon.unwrap_or(c.horizon);
    c.seed = a.seed.unwrap_or(c.seed);
    let radii = c.radii.clone().unwrap_or_else(|| default_radii(c.n));
    c.radii = Some(radii.clone());
    let model = build_model(&c.exponent, &c.laws)?;
    let dec = model.decomposition();
    let b1 = &dec.blocks[0];
    let (case, theory) = dimension::sojourn_exponent(b1.alpha, dec.blocks.get(1).map(|b| b.alpha), b1.dim);
    let out = Artifacts::new(&a.out, "sojourn", Some(c.seed), &c)?;
    let est = sojourn_mc(&model, &radii, c.horizon, c.n, c.paths, c.seed, "sojourn")?;
    let table: Vec<Vec<f64>> = (0..est.radii.len())
        .map(|i| {
            vec![
                est.radii[i],
                est.graph.mean[i],
                est.graph.stderr[i],
                est.range.mean[i],
                est.range.stderr[i],
            ]
        })
        .collect();
    let mut buf = Vec::new();
    write_csv(
        &mut buf,
        &["radius", "graph_mean", "graph_stderr", "range_mean", "range_stderr"],
        &table,
    )?;
    out.write("sojourn.csv", &buf)?;
    let mut buf = Vec::new();
    plot_csv(&mut buf, &est.radii, &est.graph.mean)?;
    out.write("sojourn_plot.csv", &buf)?;
    let g = &est.graph;
    let summary = json!({
        "case": case,
        "theory": theory,
        "slope": g.fit.slope,
        "slope_stderr": g.slope_stderr,
        "intercept": g.fit.intercept,
        "window": [g.fit.scale_min, g.fit.scale_max],
        "range_slope": est.range.fit.slope,
        "monotone": g.monotone && est.range.monotone,
        "bounded": g.bounded && est.range.bounded,
        "verdict": Verdict::judge_lower_bound(g.fit.slope, theory, c.tolerance, g.slope_stderr),
    });
    out.write("sojourn_summary.json", serde_json::to_string_pretty(&summary)?.as_bytes())?;
    print_json(&summary);
    Ok(0)
}

fn parse_stages(names: &[String]) -> Result<Stages> {
    if names.is_empty() {
        return Ok(Stages::ALL);
    }
    let mut s = Stages {
        box_count: false,
        sojourn: false,
        energy: false,
    };
    for n in names {
        match n.as_str() {
            "box" => s.box_count = true,
            "sojourn" => s.sojourn = true,
            "energy" => s.energy = true,
            other => return Err(usage(format!("unknown stage {other:?}; expected box, sojourn or energy"))),
        }
    }
    Ok(s)
}

pub fn verify(a: VerifyArgs) -> Result<u8> {
    let stages = parse_stages(&a.stages)?;
    let mut scenarios: Vec<Scenario> = Vec::new();
    if a.all {
        scenarios.extend(harness::builtin_scenarios());
    }
    for name in &a.scenario {
        scenarios.push(harness::builtin_scenario(name)?);
    }
    for f in &a.scenario_file {
        let text = fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
        scenarios.push(Scenario::from_json(&text)?);
    }
    if scenarios.is_empty() {
        bail!(usage("no scenario given; use --scenario, --scenario-file or --all"));
    }
    if let Some(seed) = a.seed {
        scenarios = scenarios.into_iter().map(|s| s.with_seed(seed)).collect();
    }
    let start = Instant::now();
    let report = harness::run_all(&scenarios, stages)?;
    let text = report.to_text();
    emit(&text);
    if let Some(dir) = &a.out {
        let config = json!({
            "scenarios": scenarios,
            "stages": {"box": stages.box_count, "sojourn": stages.sojourn, "energy": stages.energy},
        });
        let out = Artifacts::new(dir, "verify", a.seed, &config)?;
        out.write("report.json", (report.to_json() + "\n").as_bytes())?;
        out.write("report.txt", text.as_bytes())?;
        eprintln!("wrote report to {} in {:.1} s", dir.display(), start.elapsed().as_secs_f64());
    }
    Ok(report.verdict.exit_code() as u8)
}

pub fn sweep(a: SweepArgs) -> Result<u8> {
    let mut spec: SweepSpec = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text)?
        }
        None => SweepSpec {
            alphas: vec![],
            sets: vec![],
            n: 16,
            paths: 4,
            seed: 0,
            tolerance: 0.1,
            budget_secs: 120.0,
        },
    };
    if let Some(al) = a.alphas {
        spec.alphas = al;
    }
    if let Some(rs) = a.cantor_ratios {
        spec.sets = rs.into_iter().map(|r| BorelSetSpec::Cantor { m: 2, r }).collect();
    }
    if spec.sets.is_empty() {
        spec.sets = vec![BorelSetSpec::unit_interval()];
    }
    spec.n = a.n.unwrap_or(spec.n);
    spec.paths = a.paths.unwrap_or(spec.paths);
    spec.seed = a.seed.unwrap_or(spec.seed);
    spec.budget_secs = a.budget_secs.unwrap_or(spec.budget_secs);
    let out = Artifacts::new(&a.out, "sweep", Some(spec.seed), &spec)?;
    let rows = harness::sweep(&spec)?;
    let mut text = String::from("alpha,set_dim,theory,estimate,stderr,verdict\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(r.alpha),
            fmt_f64(r.set_dim),
            fmt_f64(r.theory),
            fmt_f64(r.estimate),
            fmt_f64(r.stderr),
            r.verdict
        ));
    }
    out.write("sweep.csv", text.as_bytes())?;
    emit(&text);
    Ok(0)
}
