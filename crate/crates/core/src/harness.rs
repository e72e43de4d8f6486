//! End-to-end scenarios: theory from the closed forms, estimates from
//! simulated ensembles, and a verdict per check.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::borel::{BorelError, BorelSetSpec};
use crate::dimension::{self, DimensionError, DimensionInputs, SojournCase};
use crate::estimators::{
    box_count_graph, box_count_range, default_box_scales, default_gamma_grid, default_radii, energy_dimension,
    sojourn_mc, EstimatorError,
};
use crate::sim::{BlockLaw, LevyPath, ProcessModel, SimError};
use crate::spectral::{decompose, ExponentSpec, SpectralError};
use crate::stats;

/// Stored expectations may differ from the recomputed ones by at most this.
pub const EXPECTED_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("StaleExpectation: {field} stored {stored}, recomputed {computed}")]
    StaleExpectation { field: String, stored: String, computed: String },
    #[error("UnknownScenario: {0}")]
    UnknownScenario(String),
    #[error("InvalidScenario: {0}")]
    InvalidScenario(String),
    #[error("BudgetExceeded: cell {cell} ran {elapsed:.1} s, cap {cap:.1} s")]
    BudgetExceeded { cell: String, elapsed: f64, cap: f64 },
    #[error("{0}")]
    Spectral(#[from] SpectralError),
    #[error("{0}")]
    Dimension(#[from] DimensionError),
    #[error("{0}")]
    Sim(#[from] SimError),
    #[error("{0}")]
    Estimator(#[from] EstimatorError),
    #[error("{0}")]
    Borel(#[from] BorelError),
    #[error("Parse: {0}")]
    Parse(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::StaleExpectation { .. } => "StaleExpectation",
            Self::UnknownScenario(_) => "UnknownScenario",
            Self::InvalidScenario(_) => "InvalidScenario",
            Self::BudgetExceeded { .. } => "BudgetExceeded",
            Self::Spectral(e) => e.name(),
            Self::Dimension(_) => "InvalidInputs",
            Self::Sim(e) => e.name(),
            Self::Estimator(e) => e.name(),
            Self::Borel(_) => "InvalidSet",
            Self::Parse(_) => "Parse",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// `PASS` if `|est − theory| ≤ tol`; `FAIL` if the gap exceeds `2 tol`
    /// while `stderr < tol/2`; otherwise `INCONCLUSIVE`.
    pub fn judge(estimate: f64, theory: f64, tol: f64, stderr: f64) -> Self {
        let gap = (estimate - theory).abs();
        if gap <= tol {
            Self::Pass
        } else if gap > 2.0 * tol && stderr < tol / 2.0 {
            Self::Fail
        } else {
            Self::Inconclusive
        }
    }

    /// Like [`Verdict::judge`], but an estimate above `theory + tol` is never a
    /// failure: the theory is only a lower bound there.
    pub fn judge_lower_bound(estimate: f64, theory: f64, tol: f64, stderr: f64) -> Self {
        if estimate > theory + tol {
            Self::Inconclusive
        } else {
            Self::judge(estimate, theory, tol, stderr)
        }
    }

    /// Worst of a set: any FAIL, else any INCONCLUSIVE, else PASS.
    pub fn combine(vs: impl IntoIterator<Item = Self>) -> Self {
        let mut out = Self::Pass;
        for v in vs {
            match v {
                Self::Fail => return Self::Fail,
                Self::Inconclusive => out = Self::Inconclusive,
                Self::Pass => {}
            }
        }
        out
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::Fail => 1,
            Self::Inconclusive => 3,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Pass => "PASS",
            Self::Fail => "FAIL",
            Self::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub graph: f64,
    /// `None` in dimension one, where the range formula does not apply.
    pub range: Option<f64>,
    pub sojourn_case: SojournCase,
    pub sojourn_exponent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SojournConfig {
    pub n: u32,
    pub paths: usize,
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    /// Number of box-count paths (from the first) also given to the
    /// energy estimator.
    pub paths: usize,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub graph: f64,
    pub sojourn: f64,
    /// Allowed excess of the energy estimate over the box-count estimate.
    pub coherence: f64,
    /// Allowed shortfall of the energy estimate below the theory.
    pub energy_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            graph: 0.12,
            sojourn: 0.15,
            coherence: 0.1,
            energy_floor: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub exponent: ExponentSpec,
    pub laws: Vec<BlockLaw>,
    pub set: BorelSetSpec,
    /// Grid depth of the box-counting ensemble.
    pub n: u32,
    /// Box-counting ensemble size.
    pub paths: usize,
    pub seed: u64,
    pub sojourn: SojournConfig,
    pub energy: EnergyConfig,
    #[serde(default)]
    pub tolerance: Tolerances,
    pub expected: Expected,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Closed-form values for `(E, B)`.
pub fn theory(exponent: &ExponentSpec, set: &BorelSetSpec) -> Result<Expected, HarnessError> {
    set.validate()?;
    let dec = decompose(exponent)?;
    let b1 = &dec.blocks[0];
    let alpha2 = dec.blocks.get(1).map(|b| b.alpha);
    let inp = DimensionInputs::new(b1.alpha, alpha2, b1.dim, set.hausdorff_dim());
    let d = dec.dim();
    let graph = dimension::graph_dimension_for(d, &inp)?.value;
    let range = if d == 1 { None } else { Some(dimension::range_dimension(&inp)?.value) };
    let (sojourn_case, sojourn_exponent) = dimension::sojourn_exponent(b1.alpha, alpha2, b1.dim);
    Ok(Expected {
        graph,
        range,
        sojourn_case,
        sojourn_exponent,
    })
}

fn stale(field: &str, stored: String, computed: String) -> HarnessError {
    HarnessError::StaleExpectation {
        field: field.into(),
        stored,
        computed,
    }
}

impl Scenario {
    /// Checks the configuration and that the stored expectations match the
    /// closed forms.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidScenario(m));
        if self.name.is_empty() {
            return bad("empty name".into());
        }
        if self.paths == 0 || self.energy.paths > self.paths {
            return bad(format!(
                "need 1 ≤ energy.paths ≤ paths, got {} and {}",
                self.energy.paths, self.paths
            ));
        }
        ProcessModel::new(self.exponent.clone(), self.laws.clone())?;
        let t = theory(&self.exponent, &self.set)?;
        let e = &self.expected;
        let close = |a: f64, b: f64| (a - b).abs() <= EXPECTED_TOLERANCE;
        if !close(e.graph, t.graph) {
            return Err(stale("graph", e.graph.to_string(), t.graph.to_string()));
        }
        match (e.range, t.range) {
            (None, None) => {}
            (Some(a), Some(b)) if close(a, b) => {}
            (a, b) => return Err(stale("range", format!("{a:?}"), format!("{b:?}"))),
        }
        if e.sojourn_case != t.sojourn_case || !close(e.sojourn_exponent, t.sojourn_exponent) {
            return Err(stale(
                "sojourn",
                format!("{:?} {}", e.sojourn_case, e.sojourn_exponent),
                format!("{:?} {}", t.sojourn_case, t.sojourn_exponent),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let sc: Scenario = serde_json::from_str(text)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn model(&self) -> Result<ProcessModel, HarnessError> {
        Ok(ProcessModel::new(self.exponent.clone(), self.laws.clone())?)
    }

    pub fn path_stream(&self, i: usize) -> String {
        format!("scenario/{}/path/{i}", self.name)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

fn builtin(
    name: &str,
    exponent: ExponentSpec,
    laws: Vec<BlockLaw>,
    set: BorelSetSpec,
    n: u32,
    graph_tol: f64,
    note: Option<&str>,
) -> Scenario {
    let expected = theory(&exponent, &set).expect("builtin scenarios are valid");
    Scenario {
        name: name.into(),
        exponent,
        laws,
        set,
        n,
        paths: 20,
        seed: 7,
        sojourn: SojournConfig {
            n: 18,
            paths: 300,
            horizon: 1.0,
        },
        energy: EnergyConfig { paths: 3, m: 1024 },
        tolerance: Tolerances {
            graph: graph_tol,
            ..Tolerances::default()
        },
        expected,
        note: note.map(str::to_string),
    }
}

pub const BUILTIN_NAMES: [&str; 8] = [
    "brownian-interval",
    "diag-2-05-interval",
    "brownian-cauchy-interval",
    "isotropic-cauchy-2d",
    "isotropic-08-2d",
    "cauchy-cantor",
    "brownian-cantor",
    "semistable-cauchy-interval",
];

/// The built-in scenario set. Together they cover both branches of the
/// multi-dimensional graph formula and all four sojourn cases.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let diag = |e: &[f64]| ExponentSpec::diagonal(e, 2.0).unwrap();
    let rot = |a: f64| ExponentSpec::from_rows(&[vec![a, -1.0], vec![1.0, a]], 2.0).unwrap();
    let stable = |a: f64| BlockLaw::StableSymmetric { alpha: a };
    let iso = |a: f64| BlockLaw::StableIsotropic2d { alpha: a };
    let unit = BorelSetSpec::unit_interval;
    let slow_note = "α_1 < 1 on the slow branch: the graph dimension equals dim B and box counting barely sees the law";
    vec![
        builtin("brownian-interval", diag(&[0.5]), vec![stable(2.0)], unit(), 20, 0.08, None),
        builtin("diag-2-05-interval", diag(&[0.5, 2.0]), vec![stable(2.0), stable(0.5)], unit(), 18, 0.12, None),
        builtin("brownian-cauchy-interval", diag(&[0.5, 1.0]), vec![stable(2.0), stable(1.0)], unit(), 18, 0.12, None),
        builtin("isotropic-cauchy-2d", rot(1.0), vec![iso(1.0)], unit(), 18, 0.12, None),
        builtin("isotropic-08-2d", rot(1.25), vec![iso(0.8)], unit(), 18, 0.12, Some(slow_note)),
        builtin("cauchy-cantor", diag(&[1.0]), vec![stable(1.0)], BorelSetSpec::middle_third(), 20, 0.12, None),
        builtin("brownian-cantor", diag(&[0.5]), vec![stable(2.0)], BorelSetSpec::middle_third(), 20, 0.12, None),
        builtin(
            "semistable-cauchy-interval",
            diag(&[1.0]),
            vec![BlockLaw::semistable(1.0, 2.0)],
            unit(),
            18,
            0.12,
            None,
        ),
    ]
}

pub fn builtin_scenario(name: &str) -> Result<Scenario, HarnessError> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| HarnessError::UnknownScenario(name.into()))
}

/// One theory-versus-estimate comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub theory: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    fn failed(name: &str, theory: f64, tolerance: f64, err: &HarnessError) -> Self {
        Self {
            name: name.into(),
            theory,
            estimate: f64::NAN,
            stderr: f64::NAN,
            tolerance,
            verdict: Verdict::Fail,
            error: Some(format!("{}: {err}", err.name())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStage {
    /// Per-path graph estimates in path order.
    pub graph: Vec<f64>,
    pub range: Vec<f64>,
    pub median_graph: f64,
    pub median_range: f64,
    /// Standard error of the median, `1.2533 σ/√n`.
    pub stderr_graph: f64,
    pub monotone: bool,
    /// Graph estimate ≥ range estimate − 0.05 on every path.
    pub projection_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SojournStage {
    pub slope: f64,
    pub slope_stderr: f64,
    pub range_slope: f64,
    pub monotone: bool,
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyStage {
    pub estimates: Vec<f64>,
    /// Box-count graph estimates on the same paths.
    pub box_estimates: Vec<f64>,
    pub median: f64,
    /// Largest `energy − box` over the paths.
    pub max_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub seed: u64,
    pub n: u32,
    pub paths: usize,
    pub expected: Expected,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_count: Option<BoxStage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sojourn: Option<SojournStage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<EnergyStage>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub scenarios: Vec<ScenarioReport>,
    pub verdict: Verdict,
}

/// Which stages [`run_scenario_stages`] executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stages {
    pub box_count: bool,
    pub sojourn: bool,
    pub energy: bool,
}

impl Stages {
    pub const ALL: Self = Self {
        box_count: true,
        sojourn: true,
        energy: true,
    };
}

fn median_stderr(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return f64::INFINITY;
    }
    1.2533 * stats::std_dev(x) / (x.len() as f64).sqrt()
}

fn simulate_paths(sc: &Scenario, model: &ProcessModel, count: usize) -> Result<Vec<LevyPath>, HarnessError> {
    (0..count)
        .into_par_iter()
        .map(|i| Ok(model.simulate(sc.n, sc.seed, &sc.path_stream(i))?))
        .collect()
}

/// Box-counting stage over the scenario's ensemble (paths simulated one at
/// a time to bound memory).
pub fn box_stage(sc: &Scenario) -> Result<BoxStage, HarnessError> {
    let model = sc.model()?;
    let scales = default_box_scales(sc.n);
    let rows: Vec<(f64, f64, bool)> = (0..sc.paths)
        .into_par_iter()
        .map(|i| -> Result<_, HarnessError> {
            let path = model.simulate(sc.n, sc.seed, &sc.path_stream(i))?;
            let g = box_count_graph(&path, &sc.set, &scales)?;
            let r = box_count_range(&path, &sc.set, &scales)?;
            Ok((g.dimension, r.dimension, g.monotone && r.monotone))
        })
        .collect::<Result<_, _>>()?;
    let graph: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let range: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(BoxStage {
        median_graph: stats::median(&graph),
        median_range: stats::median(&range),
        stderr_graph: median_stderr(&graph),
        monotone: rows.iter().all(|r| r.2),
        projection_ok: rows.iter().all(|r| r.0 >= r.1 - 0.05),
        graph,
        range,
    })
}

pub fn sojourn_stage(sc: &Scenario) -> Result<SojournStage, HarnessError> {
    let model = sc.model()?;
    let cfg = sc.sojourn;
    let est = sojourn_mc(
        &model,
        &default_radii(cfg.n),
        cfg.horizon,
        cfg.n,
        cfg.paths,
        sc.seed,
        &format!("scenario/{}/sojourn", sc.name),
    )?;
    Ok(SojournStage {
        slope: est.graph.fit.slope,
        slope_stderr: est.graph.slope_stderr,
        range_slope: est.range.fit.slope,
        monotone: est.graph.monotone && est.range.monotone,
        bounded: est.graph.bounded && est.range.bounded,
    })
}

/// Energy estimates on the first `energy.paths` paths, each paired with the
/// box-count estimate of the same path.
pub fn energy_stage(sc: &Scenario) -> Result<EnergyStage, HarnessError> {
    let model = sc.model()?;
    let paths = simulate_paths(sc, &model, sc.energy.paths)?;
    let scales = default_box_scales(sc.n);
    let gammas = default_gamma_grid();
    let mut estimates = Vec::new();
    let mut box_estimates = Vec::new();
    for p in &paths {
        estimates.push(energy_dimension(p, &sc.set, &gammas, sc.energy.m, 0.5)?.estimate);
        box_estimates.push(box_count_graph(p, &sc.set, &scales)?.dimension);
    }
    let max_excess = estimates
        .iter()
        .zip(&box_estimates)
        .map(|(e, b)| e - b)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(EnergyStage {
        median: stats::median(&estimates),
        estimates,
        box_estimates,
        max_excess,
    })
}

pub fn run_scenario(sc: &Scenario) -> Result<ScenarioReport, HarnessError> {
    run_scenario_stages(sc, Stages::ALL)
}

/// Runs the selected stages. Validation errors are returned; errors inside
/// a stage are recorded in its checks as FAIL.
pub fn run_scenario_stages(sc: &Scenario, stages: Stages) -> Result<ScenarioReport, HarnessError> {
    sc.validate()?;
    let e = sc.expected;
    let tol = sc.tolerance;
    let mut checks = Vec::new();
    let mut notes: Vec<String> = sc.note.iter().cloned().collect();
    if e.range.is_none() {
        notes.push("range dimension not reported in dimension one".into());
    }
    let model = sc.model()?;
    if let Ok(f) = model.fullness(20_000, sc.seed) {
        if !f.full {
            notes.push(format!("law may not be full: spatial-sign eigenvalue {:.3e}", f.min_eigenvalue));
        }
    }

    let mut box_count = None;
    if stages.box_count {
        match box_stage(sc) {
            Ok(b) => {
                checks.push(Check {
                    name: "graph_box_count".into(),
                    theory: e.graph,
                    estimate: b.median_graph,
                    stderr: b.stderr_graph,
                    tolerance: tol.graph,
                    verdict: Verdict::judge(b.median_graph, e.graph, tol.graph, b.stderr_graph),
                    error: None,
                });
                if !b.monotone {
                    notes.push("box counts not monotone in the scale on some path".into());
                }
                if !b.projection_ok {
                    notes.push("graph estimate fell below range estimate − 0.05 on some path".into());
                }
                box_count = Some(b);
            }
            Err(err) => checks.push(Check::failed("graph_box_count", e.graph, tol.graph, &err)),
        }
    }

    let mut sojourn = None;
    if stages.sojourn {
        match sojourn_stage(sc) {
            Ok(s) => {
                checks.push(Check {
                    name: "sojourn_slope".into(),
                    theory: e.sojourn_exponent,
                    estimate: s.slope,
                    stderr: s.slope_stderr,
                    tolerance: tol.sojourn,
                    verdict: Verdict::judge_lower_bound(s.slope, e.sojourn_exponent, tol.sojourn, s.slope_stderr),
                    error: None,
                });
                if s.slope > e.sojourn_exponent + tol.sojourn {
                    notes.push("sojourn slope overshoots the lower-bound exponent".into());
                }
                sojourn = Some(s);
            }
            Err(err) => checks.push(Check::failed("sojourn_slope", e.sojourn_exponent, tol.sojourn, &err)),
        }
    }

    let mut energy = None;
    if stages.energy {
        match energy_stage(sc) {
            Ok(en) => {
                let coherent = en.max_excess <= tol.coherence;
                checks.push(Check {
                    name: "energy_below_box_count".into(),
                    theory: 0.0,
                    estimate: en.max_excess,
                    stderr: 0.0,
                    tolerance: tol.coherence,
                    verdict: if coherent { Verdict::Pass } else { Verdict::Fail },
                    error: None,
                });
                let floor_ok = en.median >= e.graph - tol.energy_floor;
                checks.push(Check {
                    name: "energy_above_theory_floor".into(),
                    theory: e.graph,
                    estimate: en.median,
                    stderr: median_stderr(&en.estimates),
                    tolerance: tol.energy_floor,
                    verdict: if floor_ok { Verdict::Pass } else { Verdict::Inconclusive },
                    error: None,
                });
                energy = Some(en);
            }
            Err(err) => checks.push(Check::failed("energy_below_box_count", 0.0, tol.coherence, &err)),
        }
    }

    Ok(ScenarioReport {
        name: sc.name.clone(),
        seed: sc.seed,
        n: sc.n,
        paths: sc.paths,
        expected: e,
        verdict: Verdict::combine(checks.iter().map(|c| c.verdict)),
        checks,
        box_count,
        sojourn,
        energy,
        notes,
    })
}

/// Runs scenarios in parallel; the report keeps the input order.
pub fn run_all(scenarios: &[Scenario], stages: Stages) -> Result<VerificationReport, HarnessError> {
    let reports: Vec<ScenarioReport> = scenarios
        .par_iter()
        .map(|sc| run_scenario_stages(sc, stages))
        .collect::<Result<_, _>>()?;
    Ok(VerificationReport {
        verdict: Verdict::combine(reports.iter().map(|r| r.verdict)),
        scenarios: reports,
    })
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.scenarios {
            let _ = writeln!(out, "{} (seed {}, n = {}, {} paths): {}", r.name, r.seed, r.n, r.paths, r.verdict);
            for c in &r.checks {
                let _ = write!(
                    out,
                    "  {:<26} theory {:>8.4}  estimate {:>8.4} ± {:<8.4} tol {:.3}  {}",
                    c.name, c.theory, c.estimate, c.stderr, c.tolerance, c.verdict
                );
                if let Some(e) = &c.error {
                    let _ = write!(out, "  [{e}]");
                }
                out.push('\n');
            }
            for n in &r.notes {
                let _ = writeln!(out, "  note: {n}");
            }
        }
        let _ = writeln!(out, "overall: {}", self.verdict);
        out
    }
}

/// Cartesian sweep over stable indices and time sets for a scalar process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub alphas: Vec<f64>,
    /// Time sets; each is crossed with every α.
    pub sets: Vec<BorelSetSpec>,
    pub n: u32,
    pub paths: usize,
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Wall-clock cap per cell in seconds.
    #[serde(default = "default_budget")]
    pub budget_secs: f64,
}

fn default_tolerance() -> f64 {
    0.1
}

fn default_budget() -> f64 {
    120.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub set_dim: f64,
    pub theory: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub verdict: Verdict,
}

/// One row per `(α, B)` cell, in `alphas`-major order. Every cell draws
/// its paths from `sweep/<cell>/path/<i>` under the shared seed.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, HarnessError> {
    let scales = default_box_scales(spec.n);
    let mut rows = Vec::new();
    for (ia, &alpha) in spec.alphas.iter().enumerate() {
        for (is, set) in spec.sets.iter().enumerate() {
            set.validate()?;
            let start = Instant::now();
            let cell = format!("a{ia}-b{is}");
            let exponent = ExponentSpec::diagonal(&[1.0 / alpha], 2.0)?;
            let model = ProcessModel::new(exponent, vec![BlockLaw::StableSymmetric { alpha }])?;
            let s = set.hausdorff_dim();
            let theory = dimension::graph_dimension_1d(alpha, s)?.value;
            let mut est = Vec::with_capacity(spec.paths);
            for i in 0..spec.paths {
                let path = model.simulate(spec.n, spec.seed, &format!("sweep/{cell}/path/{i}"))?;
                est.push(box_count_graph(&path, set, &scales)?.dimension);
                let elapsed = start.elapsed().as_secs_f64();
                if elapsed > spec.budget_secs {
                    return Err(HarnessError::BudgetExceeded {
                        cell,
                        elapsed,
                        cap: spec.budget_secs,
                    });
                }
            }
            let estimate = stats::median(&est);
            let stderr = median_stderr(&est);
            rows.push(SweepRow {
                alpha,
                set_dim: s,
                theory,
                estimate,
                stderr,
                verdict: Verdict::judge(estimate, theory, spec.tolerance, stderr),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        assert_eq!(Verdict::judge(1.55, 1.5, 0.08, 0.01), Verdict::Pass);
        assert_eq!(Verdict::judge(1.8, 1.5, 0.08, 0.01), Verdict::Fail);
        assert_eq!(Verdict::judge(1.8, 1.5, 0.08, 0.05), Verdict::Inconclusive);
        assert_eq!(Verdict::judge(1.62, 1.5, 0.08, 0.01), Verdict::Inconclusive);
        assert_eq!(Verdict::judge_lower_bound(2.0, 1.5, 0.15, 0.01), Verdict::Inconclusive);
        assert_eq!(Verdict::judge_lower_bound(1.0, 1.5, 0.15, 0.01), Verdict::Fail);
        assert_eq!(Verdict::combine([Verdict::Pass, Verdict::Inconclusive]), Verdict::Inconclusive);
        assert_eq!(Verdict::combine([Verdict::Inconclusive, Verdict::Fail]), Verdict::Fail);
    }

    #[test]
    fn builtin_theory_values() {
        let get = |n| builtin_scenario(n).unwrap().expected;
        assert_eq!(get("brownian-interval").graph, 1.5);
        assert_eq!(get("brownian-interval").range, None);
        let d = get("diag-2-05-interval");
        assert!((d.graph - 1.5).abs() < 1e-12 && d.sojourn_case == SojournCase::IV);
        assert!((d.sojourn_exponent - 1.5).abs() < 1e-12);
        assert!((get("cauchy-cantor").graph - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!((get("brownian-cantor").graph - (0.5 + 2f64.ln() / 3f64.ln())).abs() < 1e-12);
        assert_eq!(get("brownian-cauchy-interval").sojourn_case, SojournCase::III);
    }

    #[test]
    fn builtins_cover_all_cases_and_branches() {
        let all = builtin_scenarios();
        let cases: Vec<SojournCase> = all.iter().map(|s| s.expected.sojourn_case).collect();
        for c in [SojournCase::I, SojournCase::II, SojournCase::III, SojournCase::IV] {
            assert!(cases.contains(&c), "{c:?}");
        }
        let branches: Vec<_> = all
            .iter()
            .filter(|s| s.exponent.dim() >= 2)
            .map(|s| {
                let dec = decompose(&s.exponent).unwrap();
                let b = &dec.blocks[0];
                let inp = DimensionInputs::new(b.alpha, dec.blocks.get(1).map(|x| x.alpha), b.dim, s.set.hausdorff_dim());
                dimension::graph_dimension(&inp).unwrap().branch
            })
            .collect();
        assert!(branches.contains(&dimension::Branch::Slow) && branches.contains(&dimension::Branch::Fast));
        assert_eq!(all.iter().map(|s| s.name.as_str()).collect::<Vec<_>>(), BUILTIN_NAMES);
    }

    #[test]
    fn scenario_json_round_trip_and_staleness() {
        let sc = builtin_scenario("diag-2-05-interval").unwrap();
        let text = serde_json::to_string(&sc).unwrap();
        assert_eq!(Scenario::from_json(&text).unwrap(), sc);
        let mut stale = sc.clone();
        stale.expected.graph += 1e-9;
        let text = serde_json::to_string(&stale).unwrap();
        assert!(matches!(Scenario::from_json(&text), Err(HarnessError::StaleExpectation { .. })));
        let extra = text.replacen('{', "{\"bogus\":1,", 1);
        assert!(matches!(Scenario::from_json(&extra), Err(HarnessError::Parse(_))));
    }

    #[test]
    fn empty_sweep_is_empty() {
        let spec = SweepSpec {
            alphas: vec![],
            sets: vec![BorelSetSpec::unit_interval()],
            n: 12,
            paths: 2,
            seed: 1,
            tolerance: 0.1,
            budget_secs: 10.0,
        };
        assert!(sweep(&spec).unwrap().is_empty());
    }

    #[test]
    fn sweep_budget_is_enforced() {
        let spec = SweepSpec {
            alphas: vec![2.0],
            sets: vec![BorelSetSpec::unit_interval()],
            n: 12,
            paths: 2,
            seed: 1,
            tolerance: 0.1,
            budget_secs: 0.0,
        };
        assert!(matches!(sweep(&spec), Err(HarnessError::BudgetExceeded { .. })));
    }
}
