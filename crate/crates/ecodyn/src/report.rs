//! Scenario configuration, built-in presets, analysis orchestration and
//! machine-readable export.
//!
//! Scenario files are flat `key = value` text, one assignment per line,
//! `#` comments, strict about unknown keys. Model constants use the keys
//! `a1 a2 a3 b1 k1 k2 c1 c2 c3 theta p`; `initial_condition = x, y, z` may
//! repeat; `t_end`, `rel_tol`, `abs_tol`, `max_step`, `output_stride`
//! configure the integrator; `analyses` is a comma list drawn from
//! `equilibria, stability, global, persistence, simulate`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{convergence_check, integrate, IntegratorOptions, Trajectory};
use crate::equilibria::{enumerate_equilibria, Equilibrium, FamilyTag};
use crate::error::{Error, Result};
use crate::model::{ModelParams, PopulationState};
use crate::stability::{
    classify, global_stability_check, persistence_conditions, PersistenceReport, StabilityReport,
    Verdict,
};

/// Analyses a scenario can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    Equilibria,
    Stability,
    Global,
    Persistence,
    Simulate,
}

impl Analysis {
    fn from_str(s: &str) -> Option<Self> {
        match s {
            "equilibria" => Some(Analysis::Equilibria),
            "stability" => Some(Analysis::Stability),
            "global" => Some(Analysis::Global),
            "persistence" => Some(Analysis::Persistence),
            "simulate" => Some(Analysis::Simulate),
            _ => None,
        }
    }
}

/// A named parameter set with optional initial conditions and integrator
/// controls.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub params: ModelParams,
    pub initial_conditions: Vec<PopulationState>,
    pub integrator: Option<IntegratorOptions>,
    pub analyses: BTreeSet<Analysis>,
}

impl ScenarioConfig {
    /// Validates cross-field invariants.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Validation("scenario name must be nonempty".into()));
        }
        if self.analyses.contains(&Analysis::Simulate) && self.initial_conditions.is_empty() {
            return Err(Error::Validation(
                "simulate requires at least one initial condition".into(),
            ));
        }
        for ic in &self.initial_conditions {
            if !ic.is_finite() || !ic.is_nonnegative() {
                return Err(Error::Validation(format!(
                    "initial condition must be nonnegative and finite, got {ic:?}"
                )));
            }
        }
        if let Some(opts) = &self.integrator {
            opts.validate()?;
        }
        Ok(())
    }

    /// Integrator options to use, falling back to defaults over `[0, 1000]`.
    pub fn integrator_options(&self) -> IntegratorOptions {
        self.integrator
            .unwrap_or_else(|| IntegratorOptions::new(1000.0).expect("default options are valid"))
    }
}

fn all_analyses(with_simulate: bool) -> BTreeSet<Analysis> {
    let mut set = BTreeSet::from([
        Analysis::Equilibria,
        Analysis::Stability,
        Analysis::Global,
        Analysis::Persistence,
    ]);
    if with_simulate {
        set.insert(Analysis::Simulate);
    }
    set
}

/// Built-in preset by name (`S1`..`S4`, case-insensitive), with the
/// simulation initial conditions bundled alongside each parameter set.
pub fn preset(name: &str) -> Option<ScenarioConfig> {
    let (params, ics): (ModelParams, Vec<[f64; 3]>) = match name.to_ascii_uppercase().as_str() {
        "S1" => (
            ModelParams::new(4.5, 3.8, 0.005, 0.075, 100.0, 160.0, 2.8, 1.97, 1.95, 0.0937, 0.047)
                .unwrap(),
            vec![[50.0, 40.0, 80.0]],
        ),
        "S2" => (
            ModelParams::new(4.5, 3.8, 0.005, 0.075, 100.0, 20.0, 2.8, 1.97, 0.005, 0.0937, 0.047)
                .unwrap(),
            vec![[50.0, 10.0, 80.0], [100.0, 200.0, 0.0]],
        ),
        "S3" => (
            ModelParams::new(5.0, 7.8, 1.5, 0.0005, 50.0, 55.0, 1.7, 1.05, 1.0, 0.0217, 0.73)
                .unwrap(),
            vec![[20.0, 90.0, 80.0], [40.0, 40.0, 0.0], [100.0, 20.0, 300.0]],
        ),
        "S4" => (
            ModelParams::new(4.0, 6.0, 0.05, 0.005, 100.0, 200.0, 0.08, 0.7, 0.50, 0.002537, 0.93)
                .unwrap(),
            vec![[7.0, 150.0, 80.0], [50.0, 1450.0, 80.0]],
        ),
        _ => return None,
    };
    Some(ScenarioConfig {
        name: name.to_ascii_uppercase(),
        params,
        initial_conditions: ics.into_iter().map(PopulationState::from_array).collect(),
        integrator: None,
        analyses: all_analyses(true),
    })
}

/// Resolves `name` as a built-in preset, then as `<ECODYN_PRESET_DIR>/<name>.conf`.
pub fn resolve_preset(name: &str) -> Result<ScenarioConfig> {
    if let Some(cfg) = preset(name) {
        return Ok(cfg);
    }
    if let Ok(dir) = std::env::var("ECODYN_PRESET_DIR") {
        let path = PathBuf::from(dir).join(format!("{name}.conf"));
        if path.exists() {
            return load_config(&path);
        }
    }
    Err(Error::Validation(format!(
        "unknown preset `{name}` (built-ins: S1, S2, S3, S4; set ECODYN_PRESET_DIR for user presets)"
    )))
}

/// Parses and validates a scenario file (strict: unknown keys are errors).
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path)?;
    let path_str = path.display().to_string();
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path_str.clone(),
        line,
        msg,
    };

    let mut name: Option<String> = None;
    let mut raw: std::collections::BTreeMap<&str, (f64, usize)> = Default::default();
    let mut ics: Vec<PopulationState> = Vec::new();
    let mut analyses: Option<BTreeSet<Analysis>> = None;

    const PARAM_KEYS: [&str; 11] = [
        "a1", "a2", "a3", "b1", "k1", "k2", "c1", "c2", "c3", "theta", "p",
    ];
    const INTEGRATOR_KEYS: [&str; 5] = ["t_end", "rel_tol", "abs_tol", "max_step", "output_stride"];

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(parse_err(lineno, format!("expected `key = value`, got `{line}`")));
        };
        let key = key.trim();
        let value = value.trim();

        if key == "name" {
            if value.is_empty() {
                return Err(parse_err(lineno, "name must be nonempty".into()));
            }
            name = Some(value.to_string());
        } else if key == "initial_condition" {
            let parts: Vec<&str> = value.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(parse_err(
                    lineno,
                    format!("initial_condition needs three components `x, y, z`, got `{value}`"),
                ));
            }
            let mut c = [0.0; 3];
            for (slot, part) in c.iter_mut().zip(&parts) {
                *slot = part.parse::<f64>().map_err(|_| {
                    parse_err(lineno, format!("invalid number `{part}` in initial_condition"))
                })?;
            }
            ics.push(PopulationState::from_array(c));
        } else if key == "analyses" {
            let mut set = BTreeSet::new();
            for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let a = Analysis::from_str(item)
                    .ok_or_else(|| parse_err(lineno, format!("unknown analysis `{item}`")))?;
                set.insert(a);
            }
            analyses = Some(set);
        } else if let Some(canon) = PARAM_KEYS
            .iter()
            .chain(INTEGRATOR_KEYS.iter())
            .find(|k| **k == key)
        {
            let v = value
                .parse::<f64>()
                .map_err(|_| parse_err(lineno, format!("invalid number `{value}` for `{key}`")))?;
            if let Some((_, first)) = raw.get(canon) {
                return Err(parse_err(
                    lineno,
                    format!("duplicate key `{key}` (first set on line {first})"),
                ));
            }
            raw.insert(canon, (v, lineno));
        } else {
            return Err(parse_err(lineno, format!("unknown key `{key}`")));
        }
    }

    let get = |k: &str| raw.get(k).map(|(v, _)| *v);
    let mut missing = Vec::new();
    for k in PARAM_KEYS {
        if get(k).is_none() {
            missing.push(k);
        }
    }
    if !missing.is_empty() {
        return Err(Error::Validation(format!(
            "missing model parameter(s): {}",
            missing.join(", ")
        )));
    }
    let params = ModelParams::new(
        get("a1").unwrap(),
        get("a2").unwrap(),
        get("a3").unwrap(),
        get("b1").unwrap(),
        get("k1").unwrap(),
        get("k2").unwrap(),
        get("c1").unwrap(),
        get("c2").unwrap(),
        get("c3").unwrap(),
        get("theta").unwrap(),
        get("p").unwrap(),
    )?;

    let integrator = if INTEGRATOR_KEYS.iter().any(|k| get(k).is_some()) {
        let t_end = get("t_end").unwrap_or(1000.0);
        Some(IntegratorOptions::with(
            get("rel_tol").unwrap_or(1e-8),
            get("abs_tol").unwrap_or(1e-10),
            t_end,
            get("max_step").unwrap_or(t_end / 100.0),
            get("output_stride").unwrap_or(t_end / 1000.0),
        )?)
    } else {
        None
    };

    let default_name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let config = ScenarioConfig {
        name: name.unwrap_or(default_name),
        params,
        analyses: analyses.unwrap_or_else(|| all_analyses(!ics.is_empty())),
        initial_conditions: ics,
        integrator,
    };
    config.validate()?;
    Ok(config)
}

/// Runtime knobs not carried in scenario files.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisSettings {
    /// Grid upper bound for the global-stability check; defaults to the prey
    /// carrying capacity `a1/b1`.
    pub x_max: Option<f64>,
    /// Grid sample count for the global-stability check.
    pub samples: usize,
    /// Persistence weights.
    pub gammas: [f64; 3],
    /// Componentwise relative tolerance for convergence verdicts.
    pub convergence_tol: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            x_max: None,
            samples: 1000,
            gammas: [1.0, 1.0, 1.0],
            convergence_tol: 1e-3,
        }
    }
}

/// Full analysis output; serialized as JSON with exactly these top-level
/// fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub scenario: String,
    pub params: ModelParams,
    pub equilibria: Vec<Equilibrium>,
    pub stability: Vec<StabilityReport>,
    pub persistence: Option<PersistenceReport>,
    pub notes: Vec<String>,
}

/// Runs the configured analyses: enumerate every branch, classify each
/// feasible one, evaluate the global-stability grid for feasible coexistence
/// branches, and the persistence conditions. Per-branch warnings and
/// marginal or discrepant verdicts are collected into `notes`.
pub fn run_analysis(config: &ScenarioConfig, settings: &AnalysisSettings) -> Result<AnalysisReport> {
    config.validate()?;
    let params = &config.params;
    let set = enumerate_equilibria(params)?;
    let mut notes = set.warnings.clone();

    let mut stability = Vec::new();
    if config.analyses.contains(&Analysis::Stability) {
        for eq in set.feasible() {
            // per-branch failures become notes; only config errors abort
            let report = match classify(eq, params) {
                Ok(r) => r,
                Err(e) => {
                    notes.push(format!("{}: stability skipped: {e}", eq.label()));
                    continue;
                }
            };
            if report.verdict == Verdict::Marginal {
                notes.push(format!("{}: marginal verdict", eq.label()));
            }
            if let Some(&holds) = report.condition_flags.get("holds") {
                if holds && report.verdict != Verdict::Stable {
                    notes.push(format!(
                        "{}: screening conditions hold but eigenvalue verdict is {}",
                        eq.label(),
                        report.verdict
                    ));
                }
            }
            stability.push(report);
        }
    }

    if config.analyses.contains(&Analysis::Global) {
        let x_max = settings.x_max.unwrap_or_else(|| params.carrying_capacity());
        for eq in set.feasible() {
            if eq.family.tag != FamilyTag::EStar {
                continue;
            }
            match global_stability_check(eq, params, x_max, settings.samples) {
                Ok(check) => match check.first_failure_x {
                    None => notes.push(format!(
                        "{}: quadratic form positive definite on [0, {x_max}] ({} samples)",
                        eq.label(),
                        settings.samples
                    )),
                    Some(x) => notes.push(format!(
                        "{}: quadratic form loses definiteness at x = {x} on [0, {x_max}]",
                        eq.label()
                    )),
                },
                Err(e @ Error::Validation(_)) => return Err(e),
                Err(e) => notes.push(format!("{}: grid check skipped: {e}", eq.label())),
            }
        }
    }

    let persistence = if config.analyses.contains(&Analysis::Persistence) {
        Some(persistence_conditions(params, settings.gammas)?)
    } else {
        None
    };

    Ok(AnalysisReport {
        scenario: config.name.clone(),
        params: *params,
        equilibria: set.equilibria,
        stability,
        persistence,
        notes,
    })
}

/// Convergence verdict of one trajectory against one stable equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub target: Equilibrium,
    pub converged: bool,
    pub t_converged: Option<f64>,
}

/// One integrated initial condition with its convergence verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRun {
    pub initial: PopulationState,
    pub trajectory: Trajectory,
    pub verdicts: Vec<ConvergenceVerdict>,
}

/// Integrates every configured initial condition and checks convergence
/// against each feasible stable equilibrium. If nothing has converged by
/// `t_end` the horizon doubles, up to 8000 time units.
pub fn run_simulation(
    config: &ScenarioConfig,
    settings: &AnalysisSettings,
) -> Result<Vec<SimulationRun>> {
    config.validate()?;
    if config.initial_conditions.is_empty() {
        return Err(Error::Validation(
            "simulate requires at least one initial condition".into(),
        ));
    }
    let params = &config.params;
    let set = enumerate_equilibria(params)?;
    let mut stable_targets = Vec::new();
    for eq in set.feasible() {
        if classify(eq, params)?.verdict == Verdict::Stable {
            stable_targets.push(*eq);
        }
    }

    let base = config.integrator_options();
    let mut runs = Vec::new();
    for init in &config.initial_conditions {
        let mut opts = base;
        let (trajectory, verdicts) = loop {
            let traj = integrate(params, init, &opts)?;
            let verdicts: Vec<ConvergenceVerdict> = stable_targets
                .iter()
                .map(|target| {
                    let v = convergence_check(&traj, target, settings.convergence_tol);
                    ConvergenceVerdict {
                        target: *target,
                        converged: v.converged,
                        t_converged: v.t_converged,
                    }
                })
                .collect();
            let resolved = stable_targets.is_empty() || verdicts.iter().any(|v| v.converged);
            if resolved || opts.t_end >= 8000.0 {
                break (traj, verdicts);
            }
            opts = IntegratorOptions::with(
                opts.rel_tol,
                opts.abs_tol,
                opts.t_end * 2.0,
                opts.max_step * 2.0,
                opts.output_stride * 2.0,
            )?;
        };
        runs.push(SimulationRun {
            initial: *init,
            trajectory,
            verdicts,
        });
    }
    Ok(runs)
}

/// Writes a report as pretty-printed JSON (byte-stable across runs).
pub fn export_report_json<W: Write>(report: &AnalysisReport, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, report)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Reads back a JSON report produced by [`export_report_json`].
pub fn load_report_json(path: &Path) -> Result<AnalysisReport> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes a trajectory as CSV with header `t,x,y,z`, 17 significant digits,
/// LF line endings.
pub fn export_trajectory_csv<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    w.write_all(b"t,x,y,z\n")?;
    let mut line = String::new();
    for (t, s) in traj.times.iter().zip(&traj.states) {
        line.clear();
        writeln!(line, "{t:.16e},{:.16e},{:.16e},{:.16e}", s.x, s.y, s.z)
            .expect("formatting to String cannot fail");
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Writes an arbitrary serializable value (trajectory, simulation runs) as
/// pretty-printed JSON.
pub fn export_json<W: Write, T: Serialize>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
        let path = dir.join(name);
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    fn tmpdir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("ecodyn-test-{tag}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    const S1_BODY: &str = "\
# susceptible-dominant scenario
name = demo
a1 = 4.5
a2 = 3.8
a3 = 0.005
b1 = 0.075
k1 = 100
k2 = 160
c1 = 2.8
c2 = 1.97
c3 = 1.95
theta = 0.0937
p = 0.047
initial_condition = 50, 40, 80
t_end = 200
";

    #[test]
    fn preset_s1_matches_expected_params() {
        let cfg = preset("S1").unwrap();
        assert_eq!(cfg.params.a1(), 4.5);
        assert_eq!(cfg.params.theta(), 0.0937);
        assert_eq!(cfg.params.p(), 0.047);
        assert_eq!(cfg.initial_conditions.len(), 1);
        assert!(preset("s3").is_some());
        assert!(preset("S9").is_none());
    }

    #[test]
    fn config_round_trip() {
        let dir = tmpdir("cfg");
        let path = write_config(&dir, "demo.conf", S1_BODY);
        let cfg = load_config(&path).unwrap();
        assert_eq!(cfg.name, "demo");
        assert_eq!(cfg.params, preset("S1").unwrap().params);
        assert_eq!(cfg.initial_conditions.len(), 1);
        assert_eq!(cfg.integrator.unwrap().t_end, 200.0);
    }

    #[test]
    fn unknown_key_is_a_parse_error() {
        let dir = tmpdir("unknown");
        let path = write_config(&dir, "bad.conf", &format!("{S1_BODY}frobnicate = 1\n"));
        match load_config(&path) {
            Err(Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 16);
                assert!(msg.contains("frobnicate"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_p_is_a_validation_error() {
        let dir = tmpdir("badp");
        let body = S1_BODY.replace("p = 0.047", "p = 1.5");
        let path = write_config(&dir, "badp.conf", &body);
        match load_config(&path) {
            Err(Error::Validation(msg)) => assert!(msg.contains('p'), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn growth_rate_ordering_is_a_validation_error() {
        let dir = tmpdir("bada2");
        let body = S1_BODY.replace("a2 = 3.8", "a2 = 0.004");
        let path = write_config(&dir, "bada2.conf", &body);
        match load_config(&path) {
            Err(Error::Validation(msg)) => assert!(msg.contains("a2"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn missing_parameter_is_reported_by_name() {
        let dir = tmpdir("missing");
        let body = S1_BODY.replace("theta = 0.0937\n", "");
        let path = write_config(&dir, "missing.conf", &body);
        match load_config(&path) {
            Err(Error::Validation(msg)) => assert!(msg.contains("theta"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn simulate_without_initial_condition_rejected() {
        let dir = tmpdir("nosim");
        let body = S1_BODY.replace("initial_condition = 50, 40, 80\n", "")
            + "analyses = simulate\n";
        let path = write_config(&dir, "nosim.conf", &body);
        assert!(matches!(load_config(&path), Err(Error::Validation(_))));
    }

    #[test]
    fn analysis_report_s1_shape() {
        let cfg = preset("S1").unwrap();
        let report = run_analysis(&cfg, &AnalysisSettings::default()).unwrap();
        assert_eq!(report.scenario, "S1");
        let feasible = report.equilibria.iter().filter(|e| e.feasible).count();
        assert_eq!(feasible, 8);
        assert_eq!(report.stability.len(), feasible);
        assert!(report.persistence.is_some());
        // the global-stability grid note is recorded for the interior branch
        assert!(report.notes.iter().any(|n| n.contains("E*")));
    }

    #[test]
    fn report_json_round_trip_is_byte_identical() {
        let cfg = preset("S2").unwrap();
        let report = run_analysis(&cfg, &AnalysisSettings::default()).unwrap();
        let mut first = Vec::new();
        export_report_json(&report, &mut first).unwrap();

        let dir = tmpdir("json");
        let path = dir.join("report.json");
        fs::write(&path, &first).unwrap();
        let loaded = load_report_json(&path).unwrap();
        assert_eq!(loaded, report);
        let mut second = Vec::new();
        export_report_json(&loaded, &mut second).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn csv_export_shape() {
        let cfg = preset("S1").unwrap();
        let opts = IntegratorOptions::with(1e-8, 1e-10, 10.0, 0.1, 1.0).unwrap();
        let traj = integrate(&cfg.params, &cfg.initial_conditions[0], &opts).unwrap();
        let mut buf = Vec::new();
        export_trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x,y,z"));
        let first = lines.next().unwrap();
        assert!(first.starts_with("0.0000000000000000e0,5.0000000000000000e1"));
        assert_eq!(text.lines().count(), traj.times.len() + 1);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn empty_trajectory_exports_header_only() {
        let traj = Trajectory {
            times: vec![],
            states: vec![],
            accepted_steps: 0,
            rejected_steps: 0,
            min_component: 0.0,
            sup_omega: 0.0,
        };
        let mut buf = Vec::new();
        export_trajectory_csv(&traj, &mut buf).unwrap();
        assert_eq!(buf, b"t,x,y,z\n");
    }

    #[test]
    fn csv_export_is_byte_stable() {
        let cfg = preset("S1").unwrap();
        let opts = IntegratorOptions::with(1e-8, 1e-10, 5.0, 0.05, 0.5).unwrap();
        let traj = integrate(&cfg.params, &cfg.initial_conditions[0], &opts).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        export_trajectory_csv(&traj, &mut a).unwrap();
        export_trajectory_csv(&integrate(&cfg.params, &cfg.initial_conditions[0], &opts).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn simulation_s1_converges_to_interior() {
        let cfg = preset("S1").unwrap();
        let runs = run_simulation(&cfg, &AnalysisSettings::default()).unwrap();
        assert_eq!(runs.len(), 1);
        let hits: Vec<_> = runs[0].verdicts.iter().filter(|v| v.converged).collect();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].target.family.tag, FamilyTag::EStar);
    }

    #[test]
    fn simulation_s4_separates_the_two_interior_attractors() {
        // two initial conditions, two stable coexistence branches
        let cfg = preset("S4").unwrap();
        let runs = run_simulation(&cfg, &AnalysisSettings::default()).unwrap();
        assert_eq!(runs.len(), 2);
        let hit_x = |run: &SimulationRun| {
            let hits: Vec<_> = run.verdicts.iter().filter(|v| v.converged).collect();
            assert_eq!(hits.len(), 1, "{:?}", run.initial);
            hits[0].target.state.x
        };
        assert!((hit_x(&runs[0]) - 3.271695068).abs() < 1e-3);
        assert!((hit_x(&runs[1]) - 756.7723630).abs() < 1e-2);
    }

    #[test]
    fn resolve_preset_errors_on_unknown() {
        assert!(matches!(resolve_preset("NOPE"), Err(Error::Validation(_))));
    }
}
