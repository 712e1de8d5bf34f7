//! Scenario files, batch runs and report files.
//!
//! A scenario is a JSON document:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "name": "swirl_demo",
//!   "simulation": { "grid": {"n_rho": 16, "n_z": 16}, "nu": 1.0, "t_end": 0.01,
//!                   "dt": {"mode": "cfl", "fraction": 0.5} },
//!   "exponents": { "a": 6, "b": "inf", "gamma": 0 },
//!   "monitor": { "q": 4 },
//!   "output": { "checkpoint_file_stride": 0 }
//! }
//! ```
//!
//! `simulation` is a [`SimConfig`], `monitor` a [`MonitorSettings`]. A run
//! writes into `<output root>/<directory>`:
//!
//! | file | content |
//! |------|---------|
//! | `diagnostics.csv` | one row per checkpoint, columns from [`diagnostics_columns`] |
//! | `summary.txt`, `summary.json` | every check with worst score, tolerance and status |
//! | `checkpoints/step_XXXXXXXX.ckpt` | states, when `checkpoint_file_stride > 0` |
//! | `manifest.json` | fully resolved scenario, versions and SHA-256 of every file above |
//!
//! The output root is `$AXISWIRL_OUTPUT_ROOT`, or `axiswirl-out` in the
//! working directory.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Component as PathComponent, Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result, EXIT_ASSERTION, EXIT_OK};
use crate::exponents::{
    check_admissible, derive_exponents, fmt_exponent, holder_young_pairs, parse_exponent, ExponentSet,
};
use crate::io::{fmt_f64, sha256_hex, write_checkpoint, CHECKPOINT_VERSION};
use crate::mms::{convergence_order, lopsided_control, ConvergenceReport, MmsSpec, StudySettings};
use crate::monitor::{diagnostics_columns, CheckStatus, Monitor, MonitorConfig, MonitorReport, MonitorSettings};
use crate::solver::{Failure, SimConfig, Simulation};

pub const SCHEMA_VERSION: u32 = 1;
pub const OUTPUT_ROOT_ENV: &str = "AXISWIRL_OUTPUT_ROOT";
pub const DEFAULT_OUTPUT_ROOT: &str = "axiswirl-out";
/// Convergence order the `mms` report requires between its two finest levels.
pub const MMS_ORDER_THRESHOLD: f64 = 1.9;

/// An exponent that may be infinite; written as a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&fmt_exponent(self.0))
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Exponent(x)),
            Raw::Text(t) => parse_exponent(&t)
                .map(Exponent)
                .map_err(|_| serde::de::Error::custom(format!("malformed exponent '{t}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentInputs {
    pub a: Exponent,
    pub b: Exponent,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputOptions {
    /// Directory under the output root; defaults to the scenario name, then
    /// the file stem.
    pub directory: Option<String>,
    /// Write a checkpoint file every this many solver steps (0: never). The
    /// final state is always written when enabled.
    pub checkpoint_file_stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub simulation: SimConfig,
    pub exponents: ExponentInputs,
    #[serde(default)]
    pub monitor: MonitorSettings,
    #[serde(default)]
    pub output: OutputOptions,
}

/// Parses and validates scenario text. Schema errors name the offending
/// field path.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("scenario is not valid JSON: {e}")))?;
    match value.get("schema_version") {
        None => return Err(Error::Config("schema_version: missing field".into())),
        Some(v) if v.as_u64() != Some(SCHEMA_VERSION as u64) => {
            return Err(Error::Config(format!(
                "schema_version: unsupported value {v}, expected {SCHEMA_VERSION}"
            )))
        }
        _ => {}
    }
    let scenario: Scenario = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::Config(format!("{path}: {}", e.into_inner()))
    })?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path)?;
    parse_scenario(&text)
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.simulation
            .validate()
            .map_err(|e| prefix_config("simulation", e))?;
        self.exponent_set()?;
        if let Some(dir) = &self.output.directory {
            check_relative_dir(dir)?;
        }
        Ok(())
    }

    pub fn exponent_set(&self) -> Result<ExponentSet> {
        derive_exponents(self.exponents.a.0, self.exponents.b.0, self.exponents.gamma)
    }

    /// Output directory name: `output.directory`, `name`, then the file stem.
    pub fn directory_name(&self, path: &Path) -> Result<String> {
        let dir = match (&self.output.directory, &self.name) {
            (Some(d), _) => d.clone(),
            (None, Some(n)) => n.clone(),
            (None, None) => path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("scenario")
                .to_string(),
        };
        check_relative_dir(&dir)?;
        Ok(dir)
    }
}

fn prefix_config(prefix: &str, e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("{prefix}: {m}")),
        other => other,
    }
}

fn check_relative_dir(dir: &str) -> Result<()> {
    let p = Path::new(dir);
    let ok = !dir.is_empty() && p.components().all(|c| matches!(c, PathComponent::Normal(_)));
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "output.directory: '{dir}' must be a relative path without '..'"
        )))
    }
}

/// Output root from the environment, falling back to [`DEFAULT_OUTPUT_ROOT`].
pub fn output_root_from_env() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT))
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub directory: PathBuf,
    pub report: MonitorReport,
    pub failure: Option<Failure>,
}

#[derive(Debug, Serialize)]
struct SummaryJson<'a> {
    status: &'static str,
    exit_code: i32,
    truncated: bool,
    failure: &'a Option<Failure>,
    dt: f64,
    steps_taken: usize,
    checkpoints: usize,
    final_time: f64,
    constants: Value,
    c3_needed: Vec<Value>,
    checks: &'a [crate::monitor::CheckSummary],
    blowup: &'a crate::monitor::BlowupReport,
}

/// Runs the scenario at `path` and writes its artifacts under `output_root`.
///
/// Errors carry their exit status through [`Error::exit_code`]. A run that
/// blows up is not an error: it finishes with a truncation flag.
pub fn run_scenario(path: &Path, output_root: &Path) -> Result<RunOutcome> {
    let scenario = load_scenario(path)?;
    let dir = output_root.join(scenario.directory_name(path)?);
    run_loaded(&scenario, &dir)
}

/// Runs an already validated scenario into `dir`.
pub fn run_loaded(scenario: &Scenario, dir: &Path) -> Result<RunOutcome> {
    let exponents = scenario.exponent_set()?;
    let sim = Simulation::new(&scenario.simulation)?;
    let grid = sim.grid();
    let sc = &scenario.simulation;
    let no_slip = sc.wall.u_phi == 0.0 && sc.wall.u_z == 0.0;
    let mcfg = MonitorConfig::resolve(
        &scenario.monitor,
        exponents,
        &grid,
        sc.nu,
        no_slip,
        sc.projection_tolerance,
    )
    .map_err(|e| prefix_config("monitor", e))?;

    fs::create_dir_all(dir)?;
    let ckpt_dir = dir.join("checkpoints");
    if ckpt_dir.exists() {
        fs::remove_dir_all(&ckpt_dir)?;
    }
    let stride = scenario.output.checkpoint_file_stride;
    if stride > 0 {
        fs::create_dir_all(&ckpt_dir)?;
    }

    let n_steps = sim.n_steps();
    let mut monitor = Monitor::new(mcfg);
    let mut last_written = None;
    let mut last_state = None;
    let summary = sim.run_with_observer(|step, v, h| {
        monitor.observe(step, v, h)?;
        if stride > 0 {
            if step % stride == 0 {
                write_checkpoint(&ckpt_dir.join(checkpoint_name(step)), v)?;
                last_written = Some(step);
            }
            last_state = Some((step, v.clone()));
        }
        Ok(())
    })?;
    if let Some((step, v)) = last_state {
        if last_written != Some(step) {
            write_checkpoint(&ckpt_dir.join(checkpoint_name(step)), &v)?;
        }
    }
    let report = monitor.finish(summary.failure.is_some())?;
    let exit_code = if report.asserted_pass() { EXIT_OK } else { EXIT_ASSERTION };

    let csv = report.to_csv();
    fs::write(dir.join("diagnostics.csv"), &csv)?;
    let text = summary_text(scenario, &report, &summary, n_steps, exit_code);
    fs::write(dir.join("summary.txt"), &text)?;
    let cfg = &report.config;
    let sj = SummaryJson {
        status: if exit_code == EXIT_OK { "PASS" } else { "FAIL" },
        exit_code,
        truncated: summary.failure.is_some(),
        failure: &summary.failure,
        dt: summary.dt,
        steps_taken: summary.steps_taken,
        checkpoints: summary.checkpoints,
        final_time: summary.final_time,
        constants: json!({"c_sob": cfg.c_sob, "c_grow": cfg.c_grow, "c3": cfg.c3}),
        c3_needed: report.c3_needed.iter().map(|(e, c)| json!({"eps": e, "c3": c})).collect(),
        checks: &report.checks,
        blowup: &report.blowup,
    };
    let mut sj_text = serde_json::to_string_pretty(&sj).map_err(|e| Error::Format(e.to_string()))?;
    sj_text.push('\n');
    fs::write(dir.join("summary.json"), &sj_text)?;

    let mut files = vec![
        file_entry("diagnostics.csv", csv.as_bytes()),
        file_entry("summary.txt", text.as_bytes()),
        file_entry("summary.json", sj_text.as_bytes()),
    ];
    if stride > 0 {
        let mut names: Vec<_> = fs::read_dir(&ckpt_dir)?
            .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()))
            .collect::<std::io::Result<_>>()?;
        names.sort();
        for n in names {
            let bytes = fs::read(ckpt_dir.join(&n))?;
            files.push(file_entry(&format!("checkpoints/{n}"), &bytes));
        }
    }
    let resolved = serde_json::to_value(scenario).map_err(|e| Error::Format(e.to_string()))?;
    let manifest = json!({
        "tool": {"name": "axiswirl", "version": env!("CARGO_PKG_VERSION")},
        "schema_version": SCHEMA_VERSION,
        "checkpoint_format_version": CHECKPOINT_VERSION,
        "scenario": resolved,
        "derived": {
            "exponents": exponents.to_json(),
            "monitor": serde_json::to_value(cfg).map_err(|e| Error::Format(e.to_string()))?,
            "dt": summary.dt,
            "n_steps": n_steps,
            "grid_h_min": grid.h_min(),
        },
        "diagnostics_columns": diagnostics_columns(cfg),
        "files": files,
    });
    let mut m_text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    m_text.push('\n');
    fs::write(dir.join("manifest.json"), m_text)?;

    Ok(RunOutcome {
        exit_code,
        directory: dir.to_path_buf(),
        report,
        failure: summary.failure,
    })
}

fn checkpoint_name(step: usize) -> String {
    format!("step_{step:08}.ckpt")
}

fn file_entry(path: &str, bytes: &[u8]) -> Value {
    json!({"path": path, "bytes": bytes.len(), "sha256": sha256_hex(bytes)})
}

fn summary_text(
    scenario: &Scenario,
    report: &MonitorReport,
    run: &crate::solver::RunSummary,
    n_steps: usize,
    exit_code: i32,
) -> String {
    let mut s = String::new();
    let cfg = &report.config;
    let e = &cfg.exponents;
    let _ = writeln!(s, "axiswirl run summary");
    let _ = writeln!(s, "scenario: {}", scenario.name.as_deref().unwrap_or("(unnamed)"));
    let _ = writeln!(s, "status: {}", if exit_code == EXIT_OK { "PASS" } else { "FAIL" });
    match &run.failure {
        None => {
            let _ = writeln!(s, "truncated: no");
        }
        Some(f) => {
            let _ = writeln!(
                s,
                "truncated: yes, {:?} at step {} (t = {}): {}",
                f.kind,
                f.step,
                fmt_f64(f.time),
                f.message
            );
        }
    }
    let _ = writeln!(
        s,
        "steps: {} of {} (dt = {}), checkpoints: {}, final time: {}",
        run.steps_taken,
        n_steps,
        fmt_f64(run.dt),
        run.checkpoints,
        fmt_f64(run.final_time)
    );
    let _ = writeln!(
        s,
        "exponents: a = {}, b = {}, gamma = {}, p = {}, s = {}, theta = {}",
        fmt_exponent(e.a),
        fmt_exponent(e.b),
        e.gamma,
        e.p_hold,
        e.s,
        e.theta
    );
    let _ = writeln!(
        s,
        "constants: q = {}, c_sob = {}, c_grow = {}, c3 = {}",
        cfg.q,
        fmt_f64(cfg.c_sob),
        fmt_f64(cfg.c_grow),
        fmt_f64(cfg.c3)
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "{:<32} {:<12} {:>24} {:>24} {:>24}", "check", "status", "worst", "tolerance", "at time");
    for c in &report.checks {
        let _ = writeln!(
            s,
            "{:<32} {:<12} {:>24} {:>24} {:>24}",
            c.name,
            c.status.to_string(),
            fmt_f64(c.worst_score),
            fmt_f64(c.tolerance),
            fmt_f64(c.worst_time)
        );
    }
    let _ = writeln!(s);
    for (eps, c3) in &report.c3_needed {
        let _ = writeln!(s, "c3 needed to close the vorticity inequality at eps = {eps}: {}", fmt_f64(*c3));
    }
    let b = &report.blowup;
    let _ = writeln!(s);
    let _ = writeln!(s, "blow-up indicator over [{}, {}]:", fmt_f64(scenario.simulation.t_start), fmt_f64(b.window_end));
    let _ = writeln!(s, "  sup F = {}, final F = {}", fmt_f64(b.functional_max), fmt_f64(b.functional_final));
    let _ = writeln!(s, "  int |omega|_L2 dt = {}", fmt_f64(b.vorticity_l2_integral));
    let _ = writeln!(s, "  sup |Du|_L2 = {}", fmt_f64(b.grad_u_l2_max));
    let _ = writeln!(s, "  all finite: {}, truncated: {}", b.all_finite, b.truncated);
    let failed: Vec<_> = report
        .checks
        .iter()
        .filter(|c| c.status == CheckStatus::Fail)
        .map(|c| c.name.as_str())
        .collect();
    if !failed.is_empty() {
        let _ = writeln!(s, "\nfailed asserted checks: {}", failed.join(", "));
    }
    s
}

/// Result of one scenario inside a sweep.
#[derive(Debug)]
pub struct SweepEntry {
    pub scenario: PathBuf,
    pub result: Result<RunOutcome>,
}

impl SweepEntry {
    pub fn exit_code(&self) -> i32 {
        match &self.result {
            Ok(o) => o.exit_code,
            Err(e) => e.exit_code(),
        }
    }
}

/// Runs every `*.json` scenario in `dir` concurrently, each into its own
/// directory under `output_root`. Entries come back sorted by file name.
pub fn sweep(dir: &Path, output_root: &Path) -> Result<Vec<SweepEntry>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|x| x == "json"));
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Config(format!("no *.json scenarios in {}", dir.display())));
    }
    let loaded: Vec<(PathBuf, Result<Scenario>)> =
        paths.into_iter().map(|p| (p.clone(), load_scenario(&p))).collect();
    let mut seen = BTreeSet::new();
    for (p, s) in &loaded {
        if let Ok(s) = s {
            let d = s.directory_name(p)?;
            if !seen.insert(d.clone()) {
                return Err(Error::Config(format!("two scenarios write to output directory '{d}'")));
            }
        }
    }
    Ok(loaded
        .into_par_iter()
        .map(|(path, s)| {
            let result = s.and_then(|s| {
                let d = output_root.join(s.directory_name(&path)?);
                run_loaded(&s, &d)
            });
            SweepEntry { scenario: path, result }
        })
        .collect())
}

/// Convergence study for the `mms` command.
#[derive(Debug, Clone)]
pub struct MmsOutcome {
    pub report: ConvergenceReport,
    pub passed: bool,
    pub directory: PathBuf,
}

/// Runs a convergence study and writes `convergence.csv` and `summary.txt`
/// under `<output_root>/mms_<kind>`. `kind` is a manufactured family or
/// `lopsided_control`, the first-order negative control.
pub fn mms_report(kind: &str, levels: &[usize], output_root: &Path) -> Result<MmsOutcome> {
    let report = if kind == "lopsided_control" {
        lopsided_control(levels)?
    } else {
        let spec = MmsSpec::from_kind(kind)?;
        convergence_order(spec, levels, &StudySettings::for_spec(&spec))?
    };
    let passed = report.asymptotic_passes(MMS_ORDER_THRESHOLD);
    let dir = output_root.join(format!("mms_{kind}"));
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("convergence.csv"), report.to_csv())?;
    let mut s = String::new();
    let _ = writeln!(s, "convergence study: {kind}, levels {levels:?}");
    let _ = writeln!(s, "required order between the two finest levels: {MMS_ORDER_THRESHOLD}");
    for f in &report.fields {
        let show = |o: Option<f64>| o.map(fmt_f64).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:<8} exact={} finest_order={} min_order={} max_order={} monotone={}",
            f.field,
            f.exact,
            show(f.finest_order),
            show(f.min_order),
            show(f.max_order),
            f.monotone
        );
    }
    let _ = writeln!(s, "result: {}", if passed { "PASS" } else { "FAIL" });
    fs::write(dir.join("summary.txt"), s)?;
    Ok(MmsOutcome { report, passed, directory: dir })
}

/// Text and JSON report for `check-exponents`. The boolean is the verdict.
pub fn exponent_report(a: f64, b: f64, gamma: f64) -> (String, Value, bool) {
    let mut s = String::new();
    let _ = writeln!(s, "a = {}, b = {}, gamma = {gamma}", fmt_exponent(a), fmt_exponent(b));
    let violations = check_admissible(a, b, gamma);
    if !violations.is_empty() {
        let _ = writeln!(s, "verdict: inadmissible");
        for v in &violations {
            let _ = writeln!(s, "  violation: {v}");
        }
        let j = json!({
            "a": fmt_exponent(a), "b": fmt_exponent(b), "gamma": gamma,
            "admissible": false,
            "violations": violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        });
        return (s, j, false);
    }
    match derive_exponents(a, b, gamma) {
        Err(e) => {
            let _ = writeln!(s, "verdict: admissible");
            let _ = writeln!(s, "  exponents unavailable: {e}");
            let j = json!({"a": fmt_exponent(a), "b": fmt_exponent(b), "gamma": gamma,
                           "admissible": true, "unsupported": e.to_string()});
            (s, j, true)
        }
        Ok(e) => {
            let _ = writeln!(s, "verdict: admissible");
            let _ = writeln!(s, "p     = {}", e.p_hold);
            let _ = writeln!(s, "s     = {}", e.s);
            let _ = writeln!(s, "alpha = {}", e.alpha);
            let _ = writeln!(s, "beta  = {}", e.beta);
            let _ = writeln!(s, "theta = {}", e.theta);
            let _ = writeln!(s, "delta = {}", e.delta.map(|d| d.to_string()).unwrap_or_else(|| "none".into()));
            let _ = writeln!(s, "pairs:");
            let pairs = holder_young_pairs(&e);
            for p in &pairs {
                let _ = writeln!(s, "  {:<14} ({}, {})  |1/x + 1/y - 1| = {:e}", p.name, p.first, p.second, p.defect());
            }
            let mut j = e.to_json();
            j["admissible"] = json!(true);
            j["pairs"] = pairs
                .iter()
                .map(|p| json!({"name": p.name, "first": p.first, "second": p.second}))
                .collect();
            (s, j, true)
        }
    }
}
