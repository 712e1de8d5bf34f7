//! Evaluates the a-priori estimate chain on a stream of checkpoints.
//!
//! Each checkpoint becomes a [`Snapshot`] of integrals. Consecutive snapshots
//! give one budget per estimate. Constant-free steps (the Hölder and Young
//! splittings, the energy identities, the projection) are asserted; margins
//! that involve a user constant are reported only.
//!
//! Every budget uses the nodal view of the staggered state and the
//! diagnostic stencils, whose wall ghosts extrapolate instead of assuming a
//! boundary condition.

pub mod envelope;
pub mod quartic;
pub mod snapshot;
pub mod swirl;
pub mod vorticity;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ExponentSet;
use crate::fields::{ForcingFields, VelocityState};
use crate::grid::{serrin_accumulate, CylGrid};
use crate::io::fmt_f64;

pub use envelope::{blowup_indicator, gronwall_envelope, BlowupReport};
pub use quartic::{forcing_constant, quartic_swirl_budget, QuarticBudget};
pub use snapshot::{Inequality, Snapshot};
pub use swirl::{
    calibrate_c_sob, d_of_t, negative_moment, swirl_lq_budget, swirl_lq_budget_from_states,
    transport_cancellation, SwirlBudget,
};
pub use vorticity::{weighted_vorticity_budget, VorticityBudget};

/// Monitor options as they appear in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonitorSettings {
    /// Even exponent of the swirl norm.
    pub q: u32,
    /// Weights `ε` of the vorticity estimate, each in `[0, 1)`.
    pub epsilon_list: Vec<f64>,
    /// Constant in `d(t)`; derived from `c_sob` when absent.
    pub c_grow: Option<f64>,
    /// Sobolev constant; calibrated on the grid when absent.
    pub c_sob: Option<f64>,
    /// Forcing constant of the closed vorticity inequality.
    pub c3: f64,
    /// `C` in the identity tolerance `C · (Δt + h²)`, relative to the size of
    /// the identity's terms.
    pub identity_constant: f64,
    /// Relative tolerance on the Hölder and Young steps.
    pub inequality_tolerance: f64,
}

impl Default for MonitorSettings {
    fn default() -> Self {
        MonitorSettings {
            q: 4,
            epsilon_list: vec![0.5, 0.25, 0.1, 0.0],
            c_grow: None,
            c_sob: None,
            c3: 0.0,
            identity_constant: 10.0,
            inequality_tolerance: 1e-12,
        }
    }
}

/// Resolved monitor configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorConfig {
    pub q: u32,
    pub epsilons: Vec<f64>,
    #[serde(skip)]
    pub exponents: ExponentSet,
    pub nu: f64,
    pub c_grow: f64,
    pub c_sob: f64,
    pub c3: f64,
    pub identity_constant: f64,
    pub inequality_tolerance: f64,
    pub divergence_tolerance: f64,
    /// The energy identities drop wall terms that vanish only for a
    /// motionless wall; with a moving wall they are reported, not asserted.
    pub no_slip: bool,
}

impl MonitorConfig {
    pub fn resolve(
        settings: &MonitorSettings,
        exponents: ExponentSet,
        grid: &CylGrid,
        nu: f64,
        no_slip: bool,
        divergence_tolerance: f64,
    ) -> Result<MonitorConfig> {
        if settings.q < 2 || settings.q % 2 != 0 {
            return Err(Error::Config(format!("monitor.q must be even and >= 2, got {}", settings.q)));
        }
        if settings.epsilon_list.is_empty() {
            return Err(Error::Config("monitor.epsilon_list must not be empty".into()));
        }
        if let Some(e) = settings.epsilon_list.iter().find(|e| !(**e >= 0.0 && **e < 1.0)) {
            return Err(Error::Config(format!("monitor.epsilon_list entries must lie in [0, 1), got {e}")));
        }
        if !(nu > 0.0) {
            return Err(Error::Config(format!("nu must be positive, got {nu}")));
        }
        for (name, v) in [("c_grow", settings.c_grow), ("c_sob", settings.c_sob)] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Config(format!("monitor.{name} must be finite and >= 0, got {v}")));
                }
            }
        }
        if !(settings.c3.is_finite() && settings.c3 >= 0.0) {
            return Err(Error::Config(format!("monitor.c3 must be finite and >= 0, got {}", settings.c3)));
        }
        if !(settings.identity_constant > 0.0 && settings.inequality_tolerance >= 0.0) {
            return Err(Error::Config("monitor tolerances must be positive".into()));
        }
        let c_sob = settings.c_sob.unwrap_or_else(|| calibrate_c_sob(grid));
        let mut cfg = MonitorConfig {
            q: settings.q,
            epsilons: settings.epsilon_list.clone(),
            exponents,
            nu,
            c_grow: 0.0,
            c_sob,
            c3: settings.c3,
            identity_constant: settings.identity_constant,
            inequality_tolerance: settings.inequality_tolerance,
            divergence_tolerance,
            no_slip,
        };
        cfg.c_grow = settings.c_grow.unwrap_or_else(|| cfg.derived_c_grow());
        Ok(cfg)
    }

    /// `ε₁ = pν/2`: absorbs half of `νq∫u^q/ρ²`.
    pub fn eps1(&self) -> f64 {
        self.exponents.p_hold * self.nu / 2.0
    }

    /// `ε₂`, chosen so the Sobolev term absorbs half of the gradient
    /// dissipation `ν(4(q−1)/q)∫|∇W|²`.
    pub fn eps2(&self) -> f64 {
        let (p, s) = (self.exponents.p_hold, self.exponents.s);
        let q = self.q as f64;
        let k1 = self.eps1().powf(1.0 / (1.0 - p));
        self.nu * (2.0 * (q - 1.0) / q) * s * p / (3.0 * (p - 1.0) * q * self.c_sob * k1)
    }

    /// `c = q(p−1)(s−3)/(sp) · ε₁^{1/(1−p)} · ε₂^{3/(3−s)}`.
    pub fn derived_c_grow(&self) -> f64 {
        let (p, s) = (self.exponents.p_hold, self.exponents.s);
        let q = self.q as f64;
        if self.c_sob == 0.0 {
            return 0.0;
        }
        let k1 = self.eps1().powf(1.0 / (1.0 - p));
        q * (p - 1.0) * (s - 3.0) / (s * p) * k1 * self.eps2().powf(3.0 / (3.0 - s))
    }

    /// `d = q + c X^θ`.
    pub fn growth_rate(&self, x_moment: f64) -> f64 {
        self.q as f64 + self.c_grow * x_moment.powf(self.exponents.theta)
    }
}

// ---------------------------------------------------------------------------
// Checks

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Must hold; a failure makes the run exit with an assertion failure.
    Asserted,
    /// Reported for inspection; never fails a run.
    ReportOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckStatus {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "REPORT-ONLY")]
    ReportOnly,
}

impl std::fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::ReportOnly => "REPORT-ONLY",
        })
    }
}

/// Worst case of one check over the run.
///
/// `worst_score` is the smallest normalised score seen; an asserted check
/// passes when every score is at least `−tolerance`. Inequalities score
/// `(rhs − lhs)/max(|lhs|, |rhs|)`, identities `−|residual|/Σ|terms|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub kind: CheckKind,
    pub status: CheckStatus,
    pub samples: usize,
    pub worst_score: f64,
    pub worst_time: f64,
    /// Largest tolerance in force (identity bands vary per step).
    pub tolerance: f64,
    pub failures: usize,
}

#[derive(Debug, Default)]
struct Checks {
    list: Vec<CheckSummary>,
}

impl Checks {
    fn record(&mut self, name: &str, kind: CheckKind, score: f64, tolerance: f64, time: f64) {
        let i = match self.list.iter().position(|c| c.name == name) {
            Some(i) => i,
            None => {
                self.list.push(CheckSummary {
                    name: name.to_string(),
                    kind,
                    status: match kind {
                        CheckKind::Asserted => CheckStatus::Pass,
                        CheckKind::ReportOnly => CheckStatus::ReportOnly,
                    },
                    samples: 0,
                    worst_score: f64::INFINITY,
                    worst_time: time,
                    tolerance: 0.0,
                    failures: 0,
                });
                self.list.len() - 1
            }
        };
        let c = &mut self.list[i];
        c.samples += 1;
        c.tolerance = c.tolerance.max(tolerance);
        // a NaN score sticks as the worst value
        if !c.worst_score.is_nan() && (score.is_nan() || score < c.worst_score) {
            c.worst_score = score;
            c.worst_time = time;
        }
        if kind == CheckKind::Asserted && !(score >= -tolerance) {
            c.failures += 1;
            c.status = CheckStatus::Fail;
        }
    }

    fn inequality(&mut self, name: &str, ineq: &Inequality, tolerance: f64, time: f64) {
        self.record(name, CheckKind::Asserted, ineq.relative(), tolerance, time);
    }
}

fn identity_score(residual: f64, scale: f64) -> f64 {
    if scale > 0.0 { -residual.abs() / scale } else if residual == 0.0 { 0.0 } else { f64::NEG_INFINITY }
}

// ---------------------------------------------------------------------------
// Collator

/// Asserted identity checks; report-only once a run is truncated.
pub const IDENTITY_CHECKS: [&str; 2] = ["identity_p", "identity_ad"];

fn eps_label(eps: f64) -> String {
    format!("eps{eps}")
}

/// Column names of the diagnostics table for `cfg`, in output order.
pub fn diagnostics_columns(cfg: &MonitorConfig) -> Vec<String> {
    let mut cols: Vec<String> = [
        "step",
        "time",
        "kinetic_energy",
        "relative_divergence",
        "swirl_lq_norm",
        "swirl_lq_power",
        "forcing_lq_power",
        "negative_moment",
        "growth_rate",
        "serrin_norm",
        "serrin_running",
        "growth_excess_integral",
        "growth_integral",
        "gronwall_envelope",
        "transport_cancellation",
        "swirl_margin",
        "identity_p_residual",
        "holder_h1",
        "young_y1",
        "holder_h2",
        "holder_h3",
        "young_y2",
        "young_forcing",
        "sobolev",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for &eps in &cfg.epsilons {
        let l = eps_label(eps);
        for base in ["vort_energy", "vort_margin_full", "vort_margin", "identity_z_residual", "young_vort_source"] {
            cols.push(format!("{base}_{l}"));
        }
    }
    for s in [
        "quartic_swirl",
        "quartic_margin",
        "identity_ad_residual",
        "young_quartic_forcing",
        "blowup_functional",
        "vorticity_l2",
        "grad_u_l2",
    ] {
        cols.push(s.to_string());
    }
    cols
}

/// Consumes checkpoints in time order and builds the diagnostics table.
#[derive(Debug)]
pub struct Monitor {
    cfg: MonitorConfig,
    columns: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
    prev: Option<Snapshot>,
    checks: Checks,
    serrin_running: f64,
    growth_excess: f64,
    growth_integral: f64,
    times: Vec<f64>,
    growth: Vec<f64>,
    y: Vec<f64>,
    h_q: Vec<f64>,
    energy: Vec<f64>,
    functional: Vec<f64>,
    vorticity_l2: Vec<f64>,
    grad_u_l2: Vec<f64>,
    swirl_margins: Vec<f64>,
    c3_needed: Vec<f64>,
}

/// Everything the monitor learned from one run.
#[derive(Debug, Clone, Serialize)]
pub struct MonitorReport {
    pub config: MonitorConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub checks: Vec<CheckSummary>,
    pub blowup: BlowupReport,
    /// Per `ε`, the smallest `c₃` that closes the vorticity inequality on
    /// every step.
    pub c3_needed: Vec<(f64, f64)>,
}

impl Monitor {
    pub fn new(cfg: MonitorConfig) -> Monitor {
        let columns = diagnostics_columns(&cfg);
        let n_eps = cfg.epsilons.len();
        Monitor {
            cfg,
            columns,
            rows: Vec::new(),
            prev: None,
            checks: Checks::default(),
            serrin_running: 0.0,
            growth_excess: 0.0,
            growth_integral: 0.0,
            times: Vec::new(),
            growth: Vec::new(),
            y: Vec::new(),
            h_q: Vec::new(),
            energy: Vec::new(),
            functional: Vec::new(),
            vorticity_l2: Vec::new(),
            grad_u_l2: Vec::new(),
            swirl_margins: Vec::new(),
            c3_needed: vec![0.0; n_eps],
        }
    }

    pub fn config(&self) -> &MonitorConfig {
        &self.cfg
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn observe(&mut self, step: usize, v: &VelocityState, h: &ForcingFields) -> Result<()> {
        let snap = Snapshot::new(v, h, &self.cfg)?;
        let cfg = &self.cfg;
        let e = &cfg.exponents;
        let t = snap.time;
        let dt = match &self.prev {
            Some(p) => {
                let dt = t - p.time;
                if !(dt > 0.0) {
                    return Err(Error::Contract(format!("checkpoint times must increase, got dt = {dt}")));
                }
                dt
            }
            None => 0.0,
        };
        self.serrin_running = serrin_accumulate(self.serrin_running, &snap.u_rho_neg, e.a, e.b, e.gamma, dt)?;
        self.growth_excess += dt * snap.swirl.x_moment.powf(e.theta);
        if let Some(p) = &self.prev {
            self.growth_integral += 0.5 * (p.swirl.growth_rate + snap.swirl.growth_rate) * dt;
        }

        let itol = cfg.inequality_tolerance;
        let sc = &snap.sub_checks;
        for (name, ineq) in [
            ("holder_h1", &sc.holder_h1),
            ("young_y1", &sc.young_y1),
            ("holder_h2", &sc.holder_h2),
            ("holder_h3", &sc.holder_h3),
            ("young_y2", &sc.young_y2),
            ("young_forcing", &sc.young_forcing),
            ("young_quartic_forcing", &snap.quartic.young_forcing),
        ] {
            self.checks.inequality(name, ineq, itol, t);
        }
        for vt in &snap.vorticity {
            self.checks
                .inequality(&format!("young_vort_source_{}", eps_label(vt.eps)), &vt.young_source, itol, t);
        }
        self.checks
            .record("sobolev", CheckKind::ReportOnly, sc.sobolev.relative(), 0.0, t);
        self.checks.record(
            "projection_divergence",
            CheckKind::Asserted,
            -snap.relative_divergence,
            cfg.divergence_tolerance,
            t,
        );
        self.checks.record(
            "transport_cancellation",
            CheckKind::ReportOnly,
            identity_score(snap.swirl.transport, snap.swirl.transport_scale),
            0.0,
            t,
        );

        let n_cols = self.columns.len();
        let mut row: Vec<Option<f64>> = vec![None; n_cols];
        let mut put = |name: &str, v: Option<f64>| {
            if let Some(i) = self.columns.iter().position(|c| c == name) {
                row[i] = v;
            }
        };
        let q = cfg.q as f64;
        put("step", Some(step as f64));
        put("time", Some(t));
        put("kinetic_energy", Some(snap.kinetic_energy));
        put("relative_divergence", Some(snap.relative_divergence));
        put("swirl_lq_norm", Some(snap.swirl.y.powf(1.0 / q)));
        put("swirl_lq_power", Some(snap.swirl.y));
        put("forcing_lq_power", Some(snap.swirl.h_q));
        put("negative_moment", Some(snap.swirl.x_moment));
        put("growth_rate", Some(snap.swirl.growth_rate));
        put("serrin_norm", Some(snap.swirl.serrin_norm));
        put("serrin_running", Some(self.serrin_running));
        put("growth_excess_integral", Some(self.growth_excess));
        put("growth_integral", Some(self.growth_integral));
        put("transport_cancellation", Some(snap.swirl.transport));
        for (name, ineq) in [
            ("holder_h1", &sc.holder_h1),
            ("young_y1", &sc.young_y1),
            ("holder_h2", &sc.holder_h2),
            ("holder_h3", &sc.holder_h3),
            ("young_y2", &sc.young_y2),
            ("young_forcing", &sc.young_forcing),
            ("sobolev", &sc.sobolev),
            ("young_quartic_forcing", &snap.quartic.young_forcing),
        ] {
            put(name, Some(ineq.margin()));
        }
        for vt in &snap.vorticity {
            let l = eps_label(vt.eps);
            put(&format!("vort_energy_{l}"), Some(vt.energy));
            put(&format!("young_vort_source_{l}"), Some(vt.young_source.margin()));
        }
        put("quartic_swirl", Some(snap.quartic.q));
        put("blowup_functional", Some(snap.blowup_functional));
        put("vorticity_l2", Some(snap.vorticity_l2));
        put("grad_u_l2", Some(snap.grad_u_l2));

        if let Some(p) = &self.prev {
            let identity_kind = if cfg.no_slip { CheckKind::Asserted } else { CheckKind::ReportOnly };
            let band = cfg.identity_constant * (dt + snap.h_min * snap.h_min);

            let sb = swirl_lq_budget(p, &snap, cfg)?;
            put("swirl_margin", Some(sb.margin));
            put("identity_p_residual", Some(sb.identity_residual));
            self.checks.record("swirl_margin", CheckKind::ReportOnly, sb.margin, 0.0, t);
            self.checks.record(
                "identity_p",
                identity_kind,
                identity_score(sb.identity_residual, sb.identity_scale),
                band,
                t,
            );
            self.swirl_margins.push(sb.margin);

            for i in 0..cfg.epsilons.len() {
                let vb = weighted_vorticity_budget(p, &snap, i, cfg)?;
                let l = eps_label(vb.eps);
                put(&format!("vort_margin_full_{l}"), Some(vb.margin_full));
                put(&format!("vort_margin_{l}"), Some(vb.margin));
                put(&format!("identity_z_residual_{l}"), vb.identity_residual);
                self.checks
                    .record(&format!("vort_margin_full_{l}"), CheckKind::ReportOnly, vb.margin_full, 0.0, t);
                self.checks
                    .record(&format!("vort_margin_{l}"), CheckKind::ReportOnly, vb.margin, 0.0, t);
                if let Some(r) = vb.identity_residual {
                    self.checks.record(
                        &format!("identity_z_{l}"),
                        CheckKind::ReportOnly,
                        identity_score(r, vb.identity_scale),
                        band,
                        t,
                    );
                }
                self.c3_needed[i] = self.c3_needed[i].max(vb.c3_needed);
            }

            let qb = quartic_swirl_budget(p, &snap, cfg)?;
            put("quartic_margin", Some(qb.margin));
            put("identity_ad_residual", Some(qb.identity_residual));
            self.checks.record("quartic_margin", CheckKind::ReportOnly, qb.margin, 0.0, t);
            self.checks.record(
                "identity_ad",
                identity_kind,
                identity_score(qb.identity_residual, qb.identity_scale),
                band,
                t,
            );
        }

        self.rows.push(row);
        self.times.push(t);
        self.growth.push(snap.swirl.growth_rate);
        self.y.push(snap.swirl.y);
        self.h_q.push(snap.swirl.h_q);
        self.energy.push(snap.kinetic_energy);
        self.functional.push(snap.blowup_functional);
        self.vorticity_l2.push(snap.vorticity_l2);
        self.grad_u_l2.push(snap.grad_u_l2);
        self.prev = Some(snap);
        Ok(())
    }

    /// Closes the run: Grönwall envelope, cross-checks and the blow-up
    /// indicator. `truncated` marks a run that stopped before `t_end`.
    pub fn finish(mut self, truncated: bool) -> Result<MonitorReport> {
        if self.rows.is_empty() {
            return Err(Error::Contract("monitor saw no checkpoints".into()));
        }
        let e = self.cfg.exponents;
        let envelope = gronwall_envelope(&self.times, &self.growth, self.y[0], &self.h_q)?;
        let env_col = self.columns.iter().position(|c| c == "gronwall_envelope").expect("column");
        for (row, env) in self.rows.iter_mut().zip(&envelope) {
            row[env_col] = Some(*env);
        }
        let margins_ok = !self.swirl_margins.is_empty() && self.swirl_margins.iter().all(|m| *m >= 0.0);
        let kind = if margins_ok { CheckKind::Asserted } else { CheckKind::ReportOnly };
        for ((t, env), y) in self.times.iter().zip(&envelope).zip(&self.y) {
            let scale = env.abs().max(y.abs());
            let score = if *env == f64::INFINITY {
                1.0
            } else if scale > 0.0 {
                (env - y * (1.0 - 1e-6)) / scale
            } else {
                0.0
            };
            self.checks.record("gronwall_dominance", kind, score, 0.0, *t);
        }

        // ∫(d − q)/c dt equals the Serrin accumulator when β = aγ
        let equality = e.b.is_finite() && (e.beta - e.a * e.gamma).abs() <= 1e-12 * e.beta.abs().max(1.0);
        if equality {
            let a = self.serrin_running;
            let b = self.growth_excess;
            let scale = a.abs().max(b.abs());
            let score = if scale > 0.0 { -(a - b).abs() / scale } else { 0.0 };
            let t = *self.times.last().expect("nonempty");
            self.checks.record("serrin_cross_check", CheckKind::Asserted, score, 1e-9, t);
        }

        if self.h_q.iter().all(|h| *h == 0.0) {
            for (i, w) in self.energy.windows(2).enumerate() {
                let score = if w[0] > 0.0 { (w[0] - w[1]) / w[0] } else { 0.0 };
                self.checks
                    .record("energy_nonincreasing", CheckKind::ReportOnly, score, 0.0, self.times[i + 1]);
            }
        }

        // a truncated trajectory is not smooth over its window: the energy
        // identities are still shown but no longer decide the exit status
        if truncated {
            for c in self.checks.list.iter_mut().filter(|c| IDENTITY_CHECKS.contains(&c.name.as_str())) {
                c.kind = CheckKind::ReportOnly;
                c.status = CheckStatus::ReportOnly;
            }
        }

        let blowup = blowup_indicator(
            &self.times,
            &self.functional,
            &self.vorticity_l2,
            &self.grad_u_l2,
            truncated,
        )?;
        let c3_needed = self.cfg.epsilons.iter().cloned().zip(self.c3_needed.iter().cloned()).collect();
        Ok(MonitorReport {
            config: self.cfg,
            columns: self.columns,
            rows: self.rows,
            checks: self.checks.list,
            blowup,
            c3_needed,
        })
    }
}

impl MonitorReport {
    /// True when no asserted check failed.
    pub fn asserted_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Header row plus one line per checkpoint; empty cells where a budget
    /// needs a previous checkpoint.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        let step_col = 0;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(i, v)| match v {
                    Some(x) if i == step_col => format!("{}", *x as u64),
                    Some(x) => fmt_f64(*x),
                    None => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests;
