//! Explicit time integration of the axisymmetric momentum equations with a
//! pressure projection after every stage.
//!
//! One step is the two-stage strong-stability-preserving Runge–Kutta scheme
//!
//! ```text
//! u¹    = P(uⁿ + dt F(uⁿ, tⁿ))
//! uⁿ⁺¹  = P(½uⁿ + ½(u¹ + dt F(u¹, tⁿ + dt)))
//! ```
//!
//! where `F` is the pressure-free tendency and `P` the discrete Leray
//! projection. On the staggered mesh `P` is an orthogonal projector in the
//! volume-weighted inner product, so it never adds kinetic energy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{ForcingFields, VelocityState, WallVelocity};
use crate::grid::{integrate_unchecked, CylGrid, Stagger};
use crate::mms::{forcing_for, make_solution, ManufacturedSolution, MmsSpec};
use crate::operators::{divergence_into, gradient_into, tendency_into};
use crate::poisson::{PoissonMethod, PoissonSolver};

/// Velocities above this are treated as blow-up.
pub const OVERFLOW_SPEED: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_rho: usize,
    pub n_z: usize,
    #[serde(default = "default_rho_max")]
    pub rho_max: f64,
    #[serde(default)]
    pub z_min: f64,
    #[serde(default = "default_z_max")]
    pub z_max: f64,
}

fn default_rho_max() -> f64 {
    2.0
}
fn default_z_max() -> f64 {
    1.0
}

impl GridSpec {
    pub fn build(&self) -> Result<CylGrid> {
        CylGrid::new(self.n_rho, self.n_z, self.rho_max, self.z_min, self.z_max)
    }
}

impl From<CylGrid> for GridSpec {
    fn from(g: CylGrid) -> Self {
        GridSpec {
            n_rho: g.n_rho,
            n_z: g.n_z,
            rho_max: g.rho_max,
            z_min: g.z_min,
            z_max: g.z_max,
        }
    }
}

/// Either a fixed step or a fraction of the largest stable step at `t_start`.
///
/// The step is shrunk so that a whole number of steps spans the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeStep {
    Fixed { value: f64 },
    Cfl { fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Zero,
    RigidRotation {
        #[serde(default = "one")]
        omega: f64,
    },
    /// Taylor-vortex-with-swirl profile at `t_start`.
    TaylorVortexSwirl {
        #[serde(default = "tv_amplitude")]
        amplitude: f64,
        #[serde(default = "tv_swirl")]
        swirl: f64,
        #[serde(default = "one_u32")]
        mode: u32,
    },
    /// Snapshot of a manufactured solution at `t_start`.
    Manufactured { solution: MmsSpec },
    /// A checkpoint file written by this crate.
    File { path: String },
}

fn one() -> f64 {
    1.0
}
fn one_u32() -> u32 {
    1
}
fn tv_amplitude() -> f64 {
    0.01
}
fn tv_swirl() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Rho,
    Phi,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trig {
    Cos,
    Sin,
}

/// One separable term of a tabulated forcing:
/// `amplitude · ρ^rho_power · (R² − ρ²)^wall_power · trig(2π·z_mode·(z − z_min)/L) · e^{−decay·(t − t_start)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingTerm {
    pub component: Component,
    pub amplitude: f64,
    #[serde(default)]
    pub rho_power: u32,
    #[serde(default)]
    pub wall_power: u32,
    #[serde(default)]
    pub z_mode: u32,
    #[serde(default = "cos")]
    pub z_trig: Trig,
    #[serde(default)]
    pub decay: f64,
}

fn cos() -> Trig {
    Trig::Cos
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingSpec {
    #[default]
    Zero,
    /// The forcing that makes `solution` exact.
    Manufactured { solution: MmsSpec },
    Table { terms: Vec<ForcingTerm> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub grid: GridSpec,
    pub nu: f64,
    #[serde(default)]
    pub t_start: f64,
    pub t_end: f64,
    pub dt: TimeStep,
    #[serde(default = "zero_initial")]
    pub initial: InitialData,
    #[serde(default)]
    pub forcing: ForcingSpec,
    #[serde(default)]
    pub wall: WallVelocity,
    #[serde(default = "one_usize")]
    pub checkpoint_stride: usize,
    /// Bound on the relative divergence after each projection.
    #[serde(default = "default_projection_tol")]
    pub projection_tolerance: f64,
    #[serde(default)]
    pub poisson: PoissonMethod,
}

fn zero_initial() -> InitialData {
    InitialData::Zero
}
fn one_usize() -> usize {
    1
}
fn default_projection_tol() -> f64 {
    1e-8
}

impl SimConfig {
    pub fn validate(&self) -> Result<CylGrid> {
        let grid = self.grid.build()?;
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(Error::Config(format!("nu must be positive, got {}", self.nu)));
        }
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(Error::Config(format!(
                "need t_end > t_start, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        match self.dt {
            TimeStep::Fixed { value } if !(value.is_finite() && value > 0.0) => {
                return Err(Error::Config(format!("dt must be positive, got {value}")));
            }
            TimeStep::Cfl { fraction } if !(fraction > 0.0 && fraction <= 1.0) => {
                return Err(Error::Config(format!("cfl fraction must lie in (0, 1], got {fraction}")));
            }
            _ => {}
        }
        if self.checkpoint_stride == 0 {
            return Err(Error::Config("checkpoint_stride must be at least 1".into()));
        }
        if !(self.projection_tolerance > 0.0) {
            return Err(Error::Config("projection_tolerance must be positive".into()));
        }
        if let PoissonMethod::ConjugateGradient {
            tolerance,
            max_iterations,
        } = self.poisson
        {
            if !(tolerance > 0.0) || max_iterations == 0 {
                return Err(Error::Config(
                    "conjugate gradient needs tolerance > 0 and max_iterations > 0".into(),
                ));
            }
        }
        Ok(grid)
    }
}

// ---------------------------------------------------------------------------
// Stability

/// Gershgorin bound on the spectral radius of the discrete viscous
/// operators, including the `u/ρ²` term on the first cell.
pub fn viscous_spectral_bound(grid: &CylGrid, nu: f64) -> f64 {
    let dr2 = grid.d_rho * grid.d_rho;
    let dz2 = grid.d_z * grid.d_z;
    nu * (8.0 / dr2 + 4.0 / dz2)
}

/// Largest step satisfying every stability check for the given speed.
pub fn stable_dt(grid: &CylGrid, nu: f64, max_speed: f64) -> f64 {
    let h = grid.h_min();
    let advective = if max_speed > 0.0 { 0.5 * h / max_speed } else { f64::INFINITY };
    let diffusive = 0.25 * h * h / nu;
    let gershgorin = 2.0 / viscous_spectral_bound(grid, nu);
    advective.min(diffusive).min(gershgorin)
}

/// Checks `max|u| dt/h ≤ ½`, `ν dt/h² ≤ ¼` and `dt·λ_visc ≤ 2`.
pub fn check_stability(grid: &CylGrid, nu: f64, max_speed: f64, dt: f64) -> Result<()> {
    let h = grid.h_min();
    let suggested = stable_dt(grid, nu, max_speed);
    let mut reasons = Vec::new();
    let courant = max_speed * dt / h;
    if courant > 0.5 {
        reasons.push(format!("advective number {courant:.3} > 0.5"));
    }
    let diffusion = nu * dt / (h * h);
    if diffusion > 0.25 {
        reasons.push(format!("diffusion number {diffusion:.3} > 0.25"));
    }
    let gersh = dt * viscous_spectral_bound(grid, nu);
    if gersh > 2.0 {
        reasons.push(format!("dt times viscous spectral bound {gersh:.3} > 2"));
    }
    if reasons.is_empty() {
        Ok(())
    } else {
        Err(Error::Cfl {
            dt,
            suggested,
            reason: reasons.join(", "),
        })
    }
}

// ---------------------------------------------------------------------------
// Projection

/// `‖D u‖·h_min` in the volume-weighted `L²` norm.
pub fn divergence_norm(v: &VelocityState) -> f64 {
    let g = v.grid();
    let mut div = vec![0.0; g.len()];
    divergence_into(&g, &v.u_rho.values, &v.u_z.values, &mut div);
    let d2: Vec<f64> = div.iter().map(|x| x * x).collect();
    integrate_unchecked(g, Stagger::Center, &d2).sqrt() * g.h_min()
}

/// `‖D u‖·h_min / ‖u‖`; zero for `u = 0`.
pub fn relative_divergence(v: &VelocityState) -> f64 {
    let num = divergence_norm(v);
    let den = (2.0 * v.kinetic_energy()).sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Discrete Leray projection `u = u* − G φ` with `D G φ = D u*`.
#[derive(Debug)]
pub struct Projector {
    poisson: PoissonSolver,
    tolerance: f64,
}

impl Projector {
    pub fn new(grid: CylGrid, method: PoissonMethod, tolerance: f64) -> Self {
        Projector {
            poisson: PoissonSolver::new(grid, method),
            tolerance,
        }
    }

    /// Projects `u_star`; the returned pressure holds the potential `φ`.
    pub fn project(&self, u_star: &VelocityState) -> Result<VelocityState> {
        u_star.validate()?;
        let mut out = u_star.clone();
        let phi = self.project_in_place(&mut out.u_rho.values, &mut out.u_z.values)?;
        out.pressure.values = phi;
        // relative to the input, so that projecting a pure gradient to
        // (rounding-level) zero is not flagged
        let scale = (2.0 * u_star.kinetic_energy()).sqrt();
        let rel = if scale == 0.0 { 0.0 } else { divergence_norm(&out) / scale };
        if rel > self.tolerance {
            return Err(Error::Numeric(format!(
                "relative divergence {rel:.3e} after projection exceeds {:.3e}",
                self.tolerance
            )));
        }
        Ok(out)
    }

    fn project_in_place(&self, u_rho: &mut [f64], u_z: &mut [f64]) -> Result<Vec<f64>> {
        let g = self.grid();
        for k in 0..g.n_z {
            u_rho[g.idx(g.n_rho - 1, k)] = 0.0;
        }
        let mut div = vec![0.0; g.len()];
        divergence_into(&g, u_rho, u_z, &mut div);
        let (phi, _) = self.poisson.solve(&div)?;
        let mut g_rho = vec![0.0; g.len()];
        let mut g_z = vec![0.0; g.len()];
        gradient_into(&g, &phi, &mut g_rho, &mut g_z);
        for i in 0..g.len() {
            u_rho[i] -= g_rho[i];
            u_z[i] -= g_z[i];
        }
        Ok(phi)
    }

    fn grid(&self) -> CylGrid {
        self.poisson.grid()
    }
}

/// Projection with the default spectral Poisson solver and tolerance `1e−8`.
pub fn project(u_star: &VelocityState) -> Result<VelocityState> {
    Projector::new(u_star.grid(), PoissonMethod::Spectral, 1e-8).project(u_star)
}

// ---------------------------------------------------------------------------
// Forcing sources

enum ForcingSource {
    Zero,
    Manufactured(ManufacturedSolution),
    Table(Vec<ForcingTerm>),
}

impl ForcingSource {
    fn at(&self, grid: CylGrid, t: f64, nu: f64, t_start: f64) -> ForcingFields {
        match self {
            ForcingSource::Zero => ForcingFields::zeros(grid),
            ForcingSource::Manufactured(sol) => forcing_for(sol, grid, t, nu),
            ForcingSource::Table(terms) => {
                let r2 = grid.rho_max * grid.rho_max;
                let l = grid.length_z();
                let eval = |comp: Component, rho: f64, z: f64| -> f64 {
                    terms
                        .iter()
                        .filter(|term| term.component == comp)
                        .map(|term| {
                            let arg = 2.0 * std::f64::consts::PI * term.z_mode as f64 * (z - grid.z_min) / l;
                            let trig = match term.z_trig {
                                Trig::Cos => arg.cos(),
                                Trig::Sin => arg.sin(),
                            };
                            term.amplitude
                                * rho.powi(term.rho_power as i32)
                                * (r2 - rho * rho).powi(term.wall_power as i32)
                                * trig
                                * (-term.decay * (t - t_start)).exp()
                        })
                        .sum()
                };
                ForcingFields::from_fns(
                    grid,
                    |r, z| eval(Component::Rho, r, z),
                    |r, z| eval(Component::Phi, r, z),
                    |r, z| eval(Component::Z, r, z),
                )
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Simulation

/// Why a run stopped before `t_end`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub step: usize,
    pub time: f64,
    pub kind: FailureKind,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// Non-finite or overflowing values.
    Blowup,
    /// The state outgrew the stability limits of the fixed step.
    Stability,
    /// The pressure solve failed.
    Projection,
}

/// Checkpointed states of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SimConfig,
    pub dt: f64,
    pub checkpoints: Vec<VelocityState>,
    pub failure: Option<Failure>,
}

impl Trajectory {
    pub fn truncated(&self) -> bool {
        self.failure.is_some()
    }
}

/// Outcome of a streaming run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub dt: f64,
    pub steps_taken: usize,
    pub checkpoints: usize,
    pub final_time: f64,
    pub failure: Option<Failure>,
}

/// A configured simulation. Holds the Poisson solver and forcing source.
pub struct Simulation {
    config: SimConfig,
    grid: CylGrid,
    projector: Projector,
    forcing: ForcingSource,
    dt: f64,
    n_steps: usize,
    initial: VelocityState,
}

impl std::fmt::Debug for Simulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Simulation")
            .field("grid", &self.grid)
            .field("dt", &self.dt)
            .field("n_steps", &self.n_steps)
            .finish()
    }
}

impl Simulation {
    pub fn new(config: &SimConfig) -> Result<Self> {
        let grid = config.validate()?;
        let forcing = match &config.forcing {
            ForcingSpec::Zero => ForcingSource::Zero,
            ForcingSpec::Manufactured { solution } => ForcingSource::Manufactured(make_solution(
                *solution,
                grid.rho_max,
                grid.z_min,
                grid.length_z(),
                config.nu,
            )?),
            ForcingSpec::Table { terms } => {
                for t in terms {
                    if !(t.amplitude.is_finite() && t.decay.is_finite()) {
                        return Err(Error::Config("forcing table entries must be finite".into()));
                    }
                }
                ForcingSource::Table(terms.clone())
            }
        };
        let projector = Projector::new(grid, config.poisson, config.projection_tolerance);
        let raw = initial_state(config, grid)?;
        if !raw.is_finite() {
            return Err(Error::Config("initial data contains non-finite values".into()));
        }
        let initial = {
            let mut s = projector.project(&raw)?;
            s.pressure = raw.pressure;
            s
        };

        let window = config.t_end - config.t_start;
        let dt_target = match config.dt {
            TimeStep::Fixed { value } => value,
            TimeStep::Cfl { fraction } => fraction * stable_dt(&grid, config.nu, initial.max_speed()),
        };
        let n_steps = ((window / dt_target) - 1e-9).ceil().max(1.0) as usize;
        let dt = window / n_steps as f64;
        check_stability(&grid, config.nu, initial.max_speed(), dt)?;

        Ok(Simulation {
            config: config.clone(),
            grid,
            projector,
            forcing,
            dt,
            n_steps,
            initial,
        })
    }

    pub fn grid(&self) -> CylGrid {
        self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Projected initial state at `t_start`.
    pub fn initial_state(&self) -> Result<VelocityState> {
        Ok(self.initial.clone())
    }

    pub fn forcing_at(&self, t: f64) -> ForcingFields {
        self.forcing.at(self.grid, t, self.config.nu, self.config.t_start)
    }

    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    fn euler_into(&self, u: &VelocityState, t: f64, out: &mut VelocityState) {
        let g = self.grid;
        let h = self.forcing_at(t);
        let mut tr = vec![0.0; g.len()];
        let mut tp = vec![0.0; g.len()];
        let mut tz = vec![0.0; g.len()];
        tendency_into(
            &g,
            [&u.u_rho.values, &u.u_phi.values, &u.u_z.values],
            [&h.h_rho.values, &h.h_phi.values, &h.h_z.values],
            self.config.nu,
            self.config.wall,
            [&mut tr, &mut tp, &mut tz],
        );
        let dt = self.dt;
        for i in 0..g.len() {
            out.u_rho.values[i] = u.u_rho.values[i] + dt * tr[i];
            out.u_phi.values[i] = u.u_phi.values[i] + dt * tp[i];
            out.u_z.values[i] = u.u_z.values[i] + dt * tz[i];
        }
    }

    /// Advances step `index` (so `state.time = t_start + index·dt`).
    pub fn step(&self, state: &VelocityState, index: usize) -> Result<VelocityState> {
        if !state.is_finite() {
            return Err(Error::Numeric("state contains non-finite values".into()));
        }
        check_stability(&self.grid, self.config.nu, state.max_speed(), self.dt)?;
        let t0 = self.config.t_start + index as f64 * self.dt;
        let t1 = t0 + self.dt;

        let mut u1 = state.clone();
        self.euler_into(state, t0, &mut u1);
        self.projector
            .project_in_place(&mut u1.u_rho.values, &mut u1.u_z.values)?;

        let mut u2 = u1.clone();
        self.euler_into(&u1, t1, &mut u2);
        for (a, b) in [
            (&mut u2.u_rho.values, &state.u_rho.values),
            (&mut u2.u_phi.values, &state.u_phi.values),
            (&mut u2.u_z.values, &state.u_z.values),
        ] {
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x = 0.5 * (*x + *y);
            }
        }
        let phi = self
            .projector
            .project_in_place(&mut u2.u_rho.values, &mut u2.u_z.values)?;
        // the last projection removed ½·dt·∇p
        let scale = 2.0 / self.dt;
        u2.pressure.values = phi.into_iter().map(|v| v * scale).collect();
        u2.time = if index + 1 == self.n_steps {
            self.config.t_end
        } else {
            t1
        };
        Ok(u2)
    }

    /// Runs to `t_end`, calling `observer(step, state, forcing)` on each
    /// checkpoint: the initial state, every `checkpoint_stride` steps, and the
    /// last state reached. Observer errors abort the run.
    pub fn run_with_observer<F>(&self, mut observer: F) -> Result<RunSummary>
    where
        F: FnMut(usize, &VelocityState, &ForcingFields) -> Result<()>,
    {
        let stride = self.config.checkpoint_stride;
        let mut state = self.initial.clone();
        observer(0, &state, &self.forcing_at(state.time))?;
        let mut checkpoints = 1;
        let mut last_emitted = 0;
        let mut failure = None;
        let mut steps_taken = 0;
        for index in 0..self.n_steps {
            let next = match self.step(&state, index) {
                Ok(s) => s,
                Err(e) => {
                    let kind = match e {
                        Error::Cfl { .. } => FailureKind::Stability,
                        Error::Numeric(_) => FailureKind::Blowup,
                        _ => FailureKind::Projection,
                    };
                    failure = Some(Failure {
                        step: index,
                        time: state.time,
                        kind,
                        message: e.to_string(),
                    });
                    break;
                }
            };
            if !next.is_finite() || next.max_speed() > OVERFLOW_SPEED {
                failure = Some(Failure {
                    step: index + 1,
                    time: next.time,
                    kind: FailureKind::Blowup,
                    message: format!("non-finite or overflowing velocity at t = {}", next.time),
                });
                break;
            }
            state = next;
            steps_taken = index + 1;
            if steps_taken % stride == 0 || steps_taken == self.n_steps {
                observer(steps_taken, &state, &self.forcing_at(state.time))?;
                checkpoints += 1;
                last_emitted = steps_taken;
            }
        }
        if failure.is_some() && last_emitted != steps_taken {
            // flag the last finite state
            observer(steps_taken, &state, &self.forcing_at(state.time))?;
            checkpoints += 1;
        }
        Ok(RunSummary {
            dt: self.dt,
            steps_taken,
            checkpoints,
            final_time: state.time,
            failure,
        })
    }
}

fn initial_state(cfg: &SimConfig, grid: CylGrid) -> Result<VelocityState> {
    let t = cfg.t_start;
    let manufactured = |spec: MmsSpec| -> Result<VelocityState> {
        let sol = make_solution(spec, grid.rho_max, grid.z_min, grid.length_z(), cfg.nu)?;
        Ok(sol.sample(grid, t))
    };
    match &cfg.initial {
        InitialData::Zero => Ok(VelocityState::zeros(grid, t)),
        InitialData::RigidRotation { omega } => manufactured(MmsSpec::RigidRotation { omega: *omega }),
        InitialData::TaylorVortexSwirl {
            amplitude,
            swirl,
            mode,
        } => {
            // profile at its own t = 0
            let sol = make_solution(
                MmsSpec::TaylorVortexSwirl {
                    amplitude: *amplitude,
                    swirl: *swirl,
                    mode: *mode,
                    decay: 0.0,
                },
                grid.rho_max,
                grid.z_min,
                grid.length_z(),
                cfg.nu,
            )?;
            let mut s = sol.sample(grid, 0.0);
            s.time = t;
            Ok(s)
        }
        InitialData::Manufactured { solution } => manufactured(*solution),
        InitialData::File { path } => {
            let mut s = crate::io::read_checkpoint(std::path::Path::new(path))?;
            if s.grid() != grid {
                return Err(Error::Config(format!(
                    "checkpoint {path} was written on a different grid"
                )));
            }
            s.time = t;
            Ok(s)
        }
    }
}

/// One step of `cfg`'s scheme from `state`, with the configured fixed step.
pub fn step(state: &VelocityState, cfg: &SimConfig) -> Result<VelocityState> {
    let sim = Simulation::new(cfg)?;
    let index = ((state.time - cfg.t_start) / sim.dt).round().max(0.0) as usize;
    let mut next = sim.step(state, index)?;
    next.time = state.time + sim.dt;
    Ok(next)
}

/// Runs `cfg` and keeps every checkpoint in memory.
pub fn run(cfg: &SimConfig) -> Result<Trajectory> {
    let sim = Simulation::new(cfg)?;
    let mut checkpoints = Vec::new();
    let summary = sim.run_with_observer(|_, s, _| {
        checkpoints.push(s.clone());
        Ok(())
    })?;
    Ok(Trajectory {
        config: cfg.clone(),
        dt: summary.dt,
        checkpoints,
        failure: summary.failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> CylGrid {
        CylGrid::new(16, 16, 2.0, 0.0, 1.0).unwrap()
    }

    fn base_config(initial: InitialData) -> SimConfig {
        SimConfig {
            grid: GridSpec::from(grid()),
            nu: 0.5,
            t_start: 0.0,
            t_end: 0.01,
            dt: TimeStep::Cfl { fraction: 0.5 },
            initial,
            forcing: ForcingSpec::Zero,
            wall: WallVelocity::default(),
            checkpoint_stride: 1,
            projection_tolerance: 1e-8,
            poisson: PoissonMethod::Spectral,
        }
    }

    fn smooth_field(g: CylGrid) -> VelocityState {
        VelocityState::from_fns(
            g,
            0.0,
            |r, z| r * (2.0 - r) * (1.0 + (2.0 * std::f64::consts::PI * z).sin()),
            |r, _| r * (4.0 - r * r),
            |r, z| (r * 0.7).cos() * (2.0 * std::f64::consts::PI * z).cos() + 0.3,
            |_, _| 0.0,
        )
    }

    #[test]
    fn projection_is_idempotent_and_divergence_free() {
        let g = grid();
        let p1 = project(&smooth_field(g)).unwrap();
        assert!(relative_divergence(&p1) < 1e-12);
        let p2 = project(&p1).unwrap();
        for (a, b) in [(&p1.u_rho, &p2.u_rho), (&p1.u_z, &p2.u_z)] {
            let d = a.values.iter().zip(&b.values).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(d < 1e-12, "{d}");
        }
    }

    #[test]
    fn projection_annihilates_gradients() {
        let g = grid();
        let phi: Vec<f64> = (0..g.len())
            .map(|i| {
                let (j, k) = (i % g.n_rho, i / g.n_rho);
                (g.rho(j) * g.rho(j)) * (2.0 * std::f64::consts::PI * g.z(k)).cos()
            })
            .collect();
        let mut v = VelocityState::zeros(g, 0.0);
        gradient_into(&g, &phi, &mut v.u_rho.values, &mut v.u_z.values);
        let p = project(&v).unwrap();
        assert!(p.max_speed() < 1e-10, "{}", p.max_speed());
    }

    #[test]
    fn projection_never_increases_energy() {
        let v = smooth_field(grid());
        let p = project(&v).unwrap();
        assert!(p.kinetic_energy() <= v.kinetic_energy() * (1.0 + 1e-14));
    }

    #[test]
    fn cg_projection_meets_tolerance() {
        let v = smooth_field(grid());
        let method = PoissonMethod::ConjugateGradient {
            tolerance: 1e-12,
            max_iterations: 2000,
        };
        let p = Projector::new(grid(), method, 1e-8).project(&v).unwrap();
        assert!(relative_divergence(&p) < 1e-8);
    }

    #[test]
    fn zero_state_stays_zero() {
        let traj = run(&base_config(InitialData::Zero)).unwrap();
        assert!(traj.failure.is_none());
        assert!(traj.checkpoints.len() > 2);
        for c in &traj.checkpoints {
            assert_eq!(c.max_speed(), 0.0);
        }
        let times: Vec<f64> = traj.checkpoints.iter().map(|c| c.time).collect();
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*times.last().unwrap(), 0.01);
    }

    #[test]
    fn stability_violation_is_reported_with_suggestion() {
        let g = grid();
        let err = check_stability(&g, 1.0, 0.0, 1.0).unwrap_err();
        match err {
            Error::Cfl { suggested, .. } => {
                assert!(suggested < 1.0);
                assert!(check_stability(&g, 1.0, 0.0, suggested).is_ok());
            }
            other => panic!("{other}"),
        }
        let mut cfg = base_config(InitialData::Zero);
        cfg.dt = TimeStep::Fixed { value: 1.0 };
        cfg.t_end = 2.0;
        assert!(matches!(Simulation::new(&cfg), Err(Error::Cfl { .. })));
    }

    #[test]
    fn rigid_rotation_with_co_rotating_wall_is_steady() {
        let mut cfg = base_config(InitialData::RigidRotation { omega: 1.0 });
        cfg.wall = WallVelocity { u_phi: 2.0, u_z: 0.0 };
        let traj = run(&cfg).unwrap();
        let first = &traj.checkpoints[0];
        let last = traj.checkpoints.last().unwrap();
        let d = first
            .u_phi
            .values
            .iter()
            .zip(&last.u_phi.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(d < 1e-12, "{d}");
        assert!(last.u_rho.max_abs() < 1e-12);
    }

    #[test]
    fn blowup_is_data_not_a_crash() {
        // a forcing table so strong that the state leaves the stability region
        let mut cfg = base_config(InitialData::Zero);
        cfg.dt = TimeStep::Fixed { value: 1e-3 };
        cfg.t_end = 0.5;
        cfg.forcing = ForcingSpec::Table {
            terms: vec![ForcingTerm {
                component: Component::Phi,
                amplitude: 1e6,
                rho_power: 1,
                wall_power: 1,
                z_mode: 0,
                z_trig: Trig::Cos,
                decay: -50.0,
            }],
        };
        let traj = run(&cfg).unwrap();
        assert!(traj.truncated());
        assert!(traj.checkpoints.iter().all(|c| c.is_finite()));
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = base_config(InitialData::TaylorVortexSwirl {
            amplitude: 0.05,
            swirl: 0.3,
            mode: 1,
        });
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.checkpoints, b.checkpoints);
    }

    #[test]
    fn config_rejects_bad_values() {
        let mut cfg = base_config(InitialData::Zero);
        cfg.nu = 0.0;
        assert!(matches!(Simulation::new(&cfg), Err(Error::Config(_))));
        let mut cfg = base_config(InitialData::Zero);
        cfg.t_end = -1.0;
        assert!(matches!(Simulation::new(&cfg), Err(Error::Config(_))));
    }
}
