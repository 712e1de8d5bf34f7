//! Manufactured solutions and grid-refinement studies.
//!
//! Each solution is a closed form for `(u_ρ, u_φ, u_z, p)` together with its
//! first and second derivatives. The forcing `h` that makes it an exact
//! solution of the cylindrical momentum equations is assembled from those
//! derivatives in [`forcing_for`], so no symbolic machinery is needed.
//!
//! The three families:
//!
//! * `rigid_rotation`: `u_φ = Ωρ`, `p = Ω²ρ²/2`, `h = 0`. Steady.
//! * `decaying_swirl`: `u_φ = A e^{−νλ²t} J₁(λρ)` with `λ = j₁,₁/R`, so the
//!   profile vanishes on the wall and `h = 0`.
//! * `taylor_vortex_swirl`: meridional flow from the stream function
//!   `Ψ = ρ²(R² − ρ²)²` modulated by `cos κz`, plus a swirl
//!   `B ρ(R² − ρ²)(1 + ½cos κz)`, all decaying like `e^{−σt}`. Needs a
//!   nonzero forcing.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{ForcingFields, Parity, VelocityState, WallVelocity};
use crate::grid::{CylGrid, Stagger};
use crate::poisson::PoissonMethod;
use crate::solver::{ForcingSpec, GridSpec, InitialData, SimConfig, Simulation, TimeStep};

/// First positive zero of `J₁`.
pub const J1_FIRST_ZERO: f64 = 3.831_705_970_207_512_3;

/// Which manufactured family to build, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MmsSpec {
    RigidRotation {
        #[serde(default = "one")]
        omega: f64,
    },
    DecayingSwirl {
        #[serde(default = "one")]
        amplitude: f64,
    },
    TaylorVortexSwirl {
        #[serde(default = "tv_amplitude")]
        amplitude: f64,
        #[serde(default = "tv_swirl")]
        swirl: f64,
        #[serde(default = "one_u32")]
        mode: u32,
        #[serde(default = "one")]
        decay: f64,
    },
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

impl MmsSpec {
    /// Default parameters for a kind name as used on the command line.
    pub fn from_kind(kind: &str) -> Result<Self> {
        match kind {
            "rigid_rotation" => Ok(MmsSpec::RigidRotation { omega: 1.0 }),
            "decaying_swirl" => Ok(MmsSpec::DecayingSwirl { amplitude: 1.0 }),
            "taylor_vortex_swirl" => Ok(MmsSpec::TaylorVortexSwirl {
                amplitude: tv_amplitude(),
                swirl: tv_swirl(),
                mode: 1,
                decay: 1.0,
            }),
            other => Err(Error::Config(format!(
                "unknown manufactured solution kind '{other}' \
                 (expected rigid_rotation, decaying_swirl or taylor_vortex_swirl)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MmsSpec::RigidRotation { .. } => "rigid_rotation",
            MmsSpec::DecayingSwirl { .. } => "decaying_swirl",
            MmsSpec::TaylorVortexSwirl { .. } => "taylor_vortex_swirl",
        }
    }
}

/// Value and derivatives of one scalar at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub r: f64,
    pub z: f64,
    pub rr: f64,
    pub zz: f64,
    pub t: f64,
}

/// Jets of `(u_ρ, u_φ, u_z, p)` at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FieldJets {
    pub u_rho: Jet,
    pub u_phi: Jet,
    pub u_z: Jet,
    pub p: Jet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionMetadata {
    pub steady: bool,
    /// Axis parities of `(u_ρ, u_φ, u_z, p)`.
    pub parity: [Parity; 4],
}

/// A closed-form solution on a particular cylinder.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedSolution {
    pub spec: MmsSpec,
    pub rho_max: f64,
    pub z_min: f64,
    pub length_z: f64,
    /// Viscosity entering the solution itself (decay rate of `decaying_swirl`).
    pub nu: f64,
    pub metadata: SolutionMetadata,
}

pub fn make_solution(
    spec: MmsSpec,
    rho_max: f64,
    z_min: f64,
    length_z: f64,
    nu: f64,
) -> Result<ManufacturedSolution> {
    if !(rho_max > 0.0 && length_z > 0.0 && nu > 0.0) {
        return Err(Error::Config(format!(
            "manufactured solution needs rho_max, length_z, nu > 0 (got {rho_max}, {length_z}, {nu})"
        )));
    }
    let steady = matches!(spec, MmsSpec::RigidRotation { .. });
    Ok(ManufacturedSolution {
        spec,
        rho_max,
        z_min,
        length_z,
        nu,
        metadata: SolutionMetadata {
            steady,
            parity: [Parity::Odd, Parity::Odd, Parity::Even, Parity::Even],
        },
    })
}

impl ManufacturedSolution {
    pub fn jets(&self, rho: f64, z: f64, t: f64) -> FieldJets {
        let r_max = self.rho_max;
        match self.spec {
            MmsSpec::RigidRotation { omega } => FieldJets {
                u_phi: Jet { v: omega * rho, r: omega, ..Jet::default() },
                p: Jet {
                    v: 0.5 * omega * omega * rho * rho,
                    r: omega * omega * rho,
                    rr: omega * omega,
                    ..Jet::default()
                },
                ..FieldJets::default()
            },
            MmsSpec::DecayingSwirl { amplitude } => {
                let lam = J1_FIRST_ZERO / r_max;
                let x = lam * rho;
                let (j0, j1) = (bessel_j0(x), bessel_j1(x));
                // J₁' = J₀ − J₁/x,  J₁'' = −J₁'/x − (1 − 1/x²) J₁
                let j1p = j0 - j1 / x;
                let j1pp = -j1p / x - (1.0 - 1.0 / (x * x)) * j1;
                let rate = self.nu * lam * lam;
                let e = amplitude * (-rate * t).exp();
                let e2 = e * e;
                // p = e²·½(1 − J₀² − J₁²), ∂_ρ p = u_φ²/ρ
                let pr = e2 * j1 * j1 / rho;
                FieldJets {
                    u_phi: Jet {
                        v: e * j1,
                        r: e * lam * j1p,
                        rr: e * lam * lam * j1pp,
                        t: -rate * e * j1,
                        ..Jet::default()
                    },
                    p: Jet {
                        v: e2 * 0.5 * (1.0 - j0 * j0 - j1 * j1),
                        r: pr,
                        rr: e2 * (2.0 * j1 * j1p * lam / rho - j1 * j1 / (rho * rho)),
                        t: -2.0 * rate * e2 * 0.5 * (1.0 - j0 * j0 - j1 * j1),
                        ..Jet::default()
                    },
                    ..FieldJets::default()
                }
            }
            MmsSpec::TaylorVortexSwirl {
                amplitude,
                swirl,
                mode,
                decay,
            } => {
                let r2 = r_max * r_max;
                let kappa = 2.0 * PI * mode as f64 / self.length_z;
                let (s, c) = (kappa * (z - self.z_min)).sin_cos();
                let e = (-decay * t).exp();
                // f = Ψ/ρ = ρ(R² − ρ²)²,  g = Ψ'/ρ = 2(R² − ρ²)(R² − 3ρ²)
                let f = Poly::new(&[0.0, r2 * r2, 0.0, -2.0 * r2, 0.0, 1.0]);
                let gp = Poly::new(&[2.0 * r2 * r2, 0.0, -8.0 * r2, 0.0, 6.0]);
                // swirl profile ρ(R² − ρ²)
                let sw = Poly::new(&[0.0, r2, 0.0, -1.0]);
                let ar = -amplitude * kappa * e;
                let az = amplitude * e;
                let ap = swirl * e;
                let m = 1.0 + 0.5 * c;
                FieldJets {
                    u_rho: Jet {
                        v: ar * f.eval(rho) * c,
                        r: ar * f.deriv(1, rho) * c,
                        rr: ar * f.deriv(2, rho) * c,
                        z: -ar * f.eval(rho) * kappa * s,
                        zz: -ar * f.eval(rho) * kappa * kappa * c,
                        t: -decay * ar * f.eval(rho) * c,
                    },
                    u_z: Jet {
                        v: az * gp.eval(rho) * s,
                        r: az * gp.deriv(1, rho) * s,
                        rr: az * gp.deriv(2, rho) * s,
                        z: az * gp.eval(rho) * kappa * c,
                        zz: -az * gp.eval(rho) * kappa * kappa * s,
                        t: -decay * az * gp.eval(rho) * s,
                    },
                    u_phi: Jet {
                        v: ap * sw.eval(rho) * m,
                        r: ap * sw.deriv(1, rho) * m,
                        rr: ap * sw.deriv(2, rho) * m,
                        z: -ap * sw.eval(rho) * 0.5 * kappa * s,
                        zz: -ap * sw.eval(rho) * 0.5 * kappa * kappa * c,
                        t: -decay * ap * sw.eval(rho) * m,
                    },
                    p: Jet::default(),
                }
            }
        }
    }

    /// Exact state sampled at the staggered positions of `grid`.
    pub fn sample(&self, grid: CylGrid, t: f64) -> VelocityState {
        VelocityState::from_fns(
            grid,
            t,
            |r, z| self.jets(r, z, t).u_rho.v,
            |r, z| self.jets(r, z, t).u_phi.v,
            |r, z| self.jets(r, z, t).u_z.v,
            |r, z| self.jets(r, z, t).p.v,
        )
    }

    /// Tangential wall velocity at `ρ = rho_max`. Constant in time for all
    /// three families.
    pub fn wall(&self) -> WallVelocity {
        match self.spec {
            MmsSpec::RigidRotation { omega } => WallVelocity {
                u_phi: omega * self.rho_max,
                u_z: 0.0,
            },
            _ => WallVelocity::default(),
        }
    }

    /// Pointwise forcing `(h_ρ, h_φ, h_z)` for viscosity `nu`.
    pub fn forcing_at(&self, rho: f64, z: f64, t: f64, nu: f64) -> [f64; 3] {
        let FieldJets { u_rho: ur, u_phi: up, u_z: uz, p } = self.jets(rho, z, t);
        let h_rho = ur.t + ur.v * ur.r + uz.v * ur.z - up.v * up.v / rho + p.r
            - nu * (ur.rr + ur.r / rho + ur.zz - ur.v / (rho * rho));
        let h_phi = up.t + ur.v * up.r + uz.v * up.z + ur.v * up.v / rho
            - nu * (up.rr + up.r / rho + up.zz - up.v / (rho * rho));
        let h_z = uz.t + ur.v * uz.r + uz.v * uz.z + p.z - nu * (uz.rr + uz.r / rho + uz.zz);
        [h_rho, h_phi, h_z]
    }

    /// True when the forcing for viscosity `nu` is identically zero.
    pub fn forcing_vanishes(&self, nu: f64) -> bool {
        match self.spec {
            MmsSpec::RigidRotation { .. } => true,
            MmsSpec::DecayingSwirl { .. } => nu == self.nu,
            MmsSpec::TaylorVortexSwirl { .. } => false,
        }
    }

    /// Analytic `(1/ρ)∂_ρ(ρu_ρ) + ∂_z u_z`.
    pub fn divergence_at(&self, rho: f64, z: f64, t: f64) -> f64 {
        let j = self.jets(rho, z, t);
        j.u_rho.r + j.u_rho.v / rho + j.u_z.z
    }
}

/// Forcing of `sol` sampled on `grid` at time `t`.
pub fn forcing_for(sol: &ManufacturedSolution, grid: CylGrid, t: f64, nu: f64) -> ForcingFields {
    if sol.forcing_vanishes(nu) {
        return ForcingFields::zeros(grid);
    }
    ForcingFields::from_fns(
        grid,
        |r, z| sol.forcing_at(r, z, t, nu)[0],
        |r, z| sol.forcing_at(r, z, t, nu)[1],
        |r, z| sol.forcing_at(r, z, t, nu)[2],
    )
}

/// Dense polynomial `Σ c_i x^i` of degree below 8.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poly {
    coeffs: [f64; 8],
    len: usize,
}

impl Poly {
    pub fn new(c: &[f64]) -> Self {
        assert!(c.len() <= 8, "degree too high");
        let mut coeffs = [0.0; 8];
        coeffs[..c.len()].copy_from_slice(c);
        Poly { coeffs, len: c.len() }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.deriv(0, x)
    }

    /// `n`-th derivative at `x`.
    pub fn deriv(&self, n: usize, x: f64) -> f64 {
        let mut acc = 0.0;
        for i in (n..self.len).rev() {
            let falling: f64 = (i + 1 - n..=i).map(|m| m as f64).product();
            acc = acc * x + falling * self.coeffs[i];
        }
        acc
    }
}

fn bessel_series(x: f64, order: i32) -> f64 {
    // Σ (−1)^m (x/2)^{2m+n} / (m! (m+n)!)
    let half = 0.5 * x;
    let mut term = half.powi(order);
    for i in 1..=order {
        term /= i as f64;
    }
    let mut sum = term;
    for m in 1..60 {
        term *= -half * half / (m as f64 * (m + order) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Bessel function `J₀` by its power series (accurate for moderate `x`).
pub fn bessel_j0(x: f64) -> f64 {
    bessel_series(x, 0)
}

/// Bessel function `J₁` by its power series (accurate for moderate `x`).
pub fn bessel_j1(x: f64) -> f64 {
    bessel_series(x, 1)
}

// ---------------------------------------------------------------------------
// Refinement studies

/// Domain and time stepping of a refinement study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudySettings {
    pub nu: f64,
    pub t_end: f64,
    /// `ν dt / h_min²` on every level.
    pub diffusion_number: f64,
    pub rho_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub poisson: PoissonMethod,
}

impl StudySettings {
    /// Defaults chosen so that `Δρ = Δz` with `n_z = n_rho`.
    pub fn for_spec(spec: &MmsSpec) -> Self {
        let (z_max, t_end) = match spec {
            MmsSpec::TaylorVortexSwirl { .. } => (2.0, 0.02),
            _ => (2.0, 0.01),
        };
        StudySettings {
            nu: 1.0,
            t_end,
            diffusion_number: 0.1,
            rho_max: 2.0,
            z_min: 0.0,
            z_max,
            poisson: PoissonMethod::Spectral,
        }
    }

    fn n_z(&self, n_rho: usize) -> usize {
        let ratio = (self.z_max - self.z_min) / self.rho_max;
        ((n_rho as f64 * ratio).round() as usize).max(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub level: usize,
    pub field: String,
    pub error: f64,
    /// `log2(e_prev / e)`; absent on the coarsest level.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSummary {
    pub field: String,
    /// All errors below `1e-12`: the field is reproduced to rounding.
    pub exact: bool,
    pub min_order: Option<f64>,
    pub max_order: Option<f64>,
    /// Order between the two finest levels.
    pub finest_order: Option<f64>,
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub kind: String,
    pub levels: Vec<usize>,
    pub rows: Vec<ConvergenceRow>,
    pub fields: Vec<FieldSummary>,
}

/// Errors below this are treated as rounding.
pub const EXACT_FLOOR: f64 = 1e-12;

impl ConvergenceReport {
    fn from_errors(kind: &str, levels: &[usize], errors: &[(String, Vec<f64>)]) -> Self {
        let mut rows = Vec::new();
        let mut fields = Vec::new();
        for (name, errs) in errors {
            let exact = errs.iter().all(|e| *e < EXACT_FLOOR);
            let mut orders = Vec::new();
            for (i, (&lvl, &e)) in levels.iter().zip(errs).enumerate() {
                let order = if i == 0 || (e < EXACT_FLOOR && errs[i - 1] < EXACT_FLOOR) {
                    None
                } else {
                    let ratio = lvl as f64 / levels[i - 1] as f64;
                    Some((errs[i - 1] / e).ln() / ratio.ln())
                };
                if let Some(o) = order {
                    orders.push(o);
                }
                rows.push(ConvergenceRow {
                    level: lvl,
                    field: name.clone(),
                    error: e,
                    order,
                });
            }
            let finite: Vec<f64> = orders.iter().copied().filter(|o| o.is_finite()).collect();
            fields.push(FieldSummary {
                field: name.clone(),
                exact,
                min_order: finite.iter().copied().reduce(f64::min),
                max_order: finite.iter().copied().reduce(f64::max),
                finest_order: orders.last().copied(),
                monotone: errs.windows(2).all(|w| w[1] <= w[0]),
            });
        }
        ConvergenceReport {
            kind: kind.to_string(),
            levels: levels.to_vec(),
            rows,
            fields,
        }
    }

    /// Every field is either exact or converges at least at `threshold`.
    pub fn passes(&self, threshold: f64) -> bool {
        self.fields
            .iter()
            .all(|f| f.exact || f.min_order.is_some_and(|o| o >= threshold))
    }

    /// Every field is exact or reaches `threshold` between the two finest
    /// levels; coarser pairs may still be pre-asymptotic.
    pub fn asymptotic_passes(&self, threshold: f64) -> bool {
        self.fields
            .iter()
            .all(|f| f.exact || f.finest_order.is_some_and(|o| o >= threshold))
    }

    /// Every non-exact field has all orders inside `[lo, hi]`.
    pub fn orders_within(&self, lo: f64, hi: f64) -> bool {
        self.fields.iter().all(|f| {
            f.exact
                || matches!((f.min_order, f.max_order), (Some(a), Some(b)) if a >= lo && b <= hi)
        })
    }

    /// `level,field,error,order` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,field,error,order\n");
        for r in &self.rows {
            let order = r.order.map(crate::io::fmt_f64).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.level,
                r.field,
                crate::io::fmt_f64(r.error),
                order
            ));
        }
        out
    }
}

fn check_levels(levels: &[usize]) -> Result<()> {
    if levels.len() < 3 {
        return Err(Error::Config(format!(
            "a convergence study needs at least 3 levels, got {}",
            levels.len()
        )));
    }
    for w in levels.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(Error::Config(format!(
                "levels must double successively, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if levels[0] < 4 {
        return Err(Error::Config("coarsest level needs n_rho >= 4".into()));
    }
    Ok(())
}

/// Solver error against `spec` at `settings.t_end` on each level.
///
/// A level `n` runs on an `n × n_z` grid with `ν dt = diffusion_number·h²`.
/// Errors are maximum norms over each component's own sample locations.
pub fn convergence_order(
    spec: MmsSpec,
    levels: &[usize],
    settings: &StudySettings,
) -> Result<ConvergenceReport> {
    check_levels(levels)?;
    let names = ["u_rho", "u_phi", "u_z"];
    let mut errors: Vec<(String, Vec<f64>)> = names.iter().map(|n| (n.to_string(), vec![])).collect();
    for &n in levels {
        let grid = CylGrid::new(n, settings.n_z(n), settings.rho_max, settings.z_min, settings.z_max)?;
        let sol = make_solution(spec, settings.rho_max, settings.z_min, grid.length_z(), settings.nu)?;
        let h = grid.h_min();
        let cfg = SimConfig {
            grid: GridSpec::from(grid),
            nu: settings.nu,
            t_start: 0.0,
            t_end: settings.t_end,
            dt: TimeStep::Fixed {
                value: settings.diffusion_number * h * h / settings.nu,
            },
            initial: InitialData::Manufactured { solution: spec },
            forcing: ForcingSpec::Manufactured { solution: spec },
            wall: sol.wall(),
            checkpoint_stride: usize::MAX,
            projection_tolerance: 1e-8,
            poisson: settings.poisson,
        };
        let sim = Simulation::new(&cfg)?;
        let mut state = sim.initial_state()?;
        for step in 0..sim.n_steps() {
            state = sim.step(&state, step)?;
        }
        let exact = sol.sample(grid, state.time);
        let err = |a: &crate::grid::ScalarSample, b: &crate::grid::ScalarSample| {
            let mut m = 0.0_f64;
            for k in 0..grid.n_z {
                for j in 0..grid.n_rho {
                    if a.location == Stagger::RhoFace && j + 1 == grid.n_rho {
                        continue;
                    }
                    m = m.max((a.at(j, k) - b.at(j, k)).abs());
                }
            }
            m
        };
        errors[0].1.push(err(&state.u_rho, &exact.u_rho));
        errors[1].1.push(err(&state.u_phi, &exact.u_phi));
        errors[2].1.push(err(&state.u_z, &exact.u_z));
    }
    Ok(ConvergenceReport::from_errors(spec.name(), levels, &errors))
}

/// Negative control: a one-sided radial difference of a smooth field,
/// which converges at first order only.
pub fn lopsided_control(levels: &[usize]) -> Result<ConvergenceReport> {
    check_levels(levels)?;
    let mut errs = Vec::new();
    for &n in levels {
        let g = CylGrid::new(n, n, 2.0, 0.0, 2.0)?;
        let f = |r: f64, z: f64| r.sin() * (PI * z).cos();
        let mut m = 0.0_f64;
        for k in 0..g.n_z {
            for j in 0..g.n_rho {
                let (r, z) = (g.rho(j), g.z(k));
                let forward = (f(r + g.d_rho, z) - f(r, z)) / g.d_rho;
                m = m.max((forward - r.cos() * (PI * z).cos()).abs());
            }
        }
        errs.push(m);
    }
    Ok(ConvergenceReport::from_errors(
        "lopsided",
        levels,
        &[("d_rho_forward".to_string(), errs)],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sol(spec: MmsSpec) -> ManufacturedSolution {
        make_solution(spec, 2.0, 0.0, 1.0, 0.7).unwrap()
    }

    #[test]
    fn bessel_values() {
        // reference values from standard tables
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!(bessel_j1(J1_FIRST_ZERO).abs() < 1e-14);
    }

    #[test]
    fn poly_derivatives() {
        let p = Poly::new(&[1.0, 2.0, 3.0]);
        assert_eq!(p.eval(2.0), 17.0);
        assert_eq!(p.deriv(1, 2.0), 14.0);
        assert_eq!(p.deriv(2, 2.0), 6.0);
        assert_eq!(p.deriv(3, 2.0), 0.0);
    }

    #[test]
    fn rigid_rotation_forcing_vanishes() {
        let s = sol(MmsSpec::RigidRotation { omega: 1.5 });
        for &(r, z) in &[(0.1, 0.2), (1.0, 0.5), (1.9, 0.9)] {
            let h = s.forcing_at(r, z, 0.3, 0.7);
            assert!(h.iter().all(|v| v.abs() < 1e-14), "{h:?}");
        }
        assert_eq!(s.wall().u_phi, 3.0);
    }

    #[test]
    fn decaying_swirl_forcing_vanishes_and_wall_is_still() {
        let s = sol(MmsSpec::DecayingSwirl { amplitude: 2.0 });
        for &(r, z) in &[(0.05, 0.2), (1.0, 0.5), (1.95, 0.9)] {
            let h = s.forcing_at(r, z, 0.1, 0.7);
            assert!(h.iter().all(|v| v.abs() < 1e-12), "{h:?}");
        }
        assert!(s.jets(2.0, 0.0, 0.0).u_phi.v.abs() < 1e-13);
    }

    #[test]
    fn decaying_swirl_forcing_linear_in_nu() {
        let s = sol(MmsSpec::DecayingSwirl { amplitude: 1.0 });
        let h1 = s.forcing_at(0.8, 0.1, 0.0, 1.4)[1];
        let h2 = s.forcing_at(0.8, 0.1, 0.0, 2.1)[1];
        // h_φ = (ν − ν_sol) λ² u_φ
        let lam = J1_FIRST_ZERO / 2.0;
        let u = s.jets(0.8, 0.1, 0.0).u_phi.v;
        assert!((h1 - 0.7 * lam * lam * u).abs() < 1e-12);
        assert!((h2 - 1.4 * lam * lam * u).abs() < 1e-12);
    }

    #[test]
    fn pressure_derivative_matches_difference() {
        let s = sol(MmsSpec::DecayingSwirl { amplitude: 1.0 });
        let h = 1e-6;
        let fd = (s.jets(1.0 + h, 0.0, 0.0).p.v - s.jets(1.0 - h, 0.0, 0.0).p.v) / (2.0 * h);
        assert!((fd - s.jets(1.0, 0.0, 0.0).p.r).abs() < 1e-8);
    }

    #[test]
    fn jets_agree_with_finite_differences() {
        let s = sol(MmsSpec::TaylorVortexSwirl {
            amplitude: 0.3,
            swirl: 0.5,
            mode: 2,
            decay: 0.4,
        });
        let (r, z, t, h) = (0.7, 0.3, 0.2, 1e-5);
        let j = s.jets(r, z, t);
        let get = |r, z, t| s.jets(r, z, t);
        for sel in [|j: &FieldJets| j.u_rho, |j: &FieldJets| j.u_phi, |j: &FieldJets| j.u_z] {
            let c = sel(&j);
            let dr = (sel(&get(r + h, z, t)).v - sel(&get(r - h, z, t)).v) / (2.0 * h);
            let dz = (sel(&get(r, z + h, t)).v - sel(&get(r, z - h, t)).v) / (2.0 * h);
            let dt = (sel(&get(r, z, t + h)).v - sel(&get(r, z, t - h)).v) / (2.0 * h);
            let drr = (sel(&get(r + h, z, t)).r - sel(&get(r - h, z, t)).r) / (2.0 * h);
            let dzz = (sel(&get(r, z + h, t)).z - sel(&get(r, z - h, t)).z) / (2.0 * h);
            for (a, b) in [(c.r, dr), (c.z, dz), (c.t, dt), (c.rr, drr), (c.zz, dzz)] {
                assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn manufactured_fields_are_divergence_free() {
        let s = sol(MmsSpec::TaylorVortexSwirl {
            amplitude: 1.0,
            swirl: 1.0,
            mode: 1,
            decay: 1.0,
        });
        for &(r, z) in &[(0.1, 0.1), (0.9, 0.4), (1.7, 0.77)] {
            assert!(s.divergence_at(r, z, 0.5).abs() < 1e-12);
        }
        let w = s.jets(2.0, 0.3, 0.0);
        assert!(w.u_rho.v.abs() < 1e-12 && w.u_z.v.abs() < 1e-12 && w.u_phi.v.abs() < 1e-12);
    }

    #[test]
    fn lopsided_control_is_first_order() {
        let r = lopsided_control(&[16, 32, 64]).unwrap();
        let f = &r.fields[0];
        assert!((f.min_order.unwrap() - 1.0).abs() < 0.15, "{f:?}");
        assert!(!r.passes(1.9));
    }

    #[test]
    fn too_few_levels_rejected() {
        let err = convergence_order(MmsSpec::from_kind("decaying_swirl").unwrap(), &[8, 16], &StudySettings::for_spec(&MmsSpec::DecayingSwirl { amplitude: 1.0 }));
        assert!(matches!(err, Err(Error::Config(_))));
        assert!(matches!(MmsSpec::from_kind("vortex_ring"), Err(Error::Config(_))));
    }

    #[test]
    fn rigid_rotation_is_reproduced_to_rounding() {
        let spec = MmsSpec::RigidRotation { omega: 1.0 };
        let mut st = StudySettings::for_spec(&spec);
        st.t_end = 0.002;
        let r = convergence_order(spec, &[8, 16, 32], &st).unwrap();
        assert!(r.fields.iter().all(|f| f.exact), "{:?}", r.rows);
        assert!(r.passes(1.9));
    }
}
