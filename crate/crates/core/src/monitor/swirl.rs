//! The swirl `L^q` estimate: growth rate, transport cancellation, the
//! per-step budget and the Sobolev constant calibration.

use crate::error::{Error, Result};
use crate::fields::{d_rho, d_z, ForcingFields, Parity, VelocityState};
use crate::grid::{CylGrid, ScalarSample, Stagger};

use super::snapshot::Snapshot;
use super::MonitorConfig;

/// `X = ∫ m^α ρ^β` for a nonnegative cell-centred sample `m`.
pub fn negative_moment(m: &ScalarSample, alpha: f64, beta: f64) -> Result<f64> {
    if m.location != Stagger::Center {
        return Err(Error::Contract("negative part must be cell-centred".into()));
    }
    let g = m.grid;
    let mut total = 0.0;
    for k in 0..g.n_z {
        for j in 0..g.n_rho {
            let v = m.at(j, k);
            if v < 0.0 || !v.is_finite() {
                return Err(Error::Contract(format!("negative part must be finite and >= 0, got {v}")));
            }
            if v > 0.0 {
                total += v.powf(alpha) * g.rho(j).powf(beta) * g.weight(Stagger::Center, j);
            }
        }
    }
    Ok(total)
}

/// `d(t) = q + c ∫ (u_ρ⁻)^α ρ^β` raised to `θ`, read from the nodal `u_ρ`.
pub fn d_of_t(v: &VelocityState, cfg: &MonitorConfig) -> Result<f64> {
    let neg = v.nodal().rho.negative_part();
    let x = negative_moment(&neg, cfg.exponents.alpha, cfg.exponents.beta)?;
    Ok(cfg.growth_rate(x))
}

/// `∫ u_ρ ∂_ρ(u_φ^q) + u_z ∂_z(u_φ^q)`. Vanishes in the continuum for a
/// divergence-free field with zero normal velocity at the wall.
pub fn transport_cancellation(v: &VelocityState, q: u32) -> f64 {
    let g = v.grid();
    let u = v.nodal();
    let uq: Vec<f64> = u.phi.values.iter().map(|x| x.powi(q as i32)).collect();
    let dr = d_rho(&g, &uq, Parity::Even);
    let dz = d_z(&g, &uq);
    let mut total = 0.0;
    for k in 0..g.n_z {
        for j in 0..g.n_rho {
            let i = g.idx(j, k);
            total += (u.rho.values[i] * dr[i] + u.z.values[i] * dz[i]) * g.weight(Stagger::Center, j);
        }
    }
    total
}

/// One step of the swirl estimate between two checkpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwirlBudget {
    pub dt: f64,
    /// `(Y_next − Y_prev) / dt`
    pub dy_dt: f64,
    /// `[‖h‖_q^q + d Y] − [dY/dt + ν(2(q−1)/q)∫|∇W|² + (νq/2)∫u^q/ρ²]`
    pub margin: f64,
    /// Residual of the `L^q` energy identity.
    pub identity_residual: f64,
    /// Sum of the magnitudes of the identity's terms.
    pub identity_scale: f64,
}

pub(crate) fn avg(a: f64, b: f64) -> f64 {
    0.5 * (a + b)
}

pub fn swirl_lq_budget(prev: &Snapshot, next: &Snapshot, cfg: &MonitorConfig) -> Result<SwirlBudget> {
    let dt = next.time - prev.time;
    if !(dt > 0.0) {
        return Err(Error::Contract(format!("checkpoints must advance in time, dt = {dt}")));
    }
    let (a, b) = (&prev.swirl, &next.swirl);
    let q = cfg.q as f64;
    let nu = cfg.nu;
    let dy_dt = (b.y - a.y) / dt;
    let grad_w = avg(a.grad_w, b.grad_w);
    let u_rho2 = avg(a.u_rho2, b.u_rho2);
    let rhs = avg(a.h_q, b.h_q) + avg(a.growth_rate * a.y, b.growth_rate * b.y);
    let lhs = dy_dt + nu * 2.0 * (q - 1.0) / q * grad_w + 0.5 * nu * q * u_rho2;

    let diss = nu * (q - 1.0) / (0.25 * q * q) * grad_w;
    let terms = [
        dy_dt / q,
        avg(a.advection, b.advection),
        diss,
        nu * u_rho2,
        -avg(a.h_u, b.h_u),
    ];
    Ok(SwirlBudget {
        dt,
        dy_dt,
        margin: rhs - lhs,
        identity_residual: terms.iter().sum(),
        identity_scale: terms.iter().map(|t| t.abs()).sum(),
    })
}

/// Largest discrete ratio `‖W‖_{L⁶}² / ∫|∇W|²` over a family of probes that
/// vanish at the wall: smooth profiles with a few axial modes and axis-centred
/// bubbles `(σ² + ρ² + z²)^{-1/2}` of several widths.
pub fn calibrate_c_sob(grid: &CylGrid) -> f64 {
    let r2 = grid.rho_max * grid.rho_max;
    let zc = grid.z_min + 0.5 * grid.length_z();
    let l = grid.length_z();
    let cap = |rho: f64| 1.0 - rho * rho / r2;
    let mut best: f64 = 0.0;
    let mut probe = |f: &dyn Fn(f64, f64) -> f64| {
        let w = ScalarSample::from_fn(*grid, Stagger::Center, f);
        let dr = d_rho(grid, &w.values, Parity::Even);
        let dz = d_z(grid, &w.values);
        let mut l6 = 0.0;
        let mut grad = 0.0;
        for k in 0..grid.n_z {
            for j in 0..grid.n_rho {
                let i = grid.idx(j, k);
                let wt = grid.weight(Stagger::Center, j);
                l6 += w.values[i].powi(6) * wt;
                grad += (dr[i] * dr[i] + dz[i] * dz[i]) * wt;
            }
        }
        if grad > 0.0 {
            best = best.max(l6.powf(1.0 / 3.0) / grad);
        }
    };
    for power in [1, 2] {
        for mode in 0..3 {
            let kz = 2.0 * std::f64::consts::PI * mode as f64 / l;
            probe(&|rho, z| cap(rho).powi(power) * (1.0 + 0.5 * (kz * (z - grid.z_min)).cos()));
        }
    }
    let mut sigma = grid.rho_max.min(0.5 * l);
    while sigma >= 4.0 * grid.h_min() {
        probe(&|rho, z| {
            let dz = z - zc;
            cap(rho) / (sigma * sigma + rho * rho + dz * dz).sqrt()
        });
        sigma *= 0.5;
    }
    best
}

/// Swirl budget straight from two states, for callers without a monitor.
pub fn swirl_lq_budget_from_states(
    prev: (&VelocityState, &ForcingFields),
    next: (&VelocityState, &ForcingFields),
    cfg: &MonitorConfig,
) -> Result<SwirlBudget> {
    let a = Snapshot::new(prev.0, prev.1, cfg)?;
    let b = Snapshot::new(next.0, next.1, cfg)?;
    swirl_lq_budget(&a, &b, cfg)
}
