//! The quartic swirl estimate for `∫ u_φ⁴ / ρ²`.

use crate::error::{Error, Result};

use super::snapshot::Snapshot;
use super::swirl::avg;
use super::MonitorConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticBudget {
    /// `(Q_next − Q_prev) / dt` with `Q = ∫u_φ⁴/ρ²`.
    pub dq_dt: f64,
    /// `[(3/2)∫u_ρ⁻u⁴/ρ³ + c_h∫ρ⁴h⁴] − [¼dQ/dt + (3/4)ν∫|∇(u²/ρ)|² + ½ν∫u⁴/ρ⁴]`
    pub margin: f64,
    /// Residual of `¼dQ/dt + (3/2)∫u_ρu⁴/ρ³ + 3ν∫|∇u|²u²/ρ² = ∫h u³/ρ²`.
    pub identity_residual: f64,
    pub identity_scale: f64,
}

/// Young constant on the forcing term, `27 / (4ν³)`.
pub fn forcing_constant(nu: f64) -> f64 {
    27.0 / (4.0 * nu.powi(3))
}

pub fn quartic_swirl_budget(prev: &Snapshot, next: &Snapshot, cfg: &MonitorConfig) -> Result<QuarticBudget> {
    let dt = next.time - prev.time;
    if !(dt > 0.0) {
        return Err(Error::Contract(format!("checkpoints must advance in time, dt = {dt}")));
    }
    let (a, b) = (&prev.quartic, &next.quartic);
    let nu = cfg.nu;
    let dq_dt = (b.q - a.q) / dt;
    let rhs = 1.5 * avg(a.negative, b.negative) + forcing_constant(nu) * avg(a.h4, b.h4);
    let lhs = 0.25 * dq_dt + 0.75 * nu * avg(a.grad_ratio, b.grad_ratio) + 0.5 * nu * avg(a.swirl4, b.swirl4);
    let terms = [
        0.25 * dq_dt,
        1.5 * avg(a.advection, b.advection),
        3.0 * nu * avg(a.grad, b.grad),
        -avg(a.h_u3, b.h_u3),
    ];
    Ok(QuarticBudget {
        dq_dt,
        margin: rhs - lhs,
        identity_residual: terms.iter().sum(),
        identity_scale: terms.iter().map(|t| t.abs()).sum(),
    })
}
