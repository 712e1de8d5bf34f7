//! The weighted vorticity estimate for `ω_φ / ρ^{1−ε/2}`.

use crate::error::{Error, Result};

use super::snapshot::Snapshot;
use super::swirl::avg;
use super::MonitorConfig;

/// One step of the weighted vorticity estimate for one `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VorticityBudget {
    pub eps: f64,
    /// `(V_next − V_prev) / dt` with `V = ½∫ω_φ²/ρ^{2−ε}`.
    pub dv_dt: f64,
    /// Margin after the Young step on the swirl source, before absorbing the
    /// forcing.
    pub margin_full: f64,
    /// Margin of the closed inequality with the user constant `c₃`
    /// (`ε = 0` gives the limit form).
    pub margin: f64,
    /// Smallest `c₃` that makes `margin` nonnegative on this step.
    pub c3_needed: f64,
    /// Residual of the weighted enstrophy identity; `None` for `ε = 0`,
    /// where the identity carries a divergent axis integral.
    pub identity_residual: Option<f64>,
    pub identity_scale: f64,
}

pub fn weighted_vorticity_budget(
    prev: &Snapshot,
    next: &Snapshot,
    index: usize,
    cfg: &MonitorConfig,
) -> Result<VorticityBudget> {
    let dt = next.time - prev.time;
    if !(dt > 0.0) {
        return Err(Error::Contract(format!("checkpoints must advance in time, dt = {dt}")));
    }
    let (a, b) = match (prev.vorticity.get(index), next.vorticity.get(index)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Contract(format!("no vorticity terms for ε index {index}"))),
    };
    let eps = a.eps;
    let nu = cfg.nu;
    let dv_dt = (b.energy - a.energy) / dt;
    let g_eps = avg(a.g_eps, b.g_eps);
    let swirl4 = avg(a.swirl4, b.swirl4);
    let abs_radial = avg(a.abs_radial, b.abs_radial);
    let w4 = avg(a.w4, b.w4);
    let eps_terms = 0.5 * eps * abs_radial + nu * 0.5 * eps * (eps - 2.0) * w4;

    let full_rhs = 0.5 * nu * avg(a.d_z_sq, b.d_z_sq)
        + swirl4 / (2.0 * nu)
        + eps_terms
        + avg(a.abs_forcing, b.abs_forcing);
    let margin_full = full_rhs - (dv_dt + nu * g_eps);

    let closed = swirl4 / (2.0 * nu) + eps_terms - (dv_dt + 0.25 * nu * g_eps);

    let (identity_residual, identity_scale) = if eps > 0.0 {
        let terms = [
            dv_dt,
            nu * avg(a.d_rho_sq + a.d_z_sq, b.d_rho_sq + b.d_z_sq),
            2.0 * avg(a.stretching, b.stretching),
            -0.5 * eps * avg(a.radial, b.radial),
            -nu * (0.5 * (2.0 - eps).powi(2) - 1.0) * w4,
            -avg(a.forcing, b.forcing),
        ];
        (Some(terms.iter().sum()), terms.iter().map(|t| t.abs()).sum())
    } else {
        (None, 0.0)
    };
    Ok(VorticityBudget {
        eps,
        dv_dt,
        margin_full,
        margin: closed + cfg.c3,
        c3_needed: (-closed).max(0.0),
        identity_residual,
        identity_scale,
    })
}
