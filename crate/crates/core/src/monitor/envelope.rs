//! Grönwall envelope of the swirl norm and the blow-up indicator.

use serde::Serialize;

use crate::error::{Error, Result};

/// `E(t) = e^{∫_{t₀}^t d} Y(t₀) + (t − t₀) · sup_s ‖h(s)‖_q^q · e^{∫_{t₀}^t d}`
/// with the time integral by the trapezoid rule over the checkpoints.
pub fn gronwall_envelope(times: &[f64], d: &[f64], y0: f64, h_q: &[f64]) -> Result<Vec<f64>> {
    if times.len() != d.len() || times.len() != h_q.len() {
        return Err(Error::Contract("envelope series must have equal length".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Contract("envelope times must increase".into()));
    }
    let Some(&t0) = times.first() else {
        return Ok(Vec::new());
    };
    let h_sup = h_q.iter().cloned().fold(0.0, f64::max);
    let mut integral = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        if i > 0 {
            integral += 0.5 * (d[i] + d[i - 1]) * (times[i] - times[i - 1]);
        }
        let grow = integral.exp();
        out.push(grow * y0 + (times[i] - t0) * h_sup * grow);
    }
    Ok(out)
}

/// Summary of the quantities whose growth would signal a singularity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport {
    /// `sup_t F(t)`, `F = (1/(2ν²))∫u_φ⁴/ρ² + ½∫ω_φ²/ρ²`.
    pub functional_max: f64,
    pub functional_final: f64,
    /// `∫ ‖ω‖_{L²} dt` over the window.
    pub vorticity_l2_integral: f64,
    pub vorticity_l2_max: f64,
    pub grad_u_l2_max: f64,
    /// `F(t_end) / F(t_start)`, `None` when `F(t_start) = 0`.
    pub functional_ratio: Option<f64>,
    pub all_finite: bool,
    /// The run stopped early; the window ends at `window_end`.
    pub truncated: bool,
    pub window_end: f64,
}

pub fn blowup_indicator(
    times: &[f64],
    functional: &[f64],
    vorticity_l2: &[f64],
    grad_u_l2: &[f64],
    truncated: bool,
) -> Result<BlowupReport> {
    let n = times.len();
    if functional.len() != n || vorticity_l2.len() != n || grad_u_l2.len() != n {
        return Err(Error::Contract("indicator series must have equal length".into()));
    }
    if n == 0 {
        return Err(Error::Contract("indicator needs at least one checkpoint".into()));
    }
    let max = |s: &[f64]| s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut integral = 0.0;
    for i in 1..n {
        integral += 0.5 * (vorticity_l2[i] + vorticity_l2[i - 1]) * (times[i] - times[i - 1]);
    }
    let all_finite = [functional, vorticity_l2, grad_u_l2]
        .iter()
        .all(|s| s.iter().all(|x| x.is_finite()));
    Ok(BlowupReport {
        functional_max: max(functional),
        functional_final: functional[n - 1],
        vorticity_l2_integral: integral,
        vorticity_l2_max: max(vorticity_l2),
        grad_u_l2_max: max(grad_u_l2),
        functional_ratio: (functional[0] > 0.0).then(|| functional[n - 1] / functional[0]),
        all_finite,
        truncated,
        window_end: times[n - 1],
    })
}
