//! Single-time integrals read by the budgets.
//!
//! Every integral is the midpoint rule on the cell centres of the nodal view,
//! with derivatives from the centred stencils in [`crate::fields`]. The
//! budgets combine two snapshots: a forward difference in time and the
//! trapezoid average of the spatial terms.

use crate::error::{Error, Result};
use crate::fields::{d_rho, d_z, ForcingFields, Parity, VelocityState};
use crate::grid::{weighted_lq_norm, CylGrid, ScalarSample, Stagger};
use crate::operators::curl_nodal;
use crate::solver::relative_divergence;

use super::MonitorConfig;

/// Σ f(i, ρ) · 2πρΔρΔz over the cell centres.
fn quad(g: &CylGrid, mut f: impl FnMut(usize, f64) -> f64) -> f64 {
    let mut total = 0.0;
    for k in 0..g.n_z {
        for j in 0..g.n_rho {
            let rho = g.rho(j);
            let v = f(g.idx(j, k), rho);
            if v != 0.0 {
                total += v * g.weight(Stagger::Center, j);
            }
        }
    }
    total
}

/// Integrals of the swirl `L^q` estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SwirlTerms {
    /// `∫ u_φ^q`
    pub y: f64,
    /// `∫ |h_φ|^q`
    pub h_q: f64,
    /// `∫ h_φ u_φ^{q-1}`
    pub h_u: f64,
    /// `∫ (u_ρ/ρ) u_φ^q`
    pub advection: f64,
    /// `∫ |∇ u_φ^{q/2}|²`
    pub grad_w: f64,
    /// `∫ u_φ^q / ρ²`
    pub u_rho2: f64,
    /// `∫ u·∇(u_φ^q)`
    pub transport: f64,
    /// `∫ |u_ρ ∂_ρ(u_φ^q)| + |u_z ∂_z(u_φ^q)|`, the scale of `transport`.
    pub transport_scale: f64,
    /// `X = ∫ (u_ρ⁻)^α ρ^β`
    pub x_moment: f64,
    /// `d(t) = q + c X^θ`
    pub growth_rate: f64,
    /// `‖u_ρ⁻ ρ^γ‖_{L^a}` (spatial part of the Serrin quantity).
    pub serrin_norm: f64,
}

/// Both sides of one inequality step evaluated on a single snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
}

impl Inequality {
    /// `rhs − lhs`; nonnegative when the step holds.
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn scale(&self) -> f64 {
        self.lhs.abs().max(self.rhs.abs())
    }

    /// Margin relative to the larger side; 0 when both sides vanish.
    pub fn relative(&self) -> f64 {
        let s = self.scale();
        if s > 0.0 { self.margin() / s } else { 0.0 }
    }
}

/// The Hölder and Young steps of the swirl estimate, checked one by one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwirlSubChecks {
    /// `∫ m u^q/ρ ≤ A^{(p−1)/p} B^{1/p}`
    pub holder_h1: Inequality,
    /// Scalar Young with `ε₁` on `A^{(p−1)/p} B^{1/p}`.
    pub young_y1: Inequality,
    /// `A ≤ X^{2/s} (∫ u^{qs/(s−2)})^{(s−2)/s}`
    pub holder_h2: Inequality,
    /// `∫ u^{qs/(s−2)} ≤ (∫u^q)^{(s−3)/(s−2)} (∫u^{3q})^{1/(s−2)}`
    pub holder_h3: Inequality,
    /// Scalar Young with `ε₂` on `X^{2/s} ‖u‖_q^{q(s−3)/s} ‖u‖_{3q}^{3q/s}`.
    pub young_y2: Inequality,
    /// Pointwise Young on the forcing term `∫ |h| |u|^{q−1}`.
    pub young_forcing: Inequality,
    /// `‖u^{q/2}‖_{L⁶}² ≤ c_sob ∫|∇u^{q/2}|²` with the calibrated constant.
    pub sobolev: Inequality,
}

/// Integrals of the weighted vorticity estimate for one `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VorticityTerms {
    pub eps: f64,
    /// `V = ½ ∫ ω_φ² / ρ^{2−ε}`
    pub energy: f64,
    /// `G_ε = ∫ |∇(ω_φ / ρ^{1−ε})|² ρ^{−ε}`
    pub g_eps: f64,
    /// `∫ (∂_ρ ω_φ)² / ρ^{2−ε}`
    pub d_rho_sq: f64,
    /// `∫ (∂_z ω_φ)² / ρ^{2−ε}`
    pub d_z_sq: f64,
    /// `∫ u_φ⁴ / ρ^{4−ε}`
    pub swirl4: f64,
    /// `∫ |u_ρ| ω_φ² / ρ^{3−ε}`
    pub abs_radial: f64,
    /// `∫ (u_ρ/ρ) ω_φ² / ρ^{2−ε}`
    pub radial: f64,
    /// `∫ ω_φ² / ρ^{4−ε}`
    pub w4: f64,
    /// `∫ (u_φ/ρ) ω_ρ ω_φ / ρ^{2−ε}`
    pub stretching: f64,
    /// `∫ g_φ ω_φ / ρ^{2−ε}`
    pub forcing: f64,
    /// `∫ |g_φ| |ω_φ| / ρ^{2−ε}`
    pub abs_forcing: f64,
    /// Young on the swirl source `∫ u_φ² |∂_z ω_φ| / ρ^{3−ε}`.
    pub young_source: Inequality,
}

/// Integrals of the quartic swirl estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticTerms {
    /// `∫ u_φ⁴ / ρ²`
    pub q: f64,
    /// `∫ u_ρ u_φ⁴ / ρ³`
    pub advection: f64,
    /// `∫ u_ρ⁻ u_φ⁴ / ρ³`
    pub negative: f64,
    /// `∫ |∇u_φ|² u_φ² / ρ²`
    pub grad: f64,
    /// `∫ |∇(u_φ²/ρ)|²`
    pub grad_ratio: f64,
    /// `∫ u_φ⁴ / ρ⁴`
    pub swirl4: f64,
    /// `∫ h_φ u_φ³ / ρ²`
    pub h_u3: f64,
    /// `∫ ρ⁴ h_φ⁴`
    pub h4: f64,
    /// Young on the forcing term with constant `27/(4ν³)`.
    pub young_forcing: Inequality,
}

/// Everything the monitor reads from one checkpoint.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub h_min: f64,
    pub kinetic_energy: f64,
    pub relative_divergence: f64,
    pub swirl: SwirlTerms,
    pub sub_checks: SwirlSubChecks,
    pub vorticity: Vec<VorticityTerms>,
    pub quartic: QuarticTerms,
    /// `(1/(2ν²)) ∫u_φ⁴/ρ² + ½ ∫ω_φ²/ρ²`
    pub blowup_functional: f64,
    pub vorticity_l2: f64,
    pub grad_u_l2: f64,
    /// Negative part of the nodal `u_ρ`, kept for the Serrin accumulator.
    pub u_rho_neg: ScalarSample,
}

impl Snapshot {
    pub fn new(v: &VelocityState, h: &ForcingFields, cfg: &MonitorConfig) -> Result<Snapshot> {
        if !v.is_finite() {
            return Err(Error::Numeric(format!("non-finite state at t = {}", v.time)));
        }
        let g = v.grid();
        if h.grid() != g {
            return Err(Error::Contract("forcing and state live on different grids".into()));
        }
        let u = v.nodal();
        let hn = h.nodal();
        let w = curl_nodal(&u);
        let gv = curl_nodal(&hn);
        let (ur, up, uz) = (&u.rho.values, &u.phi.values, &u.z.values);
        let hp = &hn.phi.values;
        let (wr, wp, wz) = (&w.w_rho.values, &w.w_phi.values, &w.w_z.values);
        let gp = &gv.w_phi.values;

        let dr_up = d_rho(&g, up, Parity::Odd);
        let dz_up = d_z(&g, up);
        let dr_wp = d_rho(&g, wp, Parity::Odd);
        let dz_wp = d_z(&g, wp);

        let neg: Vec<f64> = ur.iter().map(|x| (-x).max(0.0)).collect();
        let u_rho_neg = ScalarSample::new(g, Stagger::Center, neg)?;
        let m = &u_rho_neg.values;

        let swirl = swirl_terms(&g, cfg, ur, up, uz, hp, m, &dr_up, &dz_up, &u_rho_neg)?;
        let sub_checks = swirl_sub_checks(&g, cfg, up, hp, m, &swirl);

        let nu = cfg.nu;
        let vorticity = cfg
            .epsilons
            .iter()
            .map(|&eps| {
                let p2 = |rho: f64| rho.powf(2.0 - eps);
                let mut t = VorticityTerms {
                    eps,
                    energy: 0.5 * quad(&g, |i, r| wp[i] * wp[i] / p2(r)),
                    g_eps: quad(&g, |i, r| {
                        let a = dr_wp[i] / r.powf(1.0 - eps) - (1.0 - eps) * wp[i] / p2(r);
                        let b = dz_wp[i] / r.powf(1.0 - eps);
                        (a * a + b * b) * r.powf(-eps)
                    }),
                    d_rho_sq: quad(&g, |i, r| dr_wp[i] * dr_wp[i] / p2(r)),
                    d_z_sq: quad(&g, |i, r| dz_wp[i] * dz_wp[i] / p2(r)),
                    swirl4: quad(&g, |i, r| up[i].powi(4) / r.powf(4.0 - eps)),
                    abs_radial: quad(&g, |i, r| ur[i].abs() * wp[i] * wp[i] / r.powf(3.0 - eps)),
                    radial: quad(&g, |i, r| ur[i] / r * wp[i] * wp[i] / p2(r)),
                    w4: quad(&g, |i, r| wp[i] * wp[i] / r.powf(4.0 - eps)),
                    stretching: quad(&g, |i, r| up[i] / r * wr[i] * wp[i] / p2(r)),
                    forcing: quad(&g, |i, r| gp[i] * wp[i] / p2(r)),
                    abs_forcing: quad(&g, |i, r| (gp[i] * wp[i]).abs() / p2(r)),
                    young_source: Inequality {
                        lhs: quad(&g, |i, r| up[i] * up[i] * dz_wp[i].abs() / r.powf(3.0 - eps)),
                        rhs: 0.0,
                    },
                };
                t.young_source.rhs = 0.5 * nu * t.d_z_sq + t.swirl4 / (2.0 * nu);
                t
            })
            .collect::<Vec<_>>();

        let c_h = 27.0 / (4.0 * nu.powi(3));
        let mut quartic = QuarticTerms {
            q: quad(&g, |i, r| up[i].powi(4) / (r * r)),
            advection: quad(&g, |i, r| ur[i] * up[i].powi(4) / r.powi(3)),
            negative: quad(&g, |i, r| m[i] * up[i].powi(4) / r.powi(3)),
            grad: quad(&g, |i, r| {
                (dr_up[i] * dr_up[i] + dz_up[i] * dz_up[i]) * up[i] * up[i] / (r * r)
            }),
            grad_ratio: quad(&g, |i, r| {
                let a = 2.0 * up[i] * dr_up[i] / r - up[i] * up[i] / (r * r);
                let b = 2.0 * up[i] * dz_up[i] / r;
                a * a + b * b
            }),
            swirl4: quad(&g, |i, r| up[i].powi(4) / r.powi(4)),
            h_u3: quad(&g, |i, r| hp[i] * up[i].powi(3) / (r * r)),
            h4: quad(&g, |i, r| r.powi(4) * hp[i].powi(4)),
            young_forcing: Inequality {
                lhs: quad(&g, |i, r| (hp[i] * up[i].powi(3)).abs() / (r * r)),
                rhs: 0.0,
            },
        };
        quartic.young_forcing.rhs = 0.25 * nu * quartic.swirl4 + c_h * quartic.h4;

        let weighted_w = 0.5 * quad(&g, |i, r| wp[i] * wp[i] / (r * r));
        let blowup_functional = quartic.q / (2.0 * nu * nu) + weighted_w;
        let vorticity_l2 = quad(&g, |i, _| wr[i] * wr[i] + wp[i] * wp[i] + wz[i] * wz[i]).sqrt();

        let dr_ur = d_rho(&g, ur, Parity::Odd);
        let dz_ur = d_z(&g, ur);
        let dr_uz = d_rho(&g, uz, Parity::Even);
        let dz_uz = d_z(&g, uz);
        let grad_u_l2 = quad(&g, |i, r| {
            dr_ur[i].powi(2)
                + dz_ur[i].powi(2)
                + dr_up[i].powi(2)
                + dz_up[i].powi(2)
                + dr_uz[i].powi(2)
                + dz_uz[i].powi(2)
                + (ur[i] * ur[i] + up[i] * up[i]) / (r * r)
        })
        .sqrt();

        Ok(Snapshot {
            time: v.time,
            h_min: g.h_min(),
            kinetic_energy: v.kinetic_energy(),
            relative_divergence: relative_divergence(v),
            swirl,
            sub_checks,
            vorticity,
            quartic,
            blowup_functional,
            vorticity_l2,
            grad_u_l2,
            u_rho_neg,
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn swirl_terms(
    g: &CylGrid,
    cfg: &MonitorConfig,
    ur: &[f64],
    up: &[f64],
    uz: &[f64],
    hp: &[f64],
    m: &[f64],
    dr_up: &[f64],
    dz_up: &[f64],
    neg: &ScalarSample,
) -> Result<SwirlTerms> {
    let q = cfg.q as i32;
    let qf = q as f64;
    let e = &cfg.exponents;
    let uq: Vec<f64> = up.iter().map(|x| x.powi(q)).collect();
    let dr_uq = d_rho(g, &uq, Parity::Even);
    let dz_uq = d_z(g, &uq);
    let half = 0.5 * qf;
    let x_moment = quad(g, |i, r| {
        if m[i] > 0.0 { m[i].powf(e.alpha) * r.powf(e.beta) } else { 0.0 }
    });
    Ok(SwirlTerms {
        y: quad(g, |i, _| uq[i]),
        h_q: quad(g, |i, _| hp[i].abs().powi(q)),
        h_u: quad(g, |i, _| hp[i] * up[i].powi(q - 1)),
        advection: quad(g, |i, r| ur[i] / r * uq[i]),
        grad_w: quad(g, |i, _| {
            half * half * up[i].powi(q - 2) * (dr_up[i] * dr_up[i] + dz_up[i] * dz_up[i])
        }),
        u_rho2: quad(g, |i, r| uq[i] / (r * r)),
        transport: quad(g, |i, _| ur[i] * dr_uq[i] + uz[i] * dz_uq[i]),
        transport_scale: quad(g, |i, _| (ur[i] * dr_uq[i]).abs() + (uz[i] * dz_uq[i]).abs()),
        x_moment,
        growth_rate: cfg.growth_rate(x_moment),
        serrin_norm: weighted_lq_norm(neg, e.a, e.gamma)?,
    })
}

fn swirl_sub_checks(
    g: &CylGrid,
    cfg: &MonitorConfig,
    up: &[f64],
    hp: &[f64],
    m: &[f64],
    s: &SwirlTerms,
) -> SwirlSubChecks {
    let q = cfg.q as i32;
    let qf = q as f64;
    let p = cfg.exponents.p_hold;
    let ss = cfg.exponents.s;
    let (e1, e2) = (cfg.eps1(), cfg.eps2());
    let k1 = e1.powf(1.0 / (1.0 - p));

    let h1_lhs = quad(g, |i, r| m[i] * up[i].powi(q) / r);
    let a_int = quad(g, |i, r| {
        if m[i] > 0.0 {
            m[i].powf(p / (p - 1.0)) * up[i].powi(q) * r.powf((2.0 - p) / (p - 1.0))
        } else {
            0.0
        }
    });
    let b_int = s.u_rho2;
    let h1_rhs = a_int.powf((p - 1.0) / p) * b_int.powf(1.0 / p);
    let y1_rhs = (p - 1.0) / p * k1 * a_int + e1 / p * b_int;

    let z_int = quad(g, |i, _| up[i].abs().powf(qf * ss / (ss - 2.0)));
    let u3q = quad(g, |i, _| up[i].powi(3 * q));
    let x = s.x_moment;
    let h2_rhs = x.powf(2.0 / ss) * z_int.powf((ss - 2.0) / ss);
    let h3_rhs = s.y.powf((ss - 3.0) / (ss - 2.0)) * u3q.powf(1.0 / (ss - 2.0));
    let y2_lhs = x.powf(2.0 / ss) * s.y.powf((ss - 3.0) / ss) * u3q.powf(1.0 / ss);
    let y2_rhs = 3.0 / ss * e2 * u3q.powf(1.0 / 3.0)
        + (ss - 3.0) / ss * e2.powf(3.0 / (3.0 - ss)) * x.powf(2.0 / (ss - 3.0)) * s.y;

    let young_c = ((qf - 1.0) / qf).powf(qf - 1.0) / qf;
    let yf_lhs = quad(g, |i, _| (hp[i] * up[i].powi(q - 1)).abs());

    SwirlSubChecks {
        holder_h1: Inequality { lhs: h1_lhs, rhs: h1_rhs },
        young_y1: Inequality { lhs: h1_rhs, rhs: y1_rhs },
        holder_h2: Inequality { lhs: a_int, rhs: h2_rhs },
        holder_h3: Inequality { lhs: z_int, rhs: h3_rhs },
        young_y2: Inequality { lhs: y2_lhs, rhs: y2_rhs },
        young_forcing: Inequality { lhs: yf_lhs, rhs: young_c * s.h_q + s.y },
        sobolev: Inequality {
            lhs: u3q.powf(1.0 / 3.0),
            rhs: cfg.c_sob * s.grad_w,
        },
    }
}
