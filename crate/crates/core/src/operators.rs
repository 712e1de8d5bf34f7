//! Cylindrical differential operators for axisymmetric fields with swirl.
//!
//! [`divergence`] and [`momentum_rhs`] act on the staggered layout and are
//! what the solver uses; [`curl_axisym`] and the vorticity transport residual
//! act on the node-aligned view.

use crate::error::{Error, Result};
use crate::fields::{
    d_rho, d_z, laplacian, ForcingFields, NodalField, Parity, VelocityState, VorticityFields,
    WallVelocity,
};
use crate::grid::{CylGrid, ScalarSample, Stagger};

/// `(1/ρ)∂_ρ(ρ u_ρ) + ∂_z u_z` at cell centres, in flux form.
///
/// The axis face carries zero flux; the wall face uses whatever `u_ρ` is
/// stored there (zero for solver states).
pub fn divergence(v: &VelocityState) -> ScalarSample {
    let g = v.grid();
    let mut out = ScalarSample::zeros(g, Stagger::Center);
    divergence_into(&g, &v.u_rho.values, &v.u_z.values, &mut out.values);
    out
}

pub(crate) fn divergence_into(g: &CylGrid, u_rho: &[f64], u_z: &[f64], out: &mut [f64]) {
    for k in 0..g.n_z {
        let km = g.km(k);
        for j in 0..g.n_rho {
            let outer = g.rho_face(j) * u_rho[g.idx(j, k)];
            let inner = if j == 0 {
                0.0
            } else {
                g.rho_face(j - 1) * u_rho[g.idx(j - 1, k)]
            };
            let radial = (outer - inner) / (g.rho(j) * g.d_rho);
            let axial = (u_z[g.idx(j, k)] - u_z[g.idx(j, km)]) / g.d_z;
            out[g.idx(j, k)] = radial + axial;
        }
    }
}

/// Staggered gradient of a centred scalar; zero on the wall face.
pub(crate) fn gradient_into(g: &CylGrid, phi: &[f64], g_rho: &mut [f64], g_z: &mut [f64]) {
    for k in 0..g.n_z {
        let kp = g.kp(k);
        for j in 0..g.n_rho {
            let i = g.idx(j, k);
            g_rho[i] = if j + 1 == g.n_rho {
                0.0
            } else {
                (phi[g.idx(j + 1, k)] - phi[i]) / g.d_rho
            };
            g_z[i] = (phi[g.idx(j, kp)] - phi[i]) / g.d_z;
        }
    }
}

/// Vorticity of the node-aligned view of `v`.
pub fn curl_axisym(v: &VelocityState) -> VorticityFields {
    curl_nodal(&v.nodal())
}

/// `ω_ρ = −∂_z u_φ`, `ω_φ = ∂_z u_ρ − ∂_ρ u_z`, `ω_z = (1/ρ)∂_ρ(ρ u_φ)`.
pub fn curl_nodal(u: &NodalField) -> VorticityFields {
    let g = u.grid();
    let w_rho: Vec<f64> = d_z(&g, &u.phi.values).into_iter().map(|v| -v).collect();
    let dz_ur = d_z(&g, &u.rho.values);
    let dr_uz = d_rho(&g, &u.z.values, Parity::Even);
    let w_phi: Vec<f64> = dz_ur.iter().zip(&dr_uz).map(|(a, b)| a - b).collect();

    let n = g.n_rho;
    let mut w_z = vec![0.0; g.len()];
    for k in 0..g.n_z {
        let row = &u.phi.values[k * n..(k + 1) * n];
        let (_, hi) = crate::fields::row_ghosts(row, Parity::Odd);
        let flux = |j: isize| -> f64 {
            if j < 0 {
                // ρu_φ is even across the axis
                g.rho(0) * row[0]
            } else if j as usize == n {
                (g.rho_max + 0.5 * g.d_rho) * hi
            } else {
                g.rho(j as usize) * row[j as usize]
            }
        };
        for j in 0..n {
            let ji = j as isize;
            w_z[k * n + j] = (flux(ji + 1) - flux(ji - 1)) / (2.0 * g.d_rho * g.rho(j));
        }
    }
    VorticityFields {
        w_rho: ScalarSample::new(g, Stagger::Center, w_rho).expect("length"),
        w_phi: ScalarSample::new(g, Stagger::Center, w_phi).expect("length"),
        w_z: ScalarSample::new(g, Stagger::Center, w_z).expect("length"),
    }
}

/// `∂_ρ u_ρ + u_ρ/ρ + ∂_z u_z` of a node-aligned field.
pub fn divergence_nodal(u: &NodalField) -> Vec<f64> {
    let g = u.grid();
    let dr = d_rho(&g, &u.rho.values, Parity::Odd);
    let dz = d_z(&g, &u.z.values);
    (0..g.len())
        .map(|i| {
            let j = i % g.n_rho;
            dr[i] + u.rho.values[i] / g.rho(j) + dz[i]
        })
        .collect()
}

/// Tendencies `∂_t (u_ρ, u_φ, u_z)` with a no-slip wall.
pub fn momentum_rhs(v: &VelocityState, f: &ForcingFields, nu: f64) -> [ScalarSample; 3] {
    momentum_rhs_with_wall(v, f, nu, WallVelocity::default())
}

/// Tendencies of the cylindrical momentum equations: advection, the
/// `u_φ²/ρ` and `u_φ u_ρ/ρ` terms, the gradient of the stored pressure,
/// forcing and the viscous operators with their `−u/ρ²` corrections.
pub fn momentum_rhs_with_wall(
    v: &VelocityState,
    f: &ForcingFields,
    nu: f64,
    wall: WallVelocity,
) -> [ScalarSample; 3] {
    let g = v.grid();
    let mut out = [
        ScalarSample::zeros(g, Stagger::RhoFace),
        ScalarSample::zeros(g, Stagger::Center),
        ScalarSample::zeros(g, Stagger::ZFace),
    ];
    let [a, b, c] = &mut out;
    tendency_into(
        &g,
        [&v.u_rho.values, &v.u_phi.values, &v.u_z.values],
        [&f.h_rho.values, &f.h_phi.values, &f.h_z.values],
        nu,
        wall,
        [&mut a.values, &mut b.values, &mut c.values],
    );
    // pressure gradient
    let p = &v.pressure.values;
    for k in 0..g.n_z {
        let kp = g.kp(k);
        for j in 0..g.n_rho {
            let i = g.idx(j, k);
            if j + 1 < g.n_rho {
                a.values[i] -= (p[g.idx(j + 1, k)] - p[i]) / g.d_rho;
            }
            c.values[i] -= (p[g.idx(j, kp)] - p[i]) / g.d_z;
        }
    }
    out
}

/// Pressure-free tendencies on the staggered layout.
pub(crate) fn tendency_into(
    g: &CylGrid,
    u: [&[f64]; 3],
    h: [&[f64]; 3],
    nu: f64,
    wall: WallVelocity,
    out: [&mut [f64]; 3],
) {
    let [ur, up, uz] = u;
    let [hr, hp, hz] = h;
    let [tr, tp, tz] = out;
    let n = g.n_rho;
    let dr = g.d_rho;
    let dz = g.d_z;
    let dr2 = dr * dr;
    let dz2 = dz * dz;
    let at = |a: &[f64], j: usize, k: usize| a[k * n + j];
    // u_ρ on face j-1, with the axis face (j == 0) carrying zero
    let ur_in = |j: usize, k: usize| if j == 0 { 0.0 } else { ur[k * n + j - 1] };
    // centred fields with axis parity and Dirichlet wall reflection
    let up_at = |j: isize, k: usize| -> f64 {
        if j < 0 {
            -up[k * n]
        } else if j as usize >= n {
            2.0 * wall.u_phi - up[k * n + n - 1]
        } else {
            up[k * n + j as usize]
        }
    };
    let uz_at = |j: isize, k: usize| -> f64 {
        if j < 0 {
            uz[k * n]
        } else if j as usize >= n {
            2.0 * wall.u_z - uz[k * n + n - 1]
        } else {
            uz[k * n + j as usize]
        }
    };

    for k in 0..g.n_z {
        let (kp, km) = (g.kp(k), g.km(k));
        for j in 0..n {
            let i = k * n + j;
            let ji = j as isize;

            // radial face j at ρ_f = (j + 1)Δρ
            if j + 1 == n {
                tr[i] = 0.0;
            } else {
                let rf = g.rho_face(j);
                let u0 = ur[i];
                let u_out = at(ur, j + 1, k);
                let u_in = ur_in(j, k);
                let duds = (u_out - u_in) / (2.0 * dr);
                let dudz = (at(ur, j, kp) - at(ur, j, km)) / (2.0 * dz);
                let uz_bar =
                    0.25 * (at(uz, j, k) + at(uz, j, km) + at(uz, j + 1, k) + at(uz, j + 1, km));
                let up_bar = 0.5 * (at(up, j, k) + at(up, j + 1, k));
                let r_in = g.rho(j);
                let r_out = g.rho(j + 1);
                let visc = (r_out * (u_out - u0) - r_in * (u0 - u_in)) / (rf * dr2)
                    + (at(ur, j, kp) - 2.0 * u0 + at(ur, j, km)) / dz2
                    - u0 / (rf * rf);
                tr[i] = -(u0 * duds + uz_bar * dudz) + up_bar * up_bar / rf + hr[i] + nu * visc;
            }

            // centre: swirl
            {
                let rho = g.rho(j);
                let u0 = up[i];
                let ur_c = 0.5 * (ur_in(j, k) + ur[i]);
                let uz_c = 0.5 * (at(uz, j, km) + uz[i]);
                let duds = (up_at(ji + 1, k) - up_at(ji - 1, k)) / (2.0 * dr);
                let dudz = (at(up, j, kp) - at(up, j, km)) / (2.0 * dz);
                let rp = rho + 0.5 * dr;
                let rm = rho - 0.5 * dr;
                let flux_out = rp * (up_at(ji + 1, k) - u0);
                let flux_in = if j == 0 { 0.0 } else { rm * (u0 - up_at(ji - 1, k)) };
                let visc = (flux_out - flux_in) / (rho * dr2)
                    + (at(up, j, kp) - 2.0 * u0 + at(up, j, km)) / dz2
                    - u0 / (rho * rho);
                tp[i] = -(ur_c * duds + uz_c * dudz + u0 * ur_c / rho) + hp[i] + nu * visc;
            }

            // axial face (j, k + ½)
            {
                let rho = g.rho(j);
                let u0 = uz[i];
                let ur_bar = 0.25 * (ur_in(j, k) + ur[i] + ur_in(j, kp) + at(ur, j, kp));
                let duds = (uz_at(ji + 1, k) - uz_at(ji - 1, k)) / (2.0 * dr);
                let dudz = (at(uz, j, kp) - at(uz, j, km)) / (2.0 * dz);
                let rp = rho + 0.5 * dr;
                let rm = rho - 0.5 * dr;
                let flux_out = rp * (uz_at(ji + 1, k) - u0);
                let flux_in = if j == 0 { 0.0 } else { rm * (u0 - uz_at(ji - 1, k)) };
                let visc = (flux_out - flux_in) / (rho * dr2)
                    + (at(uz, j, kp) - 2.0 * u0 + at(uz, j, km)) / dz2;
                tz[i] = -(ur_bar * duds + u0 * dudz) + hz[i] + nu * visc;
            }
        }
    }
}

/// Pointwise residual (left side − right side) of the three vorticity
/// transport equations. `dw_dt` is the time derivative of `w`, usually a
/// difference of two checkpoints.
pub fn vorticity_transport_residual(
    v: &VelocityState,
    w: &VorticityFields,
    forcing: &ForcingFields,
    nu: f64,
    dw_dt: Option<&VorticityFields>,
) -> Result<[ScalarSample; 3]> {
    let dw_dt = dw_dt.ok_or_else(|| {
        Error::Contract("vorticity transport residual needs a time derivative of the vorticity".into())
    })?;
    let gcurl = forcing.curl();
    Ok(vorticity_residual_nodal(&v.nodal(), w, &gcurl, nu, dw_dt))
}

pub(crate) fn vorticity_residual_nodal(
    u: &NodalField,
    w: &VorticityFields,
    gcurl: &VorticityFields,
    nu: f64,
    dw_dt: &VorticityFields,
) -> [ScalarSample; 3] {
    let g = u.grid();
    let ur = &u.rho.values;
    let up = &u.phi.values;
    let uz = &u.z.values;
    let dr_ur = d_rho(&g, ur, Parity::Odd);
    let dz_ur = d_z(&g, ur);
    let dr_uz = d_rho(&g, uz, Parity::Even);
    let dz_uz = d_z(&g, uz);

    let comp = |f: &ScalarSample, parity: Parity| {
        (
            d_rho(&g, &f.values, parity),
            d_z(&g, &f.values),
            laplacian(&g, &f.values, parity),
        )
    };
    let (wr_r, wr_z, wr_l) = comp(&w.w_rho, Parity::Odd);
    let (wp_r, wp_z, wp_l) = comp(&w.w_phi, Parity::Odd);
    let (wz_r, wz_z, wz_l) = comp(&w.w_z, Parity::Even);

    let mut r = [
        ScalarSample::zeros(g, Stagger::Center),
        ScalarSample::zeros(g, Stagger::Center),
        ScalarSample::zeros(g, Stagger::Center),
    ];
    for i in 0..g.len() {
        let rho = g.rho(i % g.n_rho);
        let (wr, wp, wz) = (w.w_rho.values[i], w.w_phi.values[i], w.w_z.values[i]);
        r[0].values[i] = dw_dt.w_rho.values[i] + ur[i] * wr_r[i] + uz[i] * wr_z[i]
            - dr_ur[i] * wr
            - dz_ur[i] * wz
            - gcurl.w_rho.values[i]
            - nu * (wr_l[i] - wr / (rho * rho));
        r[1].values[i] = dw_dt.w_phi.values[i] + ur[i] * wp_r[i] + uz[i] * wp_z[i]
            - ur[i] / rho * wp
            + 2.0 * up[i] / rho * wr
            - gcurl.w_phi.values[i]
            - nu * (wp_l[i] - wp / (rho * rho));
        r[2].values[i] = dw_dt.w_z.values[i] + ur[i] * wz_r[i] + uz[i] * wz_z[i]
            - dr_uz[i] * wr
            - dz_uz[i] * wz
            - gcurl.w_z.values[i]
            - nu * wz_l[i];
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> CylGrid {
        CylGrid::new(n, n, 2.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn divergence_of_linear_radial() {
        let g = grid(8);
        let v = VelocityState::from_fns(g, 0.0, |r, _| r, |_, _| 0.0, |_, _| 0.0, |_, _| 0.0);
        let d = divergence(&v);
        assert!(d.values.iter().all(|x| (x - 2.0).abs() < 1e-12));
    }

    #[test]
    fn divergence_of_inverse_radial_away_from_axis() {
        let g = grid(8);
        let v = VelocityState::from_fns(g, 0.0, |r, _| 1.0 / r, |_, _| 0.0, |_, _| 0.0, |_, _| 0.0);
        let d = divergence(&v);
        for k in 0..g.n_z {
            for j in 1..g.n_rho {
                assert!(d.at(j, k).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rigid_rotation_curl() {
        let g = grid(8);
        let v = VelocityState::from_fns(g, 0.0, |_, _| 0.0, |r, _| r, |_, _| 0.0, |_, _| 0.0);
        let w = curl_axisym(&v);
        assert!(w.w_z.values.iter().all(|x| (x - 2.0).abs() < 1e-12));
        assert!(w.w_rho.max_abs() < 1e-14 && w.w_phi.max_abs() < 1e-14);
    }

    #[test]
    fn axial_shear_curl() {
        // u_φ = z is not periodic; sample a single interior z row instead
        let g = CylGrid::new(6, 16, 2.0, 0.0, 1.0).unwrap();
        let v = VelocityState::from_fns(g, 0.0, |_, _| 0.0, |_, z| z, |_, _| 0.0, |_, _| 0.0);
        let w = curl_axisym(&v);
        for j in 0..g.n_rho {
            for k in 1..g.n_z - 1 {
                assert!((w.w_rho.at(j, k) + 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_state_zero_tendency() {
        let g = grid(6);
        let v = VelocityState::zeros(g, 0.0);
        let t = momentum_rhs(&v, &ForcingFields::zeros(g), 0.3);
        assert!(t.iter().all(|s| s.max_abs() == 0.0));
    }

    #[test]
    fn rigid_rotation_tendencies() {
        let g = grid(10);
        let v = VelocityState::from_fns(g, 0.0, |_, _| 0.0, |r, _| r, |_, _| 0.0, |_, _| 0.0);
        let [tr, tp, tz] = momentum_rhs(&v, &ForcingFields::zeros(g), 0.7);
        for k in 0..g.n_z {
            // interior rows; the wall row sees the no-slip reflection
            for j in 0..g.n_rho - 1 {
                assert!(tp.at(j, k).abs() < 1e-12, "swirl tendency {}", tp.at(j, k));
                assert!((tr.at(j, k) - g.rho_face(j)).abs() < 1e-12);
                assert!(tz.at(j, k).abs() < 1e-14);
            }
        }
        // a co-rotating wall makes the swirl tendency vanish everywhere
        let wall = WallVelocity { u_phi: g.rho_max, u_z: 0.0 };
        let [_, tp, _] = momentum_rhs_with_wall(&v, &ForcingFields::zeros(g), 0.7, wall);
        assert!(tp.max_abs() < 1e-12);
    }

    #[test]
    fn divergence_and_gradient_are_adjoint() {
        // Σ w_c φ (D u) = −Σ w_f u (G φ) over interior faces
        let g = CylGrid::new(7, 5, 2.0, 0.0, 1.3).unwrap();
        let mut state = 1u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let phi: Vec<f64> = (0..g.len()).map(|_| rnd()).collect();
        let mut ur: Vec<f64> = (0..g.len()).map(|_| rnd()).collect();
        let uz: Vec<f64> = (0..g.len()).map(|_| rnd()).collect();
        for k in 0..g.n_z {
            ur[g.idx(g.n_rho - 1, k)] = 0.0;
        }
        let mut div = vec![0.0; g.len()];
        divergence_into(&g, &ur, &uz, &mut div);
        let (mut gr, mut gz) = (vec![0.0; g.len()], vec![0.0; g.len()]);
        gradient_into(&g, &phi, &mut gr, &mut gz);
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for k in 0..g.n_z {
            for j in 0..g.n_rho {
                let i = g.idx(j, k);
                lhs += g.weight(Stagger::Center, j) * phi[i] * div[i];
                rhs -= g.weight(Stagger::RhoFace, j) * ur[i] * gr[i]
                    + g.weight(Stagger::ZFace, j) * uz[i] * gz[i];
            }
        }
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn vorticity_residual_needs_time_derivative() {
        let g = grid(4);
        let v = VelocityState::zeros(g, 0.0);
        let w = VorticityFields::zeros(g);
        let r = vorticity_transport_residual(&v, &w, &ForcingFields::zeros(g), 1.0, None);
        assert!(matches!(r, Err(Error::Contract(_))));
    }

    #[test]
    fn vorticity_residual_zero_fields() {
        let g = grid(6);
        let v = VelocityState::zeros(g, 0.0);
        let w = VorticityFields::zeros(g);
        let r = vorticity_transport_residual(&v, &w, &ForcingFields::zeros(g), 1.0, Some(&w)).unwrap();
        assert!(r.iter().all(|s| s.max_abs() == 0.0));
    }

    #[test]
    fn steady_rigid_rotation_vorticity_balance() {
        let g = grid(8);
        let v = VelocityState::from_fns(g, 0.0, |_, _| 0.0, |r, _| r, |_, _| 0.0, |_, _| 0.0);
        let w = curl_axisym(&v);
        let dw = VorticityFields::zeros(g);
        let r = vorticity_transport_residual(&v, &w, &ForcingFields::zeros(g), 0.5, Some(&dw)).unwrap();
        // every term of the ω_φ equation vanishes identically
        assert!(r[1].max_abs() < 1e-12);
        assert!(r[0].max_abs() < 1e-12 && r[2].max_abs() < 1e-12);
    }
}
