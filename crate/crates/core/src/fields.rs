//! Velocity, vorticity and forcing containers.
//!
//! A [`VelocityState`] uses the staggered layout the solver advances:
//! `u_ρ` on radial faces, `u_z` on axial faces, `u_φ` and the pressure at
//! cell centres. Diagnostics work on the node-aligned [`NodalField`] view,
//! which averages face values onto the centres.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CylGrid, ScalarSample, Stagger};

/// Reflection behaviour across the axis `ρ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Prescribed tangential velocity of the wall `ρ = rho_max`.
///
/// The normal component is always zero. Defaults to no-slip.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WallVelocity {
    pub u_phi: f64,
    pub u_z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityState {
    pub u_rho: ScalarSample,
    pub u_phi: ScalarSample,
    pub u_z: ScalarSample,
    pub pressure: ScalarSample,
    pub time: f64,
}

impl VelocityState {
    pub fn zeros(grid: CylGrid, time: f64) -> Self {
        VelocityState {
            u_rho: ScalarSample::zeros(grid, Stagger::RhoFace),
            u_phi: ScalarSample::zeros(grid, Stagger::Center),
            u_z: ScalarSample::zeros(grid, Stagger::ZFace),
            pressure: ScalarSample::zeros(grid, Stagger::Center),
            time,
        }
    }

    /// Samples closed-form components at their staggered positions.
    pub fn from_fns(
        grid: CylGrid,
        time: f64,
        u_rho: impl FnMut(f64, f64) -> f64,
        u_phi: impl FnMut(f64, f64) -> f64,
        u_z: impl FnMut(f64, f64) -> f64,
        pressure: impl FnMut(f64, f64) -> f64,
    ) -> Self {
        VelocityState {
            u_rho: ScalarSample::from_fn(grid, Stagger::RhoFace, u_rho),
            u_phi: ScalarSample::from_fn(grid, Stagger::Center, u_phi),
            u_z: ScalarSample::from_fn(grid, Stagger::ZFace, u_z),
            pressure: ScalarSample::from_fn(grid, Stagger::Center, pressure),
            time,
        }
    }

    pub fn grid(&self) -> CylGrid {
        self.u_phi.grid
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.grid();
        let expected = [
            (&self.u_rho, Stagger::RhoFace, "u_rho"),
            (&self.u_phi, Stagger::Center, "u_phi"),
            (&self.u_z, Stagger::ZFace, "u_z"),
            (&self.pressure, Stagger::Center, "pressure"),
        ];
        for (s, loc, name) in expected {
            if s.grid != g {
                return Err(Error::Contract(format!("{name} lives on a different grid")));
            }
            if s.location != loc {
                return Err(Error::Contract(format!(
                    "{name} must be stored at {loc:?}, found {:?}",
                    s.location
                )));
            }
            if s.values.len() != g.len() {
                return Err(Error::Contract(format!("{name} has wrong length")));
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.u_rho.is_finite() && self.u_phi.is_finite() && self.u_z.is_finite() && self.pressure.is_finite()
    }

    /// `½ ∫ |u|² dx`, each component with the quadrature of its own location.
    pub fn kinetic_energy(&self) -> f64 {
        let g = self.grid();
        let mut e = 0.0;
        for s in [&self.u_rho, &self.u_phi, &self.u_z] {
            for k in 0..g.n_z {
                for j in 0..g.n_rho {
                    let v = s.at(j, k);
                    e += v * v * g.weight(s.location, j);
                }
            }
        }
        0.5 * e
    }

    pub fn max_speed(&self) -> f64 {
        self.u_rho
            .max_abs()
            .max(self.u_phi.max_abs())
            .max(self.u_z.max_abs())
    }

    /// Face values averaged onto cell centres.
    pub fn nodal(&self) -> NodalField {
        NodalField {
            rho: faces_to_centers_rho(&self.u_rho),
            phi: self.u_phi.clone(),
            z: faces_to_centers_z(&self.u_z),
            time: self.time,
        }
    }
}

/// Body force `h` in the staggered layout of [`VelocityState`].
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingFields {
    pub h_rho: ScalarSample,
    pub h_phi: ScalarSample,
    pub h_z: ScalarSample,
}

impl ForcingFields {
    pub fn zeros(grid: CylGrid) -> Self {
        ForcingFields {
            h_rho: ScalarSample::zeros(grid, Stagger::RhoFace),
            h_phi: ScalarSample::zeros(grid, Stagger::Center),
            h_z: ScalarSample::zeros(grid, Stagger::ZFace),
        }
    }

    pub fn from_fns(
        grid: CylGrid,
        h_rho: impl FnMut(f64, f64) -> f64,
        h_phi: impl FnMut(f64, f64) -> f64,
        h_z: impl FnMut(f64, f64) -> f64,
    ) -> Self {
        ForcingFields {
            h_rho: ScalarSample::from_fn(grid, Stagger::RhoFace, h_rho),
            h_phi: ScalarSample::from_fn(grid, Stagger::Center, h_phi),
            h_z: ScalarSample::from_fn(grid, Stagger::ZFace, h_z),
        }
    }

    pub fn grid(&self) -> CylGrid {
        self.h_phi.grid
    }

    pub fn is_finite(&self) -> bool {
        self.h_rho.is_finite() && self.h_phi.is_finite() && self.h_z.is_finite()
    }

    pub fn nodal(&self) -> NodalField {
        NodalField {
            rho: faces_to_centers_rho(&self.h_rho),
            phi: self.h_phi.clone(),
            z: faces_to_centers_z(&self.h_z),
            time: f64::NAN,
        }
    }

    /// `g = curl h`, evaluated on the nodal view.
    pub fn curl(&self) -> VorticityFields {
        crate::operators::curl_nodal(&self.nodal())
    }
}

/// Three cylindrical components sampled at cell centres.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    pub rho: ScalarSample,
    pub phi: ScalarSample,
    pub z: ScalarSample,
    pub time: f64,
}

impl NodalField {
    pub fn zeros(grid: CylGrid, time: f64) -> Self {
        NodalField {
            rho: ScalarSample::zeros(grid, Stagger::Center),
            phi: ScalarSample::zeros(grid, Stagger::Center),
            z: ScalarSample::zeros(grid, Stagger::Center),
            time,
        }
    }

    pub fn from_fns(
        grid: CylGrid,
        time: f64,
        rho: impl FnMut(f64, f64) -> f64,
        phi: impl FnMut(f64, f64) -> f64,
        z: impl FnMut(f64, f64) -> f64,
    ) -> Self {
        NodalField {
            rho: ScalarSample::from_fn(grid, Stagger::Center, rho),
            phi: ScalarSample::from_fn(grid, Stagger::Center, phi),
            z: ScalarSample::from_fn(grid, Stagger::Center, z),
            time,
        }
    }

    pub fn grid(&self) -> CylGrid {
        self.phi.grid
    }

    /// Componentwise `(1 − λ)·self + λ·other`.
    pub fn lerp(&self, other: &NodalField, lambda: f64) -> NodalField {
        let mix = |a: &ScalarSample, b: &ScalarSample| ScalarSample {
            grid: a.grid,
            location: a.location,
            values: a
                .values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| (1.0 - lambda) * x + lambda * y)
                .collect(),
        };
        NodalField {
            rho: mix(&self.rho, &other.rho),
            phi: mix(&self.phi, &other.phi),
            z: mix(&self.z, &other.z),
            time: (1.0 - lambda) * self.time + lambda * other.time,
        }
    }
}

/// `(ω_ρ, ω_φ, ω_z)` at cell centres.
#[derive(Debug, Clone, PartialEq)]
pub struct VorticityFields {
    pub w_rho: ScalarSample,
    pub w_phi: ScalarSample,
    pub w_z: ScalarSample,
}

impl VorticityFields {
    pub fn zeros(grid: CylGrid) -> Self {
        VorticityFields {
            w_rho: ScalarSample::zeros(grid, Stagger::Center),
            w_phi: ScalarSample::zeros(grid, Stagger::Center),
            w_z: ScalarSample::zeros(grid, Stagger::Center),
        }
    }

    /// Forward difference `(next − prev) / dt`.
    pub fn time_derivative(prev: &Self, next: &Self, dt: f64) -> Self {
        let d = |a: &ScalarSample, b: &ScalarSample| ScalarSample {
            grid: a.grid,
            location: a.location,
            values: a
                .values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| (y - x) / dt)
                .collect(),
        };
        VorticityFields {
            w_rho: d(&prev.w_rho, &next.w_rho),
            w_phi: d(&prev.w_phi, &next.w_phi),
            w_z: d(&prev.w_z, &next.w_z),
        }
    }
}

fn faces_to_centers_rho(f: &ScalarSample) -> ScalarSample {
    let g = f.grid;
    let mut out = ScalarSample::zeros(g, Stagger::Center);
    for k in 0..g.n_z {
        for j in 0..g.n_rho {
            let inner = if j == 0 { 0.0 } else { f.at(j - 1, k) };
            out.values[g.idx(j, k)] = 0.5 * (inner + f.at(j, k));
        }
    }
    out
}

fn faces_to_centers_z(f: &ScalarSample) -> ScalarSample {
    let g = f.grid;
    let mut out = ScalarSample::zeros(g, Stagger::Center);
    for k in 0..g.n_z {
        for j in 0..g.n_rho {
            out.values[g.idx(j, k)] = 0.5 * (f.at(j, g.km(k)) + f.at(j, k));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Centre-based stencils used by the diagnostics.
//
// Axis ghosts reflect with the field's parity. Wall ghosts extrapolate
// quadratically from the last three cells (linearly when n_rho == 2), so the
// diagnostics do not assume any boundary condition on the field they read.

/// Ghost values `(f(ρ_{-1}), f(ρ_N))` of one radial row.
#[inline]
pub(crate) fn row_ghosts(row: &[f64], parity: Parity) -> (f64, f64) {
    let n = row.len();
    let lo = parity.sign() * row[0];
    let hi = if n >= 3 {
        3.0 * row[n - 1] - 3.0 * row[n - 2] + row[n - 3]
    } else {
        2.0 * row[n - 1] - row[n - 2]
    };
    (lo, hi)
}

/// Centred `∂_ρ f` at cell centres.
pub fn d_rho(grid: &CylGrid, f: &[f64], parity: Parity) -> Vec<f64> {
    let n = grid.n_rho;
    let inv = 1.0 / (2.0 * grid.d_rho);
    let mut out = vec![0.0; f.len()];
    for k in 0..grid.n_z {
        let row = &f[k * n..(k + 1) * n];
        let (lo, hi) = row_ghosts(row, parity);
        for j in 0..n {
            let left = if j == 0 { lo } else { row[j - 1] };
            let right = if j + 1 == n { hi } else { row[j + 1] };
            out[k * n + j] = (right - left) * inv;
        }
    }
    out
}

/// Centred periodic `∂_z f` at cell centres.
pub fn d_z(grid: &CylGrid, f: &[f64]) -> Vec<f64> {
    let inv = 1.0 / (2.0 * grid.d_z);
    let mut out = vec![0.0; f.len()];
    for k in 0..grid.n_z {
        let (kp, km) = (grid.kp(k), grid.km(k));
        for j in 0..grid.n_rho {
            out[grid.idx(j, k)] = (f[grid.idx(j, kp)] - f[grid.idx(j, km)]) * inv;
        }
    }
    out
}

/// `(1/ρ)∂_ρ(ρ ∂_ρ f) + ∂_zz f` in flux form; the axis flux is zero.
pub fn laplacian(grid: &CylGrid, f: &[f64], parity: Parity) -> Vec<f64> {
    let n = grid.n_rho;
    let dr2 = grid.d_rho * grid.d_rho;
    let dz2 = grid.d_z * grid.d_z;
    let mut out = vec![0.0; f.len()];
    for k in 0..grid.n_z {
        let row = &f[k * n..(k + 1) * n];
        let (_, hi) = row_ghosts(row, parity);
        let (kp, km) = (grid.kp(k), grid.km(k));
        for j in 0..n {
            let rho = grid.rho(j);
            let rp = rho + 0.5 * grid.d_rho;
            let rm = rho - 0.5 * grid.d_rho;
            let right = if j + 1 == n { hi } else { row[j + 1] };
            let flux_out = rp * (right - row[j]);
            let flux_in = if j == 0 { 0.0 } else { rm * (row[j] - row[j - 1]) };
            let radial = (flux_out - flux_in) / (rho * dr2);
            let axial = (f[grid.idx(j, kp)] - 2.0 * row[j] + f[grid.idx(j, km)]) / dz2;
            out[k * n + j] = radial + axial;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> CylGrid {
        CylGrid::new(n, n, 2.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn nodal_average_exact_for_linear_radial() {
        let g = grid(8);
        let v = VelocityState::from_fns(g, 0.0, |r, _| 3.0 * r, |_, _| 0.0, |_, _| 0.0, |_, _| 0.0);
        let n = v.nodal();
        for j in 0..g.n_rho {
            assert!((n.rho.at(j, 3) - 3.0 * g.rho(j)).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_parities() {
        let g = grid(10);
        let f: Vec<f64> = ScalarSample::from_fn(g, Stagger::Center, |r, _| r * r).values;
        let d = d_rho(&g, &f, Parity::Even);
        for j in 0..g.n_rho {
            assert!((d[g.idx(j, 0)] - 2.0 * g.rho(j)).abs() < 1e-12);
        }
        let f: Vec<f64> = ScalarSample::from_fn(g, Stagger::Center, |r, _| r).values;
        let d = d_rho(&g, &f, Parity::Odd);
        assert!(d.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn laplacian_of_quadratic() {
        // (1/ρ)(ρ·2ρ)' = 4
        let g = grid(12);
        let f = ScalarSample::from_fn(g, Stagger::Center, |r, _| r * r).values;
        let l = laplacian(&g, &f, Parity::Even);
        assert!(l.iter().all(|v| (v - 4.0).abs() < 1e-10), "{:?}", &l[..4]);
    }

    #[test]
    fn energy_of_rigid_rotation() {
        // ½ ∫ ρ² dx = ½ · 2π · R⁴/4 · L, midpoint error O(Δ²)
        let g = CylGrid::new(64, 4, 2.0, 0.0, 1.0).unwrap();
        let v = VelocityState::from_fns(g, 0.0, |_, _| 0.0, |r, _| r, |_, _| 0.0, |_, _| 0.0);
        let exact = 0.5 * 2.0 * std::f64::consts::PI * 4.0;
        assert!((v.kinetic_energy() - exact).abs() < 1e-2);
    }

    #[test]
    fn validate_catches_misplaced_component() {
        let g = grid(4);
        let mut v = VelocityState::zeros(g, 0.0);
        assert!(v.validate().is_ok());
        v.u_rho.location = Stagger::Center;
        assert!(matches!(v.validate(), Err(Error::Contract(_))));
    }
}
