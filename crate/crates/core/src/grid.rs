//! Cylindrical mesh on `ρ ∈ (0, rho_max]`, `z` periodic, and the volume
//! quadrature every estimate is built on.
//!
//! Cell centres sit at `ρ_j = (j + ½)Δρ`, so no node touches the axis and
//! weights such as `1/ρ²` stay finite. A cell carries the measure
//! `2π ρ_j Δρ Δz` (midpoint rule on the Jacobian `2πρ`).
//!
//! Arrays are stored `ρ`-fastest: entry `(j, k)` lives at `k * n_rho + j`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylGrid {
    pub n_rho: usize,
    pub n_z: usize,
    pub rho_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub d_rho: f64,
    pub d_z: f64,
}

/// Where on the staggered mesh a sample lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stagger {
    /// Cell centre `(ρ_j, z_k)`.
    Center,
    /// Radial face `((j + 1)Δρ, z_k)`; index `n_rho - 1` is the wall.
    RhoFace,
    /// Axial face `(ρ_j, z_min + (k + 1)Δz)`, periodic in `k`.
    ZFace,
}

impl CylGrid {
    pub fn new(n_rho: usize, n_z: usize, rho_max: f64, z_min: f64, z_max: f64) -> Result<Self> {
        if n_rho < 2 || n_z < 2 {
            return Err(Error::Config(format!(
                "grid needs n_rho >= 2 and n_z >= 2, got {n_rho} x {n_z}"
            )));
        }
        if !(rho_max.is_finite() && rho_max > 0.0) {
            return Err(Error::Config(format!("rho_max must be positive, got {rho_max}")));
        }
        if !(z_min.is_finite() && z_max.is_finite() && z_max > z_min) {
            return Err(Error::Config(format!(
                "z extent must satisfy z_max > z_min, got [{z_min}, {z_max}]"
            )));
        }
        Ok(CylGrid {
            n_rho,
            n_z,
            rho_max,
            z_min,
            z_max,
            d_rho: rho_max / n_rho as f64,
            d_z: (z_max - z_min) / n_z as f64,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_rho * self.n_z
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, j: usize, k: usize) -> usize {
        k * self.n_rho + j
    }

    /// Periodic neighbour index in `z`.
    #[inline]
    pub fn kp(&self, k: usize) -> usize {
        if k + 1 == self.n_z {
            0
        } else {
            k + 1
        }
    }

    #[inline]
    pub fn km(&self, k: usize) -> usize {
        if k == 0 {
            self.n_z - 1
        } else {
            k - 1
        }
    }

    /// Cell-centre radius `ρ_j`.
    #[inline]
    pub fn rho(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.d_rho
    }

    /// Radius of radial face `j`, i.e. `(j + 1)Δρ`.
    #[inline]
    pub fn rho_face(&self, j: usize) -> f64 {
        (j as f64 + 1.0) * self.d_rho
    }

    #[inline]
    pub fn z(&self, k: usize) -> f64 {
        self.z_min + (k as f64 + 0.5) * self.d_z
    }

    #[inline]
    pub fn z_face(&self, k: usize) -> f64 {
        self.z_min + (k as f64 + 1.0) * self.d_z
    }

    pub fn rho_centers(&self) -> Vec<f64> {
        (0..self.n_rho).map(|j| self.rho(j)).collect()
    }

    pub fn length_z(&self) -> f64 {
        self.z_max - self.z_min
    }

    /// Exact volume `π rho_max² (z_max − z_min)` of the cylinder.
    pub fn volume(&self) -> f64 {
        PI * self.rho_max * self.rho_max * self.length_z()
    }

    /// Smallest mesh spacing.
    pub fn h_min(&self) -> f64 {
        self.d_rho.min(self.d_z)
    }

    /// Coordinates `(ρ, z)` of sample `(j, k)` at the given location.
    #[inline]
    pub fn position(&self, loc: Stagger, j: usize, k: usize) -> (f64, f64) {
        match loc {
            Stagger::Center => (self.rho(j), self.z(k)),
            Stagger::RhoFace => (self.rho_face(j), self.z(k)),
            Stagger::ZFace => (self.rho(j), self.z_face(k)),
        }
    }

    /// Quadrature weight `2π ρ Δρ Δz` of sample `(j, ·)` at `loc`.
    #[inline]
    pub fn weight(&self, loc: Stagger, j: usize) -> f64 {
        let rho = match loc {
            Stagger::Center | Stagger::ZFace => self.rho(j),
            Stagger::RhoFace => self.rho_face(j),
        };
        2.0 * PI * rho * self.d_rho * self.d_z
    }
}

/// Real values over the `n_rho × n_z` samples of one staggered location.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSample {
    pub grid: CylGrid,
    pub location: Stagger,
    pub values: Vec<f64>,
}

impl ScalarSample {
    pub fn new(grid: CylGrid, location: Stagger, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "sample has {} values, grid expects {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarSample {
            grid,
            location,
            values,
        })
    }

    pub fn zeros(grid: CylGrid, location: Stagger) -> Self {
        ScalarSample {
            grid,
            location,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: CylGrid, location: Stagger, c: f64) -> Self {
        ScalarSample {
            grid,
            location,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f(ρ, z)` at every point of `location`.
    pub fn from_fn(grid: CylGrid, location: Stagger, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..grid.n_z {
            for j in 0..grid.n_rho {
                let (rho, z) = grid.position(location, j, k);
                values.push(f(rho, z));
            }
        }
        ScalarSample {
            grid,
            location,
            values,
        }
    }

    #[inline]
    pub fn at(&self, j: usize, k: usize) -> f64 {
        self.values[self.grid.idx(j, k)]
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        ScalarSample {
            grid: self.grid,
            location: self.location,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Pointwise negative part `max(−f, 0)`.
    pub fn negative_part(&self) -> Self {
        self.map(|v| (-v).max(0.0))
    }
}

fn ensure_finite(f: &ScalarSample) -> Result<()> {
    if let Some(pos) = f.values.iter().position(|v| !v.is_finite()) {
        let j = pos % f.grid.n_rho;
        let k = pos / f.grid.n_rho;
        return Err(Error::Numeric(format!(
            "non-finite sample {} at (j={j}, k={k})",
            f.values[pos]
        )));
    }
    Ok(())
}

/// Midpoint rule `Σ f_jk · 2π ρ_j Δρ Δz`.
pub fn integrate(f: &ScalarSample) -> Result<f64> {
    ensure_finite(f)?;
    Ok(integrate_unchecked(f.grid, f.location, &f.values))
}

/// Quadrature on a raw array, no finiteness check.
pub(crate) fn integrate_unchecked(grid: CylGrid, loc: Stagger, values: &[f64]) -> f64 {
    let mut total = 0.0;
    for k in 0..grid.n_z {
        let row = &values[k * grid.n_rho..(k + 1) * grid.n_rho];
        for (j, v) in row.iter().enumerate() {
            total += v * grid.weight(loc, j);
        }
    }
    total
}

/// `(∫ |f ρ^γ|^q dx)^{1/q}`; `γ = 0` is the plain `L^q` norm.
pub fn weighted_lq_norm(f: &ScalarSample, q: f64, gamma: f64) -> Result<f64> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::Domain(format!("weighted norm needs finite q >= 1, got {q}")));
    }
    ensure_finite(f)?;
    let g = f.grid;
    let mut total = 0.0;
    for k in 0..g.n_z {
        for j in 0..g.n_rho {
            let (rho, _) = g.position(f.location, j, k);
            let v = (f.at(j, k) * rho.powf(gamma)).abs();
            if v > 0.0 {
                total += v.powf(q) * g.weight(f.location, j);
            }
        }
    }
    Ok(total.powf(1.0 / q))
}

/// Advances the running value of `∫ (∫ |f⁻ ρ^γ|^a dx)^{b/a} dt` by one
/// rectangle of width `dt`. For `b = ∞` the running value is the supremum of
/// the spatial norm instead.
pub fn serrin_accumulate(
    prev: f64,
    f_neg: &ScalarSample,
    a: f64,
    b: f64,
    gamma: f64,
    dt: f64,
) -> Result<f64> {
    if let Some(v) = f_neg.values.iter().find(|v| **v < 0.0) {
        return Err(Error::Contract(format!(
            "negative part must be nonnegative, found {v}"
        )));
    }
    if !(dt >= 0.0) {
        return Err(Error::Contract(format!("dt must be nonnegative, got {dt}")));
    }
    if !(b > 0.0) {
        return Err(Error::Domain(format!("time exponent b must be positive, got {b}")));
    }
    let norm = weighted_lq_norm(f_neg, a, gamma)?;
    if b.is_infinite() {
        Ok(prev.max(norm))
    } else {
        Ok(prev + dt * norm.powf(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_cylinder(n_rho: usize, n_z: usize) -> CylGrid {
        CylGrid::new(n_rho, n_z, 2.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn staggered_centres() {
        let g = CylGrid::new(4, 4, 2.0, 0.0, 1.0).unwrap();
        assert_eq!(g.rho_centers(), vec![0.25, 0.75, 1.25, 1.75]);
        assert_eq!(g.d_rho, 0.5);
        assert_eq!(g.d_z, 0.25);
    }

    #[test]
    fn smallest_grid() {
        let g = CylGrid::new(2, 2, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(g.d_rho, 0.5);
        assert!(g.rho(0) > 0.0);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(matches!(CylGrid::new(1, 4, 2.0, 0.0, 1.0), Err(Error::Config(_))));
        assert!(CylGrid::new(4, 4, 0.0, 0.0, 1.0).is_err());
        assert!(CylGrid::new(4, 4, 2.0, 1.0, 1.0).is_err());
        assert!(CylGrid::new(4, 1, 2.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn cell_weight() {
        let g = unit_cylinder(8, 3);
        let w = g.weight(Stagger::Center, 2);
        assert!((w - 2.0 * PI * g.rho(2) * g.d_rho * g.d_z).abs() < 1e-15);
    }

    #[test]
    fn volume_is_exact() {
        for (n, m) in [(2, 2), (5, 7), (33, 16), (128, 128)] {
            let g = unit_cylinder(n, m);
            let one = ScalarSample::constant(g, Stagger::Center, 1.0);
            let v = integrate(&one).unwrap();
            assert!((v - 4.0 * PI).abs() < 1e-12, "{n}x{m}: {v}");
        }
    }

    #[test]
    fn integral_of_rho_second_order() {
        // exact: 2π ∫₀² ρ² dρ = 16π/3
        let exact = 16.0 * PI / 3.0;
        let errs: Vec<f64> = [8, 16, 32, 64]
            .iter()
            .map(|&n| {
                let g = unit_cylinder(n, 4);
                let f = ScalarSample::from_fn(g, Stagger::Center, |r, _| r);
                (integrate(&f).unwrap() - exact).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 2.0).abs() < 0.05, "order {order}");
        }
    }

    #[test]
    fn zero_integrand() {
        let g = unit_cylinder(4, 4);
        assert_eq!(integrate(&ScalarSample::zeros(g, Stagger::Center)).unwrap(), 0.0);
        assert_eq!(
            weighted_lq_norm(&ScalarSample::zeros(g, Stagger::Center), 3.0, 0.7).unwrap(),
            0.0
        );
    }

    #[test]
    fn non_finite_rejected() {
        let g = unit_cylinder(4, 4);
        let mut f = ScalarSample::zeros(g, Stagger::Center);
        f.values[5] = f64::NAN;
        assert!(matches!(integrate(&f), Err(Error::Numeric(_))));
    }

    #[test]
    fn lq_norm_of_one() {
        let g = unit_cylinder(16, 4);
        let one = ScalarSample::constant(g, Stagger::Center, 1.0);
        let n = weighted_lq_norm(&one, 2.0, 0.0).unwrap();
        assert!((n - (4.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn weighted_l1_converges() {
        let exact = 16.0 * PI / 3.0;
        let coarse = {
            let g = unit_cylinder(16, 4);
            weighted_lq_norm(&ScalarSample::constant(g, Stagger::Center, 1.0), 1.0, 1.0).unwrap()
        };
        let fine = {
            let g = unit_cylinder(64, 4);
            weighted_lq_norm(&ScalarSample::constant(g, Stagger::Center, 1.0), 1.0, 1.0).unwrap()
        };
        assert!((fine - exact).abs() < (coarse - exact).abs() / 10.0);
        assert!((fine - exact).abs() < 3e-3);
    }

    #[test]
    fn lq_rejects_small_q() {
        let g = unit_cylinder(4, 4);
        let one = ScalarSample::constant(g, Stagger::Center, 1.0);
        assert!(matches!(weighted_lq_norm(&one, 0.5, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn serrin_constant_field() {
        let g = unit_cylinder(8, 8);
        let one = ScalarSample::constant(g, Stagger::Center, 1.0);
        let (a, b, t_end, steps) = (6.0, 4.0, 0.5, 50);
        let dt = t_end / steps as f64;
        let mut acc = 0.0;
        for _ in 0..steps {
            acc = serrin_accumulate(acc, &one, a, b, 0.0, dt).unwrap();
        }
        let exact = t_end * g.volume().powf(b / a);
        assert!(((acc - exact) / exact).abs() < 1e-10);
    }

    #[test]
    fn serrin_zero_and_sup() {
        let g = unit_cylinder(8, 8);
        let zero = ScalarSample::zeros(g, Stagger::Center);
        assert_eq!(serrin_accumulate(1.5, &zero, 6.0, 4.0, 0.0, 0.1).unwrap(), 1.5);
        let one = ScalarSample::constant(g, Stagger::Center, 1.0);
        let v = serrin_accumulate(0.0, &one, 6.0, f64::INFINITY, 0.0, 0.1).unwrap();
        let v = serrin_accumulate(v, &one, 6.0, f64::INFINITY, 0.0, 0.1).unwrap();
        assert!((v - g.volume().powf(1.0 / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn serrin_rejects_negative() {
        let g = unit_cylinder(4, 4);
        let f = ScalarSample::constant(g, Stagger::Center, -1.0);
        assert!(matches!(
            serrin_accumulate(0.0, &f, 6.0, 4.0, 0.0, 0.1),
            Err(Error::Contract(_))
        ));
    }

    proptest! {
        #[test]
        fn integrate_linear_and_monotone(
            vals in prop::collection::vec(-5.0f64..5.0, 24),
            bump in prop::collection::vec(0.0f64..3.0, 24),
            lambda in -3.0f64..3.0,
        ) {
            let g = CylGrid::new(6, 4, 2.0, 0.0, 1.0).unwrap();
            let f = ScalarSample::new(g, Stagger::Center, vals.clone()).unwrap();
            let h = ScalarSample::new(g, Stagger::Center, bump.clone()).unwrap();
            let sum: Vec<f64> = vals.iter().zip(&bump).map(|(a, b)| lambda * a + b).collect();
            let s = ScalarSample::new(g, Stagger::Center, sum).unwrap();
            let lhs = integrate(&s).unwrap();
            let rhs = lambda * integrate(&f).unwrap() + integrate(&h).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()));

            let upper: Vec<f64> = vals.iter().zip(&bump).map(|(a, b)| a + b).collect();
            let u = ScalarSample::new(g, Stagger::Center, upper).unwrap();
            prop_assert!(integrate(&u).unwrap() >= integrate(&f).unwrap() - 1e-12);
        }

        #[test]
        fn norm_homogeneous(
            vals in prop::collection::vec(-5.0f64..5.0, 24),
            lambda in 0.0f64..4.0,
            q in 1.0f64..6.0,
            gamma in -1.0f64..1.0,
        ) {
            let g = CylGrid::new(6, 4, 2.0, 0.0, 1.0).unwrap();
            let f = ScalarSample::new(g, Stagger::Center, vals).unwrap();
            let n1 = weighted_lq_norm(&f.map(|v| lambda * v), q, gamma).unwrap();
            let n0 = weighted_lq_norm(&f, q, gamma).unwrap();
            prop_assert!((n1 - lambda * n0).abs() < 1e-9 * (1.0 + n1));
        }

        #[test]
        fn serrin_nondecreasing(
            vals in prop::collection::vec(0.0f64..2.0, 24),
            dts in prop::collection::vec(1e-4f64..0.1, 1..6),
        ) {
            let g = CylGrid::new(6, 4, 2.0, 0.0, 1.0).unwrap();
            let f = ScalarSample::new(g, Stagger::Center, vals).unwrap();
            let mut acc = 0.0;
            for dt in dts {
                let next = serrin_accumulate(acc, &f, 4.0, 3.0, 0.2, dt).unwrap();
                prop_assert!(next >= acc);
                acc = next;
            }
        }
    }
}
