//! Solvers for the cylindrical pressure Poisson problem `D G φ = b` on the
//! staggered mesh: zero flux through the axis and the wall, periodic in `z`.
//!
//! `D G` is the 5-point operator
//!
//! ```text
//! (1/(ρ_j Δρ²)) [ρ_{j+½}(φ_{j+1} − φ_j) − ρ_{j−½}(φ_j − φ_{j−1})]
//!   + (φ_{k+1} − 2φ_k + φ_{k−1}) / Δz²
//! ```
//!
//! Its null space is the constants; solutions are returned with an
//! arbitrary additive constant.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::CylGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PoissonMethod {
    /// FFT in `z`, one tridiagonal solve per axial mode. Exact to rounding.
    Spectral,
    /// Jacobi-preconditioned conjugate gradients on the weighted operator.
    ConjugateGradient { tolerance: f64, max_iterations: usize },
}

impl Default for PoissonMethod {
    fn default() -> Self {
        PoissonMethod::Spectral
    }
}

pub struct PoissonSolver {
    grid: CylGrid,
    method: PoissonMethod,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PoissonSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PoissonSolver")
            .field("grid", &self.grid)
            .field("method", &self.method)
            .finish()
    }
}

/// Diagnostics of the last solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

impl PoissonSolver {
    pub fn new(grid: CylGrid, method: PoissonMethod) -> Self {
        let mut planner = FftPlanner::new();
        PoissonSolver {
            grid,
            method,
            forward: planner.plan_fft_forward(grid.n_z),
            inverse: planner.plan_fft_inverse(grid.n_z),
        }
    }

    pub fn grid(&self) -> CylGrid {
        self.grid
    }

    pub fn method(&self) -> PoissonMethod {
        self.method
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
        match self.method {
            PoissonMethod::Spectral => Ok((
                self.solve_spectral(rhs),
                SolveStats {
                    iterations: 1,
                    relative_residual: 0.0,
                },
            )),
            PoissonMethod::ConjugateGradient {
                tolerance,
                max_iterations,
            } => solve_cg(&self.grid, rhs, tolerance, max_iterations),
        }
    }

    fn solve_spectral(&self, rhs: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let (n, m) = (g.n_rho, g.n_z);
        let dr2 = g.d_rho * g.d_rho;

        // column-major by radius: buf[j * m + k]
        let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); n * m];
        for k in 0..m {
            for j in 0..n {
                buf[j * m + k] = Complex::new(rhs[g.idx(j, k)] * g.rho(j) * dr2, 0.0);
            }
        }
        self.forward.process(&mut buf);

        let mut sol = vec![Complex::new(0.0, 0.0); n * m];
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![Complex::new(0.0, 0.0); n];
        for mode in 0..m {
            let theta = 2.0 * std::f64::consts::PI * mode as f64 / m as f64;
            let lambda = (2.0 - 2.0 * theta.cos()) / (g.d_z * g.d_z);
            let r = |j: usize| buf[j * m + mode];
            if mode == 0 {
                // cumulative flux; the system is singular with constant null space
                let mut flux = Complex::new(0.0, 0.0);
                let mut phi = Complex::new(0.0, 0.0);
                sol[mode] = phi;
                for j in 0..n - 1 {
                    flux += r(j);
                    phi += flux / (g.rho(j) + 0.5 * g.d_rho);
                    sol[(j + 1) * m + mode] = phi;
                }
                continue;
            }
            // Thomas algorithm: sub_j φ_{j−1} + diag_j φ_j + sup_j φ_{j+1} = r_j
            let sub = |j: usize| if j == 0 { 0.0 } else { g.rho(j) - 0.5 * g.d_rho };
            let sup = |j: usize| if j + 1 == n { 0.0 } else { g.rho(j) + 0.5 * g.d_rho };
            let diag = |j: usize| -(sub(j) + sup(j) + lambda * g.rho(j) * dr2);
            c_prime[0] = sup(0) / diag(0);
            d_prime[0] = r(0) / diag(0);
            for j in 1..n {
                let denom = diag(j) - sub(j) * c_prime[j - 1];
                c_prime[j] = sup(j) / denom;
                d_prime[j] = (r(j) - d_prime[j - 1] * sub(j)) / denom;
            }
            sol[(n - 1) * m + mode] = d_prime[n - 1];
            for j in (0..n - 1).rev() {
                sol[j * m + mode] = d_prime[j] - sol[(j + 1) * m + mode] * c_prime[j];
            }
        }
        self.inverse.process(&mut sol);
        let scale = 1.0 / m as f64;
        let mut out = vec![0.0; n * m];
        for k in 0..m {
            for j in 0..n {
                out[g.idx(j, k)] = sol[j * m + k].re * scale;
            }
        }
        out
    }
}

/// `D G φ` at cell centres.
pub fn apply_operator(g: &CylGrid, phi: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; phi.len()];
    let n = g.n_rho;
    let dr2 = g.d_rho * g.d_rho;
    let dz2 = g.d_z * g.d_z;
    for k in 0..g.n_z {
        let (kp, km) = (g.kp(k), g.km(k));
        for j in 0..n {
            let i = g.idx(j, k);
            let rho = g.rho(j);
            let out_flux = if j + 1 < n {
                (rho + 0.5 * g.d_rho) * (phi[g.idx(j + 1, k)] - phi[i])
            } else {
                0.0
            };
            let in_flux = if j > 0 {
                (rho - 0.5 * g.d_rho) * (phi[i] - phi[g.idx(j - 1, k)])
            } else {
                0.0
            };
            out[i] = (out_flux - in_flux) / (rho * dr2)
                + (phi[g.idx(j, kp)] - 2.0 * phi[i] + phi[g.idx(j, km)]) / dz2;
        }
    }
    out
}

fn solve_cg(g: &CylGrid, rhs: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveStats)> {
    // Symmetric positive semidefinite form: A = −ρ_j (D G), b_w = −ρ_j rhs.
    let len = rhs.len();
    let rho: Vec<f64> = (0..len).map(|i| g.rho(i % g.n_rho)).collect();
    let mut b: Vec<f64> = rhs.iter().zip(&rho).map(|(r, w)| -r * w).collect();
    // remove the component along the null space
    let mean = b.iter().sum::<f64>() / len as f64;
    b.iter_mut().for_each(|v| *v -= mean);
    let apply = |x: &[f64]| -> Vec<f64> {
        apply_operator(g, x)
            .into_iter()
            .zip(&rho)
            .map(|(v, w)| -v * w)
            .collect()
    };
    let diag: Vec<f64> = (0..len)
        .map(|i| {
            let j = i % g.n_rho;
            let r = g.rho(j);
            let mut d = 2.0 * r / (g.d_z * g.d_z);
            if j + 1 < g.n_rho {
                d += (r + 0.5 * g.d_rho) / (g.d_rho * g.d_rho);
            }
            if j > 0 {
                d += (r - 0.5 * g.d_rho) / (g.d_rho * g.d_rho);
            }
            d
        })
        .collect();

    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let b_norm = dot(&b, &b).sqrt();
    let mut x = vec![0.0; len];
    if b_norm == 0.0 {
        return Ok((x, SolveStats { iterations: 0, relative_residual: 0.0 }));
    }
    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        let ap = apply(&p);
        let alpha = rz / dot(&p, &ap);
        for i in 0..len {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = dot(&r, &r).sqrt() / b_norm;
        if res <= tol {
            return Ok((x, SolveStats { iterations: it, relative_residual: res }));
        }
        z = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..len {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = dot(&r, &r).sqrt() / b_norm;
    Err(Error::PoissonNonConvergence {
        iterations: max_iter,
        residual: res,
    })
}
