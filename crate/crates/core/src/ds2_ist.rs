//! Inverse-scattering pipeline for the focusing Davey-Stewartson II
//! equation.
//!
//! The pipeline has three stages:
//!
//! 1. [`forward_scattering`]: for every `k` on the frequency lattice of the
//!    grid, solve the lattice-shifted CGO equation for the potential `q` and
//!    extract the reflection coefficient `r(k)`.
//! 2. [`evolve_reflection`]: the reflection data evolves linearly in time by
//!    the unimodular phase `exp(+i t (k1^2 - k2^2) / 2)` (sign calibrated
//!    against the weak-potential limit, where the pipeline must reduce to the
//!    linearised equation).
//! 3. [`inverse_scattering`]: the inversion is another scattering transform,
//!    run on the dual grid with the conjugated reflection data; the
//!    potential at each physical node is read off from one CGO solve.
//!
//! All CGO solves use the half-exponent convention, so every lattice point is
//! admissible.  The sweeps are embarrassingly parallel and use the global
//! rayon pool.

use crate::cgo_solver::solve_iterated;
use crate::krylov::GmresConfig;
use crate::phi_regularizer::{build_wn_table, WnTable};
use crate::spectral_grid::{C64, CoreError, Fft2, SpectralGrid2D};
use ndarray::Array2;
use rayon::prelude::*;

/// Parameters shared by the forward and inverse sweeps.
#[derive(Debug, Clone)]
pub struct ScatteringConfig {
    /// Taylor/kernel order of the regularised divisions.
    pub m_order: usize,
    /// Crossover radius of the hybrid kernel evaluation.
    pub hybrid_radius: f64,
    /// GMRES parameters for each CGO solve.
    pub gmres: GmresConfig,
}

impl Default for ScatteringConfig {
    fn default() -> Self {
        ScatteringConfig { m_order: 11, hybrid_radius: 1.0, gmres: GmresConfig::default() }
    }
}

/// Reflection data `r(k)` on the frequency lattice of `grid`, at time `t`.
#[derive(Debug, Clone)]
pub struct ReflectionMap {
    pub grid: SpectralGrid2D,
    /// `r[[iky, ikx]]` is the coefficient at `k = (xi(ikx) + i xi(iky))`.
    pub r: Array2<C64>,
    pub t: f64,
    /// Worst relative GMRES residual over the sweep.
    pub max_residual: f64,
}

/// Compute the reflection coefficient of `q` at every lattice `k`.
///
/// For `k = (m1 + i m2)/l` the CGO shift is `s = i conj(k)`, i.e. lattice
/// steps `(m2, m1)`, and `r(k) = i * h` evaluated at the frequency node
/// `(xi1, xi2) = (m2, m1)/l`.
pub fn forward_scattering(
    fft: &Fft2,
    q: &Array2<C64>,
    table: &WnTable,
    cfg: &GmresConfig,
) -> ReflectionMap {
    let grid = fft.grid();
    let n = grid.n;
    let i0 = grid.i0() as i64;
    let rows: Vec<(Vec<C64>, f64)> = (0..n)
        .into_par_iter()
        .map(|iky| {
            let mut row = vec![C64::new(0.0, 0.0); n];
            let mut worst = 0.0f64;
            for ikx in 0..n {
                let m1 = ikx as i64 - i0;
                let m2 = iky as i64 - i0;
                let sol = solve_iterated(fft, q, (m2, m1), table, cfg);
                let jy = (i0 + m1).rem_euclid(n as i64) as usize;
                let jx = (i0 + m2).rem_euclid(n as i64) as usize;
                row[ikx] = C64::i() * sol.values[[jy, jx]];
                worst = worst.max(sol.report.residual);
            }
            (row, worst)
        })
        .collect();
    let mut r = Array2::zeros((n, n));
    let mut max_residual = 0.0f64;
    for (iky, (row, worst)) in rows.into_iter().enumerate() {
        for (ikx, v) in row.into_iter().enumerate() {
            r[[iky, ikx]] = v;
        }
        max_residual = max_residual.max(worst);
    }
    ReflectionMap { grid, r, t: 0.0, max_residual }
}

/// Advance the reflection data from its current time by `dt`:
/// `r(k) <- r(k) * exp(+i dt (k1^2 - k2^2)/2)`.
pub fn evolve_reflection(map: &ReflectionMap, dt: f64) -> ReflectionMap {
    let n = map.grid.n;
    let mut r = map.r.clone();
    for iky in 0..n {
        let k2 = map.grid.xi(iky);
        for ikx in 0..n {
            let k1 = map.grid.xi(ikx);
            r[[iky, ikx]] *= (C64::i() * (0.5 * dt * (k1 * k1 - k2 * k2))).exp();
        }
    }
    ReflectionMap { grid: map.grid, r, t: map.t + dt, max_residual: map.max_residual }
}

/// The dual objects used by the inversion: the dual grid, its FFT plan and
/// kernel table, and the conjugated reflection data re-wrapped onto it.
struct InverseSetup {
    fft_d: Fft2,
    table_d: WnTable,
    p: Array2<C64>,
}

fn inverse_setup(map: &ReflectionMap, cfg: &ScatteringConfig) -> Result<InverseSetup, CoreError> {
    let gd = map.grid.dual();
    let n = gd.n;
    let fft_d = Fft2::new(gd);
    let table_d = build_wn_table(gd, cfg.m_order, cfg.hybrid_radius)?;
    // The monotone frequency lattice of the physical grid, reinterpreted as
    // physical nodes of the dual grid, is offset by one index.
    let mut p = Array2::zeros((n, n));
    for jy in 0..n {
        let sy = (jy + n - 1) % n;
        for jx in 0..n {
            let sx = (jx + n - 1) % n;
            p[[jy, jx]] = map.r[[sy, sx]].conj();
        }
    }
    Ok(InverseSetup { fft_d, table_d, p })
}

fn invert_at(setup: &InverseSetup, n: usize, jy: usize, jx: usize, cfg: &GmresConfig) -> C64 {
    let i0 = n as i64 / 2 - 1;
    let mx = jx as i64 - n as i64 / 2;
    let my = jy as i64 - n as i64 / 2;
    let sol = solve_iterated(&setup.fft_d, &setup.p, (my, mx), &setup.table_d, cfg);
    let ry = (i0 + mx).rem_euclid(n as i64) as usize;
    let rx = (i0 + my).rem_euclid(n as i64) as usize;
    (C64::i() * sol.values[[ry, rx]]).conj()
}

/// Reconstruct the potential at selected physical nodes `(jy, jx)`.
pub fn inverse_scattering_at(
    map: &ReflectionMap,
    points: &[(usize, usize)],
    cfg: &ScatteringConfig,
) -> Result<Vec<C64>, CoreError> {
    let setup = inverse_setup(map, cfg)?;
    let n = map.grid.n;
    Ok(points
        .par_iter()
        .map(|&(jy, jx)| invert_at(&setup, n, jy, jx, &cfg.gmres))
        .collect())
}

/// Reconstruct the potential on the full physical grid.
pub fn inverse_scattering(
    map: &ReflectionMap,
    cfg: &ScatteringConfig,
) -> Result<Array2<C64>, CoreError> {
    let setup = inverse_setup(map, cfg)?;
    let n = map.grid.n;
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|jy| (0..n).map(|jx| invert_at(&setup, n, jy, jx, &cfg.gmres)).collect())
        .collect();
    let mut q = Array2::zeros((n, n));
    for (jy, row) in rows.into_iter().enumerate() {
        for (jx, v) in row.into_iter().enumerate() {
            q[[jy, jx]] = v;
        }
    }
    Ok(q)
}

/// Fourier multiplier of the auxiliary potential:
/// `phi_hat = -2 xi1^2 / |xi|^2 * F(|q|^2)`, zero mean.
fn phi_hat_mult(grid: &SpectralGrid2D, iy: usize, ix: usize) -> f64 {
    let x1 = grid.xi(ix);
    let x2 = grid.xi(iy);
    let den = x1 * x1 + x2 * x2;
    if den > 0.0 {
        -2.0 * x1 * x1 / den
    } else {
        0.0
    }
}

/// The auxiliary (mean-field) potential `phi` of DS II, which solves
/// `(phi_xx + phi_yy) = -2 (|q|^2)_xx` with zero mean.  Real-valued.
pub fn compute_phi(fft: &Fft2, q: &Array2<C64>) -> Array2<f64> {
    let grid = fft.grid();
    let n = grid.n;
    let mut absq = Array2::zeros((n, n));
    for (a, b) in absq.iter_mut().zip(q.iter()) {
        *a = C64::new(b.norm_sqr(), 0.0);
    }
    let mut fh = fft.forward(&absq);
    for iy in 0..n {
        for ix in 0..n {
            fh[[iy, ix]] *= phi_hat_mult(&grid, iy, ix);
        }
    }
    let phi_c = fft.inverse(&fh);
    phi_c.mapv(|v| v.re)
}

/// Conserved energy of DS II:
/// `E = integral |q_x|^2 - |q_y|^2 + |q|^4 - (phi^2 + (dx^{-1} dy phi)^2)/2`.
pub fn energy(fft: &Fft2, q: &Array2<C64>) -> f64 {
    let grid = fft.grid();
    let n = grid.n;
    let qh = fft.forward(q);
    let mut qxh = qh.clone();
    let mut qyh = qh;
    for iy in 0..n {
        let x2 = grid.xi(iy);
        for ix in 0..n {
            let x1 = grid.xi(ix);
            qxh[[iy, ix]] *= C64::i() * x1;
            qyh[[iy, ix]] *= C64::i() * x2;
        }
    }
    let qx = fft.inverse(&qxh);
    let qy = fft.inverse(&qyh);
    let phi = compute_phi(fft, q);
    // dx^{-1} dy phi via the multiplier xi2/xi1, zero on the xi1 = 0 line.
    let phi_c = phi.mapv(|v| C64::new(v, 0.0));
    let mut ph = fft.forward(&phi_c);
    for iy in 0..n {
        let x2 = grid.xi(iy);
        for ix in 0..n {
            let x1 = grid.xi(ix);
            ph[[iy, ix]] *= if x1.abs() > 0.0 { x2 / x1 } else { 0.0 };
        }
    }
    let pxy = fft.inverse(&ph);
    let mut total = 0.0;
    for iy in 0..n {
        for ix in 0..n {
            let aq = q[[iy, ix]].norm_sqr();
            let p = phi[[iy, ix]];
            let pxyv = pxy[[iy, ix]].re;
            total += qx[[iy, ix]].norm_sqr() - qy[[iy, ix]].norm_sqr() + aq * aq
                - 0.5 * (p * p + pxyv * pxyv);
        }
    }
    grid.h() * grid.h() * total
}
