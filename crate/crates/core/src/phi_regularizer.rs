//! Regularised division by the Fourier symbol `xi = xi1 + i*xi2`.
//!
//! The inverse d-bar operator is, in Fourier variables, division by
//! `(i/2) * xi`, which has a non-smooth `1/xi` singularity at the origin that
//! destroys spectral accuracy if applied naively.  The cure used here splits
//! the quotient into a smooth part, handled by the FFT, and a finite sum of
//! explicitly known kernels:
//!
//! ```text
//! S(xi)/xi = (S(xi) - G(xi))/xi  +  G(xi)/xi,
//! G(xi)    = exp(-|xi|^2) * sum_{k=0}^{M} c_k * conj(xi)^k,
//! ```
//!
//! where `c_k` are the Taylor coefficients of `S` at the origin (computed by
//! quadrature in physical space).  The first quotient is smooth once its
//! removable singularity is filled with the analytic limit, and the inverse
//! transform of each `conj(xi)^k * exp(-|xi|^2) / xi` is the closed-form
//! kernel `W_k` tabulated by [`build_wn_table`].
//!
//! The shifted variant divides by `xi + p` for a lattice frequency `p`; the
//! Taylor data is then taken about the pole `-p`, which in physical space
//! amounts to modulating the transform by `exp(i p . x)` before the
//! quadrature.

use crate::spectral_grid::{shift_steps, C64, CoreError, Fft2, SpectralGrid2D};
use ndarray::Array2;

/// Largest supported kernel order.
pub const MAX_KERNEL_ORDER: usize = 20;

/// Cap on the number of series terms for the small-`z` branch of `W_n`.
const SERIES_MAX_TERMS: usize = 60;
/// Relative truncation threshold for the series branch.
const SERIES_REL_TOL: f64 = 1e-17;

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Pointwise evaluation of the kernel
/// `W_n(z) = Finv( conj(xi)^n * exp(-|xi|^2) / xi )(z)`.
///
/// Uses the closed form for `|z| >= hybrid_radius` and a convergent power
/// series (truncated adaptively) below it; the two branches agree on the
/// crossover circle.  `W_n(0) = 0` exactly.
pub fn wn_value(order: usize, z: C64, hybrid_radius: f64) -> C64 {
    let n = order;
    let fact = factorial(n);
    let pre = C64::i() * C64::new(0.0, 2.0).powu(n as u32) * fact;
    let a = 0.25 * z.norm_sqr();
    if z.norm() >= hybrid_radius {
        // i (2i)^n n! / z^{n+1} * (1 - exp(-a) * sum_{k=0}^{n} a^k / k!)
        let mut ssum = 0.0;
        let mut term = 1.0;
        for k in 0..=n {
            if k > 0 {
                term *= a / k as f64;
            }
            ssum += term;
        }
        pre / z.powu(n as u32 + 1) * (1.0 - (-a).exp() * ssum)
    } else {
        // i (2i)^n n! (conj(z)/4)^{n+1} exp(-a) * sum_k a^k / (k+n+1)!
        let mut t = pre * (z.conj() / 4.0).powu(n as u32 + 1) / factorial(n + 1);
        let mut tot = t;
        for k in 1..SERIES_MAX_TERMS {
            t = t * a / (k + n + 1) as f64;
            tot += t;
            if t.norm() <= SERIES_REL_TOL * (tot.norm() + 1e-300) {
                break;
            }
        }
        tot * (-a).exp()
    }
}

/// The d-bar derivative of `W_n`, available in closed form:
/// `dbar W_n(z) = (i/4) * (i conj(z)/2)^n * exp(-|z|^2/4)`.
pub fn dbar_wn_value(order: usize, z: C64) -> C64 {
    C64::new(0.0, 0.25)
        * (C64::i() * z.conj() / 2.0).powu(order as u32)
        * (-0.25 * z.norm_sqr()).exp()
}

/// Sampled kernels `W_0, ..., W_M` on a fixed grid.
pub struct WnTable {
    grid: SpectralGrid2D,
    m_order: usize,
    hybrid_radius: f64,
    kernels: Vec<Array2<C64>>,
}

impl WnTable {
    pub fn grid(&self) -> SpectralGrid2D {
        self.grid
    }

    pub fn m_order(&self) -> usize {
        self.m_order
    }

    pub fn hybrid_radius(&self) -> f64 {
        self.hybrid_radius
    }

    pub fn kernel(&self, order: usize) -> &Array2<C64> {
        &self.kernels[order]
    }
}

/// Tabulate the kernels `W_0, ..., W_m` on `grid`, with the closed-form /
/// series crossover at `hybrid_radius` (1.0 is a good default).
pub fn build_wn_table(
    grid: SpectralGrid2D,
    m: usize,
    hybrid_radius: f64,
) -> Result<WnTable, CoreError> {
    if m > MAX_KERNEL_ORDER {
        return Err(CoreError::OrderTooLarge { m, max: MAX_KERNEL_ORDER });
    }
    let n = grid.n;
    let mut kernels = Vec::with_capacity(m + 1);
    for order in 0..=m {
        let mut w = Array2::zeros((n, n));
        for iy in 0..n {
            for ix in 0..n {
                w[[iy, ix]] = wn_value(order, grid.z(iy, ix), hybrid_radius);
            }
        }
        kernels.push(w);
    }
    Ok(WnTable { grid, m_order: m, hybrid_radius, kernels })
}

/// Taylor data of a Fourier-space field `S` at a point, computed by physical
/// quadrature of `w = Finv(S)` (modulated to the point of expansion by the
/// caller).  `c[k]` includes the `1/k!` factor; `a10` is the mixed first
/// derivative `d/d(conj(xi)) S`, i.e. the analytic limit of
/// `(S - G)/xi` at the expansion point.
#[derive(Debug, Clone)]
pub struct TaylorCoeffs {
    pub c: Vec<C64>,
    pub a10: C64,
}

/// `c_k = (-i/2)^k (h^2/(2 pi)) sum z^k w / k!` and
/// `a10 = (-i/2) (h^2/(2 pi)) sum conj(z) w`.
pub fn taylor_coeffs(grid: &SpectralGrid2D, w: &Array2<C64>, m: usize) -> TaylorCoeffs {
    let n = grid.n;
    let pref = grid.h() * grid.h() / (2.0 * std::f64::consts::PI);
    let mut zp: Array2<C64> = Array2::from_elem((n, n), C64::new(1.0, 0.0));
    let mut c = Vec::with_capacity(m + 1);
    let mut fact = 1.0;
    let mhalf_i = C64::new(0.0, -0.5);
    for k in 0..=m {
        if k > 0 {
            for iy in 0..n {
                for ix in 0..n {
                    zp[[iy, ix]] *= grid.z(iy, ix);
                }
            }
            fact *= k as f64;
        }
        let s: C64 = zp.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
        c.push(mhalf_i.powu(k as u32) * pref * s / fact);
    }
    let mut s10 = C64::new(0.0, 0.0);
    for iy in 0..n {
        for ix in 0..n {
            s10 += grid.z(iy, ix).conj() * w[[iy, ix]];
        }
    }
    TaylorCoeffs { c, a10: mhalf_i * pref * s10 }
}

/// Modulation `exp(i (p1 x + p2 y))` applied in place, with
/// `p = (s1 + i s2)/l` given in lattice steps.
fn modulate(grid: &SpectralGrid2D, f: &mut Array2<C64>, steps: (i64, i64), sign: f64) {
    let n = grid.n;
    let p1 = steps.0 as f64 / grid.l;
    let p2 = steps.1 as f64 / grid.l;
    let ex: Vec<C64> = (0..n).map(|j| (C64::i() * (sign * p1 * grid.x(j))).exp()).collect();
    let ey: Vec<C64> = (0..n).map(|j| (C64::i() * (sign * p2 * grid.x(j))).exp()).collect();
    for iy in 0..n {
        for ix in 0..n {
            f[[iy, ix]] *= ey[iy] * ex[ix];
        }
    }
}

/// Regularised `exp(i p . x) * Finv( N(xi) / (xi + p) )` for a Fourier-space
/// field `N` and a lattice frequency `p` given in integer steps `(s1, s2)`.
///
/// This is the workhorse shared by the plain and shifted inverse d-bar
/// operators and by the CGO integral equations.  The Taylor data of `N` is
/// taken about the pole `-p`: in physical space this is the quadrature of
/// `exp(i p . x) * Finv(N)`.
pub fn finv_over_xi(
    fft: &Fft2,
    n_hat: &Array2<C64>,
    table: &WnTable,
    p_steps: (i64, i64),
) -> Array2<C64> {
    let grid = fft.grid();
    let n = grid.n;
    let i0 = grid.i0() as i64;
    let m = table.m_order();
    let pc = C64::new(p_steps.0 as f64 / grid.l, p_steps.1 as f64 / grid.l);

    let mut w = fft.inverse(n_hat);
    if p_steps != (0, 0) {
        modulate(&grid, &mut w, p_steps, 1.0);
    }
    let tc = taylor_coeffs(&grid, &w, m);

    // Node carrying the removable singularity: the lattice index of -p.
    let si1 = (i0 - p_steps.0).rem_euclid(n as i64) as usize;
    let si2 = (i0 - p_steps.1).rem_euclid(n as i64) as usize;

    let mut t: Array2<C64> = Array2::zeros((n, n));
    for iy in 0..n {
        for ix in 0..n {
            let xpc = grid.xic(iy, ix) + pc;
            if iy == si2 && ix == si1 {
                t[[iy, ix]] = tc.a10;
                continue;
            }
            // Horner evaluation of G = exp(-|xi+p|^2) sum c_k conj(xi+p)^k.
            let u = xpc.conj();
            let mut acc = tc.c[m];
            for k in (0..m).rev() {
                acc = acc * u + tc.c[k];
            }
            let g = (-xpc.norm_sqr()).exp() * acc;
            t[[iy, ix]] = (n_hat[[iy, ix]] - g) / xpc;
        }
    }

    let mut out = fft.inverse(&t);
    if p_steps != (0, 0) {
        modulate(&grid, &mut out, p_steps, 1.0);
    }
    for k in 0..=m {
        let ck = tc.c[k];
        let wk = table.kernel(k);
        for iy in 0..n {
            for ix in 0..n {
                out[[iy, ix]] += ck * wk[[iy, ix]];
            }
        }
    }
    out
}

/// Solve `dbar u = g` for a smooth, decaying `g` sampled on the grid:
/// `u = -2i * Finv( F(g) / xi )`, regularised.
pub fn dbar_inverse(fft: &Fft2, g_phys: &Array2<C64>, table: &WnTable) -> Array2<C64> {
    let gh = fft.forward(g_phys);
    let mut out = finv_over_xi(fft, &gh, table, (0, 0));
    out.mapv_inplace(|v| C64::new(0.0, -2.0) * v);
    out
}

/// Shifted variant of [`dbar_inverse`] for data whose Fourier transform is
/// concentrated near the lattice frequency `-p` (steps `(s1, s2)`), e.g. a
/// bump modulated by a unimodular exponential.  Recentring the transform
/// before the regularised division restores spectral accuracy that the
/// unshifted operator loses once the modulation is unresolved by the Taylor
/// polynomial at the origin.
pub fn dbar_inverse_shifted(
    fft: &Fft2,
    g_phys: &Array2<C64>,
    table: &WnTable,
    p_steps: (i64, i64),
) -> Array2<C64> {
    let gh = fft.forward(g_phys);
    let shifted = shift_steps(&gh, p_steps);
    let mut out = finv_over_xi(fft, &shifted, table, p_steps);
    out.mapv_inplace(|v| C64::new(0.0, -2.0) * v);
    out
}
