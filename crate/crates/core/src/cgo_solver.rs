//! Complex geometric optics (CGO) solvers.
//!
//! For a potential `q` and a spectral parameter `k`, the CGO function
//! `mu(z, k)` solves a d-bar problem whose integral form becomes, in Fourier
//! variables, a compact R-linear fixed-point equation.  Two formulations are
//! provided:
//!
//! * [`solve_direct`]: the equation for `S = F(q_k * conj(mu))` with the
//!   oscillatory factor kept in physical space.  Simple, but the exponential
//!   `exp(conj(k) conj(z) - k z)` must be resolved by the grid, which fails
//!   for large `|k|`.
//! * [`solve_iterated`]: an equivalent equation for a field `h` in which the
//!   oscillation appears only as an exact lattice shift of the frequency
//!   variable, so accuracy is uniform in `k` as long as `k` lies on the
//!   frequency lattice.  This is the form used by the scattering transform.
//!
//! Both are solved with the real GMRES from [`crate::krylov`]; complex fields
//! are flattened to real vectors because conjugation makes the operators only
//! R-linear.

use crate::krylov::{gmres_solve, GmresConfig, GmresReport};
use crate::phi_regularizer::{finv_over_xi, WnTable};
use crate::spectral_grid::{lattice_steps, C64, CoreError, Fft2, SpectralGrid2D};
use ndarray::Array2;

/// Which exponential weight multiplies the potential.
///
/// `Full` uses `exp(conj(k) conj(z) - k z)` (lattice shift `2 i conj(k)`),
/// `Half` uses its square root (lattice shift `i conj(k)`).  The scattering
/// pipeline uses `Half`, so that every lattice point of the grid is an
/// admissible `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentConvention {
    Full,
    Half,
}

/// Lattice steps `(s1, s2)` of the frequency shift associated with `k` under
/// the given convention.  Errors if the shift is off the lattice.
pub fn shift_steps_for_k(
    grid: &SpectralGrid2D,
    k: C64,
    conv: ExponentConvention,
) -> Result<(i64, i64), CoreError> {
    // Full: s = 2 i conj(k) = 2 k2 + 2 i k1;  Half: s = i conj(k).
    let f = match conv {
        ExponentConvention::Full => 2.0,
        ExponentConvention::Half => 1.0,
    };
    lattice_steps(grid, (f * k.im, f * k.re))
}

/// Result of a CGO solve: a Fourier-space field plus the GMRES report.
#[derive(Debug, Clone)]
pub struct CgoSolution {
    pub values: Array2<C64>,
    pub report: GmresReport,
}

fn c2r(v: &Array2<C64>) -> Vec<f64> {
    let n = v.len();
    let mut out = Vec::with_capacity(2 * n);
    out.extend(v.iter().map(|z| z.re));
    out.extend(v.iter().map(|z| z.im));
    out
}

fn r2c(v: &[f64], n: usize) -> Array2<C64> {
    let half = v.len() / 2;
    Array2::from_shape_fn((n, n), |(iy, ix)| {
        let idx = iy * n + ix;
        C64::new(v[idx], v[half + idx])
    })
}

/// Run real GMRES on a complex R-linear operator.
pub(crate) fn gmres_complex<F>(
    apply: F,
    b: &Array2<C64>,
    cfg: &GmresConfig,
) -> (Array2<C64>, GmresReport)
where
    F: Fn(&Array2<C64>) -> Array2<C64>,
{
    let n = b.nrows();
    let (x, report) = gmres_solve(|v| c2r(&apply(&r2c(v, n))), &c2r(b), cfg);
    (r2c(&x, n), report)
}

fn mul_conj_forward(fft: &Fft2, q: &Array2<C64>, w: &Array2<C64>) -> Array2<C64> {
    let n = q.nrows();
    let mut prod = Array2::zeros((n, n));
    for iy in 0..n {
        for ix in 0..n {
            prod[[iy, ix]] = q[[iy, ix]] * w[[iy, ix]].conj();
        }
    }
    let mut out = fft.forward(&prod);
    out.mapv_inplace(|v| -C64::i() * v);
    out
}

/// The unshifted CGO operator `K0(u) = -i F( q * conj( Finv(u / xi) ) )` for
/// a Fourier-space field `u`.
pub fn apply_k0(fft: &Fft2, q: &Array2<C64>, u: &Array2<C64>, table: &WnTable) -> Array2<C64> {
    let inner = finv_over_xi(fft, u, table, (0, 0));
    mul_conj_forward(fft, q, &inner)
}

/// Direct formulation: solve `S + i F( q_k * conj(Finv(S / xi)) ) = -i F(q_k)`
/// with `q_k = q * exp(e)` and `e` the (full or half) oscillatory exponent.
pub fn solve_direct(
    fft: &Fft2,
    q: &Array2<C64>,
    k: C64,
    conv: ExponentConvention,
    table: &WnTable,
    cfg: &GmresConfig,
) -> CgoSolution {
    let grid = fft.grid();
    let n = grid.n;
    let mut qk = Array2::zeros((n, n));
    let scale = match conv {
        ExponentConvention::Full => 1.0,
        ExponentConvention::Half => 0.5,
    };
    for iy in 0..n {
        for ix in 0..n {
            let z = grid.z(iy, ix);
            let ex = (k.conj() * z.conj() - k * z) * scale;
            qk[[iy, ix]] = q[[iy, ix]] * ex.exp();
        }
    }
    let mut b = fft.forward(&qk);
    b.mapv_inplace(|v| -C64::i() * v);
    let apply = |s: &Array2<C64>| {
        let ks = apply_k0(fft, &qk, s, table);
        // S - K0(S) with the sign folded in: K0 already carries -i.
        let mut out = s.clone();
        for (o, k_) in out.iter_mut().zip(ks.iter()) {
            *o -= k_;
        }
        out
    };
    let (values, report) = gmres_complex(apply, &b, cfg);
    CgoSolution { values, report }
}

/// Lattice-shift formulation: solve for `h` in
///
/// ```text
/// h - K0( H(h) ) = -i F(q),
/// H(h) = -i F( q * conj( Finv( h / (xi - s) ) ) ),
/// ```
///
/// where `s` is the lattice shift of `k` (see [`shift_steps_for_k`]) and the
/// shifted division is regularised about its pole.  The full solution field
/// is `S = H(h) + shift(h)`, but the scattering data only needs `h` itself.
pub fn solve_iterated(
    fft: &Fft2,
    q: &Array2<C64>,
    s_steps: (i64, i64),
    table: &WnTable,
    cfg: &GmresConfig,
) -> CgoSolution {
    let mut b = fft.forward(q);
    b.mapv_inplace(|v| -C64::i() * v);
    let apply = |h: &Array2<C64>| {
        let inner = finv_shifted_denom(fft, h, s_steps, table);
        let hh = mul_conj_forward(fft, q, &inner);
        let k0h = apply_k0(fft, q, &hh, table);
        let mut out = h.clone();
        for (o, k_) in out.iter_mut().zip(k0h.iter()) {
            *o -= k_;
        }
        out
    };
    let (values, report) = gmres_complex(apply, &b, cfg);
    CgoSolution { values, report }
}

/// Regularised `Finv( h(xi) / (xi - s) )` for a lattice frequency `s`.
///
/// Implemented as `exp(i s . x) * [ exp(i p . x) Finv( h / (xi + p) ) ]` with
/// `p = -s`; the inner bracket is exactly [`finv_over_xi`], whose Taylor data
/// is taken about the pole `s`.
pub fn finv_shifted_denom(
    fft: &Fft2,
    h: &Array2<C64>,
    s_steps: (i64, i64),
    table: &WnTable,
) -> Array2<C64> {
    let grid = fft.grid();
    let n = grid.n;
    let mut out = finv_over_xi(fft, h, table, (-s_steps.0, -s_steps.1));
    let s1 = s_steps.0 as f64 / grid.l;
    let s2 = s_steps.1 as f64 / grid.l;
    let ex: Vec<C64> = (0..n).map(|j| (C64::i() * (s1 * grid.x(j))).exp()).collect();
    let ey: Vec<C64> = (0..n).map(|j| (C64::i() * (s2 * grid.x(j))).exp()).collect();
    for iy in 0..n {
        for ix in 0..n {
            out[[iy, ix]] *= ey[iy] * ex[ix];
        }
    }
    out
}

/// First two terms of the Neumann (Born) series for the direct formulation:
/// `S0 = -i F(q_k)` and `S1 = -K(S0)`, the first correction.  For a weak
/// potential, `S0` is a single peak at the shifted frequency while `S1` is
/// peaked at the origin; their sizes are `O(eps)` and `O(eps^2)`.
pub fn born_terms(
    fft: &Fft2,
    q: &Array2<C64>,
    k: C64,
    conv: ExponentConvention,
    table: &WnTable,
) -> (Array2<C64>, Array2<C64>) {
    let grid = fft.grid();
    let n = grid.n;
    let mut qk = Array2::zeros((n, n));
    let scale = match conv {
        ExponentConvention::Full => 1.0,
        ExponentConvention::Half => 0.5,
    };
    for iy in 0..n {
        for ix in 0..n {
            let z = grid.z(iy, ix);
            let ex = (k.conj() * z.conj() - k * z) * scale;
            qk[[iy, ix]] = q[[iy, ix]] * ex.exp();
        }
    }
    let mut s0 = fft.forward(&qk);
    s0.mapv_inplace(|v| -C64::i() * v);
    // The fixed point is S = b - K(S) with K(S) = +i F(q_k conj(Finv(S/xi))),
    // so the first correction is -K(S0) = -i F(q_k conj(Finv(S0/xi))).
    let s1 = apply_k0(fft, &qk, &s0, table);
    (s0, s1)
}
