//! Periodic grids, space-tagged fields, and the convention-fixed 2-D FFT.
//!
//! The computational domain is the square `[-pi*l, pi*l)^2` sampled at `n`
//! equispaced nodes per direction, `x_j = l * (-pi + 2*pi*j/n)`.  The dual
//! grid carries the frequencies `xi_m = m / l` for
//! `m in {-n/2+1, ..., n/2}`, stored monotonically so that `xi = 0` sits at
//! index `i0 = n/2 - 1`.  Arrays are indexed `[iy, ix]` with `ix` (the first
//! coordinate) varying fastest.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Errors shared by the core numerical routines.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("field is in {found:?} space but {expected:?} space is required")]
    WrongSpace { expected: Space, found: Space },
    #[error("grid mismatch: ({n_a}, l={l_a}) vs ({n_b}, l={l_b})")]
    GridMismatch { n_a: usize, l_a: f64, n_b: usize, l_b: f64 },
    #[error("shift ({p1}, {p2}) is not on the frequency lattice of the grid")]
    OffLattice { p1: f64, p2: f64 },
    #[error("kernel order {m} exceeds the supported maximum {max}")]
    OrderTooLarge { m: usize, max: usize },
    #[error("grid size {n} must be even and at least 4")]
    BadGridSize { n: usize },
    #[error("solution became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("iteration failed to converge: residual {residual} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed field file: {0}")]
    Format(String),
}

/// Which representation a [`Field2D`] currently holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// Samples `f(x_j, y_j)` on the physical grid.
    Physical,
    /// Fourier coefficients on the monotone frequency lattice.
    Fourier,
}

/// An `n x n` periodic grid of half-period `pi * l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid2D {
    pub n: usize,
    pub l: f64,
}

impl SpectralGrid2D {
    pub fn new(n: usize, l: f64) -> Result<Self, CoreError> {
        if n < 4 || n % 2 != 0 {
            return Err(CoreError::BadGridSize { n });
        }
        Ok(SpectralGrid2D { n, l })
    }

    /// Index of the zero frequency on the monotone lattice.
    #[inline]
    pub fn i0(&self) -> usize {
        self.n / 2 - 1
    }

    /// Physical mesh width `2*pi*l/n`.
    #[inline]
    pub fn h(&self) -> f64 {
        2.0 * PI * self.l / self.n as f64
    }

    /// Physical coordinate of node `j`.
    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.l * (-PI + 2.0 * PI * j as f64 / self.n as f64)
    }

    /// Frequency at monotone index `i`, i.e. `(i - i0) / l`.
    #[inline]
    pub fn xi(&self, i: usize) -> f64 {
        (i as i64 - self.i0() as i64) as f64 / self.l
    }

    /// Complex physical coordinate `z = x + i y` at `[iy, ix]`.
    #[inline]
    pub fn z(&self, iy: usize, ix: usize) -> C64 {
        C64::new(self.x(ix), self.x(iy))
    }

    /// Complex frequency `xi1 + i xi2` at `[iy, ix]`.
    #[inline]
    pub fn xic(&self, iy: usize, ix: usize) -> C64 {
        C64::new(self.xi(ix), self.xi(iy))
    }

    /// The grid on which the Fourier coefficients of `self` live when they
    /// are reinterpreted as physical samples: same `n`, scale `n/(2*pi*l)`.
    pub fn dual(&self) -> SpectralGrid2D {
        SpectralGrid2D { n: self.n, l: self.n as f64 / (2.0 * PI * self.l) }
    }

    pub fn same_as(&self, other: &SpectralGrid2D) -> bool {
        self.n == other.n && (self.l - other.l).abs() <= 1e-12 * self.l.abs().max(1.0)
    }

    fn check_same(&self, other: &SpectralGrid2D) -> Result<(), CoreError> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(CoreError::GridMismatch { n_a: self.n, l_a: self.l, n_b: other.n, l_b: other.l })
        }
    }

    /// `h^2 * sum |f|^2`, the discrete physical-space L2 norm squared.
    pub fn l2_norm_sq(&self, f: &Array2<C64>) -> f64 {
        self.h() * self.h() * f.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self, f: &Array2<C64>) -> f64 {
        self.l2_norm_sq(f).sqrt()
    }
}

/// Maximum absolute difference between two arrays of equal shape.
pub fn linf_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Maximum absolute value of an array.
pub fn linf_norm(a: &Array2<C64>) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// A complex field together with its grid and representation tag.
#[derive(Debug, Clone)]
pub struct Field2D {
    grid: SpectralGrid2D,
    space: Space,
    pub values: Array2<C64>,
}

impl Field2D {
    pub fn new(grid: SpectralGrid2D, space: Space, values: Array2<C64>) -> Result<Self, CoreError> {
        if values.nrows() != grid.n || values.ncols() != grid.n {
            return Err(CoreError::GridMismatch {
                n_a: grid.n,
                l_a: grid.l,
                n_b: values.nrows(),
                l_b: grid.l,
            });
        }
        Ok(Field2D { grid, space, values })
    }

    pub fn zeros(grid: SpectralGrid2D, space: Space) -> Self {
        Field2D { grid, space, values: Array2::zeros((grid.n, grid.n)) }
    }

    /// Sample a function of the complex coordinate on the physical grid.
    pub fn from_fn(grid: SpectralGrid2D, f: impl Fn(C64) -> C64) -> Self {
        let n = grid.n;
        let mut values = Array2::zeros((n, n));
        for iy in 0..n {
            for ix in 0..n {
                values[[iy, ix]] = f(grid.z(iy, ix));
            }
        }
        Field2D { grid, space: Space::Physical, values }
    }

    pub fn grid(&self) -> SpectralGrid2D {
        self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn expect_space(&self, expected: Space) -> Result<(), CoreError> {
        if self.space == expected {
            Ok(())
        } else {
            Err(CoreError::WrongSpace { expected, found: self.space })
        }
    }
}

/// Cyclic shift of Fourier data by an integer number of lattice steps:
/// returns `G` with `G[iy, ix] = F[(iy + s2) mod n, (ix + s1) mod n]`,
/// i.e. the samples of `F(xi + p)` for `p = (s1 + i*s2)/l`.
pub fn shift_steps(f: &Array2<C64>, steps: (i64, i64)) -> Array2<C64> {
    let n = f.nrows() as i64;
    let (s1, s2) = steps;
    let mut out = Array2::zeros(f.raw_dim());
    for iy in 0..n {
        let jy = (iy + s2).rem_euclid(n) as usize;
        for ix in 0..n {
            let jx = (ix + s1).rem_euclid(n) as usize;
            out[[iy as usize, ix as usize]] = f[[jy, jx]];
        }
    }
    out
}

/// Shift a Fourier-space field by a frequency `p = (p1, p2)`.
///
/// `p` must lie on the frequency lattice of the grid (`p * l` integral);
/// off-lattice shifts are rejected rather than silently rounded.
pub fn circular_shift(f: &Field2D, p: (f64, f64)) -> Result<Field2D, CoreError> {
    f.expect_space(Space::Fourier)?;
    let g = f.grid();
    let steps = lattice_steps(&g, p)?;
    Field2D::new(g, Space::Fourier, shift_steps(&f.values, steps))
}

/// Convert a continuous frequency shift to integer lattice steps, rejecting
/// anything farther than `1e-9` from the lattice.
pub fn lattice_steps(grid: &SpectralGrid2D, p: (f64, f64)) -> Result<(i64, i64), CoreError> {
    let to_step = |v: f64| -> Option<i64> {
        let s = v * grid.l;
        let r = s.round();
        if (s - r).abs() <= 1e-9 {
            Some(r as i64)
        } else {
            None
        }
    };
    match (to_step(p.0), to_step(p.1)) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(CoreError::OffLattice { p1: p.0, p2: p.1 }),
    }
}

/// Planned 2-D FFT on a fixed grid, normalised to approximate the continuous
/// Fourier transform with a single `1/(2*pi)` prefactor.
pub struct Fft2 {
    grid: SpectralGrid2D,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(grid: SpectralGrid2D) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n);
        let inv = planner.plan_fft_inverse(grid.n);
        Fft2 { grid, fwd, inv }
    }

    pub fn grid(&self) -> SpectralGrid2D {
        self.grid
    }

    /// Unnormalised 2-D DFT (or inverse DFT) in place, rows then columns.
    fn raw2d(&self, data: &mut Array2<C64>, inverse: bool) {
        let n = self.grid.n;
        let plan = if inverse { &self.inv } else { &self.fwd };
        let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // Rows are contiguous in memory.
        {
            let slice = data.as_slice_mut().expect("field storage must be contiguous");
            for row in slice.chunks_exact_mut(n) {
                plan.process_with_scratch(row, &mut scratch);
            }
        }
        let mut col = vec![C64::new(0.0, 0.0); n];
        for ix in 0..n {
            for iy in 0..n {
                col[iy] = data[[iy, ix]];
            }
            plan.process_with_scratch(&mut col, &mut scratch);
            for iy in 0..n {
                data[[iy, ix]] = col[iy];
            }
        }
    }

    /// Forward transform: physical samples to Fourier coefficients on the
    /// monotone frequency lattice.
    pub fn forward(&self, f: &Array2<C64>) -> Array2<C64> {
        let n = self.grid.n;
        let i0 = self.grid.i0();
        let mut buf = f.clone();
        self.raw2d(&mut buf, false);
        let pref = self.grid.h() * self.grid.h() / (2.0 * PI);
        let mut out = Array2::zeros((n, n));
        for iy in 0..n {
            let sy = if (iy + i0) % 2 == 0 { 1.0 } else { -1.0 };
            let jy = (iy + n - i0) % n;
            for ix in 0..n {
                let sx = if (ix + i0) % 2 == 0 { 1.0 } else { -1.0 };
                let jx = (ix + n - i0) % n;
                out[[iy, ix]] = buf[[jy, jx]] * (pref * sy * sx);
            }
        }
        out
    }

    /// Inverse transform, the exact inverse of [`Fft2::forward`].
    pub fn inverse(&self, fh: &Array2<C64>) -> Array2<C64> {
        let n = self.grid.n;
        let i0 = self.grid.i0();
        let mut buf = Array2::zeros((n, n));
        for iy in 0..n {
            let jy = (iy + i0) % n;
            let sy = if (jy + i0) % 2 == 0 { 1.0 } else { -1.0 };
            for ix in 0..n {
                let jx = (ix + i0) % n;
                let sx = if (jx + i0) % 2 == 0 { 1.0 } else { -1.0 };
                buf[[iy, ix]] = fh[[jy, jx]] * (sy * sx);
            }
        }
        self.raw2d(&mut buf, true);
        let scale = 1.0 / (2.0 * PI * self.grid.l * self.grid.l);
        buf.mapv_inplace(|v| v * scale);
        buf
    }

    /// Tag-checked forward transform on a [`Field2D`].
    pub fn forward_field(&self, f: &Field2D) -> Result<Field2D, CoreError> {
        f.expect_space(Space::Physical)?;
        self.grid.check_same(&f.grid())?;
        Field2D::new(self.grid, Space::Fourier, self.forward(&f.values))
    }

    /// Tag-checked inverse transform on a [`Field2D`].
    pub fn inverse_field(&self, f: &Field2D) -> Result<Field2D, CoreError> {
        f.expect_space(Space::Fourier)?;
        self.grid.check_same(&f.grid())?;
        Field2D::new(self.grid, Space::Physical, self.inverse(&f.values))
    }
}
