//! Spectral solvers for the d-bar equation, complex geometric optics (CGO)
//! functions, and the Davey-Stewartson II (DS II) equation.
//!
//! The crate is organised around a periodic square grid and the discrete
//! Fourier transform normalised so that it approximates the continuous
//! transform with a single `1/(2*pi)` prefactor:
//!
//! ```text
//! (F f)(xi) = (1/(2*pi)) * integral f(z) exp(-i xi . z) dz
//! ```
//!
//! With this convention the Gaussian `exp(-x^2 - y^2)` maps to
//! `0.5 * exp(-|xi|^2 / 4)` and the d-bar derivative acts in Fourier space as
//! multiplication by `(i/2) * (xi1 + i*xi2)`.
//!
//! Modules:
//!
//! * [`spectral_grid`] - grids, tagged fields, FFT plans, lattice shifts.
//! * [`phi_regularizer`] - regularised division by the symbol `xi`, i.e. the
//!   smooth/singular splitting that keeps the inverse d-bar operator
//!   spectrally accurate, including the shifted-pole variant.
//! * [`krylov`] - a matrix-free GMRES over real vectors, used to solve the
//!   R-linear (conjugation-containing) CGO integral equations.
//! * [`cgo_solver`] - direct and iterated formulations of the CGO equation.
//! * [`ds2_ist`] - the DS II inverse-scattering pipeline (forward transform,
//!   linear time evolution of the reflection data, inversion).
//! * [`ds2_direct`] - a pseudospectral integrating-factor RK4 solver for
//!   DS II, with the auxiliary potential and a conserved energy.
//! * [`field_io`] - a plain-text interchange format for complex fields.

pub mod cgo_solver;
pub mod ds2_direct;
pub mod ds2_ist;
pub mod field_io;
pub mod krylov;
pub mod phi_regularizer;
pub mod spectral_grid;

pub use cgo_solver::{
    apply_k0, born_terms, finv_shifted_denom, shift_steps_for_k, solve_direct, solve_iterated,
    CgoSolution, ExponentConvention,
};
pub use ds2_direct::{ds2_rhs, evolve_direct, Ds2DirectReport, Ds2Sample, TimeScheme,
    TimeStepperConfig};
pub use ds2_ist::{
    compute_phi, energy, evolve_reflection, forward_scattering, inverse_scattering,
    inverse_scattering_at, ReflectionMap, ScatteringConfig,
};
pub use krylov::{gmres_solve, GmresConfig, GmresReport};
pub use phi_regularizer::{
    build_wn_table, dbar_inverse, dbar_inverse_shifted, dbar_wn_value, finv_over_xi,
    taylor_coeffs, wn_value, TaylorCoeffs, WnTable, MAX_KERNEL_ORDER,
};
pub use spectral_grid::{
    circular_shift, lattice_steps, linf_diff, linf_norm, shift_steps, CoreError, Fft2, Field2D,
    Space, SpectralGrid2D, C64,
};
