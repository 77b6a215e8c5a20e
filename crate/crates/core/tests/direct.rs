//! Direct time-stepper tests: linear limit, convergence order, reversibility,
//! and conservation laws.

use dbar_core::{
    energy, evolve_direct, linf_diff, C64, CoreError, Fft2, SpectralGrid2D, TimeStepperConfig,
};
use ndarray::Array2;

fn grid(n: usize, l: f64) -> SpectralGrid2D {
    SpectralGrid2D::new(n, l).unwrap()
}

fn gaussian(g: &SpectralGrid2D, amp: f64) -> Array2<C64> {
    Array2::from_shape_fn((g.n, g.n), |(iy, ix)| {
        C64::new(amp * (-g.z(iy, ix).norm_sqr()).exp(), 0.0)
    })
}

#[test]
fn zero_stays_zero() {
    let g = grid(16, 1.0);
    let fft = Fft2::new(g);
    let q0: Array2<C64> = Array2::zeros((16, 16));
    let cfg = TimeStepperConfig { n_t: 10, ..TimeStepperConfig::default() };
    let rep = evolve_direct(&fft, &q0, 0.5, &cfg).unwrap();
    assert!(rep.q.iter().all(|v| v.norm() == 0.0));
}

/// For a tiny amplitude the nonlinearity is negligible and the solver must
/// reproduce the exact linear propagator `exp(-i t (xi1^2 - xi2^2)/2)`.
#[test]
fn linear_limit_matches_free_propagator() {
    let g = grid(32, 2.1213);
    let fft = Fft2::new(g);
    let eps = 1e-8;
    let q0 = gaussian(&g, eps);
    let t = 0.4;
    let cfg = TimeStepperConfig { n_t: 200, ..TimeStepperConfig::default() };
    let rep = evolve_direct(&fft, &q0, t, &cfg).unwrap();
    let mut qh = fft.forward(&q0);
    for iy in 0..g.n {
        let x2 = g.xi(iy);
        for ix in 0..g.n {
            let x1 = g.xi(ix);
            qh[[iy, ix]] *= (C64::new(0.0, -0.5 * t * (x1 * x1 - x2 * x2))).exp();
        }
    }
    let exact = fft.inverse(&qh);
    let err = linf_diff(&rep.q, &exact);
    assert!(err < 1e-6 * eps, "linear limit err {err}");
}

/// Classical 4th-order self-convergence in the step size.
#[test]
fn fourth_order_self_convergence() {
    let g = grid(32, 2.1213);
    let fft = Fft2::new(g);
    let q0 = gaussian(&g, 1.0);
    let t = 0.4;
    let reference = {
        let cfg = TimeStepperConfig { n_t: 2000, ..TimeStepperConfig::default() };
        evolve_direct(&fft, &q0, t, &cfg).unwrap().q
    };
    // Coarse steps keep the errors far above the roundoff floor so the
    // convergence ratios are clean.
    let mut errors = Vec::new();
    for n_t in [25usize, 50, 100] {
        let cfg = TimeStepperConfig { n_t, ..TimeStepperConfig::default() };
        let q = evolve_direct(&fft, &q0, t, &cfg).unwrap().q;
        errors.push(linf_diff(&q, &reference));
    }
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            ratio > 10.0 && ratio < 24.0,
            "expected ~16x error reduction per halving, got {ratio} ({errors:?})"
        );
    }
}

/// Integrating forward then backward returns the initial data.
#[test]
fn time_reversal() {
    let g = grid(32, 2.1213);
    let fft = Fft2::new(g);
    let q0 = gaussian(&g, 1.0);
    let t = 0.3;
    let cfg = TimeStepperConfig { n_t: 600, ..TimeStepperConfig::default() };
    let fwd = evolve_direct(&fft, &q0, t, &cfg).unwrap();
    let back = evolve_direct(&fft, &fwd.q, -t, &cfg).unwrap();
    let err = linf_diff(&back.q, &q0);
    assert!(err < 1e-8, "time reversal err {err}");
}

/// Mass and energy are conserved along the flow at adequate resolution.
#[test]
fn invariants_are_conserved() {
    let g = grid(64, 3.2);
    let fft = Fft2::new(g);
    let q0 = gaussian(&g, 1.0);
    let cfg = TimeStepperConfig { n_t: 1000, sample_stride: 250, ..TimeStepperConfig::default() };
    let rep = evolve_direct(&fft, &q0, 0.8, &cfg).unwrap();
    let e0 = energy(&fft, &q0);
    let l0 = g.l2_norm(&q0);
    for s in &rep.diagnostics {
        assert!((s.energy - e0).abs() < 1e-9 * e0.abs(), "energy drift {}", (s.energy - e0) / e0);
        assert!((s.l2 - l0).abs() < 1e-10 * l0, "mass drift {}", (s.l2 - l0) / l0);
    }
    // Diagnostics cover the endpoints and the sampled interior times.
    assert_eq!(rep.diagnostics.first().unwrap().t, 0.0);
    assert!((rep.diagnostics.last().unwrap().t - 0.8).abs() < 1e-14);
    assert!(rep.diagnostics.len() >= 4);
}

/// The blow-up guard aborts instead of returning garbage.
#[test]
fn blowup_guard_triggers() {
    let g = grid(16, 1.0);
    let fft = Fft2::new(g);
    let q0 = gaussian(&g, 1.0);
    let cfg = TimeStepperConfig { n_t: 10, blowup_threshold: 1e-12, ..TimeStepperConfig::default() };
    match evolve_direct(&fft, &q0, 0.1, &cfg) {
        Err(CoreError::NonFinite { .. }) => {}
        other => panic!("expected NonFinite, got {:?}", other.map(|_| ())),
    }
}

/// The dealiased run stays close to the plain one for smooth data.
#[test]
fn dealias_flag_is_benign_for_smooth_data() {
    let g = grid(64, 3.2);
    let fft = Fft2::new(g);
    let q0 = gaussian(&g, 1.0);
    let t = 0.2;
    let plain = evolve_direct(
        &fft,
        &q0,
        t,
        &TimeStepperConfig { n_t: 200, ..TimeStepperConfig::default() },
    )
    .unwrap();
    let filtered = evolve_direct(
        &fft,
        &q0,
        t,
        &TimeStepperConfig { n_t: 200, dealias: true, ..TimeStepperConfig::default() },
    )
    .unwrap();
    // At this resolution the filter zeroes modes of amplitude ~exp(-11), so
    // the two runs legitimately differ at that level, far from machine
    // precision but far below the solution scale.
    let err = linf_diff(&plain.q, &filtered.q);
    assert!(err < 1e-3, "dealias difference {err}");
    assert!(err > 0.0, "filter had no effect at all");
}
