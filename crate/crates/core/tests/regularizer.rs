//! Regularised inverse d-bar tests: kernel values, Taylor quadrature, and
//! closed-form solution oracles.

use dbar_core::{
    build_wn_table, dbar_inverse, dbar_inverse_shifted, linf_diff, taylor_coeffs, wn_value, C64,
    CoreError, Fft2, SpectralGrid2D,
};
use ndarray::Array2;

fn grid(n: usize, l: f64) -> SpectralGrid2D {
    SpectralGrid2D::new(n, l).unwrap()
}

/// `W_0(z) = (i/z)(1 - exp(-|z|^2/4))`, checked at `z = 2`.
#[test]
fn w0_closed_form_value() {
    let v = wn_value(0, C64::new(2.0, 0.0), 1.0);
    let exact = C64::new(0.0, 0.5) * (1.0 - (-1.0f64).exp());
    assert!((v - exact).norm() < 1e-15, "{v} vs {exact}");
    // Reference magnitude of the imaginary part.
    assert!((v.im - 0.316060279414279).abs() < 1e-12);
}

#[test]
fn wn_vanishes_at_origin() {
    for order in 0..=11 {
        assert_eq!(wn_value(order, C64::new(0.0, 0.0), 1.0), C64::new(0.0, 0.0));
    }
}

/// The closed-form and series branches agree in an annulus around the
/// crossover circle (low orders; the closed form loses relative accuracy at
/// high order near the origin, which the hybrid split exists to avoid).
#[test]
fn hybrid_branches_agree() {
    for order in 0..=4 {
        for i in 0..40 {
            let r = 0.8 + 0.5 * i as f64 / 39.0;
            let th = 0.37 + i as f64;
            let z = C64::from_polar(r, th);
            let closed = wn_value(order, z, 0.5); // forces closed form
            let series = wn_value(order, z, 2.0); // forces series
            let scale = closed.norm().max(series.norm()).max(1e-12);
            assert!(
                (closed - series).norm() < 1e-9 * scale,
                "order {order}, z {z}: {closed} vs {series}"
            );
        }
    }
}

#[test]
fn table_order_limit() {
    let g = grid(16, 1.0);
    match build_wn_table(g, 21, 1.0) {
        Err(CoreError::OrderTooLarge { .. }) => {}
        other => panic!("expected OrderTooLarge, got {:?}", other.map(|_| ())),
    }
    build_wn_table(g, 20, 1.0).unwrap();
}

/// Taylor quadrature against analytic moments of Gaussians.
#[test]
fn taylor_quadrature_moments() {
    let g = grid(128, 4.0);
    // Centered Gaussian: c0 = 1/2, c1 = 0, a10 = 0.
    let w = Array2::from_shape_fn((g.n, g.n), |(iy, ix)| {
        C64::new((-g.z(iy, ix).norm_sqr()).exp(), 0.0)
    });
    let tc = taylor_coeffs(&g, &w, 3);
    assert!((tc.c[0] - 0.5).norm() < 1e-13);
    assert!(tc.c[1].norm() < 1e-13);
    assert!(tc.a10.norm() < 1e-13);
    // Gaussian centered at z = 1: first moment integral is pi, so
    // c1 = (-i/2) * pi / (2 pi) = -i/4 and a10 = its conjugate pairing.
    let w1 = Array2::from_shape_fn((g.n, g.n), |(iy, ix)| {
        C64::new((-(g.z(iy, ix) - 1.0).norm_sqr()).exp(), 0.0)
    });
    let tc1 = taylor_coeffs(&g, &w1, 3);
    assert!((tc1.c[1] - C64::new(0.0, -0.25)).norm() < 1e-13);
    assert!((tc1.a10 - C64::new(0.0, -0.25)).norm() < 1e-13);
}

fn gaussian_potential(g: &SpectralGrid2D, a: f64, b: C64, c: C64) -> Array2<C64> {
    Array2::from_shape_fn((g.n, g.n), |(iy, ix)| {
        let z = g.z(iy, ix);
        (-a * (z - b) * (z.conj() - c)).exp()
    })
}

/// Closed-form oracle: with `q = exp(-a (z - b)(conj(z) - c))`,
/// `dbar [ (1 - q) / (a (z - b)) ] = q`, so the regularised inverse must
/// reproduce `(1 - q) / (a (z - b))` to near machine precision.
#[test]
fn dbar_inverse_gaussian_oracle() {
    let g = grid(128, 4.0);
    let fft = Fft2::new(g);
    let table = build_wn_table(g, 11, 1.0).unwrap();
    let (a, b, c) = (0.5, C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    let q = gaussian_potential(&g, a, b, c);
    let exact = Array2::from_shape_fn((g.n, g.n), |(iy, ix)| {
        let z = g.z(iy, ix);
        (1.0 - q[[iy, ix]]) / (a * (z - b))
    });
    let num = dbar_inverse(&fft, &q, &table);
    let err = linf_diff(&num, &exact);
    assert!(err < 1e-12, "err = {err}");
}

/// Second closed-form oracle with a rapidly decaying solution:
/// `dbar exp(-|z|^2) = -z exp(-|z|^2)`, so inverting the right-hand side must
/// return the Gaussian itself, and (because the solution is Schwartz-class)
/// the periodic spectral d-bar derivative of the result reproduces the data.
#[test]
fn dbar_inverse_schwartz_oracle_and_residual() {
    let g = grid(128, 4.0);
    let fft = Fft2::new(g);
    let table = build_wn_table(g, 11, 1.0).unwrap();
    let data = Array2::from_shape_fn((g.n, g.n), |(iy, ix)| {
        let z = g.z(iy, ix);
        -z * (-z.norm_sqr()).exp()
    });
    let exact = Array2::from_shape_fn((g.n, g.n), |(iy, ix)| {
        C64::new((-g.z(iy, ix).norm_sqr()).exp(), 0.0)
    });
    let num = dbar_inverse(&fft, &data, &table);
    let err = linf_diff(&num, &exact);
    assert!(err < 1e-12, "oracle err = {err}");
    let mut nh = fft.forward(&num);
    for iy in 0..g.n {
        for ix in 0..g.n {
            nh[[iy, ix]] *= C64::new(0.0, 0.5) * g.xic(iy, ix);
        }
    }
    let dbar_num = fft.inverse(&nh);
    let resid = linf_diff(&dbar_num, &data);
    assert!(resid < 1e-10, "residual = {resid}");
}

/// The operator is exactly linear in its data.
#[test]
fn dbar_inverse_is_linear() {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    let g = grid(32, 2.0);
    let fft = Fft2::new(g);
    let table = build_wn_table(g, 7, 1.0).unwrap();
    for seed in [0u64, 1, 2] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Array2::from_shape_fn((g.n, g.n), |_| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let h = Array2::from_shape_fn((g.n, g.n), |_| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let alpha = C64::new(0.7, -0.3);
        let beta = C64::new(-1.1, 0.2);
        let mut comb = Array2::zeros((g.n, g.n));
        for iy in 0..g.n {
            for ix in 0..g.n {
                comb[[iy, ix]] = alpha * f[[iy, ix]] + beta * h[[iy, ix]];
            }
        }
        let lhs = dbar_inverse(&fft, &comb, &table);
        let df = dbar_inverse(&fft, &f, &table);
        let dh = dbar_inverse(&fft, &h, &table);
        let mut rhs = Array2::zeros((g.n, g.n));
        for iy in 0..g.n {
            for ix in 0..g.n {
                rhs[[iy, ix]] = alpha * df[[iy, ix]] + beta * dh[[iy, ix]];
            }
        }
        let scale = lhs.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        assert!(linf_diff(&lhs, &rhs) < 1e-11 * scale);
    }
}

/// With zero shift the recentred operator reduces to the plain one.
#[test]
fn shifted_inverse_reduces_at_zero_shift() {
    let g = grid(64, 4.0);
    let fft = Fft2::new(g);
    let table = build_wn_table(g, 11, 1.0).unwrap();
    let q = Array2::from_shape_fn((g.n, g.n), |(iy, ix)| {
        C64::new((-g.z(iy, ix).norm_sqr()).exp(), 0.0)
    });
    let d1 = dbar_inverse(&fft, &q, &table);
    let d2 = dbar_inverse_shifted(&fft, &q, &table, (0, 0));
    assert!(linf_diff(&d1, &d2) < 1e-12);
}

/// Oracle for modulated data: for
/// `q = exp(-a (z-b)(conj(z)-c)) * exp(conj(k) conj(z) - k z)` the exact
/// solution is again closed-form; the recentred operator must stay
/// spectrally accurate where the plain one degrades.
#[test]
fn shifted_inverse_modulated_oracle() {
    let g = grid(64, 4.0);
    let fft = Fft2::new(g);
    let table = build_wn_table(g, 11, 1.0).unwrap();
    let (a, b, c) = (0.5, C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    let k = C64::new(4.0, 4.0);
    let w = gaussian_potential(&g, a, b, c);
    let mut q = Array2::zeros((g.n, g.n));
    for iy in 0..g.n {
        for ix in 0..g.n {
            let z = g.z(iy, ix);
            q[[iy, ix]] = w[[iy, ix]] * (k.conj() * z.conj() - k * z).exp();
        }
    }
    let bb = b + k.conj() / a;
    let d = -b * k + k.conj() * c - k.norm_sqr() / a;
    let exact = Array2::from_shape_fn((g.n, g.n), |(iy, ix)| {
        let z = g.z(iy, ix);
        (d.exp() - q[[iy, ix]]) / (a * (z - bb))
    });
    let steps = (
        (-2.0 * k.im * g.l).round() as i64,
        (-2.0 * k.re * g.l).round() as i64,
    );
    let num = dbar_inverse_shifted(&fft, &q, &table, steps);
    let err = linf_diff(&num, &exact);
    assert!(err < 1e-9, "shifted err = {err}");
}
