//! GMRES contract tests against dense reference solves.

use dbar_core::{gmres_solve, GmresConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect()
}

/// Dense Gaussian elimination with partial pivoting, used as the oracle.
fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, piv);
        rhs.swap(col, piv);
        let d = m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / d;
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (rhs[i] - s) / m[i][i];
    }
    x
}

#[test]
fn identity_converges_in_one_step() {
    let b = vec![1.0, -2.0, 3.0, 0.5];
    let (x, rep) = gmres_solve(|v| v.to_vec(), &b, &GmresConfig::default());
    assert!(rep.converged);
    assert!(rep.iterations <= 1);
    for (xi, bi) in x.iter().zip(&b) {
        assert!((xi - bi).abs() < 1e-14);
    }
}

#[test]
fn zero_rhs_returns_zero() {
    let b = vec![0.0; 8];
    let (x, rep) = gmres_solve(|v| v.to_vec(), &b, &GmresConfig::default());
    assert!(rep.converged);
    assert_eq!(rep.iterations, 0);
    assert!(x.iter().all(|&v| v == 0.0));
}

#[test]
fn diagonal_system() {
    let d = [2.0, 3.0, 0.5, -1.5, 4.0];
    let b = [1.0, 1.0, 1.0, 1.0, 1.0];
    let (x, rep) =
        gmres_solve(|v| v.iter().zip(&d).map(|(vi, di)| vi * di).collect(), &b, &GmresConfig::default());
    assert!(rep.converged);
    for (xi, di) in x.iter().zip(&d) {
        assert!((xi - 1.0 / di).abs() < 1e-12);
    }
}

#[test]
fn random_dense_systems_match_direct_solve() {
    for seed in [0u64, 1, 2] {
        let n = 64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Well-conditioned: identity plus a modest random perturbation.
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 1.0 } else { 0.0 } + 0.05 * rng.gen_range(-1.0..1.0))
                    .collect()
            })
            .collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let exact = dense_solve(&a, &b);
        let cfg = GmresConfig { tol: 1e-13, ..GmresConfig::default() };
        let (x, rep) = gmres_solve(|v| matvec(&a, v), &b, &cfg);
        assert!(rep.converged, "seed {seed}: residual {}", rep.residual);
        let err = x.iter().zip(&exact).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "seed {seed}: err {err}");
    }
}

#[test]
fn residual_history_is_monotone_and_matches_final() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 32;
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 } else { 0.0 } + 0.1 * rng.gen_range(-1.0..1.0))
                .collect()
        })
        .collect();
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let cfg = GmresConfig { tol: 1e-13, ..GmresConfig::default() };
    let (x, rep) = gmres_solve(|v| matvec(&a, v), &b, &cfg);
    for w in rep.history.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "history not monotone: {:?}", rep.history);
    }
    // The reported residual is the true one, recomputed from x.
    let ax = matvec(&a, &x);
    let rnorm = ax.iter().zip(&b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((rep.residual - rnorm / bnorm).abs() < 1e-13);
    assert!(rep.residual <= 1e-13);
}

#[test]
fn restarted_gmres_still_converges() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 48;
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 } else { 0.0 } + 0.05 * rng.gen_range(-1.0..1.0))
                .collect()
        })
        .collect();
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let cfg = GmresConfig { tol: 1e-12, max_iters: 400, restart: Some(10) };
    let (_, rep) = gmres_solve(|v| matvec(&a, v), &b, &cfg);
    assert!(rep.converged, "residual {}", rep.residual);
}

#[test]
fn iteration_budget_is_respected() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 64;
    // Harder system so the budget actually binds.
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 } else { 0.0 } + 0.8 * rng.gen_range(-1.0..1.0))
                .collect()
        })
        .collect();
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let cfg = GmresConfig { tol: 1e-16, max_iters: 5, restart: None };
    let (_, rep) = gmres_solve(|v| matvec(&a, v), &b, &cfg);
    assert!(rep.iterations <= 5);
    assert!(!rep.converged);
}
