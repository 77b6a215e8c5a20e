//! Matrix-free GMRES over real vectors.
//!
//! The CGO integral equations contain complex conjugation, so they are only
//! R-linear; solving them with a complex Krylov method would be incorrect.
//! Instead, complex fields are flattened into real vectors of twice the
//! length (real parts then imaginary parts) and passed through this real
//! GMRES.  Full GMRES (no restart) is the default: the operators are compact
//! perturbations of the identity and converge in a handful of iterations.

/// Solver parameters.
#[derive(Debug, Clone)]
pub struct GmresConfig {
    /// Relative residual target `|b - A x| <= tol * |b|`.
    pub tol: f64,
    /// Maximum number of Arnoldi steps (per restart cycle, if restarting).
    pub max_iters: usize,
    /// Restart length; `None` means full GMRES.
    pub restart: Option<usize>,
}

impl Default for GmresConfig {
    fn default() -> Self {
        GmresConfig { tol: 1e-14, max_iters: 200, restart: None }
    }
}

/// Convergence report.
#[derive(Debug, Clone)]
pub struct GmresReport {
    /// Total Arnoldi steps taken.
    pub iterations: usize,
    /// Final relative residual `|b - A x| / |b|`.
    pub residual: f64,
    /// Relative residual after each step (monotone non-increasing within a
    /// cycle).
    pub history: Vec<f64>,
    pub converged: bool,
    /// True if the Krylov space became exact (lucky breakdown).
    pub breakdown: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve `A x = b` for a matrix-free real linear operator `A`.
///
/// Returns the approximate solution and a [`GmresReport`].  A zero right-hand
/// side returns the zero vector immediately.
pub fn gmres_solve<F>(apply: F, b: &[f64], cfg: &GmresConfig) -> (Vec<f64>, GmresReport)
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return (
            vec![0.0; n],
            GmresReport {
                iterations: 0,
                residual: 0.0,
                history: vec![],
                converged: true,
                breakdown: false,
            },
        );
    }

    let mut x = vec![0.0; n];
    let mut history = Vec::new();
    let mut total_iters = 0;
    let mut converged = false;
    let mut breakdown = false;
    let cycle_len = cfg.restart.unwrap_or(cfg.max_iters).max(1);

    'outer: loop {
        // Residual for the current iterate.
        let ax = apply(&x);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let rnorm = norm(&r);
        if rnorm <= cfg.tol * bnorm {
            converged = true;
            break;
        }
        for v in &mut r {
            *v /= rnorm;
        }

        let mut basis: Vec<Vec<f64>> = vec![r];
        // Hessenberg columns after Givens reduction, plus rotation data.
        let mut h_cols: Vec<Vec<f64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut g = vec![rnorm];

        let mut k_done = 0;
        for k in 0..cycle_len {
            if total_iters >= cfg.max_iters {
                break;
            }
            total_iters += 1;
            let mut w = apply(&basis[k]);
            // Modified Gram-Schmidt.
            let mut h = vec![0.0; k + 2];
            for j in 0..=k {
                h[j] = dot(&w, &basis[j]);
                for (wi, vj) in w.iter_mut().zip(&basis[j]) {
                    *wi -= h[j] * vj;
                }
            }
            h[k + 1] = norm(&w);
            let lucky = h[k + 1] <= 1e-14 * bnorm;
            if !lucky {
                let inv = 1.0 / h[k + 1];
                for wi in &mut w {
                    *wi *= inv;
                }
                basis.push(w);
            }

            // Apply previous Givens rotations to the new column.
            for j in 0..k {
                let t = cs[j] * h[j] + sn[j] * h[j + 1];
                h[j + 1] = -sn[j] * h[j] + cs[j] * h[j + 1];
                h[j] = t;
            }
            // New rotation annihilating the subdiagonal.
            let denom = (h[k] * h[k] + h[k + 1] * h[k + 1]).sqrt();
            let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (h[k] / denom, h[k + 1] / denom) };
            cs.push(c);
            sn.push(s);
            h[k] = c * h[k] + s * h[k + 1];
            h[k + 1] = 0.0;
            g.push(-s * g[k]);
            g[k] *= c;

            h_cols.push(h);
            k_done = k + 1;
            let rel = g[k + 1].abs() / bnorm;
            history.push(rel);
            if lucky {
                breakdown = true;
                converged = true;
                break;
            }
            if rel <= cfg.tol {
                converged = true;
                break;
            }
        }

        // Back-substitution for the least-squares coefficients.
        let mut y = vec![0.0; k_done];
        for i in (0..k_done).rev() {
            let mut s = g[i];
            for j in (i + 1)..k_done {
                s -= h_cols[j][i] * y[j];
            }
            y[i] = s / h_cols[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&basis[i]) {
                *xi += yi * vi;
            }
        }

        if converged || total_iters >= cfg.max_iters {
            break 'outer;
        }
    }

    let ax = apply(&x);
    let res = norm(&b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect::<Vec<_>>()) / bnorm;
    (
        x,
        GmresReport {
            iterations: total_iters,
            residual: res,
            history,
            converged: converged || res <= cfg.tol,
            breakdown,
        },
    )
}
