//! Command-line harness for the dbar-core solvers.
//!
//! Subcommands exercise the library end to end: convergence sweeps of the
//! regularised inverse d-bar operator, the shifted-vs-plain comparison table,
//! single CGO solves with JSON-lines run logs, scattering round trips, and
//! the DS II evolutions (inverse-scattering, direct, and a comparison of the
//! two).
//!
//! Flags can also be supplied through `--config FILE`, a flat `key=value`
//! file; explicit flags win.  Every CSV artifact starts with a comment line
//! carrying a hash of the resolved configuration so outputs are traceable to
//! their inputs.  Worker-thread count comes from `--workers` or the
//! `DBAR_NUM_WORKERS` environment variable.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dbar_core::field_io::{load_field, save_field};
use dbar_core::{
    build_wn_table, dbar_inverse, dbar_inverse_shifted, evolve_direct, evolve_reflection,
    forward_scattering, inverse_scattering, inverse_scattering_at, linf_diff, solve_iterated,
    C64, Fft2, Field2D, GmresConfig, ScatteringConfig, Space, SpectralGrid2D, TimeStepperConfig,
};
use ndarray::Array2;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "dbar", version, about = "Spectral d-bar / CGO / DS II harness")]
struct Cli {
    /// Flat key=value config file supplying flag defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: DBAR_NUM_WORKERS or all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Grid size per direction (power of two recommended).
    #[arg(long)]
    n: Option<usize>,
    /// Grid half-period divided by pi.
    #[arg(long)]
    l: Option<f64>,
    /// Kernel / Taylor order of the regularised division.
    #[arg(long)]
    m: Option<usize>,
    /// GMRES relative residual target.
    #[arg(long)]
    tol: Option<f64>,
    /// GMRES iteration budget.
    #[arg(long)]
    maxit: Option<usize>,
    /// Output path (file or directory depending on the subcommand).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence sweeps of the regularised inverse d-bar operator.
    DbarConvergence(Common),
    /// Shifted vs plain inverse on modulated data, over a grid/frequency table.
    ShiftCompare(Common),
    /// Solve one lattice-shifted CGO problem and write the solution field.
    CgoSolve {
        #[command(flatten)]
        common: Common,
        /// Spectral parameter as "re,im" (must lie on the half-exponent lattice).
        #[arg(long, allow_hyphen_values = true)]
        k: Option<String>,
        /// JSON-lines run log path (default: stdout).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Forward-then-inverse scattering round trip on a Gaussian.
    Roundtrip(Common),
    /// Davey-Stewartson II evolutions.
    Ds2 {
        #[command(subcommand)]
        cmd: Ds2Command,
    },
}

#[derive(Subcommand)]
enum Ds2Command {
    /// Evolve by the inverse-scattering pipeline and write the solution.
    Ist {
        #[command(flatten)]
        common: Common,
        /// Final time.
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        /// Initial data as a DBARF1 field (default: unit Gaussian).
        #[arg(long)]
        q0: Option<PathBuf>,
    },
    /// Evolve by the pseudospectral time stepper and write the solution
    /// plus a diagnostics.csv of (t, l2, energy).
    Direct {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        /// Number of time steps.
        #[arg(long)]
        nt: Option<usize>,
        #[arg(long)]
        q0: Option<PathBuf>,
    },
    /// Run both evolutions and compare them on a centred sub-lattice.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        #[arg(long)]
        nt: Option<usize>,
        /// Side of the centred comparison sub-lattice.
        #[arg(long)]
        sub: Option<usize>,
    },
}

/// Resolved settings: flag value, else config-file value, else default.
struct Settings {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut file = BTreeMap::new();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            for (ln, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .with_context(|| format!("{}:{}: expected key=value", p.display(), ln + 1))?;
                file.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Settings { file, resolved: BTreeMap::new() })
    }

    fn get<T: std::str::FromStr + std::fmt::Display>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let val = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(s) => s
                    .parse()
                    .map_err(|e| anyhow::anyhow!("config key {key}: {e}"))?,
                None => default,
            },
        };
        self.resolved.insert(key.to_string(), val.to_string());
        Ok(val)
    }

    /// Hash of the resolved configuration, for CSV headers.
    fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (k, v) in &self.resolved {
            hasher.update(k.as_bytes());
            hasher.update(b"=");
            hasher.update(v.as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn gaussian_field(g: &SpectralGrid2D) -> Array2<C64> {
    Array2::from_shape_fn((g.n, g.n), |(iy, ix)| {
        C64::new((-g.z(iy, ix).norm_sqr()).exp(), 0.0)
    })
}

fn write_text(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(p, contents)?;
            eprintln!("wrote {}", p.display());
        }
        None => print!("{contents}"),
    }
    Ok(())
}

fn dbartest_error(n: usize, l: f64, m: usize) -> Result<f64> {
    let g = SpectralGrid2D::new(n, l)?;
    let fft = Fft2::new(g);
    let table = build_wn_table(g, m, 1.0)?;
    let (a, b, c) = (0.5, C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    let q = Array2::from_shape_fn((n, n), |(iy, ix)| {
        let z = g.z(iy, ix);
        (-a * (z - b) * (z.conj() - c)).exp()
    });
    let exact = Array2::from_shape_fn((n, n), |(iy, ix)| {
        let z = g.z(iy, ix);
        (1.0 - q[[iy, ix]]) / (a * (z - b))
    });
    Ok(linf_diff(&dbar_inverse(&fft, &q, &table), &exact))
}

fn cmd_dbar_convergence(mut s: Settings, c: Common) -> Result<()> {
    let n = s.get("n", c.n, 128)?;
    let l = s.get("l", c.l, 4.0)?;
    let m = s.get("m", c.m, 11)?;
    let mut csv = format!("# config_hash={}\nsweep_var,value,linf_error\n", s.hash());
    let mut order_errs = Vec::new();
    for order in (1..=m).step_by(2) {
        let err = dbartest_error(n, l, order)?;
        csv.push_str(&format!("order,{order},{err:e}\n"));
        order_errs.push(err);
    }
    let mut grid_errs = Vec::new();
    let mut gn = 16;
    while gn <= n {
        let err = dbartest_error(gn, l, m)?;
        csv.push_str(&format!("n,{gn},{err:e}\n"));
        grid_errs.push(err);
        gn *= 2;
    }
    write_text(c.out.as_deref(), &csv)?;
    let plateau = order_errs.last().copied().unwrap_or(f64::INFINITY);
    let finest = grid_errs.last().copied().unwrap_or(f64::INFINITY);
    if plateau > 1e-12 || finest > 1e-11 {
        bail!("convergence plateau missed: order sweep {plateau:e}, grid sweep {finest:e}");
    }
    eprintln!("plateau reached: order sweep {plateau:e}, grid sweep {finest:e}");
    Ok(())
}

fn cmd_shift_compare(mut s: Settings, c: Common) -> Result<()> {
    let l = s.get("l", c.l, 4.0)?;
    let m = s.get("m", c.m, 11)?;
    let mut csv = format!(
        "# config_hash={}\nn,k_re,k_im,err_unshifted,err_shifted\n",
        s.hash()
    );
    let (a, b, cc) = (0.5, C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    for j in 0..6u32 {
        let n = 8usize << j;
        let scale = f64::powi(2.0, j as i32);
        let g = SpectralGrid2D::new(n, l)?;
        let fft = Fft2::new(g);
        let table = build_wn_table(g, m, 1.0)?;
        for k in [
            0.25 * scale * C64::new(1.0, 2.0),
            0.5 * scale * C64::new(1.0, 1.0),
        ] {
            let q = Array2::from_shape_fn((n, n), |(iy, ix)| {
                let z = g.z(iy, ix);
                (-a * (z - b) * (z.conj() - cc)).exp()
                    * (k.conj() * z.conj() - k * z).exp()
            });
            let bb = b + k.conj() / a;
            let d = -b * k + k.conj() * cc - k.norm_sqr() / a;
            let exact = Array2::from_shape_fn((n, n), |(iy, ix)| {
                let z = g.z(iy, ix);
                (d.exp() - q[[iy, ix]]) / (a * (z - bb))
            });
            let steps = (
                (-2.0 * k.im * l).round() as i64,
                (-2.0 * k.re * l).round() as i64,
            );
            let e_u = linf_diff(&dbar_inverse(&fft, &q, &table), &exact);
            let e_s = linf_diff(&dbar_inverse_shifted(&fft, &q, &table, steps), &exact);
            csv.push_str(&format!("{n},{},{},{e_u:e},{e_s:e}\n", k.re, k.im));
        }
    }
    write_text(c.out.as_deref(), &csv)?;
    Ok(())
}

fn cmd_cgo_solve(mut s: Settings, c: Common, k: Option<String>, log: Option<PathBuf>) -> Result<()> {
    let n = s.get("n", c.n, 128)?;
    let l = s.get("l", c.l, 4.0)?;
    let m = s.get("m", c.m, 11)?;
    let tol = s.get("tol", c.tol, 1e-13)?;
    let maxit = s.get("maxit", c.maxit, 200)?;
    let k_str = s.get("k", k, "1.0,1.0".to_string())?;
    let (kre, kim) = k_str
        .split_once(',')
        .context("expected --k re,im")?;
    let kk = C64::new(kre.trim().parse()?, kim.trim().parse()?);

    let g = SpectralGrid2D::new(n, l)?;
    let fft = Fft2::new(g);
    let table = build_wn_table(g, m, 1.0)?;
    let q = gaussian_field(&g);
    let steps = dbar_core::shift_steps_for_k(&g, kk, dbar_core::ExponentConvention::Half)?;
    let cfg = GmresConfig { tol, max_iters: maxit, restart: None };
    let sol = solve_iterated(&fft, &q, steps, &table, &cfg);

    let mut lines = Vec::new();
    lines.push(serde_json::json!({
        "event": "config", "config_hash": s.hash(), "n": n, "l": l, "m": m,
        "tol": tol, "maxit": maxit, "k": [kk.re, kk.im], "shift_steps": [steps.0, steps.1],
    }));
    for (i, r) in sol.report.history.iter().enumerate() {
        lines.push(serde_json::json!({"event": "iteration", "iter": i + 1, "residual": r}));
    }
    lines.push(serde_json::json!({
        "event": "done", "iterations": sol.report.iterations,
        "residual": sol.report.residual, "converged": sol.report.converged,
    }));
    let text: String = lines.iter().map(|v| format!("{v}\n")).collect();
    match &log {
        Some(p) => write_text(Some(p), &text)?,
        None => print!("{text}"),
    }

    if let Some(out) = &c.out {
        let field = Field2D::new(g, Space::Fourier, sol.values)?;
        if let Some(dir) = out.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        save_field(&field, out)?;
        eprintln!("wrote {}", out.display());
    }
    if !sol.report.converged {
        bail!("GMRES did not converge: residual {}", sol.report.residual);
    }
    Ok(())
}

fn cmd_roundtrip(mut s: Settings, c: Common) -> Result<()> {
    let n = s.get("n", c.n, 16)?;
    let l = s.get("l", c.l, 1.075)?;
    let m = s.get("m", c.m, 11)?;
    let tol = s.get("tol", c.tol, 1e-14)?;
    let maxit = s.get("maxit", c.maxit, 200)?;
    let g = SpectralGrid2D::new(n, l)?;
    let fft = Fft2::new(g);
    let table = build_wn_table(g, m, 1.0)?;
    let q0 = gaussian_field(&g);
    let cfg = ScatteringConfig {
        m_order: m,
        hybrid_radius: 1.0,
        gmres: GmresConfig { tol, max_iters: maxit, restart: None },
    };
    let map = forward_scattering(&fft, &q0, &table, &cfg.gmres);
    let qrec = inverse_scattering(&map, &cfg)?;
    let err = linf_diff(&qrec, &q0);
    let csv = format!("# config_hash={}\nn,l,linf_error\n{n},{l},{err:e}\n", s.hash());
    write_text(c.out.as_deref(), &csv)?;
    eprintln!("roundtrip error at n={n}, l={l}: {err:e}");
    Ok(())
}

fn load_q0(path: Option<&Path>, g: &SpectralGrid2D) -> Result<Array2<C64>> {
    match path {
        None => Ok(gaussian_field(g)),
        Some(p) => {
            let f = load_field(p)?;
            if f.space() != Space::Physical {
                bail!("initial data must be a physical-space field");
            }
            if f.grid().n != g.n || (f.grid().l - g.l).abs() > 1e-12 {
                bail!(
                    "initial data grid ({}, l={}) does not match requested grid ({}, l={})",
                    f.grid().n,
                    f.grid().l,
                    g.n,
                    g.l
                );
            }
            Ok(f.values)
        }
    }
}

fn out_dir(out: Option<&Path>) -> Result<PathBuf> {
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn cmd_ds2_ist(mut s: Settings, c: Common, t: Option<f64>, q0: Option<PathBuf>) -> Result<()> {
    let n = s.get("n", c.n, 32)?;
    let l = s.get("l", c.l, 1.5)?;
    let m = s.get("m", c.m, 11)?;
    let tol = s.get("tol", c.tol, 1e-14)?;
    let maxit = s.get("maxit", c.maxit, 200)?;
    let t = s.get("t", t, 0.0)?;
    let g = SpectralGrid2D::new(n, l)?;
    let fft = Fft2::new(g);
    let table = build_wn_table(g, m, 1.0)?;
    let q0 = load_q0(q0.as_deref(), &g)?;
    let cfg = ScatteringConfig {
        m_order: m,
        hybrid_radius: 1.0,
        gmres: GmresConfig { tol, max_iters: maxit, restart: None },
    };
    let map = forward_scattering(&fft, &q0, &table, &cfg.gmres);
    eprintln!("forward sweep done; worst GMRES residual {:e}", map.max_residual);
    let map_t = evolve_reflection(&map, t);
    let qt = inverse_scattering(&map_t, &cfg)?;
    let dir = out_dir(c.out.as_deref())?;
    save_field(&Field2D::new(g, Space::Physical, qt)?, &dir.join("q_ist.dbarf"))?;
    eprintln!("wrote {} (config_hash={})", dir.join("q_ist.dbarf").display(), s.hash());
    Ok(())
}

fn cmd_ds2_direct(
    mut s: Settings,
    c: Common,
    t: Option<f64>,
    nt: Option<usize>,
    q0: Option<PathBuf>,
) -> Result<()> {
    let n = s.get("n", c.n, 128)?;
    let l = s.get("l", c.l, 3.2)?;
    let t = s.get("t", t, 0.8)?;
    let nt = s.get("nt", nt, 10_000)?;
    let g = SpectralGrid2D::new(n, l)?;
    let fft = Fft2::new(g);
    let q0 = load_q0(q0.as_deref(), &g)?;
    let cfg = TimeStepperConfig {
        n_t: nt,
        sample_stride: (nt / 100).max(1),
        ..TimeStepperConfig::default()
    };
    let rep = evolve_direct(&fft, &q0, t, &cfg)?;
    let dir = out_dir(c.out.as_deref())?;
    save_field(&Field2D::new(g, Space::Physical, rep.q)?, &dir.join("q_direct.dbarf"))?;
    let mut csv = format!("# config_hash={}\nt,l2,energy\n", s.hash());
    for sm in &rep.diagnostics {
        csv.push_str(&format!("{},{:e},{:e}\n", sm.t, sm.l2, sm.energy));
    }
    std::fs::write(dir.join("diagnostics.csv"), &csv)?;
    let e0 = rep.diagnostics.first().unwrap().energy;
    let e1 = rep.diagnostics.last().unwrap().energy;
    eprintln!(
        "wrote {} and diagnostics.csv; relative energy drift {:e}",
        dir.join("q_direct.dbarf").display(),
        ((e1 - e0) / e0).abs()
    );
    Ok(())
}

fn cmd_ds2_compare(
    mut s: Settings,
    c: Common,
    t: Option<f64>,
    nt: Option<usize>,
    sub: Option<usize>,
) -> Result<()> {
    let n = s.get("n", c.n, 32)?;
    let l = s.get("l", c.l, 2.1213)?;
    let m = s.get("m", c.m, 11)?;
    let tol = s.get("tol", c.tol, 1e-14)?;
    let maxit = s.get("maxit", c.maxit, 200)?;
    let t = s.get("t", t, 0.8)?;
    let nt = s.get("nt", nt, 1000)?;
    let sub = s.get("sub", sub, 5)?;
    let g = SpectralGrid2D::new(n, l)?;
    let fft = Fft2::new(g);
    let table = build_wn_table(g, m, 1.0)?;
    let q0 = gaussian_field(&g);

    let dcfg = TimeStepperConfig { n_t: nt, ..TimeStepperConfig::default() };
    let direct = evolve_direct(&fft, &q0, t, &dcfg)?;

    let scfg = ScatteringConfig {
        m_order: m,
        hybrid_radius: 1.0,
        gmres: GmresConfig { tol, max_iters: maxit, restart: None },
    };
    let map = forward_scattering(&fft, &q0, &table, &scfg.gmres);
    let map_t = evolve_reflection(&map, t);
    let ctr = n as i64 / 2;
    let half = sub as i64 / 2;
    let pts: Vec<(usize, usize)> = (-half..=half)
        .flat_map(|dy| (-half..=half).map(move |dx| ((ctr + dy) as usize, (ctr + dx) as usize)))
        .collect();
    let vals = inverse_scattering_at(&map_t, &pts, &scfg)?;

    let mut csv = format!(
        "# config_hash={}\njy,jx,direct_re,direct_im,ist_re,ist_im,abs_diff\n",
        s.hash()
    );
    let mut worst = 0.0f64;
    for (&(jy, jx), v) in pts.iter().zip(&vals) {
        let dv = direct.q[[jy, jx]];
        let diff = (dv - v).norm();
        worst = worst.max(diff);
        csv.push_str(&format!(
            "{jy},{jx},{:e},{:e},{:e},{:e},{diff:e}\n",
            dv.re, dv.im, v.re, v.im
        ));
    }
    write_text(c.out.as_deref(), &csv)?;
    eprintln!("largest pointwise mismatch on {sub}x{sub} sub-lattice: {worst:e}");
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let workers = cli.workers.or_else(|| {
        std::env::var("DBAR_NUM_WORKERS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(w) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .context("configuring worker pool")?;
    }
    let settings = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::DbarConvergence(c) => cmd_dbar_convergence(settings, c),
        Command::ShiftCompare(c) => cmd_shift_compare(settings, c),
        Command::CgoSolve { common, k, log } => cmd_cgo_solve(settings, common, k, log),
        Command::Roundtrip(c) => cmd_roundtrip(settings, c),
        Command::Ds2 { cmd } => match cmd {
            Ds2Command::Ist { common, t, q0 } => cmd_ds2_ist(settings, common, t, q0),
            Ds2Command::Direct { common, t, nt, q0 } => {
                cmd_ds2_direct(settings, common, t, nt, q0)
            }
            Ds2Command::Compare { common, t, nt, sub } => {
                cmd_ds2_compare(settings, common, t, nt, sub)
            }
        },
    }
}
