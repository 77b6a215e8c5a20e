//! Cross-validation diagnostic: evolve a Gaussian potential with the direct
//! solver and via the scattering transform, and report the energy drift and
//! the pointwise mismatch on a centered sub-lattice.
//!
//! Usage: xval <n> <l> <t> <nt> <patch>

use dbar_core::{
    build_wn_table, evolve_direct, evolve_reflection, forward_scattering, inverse_scattering_at,
    Fft2, ScatteringConfig, SpectralGrid2D, TimeStepperConfig, C64,
};
use ndarray::Array2;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(64);
    let l: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(3.2);
    let t: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0.8);
    let nt: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(10_000);
    let patch: usize = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(5);

    let grid = SpectralGrid2D::new(n, l).unwrap();
    let fft = Fft2::new(grid);
    let q0 = Array2::from_shape_fn((n, n), |(iy, ix)| {
        let z = grid.z(iy, ix);
        C64::new((-z.norm_sqr()).exp(), 0.0)
    });

    let t0 = std::time::Instant::now();
    let cfg = TimeStepperConfig { n_t: nt, ..Default::default() };
    let report = evolve_direct(&fft, &q0, t, &cfg).unwrap();
    let e0 = report.diagnostics.first().unwrap().energy;
    let ef = report.diagnostics.last().unwrap().energy;
    let drift = ((ef - e0) / e0).abs();
    println!("direct: {:?}  energy drift {:.3e}", t0.elapsed(), drift);
    if patch == 0 {
        return;
    }

    let scfg = ScatteringConfig::default();
    let table = build_wn_table(grid, scfg.m_order, scfg.hybrid_radius).unwrap();
    let t1 = std::time::Instant::now();
    let refl = forward_scattering(&fft, &q0, &table, &scfg.gmres);
    println!("forward sweep: {:?}  max residual {:.3e}", t1.elapsed(), refl.max_residual);
    let refl = evolve_reflection(&refl, t);

    let i0 = grid.i0();
    let half = patch / 2;
    let mut pts = Vec::new();
    for dy in 0..patch {
        for dx in 0..patch {
            pts.push((i0 + dy - half, i0 + dx - half));
        }
    }
    let t2 = std::time::Instant::now();
    let vals = inverse_scattering_at(&refl, &pts, &scfg).unwrap();
    println!("inverse patch: {:?}", t2.elapsed());

    // raw max mismatch and best-global-phase mismatch
    let mut max_raw: f64 = 0.0;
    let mut num = C64::new(0.0, 0.0);
    let mut den = 0.0f64;
    for (p, v) in pts.iter().zip(vals.iter()) {
        let d = report.q[[p.0, p.1]];
        max_raw = max_raw.max((v - d).norm());
        num += v * d.conj();
        den += d.norm_sqr();
    }
    let c = num / den;
    let mut max_ph: f64 = 0.0;
    for (p, v) in pts.iter().zip(vals.iter()) {
        let d = report.q[[p.0, p.1]];
        max_ph = max_ph.max((v - c * d).norm());
    }
    println!(
        "mismatch raw {:.3e}   best phase c = {:.6e}+{:.6e}i (|c|-1 = {:+.3e}, arg {:+.3e})   after phase {:.3e}",
        max_raw,
        c.re,
        c.im,
        c.norm() - 1.0,
        c.arg(),
        max_ph
    );
}
