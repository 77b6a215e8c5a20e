//! Plain-text interchange format for complex fields (`DBARF1`).
//!
//! Layout: a single header line
//!
//! ```text
//! DBARF1 n_x n_y l_x l_y space
//! ```
//!
//! (`space` is `physical` or `fourier`), followed by `n_x * n_y` lines of
//! `re im` in row-major order with the x index varying fastest.

use crate::spectral_grid::{C64, CoreError, Field2D, Space, SpectralGrid2D};
use ndarray::Array2;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &str = "DBARF1";

/// Serialise a field to a writer.
pub fn write_field<W: Write>(field: &Field2D, out: W) -> Result<(), CoreError> {
    let mut w = BufWriter::new(out);
    let g = field.grid();
    let space = match field.space() {
        Space::Physical => "physical",
        Space::Fourier => "fourier",
    };
    writeln!(w, "{MAGIC} {} {} {:.17e} {:.17e} {space}", g.n, g.n, g.l, g.l)?;
    for iy in 0..g.n {
        for ix in 0..g.n {
            let v = field.values[[iy, ix]];
            writeln!(w, "{:.17e} {:.17e}", v.re, v.im)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Deserialise a field from a reader.
pub fn read_field<R: Read>(input: R) -> Result<Field2D, CoreError> {
    let mut lines = BufReader::new(input).lines();
    let header = lines
        .next()
        .ok_or_else(|| CoreError::Format("empty file".into()))??;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 6 || parts[0] != MAGIC {
        return Err(CoreError::Format(format!("bad header: {header:?}")));
    }
    let nx: usize = parts[1]
        .parse()
        .map_err(|_| CoreError::Format("bad n_x".into()))?;
    let ny: usize = parts[2]
        .parse()
        .map_err(|_| CoreError::Format("bad n_y".into()))?;
    if nx != ny {
        return Err(CoreError::Format("only square fields are supported".into()));
    }
    let lx: f64 = parts[3]
        .parse()
        .map_err(|_| CoreError::Format("bad l_x".into()))?;
    let ly: f64 = parts[4]
        .parse()
        .map_err(|_| CoreError::Format("bad l_y".into()))?;
    if (lx - ly).abs() > 1e-12 * lx.abs().max(1.0) {
        return Err(CoreError::Format("only square fields are supported".into()));
    }
    let space = match parts[5] {
        "physical" => Space::Physical,
        "fourier" => Space::Fourier,
        other => return Err(CoreError::Format(format!("bad space tag {other:?}"))),
    };
    let grid = SpectralGrid2D::new(nx, lx)?;
    let mut values = Array2::zeros((ny, nx));
    for iy in 0..ny {
        for ix in 0..nx {
            let line = lines
                .next()
                .ok_or_else(|| CoreError::Format("truncated file".into()))??;
            let mut it = line.split_whitespace();
            let re: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CoreError::Format(format!("bad value line: {line:?}")))?;
            let im: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CoreError::Format(format!("bad value line: {line:?}")))?;
            values[[iy, ix]] = C64::new(re, im);
        }
    }
    Field2D::new(grid, space, values)
}

/// Write a field to a file path.
pub fn save_field(field: &Field2D, path: &Path) -> Result<(), CoreError> {
    write_field(field, std::fs::File::create(path)?)
}

/// Read a field from a file path.
pub fn load_field(path: &Path) -> Result<Field2D, CoreError> {
    read_field(std::fs::File::open(path)?)
}
