//! CSV and JSON export. Numbers are written with 17 significant digits in
//! scientific notation, independent of locale, so identical runs give
//! byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::ChainLevel;
use crate::error::{Error, Result};
use crate::grid_fn::GridFunction;
use crate::hilbert::WeightedGrid;
use crate::orbit::{contraction_estimate, limit_point, Grid, GridMode, OrbitGrid};
use crate::riccati::{ResolventResult, TwoByTwoSystem};

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

/// Columns `n, point, delta`; `n` is the orbit step of the point.
pub fn write_grid_csv(grid: &OrbitGrid, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["n", "point", "delta"])?;
    for i in 0..grid.len() {
        w.write_record([grid.step(i).to_string(), num(grid.x(i)), num(grid.delta(i))])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `n, x, re, im, valid`.
pub fn write_function_csv(f: &GridFunction, path: &Path) -> Result<()> {
    let grid = f.grid();
    let mut w = writer(path)?;
    w.write_record(["n", "x", "re", "im", "valid"])?;
    for i in 0..grid.len() {
        let v = f.values()[i];
        w.write_record([grid.step(i).to_string(), num(grid.x(i)), num(v.re), num(v.im), (f.is_valid(i) as u8).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct FunctionRow {
    n: i64,
    x: f64,
    re: f64,
    im: f64,
    valid: u8,
}

/// Reads a file written by [`write_function_csv`] back onto `grid`. Rows must
/// match the grid point by point.
pub fn read_function_csv(grid: &Grid, path: &Path) -> Result<GridFunction> {
    let mut r = csv::Reader::from_path(path)?;
    let mut vals = Vec::with_capacity(grid.len());
    let mut mask = Vec::with_capacity(grid.len());
    for (i, row) in r.deserialize::<FunctionRow>().enumerate() {
        let row = row?;
        if i >= grid.len() || row.n != grid.step(i) || (row.x - grid.x(i)).abs() > 1e-15 * (1.0 + grid.x(i).abs()) {
            return Err(Error::GridMismatch);
        }
        vals.push(Complex64::new(row.re, row.im));
        mask.push(row.valid != 0);
    }
    if vals.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    Ok(GridFunction::from_parts(grid, vals, mask))
}

/// Columns `n, x, rho, delta, positivity`.
pub fn write_weight_csv(w: &WeightedGrid, path: &Path) -> Result<()> {
    let grid = w.grid();
    let mut out = writer(path)?;
    out.write_record(["n", "x", "rho", "delta", "positivity"])?;
    for i in 0..grid.len() {
        out.write_record([
            grid.step(i).to_string(),
            num(grid.x(i)),
            num(w.rho.values()[i].re),
            num(grid.delta(i)),
            (w.positivity[i] as u8).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Columns `n, x, rho, B, eta, h, f, phi` (real parts; masked entries are NaN).
pub fn write_level_csv(level: &ChainLevel, path: &Path) -> Result<()> {
    let grid = level.grid();
    let cols = [&level.w.rho, &level.b, &level.eta, &level.h, &level.f, &level.phi];
    let mut w = writer(path)?;
    w.write_record(["n", "x", "rho", "B", "eta", "h", "f", "phi"])?;
    for i in 0..grid.len() {
        let mut rec = vec![grid.step(i).to_string(), num(grid.x(i))];
        rec.extend(cols.iter().map(|f| num(f.get(i).map_or(f64::NAN, |v| v.re))));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `n, x` and real and imaginary parts of the four entries of `Lambda`.
pub fn write_system_csv(sys: &TwoByTwoSystem, path: &Path) -> Result<()> {
    let grid = sys.grid();
    let mut w = writer(path)?;
    w.write_record(["n", "x", "a_re", "a_im", "b_re", "b_im", "c_re", "c_im", "d_re", "d_im"])?;
    for i in 0..grid.len() {
        let mut rec = vec![grid.step(i).to_string(), num(grid.x(i))];
        match sys.at(i) {
            Some(m) => {
                for z in [m.a, m.b, m.c, m.d] {
                    rec.push(num(z.re));
                    rec.push(num(z.im));
                }
            }
            None => rec.extend(std::iter::repeat_n(num(f64::NAN), 8)),
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentDiagnostics {
    pub base: f64,
    pub limit: f64,
    pub points: usize,
    pub first_step: i64,
    /// Fixed-point search restarted from the base.
    pub iterations: usize,
    pub converged: bool,
    pub last_delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitDiagnostics {
    pub map: String,
    pub mode: String,
    pub points: usize,
    pub truncation_depth: usize,
    pub truncated_by_depth: bool,
    pub backward_converged: bool,
    pub contraction_estimate: f64,
    pub segments: Vec<SegmentDiagnostics>,
}

pub fn limit_diagnostics(grid: &OrbitGrid, tol: f64, max_iter: usize) -> LimitDiagnostics {
    let map = grid.map();
    let segments = grid
        .segments()
        .iter()
        .map(|s| {
            let lr = limit_point(map, s.base, tol, max_iter);
            SegmentDiagnostics {
                base: s.base,
                limit: s.limit,
                points: s.len(),
                first_step: s.first_step,
                iterations: lr.iterations,
                converged: lr.converged,
                last_delta: s.deltas.last().copied().unwrap_or(f64::NAN),
            }
        })
        .collect();
    let mode = match grid.mode() {
        GridMode::Semigroup { .. } => "semigroup",
        GridMode::Interval { .. } => "interval",
        GridMode::Group { .. } => "group",
    };
    LimitDiagnostics {
        map: map.name().to_string(),
        mode: mode.to_string(),
        points: grid.len(),
        truncation_depth: grid.truncation_depth(),
        truncated_by_depth: grid.truncated_by_depth,
        backward_converged: grid.backward_converged,
        contraction_estimate: contraction_estimate(map, grid),
        segments,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolventDiagnostics {
    pub criterion_sum: f64,
    pub steps: usize,
    pub converged: bool,
    pub cauchy_gap: f64,
}

impl From<&ResolventResult> for ResolventDiagnostics {
    fn from(r: &ResolventResult) -> Self {
        Self { criterion_sum: r.criterion_sum, steps: r.steps, converged: r.converged, cauchy_gap: r.cauchy_gap }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{GridSpec, TauMap};

    #[test]
    fn function_round_trip() {
        let g = OrbitGrid::build(&TauMap::linear(0.5, 0.0), &GridSpec::semigroup(1.0).with_max_depth(20)).unwrap();
        let f = GridFunction::from_fn(&g, |x| Complex64::new(x.sin(), 1.0 / 3.0)).shift(1);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        write_function_csv(&f, &p).unwrap();
        let back = read_function_csv(&g, &p).unwrap();
        assert_eq!(back.mask(), f.mask());
        for i in f.valid_indices() {
            assert_eq!(back.value(i), f.value(i));
        }
        assert_eq!(num(0.1), "1.0000000000000001e-1");
    }
}
