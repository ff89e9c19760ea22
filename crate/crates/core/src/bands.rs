//! Three-band operators on a grid and the truncated eigenproblem of `A* A`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::chain::{rhs_bands, ChainLevel, CoefficientTriple};
use crate::error::{Error, Result};
use crate::grid_fn::{c, GridFunction};
use crate::hilbert::WeightedGrid;
use crate::orbit::Grid;

/// Row `n`: `sub[n] chi[n-1] + diag[n] chi[n] + sup[n] chi[n+1]`.
#[derive(Clone, Debug)]
pub struct Tridiag {
    pub grid: Grid,
    pub sub: Vec<Complex64>,
    pub diag: Vec<Complex64>,
    pub sup: Vec<Complex64>,
    pub valid: Vec<bool>,
}

impl Tridiag {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.len();
        let nan = c(f64::NAN);
        Self { grid: grid.clone(), sub: vec![nan; n], diag: vec![nan; n], sup: vec![nan; n], valid: vec![false; n] }
    }

    pub fn from_coefficients(coef: &CoefficientTriple) -> Self {
        let grid = coef.alpha.grid().clone();
        let mut t = Self::new(&grid);
        for i in 0..grid.len() {
            let (Some(a), Some(b)) = (coef.alpha.get(i), coef.beta.get(i)) else { continue };
            let gm = if grid.is_boundary(i) { Some(c(0.0)) } else { coef.gamma.get(i) };
            let Some(gm) = gm else { continue };
            t.sup[i] = a;
            t.diag[i] = b;
            t.sub[i] = gm;
            t.valid[i] = true;
        }
        t
    }

    pub fn apply(&self, chi: &GridFunction) -> GridFunction {
        let g = &self.grid;
        let mut vals = vec![c(f64::NAN); g.len()];
        let mut mask = vec![false; g.len()];
        for i in 0..g.len() {
            if !self.valid[i] || !chi.is_valid(i) {
                continue;
            }
            let Some(n1) = g.neighbor(i, 1).filter(|&j| chi.is_valid(j)) else { continue };
            let mut v = self.diag[i] * chi.value(i) + self.sup[i] * chi.value(n1);
            if !g.is_boundary(i) {
                let Some(p) = g.neighbor(i, -1).filter(|&j| chi.is_valid(j)) else { continue };
                v += self.sub[i] * chi.value(p);
            }
            vals[i] = v;
            mask[i] = true;
        }
        GridFunction::from_parts(g, vals, mask)
    }

    /// `max |W_n sup_n - W_{n+1} sub_{n+1}|` relative to the entries, with `W = delta rho`.
    pub fn weighted_asymmetry(&self, w: &WeightedGrid) -> f64 {
        let g = &self.grid;
        let mut worst: f64 = 0.0;
        for i in 0..g.len() {
            let Some(j) = g.neighbor(i, 1) else { continue };
            if !(self.valid[i] && self.valid[j] && w.rho.is_valid(i) && w.rho.is_valid(j)) {
                continue;
            }
            let a = self.sup[i] * g.measure(i) * w.rho.re(i);
            let b = self.sub[j] * g.measure(j) * w.rho.re(j);
            let s = a.norm().max(b.norm());
            if s > 0.0 {
                worst = worst.max((a - b).norm() / s);
            }
        }
        worst
    }

    /// Eigenvalues of the band restricted to rows `rows` of one orbit (Dirichlet
    /// truncation), after the diagonal similarity that makes it symmetric.
    pub fn truncated_eigenvalues(&self, rows: std::ops::Range<usize>) -> Result<Vec<f64>> {
        let m = rows.len();
        if m == 0 {
            return Ok(Vec::new());
        }
        let mut a = DMatrix::<f64>::zeros(m, m);
        for (r, i) in rows.clone().enumerate() {
            if !self.valid[i] {
                return Err(Error::InvalidInput(format!("band row {i} is not valid")));
            }
            a[(r, r)] = self.diag[i].re;
            if r + 1 < m {
                let j = i + 1;
                if self.grid.neighbor(i, 1) != Some(j) {
                    return Err(Error::InvalidInput("rows must lie on one orbit".into()));
                }
                let p = self.sup[i].re * self.sub[j].re;
                if p < 0.0 {
                    return Err(Error::InvalidInput(format!("band is not symmetrizable at row {i}")));
                }
                let off = p.sqrt() * self.sup[i].re.signum();
                a[(r, r + 1)] = off;
                a[(r + 1, r)] = off;
            }
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
        ev.sort_by(|x, y| x.total_cmp(y));
        Ok(ev)
    }
}

/// Matrix of `A* A - shift` on the grid.
pub fn hamiltonian_matrix(level: &ChainLevel, shift: Complex64) -> Tridiag {
    let mut t = rhs_bands(level);
    for d in t.diag.iter_mut() {
        *d -= shift;
    }
    t
}

/// Smallest `count` eigenvalues of `A* A` truncated to the first `depth` points
/// of the first orbit.
pub fn lowest_eigenvalues(level: &ChainLevel, depth: usize, count: usize) -> Result<Vec<f64>> {
    let t = hamiltonian_matrix(level, c(0.0));
    let seg = &level.grid().segments()[0];
    let depth = depth.min(seg.len() - 1);
    let start = seg.offset;
    let rows = start..start + depth;
    let ev = t.truncated_eigenvalues(rows)?;
    Ok(ev.into_iter().take(count).collect())
}
