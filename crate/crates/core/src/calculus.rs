//! Shift, tau-derivative, tau-integral and the product formulas built on them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid_fn::{c, GridFunction};
use crate::orbit::{Grid, GridMode};

/// Relative size below which a series increment counts as negligible.
pub const SERIES_TOL: f64 = 1e-15;

/// `T^steps f`.
pub fn shift(f: &GridFunction, steps: isize) -> GridFunction {
    f.shift(steps)
}

/// `x - tau(x)` as a grid function.
pub fn delta_fn(grid: &Grid) -> GridFunction {
    GridFunction::from_real(grid, grid.deltas())
}

/// `tau(x)` as a grid function, valid everywhere (the last point uses the stored tail).
pub fn tau_fn(grid: &Grid) -> GridFunction {
    let v = grid.points().iter().zip(grid.deltas()).map(|(x, d)| x - d).collect();
    GridFunction::from_real(grid, v)
}

/// `(f(x) - f(tau x)) / (x - tau x)`; the last point of every segment is masked.
pub fn tau_derivative(f: &GridFunction) -> GridFunction {
    let g = f.grid();
    let next = f.shift(1);
    let vals = (0..g.len()).map(|i| (f.value(i) - next.value(i)) / g.delta(i)).collect();
    let mask = (0..g.len()).map(|i| f.is_valid(i) && next.is_valid(i)).collect();
    GridFunction::from_parts(g, vals, mask)
}

/// Result of a truncated series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    /// Largest of the last three increments (per orbit end).
    pub tail: f64,
    pub converged: bool,
}

impl Quadrature {
    /// The value, or `TailNotConverged` when the tail exceeds `tol (1 + |value|)`.
    pub fn value_checked(&self, tol: f64) -> Result<Complex64> {
        if self.tail <= tol * (1.0 + self.value.norm()) {
            Ok(self.value)
        } else {
            Err(Error::TailNotConverged { tail: self.tail })
        }
    }
}

fn last_increments(terms: &[Complex64]) -> f64 {
    terms.iter().rev().take(3).map(|t| t.norm()).fold(0.0, f64::max)
}

/// The tau-integral over the grid's orbit set: a forward orbit sum, the
/// difference of the two orbit sums for an interval grid, or the two-sided sum.
/// Masked entries are skipped.
pub fn tau_integral(f: &GridFunction) -> Quadrature {
    let g = f.grid();
    let mut value = c(0.0);
    let mut tail: f64 = 0.0;
    for seg in g.segments() {
        let terms: Vec<Complex64> = (0..seg.len())
            .map(|j| seg.offset + j)
            .filter(|&i| f.is_valid(i))
            .map(|i| f.value(i) * seg.deltas[i - seg.offset])
            .collect();
        let sum: Complex64 = terms.iter().sum();
        value += sum * seg.sign;
        tail = tail.max(last_increments(&terms));
        if matches!(g.mode(), GridMode::Group { .. }) && seg.first_step < 0 {
            tail = tail.max(terms.iter().take(3).map(|t| t.norm()).fold(0.0, f64::max));
        }
    }
    let converged = tail <= SERIES_TOL * (1.0 + value.norm()).max(f.scale());
    Quadrature { value, tail, converged }
}

/// Orbit integral over one segment, ignoring its sign.
pub fn segment_integral(f: &GridFunction, segment: usize) -> Quadrature {
    let seg = &f.grid().segments()[segment];
    let terms: Vec<Complex64> = (0..seg.len())
        .filter(|&j| f.is_valid(seg.offset + j))
        .map(|j| f.value(seg.offset + j) * seg.deltas[j])
        .collect();
    let value = terms.iter().sum();
    let tail = last_increments(&terms);
    Quadrature { value, tail, converged: tail <= SERIES_TOL * (1.0 + value.norm()).max(f.scale()) }
}

/// Folds each segment from its last valid entry back to its start. An output
/// entry is valid only when every input entry from it to the end is valid.
fn suffix_fold(
    f: &GridFunction,
    init: Complex64,
    mut step: impl FnMut(usize, Complex64, Complex64) -> Result<Complex64>,
) -> Result<GridFunction> {
    let g = f.grid();
    let mut vals = vec![c(f64::NAN); g.len()];
    let mut mask = vec![false; g.len()];
    for seg in g.segments() {
        let idx: Vec<usize> = (seg.offset..seg.offset + seg.len()).collect();
        let Some(last) = idx.iter().rposition(|&i| f.is_valid(i)) else { continue };
        let mut acc = init;
        for &i in idx[..=last].iter().rev() {
            if !f.is_valid(i) {
                break;
            }
            acc = step(i, acc, f.value(i))?;
            vals[i] = acc;
            mask[i] = true;
        }
    }
    Ok(GridFunction::from_parts(g, vals, mask))
}

/// `F(x) = sum_{m >= n} delta_m f[m]`, the integral from the limit to `x`.
pub fn tau_antiderivative(f: &GridFunction) -> GridFunction {
    let g = f.grid().clone();
    suffix_fold(f, c(0.0), |i, acc, v| Ok(acc + v * g.delta(i))).expect("infallible")
}

/// `exp_tau(x) = prod_{m >= n} 1 / (1 - delta_m)`, including a first-order
/// estimate of the factors beyond the stored tail.
pub fn tau_exponential(grid: &Grid) -> Result<GridFunction> {
    let mut vals = vec![c(f64::NAN); grid.len()];
    for seg in grid.segments() {
        let rest = seg.tail_next - seg.limit;
        let mut acc = rest.exp();
        for j in (0..seg.len()).rev() {
            let factor = 1.0 - seg.deltas[j];
            if factor == 0.0 {
                return Err(Error::FactorZero { index: seg.offset + j });
            }
            acc /= factor;
            vals[seg.offset + j] = c(acc);
        }
    }
    Ok(GridFunction::from_values(grid, vals))
}

fn positive_real(i: usize, v: Complex64) -> Result<f64> {
    if v.re > 0.0 && v.im.abs() <= 1e-14 * v.re {
        Ok(v.re)
    } else if v.norm() == 0.0 {
        Err(Error::FactorZero { index: i })
    } else {
        Err(Error::NonPositiveFactor { index: i, value: format!("{v}") })
    }
}

/// Both evaluations of `prod_n F(tau^n x)` at the base of the first segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductIntegral {
    pub direct: f64,
    /// `exp` of the tau-integral of `ln F / (t - tau t)`.
    pub via_log: f64,
    pub rel_gap: f64,
}

impl ProductIntegral {
    pub fn value(&self) -> f64 {
        self.direct
    }
}

/// Product of `F` over the valid window of the first segment, computed
/// directly and through the logarithmic integral.
pub fn product_integral(f: &GridFunction) -> Result<ProductIntegral> {
    let g = f.grid();
    let seg = &g.segments()[0];
    let mut direct = 1.0;
    let mut log_integrand = vec![c(f64::NAN); g.len()];
    for j in 0..seg.len() {
        let i = seg.offset + j;
        if !f.is_valid(i) {
            continue;
        }
        let v = positive_real(i, f.value(i))?;
        direct *= v;
        log_integrand[i] = c(v.ln() / seg.deltas[j]);
    }
    let lf = GridFunction::from_values(g, log_integrand);
    let via_log = segment_integral(&lf, 0).value.re.exp();
    let rel_gap = (direct - via_log).abs() / direct.abs().max(f64::MIN_POSITIVE);
    if rel_gap > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "product and log-integral routes disagree (relative gap {rel_gap:e})"
        )));
    }
    Ok(ProductIntegral { direct, via_log, rel_gap })
}

/// `x -> prod_{m >= n} F[m]` on every valid suffix, via the log route.
pub fn running_product(f: &GridFunction) -> Result<GridFunction> {
    let logs = suffix_fold(f, c(0.0), |i, acc, v| Ok(acc + positive_real(i, v)?.ln()))?;
    Ok(logs.map(|l| c(l.re.exp())))
}

/// Solves `d_tau psi = f psi` with `psi(tau^inf) = init`:
/// `psi(x) = init exp(-int ln(1 - (t - tau t) f(t)) / (t - tau t) d_tau t)`.
pub fn solve_linear_first_order(f: &GridFunction, init: Complex64) -> Result<GridFunction> {
    let g = f.grid().clone();
    let factors = suffix_fold(f, c(0.0), |i, _, v| Ok(c(1.0) - v * g.delta(i)))?;
    let logs = suffix_fold(&factors, c(0.0), |i, acc, v| Ok(acc + positive_real(i, v)?.ln()))?;
    Ok(logs.map(|l| init * (-l.re).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{GridSpec, OrbitGrid, TauMap};

    fn half(base: f64) -> Grid {
        OrbitGrid::build(&TauMap::linear(0.5, 0.0), &GridSpec::semigroup(base)).unwrap()
    }

    #[test]
    fn derivative_of_square() {
        let g = half(1.0);
        let d = tau_derivative(&GridFunction::from_real_fn(&g, |x| x * x));
        assert!((d.re(0) - 1.5).abs() < 1e-15);
        let d = tau_derivative(&GridFunction::identity(&g));
        assert!(d.valid_indices().iter().all(|&i| (d.re(i) - 1.0).abs() < 1e-15));
        assert!(!d.is_valid(g.len() - 1));
    }

    #[test]
    fn integrals() {
        let g = half(1.0);
        let one = tau_integral(&GridFunction::constant(&g, 1.0));
        assert!((one.value.re - 1.0).abs() < 1e-15 && one.converged);
        let t = tau_integral(&GridFunction::identity(&g));
        assert!((t.value.re - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn interval_integral_of_odd_function_vanishes() {
        let g = OrbitGrid::build(&TauMap::linear(0.5, 0.0), &GridSpec::interval(-1.0, 1.0)).unwrap();
        let v = tau_integral(&GridFunction::identity(&g)).value.re;
        assert!(v.abs() < 1e-15);
        let sq = tau_integral(&GridFunction::from_real_fn(&g, |x| x * x)).value.re;
        // orbit sums of t^2 are 4/7 on both sides, with opposite deltas
        assert!((sq - 8.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn antiderivative() {
        let g = half(1.0);
        let a = tau_antiderivative(&GridFunction::identity(&g));
        for i in 0..g.len() {
            assert!((a.re(i) - g.x(i) * g.x(i) * 2.0 / 3.0).abs() < 1e-15);
        }
        let a = tau_antiderivative(&GridFunction::constant(&g, 1.0));
        assert!((a.re(3) - g.x(3)).abs() < 1e-15);
    }

    #[test]
    fn exponential() {
        let g = half(1.0);
        let e = tau_exponential(&g).unwrap();
        assert!((e.re(0) - 3.462746619455064).abs() < 1e-10);
        let r = crate::residual::cleared(&tau_derivative(&e), &e, e.scale());
        assert!(r < 1e-10, "{r}");
    }

    #[test]
    fn products() {
        let g = half(1.0);
        let p = product_integral(&GridFunction::from_real_fn(&g, |t| 1.0 - t / 2.0)).unwrap();
        assert!((p.value() - 0.288_788_095_086_602_4).abs() < 1e-10);
        let f = GridFunction::constant(&g, 1.5).restrict(|i| i < 4);
        assert!((product_integral(&f).unwrap().value() - 1.5f64.powi(4)).abs() < 1e-14);
        let neg = GridFunction::constant(&g, -1.0);
        assert!(matches!(product_integral(&neg), Err(Error::NonPositiveFactor { .. })));
    }

    #[test]
    fn first_order() {
        let g = half(1.0);
        let psi = solve_linear_first_order(&GridFunction::constant(&g, 0.0), c(2.5)).unwrap();
        assert!(psi.values().iter().all(|v| (v.re - 2.5).abs() < 1e-15));
        let psi = solve_linear_first_order(&GridFunction::constant(&g, 1.0), c(1.0)).unwrap();
        let e = tau_exponential(&g).unwrap();
        assert!(psi.max_abs_diff(&e) < 1e-12);
        let err = solve_linear_first_order(&GridFunction::constant(&g, 2.0), c(1.0)).unwrap_err();
        assert!(matches!(err, Error::FactorZero { index: 0 }));
    }
}
