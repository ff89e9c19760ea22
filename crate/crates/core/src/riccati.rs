//! First-order 2x2 systems `(T psi, T phi) = Lambda (psi, phi)`, their
//! resolvent products, the tau-Riccati equation for `u = phi / psi`, and
//! Darboux gauges.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::calculus::{delta_fn, running_product, tau_derivative};
use crate::chain::CoefficientTriple;
use crate::error::{Error, Result};
use crate::grid_fn::{c, GridFunction};
use crate::orbit::Grid;
use crate::residual;

/// Row-major 2x2 complex matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mat2 {
    pub fn new(a: Complex64, b: Complex64, cc: Complex64, d: Complex64) -> Self {
        Self { a, b, c: cc, d }
    }

    pub fn real(a: f64, b: f64, cc: f64, d: f64) -> Self {
        Self::new(c(a), c(b), c(cc), c(d))
    }

    pub fn identity() -> Self {
        Self::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Self::new(a, c(0.0), c(0.0), d)
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inv(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Self::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        [self.a, self.b, self.c, self.d].iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.c, self.d].iter().all(|v| v.is_finite())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.a * r.a + self.b * r.c,
            self.a * r.b + self.b * r.d,
            self.c * r.a + self.d * r.c,
            self.c * r.b + self.d * r.d,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a + r.a, self.b + r.b, self.c + r.c, self.d + r.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a - r.a, self.b - r.b, self.c - r.c, self.d - r.d)
    }
}

/// Matrix-valued function on a grid, one `GridFunction` per entry.
#[derive(Clone, Debug)]
pub struct MatrixFn {
    pub a: GridFunction,
    pub b: GridFunction,
    pub c: GridFunction,
    pub d: GridFunction,
}

impl MatrixFn {
    pub fn new(a: GridFunction, b: GridFunction, cc: GridFunction, d: GridFunction) -> Result<Self> {
        for other in [&b, &cc, &d] {
            a.check_same_grid(other)?;
        }
        Ok(Self { a, b, c: cc, d })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> Mat2) -> Self {
        let ms: Vec<Mat2> = grid.points().into_iter().map(f).collect();
        Self::from_mats(grid, &ms.into_iter().map(Some).collect::<Vec<_>>())
    }

    pub fn from_mats(grid: &Grid, ms: &[Option<Mat2>]) -> Self {
        let nan = c(f64::NAN);
        let pick = |f: fn(&Mat2) -> Complex64| {
            GridFunction::from_values(grid, ms.iter().map(|m| m.as_ref().map_or(nan, f)).collect())
        };
        Self { a: pick(|m| m.a), b: pick(|m| m.b), c: pick(|m| m.c), d: pick(|m| m.d) }
    }

    pub fn identity(grid: &Grid) -> Self {
        Self::from_fn(grid, |_| Mat2::identity())
    }

    pub fn grid(&self) -> &Grid {
        self.a.grid()
    }

    pub fn at(&self, i: usize) -> Option<Mat2> {
        Some(Mat2::new(self.a.get(i)?, self.b.get(i)?, self.c.get(i)?, self.d.get(i)?))
    }

    pub fn mats(&self) -> Vec<Option<Mat2>> {
        (0..self.grid().len()).map(|i| self.at(i)).collect()
    }

    pub fn shift(&self, steps: isize) -> Self {
        Self { a: self.a.shift(steps), b: self.b.shift(steps), c: self.c.shift(steps), d: self.d.shift(steps) }
    }

    /// Largest pointwise max-norm difference over indices valid in both.
    pub fn max_diff(&self, other: &MatrixFn) -> f64 {
        (0..self.grid().len())
            .filter_map(|i| Some((self.at(i)? - other.at(i)?).max_norm()))
            .fold(0.0, f64::max)
    }
}

/// `(T psi, T phi) = Lambda (psi, phi)` with `Lambda = I - (x - tau x) Lambda~`.
#[derive(Clone, Debug)]
pub struct TwoByTwoSystem {
    pub lambda: MatrixFn,
}

impl TwoByTwoSystem {
    /// Rejects points where `det Lambda = 0`.
    pub fn from_lambda(lambda: MatrixFn) -> Result<Self> {
        for i in 0..lambda.grid().len() {
            if let Some(m) = lambda.at(i) {
                if m.det().norm() == 0.0 {
                    return Err(Error::DegenerateSystem { index: i });
                }
            }
        }
        Ok(Self { lambda })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> Mat2) -> Result<Self> {
        Self::from_lambda(MatrixFn::from_fn(grid, f))
    }

    /// From `Lambda~`: `Lambda = I - (x - tau x) Lambda~`.
    pub fn from_tilde(tilde: &MatrixFn) -> Result<Self> {
        let d = delta_fn(tilde.grid());
        let one = GridFunction::constant(tilde.grid(), 1.0);
        Self::from_lambda(MatrixFn {
            a: &one - &(&d * &tilde.a),
            b: -(&d * &tilde.b),
            c: -(&d * &tilde.c),
            d: &one - &(&d * &tilde.d),
        })
    }

    /// `Lambda~ = (I - Lambda) / (x - tau x)`.
    pub fn tilde(&self) -> MatrixFn {
        let d = delta_fn(self.grid());
        let one = GridFunction::constant(self.grid(), 1.0);
        let m = &self.lambda;
        MatrixFn { a: &(&one - &m.a) / &d, b: -(&m.b / &d), c: -(&m.c / &d), d: &(&one - &m.d) / &d }
    }

    pub fn grid(&self) -> &Grid {
        self.lambda.grid()
    }

    pub fn at(&self, i: usize) -> Option<Mat2> {
        self.lambda.at(i)
    }
}

/// `Lambda = [[(lambda - beta) / alpha, -gamma / alpha], [1, 0]]` acting on
/// `(psi, T^-1 psi)`. Rows at the base of a forward orbit have no `T^-1 psi`
/// and are masked.
pub fn system_from_second_order(coef: &CoefficientTriple) -> Result<TwoByTwoSystem> {
    let grid = coef.alpha.grid().clone();
    let mut ms = vec![None; grid.len()];
    for (i, m) in ms.iter_mut().enumerate() {
        if grid.is_boundary(i) {
            continue;
        }
        let (Some(al), Some(be), Some(ga)) = (coef.alpha.get(i), coef.beta.get(i), coef.gamma.get(i)) else { continue };
        if al.norm() == 0.0 {
            return Err(Error::ZeroAlpha { index: i });
        }
        *m = Some(Mat2::new((coef.lambda - be) / al, -ga / al, c(1.0), c(0.0)));
    }
    TwoByTwoSystem::from_lambda(MatrixFn::from_mats(&grid, &ms))
}

/// The infinite product `Lambda_inf(x) = lim Lambda(tau^n x) ... Lambda(x)`.
#[derive(Clone, Debug)]
pub struct ResolventResult {
    /// `Lambda_inf` at every grid point (None where it cannot be formed).
    pub matrices: Vec<Option<Mat2>>,
    /// Every segment passed the Cauchy test and had a finite criterion sum.
    pub converged: bool,
    /// Largest per-segment `sum |delta_n| ||Lambda~(tau^n x)||_max`.
    pub criterion_sum: f64,
    /// Largest number of factors in one product.
    pub steps: usize,
    /// Largest max-norm gap among the last three partial products at a segment
    /// start, relative to `max(1, ||product||)`.
    pub cauchy_gap: f64,
}

impl ResolventResult {
    pub fn matrix_fn(&self, grid: &Grid) -> MatrixFn {
        MatrixFn::from_mats(grid, &self.matrices)
    }
}

/// Tolerance on the Cauchy gap for `converged`.
pub const CAUCHY_TOL: f64 = 1e-12;

/// Products accumulated along each segment; a point's product runs to the
/// end of the contiguous valid run that contains it.
pub fn resolvent(sys: &TwoByTwoSystem) -> ResolventResult {
    let grid = sys.grid();
    let tilde = sys.tilde();
    let mut out = ResolventResult {
        matrices: vec![None; grid.len()],
        converged: true,
        criterion_sum: 0.0,
        steps: 0,
        cauchy_gap: 0.0,
    };
    for seg in grid.segments() {
        let end = seg.offset + seg.len();
        let Some(last) = (seg.offset..end).rev().find(|&i| sys.at(i).is_some()) else {
            out.converged = false;
            continue;
        };
        let mut acc = Mat2::identity();
        let mut first = last + 1;
        for i in (seg.offset..=last).rev() {
            let Some(m) = sys.at(i) else { break };
            acc = acc * m;
            out.matrices[i] = Some(acc);
            first = i;
        }
        if first > seg.offset {
            out.converged = false;
        }
        let sum: f64 = (first..=last)
            .map(|i| tilde.at(i).map_or(f64::INFINITY, |t| grid.delta(i).abs() * t.max_norm()))
            .sum();
        out.criterion_sum = out.criterion_sum.max(sum);
        out.steps = out.steps.max(last + 1 - first);
        // forward partial products at the segment start
        let mut p = Mat2::identity();
        let mut partial = Vec::new();
        for i in first..=last {
            p = sys.at(i).expect("valid run") * p;
            partial.push(p);
        }
        let n = partial.len();
        if n >= 3 {
            let s = partial[n - 1].max_norm().max(1.0);
            let gap = (partial[n - 1] - partial[n - 2]).max_norm().max((partial[n - 1] - partial[n - 3]).max_norm()) / s;
            out.cauchy_gap = out.cauchy_gap.max(gap);
        } else {
            out.converged = false;
        }
    }
    if !(out.criterion_sum.is_finite() && out.cauchy_gap < CAUCHY_TOL) {
        out.converged = false;
    }
    out
}

/// `max ||Lambda_inf(x) - Lambda_inf(tau x) Lambda(x)||_max` relative to `max(1, ||Lambda_inf||)`.
pub fn resolvent_step_residual(sys: &TwoByTwoSystem, res: &ResolventResult) -> f64 {
    let grid = sys.grid();
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let Some(j) = grid.neighbor(i, 1) else { continue };
        let (Some(m), Some(mt), Some(l)) = (res.matrices[i], res.matrices[j], sys.at(i)) else { continue };
        worst = worst.max((m - mt * l).max_norm() / m.max_norm().max(1.0));
    }
    worst
}

/// `(psi, phi)(x) = Lambda_inf(x)^-1 boundary`, with `boundary` the values at the limit.
pub fn solve_system(sys: &TwoByTwoSystem, boundary: [Complex64; 2]) -> Result<(GridFunction, GridFunction)> {
    let res = resolvent(sys);
    if !res.converged {
        return Err(Error::NotConverged { iterations: res.steps, last: res.cauchy_gap });
    }
    solve_with(&res, sys.grid(), boundary)
}

/// Same as `solve_system` from an already computed resolvent.
pub fn solve_with(res: &ResolventResult, grid: &Grid, boundary: [Complex64; 2]) -> Result<(GridFunction, GridFunction)> {
    let nan = c(f64::NAN);
    let mut psi = vec![nan; grid.len()];
    let mut phi = vec![nan; grid.len()];
    for i in 0..grid.len() {
        let Some(m) = res.matrices[i] else { continue };
        let inv = m.inv().ok_or(Error::SingularResolvent { index: i })?;
        let v = inv.apply(boundary);
        psi[i] = v[0];
        phi[i] = v[1];
    }
    Ok((GridFunction::from_values(grid, psi), GridFunction::from_values(grid, phi)))
}

/// Forward iteration `v(tau^{n+1} x) = Lambda(tau^n x) v(tau^n x)` from `v0` at the
/// first valid point of every segment, for systems whose resolvent does not converge.
pub fn propagate(sys: &TwoByTwoSystem, v0: [Complex64; 2]) -> (GridFunction, GridFunction) {
    let grid = sys.grid();
    let nan = c(f64::NAN);
    let mut psi = vec![nan; grid.len()];
    let mut phi = vec![nan; grid.len()];
    for seg in grid.segments() {
        let mut v = v0;
        let end = seg.offset + seg.len();
        let Some(start) = (seg.offset..end).find(|&i| sys.at(i).is_some()) else { continue };
        for i in start..end {
            psi[i] = v[0];
            phi[i] = v[1];
            let Some(m) = sys.at(i) else { break };
            v = m.apply(v);
        }
    }
    (GridFunction::from_values(grid, psi), GridFunction::from_values(grid, phi))
}

/// `max |(T psi, T phi) - Lambda (psi, phi)|` relative to the solution scale.
pub fn system_residual(sys: &TwoByTwoSystem, psi: &GridFunction, phi: &GridFunction) -> f64 {
    let grid = sys.grid();
    let scale = residual::scale_of(&[psi, phi]);
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let Some(j) = grid.neighbor(i, 1) else { continue };
        let (Some(m), Some(p0), Some(f0), Some(p1), Some(f1)) = (sys.at(i), psi.get(i), phi.get(i), psi.get(j), phi.get(j)) else {
            continue;
        };
        let v = m.apply([p0, f0]);
        worst = worst.max((v[0] - p1).norm().max((v[1] - f1).norm()) / scale);
    }
    worst
}

/// Closed form for upper-triangular `Lambda` (`c = 0`): the diagonal is
/// `exp(int ln a / (t - tau t) d_tau t)` and the same for `d`, and the corner is
/// `F(x) = d_inf(x) sum_{k >= 0} b(tau^k x) / a(tau^k x) prod_{j >= k} a(tau^j x) / d(tau^j x)`.
pub fn triangular_resolvent(sys: &TwoByTwoSystem) -> Result<ResolventResult> {
    let m = &sys.lambda;
    let grid = sys.grid();
    for i in m.c.valid_indices() {
        if m.c.value(i).norm() != 0.0 {
            return Err(Error::NotTriangular { index: i });
        }
    }
    let a_inf = running_product(&m.a)?;
    let d_inf = running_product(&m.d)?;
    let ratio = &a_inf / &d_inf;
    let terms = &(&m.b / &m.a) * &ratio;
    let mut matrices = vec![None; grid.len()];
    let mut steps = 0;
    for seg in grid.segments() {
        let mut sum = c(0.0);
        let mut run = 0;
        for i in (seg.offset..seg.offset + seg.len()).rev() {
            let (Some(t), Some(ai), Some(di)) = (terms.get(i), a_inf.get(i), d_inf.get(i)) else {
                if run > 0 {
                    break;
                }
                continue;
            };
            sum += t;
            run += 1;
            matrices[i] = Some(Mat2::new(ai, di * sum, c(0.0), di));
        }
        steps = steps.max(run);
    }
    let brute = resolvent(sys);
    Ok(ResolventResult { matrices, converged: brute.converged, criterion_sum: brute.criterion_sum, steps, cauchy_gap: brute.cauchy_gap })
}

/// Largest max-norm gap between two resolvents relative to `max(1, ||.||)`.
pub fn resolvent_gap(x: &ResolventResult, y: &ResolventResult) -> f64 {
    x.matrices
        .iter()
        .zip(&y.matrices)
        .filter_map(|(p, q)| Some((*p)? - (*q)?).map(|d| (d, p.unwrap().max_norm().max(1.0))))
        .map(|(d, s)| d.max_norm() / s)
        .fold(0.0, f64::max)
}

fn pointwise_inverse(d: &MatrixFn) -> Result<MatrixFn> {
    let grid = d.grid();
    let mut ms = vec![None; grid.len()];
    for (i, m) in ms.iter_mut().enumerate() {
        if let Some(di) = d.at(i) {
            *m = Some(di.inv().ok_or(Error::SingularGauge { index: i })?);
        }
    }
    Ok(MatrixFn::from_mats(grid, &ms))
}

/// `Lambda'(x) = D(tau x)^-1 Lambda(x) D(x)`. Entries are masked where `D(tau x)`
/// is not stored.
pub fn darboux(sys: &TwoByTwoSystem, d: &MatrixFn) -> Result<TwoByTwoSystem> {
    sys.lambda.a.check_same_grid(&d.a)?;
    let grid = sys.grid();
    let inv = pointwise_inverse(d)?;
    let inv_next = inv.shift(1);
    let ms: Vec<Option<Mat2>> =
        (0..grid.len()).map(|i| Some(inv_next.at(i)? * sys.at(i)? * d.at(i)?)).collect();
    TwoByTwoSystem::from_lambda(MatrixFn::from_mats(grid, &ms))
}

/// `(psi, phi) -> D(x)^-1 (psi, phi)`.
pub fn darboux_solution(d: &MatrixFn, psi: &GridFunction, phi: &GridFunction) -> Result<(GridFunction, GridFunction)> {
    let inv = pointwise_inverse(d)?;
    Ok((&(&inv.a * psi) + &(&inv.b * phi), &(&inv.c * psi) + &(&inv.d * phi)))
}

/// `Lambda_inf -> D(tau^inf)^-1 Lambda_inf(x) D(x)`, with `d_limit` the gauge at the limit.
pub fn darboux_resolvent(res: &ResolventResult, d: &MatrixFn, d_limit: Mat2) -> Result<ResolventResult> {
    let li = d_limit.inv().ok_or(Error::SingularGauge { index: usize::MAX })?;
    let matrices = res.matrices.iter().enumerate().map(|(i, m)| Some(li * (*m)? * d.at(i)?)).collect();
    Ok(ResolventResult { matrices, ..res.clone() })
}

/// `(x - l)^delta`, rejecting negative bases with non-integer exponents.
fn signed_power(base: f64, delta: f64) -> Result<f64> {
    if base < 0.0 && delta.fract() != 0.0 {
        return Err(Error::NegativeBaseRealExponent { base, exponent: delta });
    }
    Ok(if delta.fract() == 0.0 { base.powi(delta as i32) } else { base.powf(delta) })
}

/// Darboux gauge `D = diag((x - l)^d1, (x - l)^d2)` in closed form:
/// `a' = a ((x - l) / (tau x - l))^d1`, `b' = b (x - l)^d2 / (tau x - l)^d1`,
/// `c' = c (x - l)^d1 / (tau x - l)^d2`, `d' = d ((x - l) / (tau x - l))^d2`.
pub fn singular_darboux(sys: &TwoByTwoSystem, d1: f64, d2: f64) -> Result<TwoByTwoSystem> {
    let grid = sys.grid();
    let mut ms = vec![None; grid.len()];
    for seg in grid.segments() {
        for j in 0..seg.len() {
            let i = seg.offset + j;
            let Some(m) = sys.at(i) else { continue };
            let l = seg.limit;
            let x = seg.points[j];
            let tx = if j + 1 < seg.len() { seg.points[j + 1] } else { seg.tail_next };
            let (x1, x2) = (signed_power(x - l, d1)?, signed_power(x - l, d2)?);
            let (t1, t2) = (signed_power(tx - l, d1)?, signed_power(tx - l, d2)?);
            ms[i] = Some(Mat2::new(m.a * (x1 / t1), m.b * (x2 / t1), m.c * (x1 / t2), m.d * (x2 / t2)));
        }
    }
    TwoByTwoSystem::from_lambda(MatrixFn::from_mats(grid, &ms))
}

/// The gauge `diag((x - l)^d1, (x - l)^d2)` on the grid.
pub fn singular_gauge(grid: &Grid, d1: f64, d2: f64) -> Result<MatrixFn> {
    let mut ms = vec![None; grid.len()];
    for (i, m) in ms.iter_mut().enumerate() {
        let r = grid.x(i) - grid.limit_at(i);
        *m = Some(Mat2::diag(c(signed_power(r, d1)?), c(signed_power(r, d2)?)));
    }
    Ok(MatrixFn::from_mats(grid, &ms))
}

/// `u(tau x) - (d u + c) / (b u + a)`, relative to `1 + |u(tau x)|`.
pub fn rhom_residual(sys: &TwoByTwoSystem, u: &GridFunction) -> f64 {
    let grid = sys.grid();
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let Some(j) = grid.neighbor(i, 1) else { continue };
        let (Some(m), Some(u0), Some(u1)) = (sys.at(i), u.get(i), u.get(j)) else { continue };
        let r = (u1 * (m.b * u0 + m.a) - (m.d * u0 + m.c)).norm() / ((m.b * u0 + m.a).norm() * (1.0 + u1.norm()));
        worst = worst.max(if r.is_nan() { f64::INFINITY } else { r });
    }
    worst
}

/// `d_tau u - (c~ + d~ u - a~ u(tau x) - b~ u u(tau x))`, cleared by `min(1, |delta|)`.
pub fn riccati_residual(sys: &TwoByTwoSystem, u: &GridFunction) -> f64 {
    let t = sys.tilde();
    let ut = u.shift(1);
    let rhs = &(&(&t.c + &(&t.d * u)) - &(&t.a * &ut)) - &(&(&t.b * u) * &ut);
    let lhs = tau_derivative(u);
    residual::cleared(&lhs, &rhs, residual::scale_of(&[u, &ut]))
}

/// `u = phi / psi`.
pub fn riccati_from_solution(psi: &GridFunction, phi: &GridFunction) -> GridFunction {
    phi / psi
}

/// One member `u^t` of the family built from a particular solution `u0`.
#[derive(Clone, Debug)]
pub struct RiccatiSolution {
    pub u: GridFunction,
    pub t: f64,
    pub u0: GridFunction,
}

/// Largest `rhom_residual` accepted for a particular solution.
pub const PARTICULAR_TOL: f64 = 1e-10;

/// `u^t = u0 + t G(x) / (1 - t S(x))` with
/// `r = (a + b u0) / (d - b u0(tau x))`, `G = exp(int ln r / (z - tau z) d_tau z)` and
/// `S = int b G / ((z - tau z)(a + b u0)) d_tau z`, both integrals from the limit to `x`.
/// `u0(tau x)` at the last stored point is continued with the recursion itself.
pub fn general_solution(sys: &TwoByTwoSystem, u0: &GridFunction, t: f64) -> Result<RiccatiSolution> {
    let res = rhom_residual(sys, u0);
    if !(res < PARTICULAR_TOL) {
        return Err(Error::ParticularNotSolution { residual: res });
    }
    let m = &sys.lambda;
    let den = &(&m.b * u0) + &m.a;
    let u0_next = &(&(&m.d * u0) + &m.c) / &den;
    let r = &den / &(&m.d - &(&m.b * &u0_next));
    let g = running_product(&r)?;
    let inc = &(&(&m.b * &g) / &den) / &delta_fn(sys.grid());
    let s = crate::calculus::tau_antiderivative(&inc);
    let u = u0 + &(&(&g * t) / &(&GridFunction::constant(sys.grid(), 1.0) - &(&s * t)));
    Ok(RiccatiSolution { u, t, u0: u0.clone() })
}

/// `(u4 - u3)(u1 - u2) / ((u3 - u1)(u2 - u4))`.
pub fn cross_ratio(u: [Complex64; 4]) -> Result<Complex64> {
    let den = (u[2] - u[0]) * (u[1] - u[3]);
    if den.norm() == 0.0 {
        return Err(Error::DegenerateQuadruple);
    }
    Ok((u[3] - u[2]) * (u[0] - u[1]) / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{GridSpec, OrbitGrid, TauMap};

    fn half() -> Grid {
        OrbitGrid::build(&TauMap::linear(0.5, 0.0), &GridSpec::semigroup(1.0)).unwrap()
    }

    #[test]
    fn mat2_algebra() {
        let m = Mat2::real(1.0, 2.0, 3.0, 4.0);
        assert_eq!(m.det(), c(-2.0));
        assert!((m * m.inv().unwrap() - Mat2::identity()).max_norm() < 1e-15);
        assert!(Mat2::real(1.0, 2.0, 2.0, 4.0).inv().is_none());
    }

    #[test]
    fn identity_resolvent() {
        let g = half();
        let sys = TwoByTwoSystem::from_lambda(MatrixFn::identity(&g)).unwrap();
        let r = resolvent(&sys);
        assert!(r.converged && r.criterion_sum == 0.0);
        assert!(r.matrices.iter().all(|m| *m == Some(Mat2::identity())));
        let (p, f) = solve_system(&sys, [c(2.0), c(-1.0)]).unwrap();
        assert!(p.valid_indices().iter().all(|&i| p.value(i) == c(2.0) && f.value(i) == c(-1.0)));
    }

    #[test]
    fn tilde_round_trip() {
        let g = half();
        let sys = TwoByTwoSystem::from_tilde(&MatrixFn::from_fn(&g, |x| Mat2::real(x, 1.0 + x, -0.5, 2.0 * x * x))).unwrap();
        let back = TwoByTwoSystem::from_tilde(&sys.tilde()).unwrap();
        assert!(back.lambda.max_diff(&sys.lambda) < 1e-14);
    }

    #[test]
    fn degenerate_second_order_rejected() {
        let g = half();
        let one = GridFunction::constant(&g, 1.0);
        let zero = GridFunction::constant(&g, 0.0);
        let coef = CoefficientTriple { alpha: one.clone(), beta: &one * 2.0, gamma: zero, lambda: c(2.0) };
        assert!(matches!(system_from_second_order(&coef), Err(Error::DegenerateSystem { .. })));
    }

    #[test]
    fn cross_ratio_values() {
        assert!((cross_ratio([c(0.0), c(1.0), c(2.0), c(3.0)]).unwrap() - 0.25).norm() < 1e-15);
        assert_eq!(cross_ratio([c(1.0), c(1.0), c(2.0), c(3.0)]).unwrap(), c(0.0));
        assert!(matches!(cross_ratio([c(1.0), c(2.0), c(1.0), c(3.0)]), Err(Error::DegenerateQuadruple)));
    }

    #[test]
    fn negative_base_rejected() {
        let g = half();
        let sys = TwoByTwoSystem::from_lambda(MatrixFn::identity(&g)).unwrap();
        assert!(singular_darboux(&sys, 0.5, 0.0).is_ok());
        let g2 = OrbitGrid::build(&TauMap::linear(0.5, 0.0), &GridSpec::semigroup(-1.0)).unwrap();
        let sys2 = TwoByTwoSystem::from_lambda(MatrixFn::identity(&g2)).unwrap();
        assert!(matches!(singular_darboux(&sys2, 0.5, 0.0), Err(Error::NegativeBaseRealExponent { .. })));
        assert!(singular_darboux(&sys2, 1.0, -2.0).is_ok());
    }
}
