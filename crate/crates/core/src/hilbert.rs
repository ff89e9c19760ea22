//! Weighted orbit inner products, the adjoint shift and the tau-Pearson equation.

use num_complex::Complex64;

use crate::calculus::{tau_derivative, tau_integral, Quadrature};
use crate::error::{Error, Result};
use crate::grid_fn::{c, GridFunction};
use crate::orbit::Grid;
use crate::residual;

/// A grid together with a real weight `rho`.
#[derive(Clone, Debug)]
pub struct WeightedGrid {
    pub rho: GridFunction,
    /// Per point: `sign * delta * rho >= 0` and `rho` finite.
    pub positivity: Vec<bool>,
}

impl WeightedGrid {
    pub fn new(rho: GridFunction) -> Self {
        let g = rho.grid().clone();
        let positivity = (0..g.len())
            .map(|i| rho.is_valid(i) && g.measure(i) * rho.re(i) >= 0.0)
            .collect();
        Self { rho, positivity }
    }

    /// Constant weight.
    pub fn uniform(grid: &Grid, value: f64) -> Self {
        Self::new(GridFunction::constant(grid, value))
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    /// Positivity over the valid window of `rho`.
    pub fn positive(&self) -> bool {
        (0..self.rho.len()).filter(|&i| self.rho.is_valid(i)).all(|i| self.positivity[i])
    }
}

/// `sum sign delta conj(phi) psi rho` over the grid's orbit set.
pub fn inner_product(phi: &GridFunction, psi: &GridFunction, w: &WeightedGrid) -> Quadrature {
    tau_integral(&(&(&phi.conj() * psi) * &w.rho))
}

/// `sqrt <phi, phi>`; NaN when the weighted square is negative (the weight is not positive).
pub fn norm(phi: &GridFunction, w: &WeightedGrid) -> f64 {
    let v = inner_product(phi, phi, w).value.re;
    if v < 0.0 {
        f64::NAN
    } else {
        v.sqrt()
    }
}

/// `d_tau(tau^{-1})(x) = (tau^{-1}(x) - x) / (x - tau(x))`; masked at the first point of a segment.
pub fn inverse_step_ratio(grid: &Grid) -> GridFunction {
    let vals = (0..grid.len())
        .map(|i| match grid.neighbor(i, -1) {
            Some(p) => c(grid.delta(p) / grid.delta(i)),
            None => c(f64::NAN),
        })
        .collect();
    GridFunction::from_values(grid, vals)
}

fn check_weight(w: &WeightedGrid) -> Result<()> {
    for i in 0..w.rho.len() {
        if w.rho.is_valid(i) && w.rho.re(i) == 0.0 {
            return Err(Error::ZeroWeight { index: i });
        }
    }
    Ok(())
}

/// `mu(x) = d_tau(tau^{-1})(x) rho(tau^{-1} x) / rho(x)`.
pub fn mu(w: &WeightedGrid) -> Result<GridFunction> {
    check_weight(w)?;
    Ok(&(&inverse_step_ratio(w.grid()) * &w.rho.shift(-1)) / &w.rho)
}

/// `(T* phi)(x) = mu(x) phi(tau^{-1} x)`, zero at the base of a forward orbit.
pub fn adjoint_shift(phi: &GridFunction, w: &WeightedGrid) -> Result<GridFunction> {
    let m = mu(w)?;
    let g = w.grid();
    phi.check_same_grid(&w.rho)?;
    let prev = phi.shift(-1);
    let mut vals = Vec::with_capacity(g.len());
    let mut mask = Vec::with_capacity(g.len());
    for i in 0..g.len() {
        if g.is_boundary(i) {
            vals.push(c(0.0));
            mask.push(true);
        } else {
            vals.push(m.value(i) * prev.value(i));
            mask.push(m.is_valid(i) && prev.is_valid(i));
        }
    }
    Ok(GridFunction::from_parts(g, vals, mask))
}

/// Operator norm bound of `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftNorm {
    /// `sqrt(sup |mu|)` over the grid.
    pub norm: f64,
    /// `|mu|` keeps growing over the last stored points, so the sup of the
    /// truncated grid may not bound the true operator.
    pub growing_tail: bool,
}

pub fn shift_norm(w: &WeightedGrid) -> Result<ShiftNorm> {
    let m = mu(w)?;
    let vals: Vec<f64> = m.valid_indices().iter().map(|&i| m.value(i).norm()).collect();
    let sup = vals.iter().copied().fold(0.0, f64::max);
    let n = vals.len();
    let growing_tail = n >= 4
        && vals[n - 3..].windows(2).all(|p| p[1] > p[0] * (1.0 + 1e-9))
        && vals[n - 1] >= sup;
    Ok(ShiftNorm { norm: sup.sqrt(), growing_tail })
}

/// Pearson data `(B, eta)` and the coefficient `A = (B - eta) / (x - tau x)`.
#[derive(Clone, Debug)]
pub struct PearsonTriple {
    pub b: GridFunction,
    pub eta: GridFunction,
    pub a_coeff: GridFunction,
}

impl PearsonTriple {
    pub fn new(b: GridFunction, eta: GridFunction) -> Self {
        let d = crate::calculus::delta_fn(b.grid());
        let a_coeff = &(&b - &eta) / &d;
        Self { b, eta, a_coeff }
    }
}

/// Solves `T(B rho) = eta rho` along each orbit. At every orbit base
/// `rho = base_value * sign(measure)`, so a positive `base_value` gives a
/// positive measure `sign delta rho` there (group orbits propagate backward
/// with the same relation).
pub fn weight_from_pearson(p: &PearsonTriple, base_value: f64) -> Result<WeightedGrid> {
    let g = p.b.grid().clone();
    p.b.check_same_grid(&p.eta)?;
    if !(base_value.is_finite() && base_value != 0.0) {
        return Err(Error::InvalidInput("weight base value must be finite and nonzero".into()));
    }
    let mut vals = vec![c(f64::NAN); g.len()];
    for seg in g.segments() {
        let base = seg.offset + seg.base_index();
        let orient = if g.measure(base) < 0.0 { -1.0 } else { 1.0 };
        vals[base] = c(base_value * orient);
        for i in base..seg.offset + seg.len() - 1 {
            if !(p.eta.is_valid(i) && p.b.is_valid(i + 1)) {
                break;
            }
            let bn = p.b.value(i + 1);
            if bn.norm() == 0.0 {
                return Err(Error::ZeroDivisor { what: "B(tau x) in the Pearson recursion", index: i + 1 });
            }
            vals[i + 1] = p.eta.value(i) * vals[i] / bn;
        }
        for i in (seg.offset + 1..=base).rev() {
            if !(p.eta.is_valid(i - 1) && p.b.is_valid(i)) {
                break;
            }
            let e = p.eta.value(i - 1);
            if e.norm() == 0.0 {
                return Err(Error::ZeroDivisor { what: "eta(tau^-1 x) in the Pearson recursion", index: i - 1 });
            }
            vals[i - 1] = p.b.value(i) * vals[i] / e;
        }
    }
    let rho = GridFunction::from_values(&g, vals.iter().map(|v| c(v.re)).collect());
    Ok(WeightedGrid::new(rho))
}

/// Both forms of the Pearson residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PearsonResidual {
    /// `d_tau(B rho) - A rho`, measured with the delta-cleared metric.
    pub derivative_form: f64,
    /// `T(B rho) - eta rho`.
    pub shift_form: f64,
}

impl PearsonResidual {
    pub fn max(&self) -> f64 {
        self.derivative_form.max(self.shift_form)
    }
}

pub fn pearson_residual(p: &PearsonTriple, w: &WeightedGrid) -> PearsonResidual {
    let scale = residual::scale_of(&[&p.b, &p.eta, &w.rho]);
    let brho = &p.b * &w.rho;
    let derivative_form = residual::cleared(&tau_derivative(&brho), &(&p.a_coeff * &w.rho), scale);
    let shift_form = residual::pointwise(&brho.shift(1), &(&p.eta * &w.rho), scale);
    PearsonResidual { derivative_form, shift_form }
}

/// `mu_k(x) = d_tau(tau^{-1})(x) B(x) / eta(tau^{-1} x)`.
pub fn adjoint_mu_k(b: &GridFunction, eta: &GridFunction) -> Result<GridFunction> {
    b.check_same_grid(eta)?;
    let prev = eta.shift(-1);
    for i in 0..prev.len() {
        if prev.is_valid(i) && prev.value(i).norm() == 0.0 {
            return Err(Error::ZeroDivisor { what: "eta(tau^-1 x)", index: i });
        }
    }
    Ok(&(&inverse_step_ratio(b.grid()) * b) / &prev)
}

/// Adjoint of `M_f : H_k -> H_{k+1}` when `rho_{k+1} = eta rho_k`: `conj(f) eta psi`.
pub fn mult_adjoint(f: &GridFunction, eta: &GridFunction, psi: &GridFunction) -> GridFunction {
    &(&f.conj() * eta) * psi
}

/// Adjoint of `d_tau : H_k -> H_{k+1}`: `(1 - T*_k) M_{eta / (id - tau)}`, with
/// `T*_k` taken in the level-k weight.
pub fn tau_derivative_adjoint(
    psi: &GridFunction,
    eta: &GridFunction,
    w_k: &WeightedGrid,
) -> Result<GridFunction> {
    let d = crate::calculus::delta_fn(psi.grid());
    let inner = &(eta * psi) / &d;
    Ok(&inner - &adjoint_shift(&inner, w_k)?)
}

/// `sum` of weights for quick diagnostics.
pub fn total_mass(w: &WeightedGrid) -> Complex64 {
    tau_integral(&w.rho).value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{GridSpec, OrbitGrid, TauMap};

    fn half() -> Grid {
        OrbitGrid::build(&TauMap::linear(0.5, 0.0), &GridSpec::semigroup(1.0)).unwrap()
    }

    #[test]
    fn inner_products() {
        let g = half();
        let w = WeightedGrid::uniform(&g, 1.0);
        let one = GridFunction::constant(&g, 1.0);
        assert!((inner_product(&one, &one, &w).value.re - 1.0).abs() < 1e-15);
        let x = GridFunction::identity(&g);
        assert!((inner_product(&x, &one, &w).value.re - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn mu_and_norm() {
        let g = half();
        let w = WeightedGrid::uniform(&g, 1.0);
        let m = mu(&w).unwrap();
        assert!(m.valid_indices().iter().all(|&i| (m.re(i) - 2.0).abs() < 1e-14));
        let n = shift_norm(&w).unwrap();
        assert!((n.norm - 2f64.sqrt()).abs() < 1e-14 && !n.growing_tail);
        let phi = GridFunction::identity(&g);
        assert_eq!(adjoint_shift(&phi, &w).unwrap().re(0), 0.0);
    }

    #[test]
    fn pearson_one_over_x() {
        let g = half();
        let p = PearsonTriple::new(GridFunction::identity(&g), GridFunction::identity(&g));
        let w = weight_from_pearson(&p, 1.0).unwrap();
        for i in 0..30 {
            assert!((w.rho.re(i) * g.x(i) - 1.0).abs() < 1e-13);
        }
        assert!(pearson_residual(&p, &w).max() < 1e-11);
        let mk = adjoint_mu_k(&p.b, &p.eta).unwrap();
        assert!(mk.max_abs_diff(&mu(&w).unwrap()) < 1e-10 * mk.scale());
    }

    #[test]
    fn zero_weight_rejected() {
        let g = half();
        let rho = GridFunction::constant(&g, 1.0).map_x(|x, v| if x == 0.25 { c(0.0) } else { v });
        assert!(matches!(mu(&WeightedGrid::new(rho)), Err(Error::ZeroWeight { index: 2 })));
    }
}
