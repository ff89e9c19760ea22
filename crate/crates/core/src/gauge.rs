//! Gauge functions `g_k` solving the chain equation for a given level, through
//! `xi = phi^2 eta - d g B / (delta delta_-1)`.

use num_complex::Complex64;

use crate::chain::ChainLevel;
use crate::error::{Error, Result};
use crate::grid_fn::{c, GridFunction};

/// `xi` and the gauge it induces.
#[derive(Clone, Debug)]
pub struct XiGauge {
    pub xi: GridFunction,
    /// `g = (phi^2 eta - xi) delta delta_-1 / (d B)`, masked where `delta_-1` is unknown.
    pub g: GridFunction,
}

/// `xi = phi^2 eta - d g B / (delta delta_-1)` for a known gauge.
pub fn xi_from_gauge(level: &ChainLevel, g: &GridFunction, d: Complex64) -> GridFunction {
    let grid = level.grid();
    let p = &(&level.phi * &level.phi) * &level.eta;
    let vals = (0..grid.len())
        .map(|i| match grid.neighbor(i, -1) {
            Some(j) => p.value(i) - d * g.value(i) * level.b.value(i) / (grid.delta(i) * grid.delta(j)),
            None => c(f64::NAN),
        })
        .collect();
    let xi = GridFunction::from_values(grid, vals);
    xi.restrict(|i| p.is_valid(i) && g.is_valid(i) && level.b.is_valid(i))
}

/// Gauge from `xi` with `g = (phi^2 eta - xi) delta delta_-1 / (d B)`.
pub fn gauge_from_xi(level: &ChainLevel, xi: &GridFunction, d: Complex64) -> Result<GridFunction> {
    let grid = level.grid();
    let p = &(&level.phi * &level.phi) * &level.eta;
    let mut vals = vec![c(f64::NAN); grid.len()];
    for (i, v) in vals.iter_mut().enumerate() {
        let Some(j) = grid.neighbor(i, -1) else { continue };
        let (Some(pi), Some(xii), Some(bi)) = (p.get(i), xi.get(i), level.b.get(i)) else { continue };
        if bi.norm() == 0.0 {
            return Err(Error::ZeroDivisor { what: "B in the gauge formula", index: i });
        }
        *v = (pi - xii) * grid.delta(i) * grid.delta(j) / (d * bi);
    }
    Ok(GridFunction::from_values(grid, vals))
}

/// Particular gauge for `h = 1`, `c = 0`: with `P = phi^2 eta`,
/// `K_{n+1} = delta_n delta_{n+1} P_{n+1} / B_{n+1}`, `L_{n+1} = delta_n delta_{n+1} / B_{n+1}`,
/// `R_n = K_{n+1} (x_{n+1} - l) / (x_n - l)` and `E_n = prod_{j >= n} R_j`,
///
/// `xi_n = 1 / ((x_n - l) E_n (1 / xi0 - sum_{m >= n} L_{m+1} / ((x_m - l) E_m)))`,
///
/// so that `xi ~ xi0 / (x - l)` near the limit `l`. Needs `R -> 1`, i.e. `B(l) = eta(l)`
/// when `phi = 1 / delta`; otherwise `SingularLimit`.
pub fn particular_gauge_xi(level: &ChainLevel, d: Complex64, xi0: Complex64) -> Result<XiGauge> {
    let grid = level.grid().clone();
    for i in level.h.valid_indices() {
        if (level.h.value(i) - 1.0).norm() > 1e-14 {
            return Err(Error::InvalidInput("the xi construction needs h = 1".into()));
        }
    }
    if xi0.norm() == 0.0 {
        return Err(Error::InvalidInput("xi0 must be nonzero".into()));
    }
    let p = &(&level.phi * &level.phi) * &level.eta;
    let mut xi = vec![c(f64::NAN); grid.len()];
    for seg in grid.segments() {
        let l = seg.limit;
        // start from the deepest point where P and B are both known
        let lo = seg.offset;
        let Some(hi) = (lo..seg.offset + seg.len()).rev().find(|&i| p.is_valid(i) && level.b.is_valid(i)) else { continue };
        let mut e = c(1.0);
        let mut sum = c(0.0);
        let mut last_r: Option<Complex64> = None;
        xi[hi] = c(1.0) / ((grid.x(hi) - l) * (c(1.0) / xi0));
        for n in (lo..hi).rev() {
            let (Some(pn), Some(bn)) = (p.get(n + 1), level.b.get(n + 1)) else { break };
            if bn.norm() == 0.0 {
                return Err(Error::ZeroDivisor { what: "B in the xi construction", index: n + 1 });
            }
            let ll = grid.delta(n) * grid.delta(n + 1) / bn;
            let r = ll * pn * (grid.x(n + 1) - l) / (grid.x(n) - l);
            last_r.get_or_insert(r);
            e *= r;
            sum += ll / ((grid.x(n) - l) * e);
            xi[n] = c(1.0) / ((grid.x(n) - l) * e * (c(1.0) / xi0 - sum));
        }
        if let Some(r) = last_r {
            if (r - 1.0).norm() > 1e-6 {
                return Err(Error::SingularLimit(format!(
                    "ratio K (x_(n+1) - l) / (x_n - l) tends to {:.6e}, not 1, at the limit {l}",
                    r.re
                )));
            }
        }
    }
    let xi = GridFunction::from_values(&grid, xi);
    let g = gauge_from_xi(level, &xi, d)?;
    Ok(XiGauge { xi, g })
}

/// On a forward orbit the base row of the factorization requires
/// `xi(base) = phi^2 eta (base)`, which fixes the constant `xi0` of
/// [`particular_gauge_xi`]: `1 / xi0 = sum_0 + 1 / ((x_0 - l) E_0 P_0)`.
/// Uses the first segment that starts at an orbit base.
pub fn base_matched_xi0(level: &ChainLevel) -> Result<Complex64> {
    let grid = level.grid();
    let p = &(&level.phi * &level.phi) * &level.eta;
    let seg = grid
        .segments()
        .iter()
        .find(|s| s.has_boundary)
        .ok_or_else(|| Error::InvalidInput("no orbit base to match xi0 against".into()))?;
    let lo = seg.offset;
    let Some(hi) = (lo..seg.offset + seg.len()).rev().find(|&i| p.is_valid(i) && level.b.is_valid(i)) else {
        return Err(Error::InvalidInput("no valid points on the based segment".into()));
    };
    let l = seg.limit;
    let (mut e, mut sum) = (c(1.0), c(0.0));
    for n in (lo..hi).rev() {
        let (Some(pn), Some(bn)) = (p.get(n + 1), level.b.get(n + 1)) else {
            return Err(Error::InvalidInput(format!("xi sweep interrupted at index {}", n + 1)));
        };
        if bn.norm() == 0.0 {
            return Err(Error::ZeroDivisor { what: "B in the xi construction", index: n + 1 });
        }
        let ll = grid.delta(n) * grid.delta(n + 1) / bn;
        e *= ll * pn * (grid.x(n + 1) - l) / (grid.x(n) - l);
        sum += ll / ((grid.x(n) - l) * e);
    }
    let p0 = p.get(lo).ok_or(Error::ZeroDivisor { what: "phi^2 eta at the base", index: lo })?;
    let inv = sum + c(1.0) / ((grid.x(lo) - l) * e * p0);
    if inv.norm() == 0.0 || !inv.re.is_finite() {
        return Err(Error::SingularLimit("base condition needs xi0 = infinity".into()));
    }
    Ok(c(1.0) / inv)
}

/// Mismatch of `xi_n = ((B_{n+1} / (delta_{n+1} delta_n) - c) xi_{n+1} + c P_{n+1}) / (P_{n+1} - xi_{n+1})`,
/// relative to `|xi_n| + max(1, |c|)`.
pub fn xi_recursion_residual(level: &ChainLevel, xi: &GridFunction, c_k: Complex64) -> f64 {
    let grid = level.grid();
    let p = &(&level.phi * &level.phi) * &level.eta;
    let scale = c_k.norm().max(1.0);
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let Some(j) = grid.neighbor(i, 1) else { continue };
        let (Some(x0), Some(x1), Some(p1), Some(b1)) = (xi.get(i), xi.get(j), p.get(j), level.b.get(j)) else { continue };
        let rhs = ((b1 / (grid.delta(j) * grid.delta(i)) - c_k) * x1 + c_k * p1) / (p1 - x1);
        let r = (x0 - rhs).norm() / (x0.norm() + scale);
        if !r.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max(r);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::chain_equation_residual;
    use crate::orbit::{GridSpec, OrbitGrid, TauMap};
    use crate::scenarios::little_q_jacobi;

    #[test]
    fn qhahn_xi_closed_form() {
        let ch = little_q_jacobi(0.5, 0.5, 0.5, 50, 1).unwrap();
        let lvl = &ch.levels[0];
        let xi = xi_from_gauge(lvl, &lvl.g, lvl.d);
        let a0 = &ch.a_polys[0];
        let exact = GridFunction::from_real_fn(&ch.grid, |x| -a0.eval(x) / (0.5 * x)).restrict_to(&xi);
        assert!(xi.max_abs_diff(&exact) < 1e-12 * exact.scale());
        assert!(xi_recursion_residual(lvl, &xi, lvl.c) < 1e-12);
    }

    #[test]
    fn particular_gauge_solves_chain_equation() {
        let grid = OrbitGrid::build(&TauMap::linear(0.5, 0.0), &GridSpec::semigroup(1.0)).unwrap();
        let b = GridFunction::from_real_fn(&grid, |x| 1.0 + x);
        let eta = GridFunction::from_real_fn(&grid, |x| 1.0 + 0.3 * x - 0.2 * x * x);
        let h = GridFunction::constant(&grid, 1.0);
        let level = ChainLevel::from_f(0, b, eta, h.clone(), GridFunction::constant(&grid, 0.0)).unwrap();
        let out = particular_gauge_xi(&level, c(1.0), c(-0.7)).unwrap();
        assert!(xi_recursion_residual(&level, &out.xi, c(0.0)) < 1e-12);
        let r = chain_equation_residual(&level, &h, &out.g, c(0.0), c(1.0));
        assert!(r < 1e-10, "{r}");
        let deep = grid.len() - 3;
        assert!((out.xi.value(deep) * grid.x(deep) + 0.7).norm() < 1e-6);
    }

    #[test]
    fn mismatched_limit_is_singular() {
        let grid = OrbitGrid::build(&TauMap::linear(0.5, 0.0), &GridSpec::semigroup(1.0)).unwrap();
        let b = GridFunction::from_real_fn(&grid, |x| 2.0 + x);
        let eta = GridFunction::from_real_fn(&grid, |x| 1.0 + x);
        let h = GridFunction::constant(&grid, 1.0);
        let level = ChainLevel::from_f(0, b, eta, h, GridFunction::constant(&grid, 0.0)).unwrap();
        assert!(matches!(particular_gauge_xi(&level, c(1.0), c(1.0)), Err(Error::SingularLimit(_))));
    }

    #[test]
    fn base_matched_gauge_factorizes_at_the_base() {
        use crate::chain::{advance_level, factorization_residual};
        let grid = OrbitGrid::build(&TauMap::linear(0.5, 0.0), &GridSpec::semigroup(1.0)).unwrap();
        let b = GridFunction::from_real_fn(&grid, |x| 1.0 + x);
        let eta = GridFunction::from_real_fn(&grid, |x| 1.0 + 0.3 * x - 0.2 * x * x);
        let h = GridFunction::constant(&grid, 1.0);
        let level = ChainLevel::from_f(0, b, eta, h.clone(), GridFunction::constant(&grid, 0.0)).unwrap();
        let p0 = level.phi.value(0) * level.phi.value(0) * level.eta.value(0);
        let xi0 = base_matched_xi0(&level).unwrap();
        let out = particular_gauge_xi(&level, c(1.0), xi0).unwrap();
        assert!((out.xi.value(0) - p0).norm() < 1e-12 * p0.norm());
        let linked = level.with_link(out.g.clone(), c(0.0), c(1.0));
        let next = advance_level(&linked, &out.g, &h, c(1.0)).unwrap();
        assert!(factorization_residual(&linked, &next, 5, 3).unwrap().residual < 1e-12);
        // any other constant breaks the base row
        let off = particular_gauge_xi(&linked, c(1.0), xi0 * 1.1).unwrap();
        let next = advance_level(&linked.clone().with_link(off.g.clone(), c(0.0), c(1.0)), &off.g, &h, c(1.0)).unwrap();
        assert!(factorization_residual(&linked, &next, 5, 3).unwrap().residual > 1e-8);
    }
}
