//! Changes of variables `kappa : X -> Y`: conjugated maps, transported chain
//! levels and solutions, and a fixed-point count obstruction to equivalence.

use std::fmt;
use std::sync::Arc;

use crate::chain::ChainLevel;
use crate::error::{Error, Result};
use crate::grid_fn::GridFunction;
use crate::hilbert::WeightedGrid;
use crate::orbit::{Grid, OrbitGrid, RealFn, TauMap};

/// A homeomorphism `kappa` given as a forward/inverse pair.
#[derive(Clone)]
pub struct VariableChange {
    pub name: String,
    pub kappa: RealFn,
    pub kappa_inv: RealFn,
    /// Source interval `X`.
    pub x_domain: (f64, f64),
    /// Target interval `Y`.
    pub y_domain: (f64, f64),
}

impl fmt::Debug for VariableChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VariableChange").field("name", &self.name).field("x", &self.x_domain).field("y", &self.y_domain).finish()
    }
}

/// Result of sampling a variable change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangeCheck {
    /// `max |kappa_inv(kappa(x)) - x| / (1 + |x|)`.
    pub roundtrip: f64,
    /// Strictly monotone on the samples.
    pub monotone: bool,
}

impl VariableChange {
    pub fn new(
        name: impl Into<String>,
        x_domain: (f64, f64),
        y_domain: (f64, f64),
        kappa: impl Fn(f64) -> f64 + Send + Sync + 'static,
        kappa_inv: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), kappa: Arc::new(kappa), kappa_inv: Arc::new(kappa_inv), x_domain, y_domain }
    }

    pub fn identity() -> Self {
        let inf = f64::INFINITY;
        Self::new("identity", (-inf, inf), (-inf, inf), |x| x, |y| y)
    }

    /// `ln : (0, inf) -> R`.
    pub fn ln() -> Self {
        let inf = f64::INFINITY;
        Self::new("ln", (0.0, inf), (-inf, inf), f64::ln, f64::exp)
    }

    /// `exp : R -> (0, inf)`.
    pub fn exp() -> Self {
        let inf = f64::INFINITY;
        Self::new("exp", (-inf, inf), (0.0, inf), f64::exp, f64::ln)
    }

    /// `x -> p x + q`, `p != 0`.
    pub fn affine(p: f64, q: f64) -> Result<Self> {
        if p == 0.0 || !p.is_finite() || !q.is_finite() {
            return Err(Error::InvalidInput("affine change needs finite p != 0 and finite q".into()));
        }
        let inf = f64::INFINITY;
        Ok(Self::new(format!("affine({p},{q})"), (-inf, inf), (-inf, inf), move |x| p * x + q, move |y| (y - q) / p))
    }

    /// `x -> x^p` on `(0, inf)`, `p != 0`.
    pub fn powerlaw(p: f64) -> Result<Self> {
        if p == 0.0 || !p.is_finite() {
            return Err(Error::InvalidInput("power-law change needs finite p != 0".into()));
        }
        let inf = f64::INFINITY;
        Ok(Self::new(format!("powerlaw({p})"), (0.0, inf), (0.0, inf), move |x| x.powf(p), move |y| y.powf(1.0 / p)))
    }

    pub fn apply(&self, x: f64) -> f64 {
        (self.kappa)(x)
    }

    pub fn invert(&self, y: f64) -> f64 {
        (self.kappa_inv)(y)
    }

    /// `kappa2 . self`.
    pub fn then(&self, next: &VariableChange) -> VariableChange {
        let (k1, k2) = (self.kappa.clone(), next.kappa.clone());
        let (i1, i2) = (self.kappa_inv.clone(), next.kappa_inv.clone());
        VariableChange {
            name: format!("{}.{}", next.name, self.name),
            kappa: Arc::new(move |x| k2(k1(x))),
            kappa_inv: Arc::new(move |y| i1(i2(y))),
            x_domain: self.x_domain,
            y_domain: next.y_domain,
        }
    }

    /// Round trip and monotonicity on `samples` points of `[lo, hi]`.
    pub fn check(&self, lo: f64, hi: f64, samples: usize) -> ChangeCheck {
        let n = samples.max(2);
        let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| self.apply(x)).collect();
        let roundtrip = xs.iter().zip(&ys).map(|(&x, &y)| (self.invert(y) - x).abs() / (1.0 + x.abs())).fold(0.0, f64::max);
        let inc = ys.windows(2).all(|w| w[1] > w[0]);
        let dec = ys.windows(2).all(|w| w[1] < w[0]);
        ChangeCheck { roundtrip, monotone: inc || dec }
    }

    fn image_of(&self, (lo, hi): (f64, f64)) -> (f64, f64) {
        let (a, b) = (self.apply(lo), self.apply(hi));
        (a.min(b), a.max(b))
    }
}

/// `tau~ = kappa . tau . kappa^-1` with inverse `kappa . tau^-1 . kappa^-1`, on
/// the image of `dom tau` intersected with `X`.
pub fn conjugate_map(map: &TauMap, ch: &VariableChange) -> Result<TauMap> {
    let (lo, hi) = map.domain();
    let (xl, xh) = (lo.max(ch.x_domain.0), hi.min(ch.x_domain.1));
    if !(xl < xh) {
        return Err(Error::DomainEscape { point: xl, lo: ch.x_domain.0, hi: ch.x_domain.1 });
    }
    let domain = ch.image_of((xl, xh));
    let (k, ki) = (ch.kappa.clone(), ch.kappa_inv.clone());
    let (k2, ki2) = (ch.kappa.clone(), ch.kappa_inv.clone());
    let (f, g) = (map.forward_fn(), map.inverse_fn());
    Ok(TauMap::new(
        format!("{}~{}", map.name(), ch.name),
        domain,
        move |y| k(f(ki(y))),
        move |y| k2(g(ki2(y))),
    ))
}

/// The grid `kappa(source)` for the conjugated map.
pub fn image_grid(source: &OrbitGrid, ch: &VariableChange) -> Result<Grid> {
    let map = conjugate_map(source.map(), ch)?;
    OrbitGrid::image(source, &map, |x| ch.apply(x))
}

fn check_correspondence(source: &Grid, target: &Grid, ch: &VariableChange) -> Result<()> {
    if source.len() != target.len() {
        return Err(Error::GridMismatch);
    }
    for i in 0..source.len() {
        let y = ch.apply(source.x(i));
        let t = target.x(i);
        if !((y - t).abs() <= 1e-12 * (1.0 + t.abs()) || (y == t)) {
            return Err(Error::GridMismatch);
        }
    }
    Ok(())
}

fn rehome(f: &GridFunction, target: &Grid) -> GridFunction {
    GridFunction::from_parts(target, f.values().to_vec(), f.mask().to_vec())
}

/// `d_tau~(kappa^-1)` on the target grid, `delta_x / delta_y` per point.
pub fn inverse_derivative(source: &Grid, target: &Grid) -> GridFunction {
    GridFunction::from_real(target, (0..target.len()).map(|i| source.delta(i) / target.delta(i)).collect())
}

/// `(d_tau kappa) . kappa^-1` on the target grid, `delta_y / delta_x` per point.
pub fn kappa_derivative(source: &Grid, target: &Grid) -> GridFunction {
    GridFunction::from_real(target, (0..target.len()).map(|i| target.delta(i) / source.delta(i)).collect())
}

/// `rho~ = d_tau~(kappa^-1) K^-1 rho`, `B~ = [T~^-1 d_tau~(kappa^-1) / d_tau~(kappa^-1)] K^-1 B`,
/// `eta~ = K^-1 eta`, `g~ = K^-1 g`, `h~ = K^-1 (h d_tau kappa)`, `f~ = K^-1 f`; `c`, `d` unchanged.
pub fn transport_level(level: &ChainLevel, ch: &VariableChange, target: &Grid) -> Result<ChainLevel> {
    let source = level.grid().clone();
    check_correspondence(&source, target, ch)?;
    let dk = inverse_derivative(&source, target);
    let rho = &dk * &rehome(&level.w.rho, target);
    let b = &(&dk.shift(-1) / &dk) * &rehome(&level.b, target);
    let eta = rehome(&level.eta, target);
    let h = &rehome(&level.h, target) * &kappa_derivative(&source, target);
    let f = rehome(&level.f, target);
    let phi = &f + &(&h / &crate::calculus::delta_fn(target));
    let out = ChainLevel::with_weight(level.k, WeightedGrid::new(rho), b, eta, h, phi)?;
    Ok(out.with_link(rehome(&level.g, target), level.c, level.d))
}

/// `psi~ = K^-1 psi` on the target grid.
pub fn transport_solution(psi: &GridFunction, ch: &VariableChange, target: &Grid) -> Result<GridFunction> {
    check_correspondence(psi.grid(), target, ch)?;
    Ok(rehome(psi, target))
}

/// Outcome of the fixed-point comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Verdict {
    NotEquivalent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ObstructionReport {
    pub fixed_points_a: usize,
    pub fixed_points_b: usize,
    pub verdict: Verdict,
}

/// Estimated number of fixed points of `map` on `[lo, hi]`: runs of samples
/// with `|tau(x) - x| <= 1e-12 (1 + |x|)` plus strict sign changes between
/// neighbouring samples.
pub fn count_fixed_points(map: &TauMap, lo: f64, hi: f64, resolution: usize) -> usize {
    let n = resolution.max(2);
    let sign = |x: f64| {
        let v = map.forward(x) - x;
        if v.abs() <= 1e-12 * (1.0 + x.abs()) {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    };
    let s: Vec<i32> = (0..=n).map(|i| sign(lo + (hi - lo) * i as f64 / n as f64)).collect();
    let mut count = 0;
    for i in 0..s.len() {
        if s[i] == 0 && (i == 0 || s[i - 1] != 0) {
            count += 1;
        }
        if i > 0 && s[i] * s[i - 1] < 0 {
            count += 1;
        }
    }
    count
}

/// A conjugating `kappa` maps fixed points to fixed points, so different
/// counts on the scanned intervals rule out equivalence.
pub fn equivalence_obstruction(a: &TauMap, a_range: (f64, f64), b: &TauMap, b_range: (f64, f64), resolution: usize) -> ObstructionReport {
    let fa = count_fixed_points(a, a_range.0, a_range.1, resolution);
    let fb = count_fixed_points(b, b_range.0, b_range.1, resolution);
    let verdict = if fa != fb { Verdict::NotEquivalent } else { Verdict::Inconclusive };
    ObstructionReport { fixed_points_a: fa, fixed_points_b: fb, verdict }
}

/// The cubic `2/5 y^3 - 3/5 y^2 + 6/5 y` on `[0, 1]`, with fixed points 0, 1/2 and 1.
pub fn three_fixed_point_cubic() -> TauMap {
    let f = |y: f64| 0.4 * y * y * y - 0.6 * y * y + 1.2 * y;
    TauMap::new("cubic", (0.0, 1.0), f, move |z: f64| {
        // increasing on [0, 1]; invert by bisection
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < z {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_round_trip() {
        for ch in [VariableChange::ln(), VariableChange::powerlaw(2.5).unwrap(), VariableChange::affine(-2.0, 1.0).unwrap()] {
            let r = ch.check(0.1, 3.0, 1000);
            assert!(r.roundtrip < 1e-11 && r.monotone, "{ch:?}");
        }
        assert!(VariableChange::exp().check(-3.0, 3.0, 1000).monotone);
        assert!(VariableChange::affine(0.0, 1.0).is_err());
    }

    #[test]
    fn translation_conjugate() {
        let m = conjugate_map(&TauMap::linear(0.5, 0.0), &VariableChange::ln()).unwrap();
        for y in [-2.0, 0.0, 1.5] {
            assert!((m.forward(y) - (y + 0.5f64.ln())).abs() < 1e-14);
            assert!((m.inverse(m.forward(y)) - y).abs() < 1e-14);
        }
        let p = conjugate_map(&TauMap::linear(0.5, 0.0), &VariableChange::exp()).unwrap();
        assert!((p.forward(3.0) - 3f64.powf(0.5)).abs() < 1e-14);
    }

    #[test]
    fn fixed_point_counts() {
        let sq = TauMap::power(2.0);
        let r = equivalence_obstruction(&sq, (0.0, 1.0), &three_fixed_point_cubic(), (0.0, 1.0), 1000);
        assert_eq!((r.fixed_points_a, r.fixed_points_b, r.verdict), (2, 3, Verdict::NotEquivalent));
        let r = equivalence_obstruction(&sq, (0.0, 1.0), &sq, (0.0, 1.0), 999);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let r = equivalence_obstruction(&TauMap::linear(0.5, 0.0), (0.0, 1.0), &TauMap::linear(1.0 / 3.0, 0.0), (0.0, 1.0), 1000);
        assert_eq!((r.fixed_points_a, r.verdict), (1, Verdict::Inconclusive));
        assert_eq!(count_fixed_points(&three_fixed_point_cubic(), 0.0, 1.0, 999), 3);
    }
}
