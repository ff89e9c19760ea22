//! Ready-made chains with closed-form oracles: the q-Hahn (little q-Jacobi)
//! chain, the constant-gauge q-chain with kernel eigenfunctions, and the
//! fractional map `x -> a x / ((a - 1) x + 1)`.

use num_complex::Complex64;

use crate::calculus::delta_fn;
use crate::chain::{apply_astar, ChainLevel, EigenPair};
use crate::error::{Error, Result};
use crate::grid_fn::{c, GridFunction};
use crate::hilbert::{weight_from_pearson, PearsonTriple, WeightedGrid};
use crate::orbit::{Grid, GridSpec, OrbitGrid, TauMap};

/// `(alpha; q)_n`; `None` means the infinite product, truncated once `|q^n alpha| < 1e-17`.
pub fn qpochhammer(alpha: Complex64, q: f64, n: Option<usize>) -> Complex64 {
    let mut p = c(1.0);
    let mut term = alpha;
    match n {
        Some(n) => {
            for _ in 0..n {
                p *= c(1.0) - term;
                term *= q;
            }
        }
        None => {
            assert!(q > 0.0 && q < 1.0, "infinite q-Pochhammer needs 0 < q < 1");
            while term.norm() >= 1e-17 {
                p *= c(1.0) - term;
                term *= q;
            }
        }
    }
    p
}

/// Polynomial with coefficients in increasing degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &a| acc * x + a)
    }

    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|&a| a != 0.0).unwrap_or(0)
    }

    fn coeff(&self, i: usize) -> f64 {
        self.0.get(i).copied().unwrap_or(0.0)
    }
}

/// The q-Hahn chain on the orbit of `base` under `x -> q x`.
#[derive(Clone, Debug)]
pub struct QHahnChain {
    pub q: f64,
    pub grid: Grid,
    pub levels: Vec<ChainLevel>,
    /// `B_k` and the Pearson coefficient `A_k` per level.
    pub b_polys: Vec<Poly>,
    pub a_polys: Vec<Poly>,
    pub c: Vec<f64>,
}

impl QHahnChain {
    /// `lambda_n = sum_{j < n} c_j`, the eigenvalue of the degree-n polynomial at level 0.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        // an empty float sum is -0.0
        self.c[..n].iter().sum::<f64>() + 0.0
    }

    /// `P_n = A_0* ... A_{n-1}* 1`, the degree-n polynomial at level 0.
    pub fn polynomial(&self, n: usize) -> Result<GridFunction> {
        if n >= self.levels.len() {
            return Err(Error::InvalidInput(format!("chain has {} levels, need {}", self.levels.len(), n + 1)));
        }
        let mut p = GridFunction::constant(&self.grid, 1.0);
        for k in (0..n).rev() {
            p = apply_astar(&self.levels[k], &p)?;
        }
        Ok(p)
    }

    /// Eigenpair `(P_n, lambda_n)` at level `k`, built from the constant at level `k + n`.
    pub fn eigenpair(&self, k: usize, n: usize) -> Result<EigenPair> {
        let mut p = GridFunction::constant(&self.grid, 1.0);
        for j in (k..k + n).rev() {
            p = apply_astar(&self.levels[j], &p)?;
        }
        let lambda: f64 = self.c[k..k + n].iter().sum();
        EigenPair::new(&self.levels[k], p, c(lambda))
    }
}

/// Builds levels `0..=levels` with `h = 1`, `f = 0`, `g = 1/q`, `d = 1`, so that
/// `B_k = B_0 / q^k`, `eta_k(x) = eta_0(q^k x) / q^k` with
/// `eta_0 = B_0 - (1 - q) x A_0`, and `c_k = -d_q A_k`.
/// The level weights are `rho_0` from the Pearson equation and `rho_{k+1} = eta_k rho_k`.
pub fn qhahn_chain(q: f64, b0: &[f64], a0: &[f64], base: f64, depth: usize, levels: usize) -> Result<QHahnChain> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidInput("q-Hahn chain needs 0 < q < 1".into()));
    }
    if b0.len() > 3 || a0.len() > 2 {
        return Err(Error::InvalidInput("B_0 must have degree <= 2 and A_0 degree <= 1".into()));
    }
    let grid = OrbitGrid::build(&TauMap::linear(q, 0.0), &GridSpec::semigroup(base).with_max_depth(depth))?;
    let bp = Poly(b0.to_vec());
    let ap = Poly(a0.to_vec());
    let eta0 = Poly((0..3).map(|i| bp.coeff(i) - (1.0 - q) * if i >= 1 { ap.coeff(i - 1) } else { 0.0 }).collect());
    let phi = GridFunction::from_real_fn(&grid, |x| 1.0 / ((1.0 - q) * x));
    let h = GridFunction::constant(&grid, 1.0);
    let g = GridFunction::constant(&grid, 1.0 / q);

    let mut out = QHahnChain { q, grid: grid.clone(), levels: Vec::new(), b_polys: Vec::new(), a_polys: Vec::new(), c: Vec::new() };
    let mut rho: Option<WeightedGrid> = None;
    for k in 0..=levels {
        let qk = q.powi(k as i32);
        let bk = Poly((0..3).map(|i| bp.coeff(i) / qk).collect());
        let ek = Poly((0..3).map(|i| eta0.coeff(i) * qk.powi(i as i32) / qk).collect());
        // (B_k - eta_k) / ((1 - q) x); the constant terms cancel
        let ak = Poly(vec![(bk.coeff(1) - ek.coeff(1)) / (1.0 - q), (bk.coeff(2) - ek.coeff(2)) / (1.0 - q)]);
        let ck = -ak.coeff(1);
        let b = GridFunction::from_real_fn(&grid, |x| bk.eval(x));
        let eta = GridFunction::from_real_fn(&grid, |x| ek.eval(x));
        let w = match rho.take() {
            None => weight_from_pearson(&PearsonTriple::new(b.clone(), eta.clone()), 1.0)?,
            Some(w) => w,
        };
        let next_rho = WeightedGrid::new(&eta * &w.rho);
        let level = ChainLevel::with_weight(k as i32, w, b, eta, h.clone(), phi.clone())?.with_link(g.clone(), c(ck), c(1.0));
        out.levels.push(level);
        out.b_polys.push(bk);
        out.a_polys.push(ak);
        out.c.push(ck);
        rho = Some(next_rho);
    }
    Ok(out)
}

/// Little q-Jacobi data on the orbit of 1: `B_0 = x (1 - x)`,
/// `eta_0 = a q x (1 - b q x)`, weight `rho(q^n) = a^n (b q; q)_n / (q; q)_n`.
pub fn little_q_jacobi(q: f64, a: f64, b: f64, depth: usize, levels: usize) -> Result<QHahnChain> {
    // A_0 = (B_0 - eta_0) / ((1 - q) x)
    let a0 = [(1.0 - a * q) / (1.0 - q), (a * b * q * q - 1.0) / (1.0 - q)];
    qhahn_chain(q, &[0.0, 1.0, -1.0], &a0, 1.0, depth, levels)
}

/// Constant-gauge q-chain: `tau = q x`, `h = 1`, `g = q^-2`, `d = 1`, `B_k = q^{-2k} B_0`,
/// `phi_k = q^{2k} phi_0(q^k x)` with `phi_0 = 1 / ((1 - q) x)`, and
/// `phi_k^2 eta_k = alpha_k = b / x^2 + c_k / (1 - q^2)`, `c_k = q^{2k} c_0`.
#[derive(Clone, Debug)]
pub struct ConstGauge {
    pub q: f64,
    pub b: f64,
    pub c0: f64,
    pub b0: f64,
    pub grid: Grid,
    pub levels: Vec<ChainLevel>,
}

impl ConstGauge {
    pub fn c(&self, k: usize) -> f64 {
        self.q.powi(2 * k as i32) * self.c0
    }

    /// `alpha_k(x) = b / x^2 + c_k / (1 - q^2)`.
    pub fn alpha(&self, k: usize, x: f64) -> f64 {
        self.b / (x * x) + self.c(k) / (1.0 - self.q * self.q)
    }

    /// `beta_root = sqrt(b (1 - q^2) / |c_k|)`.
    pub fn beta_root(&self, k: usize) -> f64 {
        (self.b * (1.0 - self.q * self.q) / self.c(k).abs()).sqrt()
    }

    /// `gamma_gauge = (1 - q)^2 b / (q^2 B_k)`.
    pub fn gamma_gauge(&self, k: usize) -> f64 {
        let bk = self.b0 / self.q.powi(2 * k as i32);
        (1.0 - self.q).powi(2) * self.b / (self.q * self.q * bk)
    }

    /// Kernel of `A_{k-1}*` at level `k` (`k >= 1`): `psi_m = B_{k-1} psi_{m-1} / (delta_m eta_{k-1} phi_{k-1})`,
    /// started at 1 on the first stored point; eigenvalue `-c_{k-1}` of `A_k* A_k`.
    pub fn kernel_pair(&self, k: usize) -> Result<EigenPair> {
        if k == 0 || k >= self.levels.len() {
            return Err(Error::InvalidInput("kernel level must be in 1..levels".into()));
        }
        let prev = &self.levels[k - 1];
        let g = &self.grid;
        let mut vals = vec![c(f64::NAN); g.len()];
        vals[0] = c(1.0);
        for m in 1..g.len() {
            vals[m] = prev.b.value(m) * vals[m - 1] / (g.delta(m) * prev.eta.value(m) * prev.phi.value(m));
        }
        let psi = GridFunction::from_values(g, vals);
        EigenPair::new(&self.levels[k], psi, c(-self.c(k - 1)))
    }

    /// `mu_norm x^s (x / beta_root; q)_inf (-x / beta_root; q)_inf` with `q^s = 1 / gamma_gauge`,
    /// normalized to match `psi^2 rho_k` at the first stored point.
    pub fn kernel_density_oracle(&self, k: usize, psi: &GridFunction) -> GridFunction {
        let q = self.q;
        let beta = self.beta_root(k);
        let s = -self.gamma_gauge(k).ln() / q.ln();
        let shape = |x: f64| x.powf(s) * (qpochhammer(c(x / beta), q, None) * qpochhammer(c(-x / beta), q, None)).re;
        let rho = &self.levels[k].w.rho;
        let x0 = self.grid.x(0);
        let mu_norm = (psi.value(0) * psi.value(0) * rho.value(0)).re / shape(x0);
        GridFunction::from_real_fn(&self.grid, |x| mu_norm * shape(x))
    }
}

/// Builds the constant-gauge chain on the group orbit of `x0` with one
/// backward point. `B_0` is chosen as `(1 - q)^2 b / q^{2 (kernel_level - 1)}`
/// so that `gamma_gauge = 1` at `kernel_level`.
pub fn const_g_scenario(q: f64, b: f64, c0: f64, x0: f64, depth: usize, levels: usize, kernel_level: usize) -> Result<ConstGauge> {
    if !(q > 0.0 && q < 1.0) || b <= 0.0 || c0 >= 0.0 || kernel_level == 0 {
        return Err(Error::InvalidInput("constant-gauge chain needs 0 < q < 1, b > 0, c0 < 0, kernel level >= 1".into()));
    }
    let spec = GridSpec::group(x0).with_max_depth(depth).with_backward_depth(1);
    let grid = OrbitGrid::build(&TauMap::linear(q, 0.0), &spec)?;
    let b0 = (1.0 - q).powi(2) * b / q.powi(2 * (kernel_level as i32 - 1));
    let mut sc = ConstGauge { q, b, c0, b0, grid: grid.clone(), levels: Vec::new() };
    let h = GridFunction::constant(&grid, 1.0);
    let g = GridFunction::constant(&grid, q.powi(-2));
    let mut rho: Option<WeightedGrid> = None;
    for k in 0..=levels {
        let q2k = q.powi(2 * k as i32);
        let qk = q.powi(k as i32);
        let phi = GridFunction::from_real_fn(&grid, |x| q2k / ((1.0 - q) * qk * x));
        let bk = GridFunction::constant(&grid, b0 / q2k);
        let alpha = GridFunction::from_real_fn(&grid, |x| sc.alpha(k, x));
        let eta = &alpha / &(&phi * &phi);
        let w = match rho.take() {
            None => weight_from_pearson(&PearsonTriple::new(bk.clone(), eta.clone()), 1.0)?,
            Some(w) => w,
        };
        rho = Some(WeightedGrid::new(&eta * &w.rho));
        let level = ChainLevel::with_weight(k as i32, w, bk, eta, h.clone(), phi)?.with_link(g.clone(), c(sc.c(k)), c(1.0));
        sc.levels.push(level);
    }
    Ok(sc)
}

/// Closed forms for the fractional map `tau(x) = a x / ((a - 1) x + 1)`.
#[derive(Clone, Copy, Debug)]
pub struct Fractional {
    pub a: f64,
}

impl Fractional {
    pub fn map(&self) -> TauMap {
        TauMap::fractional(self.a)
    }

    /// `tau^k(x) = a^k x / ((a^k - 1) x + 1)`.
    pub fn tau_k(&self, k: i32, x: f64) -> f64 {
        let ak = self.a.powi(k);
        ak * x / ((ak - 1.0) * x + 1.0)
    }

    /// `(d_tau tau)(x) = a / ((a^2 - 1) x + 1)`.
    pub fn dtau_tau(&self, x: f64) -> f64 {
        self.a / ((self.a * self.a - 1.0) * x + 1.0)
    }

    /// `(d_tau tau)(tau^k x) = a ((a^k - 1) x + 1) / ((a^{k+2} - 1) x + 1)`.
    pub fn dtau_tau_at_k(&self, k: i32, x: f64) -> f64 {
        let a = self.a;
        a * ((a.powi(k) - 1.0) * x + 1.0) / ((a.powi(k + 2) - 1.0) * x + 1.0)
    }

    /// Attracting fixed point: 0 for `a < 1`, 1 for `a > 1`.
    pub fn limit(&self) -> f64 {
        if self.a < 1.0 {
            0.0
        } else {
            1.0
        }
    }

    /// Closed-form solution of `alpha(x) = r (d_tau tau(x))^{lambda+1} alpha(tau x)`,
    /// normalized to 1 at the limit point.
    pub fn alpha_closed(&self, lambda: i32, x: f64) -> f64 {
        let a = self.a;
        let base = if a < 1.0 { ((a - 1.0) * x + 1.0) / ((1.0 - x) * (1.0 - x)) } else { ((a - 1.0) * x + 1.0) / (a * x * x) };
        base.powi(lambda + 1)
    }

    /// Ratio `b_k / a_k` for which `alpha_closed` solves the recursion:
    /// `a^{-(lambda+1)}` for `a < 1` and `a^{lambda+1}` for `a > 1`.
    pub fn ratio(&self, lambda: i32) -> f64 {
        if self.a < 1.0 {
            self.a.powi(-(lambda + 1))
        } else {
            self.a.powi(lambda + 1)
        }
    }

    /// Consistency gate: the recursion factor tends to 1 at the limit point,
    /// `r (d_tau tau(tau^inf))^{lambda+1} = 1`.
    pub fn gate(&self, ratio: f64, lambda: i32) -> f64 {
        (ratio * self.dtau_tau(self.limit()).powi(lambda + 1) - 1.0).abs()
    }

    /// `product_j ((a^j - 1) x + 1)((a^{j+1} - 1) x + 1) / den_j` with `den_j = (x - 1)^2`
    /// for `a < 1` and `a^{2j+1} x^2` for `a > 1`: kernel of `A_k` when
    /// `phi_k = 1 / (s_k (tau^k x - tau^{k+1} x))` with `s_k = a^{-k}` or `a^k`.
    pub fn kernel_psi(&self, k: i32, x: f64) -> f64 {
        let a = self.a;
        (0..k)
            .map(|j| {
                let num = ((a.powi(j) - 1.0) * x + 1.0) * ((a.powi(j + 1) - 1.0) * x + 1.0);
                if a < 1.0 {
                    num / ((x - 1.0) * (x - 1.0))
                } else {
                    num / (a.powi(2 * j + 1) * x * x)
                }
            })
            .product()
    }

    /// The product `D_k G_k` for which `kernel_psi` solves the kernel equation.
    pub fn kernel_scale(&self, k: i32) -> f64 {
        if self.a < 1.0 {
            self.a.powi(-k)
        } else {
            self.a.powi(k)
        }
    }

    /// `phi_k = 1 / (s (tau^k x - tau^{k+1} x))` on `grid`.
    pub fn kernel_phi(&self, grid: &Grid, k: i32, s: f64) -> GridFunction {
        GridFunction::from_real_fn(grid, |x| {
            let y = self.tau_k(k, x);
            1.0 / (s * (y - self.tau_k(1, y)))
        })
    }
}

/// Chain for the fractional map on the group orbit of 1/2 with
/// `B_k = b_k (x - tau x)(tau^{-1} x - x)`, `phi_k^2 eta_k = a_k`, `h = 1`,
/// constant `g_k`, `c_k = c`, `d_k = d`. The chain equation reduces to
/// `b X^2 + (c - a - b) X + a = 0` for `X = d g`; the larger real root is taken.
/// Then `a_{k+1} = a_k / (d^2 g)` and `b_{k+1} = g b_k`.
pub fn fractional_chain(map_a: f64, a0: f64, b0: f64, c_k: f64, d: f64, depth: usize, levels: usize) -> Result<(Grid, Vec<ChainLevel>)> {
    let map = TauMap::fractional(map_a);
    let grid = OrbitGrid::build(&map, &GridSpec::group(0.5).with_max_depth(depth).with_backward_depth(depth))?;
    let delta = delta_fn(&grid);
    let back = crate::hilbert::inverse_step_ratio(&grid);
    let dd = &(&delta * &delta) * &back;
    let h = GridFunction::constant(&grid, 1.0);
    let mut phi = &GridFunction::constant(&grid, 1.0) / &delta;
    let (mut ak, mut bk) = (a0, b0);
    let mut out: Vec<ChainLevel> = Vec::new();
    let mut rho: Option<WeightedGrid> = None;
    for k in 0..=levels {
        let disc = (c_k - ak - bk).powi(2) - 4.0 * bk * ak;
        if disc < 0.0 {
            return Err(Error::InvalidInput(format!("no real gauge at level {k}")));
        }
        let x = (-(c_k - ak - bk) + disc.sqrt()) / (2.0 * bk);
        let g = x / d;
        let b = &dd * bk;
        let eta = &(&GridFunction::constant(&grid, ak) / &phi) / &phi;
        let w = match rho.take() {
            None => weight_from_pearson(&PearsonTriple::new(b.clone(), eta.clone()), 1.0)?,
            Some(w) => w,
        };
        rho = Some(WeightedGrid::new(&eta * &w.rho));
        let gk = GridFunction::constant(&grid, g);
        let next_phi = &(&phi / &gk).shift(1) * (1.0 / d);
        out.push(ChainLevel::with_weight(k as i32, w, b, eta, h.clone(), phi)?.with_link(gk, c(c_k), c(d)));
        phi = next_phi;
        ak /= d * d * g;
        bk *= g;
    }
    Ok((grid, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pochhammer() {
        assert_eq!(qpochhammer(c(0.3), 0.5, Some(0)), c(1.0));
        assert_eq!(qpochhammer(c(1.0), 0.5, Some(3)), c(0.0));
        let mut p = 1.0;
        for n in 0..200 {
            p *= 1.0 - 0.5 * 0.5f64.powi(n);
        }
        assert!((qpochhammer(c(0.5), 0.5, None).re - p).abs() < 1e-10);
        assert!((p - 0.288_788_095_1).abs() < 1e-9);
    }

    #[test]
    fn qhahn_constants() {
        let ch = little_q_jacobi(0.5, 0.5, 0.5, 60, 3).unwrap();
        for (k, ck) in ch.c.iter().enumerate() {
            let expected = (1.0 - 0.25 * 0.5f64.powi(2 * k as i32 + 2)) / (0.5f64.powi(k as i32) * 0.5);
            assert!((ck - expected).abs() < 1e-12);
        }
        assert!(ch.a_polys.iter().all(|p| p.degree() <= 1));
        assert!(ch.b_polys.iter().all(|p| p.degree() <= 2));
    }

    #[test]
    fn fractional_closed_forms() {
        let f = Fractional { a: 2.0 };
        assert!((f.tau_k(2, 0.5) - 0.8).abs() < 1e-15);
        assert!((f.dtau_tau(0.5) - 0.8).abs() < 1e-15);
        for a in [0.5, 2.0] {
            let f = Fractional { a };
            for lambda in [-1, 0, 1] {
                assert!(f.gate(f.ratio(lambda), lambda) < 1e-15);
            }
        }
    }
}
