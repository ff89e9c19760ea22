//! Ladder operators `A_k`, `A_k*`, the chain recurrences and the maps between
//! a chain level and the coefficients of the second-order equation
//! `alpha psi(tau x) + beta psi(x) + gamma psi(tau^{-1} x) = lambda psi(x)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bands::Tridiag;
use crate::calculus::delta_fn;
use crate::error::{Error, Result};
use crate::grid_fn::{c, GridFunction};
use crate::hilbert::{adjoint_mu_k, inner_product, norm, weight_from_pearson, PearsonTriple, WeightedGrid};
use crate::orbit::Grid;
use crate::residual;

/// One level of the factorization chain, plus the constants linking it to the next.
#[derive(Clone, Debug)]
pub struct ChainLevel {
    pub k: i32,
    pub w: WeightedGrid,
    pub b: GridFunction,
    pub eta: GridFunction,
    pub h: GridFunction,
    pub f: GridFunction,
    pub phi: GridFunction,
    /// Gauge `g_k` with `B_{k+1} = g_k B_k`.
    pub g: GridFunction,
    pub c: Complex64,
    pub d: Complex64,
}

impl ChainLevel {
    /// Level from `(B, eta, h, phi)`; the weight solves the Pearson equation
    /// with value 1 at every orbit base.
    pub fn from_phi(k: i32, b: GridFunction, eta: GridFunction, h: GridFunction, phi: GridFunction) -> Result<Self> {
        let w = weight_from_pearson(&PearsonTriple::new(b.clone(), eta.clone()), 1.0)?;
        Self::with_weight(k, w, b, eta, h, phi)
    }

    /// Level from `(B, eta, h, f)` with `phi = f + h / (x - tau x)`.
    pub fn from_f(k: i32, b: GridFunction, eta: GridFunction, h: GridFunction, f: GridFunction) -> Result<Self> {
        let phi = &f + &(&h / &delta_fn(b.grid()));
        Self::from_phi(k, b, eta, h, phi)
    }

    /// Level with an explicitly supplied weight.
    pub fn with_weight(
        k: i32,
        w: WeightedGrid,
        b: GridFunction,
        eta: GridFunction,
        h: GridFunction,
        phi: GridFunction,
    ) -> Result<Self> {
        for other in [&eta, &h, &phi, &w.rho] {
            b.check_same_grid(other)?;
        }
        let grid = b.grid().clone();
        let f = &phi - &(&h / &delta_fn(&grid));
        Ok(Self {
            k,
            w,
            b,
            eta,
            h,
            f,
            phi,
            g: GridFunction::constant(&grid, 1.0),
            c: c(0.0),
            d: c(1.0),
        })
    }

    /// Sets the link constants `(g_k, c_k, d_k)`.
    pub fn with_link(mut self, g: GridFunction, c_k: Complex64, d_k: Complex64) -> Self {
        self.g = g;
        self.c = c_k;
        self.d = d_k;
        self
    }

    pub fn grid(&self) -> &Grid {
        self.b.grid()
    }

    pub fn pearson(&self) -> PearsonTriple {
        PearsonTriple::new(self.b.clone(), self.eta.clone())
    }
}

/// `(A psi)(x) = h (psi(x) - psi(tau x)) / (x - tau x) + f psi = phi psi - (h / delta) T psi`.
pub fn apply_a(level: &ChainLevel, psi: &GridFunction) -> Result<GridFunction> {
    psi.check_same_grid(&level.b)?;
    let d = delta_fn(level.grid());
    Ok(&(&level.phi * psi) - &(&(&level.h / &d) * &psi.shift(1)))
}

/// `A* = (1 - T*) M_{h eta / delta} + M_{eta f}`, with `T*` the adjoint shift
/// of the level weight written through the Pearson pair. The `T*` part vanishes
/// at the base of a forward orbit.
pub fn apply_astar(level: &ChainLevel, chi: &GridFunction) -> Result<GridFunction> {
    chi.check_same_grid(&level.b)?;
    let grid = level.grid();
    let d = delta_fn(grid);
    let u = &(&(&level.h * &level.eta) / &d) * chi;
    let mu = adjoint_mu_k(&level.b, &level.eta)?;
    let tstar = &mu * &u.shift(-1);
    let direct = &(&level.eta * &level.f) * chi;
    let mut out = &direct + &u;
    let vals: Vec<Complex64> = (0..grid.len())
        .map(|i| if grid.is_boundary(i) { out.value(i) } else { out.value(i) - tstar.value(i) })
        .collect();
    let mask: Vec<bool> = (0..grid.len())
        .map(|i| out.is_valid(i) && (grid.is_boundary(i) || tstar.is_valid(i)))
        .collect();
    out = GridFunction::from_parts(grid, vals, mask);
    Ok(out)
}

/// `A* A psi`.
pub fn apply_hamiltonian(level: &ChainLevel, psi: &GridFunction) -> Result<GridFunction> {
    apply_astar(level, &apply_a(level, psi)?)
}

/// Next chain level from the gauge `g`, the next `h` and `d`:
/// `B' = g B`, `eta' = T(g eta)`, `rho' = eta rho` (checked against `T(B rho)`),
/// `phi' h' = (h / d) T(phi / g)`.
pub fn advance_level(level: &ChainLevel, g: &GridFunction, h_next: &GridFunction, d: Complex64) -> Result<ChainLevel> {
    if d.norm() == 0.0 {
        return Err(Error::InvalidInput("d must be nonzero".into()));
    }
    g.check_same_grid(&level.b)?;
    h_next.check_same_grid(&level.b)?;
    for i in g.valid_indices() {
        if g.value(i).norm() == 0.0 {
            return Err(Error::ZeroDivisor { what: "gauge g", index: i });
        }
    }
    let b = g * &level.b;
    let eta = (g * &level.eta).shift(1);
    let rho = &level.eta * &level.w.rho;
    let check = (&level.b * &level.w.rho).shift(1);
    let scale = residual::scale_of(&[&rho, &check]);
    let mismatch = residual::pointwise(&rho, &check, scale);
    if mismatch > 1e-9 {
        return Err(Error::InconsistentWeights { mismatch });
    }
    let phi = &(&(&level.h / h_next) * (&level.phi / g).shift(1)) * (c(1.0) / d);
    let next = ChainLevel::with_weight(level.k + 1, WeightedGrid::new(rho), b, eta, h_next.clone(), phi)?;
    Ok(next)
}

/// Pointwise mismatch of the chain equation linking level `k` to `k + 1`,
/// relative to the largest single term at that point (and at least `max(1, |c|, |d|)`).
/// Both sides are differences of terms growing like `delta^-2` near the limit.
pub fn chain_equation_residual(
    level: &ChainLevel,
    h_next: &GridFunction,
    g: &GridFunction,
    c_k: Complex64,
    d_k: Complex64,
) -> f64 {
    let grid = level.grid();
    let scale = 1f64.max(c_k.norm()).max(d_k.norm());
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let (Some(p), Some(n1)) = (grid.neighbor(i, -1), grid.neighbor(i, 1)) else { continue };
        let vals = [
            level.b.get(i),
            level.b.get(n1),
            g.get(i),
            g.get(n1),
            h_next.get(p),
            h_next.get(i),
            level.h.get(i),
            level.phi.get(i),
            level.phi.get(n1),
            level.eta.get(i),
            level.eta.get(n1),
        ];
        if vals.iter().any(Option::is_none) {
            continue;
        }
        let [b0, b1, g0, g1, hp, hn, h0, f0, f1, e0, e1] = vals.map(Option::unwrap);
        let (dp, d0, d1) = (grid.delta(p), grid.delta(i), grid.delta(n1));
        let terms = [
            d_k * g0 * b0 * hp * hp / (d0 * dp),
            -f0 * f0 * e0,
            b1 * h0 * h0 / (d1 * d0),
            -f1 * f1 * e1 * h0 * h0 / (hn * hn) / (d_k * g1),
        ];
        let lhs = terms[0] + terms[1] + c_k;
        let rhs = terms[2] + terms[3];
        let size = terms.iter().map(|t| t.norm()).fold(scale, f64::max);
        let r = (lhs - rhs).norm() / size;
        if r.is_finite() {
            worst = worst.max(r);
        } else {
            return f64::INFINITY;
        }
    }
    worst
}

/// `A A*` of a level as a three-band operator.
pub fn lhs_bands(level: &ChainLevel) -> Tridiag {
    let grid = level.grid().clone();
    let n = grid.len();
    let mut t = Tridiag::new(&grid);
    for i in 0..n {
        let Some(n1) = grid.neighbor(i, 1) else { continue };
        let (d0, d1) = (grid.delta(i), grid.delta(n1));
        let vals = [level.h.get(i), level.phi.get(i), level.phi.get(n1), level.eta.get(i), level.eta.get(n1), level.b.get(i), level.b.get(n1)];
        if vals.iter().any(Option::is_none) {
            continue;
        }
        let [h0, f0, f1, e0, e1, b0, b1] = vals.map(Option::unwrap);
        t.sup[i] = -h0 * f1 * e1 / d0;
        t.diag[i] = h0 * h0 * b1 / (d1 * d0) + f0 * f0 * e0;
        if grid.is_boundary(i) {
            t.sub[i] = c(0.0);
        } else if let Some(p) = grid.neighbor(i, -1) {
            match level.h.get(p) {
                Some(hp) => t.sub[i] = -f0 * b0 * hp / d0,
                None => continue,
            }
        } else {
            continue;
        }
        t.valid[i] = true;
    }
    t
}

/// `A* A` of a level as a three-band operator; the `T^{-1}` coupling and its
/// diagonal partner are absent at the base of a forward orbit.
pub fn rhs_bands(level: &ChainLevel) -> Tridiag {
    let grid = level.grid().clone();
    let mut t = Tridiag::new(&grid);
    for i in 0..grid.len() {
        if grid.neighbor(i, 1).is_none() {
            continue;
        }
        let d0 = grid.delta(i);
        let vals = [level.h.get(i), level.phi.get(i), level.eta.get(i), level.b.get(i)];
        if vals.iter().any(Option::is_none) {
            continue;
        }
        let [h0, f0, e0, b0] = vals.map(Option::unwrap);
        t.sup[i] = -f0 * e0 * h0 / d0;
        t.diag[i] = f0 * f0 * e0;
        if grid.is_boundary(i) {
            t.sub[i] = c(0.0);
        } else if let Some(p) = grid.neighbor(i, -1) {
            let (Some(hp), Some(fp)) = (level.h.get(p), level.phi.get(p)) else { continue };
            let dp = grid.delta(p);
            t.diag[i] += b0 * hp * hp / (d0 * dp);
            t.sub[i] = -b0 * fp * hp / d0;
        } else {
            continue;
        }
        t.valid[i] = true;
    }
    t
}

/// Result of checking `A_k A_k* = d A_{k+1}* A_{k+1} + c` on random probes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationResidual {
    /// `max ||L - R||_rho / max(||L||_rho, ||R||_rho, max(1, |c|, |d|) ||chi||_rho)` with operator composition.
    pub residual: f64,
    /// The same quantity with both sides evaluated from the three-band forms.
    pub band_residual: f64,
    /// Largest gap between the operator and band evaluations of either side, same scaling.
    pub two_path_gap: f64,
}

/// Random complex probe supported on `window`.
pub fn random_probe(grid: &Grid, window: &[usize], rng: &mut ChaCha8Rng) -> GridFunction {
    let mut vals = vec![c(0.0); grid.len()];
    for &i in window {
        vals[i] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    GridFunction::from_values(grid, vals)
}

fn worst(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Checks the factorization postulate between `level` and `next` on `probes`
/// random functions supported away from the truncation edge.
pub fn factorization_residual(level: &ChainLevel, next: &ChainLevel, probes: usize, seed: u64) -> Result<FactorizationResidual> {
    level.b.check_same_grid(&next.b)?;
    let grid = level.grid().clone();
    let (ck, dk) = (level.c, level.d);
    let scale = 1f64.max(ck.norm()).max(dk.norm());
    let window: Vec<usize> = residual::probe_window(&grid, 5)
        .into_iter()
        .filter(|&i| next.w.rho.is_valid(i) && grid.neighbor(i, 1).is_some_and(|j| next.phi.is_valid(j)))
        .collect();
    if window.is_empty() {
        return Err(Error::InvalidInput("no interior probe window".into()));
    }
    let lb = lhs_bands(level);
    let rb = rhs_bands(next);
    let w = &next.w;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = FactorizationResidual { residual: 0.0, band_residual: 0.0, two_path_gap: 0.0 };
    for _ in 0..probes.max(1) {
        let chi = random_probe(&grid, &window, &mut rng);
        let l_op = apply_a(level, &apply_astar(level, &chi)?)?;
        let r_op = &(&apply_hamiltonian(next, &chi)? * dk) + &(&chi * ck);
        let l_band = lb.apply(&chi);
        let r_band = &(&rb.apply(&chi) * dk) + &(&chi * ck);
        let floor = scale * norm(&chi, w);
        let size = |a: &GridFunction, b: &GridFunction| norm(a, w).max(norm(b, w)).max(floor);
        out.residual = worst(out.residual, norm(&(&l_op - &r_op), w) / size(&l_op, &r_op));
        out.band_residual = worst(out.band_residual, norm(&(&l_band - &r_band), w) / size(&l_band, &r_band));
        let gap = worst(norm(&(&l_op - &l_band), w) / size(&l_op, &l_band), norm(&(&r_op - &r_band), w) / size(&r_op, &r_band));
        out.two_path_gap = worst(out.two_path_gap, gap);
    }
    Ok(out)
}

/// Coefficients `(alpha, beta, gamma)` and the eigenvalue.
#[derive(Clone, Debug)]
pub struct CoefficientTriple {
    pub alpha: GridFunction,
    pub beta: GridFunction,
    pub gamma: GridFunction,
    pub lambda: Complex64,
}

impl CoefficientTriple {
    /// `alpha T psi + beta psi + gamma T^{-1} psi`, with the `gamma` term
    /// dropped at the base of a forward orbit.
    pub fn apply(&self, psi: &GridFunction) -> GridFunction {
        Tridiag::from_coefficients(self).apply(psi)
    }
}

/// `alpha = -phi eta h / delta`, `beta = phi^2 eta + B h(tau^-1 x)^2 / (delta delta_-1)`,
/// `gamma = -B phi(tau^-1 x) h(tau^-1 x) / delta`. At the base of a forward orbit
/// the `B` terms are absent and `gamma` is zero.
pub fn to_coefficients(level: &ChainLevel, lambda: Complex64) -> CoefficientTriple {
    let t = rhs_bands(level);
    let grid = level.grid();
    let mk = |v: &Vec<Complex64>| GridFunction::from_parts(grid, v.clone(), t.valid.clone());
    CoefficientTriple { alpha: mk(&t.sup), beta: mk(&t.diag), gamma: mk(&t.sub), lambda }
}

/// Propagates `u = phi_0 / h_0` along every orbit from `seed` at the base:
/// `u(tau x) = (-gamma(tau x) / (delta u(x)) - beta(tau x)) / (delta(tau x) alpha(tau x))`.
pub fn seed_recursion(coef: &CoefficientTriple, seed: Complex64) -> Result<GridFunction> {
    let grid = coef.alpha.grid().clone();
    let mut u = vec![c(f64::NAN); grid.len()];
    for seg in grid.segments() {
        let base = seg.offset + seg.base_index();
        u[base] = seed;
        for i in base + 1..seg.offset + seg.len() {
            let (Some(a), Some(bt), Some(gm)) = (coef.alpha.get(i), coef.beta.get(i), coef.gamma.get(i)) else {
                break;
            };
            if a.norm() == 0.0 {
                return Err(Error::ZeroAlpha { index: i });
            }
            let prev = u[i - 1];
            if prev.norm() == 0.0 {
                return Err(Error::RiccatiBlowup { index: i });
            }
            u[i] = (-gm / (grid.delta(i - 1) * prev) - bt) / (grid.delta(i) * a);
            if !(u[i].re.is_finite() && u[i].im.is_finite()) {
                return Err(Error::RiccatiBlowup { index: i });
            }
        }
        for i in (seg.offset + 1..=base).rev() {
            let (Some(a), Some(bt), Some(gm)) = (coef.alpha.get(i), coef.beta.get(i), coef.gamma.get(i)) else {
                break;
            };
            let den = grid.delta(i - 1) * (u[i] * a * grid.delta(i) + bt);
            if den.norm() == 0.0 {
                return Err(Error::RiccatiBlowup { index: i - 1 });
            }
            u[i - 1] = -gm / den;
        }
    }
    Ok(GridFunction::from_values(&grid, u))
}

/// Level 0 from the coefficients, `h_0` and the seed value of `phi_0 / h_0` at
/// the orbit base: `eta = -delta alpha / (u h^2)`,
/// `B = delta delta_-1 (beta + delta alpha u) / h(tau^-1 x)^2` (zero at a forward-orbit base).
pub fn from_coefficients(coef: &CoefficientTriple, h0: &GridFunction, seed: Complex64) -> Result<ChainLevel> {
    let grid = coef.alpha.grid().clone();
    for i in coef.alpha.valid_indices() {
        if coef.alpha.value(i).norm() == 0.0 && !grid.is_boundary(i) {
            return Err(Error::ZeroAlpha { index: i });
        }
    }
    let u = seed_recursion(coef, seed)?;
    let d = delta_fn(&grid);
    let phi = &u * h0;
    let eta = -(&(&d * &coef.alpha) / &(&u * &(h0 * h0)));
    let mut bvals = vec![c(f64::NAN); grid.len()];
    for i in 0..grid.len() {
        if grid.is_boundary(i) {
            bvals[i] = c(0.0);
            continue;
        }
        let Some(p) = grid.neighbor(i, -1) else { continue };
        let hp = h0.value(p);
        bvals[i] = d.value(i) * grid.delta(p) / (hp * hp) * (coef.beta.value(i) + d.value(i) * coef.alpha.value(i) * u.value(i));
    }
    let b = GridFunction::from_values(&grid, bvals).restrict_to(&eta);
    ChainLevel::from_phi(0, b, eta, h0.clone(), phi)
}

/// Eigenfunction candidate at a chain level.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub psi: GridFunction,
    pub lambda: Complex64,
    pub level: i32,
    /// `||A* A psi - lambda psi||_rho / ||psi||_rho` measured at construction.
    pub residual: f64,
}

/// `||A* A psi - lambda psi||_rho / ||psi||_rho` over the valid window.
pub fn eigen_residual(level: &ChainLevel, psi: &GridFunction, lambda: Complex64) -> Result<f64> {
    let hp = apply_hamiltonian(level, psi)?;
    let r = &hp - &(psi * lambda);
    let n = norm(&psi.restrict_to(&r), &level.w);
    Ok(if n == 0.0 { f64::INFINITY } else { norm(&r, &level.w) / n })
}

impl EigenPair {
    pub fn new(level: &ChainLevel, psi: GridFunction, lambda: Complex64) -> Result<Self> {
        let residual = eigen_residual(level, &psi, lambda)?;
        Ok(Self { psi, lambda, level: level.k, residual })
    }

    /// Rayleigh quotient `<psi, A* A psi> / <psi, psi>` at `level`.
    pub fn rayleigh(&self, level: &ChainLevel) -> Result<Complex64> {
        let hp = apply_hamiltonian(level, &self.psi)?;
        let p = self.psi.restrict_to(&hp);
        Ok(inner_product(&p, &hp, &level.w).value / inner_product(&p, &p, &level.w).value)
    }
}

/// `psi_{k+1} = A_k psi_k`, `lambda_{k+1} = (lambda_k - c_k) / d_k`; the
/// residual is measured at `next`.
pub fn lift(pair: &EigenPair, level: &ChainLevel, next: &ChainLevel) -> Result<EigenPair> {
    if pair.level != level.k || next.k != level.k + 1 {
        return Err(Error::InvalidInput("lift needs the pair's level and the following one".into()));
    }
    let psi = apply_a(level, &pair.psi)?;
    let n_in = norm(&pair.psi, &level.w);
    let n_out = norm(&psi, &next.w);
    if n_out < 1e-13 * n_in {
        return Err(Error::ZeroLift);
    }
    let lambda = (pair.lambda - level.c) / level.d;
    EigenPair::new(next, psi, lambda)
}

/// `psi_k = A_k* psi_{k+1} / lambda_k` with `lambda_k = d_k lambda_{k+1} + c_k`.
pub fn descend(pair: &EigenPair, level: &ChainLevel) -> Result<EigenPair> {
    if pair.level != level.k + 1 {
        return Err(Error::InvalidInput("descend needs the level below the pair".into()));
    }
    let lambda = level.d * pair.lambda + level.c;
    if lambda.norm() == 0.0 {
        return Err(Error::ZeroEigenvalue);
    }
    let psi = &apply_astar(level, &pair.psi)? * (c(1.0) / lambda);
    EigenPair::new(level, psi, lambda)
}

/// Runs the advance for a sequence of links `(g_k, h_{k+1}, c_k, d_k)`.
pub fn build_chain(level0: ChainLevel, links: Vec<(GridFunction, GridFunction, Complex64, Complex64)>) -> Result<Vec<ChainLevel>> {
    let mut levels = vec![level0];
    for (g, h_next, ck, dk) in links {
        let last = levels.pop().expect("nonempty");
        let linked = last.with_link(g.clone(), ck, dk);
        let next = advance_level(&linked, &g, &h_next, dk)?;
        levels.push(linked);
        levels.push(next);
    }
    Ok(levels)
}

/// Residual of the three-term equation defined by `coef` on `psi`.
pub fn coefficient_equation_residual(coef: &CoefficientTriple, psi: &GridFunction) -> f64 {
    let lhs = coef.apply(psi);
    let rhs = psi * coef.lambda;
    let scale = residual::scale_of(&[psi]) * 1f64.max(coef.lambda.norm());
    residual::cleared(&lhs, &rhs, scale)
}
