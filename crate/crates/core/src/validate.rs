//! The acceptance suite: twelve property checks over the library, each made
//! of named sub-checks with a measured value and a threshold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bands::lowest_eigenvalues;
use crate::calculus::{
    delta_fn, product_integral, solve_linear_first_order, tau_antiderivative, tau_derivative, tau_exponential, tau_integral,
};
use crate::chain::{eigen_residual, factorization_residual, lift, random_probe, ChainLevel};
use crate::covariance::{equivalence_obstruction, image_grid, three_fixed_point_cubic, transport_level, transport_solution, VariableChange, Verdict};
use crate::error::Result;
use crate::grid_fn::{c, GridFunction};
use crate::hilbert::{
    adjoint_shift, inner_product, mu, mult_adjoint, norm, pearson_residual, tau_derivative_adjoint, weight_from_pearson, WeightedGrid,
};
use crate::orbit::{iterate, Grid, GridSpec, OrbitGrid, TauMap};
use crate::qoracle;
use crate::residual::{cleared, pointwise, probe_window, scale_of};
use crate::riccati::{
    cross_ratio, darboux, darboux_solution, general_solution, resolvent, resolvent_gap, rhom_residual, riccati_from_solution,
    singular_darboux, singular_gauge, solve_system, system_residual, triangular_resolvent, Mat2, MatrixFn, TwoByTwoSystem,
};
use crate::scenarios::{const_g_scenario, little_q_jacobi, Fractional};

/// Names accepted by the criterion filter, in order.
pub const CRITERIA: [&str; 12] = [
    "calculus",
    "q-oracle",
    "adjoint",
    "pearson",
    "factorization",
    "eigen-chain",
    "cross-method",
    "orthogonality",
    "riccati",
    "darboux",
    "covariance",
    "closed-forms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `measured < threshold`.
    Below,
    /// `measured >= threshold`.
    AtLeast,
    /// A yes/no property; `measured` is 1 or 0.
    Holds,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub bound: Bound,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Set when the criterion could not run to completion.
    pub error: Option<String>,
}

impl CriterionReport {
    /// The first failing check, for one-line summaries.
    pub fn first_failure(&self) -> Option<String> {
        if let Some(e) = &self.error {
            return Some(e.clone());
        }
        self.checks.iter().find(|c| !c.passed).map(|c| format!("{}: {:.3e} vs {:.1e}", c.name, c.measured, c.threshold))
    }
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    /// Replaces every upper-bound threshold.
    pub tol: Option<f64>,
    /// Runs only the named (or numbered) criterion.
    pub only: Option<String>,
}

/// Resolves a filter string (`"7"` or `"cross-method"`) to a criterion number.
pub fn criterion_id(name: &str) -> Option<usize> {
    if let Ok(n) = name.parse::<usize>() {
        return (1..=CRITERIA.len()).contains(&n).then_some(n);
    }
    CRITERIA.iter().position(|c| *c == name).map(|i| i + 1)
}

struct Checker {
    tol: Option<f64>,
    checks: Vec<Check>,
}

impl Checker {
    fn below(&mut self, name: impl Into<String>, measured: f64, threshold: f64) {
        let threshold = self.tol.unwrap_or(threshold);
        let passed = measured < threshold;
        self.checks.push(Check { name: name.into(), measured, threshold, bound: Bound::Below, passed });
    }

    fn at_least(&mut self, name: impl Into<String>, measured: f64, threshold: f64) {
        let passed = measured >= threshold;
        self.checks.push(Check { name: name.into(), measured, threshold, bound: Bound::AtLeast, passed });
    }

    fn holds(&mut self, name: impl Into<String>, ok: bool) {
        let measured = if ok { 1.0 } else { 0.0 };
        self.checks.push(Check { name: name.into(), measured, threshold: 1.0, bound: Bound::Holds, passed: ok });
    }
}

/// Runs the selected criteria in order.
pub fn run(opts: &Options) -> Vec<CriterionReport> {
    let only = opts.only.as_deref().and_then(criterion_id);
    (1..=CRITERIA.len()).filter(|id| only.is_none_or(|o| o == *id)).map(|id| run_one(id, opts.tol)).collect()
}

pub fn run_one(id: usize, tol: Option<f64>) -> CriterionReport {
    let mut ck = Checker { tol, checks: Vec::new() };
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| match id {
        1 => calculus(&mut ck),
        2 => q_oracle(&mut ck),
        3 => adjoints(&mut ck),
        4 => pearson(&mut ck),
        5 => factorization(&mut ck),
        6 => eigen_chain(&mut ck),
        7 => cross_method(&mut ck),
        8 => orthogonality(&mut ck),
        9 => riccati_suite(&mut ck),
        10 => darboux_suite(&mut ck),
        11 => covariance_suite(&mut ck),
        12 => closed_forms(&mut ck),
        _ => Ok(()),
    }));
    let error = match outcome {
        Ok(Ok(())) => None,
        Ok(Err(e)) => Some(e.to_string()),
        Err(p) => Some(format!("panicked: {}", p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())),
    };
    let passed = error.is_none() && !ck.checks.is_empty() && ck.checks.iter().all(|c| c.passed && c.measured.is_finite());
    CriterionReport { id, name: CRITERIA[id - 1], passed, checks: ck.checks, error }
}

fn random_poly(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let deg = rng.gen_range(0..=4);
    (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn horner(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn calculus_maps() -> Vec<(String, TauMap)> {
    vec![
        ("q=0.3".into(), TauMap::linear(0.3, 0.0)),
        ("q=0.7".into(), TauMap::linear(0.7, 0.0)),
        ("a=0.5".into(), TauMap::fractional(0.5)),
        ("a=2".into(), TauMap::fractional(2.0)),
    ]
}

fn calculus(ck: &mut Checker) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (label, map) in calculus_maps() {
        let semi = OrbitGrid::build(&map, &GridSpec::semigroup(0.8))?;
        let (a, b) = (0.3, 0.8);
        let inter = OrbitGrid::build(&map, &GridSpec::interval(a, b))?;
        let shifted = OrbitGrid::build(&map, &GridSpec::interval(map.forward(a), map.forward(b)))?;
        let (mut leib, mut fund, mut fund2, mut chov) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for _ in 0..50 {
            let (p1, p2) = (random_poly(&mut rng), random_poly(&mut rng));
            let f = GridFunction::from_real_fn(&semi, |x| horner(&p1, x));
            let g = GridFunction::from_real_fn(&semi, |x| horner(&p2, x));
            let lhs = tau_derivative(&(&f * &g));
            let rhs = &(&f.shift(1) * &tau_derivative(&g)) + &(&g * &tau_derivative(&f));
            leib = leib.max(cleared(&lhs, &rhs, scale_of(&[&lhs, &rhs, &f, &g])));

            let d = tau_derivative(&f);
            fund2 = fund2.max(cleared(&tau_derivative(&tau_antiderivative(&f)), &f, scale_of(&[&f, &d])));

            let psi = GridFunction::from_real_fn(&inter, |x| horner(&p1, x));
            let v = tau_integral(&tau_derivative(&psi)).value;
            let exact = horner(&p1, b) - horner(&p1, a);
            fund = fund.max((v - exact).norm() / psi.scale());

            let rho = |x: f64| horner(&p2, x);
            let left = tau_integral(&(&psi.shift(1) * &GridFunction::from_real_fn(&inter, rho))).value;
            let m = map.clone();
            let right_f = GridFunction::from_real_fn(&shifted, |y| {
                let yi = m.inverse(y);
                horner(&p1, y) * (yi - y) / (y - m.forward(y)) * rho(yi)
            });
            let right = tau_integral(&right_f).value;
            let s = psi.scale() * GridFunction::from_real_fn(&inter, rho).scale();
            chov = chov.max((left - right).norm() / s);
        }
        ck.below(format!("leibniz {label}"), leib, 1e-10);
        ck.below(format!("fund {label}"), fund, 1e-10);
        ck.below(format!("fund2 {label}"), fund2, 1e-10);
        ck.below(format!("chov {label}"), chov, 1e-10);
    }
    Ok(())
}

fn q_oracle(ck: &mut Checker) -> Result<()> {
    let terms = 400;
    for q in [0.3, 0.7] {
        let grid = OrbitGrid::build(&TauMap::linear(q, 0.0), &GridSpec::semigroup(1.0))?;
        let poly = |x: f64| 1.0 + x - 2.0 * x * x + 0.5 * x * x * x;
        let f = GridFunction::from_real_fn(&grid, poly);
        let gap = |a: &GridFunction, b: &dyn Fn(f64) -> f64| {
            let s = a.scale();
            a.valid_indices().iter().map(|&i| (a.value(i) - b(grid.x(i))).norm() / s).fold(0.0, f64::max)
        };
        ck.below(format!("derivative q={q}"), gap(&tau_derivative(&f), &|x| qoracle::q_derivative(poly, q, x)), 1e-12);
        ck.below(format!("antiderivative q={q}"), gap(&tau_antiderivative(&f), &|x| qoracle::jackson_integral(poly, q, x, terms)), 1e-12);
        let total = tau_integral(&f).value.re;
        ck.below(format!("integral q={q}"), (total - qoracle::jackson_integral(poly, q, 1.0, terms)).abs(), 1e-12);
        ck.below(format!("exponential q={q}"), gap(&tau_exponential(&grid)?, &|x| qoracle::q_exponential(q, x, terms)), 1e-12);
        let factor = |t: f64| 1.0 - 0.5 * t;
        let p = product_integral(&GridFunction::from_real_fn(&grid, factor))?.value();
        let exact = qoracle::q_product(factor, q, 1.0, terms);
        ck.below(format!("product q={q}"), (p - exact).abs() / exact, 1e-12);
        let rate = |t: f64| 0.3 + t;
        let sol = solve_linear_first_order(&GridFunction::from_real_fn(&grid, rate), c(2.0))?;
        ck.below(format!("first-order q={q}"), gap(&sol, &|x| qoracle::q_first_order(rate, q, x, 2.0, terms)), 1e-12);
    }
    Ok(())
}

fn qhahn_levels(depth: usize, levels: usize) -> Result<crate::scenarios::QHahnChain> {
    little_q_jacobi(0.5, 0.5, 0.5, depth, levels)
}

fn adjoints(ck: &mut Checker) -> Result<()> {
    let ch = qhahn_levels(60, 1)?;
    let lvl = &ch.levels[0];
    let grid = ch.grid.clone();
    let w = &lvl.w;
    let w1 = WeightedGrid::new(&lvl.eta * &w.rho);
    let window = probe_window(&grid, 5);
    let m = mu(w)?;
    let f = GridFunction::from_real_fn(&grid, |x| 0.4 - x);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut t_adj, mut tst, mut tts, mut m_adj, mut d_adj) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let phi = random_probe(&grid, &window, &mut rng);
        let psi = random_probe(&grid, &window, &mut rng);
        let nn = norm(&phi, w) * norm(&psi, w);
        let l = inner_product(&phi.shift(1), &psi, w).value;
        let r = inner_product(&phi, &adjoint_shift(&psi, w)?, w).value;
        t_adj = t_adj.max((l - r).norm() / nn);

        let tt = adjoint_shift(&phi.shift(1), w)?;
        let expect = GridFunction::from_index_fn(&grid, |i| if grid.is_boundary(i) { c(0.0) } else { m.value(i) * phi.value(i) });
        tst = tst.max(pointwise(&tt, &expect.restrict_to(&tt), scale_of(&[&expect])));
        let tt2 = adjoint_shift(&phi, w)?.shift(1);
        let expect2 = &m.shift(1) * &phi;
        tts = tts.max(pointwise(&tt2, &expect2, scale_of(&[&expect2])));

        let n1 = norm(&phi, w) * norm(&psi, &w1);
        let l = inner_product(&(&f * &phi), &psi, &w1).value;
        let r = inner_product(&phi, &mult_adjoint(&f, &lvl.eta, &psi), w).value;
        m_adj = m_adj.max((l - r).norm() / n1);
        let l = inner_product(&tau_derivative(&phi), &psi, &w1).value;
        let r = inner_product(&phi, &tau_derivative_adjoint(&psi, &lvl.eta, w)?, w).value;
        d_adj = d_adj.max((l - r).norm() / (n1 * delta_fn(&grid).restrict(|i| window.contains(&i)).map(|d| 1.0 / d).scale()));
    }
    ck.below("<T phi, psi> = <phi, T* psi>", t_adj, 1e-9);
    ck.below("T* T = mu (1 - chi)", tst, 1e-9);
    ck.below("T T* = mu o tau", tts, 1e-9);
    ck.below("M_f adjoint", m_adj, 1e-9);
    ck.below("d_tau adjoint", d_adj, 1e-9);
    Ok(())
}

fn pearson(ck: &mut Checker) -> Result<()> {
    let ch = qhahn_levels(60, 4)?;
    for (k, lvl) in ch.levels.iter().enumerate() {
        let p = lvl.pearson();
        let w = weight_from_pearson(&p, 1.0)?;
        ck.below(format!("pearson residual level {k}"), pearson_residual(&p, &w).max(), 1e-11);
        ck.holds(format!("positive weight level {k}"), w.positive());
    }
    let lvl = &ch.levels[0];
    let p = lvl.pearson();
    let w = weight_from_pearson(&p, 1.0)?;
    // the spot where the weight is largest
    let spot = (0..w.rho.len()).max_by(|&i, &j| w.rho.value(i).norm().total_cmp(&w.rho.value(j).norm())).unwrap_or(0);
    let vals: Vec<_> = (0..w.rho.len()).map(|i| if i == spot { w.rho.value(i) * 1.001 } else { w.rho.value(i) }).collect();
    let bumped = WeightedGrid::new(GridFunction::from_values(&ch.grid, vals));
    ck.at_least("perturbation detected", pearson_residual(&p, &bumped).max(), 1e-4);
    Ok(())
}

fn factorization_pairs(ck: &mut Checker, label: &str, levels: &[ChainLevel]) -> Result<()> {
    for k in 0..5 {
        let r = factorization_residual(&levels[k], &levels[k + 1], 4, 17 + k as u64)?;
        ck.below(format!("{label} residual {k}->{}", k + 1), r.residual.max(r.band_residual), 1e-9);
        ck.below(format!("{label} two-path {k}->{}", k + 1), r.two_path_gap, 1e-11);
    }
    Ok(())
}

fn factorization(ck: &mut Checker) -> Result<()> {
    let ch = qhahn_levels(60, 5)?;
    factorization_pairs(ck, "q-hahn", &ch.levels)?;
    let sc = const_g_scenario(0.5, 1.0, -1.0, 0.4, 10, 5, 1)?;
    factorization_pairs(ck, "constant-gauge", &sc.levels)
}

fn eigen_chain(ck: &mut Checker) -> Result<()> {
    let sc = const_g_scenario(0.5, 1.0, -1.0, 0.4, 10, 6, 1)?;
    let mut pair = sc.kernel_pair(1)?;
    ck.below("kernel residual", pair.residual, 1e-7);
    for k in 1..6 {
        pair = lift(&pair, &sc.levels[k], &sc.levels[k + 1])?;
        let predicted: f64 = -(0..=k).map(|l| sc.c(l)).sum::<f64>();
        let rq = pair.rayleigh(&sc.levels[k + 1])?.re;
        ck.below(format!("lift {k} residual"), pair.residual, 1e-7);
        ck.below(format!("lift {k} eigenvalue"), (rq - predicted).abs() / predicted.abs(), 1e-6);
    }
    Ok(())
}

fn cross_method(ck: &mut Checker) -> Result<()> {
    let ch = little_q_jacobi(0.85, 0.5, 0.5, 220, 4)?;
    let ev = lowest_eigenvalues(&ch.levels[0], 200, 4)?;
    for (n, e) in ev.iter().enumerate() {
        let exact = ch.eigenvalue(n);
        ck.below(format!("lambda_{n}"), (e - exact).abs() / exact.abs().max(1.0), 1e-6);
    }
    Ok(())
}

fn gram_ratio(fs: &[GridFunction], w: &WeightedGrid) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..fs.len() {
        for j in 0..i {
            let gij = inner_product(&fs[i], &fs[j], w).value.norm();
            let gii = inner_product(&fs[i], &fs[i], w).value.norm();
            let gjj = inner_product(&fs[j], &fs[j], w).value.norm();
            worst = worst.max(gij / (gii * gjj).sqrt());
        }
    }
    worst
}

fn orthogonality(ck: &mut Checker) -> Result<()> {
    let ch = qhahn_levels(80, 8)?;
    let ps: Vec<GridFunction> = (0..=8).map(|n| ch.polynomial(n)).collect::<Result<_>>()?;
    ck.below("gram degrees 0..8", gram_ratio(&ps, &ch.levels[0].w), 1e-8);
    let ds: Vec<GridFunction> = ps[1..].iter().map(tau_derivative).collect();
    ck.below("derivative gram under rho_1", gram_ratio(&ds, &ch.levels[1].w), 1e-8);
    Ok(())
}

fn half_grid() -> Result<Grid> {
    OrbitGrid::build(&TauMap::linear(0.5, 0.0), &GridSpec::semigroup(1.0))
}

fn regular_system(grid: &Grid) -> Result<TwoByTwoSystem> {
    TwoByTwoSystem::from_tilde(&MatrixFn::from_fn(grid, |x| Mat2::real(0.3 + x, 0.5 - x * x, 0.2 * x - 0.4, -0.6 + 0.1 * x)))
}

fn riccati_suite(ck: &mut Checker) -> Result<()> {
    let g = half_grid()?;
    let sys = regular_system(&g)?;
    let r = resolvent(&sys);
    ck.holds("resolvent converged", r.converged);
    ck.holds("criterion sum finite", r.criterion_sum.is_finite());
    ck.below("cauchy gap", r.cauchy_gap, 1e-12);
    let diag = TwoByTwoSystem::from_fn(&g, |x| Mat2::real(1.0 + 0.5 * x, 0.0, 0.0, 1.0 / (1.0 + x)))?;
    ck.holds("diagonal resolvent converged", resolvent(&diag).converged);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut tri: f64 = 0.0;
    for _ in 0..5 {
        let (p, q, s, t) = (rng.gen_range(0.1..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.1..1.0));
        let sys = TwoByTwoSystem::from_fn(&g, |x| Mat2::real(1.0 + p * x, s * x + 0.3, 0.0, 1.0 + q * t * x))?;
        tri = tri.max(resolvent_gap(&triangular_resolvent(&sys)?, &resolvent(&sys)));
    }
    ck.below("triangular closed form vs brute force", tri, 1e-9);

    let (psi, phi) = solve_system(&sys, [c(1.0), c(0.5)])?;
    let u0 = riccati_from_solution(&psi, &phi);
    let mut group: f64 = 0.0;
    for (s, t) in [(0.3, 0.7), (-1.0, 1.0), (2.0, -0.5)] {
        let ut = general_solution(&sys, &u0, t)?.u;
        let ust = general_solution(&sys, &ut, s)?.u;
        let direct = general_solution(&sys, &u0, s + t)?.u;
        group = group.max(ust.max_abs_diff(&direct) / direct.scale());
    }
    ck.below("group law", group, 1e-10);
    let us: Vec<GridFunction> = [0.0, 1.0, 2.0, 3.0].iter().map(|&t| general_solution(&sys, &u0, t).map(|s| s.u)).collect::<Result<_>>()?;
    let mut cr: f64 = 0.0;
    for i in 0..g.len() {
        if us.iter().all(|u| u.is_valid(i)) {
            let v = cross_ratio([us[0].value(i), us[1].value(i), us[2].value(i), us[3].value(i)])?;
            cr = cr.max((v - 0.25).norm());
        }
    }
    ck.below("cross-ratio 1/4", cr, 1e-10);
    Ok(())
}

/// `Lambda_k` of the xi-route for `h = 1`, `f = 0`: upper triangular with
/// `b = delta delta_1 / B_1`, `d = delta delta_1 phi_1^2 eta_1 / B_1`.
pub fn xi_route_system(level: &ChainLevel) -> Result<TwoByTwoSystem> {
    let grid = level.grid();
    let d = delta_fn(grid);
    let dd = &d * &d.shift(1);
    let b1 = level.b.shift(1);
    let p1 = (&(&level.phi * &level.phi) * &level.eta).shift(1);
    let one = GridFunction::constant(grid, 1.0);
    let bb = &dd / &b1;
    let dd_entry = &(&dd * &p1) / &b1;
    TwoByTwoSystem::from_lambda(MatrixFn::new(one.restrict_to(&bb), bb.clone(), (&one * 0.0).restrict_to(&bb), dd_entry)?)
}

fn darboux_suite(ck: &mut Checker) -> Result<()> {
    let g = half_grid()?;
    let sys = regular_system(&g)?;
    let (psi, phi) = solve_system(&sys, [c(1.0), c(0.5)])?;
    let d = MatrixFn::from_fn(&g, |x| Mat2::real(1.0 + x, x, -0.5, 2.0));
    let t = darboux(&sys, &d)?;
    let (p2, f2) = darboux_solution(&d, &psi, &phi)?;
    ck.below("regular transform solution", system_residual(&t, &p2, &f2), 1e-9);
    let s = singular_darboux(&sys, 1.0, 0.0)?;
    let (p3, f3) = darboux_solution(&singular_gauge(&g, 1.0, 0.0)?, &psi, &phi)?;
    ck.below("singular transform solution", system_residual(&s, &p3, &f3), 1e-9);
    let u = riccati_from_solution(&psi, &phi);
    ck.below("singular transform riccati", rhom_residual(&s, &u.map_x(|x, v| v * x)), 1e-9);

    // xi-route preset: B = 1 + x, eta = 1 + 0.3 x - 0.2 x^2, h = 1, f = 0 on x -> x / 2
    let b = GridFunction::from_real_fn(&g, |x| 1.0 + x);
    let eta = GridFunction::from_real_fn(&g, |x| 1.0 + 0.3 * x - 0.2 * x * x);
    let level = ChainLevel::from_f(0, b, eta, GridFunction::constant(&g, 1.0), GridFunction::constant(&g, 0.0))?;
    let raw = xi_route_system(&level)?;
    // deep points carry rounding of order eps / delta in Lambda~; use the
    // stretch of the orbit where delta >= 1e-6 delta_0
    let reliable: Vec<usize> = (0..g.len()).filter(|&i| g.delta(i).abs() >= 1e-6 * g.delta(0).abs()).collect();
    let (first, last) = (reliable[0], *reliable.last().unwrap_or(&0));
    let before = raw.tilde();
    let growth = before.at(last).map_or(f64::INFINITY, |m| m.max_norm()) / before.at(first).map_or(1.0, |m| m.max_norm());
    ck.at_least("unregularized tilde grows", growth, 1e5);
    let reg = singular_darboux(&raw, 0.0, -1.0)?.tilde();
    let bound = reliable.iter().filter_map(|&i| reg.at(i)).map(|m| m.max_norm()).fold(0.0, f64::max);
    ck.holds("regularized tilde bounded", bound.is_finite() && bound < 10.0);
    let step = |i: usize| (reg.at(i).unwrap() - reg.at(i - 1).unwrap()).max_norm();
    ck.below("regularized tilde settles", step(last) / step(first + 1), 1e-4);
    let q = 0.5;
    let expect = -(q - q * q) / 1.0;
    ck.below("regularized top-right limit", (reg.at(last).unwrap().b.re - expect).abs() / expect.abs(), 1e-5);
    Ok(())
}

fn covariance_suite(ck: &mut Checker) -> Result<()> {
    let ch = qhahn_levels(60, 4)?;
    let lvl = &ch.levels[0];
    let ln = VariableChange::ln();
    let target = image_grid(&ch.grid, &ln)?;
    let t = transport_level(lvl, &ln, &target)?;
    let window = probe_window(&ch.grid, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut unit: f64 = 0.0;
    for _ in 0..30 {
        let a = random_probe(&ch.grid, &window, &mut rng);
        let b = random_probe(&ch.grid, &window, &mut rng);
        let before = inner_product(&a, &b, &lvl.w).value;
        let after = inner_product(&transport_solution(&a, &ln, &target)?, &transport_solution(&b, &ln, &target)?, &t.w).value;
        unit = unit.max((before - after).norm() / (norm(&a, &lvl.w) * norm(&b, &lvl.w)));
    }
    ck.below("unitarity", unit, 1e-10);
    ck.below("transported pearson", pearson_residual(&t.pearson(), &t.w).max(), 1e-9);
    for n in 0..4 {
        let p = ch.polynomial(n)?;
        let lam = c(ch.eigenvalue(n));
        let r0 = eigen_residual(lvl, &p, lam)?;
        let r1 = eigen_residual(&t, &transport_solution(&p, &ln, &target)?, lam)?;
        ck.below(format!("eigen-residual ratio n={n}"), r1 / r0.max(1e-15), 2.0);
    }
    let rep = equivalence_obstruction(&TauMap::power(2.0), (0.0, 1.0), &three_fixed_point_cubic(), (0.0, 1.0), 1000);
    ck.holds("x^2 vs cubic NotEquivalent", rep.verdict == Verdict::NotEquivalent);
    Ok(())
}

fn closed_forms(ck: &mut Checker) -> Result<()> {
    for a in [0.5, 2.0] {
        let fr = Fractional { a };
        let map = fr.map();
        let (mut tk, mut dt, mut dtk): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for x in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let direct = (map.forward(x) - map.forward(map.forward(x))) / (x - map.forward(x));
            dt = dt.max((fr.dtau_tau(x) - direct).abs() / direct.abs());
            for k in 0..=12 {
                let y = iterate(&map, x, k)?;
                tk = tk.max((fr.tau_k(k as i32, x) - y).abs() / y.abs().max(1e-300));
                // the divided-difference oracle loses eps / |y - tau y| near the fixed point
                if (y - map.forward(y)).abs() < 1e-3 {
                    continue;
                }
                let d = (map.forward(y) - map.forward(map.forward(y))) / (y - map.forward(y));
                dtk = dtk.max((fr.dtau_tau_at_k(k as i32, x) - d).abs() / d.abs());
            }
        }
        ck.below(format!("tau^k a={a}"), tk, 1e-12);
        ck.below(format!("d_tau tau a={a}"), dt, 1e-12);
        ck.below(format!("d_tau tau at tau^k a={a}"), dtk, 1e-12);
    }
    let sc = const_g_scenario(0.5, 1.0, -1.0, 0.4, 60, 2, 1)?;
    let pair = sc.kernel_pair(1)?;
    let dens = &(&pair.psi * &pair.psi) * &sc.levels[1].w.rho;
    let oracle = sc.kernel_density_oracle(1, &pair.psi);
    let rel = (0..50.min(sc.grid.len()))
        .filter(|&i| dens.is_valid(i))
        .map(|i| (dens.value(i) - oracle.value(i)).norm() / oracle.value(i).norm())
        .fold(0.0, f64::max);
    ck.below("psi^2 rho vs double q-Pochhammer product", rel, 1e-8);
    Ok(())
}
