use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taucalc::calculus::running_product;
use taucalc::chain::to_coefficients;
use taucalc::grid_fn::c;
use taucalc::riccati::*;
use taucalc::scenarios::little_q_jacobi;
use taucalc::{Complex64, Grid, GridFunction, GridSpec, OrbitGrid, TauMap};

fn half() -> Grid {
    OrbitGrid::build(&TauMap::linear(0.5, 0.0), &GridSpec::semigroup(1.0)).unwrap()
}

/// Smooth regular system: `Lambda~` continuous at the limit.
fn regular(grid: &Grid) -> TwoByTwoSystem {
    TwoByTwoSystem::from_tilde(&MatrixFn::from_fn(grid, |x| Mat2::real(0.3 + x, 0.5 - x * x, 0.2 * x - 0.4, -0.6 + 0.1 * x))).unwrap()
}

#[test]
fn contracting_resolvent_converges() {
    let g = half();
    let sys = regular(&g);
    let r = resolvent(&sys);
    assert!(r.converged, "{} {}", r.criterion_sum, r.cauchy_gap);
    assert!(r.criterion_sum.is_finite() && r.cauchy_gap < 1e-12);
    assert!(resolvent_step_residual(&sys, &r) < 1e-10);
    let (psi, phi) = solve_system(&sys, [c(1.0), c(0.5)]).unwrap();
    assert!(system_residual(&sys, &psi, &phi) < 1e-10);
    let last = g.len() - 1;
    assert!((psi.value(last) - 1.0).norm() < 1e-12 && (phi.value(last) - 0.5).norm() < 1e-12);
}

#[test]
fn diagonal_resolvent_matches_products() {
    let g = half();
    let sys = TwoByTwoSystem::from_fn(&g, |x| Mat2::real(1.0 + 0.5 * x, 0.0, 0.0, 1.0 / (1.0 + x))).unwrap();
    let r = resolvent(&sys);
    let pa = running_product(&sys.lambda.a).unwrap();
    let pd = running_product(&sys.lambda.d).unwrap();
    for i in 0..g.len() {
        let m = r.matrices[i].unwrap();
        assert!((m.a - pa.value(i)).norm() < 1e-13 * pa.value(i).norm());
        assert!((m.d - pd.value(i)).norm() < 1e-13 * pd.value(i).norm());
        assert!(m.b.norm() == 0.0 && m.c.norm() == 0.0);
    }
}

#[test]
fn triangular_closed_form_matches_brute_force() {
    let g = half();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let (p, q, s, t) = (rng.gen_range(0.1..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.1..1.0));
        let sys = TwoByTwoSystem::from_fn(&g, |x| Mat2::real(1.0 + p * x, s * x + 0.3, 0.0, 1.0 + q * t * x)).unwrap();
        let closed = triangular_resolvent(&sys).unwrap();
        let brute = resolvent(&sys);
        assert!(resolvent_gap(&closed, &brute) < 1e-9);
    }
    // a = d: F = a_inf sum b / a
    let sys = TwoByTwoSystem::from_fn(&g, |x| Mat2::real(1.0 + x, x, 0.0, 1.0 + x)).unwrap();
    let closed = triangular_resolvent(&sys).unwrap();
    let a_inf = running_product(&sys.lambda.a).unwrap();
    let s: Complex64 = (0..g.len()).map(|i| g.x(i) / (1.0 + g.x(i))).map(c).sum();
    assert!((closed.matrices[0].unwrap().b - a_inf.value(0) * s).norm() < 1e-12);
    let lower = TwoByTwoSystem::from_fn(&g, |x| Mat2::real(1.0, 0.0, x, 1.0)).unwrap();
    assert!(triangular_resolvent(&lower).is_err());
}

#[test]
fn riccati_forms_agree() {
    let g = half();
    let sys = regular(&g);
    let (psi, phi) = solve_system(&sys, [c(1.0), c(0.5)]).unwrap();
    let u = riccati_from_solution(&psi, &phi);
    assert!(rhom_residual(&sys, &u) < 1e-12);
    assert!(riccati_residual(&sys, &u) < 1e-11);
    let bad = &u + 0.01;
    assert!(rhom_residual(&sys, &bad) > 1e-4 && riccati_residual(&sys, &bad) > 1e-4);
}

#[test]
fn darboux_covariance() {
    let g = half();
    let sys = regular(&g);
    let (psi, phi) = solve_system(&sys, [c(1.0), c(0.5)]).unwrap();
    let d = MatrixFn::from_fn(&g, |x| Mat2::real(1.0 + x, x, -0.5, 2.0));
    let t = darboux(&sys, &d).unwrap();
    let (p2, f2) = darboux_solution(&d, &psi, &phi).unwrap();
    assert!(system_residual(&t, &p2, &f2) < 1e-9);
    // resolvent transform with D at the limit
    let r = resolvent(&sys);
    let rt = resolvent(&t);
    let moved = darboux_resolvent(&r, &d, Mat2::real(1.0, 0.0, -0.5, 2.0)).unwrap();
    assert!(resolvent_gap(&rt, &moved) < 1e-12);
    // identity gauge and composition
    assert!(darboux(&sys, &MatrixFn::identity(&g)).unwrap().lambda.max_diff(&sys.lambda) < 1e-15);
    let d2 = MatrixFn::from_fn(&g, |x| Mat2::real(1.0, x * x, 0.0, 1.0 + x));
    let twice = darboux(&t, &d2).unwrap();
    let prod = MatrixFn::from_fn(&g, |x| Mat2::real(1.0 + x, x, -0.5, 2.0) * Mat2::real(1.0, x * x, 0.0, 1.0 + x));
    assert!(twice.lambda.max_diff(&darboux(&sys, &prod).unwrap().lambda) < 1e-12);
}

#[test]
fn particular_gauge_is_triangular() {
    let g = half();
    let sys = regular(&g);
    let (psi, phi) = solve_system(&sys, [c(1.0), c(0.5)]).unwrap();
    let u0 = riccati_from_solution(&psi, &phi);
    let one = GridFunction::constant(&g, 1.0);
    let zero = GridFunction::constant(&g, 0.0);
    let d = MatrixFn::new(one.clone(), zero, u0.clone(), one).unwrap();
    let t = darboux(&sys, &d).unwrap();
    assert!(t.lambda.c.sup_norm() < 1e-12);
}

#[test]
fn singular_darboux_scales_u() {
    let g = half();
    let sys = regular(&g);
    let (psi, phi) = solve_system(&sys, [c(1.0), c(0.5)]).unwrap();
    let u = riccati_from_solution(&psi, &phi);
    let t = singular_darboux(&sys, 1.0, 0.0).unwrap();
    let u2 = u.map_x(|x, v| v * x);
    assert!(rhom_residual(&t, &u2) < 1e-12);
    let via_gauge = darboux(&sys, &singular_gauge(&g, 1.0, 0.0).unwrap()).unwrap();
    assert!(via_gauge.lambda.max_diff(&t.lambda) < 1e-12 * t.lambda.a.scale());
    let same = singular_darboux(&sys, 0.7, 0.7).unwrap();
    assert!(rhom_residual(&same, &u) < 1e-12);
}

#[test]
fn general_solution_family() {
    let g = half();
    let sys = regular(&g);
    let (psi, phi) = solve_system(&sys, [c(1.0), c(0.5)]).unwrap();
    let u0 = riccati_from_solution(&psi, &phi);
    let s0 = general_solution(&sys, &u0, 0.0).unwrap();
    assert!(s0.u.max_abs_diff(&u0) == 0.0);
    let ts = [0.0, 1.0, 2.0, 3.0];
    let us: Vec<GridFunction> = ts.iter().map(|&t| general_solution(&sys, &u0, t).unwrap().u).collect();
    for u in &us {
        assert!(rhom_residual(&sys, u) < 1e-8 * u.scale());
    }
    for i in 0..g.len() - 1 {
        let cr = cross_ratio([us[0].value(i), us[1].value(i), us[2].value(i), us[3].value(i)]).unwrap();
        assert!((cr - 0.25).norm() < 1e-10, "{i} {cr}");
    }
    for (s, t) in [(0.3, 0.7), (-1.0, 1.0), (2.0, -0.5)] {
        let ut = general_solution(&sys, &u0, t).unwrap().u;
        let ust = general_solution(&sys, &ut, s).unwrap().u;
        let direct = general_solution(&sys, &u0, s + t).unwrap().u;
        assert!(ust.max_abs_diff(&direct) < 1e-10 * direct.scale(), "({s},{t})");
    }
    // the family member with t = B / A is the solution with boundary (A, A u0(l) + B)
    let (a, b) = (1.0, 0.4);
    let last = g.len() - 1;
    let (p2, f2) = solve_system(&sys, [c(a), c(a) * u0.value(last) + b]).unwrap();
    let ut = general_solution(&sys, &u0, b / a).unwrap().u;
    assert!(riccati_from_solution(&p2, &f2).max_abs_diff(&ut) < 1e-8);
    assert!(general_solution(&sys, &(&u0 + 0.1), 1.0).is_err());
}

#[test]
fn second_order_system_reproduces_eigenfunction() {
    let ch = little_q_jacobi(0.5, 0.5, 0.5, 40, 3).unwrap();
    let lvl = &ch.levels[0];
    let p = ch.polynomial(3).unwrap();
    let coef = to_coefficients(lvl, c(ch.eigenvalue(3)));
    let sys = system_from_second_order(&coef).unwrap();
    assert!(!resolvent(&sys).converged);
    assert!(sys.at(0).is_none());
    let (psi, _) = propagate(&sys, [p.value(1), p.value(0)]);
    let n = 15;
    let err = (1..n).map(|i| (psi.value(i) - p.value(i)).norm()).fold(0.0, f64::max);
    let s = (0..n).map(|i| p.value(i).norm()).fold(0.0, f64::max);
    assert!(err / s < 1e-7, "{}", err / s);
    let g = half();
    let one = GridFunction::constant(&g, 1.0);
    let swap = taucalc::chain::CoefficientTriple { alpha: one.clone(), beta: &one * 0.0, gamma: -&one, lambda: c(0.0) };
    let sw = system_from_second_order(&swap).unwrap();
    assert_eq!(sw.at(3).unwrap(), Mat2::real(0.0, 1.0, 1.0, 0.0));
    let flat = taucalc::chain::CoefficientTriple { alpha: one.clone(), beta: one.clone(), gamma: &one * 0.0, lambda: c(1.0) };
    assert!(system_from_second_order(&flat).is_err());
}
