use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use taucalc::calculus::tau_derivative;
use taucalc::chain::{apply_a, eigen_residual};
use taucalc::covariance::*;
use taucalc::grid_fn::c;
use taucalc::hilbert::{inner_product, pearson_residual};
use taucalc::scenarios::little_q_jacobi;
use taucalc::{Complex64, GridFunction, GridSpec, OrbitGrid, TauMap};

#[test]
fn identity_and_translation_conjugates() {
    let m = TauMap::fractional(2.0);
    let id = conjugate_map(&m, &VariableChange::identity()).unwrap();
    for x in [0.1, 0.5, 0.9] {
        assert_eq!(id.forward(x), m.forward(x));
    }
    let shift = VariableChange::affine(1.0, 3.0).unwrap();
    let t = conjugate_map(&TauMap::linear(0.5, 0.0), &shift).unwrap();
    assert!((t.forward(5.0) - 4.0).abs() < 1e-15);
}

#[test]
fn functoriality() {
    let m = TauMap::linear(0.5, 0.0);
    let k1 = VariableChange::powerlaw(2.0).unwrap();
    let k2 = VariableChange::ln();
    let two_step = conjugate_map(&conjugate_map(&m, &k1).unwrap(), &k2).unwrap();
    let direct = conjugate_map(&m, &k1.then(&k2)).unwrap();
    for y in [-3.0, -0.5, 0.0, 1.2] {
        assert!((two_step.forward(y) - direct.forward(y)).abs() < 1e-11);
        assert!((two_step.inverse(y) - direct.inverse(y)).abs() < 1e-11);
    }
}

#[test]
fn ln_transport_is_unitary_and_keeps_eigenpairs() {
    let ch = little_q_jacobi(0.5, 0.5, 0.5, 60, 4).unwrap();
    let lvl = &ch.levels[0];
    let ln = VariableChange::ln();
    let target = image_grid(&ch.grid, &ln).unwrap();
    assert!(target.limit_at(0) == f64::NEG_INFINITY);
    assert!((target.delta(3) + 0.5f64.ln()).abs() < 1e-13);
    let t = transport_level(lvl, &ln, &target).unwrap();
    let pr = pearson_residual(&t.pearson(), &t.w).max();
    assert!(pr < 1e-9, "{pr}");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let window = taucalc::residual::probe_window(&ch.grid, 5);
    for _ in 0..30 {
        let a = taucalc::chain::random_probe(&ch.grid, &window, &mut rng);
        let b = taucalc::chain::random_probe(&ch.grid, &window, &mut rng);
        let (ta, tb) = (transport_solution(&a, &ln, &target).unwrap(), transport_solution(&b, &ln, &target).unwrap());
        let before = inner_product(&a, &b, &lvl.w).value;
        let after = inner_product(&ta, &tb, &t.w).value;
        assert!((before - after).norm() < 1e-10 * before.norm().max(1.0));
    }
    for n in 0..4 {
        let p = ch.polynomial(n).unwrap();
        let lam = c(ch.eigenvalue(n));
        let r0 = eigen_residual(lvl, &p, lam).unwrap();
        let r1 = eigen_residual(&t, &transport_solution(&p, &ln, &target).unwrap(), lam).unwrap();
        assert!(r1 <= 2.0 * r0.max(1e-15) && r1 < 1e-8, "n={n} {r0} {r1}");
    }
}

#[test]
fn exp_transport_reproduces_weight_formula() {
    let q = 0.5;
    let grid = OrbitGrid::build(&TauMap::linear(q, 0.0), &GridSpec::semigroup(1.0)).unwrap();
    let b = GridFunction::from_real_fn(&grid, |x| 1.0 + x);
    let eta = GridFunction::from_real_fn(&grid, |x| 1.0 + 0.3 * x);
    let lvl = taucalc::chain::ChainLevel::from_f(0, b, eta, GridFunction::constant(&grid, 1.0), GridFunction::constant(&grid, 0.0)).unwrap();
    let ex = VariableChange::exp();
    let target = image_grid(&grid, &ex).unwrap();
    assert!((target.limit_at(0) - 1.0).abs() < 1e-15);
    let m = target.map();
    assert!((m.forward(2.0) - 2f64.powf(q)).abs() < 1e-14);
    let t = transport_level(&lvl, &ex, &target).unwrap();
    // near y = 1 both sides lose digits to y - y^q
    for i in (0..target.len()).filter(|&i| target.x(i) - 1.0 > 1e-3) {
        let y = target.x(i);
        let expect = (1.0 - q) * y.ln() / (y - y.powf(q)) * lvl.w.rho.re(i);
        assert!((t.w.rho.re(i) - expect).abs() < 1e-9 * expect.abs(), "{i}");
    }
    assert!(pearson_residual(&t.pearson(), &t.w).max() < 1e-9);
}

#[test]
fn derivative_and_ladder_covariance() {
    let ch = little_q_jacobi(0.5, 0.3, 0.7, 50, 3).unwrap();
    let lvl = &ch.levels[0];
    let k = VariableChange::ln();
    let target = image_grid(&ch.grid, &k).unwrap();
    let t = transport_level(lvl, &k, &target).unwrap();
    let f = GridFunction::from_real_fn(&ch.grid, |x| 1.0 - 2.0 * x + x * x * x);
    let tf = transport_solution(&f, &k, &target).unwrap();
    let lhs = transport_solution(&tau_derivative(&f), &k, &target).unwrap();
    let rhs = &kappa_derivative(&ch.grid, &target) * &tau_derivative(&tf);
    assert!(lhs.max_abs_diff(&rhs) < 1e-10 * lhs.scale());
    let psi = ch.polynomial(3).unwrap();
    let moved = transport_solution(&apply_a(lvl, &psi).unwrap(), &k, &target).unwrap();
    let direct = apply_a(&t, &transport_solution(&psi, &k, &target).unwrap()).unwrap();
    assert!(moved.max_abs_diff(&direct) < 1e-9 * moved.scale());
}

#[test]
fn mismatched_target_is_rejected() {
    let ch = little_q_jacobi(0.5, 0.5, 0.5, 20, 1).unwrap();
    let other = OrbitGrid::build(&TauMap::linear(0.5, 0.0), &GridSpec::semigroup(2.0).with_max_depth(20)).unwrap();
    let z = GridFunction::from_values(&ch.grid, vec![Complex64::new(0.0, 0.0); ch.grid.len()]);
    assert!(transport_solution(&z, &VariableChange::ln(), &other).is_err());
}
