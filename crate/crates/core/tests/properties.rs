use std::collections::BTreeMap;

use proptest::prelude::*;
use taucalc::calculus::{tau_antiderivative, tau_derivative, tau_integral};
use taucalc::covariance::{conjugate_map, VariableChange};
use taucalc::grid_fn::c;
use taucalc::hilbert::{adjoint_shift, inner_product};
use taucalc::residual::{cleared, probe_window, scale_of};
use taucalc::riccati::cross_ratio;
use taucalc::scenarios::little_q_jacobi;
use taucalc::{Complex64, GridFunction, GridSpec, OrbitGrid, TauMap};

fn poly(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

fn maps() -> impl Strategy<Value = TauMap> {
    prop_oneof![
        (0.2f64..0.9).prop_map(|q| TauMap::linear(q, 0.0)),
        (0.2f64..0.9, -0.5f64..0.5).prop_map(|(q, h)| TauMap::linear(q, h)),
        (1.3f64..4.0).prop_map(TauMap::fractional),
        (0.25f64..0.8).prop_map(TauMap::fractional),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn leibniz_and_antiderivative(map in maps(), p1 in prop::collection::vec(-2.0f64..2.0, 1..5), p2 in prop::collection::vec(-2.0f64..2.0, 1..5)) {
        let grid = OrbitGrid::build(&map, &GridSpec::semigroup(0.6)).unwrap();
        let f = GridFunction::from_real_fn(&grid, |x| poly(&p1, x));
        let g = GridFunction::from_real_fn(&grid, |x| poly(&p2, x));
        let lhs = tau_derivative(&(&f * &g));
        let rhs = &(&f.shift(1) * &tau_derivative(&g)) + &(&g * &tau_derivative(&f));
        prop_assert!(cleared(&lhs, &rhs, scale_of(&[&lhs, &rhs, &f, &g])) < 1e-10);
        let back = tau_derivative(&tau_antiderivative(&f));
        prop_assert!(cleared(&back, &f, scale_of(&[&f])) < 1e-10);
    }

    #[test]
    fn integral_is_linear(map in maps(), a in -3.0f64..3.0, p1 in prop::collection::vec(-2.0f64..2.0, 1..4), p2 in prop::collection::vec(-2.0f64..2.0, 1..4)) {
        let grid = OrbitGrid::build(&map, &GridSpec::interval(0.3, 0.7)).unwrap();
        let f = GridFunction::from_real_fn(&grid, |x| poly(&p1, x));
        let g = GridFunction::from_real_fn(&grid, |x| poly(&p2, x));
        let lhs = tau_integral(&(&(&f * a) + &g)).value;
        let rhs = tau_integral(&f).value * a + tau_integral(&g).value;
        prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + f.scale() * a.abs() + g.scale()));
    }

    #[test]
    fn shift_adjoint_pairing(a in 0.1f64..0.9, b in 0.1f64..0.9, seed in any::<u64>()) {
        use rand::SeedableRng;
        let ch = little_q_jacobi(0.5, a, b, 50, 1).unwrap();
        let w = &ch.levels[0].w;
        let window = probe_window(&ch.grid, 5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let phi = taucalc::chain::random_probe(&ch.grid, &window, &mut rng);
        let psi = taucalc::chain::random_probe(&ch.grid, &window, &mut rng);
        let left = inner_product(&phi.shift(1), &psi, w).value;
        let right = inner_product(&phi, &adjoint_shift(&psi, w).unwrap(), w).value;
        let size = inner_product(&phi, &phi, w).value.norm().sqrt() * inner_product(&psi, &psi, w).value.norm().sqrt();
        prop_assert!((left - right).norm() < 1e-12 * size.max(1e-300));
    }

    #[test]
    fn variable_change_round_trip(p in 0.2f64..4.0, s in 0.5f64..3.0, t in -2.0f64..2.0, x in 0.05f64..0.95) {
        for ch in [VariableChange::powerlaw(p).unwrap(), VariableChange::affine(s, t).unwrap(), VariableChange::ln()] {
            let y = ch.apply(x);
            prop_assert!((ch.invert(y) - x).abs() < 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn conjugation_commutes_with_change(q in 0.2f64..0.9, p in 0.3f64..3.0, x in 0.05f64..0.95) {
        let m = TauMap::linear(q, 0.0);
        let k = VariableChange::powerlaw(p).unwrap();
        let t = conjugate_map(&m, &k).unwrap();
        let lhs = t.forward(k.apply(x));
        let rhs = k.apply(m.forward(x));
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        prop_assert!((t.inverse(t.forward(0.5)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cross_ratio_is_mobius_invariant(u in prop::array::uniform4(-5.0f64..5.0), m in prop::array::uniform4(-2.0f64..2.0)) {
        let pts: [Complex64; 4] = u.map(c);
        let ok = (0..4).all(|i| (i + 1..4).all(|j| (pts[i] - pts[j]).norm() > 1e-2));
        let det = m[0] * m[3] - m[1] * m[2];
        prop_assume!(ok && det.abs() > 1e-2);
        let mob = |z: Complex64| (z * m[0] + m[1]) / (z * m[2] + m[3]);
        prop_assume!(pts.iter().all(|z| (*z * m[2] + m[3]).norm() > 1e-2));
        let before = cross_ratio(pts).unwrap();
        let after = cross_ratio(pts.map(mob)).unwrap();
        prop_assert!((before - after).norm() < 1e-8 * (1.0 + before.norm()));
    }

    #[test]
    fn expressions_match_closures(a in -5.0f64..5.0, b in -5.0f64..5.0, x in 0.1f64..3.0) {
        let mut k = BTreeMap::new();
        k.insert("a".to_string(), a);
        k.insert("b".to_string(), b);
        let e = taucalc::expr::parse("a*x^2 - b/x + exp(ln(x)) - (a - b)", &k).unwrap();
        let direct = a * x * x - b / x + x - (a - b);
        prop_assert!((e.eval(x) - direct).abs() < 1e-12 * (1.0 + direct.abs()));
    }
}
