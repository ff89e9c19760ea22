use taucalc::bands::lowest_eigenvalues;
use taucalc::chain::{descend, factorization_residual, lift, EigenPair};
use taucalc::grid_fn::c;
use taucalc::hilbert::inner_product;
use taucalc::scenarios::{const_g_scenario, fractional_chain, little_q_jacobi, Fractional};
use taucalc::GridFunction;

#[test]
fn little_q_jacobi_factorizes() {
    let ch = little_q_jacobi(0.5, 0.5, 0.5, 60, 4).unwrap();
    for k in 0..4 {
        let r = factorization_residual(&ch.levels[k], &ch.levels[k + 1], 4, 7).unwrap();
        assert!(r.residual < 1e-12 && r.band_residual < 1e-12 && r.two_path_gap < 1e-12, "{r:?}");
    }
}

#[test]
fn little_q_jacobi_polynomials_are_orthogonal_eigenfunctions() {
    let ch = little_q_jacobi(0.5, 0.5, 0.5, 60, 4).unwrap();
    let lvl = &ch.levels[0];
    let ps: Vec<GridFunction> = (0..4).map(|n| ch.polynomial(n).unwrap()).collect();
    let nrm = |p: &GridFunction| inner_product(p, p, &lvl.w).value.re.sqrt();
    for n in 0..4 {
        let pair = EigenPair::new(lvl, ps[n].clone(), c(ch.eigenvalue(n))).unwrap();
        assert!(pair.residual < 1e-11, "n={n} {}", pair.residual);
        for m in 0..n {
            let ip = inner_product(&ps[n], &ps[m], &lvl.w).value.norm();
            assert!(ip / (nrm(&ps[n]) * nrm(&ps[m])) < 1e-12);
        }
    }
    // known closed form (q^-n - 1)(1 - ab q^{n+1}) q / (1 - q)^2
    let (q, ab) = (0.5f64, 0.25);
    for n in 0..4 {
        let exact = (q.powi(-n) - 1.0) * (1.0 - ab * q.powi(n + 1)) * q / ((1.0 - q) * (1.0 - q));
        assert!((ch.eigenvalue(n as usize) - exact).abs() < 1e-12 * (1.0 + exact));
    }
    let ev = lowest_eigenvalues(lvl, 55, 4).unwrap();
    for n in 0..4 {
        assert!((ev[n] - ch.eigenvalue(n)).abs() < 1e-9 * (1.0 + ch.eigenvalue(n)));
    }
}

#[test]
fn eigenpairs_descend_and_lift() {
    let ch = little_q_jacobi(0.5, 0.3, 0.7, 60, 3).unwrap();
    let top = ch.eigenpair(1, 2).unwrap();
    let down = descend(&top, &ch.levels[0]).unwrap();
    assert!((down.lambda.re - ch.eigenvalue(3)).abs() < 1e-12);
    assert!(down.residual < 1e-10);
    let up = lift(&down, &ch.levels[0], &ch.levels[1]).unwrap();
    assert!((up.lambda - top.lambda).norm() < 1e-12);
    assert!(up.residual < 1e-10);
}

#[test]
fn const_gauge_kernel_matches_product_formula() {
    let sc = const_g_scenario(0.5, 1.0, -1.0, 0.4, 10, 3, 1).unwrap();
    for k in 0..3 {
        let r = factorization_residual(&sc.levels[k], &sc.levels[k + 1], 4, 3).unwrap();
        assert!(r.residual < 1e-9 && r.two_path_gap < 1e-9, "{r:?}");
    }
    let pair = sc.kernel_pair(1).unwrap();
    assert!(pair.residual < 1e-9 && (pair.lambda.re - 1.0).abs() < 1e-15);
    let dens = &(&pair.psi * &pair.psi) * &sc.levels[1].w.rho;
    let oracle = sc.kernel_density_oracle(1, &pair.psi);
    assert!(dens.max_abs_diff(&oracle) < 1e-12 * oracle.scale());
    let mut p = pair;
    let expected = [1.25, 1.3125];
    for k in 1..3 {
        p = lift(&p, &sc.levels[k], &sc.levels[k + 1]).unwrap();
        assert!((p.lambda.re - expected[k - 1]).abs() < 1e-15);
        assert!(p.residual < 1e-8, "{}", p.residual);
    }
}

#[test]
fn fractional_chain_factorizes() {
    for a in [0.5, 2.0] {
        let (_, lv) = fractional_chain(a, 1.0, 1.0, -1.0, 1.0, 30, 3).unwrap();
        for k in 0..3 {
            assert!(lv[k].w.positive());
            let r = factorization_residual(&lv[k], &lv[k + 1], 4, 5).unwrap();
            assert!(r.residual < 1e-12 && r.band_residual < 1e-12, "a={a} {r:?}");
        }
    }
}

#[test]
fn fractional_kernel_product() {
    for a in [0.5, 2.0] {
        let f = Fractional { a };
        let grid = taucalc::OrbitGrid::build(&f.map(), &taucalc::GridSpec::group(0.5).with_max_depth(20).with_backward_depth(20)).unwrap();
        for k in 1..4 {
            let phi = f.kernel_phi(&grid, k, f.kernel_scale(k));
            let psi = GridFunction::from_real_fn(&grid, |x| f.kernel_psi(k, x));
            let d = taucalc::calculus::delta_fn(&grid);
            let a_psi = &(&phi * &psi) - &(&psi.shift(1) / &d);
            let r = taucalc::residual::cleared(&a_psi, &GridFunction::constant(&grid, 0.0), (&phi * &psi).scale());
            assert!(r < 1e-12, "a={a} k={k} {r}");
        }
    }
}

#[test]
fn coefficient_round_trip() {
    use taucalc::chain::{coefficient_equation_residual, from_coefficients, to_coefficients};
    let ch = little_q_jacobi(0.5, 0.5, 0.5, 40, 2).unwrap();
    let lvl = &ch.levels[0];
    let coef = to_coefficients(lvl, c(ch.eigenvalue(2)));
    assert!(coefficient_equation_residual(&coef, &ch.polynomial(2).unwrap()) < 1e-12);
    let back = from_coefficients(&coef, &lvl.h, lvl.phi.value(0) / lvl.h.value(0)).unwrap();
    let window = taucalc::residual::probe_window(&ch.grid, 5);
    let near = |a: &GridFunction, b: &GridFunction| {
        let a = a.restrict(|i| window.contains(&i));
        a.max_abs_diff(b) / a.scale()
    };
    assert!(near(&back.phi, &lvl.phi) < 1e-9, "{}", near(&back.phi, &lvl.phi));
    assert!(near(&back.eta, &lvl.eta) < 1e-9);
    assert!(near(&back.b, &lvl.b) < 1e-9);
}

#[test]
fn scenario_chain_equations_hold() {
    use taucalc::chain::chain_equation_residual;
    let ch = little_q_jacobi(0.5, 0.5, 0.5, 60, 3).unwrap();
    let sc = const_g_scenario(0.5, 1.0, -1.0, 0.4, 10, 3, 1).unwrap();
    let (_, fr) = fractional_chain(0.5, 1.0, 1.0, -1.0, 1.0, 30, 3).unwrap();
    for lv in [&ch.levels, &sc.levels, &fr] {
        for k in 0..3 {
            let (l, n) = (&lv[k], &lv[k + 1]);
            let r = chain_equation_residual(l, &n.h, &l.g, l.c, l.d);
            assert!(r < 1e-13, "k={k} {r}");
        }
    }
}
