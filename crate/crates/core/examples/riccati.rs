//! A 2x2 first-order system on the orbit of 1 under x/2: resolvent product,
//! boundary-value solve, and the one-parameter family of Riccati solutions.

use taucalc::grid_fn::c;
use taucalc::io::{write_json, write_system_csv, ResolventDiagnostics};
use taucalc::riccati::{
    cross_ratio, general_solution, resolvent, riccati_from_solution, riccati_residual, solve_system, triangular_resolvent,
    resolvent_gap, Mat2, MatrixFn, TwoByTwoSystem,
};
use taucalc::{GridSpec, OrbitGrid, TauMap};

fn main() -> taucalc::Result<()> {
    let g = OrbitGrid::build(&TauMap::linear(0.5, 0.0), &GridSpec::semigroup(1.0))?;
    let sys = TwoByTwoSystem::from_tilde(&MatrixFn::from_fn(&g, |x| Mat2::real(0.3 + x, 0.5 - x * x, 0.2 * x - 0.4, -0.6 + 0.1 * x)))?;
    let r = resolvent(&sys);
    println!("resolvent: converged {} criterion sum {:.4} steps {} cauchy gap {:.1e}", r.converged, r.criterion_sum, r.steps, r.cauchy_gap);

    let (psi, phi) = solve_system(&sys, [c(1.0), c(0.5)])?;
    println!("psi(1) {:.6}  phi(1) {:.6}", psi.re(0), phi.re(0));
    let u0 = riccati_from_solution(&psi, &phi);
    println!("riccati residual of u0 {:.1e}", riccati_residual(&sys, &u0));

    let us: Vec<_> = [0.0, 1.0, 2.0, 3.0].iter().map(|&t| general_solution(&sys, &u0, t).map(|s| s.u)).collect::<taucalc::Result<_>>()?;
    let cr = cross_ratio([us[0].value(3), us[1].value(3), us[2].value(3), us[3].value(3)])?;
    println!("cross-ratio of u^0, u^1, u^2, u^3 at x = 1/8: {:.12}", cr.re);

    // upper triangular: closed form against the brute-force product
    let tri = TwoByTwoSystem::from_fn(&g, |x| Mat2::real(1.0 + 0.5 * x, 0.3 + x, 0.0, 1.0 + 0.2 * x))?;
    println!("triangular gap {:.1e}", resolvent_gap(&triangular_resolvent(&tri)?, &resolvent(&tri)));

    let dir = std::env::temp_dir().join("taucalc-riccati");
    std::fs::create_dir_all(&dir)?;
    write_system_csv(&sys, &dir.join("system.csv"))?;
    write_json(&ResolventDiagnostics::from(&r), &dir.join("resolvent.json"))?;
    Ok(())
}
