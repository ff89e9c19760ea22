//! Darboux transforms of a 2x2 system, and the singular gauge that
//! regularizes the xi-route system near the limit point.

use taucalc::chain::ChainLevel;
use taucalc::grid_fn::c;
use taucalc::riccati::{darboux, darboux_solution, singular_darboux, singular_gauge, solve_system, system_residual, Mat2, MatrixFn, TwoByTwoSystem};
use taucalc::validate::xi_route_system;
use taucalc::{GridFunction, GridSpec, OrbitGrid, TauMap};

fn main() -> taucalc::Result<()> {
    let g = OrbitGrid::build(&TauMap::linear(0.5, 0.0), &GridSpec::semigroup(1.0))?;
    let sys = TwoByTwoSystem::from_tilde(&MatrixFn::from_fn(&g, |x| Mat2::real(0.3 + x, 0.5 - x * x, 0.2 * x - 0.4, -0.6 + 0.1 * x)))?;
    let (psi, phi) = solve_system(&sys, [c(1.0), c(0.5)])?;

    let d = MatrixFn::from_fn(&g, |x| Mat2::real(1.0 + x, x, -0.5, 2.0));
    let t = darboux(&sys, &d)?;
    let (p2, f2) = darboux_solution(&d, &psi, &phi)?;
    println!("regular transform: residual {:.1e}", system_residual(&t, &p2, &f2));

    let s = singular_darboux(&sys, 1.0, 0.0)?;
    let (p3, f3) = darboux_solution(&singular_gauge(&g, 1.0, 0.0)?, &psi, &phi)?;
    println!("singular transform: residual {:.1e}", system_residual(&s, &p3, &f3));

    let b = GridFunction::from_real_fn(&g, |x| 1.0 + x);
    let eta = GridFunction::from_real_fn(&g, |x| 1.0 + 0.3 * x - 0.2 * x * x);
    let level = ChainLevel::from_f(0, b, eta, GridFunction::constant(&g, 1.0), GridFunction::constant(&g, 0.0))?;
    let raw = xi_route_system(&level)?.tilde();
    let reg = singular_darboux(&xi_route_system(&level)?, 0.0, -1.0)?.tilde();
    for i in [0, 5, 10, 15, 20] {
        let (a, r) = (raw.at(i).unwrap(), reg.at(i).unwrap());
        println!("x = {:<10.3e} |raw| {:<12.4e} |regularized| {:.6}  top-right {:.8}", g.x(i), a.max_norm(), r.max_norm(), r.b.re);
    }
    println!("expected top-right limit {:.8}", -(0.5 - 0.25) / 1.0);
    Ok(())
}
