//! Gauge construction for c = 0 from the asymptotics of xi, with the
//! constant fixed by the orbit base.

use taucalc::chain::{advance_level, chain_equation_residual, factorization_residual, ChainLevel};
use taucalc::gauge::{base_matched_xi0, particular_gauge_xi, xi_recursion_residual};
use taucalc::grid_fn::c;
use taucalc::{GridFunction, GridSpec, OrbitGrid, TauMap};

fn main() -> taucalc::Result<()> {
    let g = OrbitGrid::build(&TauMap::linear(0.5, 0.0), &GridSpec::semigroup(1.0))?;
    let one = GridFunction::constant(&g, 1.0);
    let b = GridFunction::from_real_fn(&g, |x| 1.0 - x);
    let eta = GridFunction::from_real_fn(&g, |x| 1.0 + 0.3 * x - 0.2 * x * x);
    let mut level = ChainLevel::from_f(0, b, eta, one.clone(), GridFunction::constant(&g, 0.0))?;
    for k in 0..3 {
        let xi0 = base_matched_xi0(&level)?;
        let xg = particular_gauge_xi(&level, c(1.0), xi0)?;
        let linked = level.with_link(xg.g.clone(), c(0.0), c(1.0));
        let next = advance_level(&linked, &xg.g, &one, c(1.0))?;
        let fr = factorization_residual(&linked, &next, 8, 4)?;
        println!(
            "level {k}: xi0 {:.6}  xi recursion {:.1e}  chain {:.1e}  factorization {:.1e}",
            xi0.re,
            xi_recursion_residual(&linked, &xg.xi, c(0.0)),
            chain_equation_residual(&linked, &one, &xg.g, c(0.0), c(1.0)),
            fr.residual
        );
        level = next;
    }
    Ok(())
}
