//! Changes of variable: conjugated maps, image grids, and transport of a
//! chain level and its eigenfunctions.

use taucalc::chain::eigen_residual;
use taucalc::covariance::{conjugate_map, equivalence_obstruction, image_grid, three_fixed_point_cubic, transport_level, transport_solution, VariableChange};
use taucalc::grid_fn::c;
use taucalc::scenarios::little_q_jacobi;
use taucalc::TauMap;

fn main() -> taucalc::Result<()> {
    let m = TauMap::linear(0.5, 0.0);
    let t = conjugate_map(&m, &VariableChange::exp())?;
    println!("exp conjugate of x/2 at 4: {:.12} (4^0.5 = 2)", t.forward(4.0));
    let s = conjugate_map(&m, &VariableChange::ln())?;
    println!("ln conjugate is a translation: {:.12}", s.forward(0.0));

    let ch = little_q_jacobi(0.5, 0.5, 0.5, 60, 3)?;
    let ln = VariableChange::ln();
    let target = image_grid(&ch.grid, &ln)?;
    let lvl = transport_level(&ch.levels[0], &ln, &target)?;
    println!("image grid limit {}", target.limit_at(0));
    for n in 0..3 {
        let p = transport_solution(&ch.polynomial(n)?, &ln, &target)?;
        println!("P_{n} after transport: eigen residual {:.1e}", eigen_residual(&lvl, &p, c(ch.eigenvalue(n)))?);
    }

    let rep = equivalence_obstruction(&three_fixed_point_cubic(), (-2.0, 2.0), &TauMap::fractional(2.0), (0.0, 1.0), 2000);
    println!("cubic vs fractional: {} vs {} fixed points -> {:?}", rep.fixed_points_a, rep.fixed_points_b, rep.verdict);
    Ok(())
}
