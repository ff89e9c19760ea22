//! Weight from the tau-Pearson equation T(B rho) = eta rho and the adjoint shift.

use taucalc::hilbert::{adjoint_shift, inner_product, pearson_residual, weight_from_pearson, PearsonTriple};
use taucalc::io::write_weight_csv;
use taucalc::residual::probe_window;
use taucalc::{GridFunction, GridSpec, OrbitGrid, TauMap};

fn main() -> taucalc::Result<()> {
    let (q, a, b) = (0.5, 0.5, 0.5);
    let grid = OrbitGrid::build(&TauMap::linear(q, 0.0), &GridSpec::semigroup(1.0).with_max_depth(60))?;
    let bb = GridFunction::from_real_fn(&grid, |x| x * (1.0 - x));
    let eta = GridFunction::from_real_fn(&grid, |x| a * q * x * (1.0 - b * q * x));
    let p = PearsonTriple::new(bb, eta);
    let w = weight_from_pearson(&p, 1.0)?;
    println!("rho at q^0..q^4: {:?}", (0..5).map(|i| w.rho.re(i)).collect::<Vec<_>>());
    println!("positive: {}, pearson residual {:e}", w.positive(), pearson_residual(&p, &w).max());

    let window = probe_window(&grid, 5);
    let phi = GridFunction::from_index_fn(&grid, |i| taucalc::grid_fn::c(if window.contains(&i) { (i as f64).sin() } else { 0.0 }));
    let psi = GridFunction::from_index_fn(&grid, |i| taucalc::grid_fn::c(if window.contains(&i) { 1.0 / (1.0 + i as f64) } else { 0.0 }));
    let lhs = inner_product(&phi.shift(1), &psi, &w).value;
    let rhs = inner_product(&phi, &adjoint_shift(&psi, &w)?, &w).value;
    println!("<T phi, psi> = {:.15}, <phi, T* psi> = {:.15}", lhs.re, rhs.re);

    let path = std::env::temp_dir().join("taucalc-weight.csv");
    write_weight_csv(&w, &path)?;
    println!("weight written to {}", path.display());
    Ok(())
}
