//! Orbit grids for the three modes, and the CSV export.

use taucalc::io::{limit_diagnostics, write_grid_csv};
use taucalc::orbit::limit_point;
use taucalc::{GridSpec, OrbitGrid, TauMap};

fn main() -> taucalc::Result<()> {
    let half = TauMap::linear(0.5, 0.0);
    let g = OrbitGrid::build(&half, &GridSpec::semigroup(1.0).with_max_depth(10))?;
    println!("x/2 from 1: {} points, last {:e}", g.len(), g.x(g.len() - 1));

    let frac = TauMap::fractional(2.0);
    let lr = limit_point(&frac, 0.5, 1e-13, 10_000);
    println!("fractional a=2 from 0.5 -> {} after {} steps", lr.value, lr.iterations);

    // two forward orbits with a shared limit
    let iv = OrbitGrid::build(&frac, &GridSpec::interval(0.2, 0.6))?;
    for s in iv.segments() {
        println!("segment base {} sign {} len {}", s.base, s.sign, s.len());
    }

    // group orbit, backward direction cut by a decaying weight
    let grp = OrbitGrid::build(&half, &GridSpec::group(1.0).with_backward_depth(40).with_backward_weight(|x| (-x * x).exp()))?;
    println!("group orbit: first step {}, backward converged {}", grp.step(0), grp.backward_converged);

    let dir = std::env::temp_dir().join("taucalc-orbit-grid");
    std::fs::create_dir_all(&dir)?;
    write_grid_csv(&g, &dir.join("grid.csv"))?;
    let d = limit_diagnostics(&iv, 1e-13, 10_000);
    println!("contraction estimate {:.4}, csv in {}", d.contraction_estimate, dir.display());
    Ok(())
}
