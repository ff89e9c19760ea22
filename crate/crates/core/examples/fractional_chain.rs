//! Fractional map x -> a x / ((a - 1) x + 1): closed forms for tau^k and a
//! chain with B_k proportional to delta delta_-1 on a two-sided orbit.

use taucalc::chain::factorization_residual;
use taucalc::scenarios::{fractional_chain, Fractional};

fn main() -> taucalc::Result<()> {
    let f = Fractional { a: 2.0 };
    let m = f.map();
    let mut x = 0.3;
    for k in 0..4 {
        println!("tau^{k}(0.3) = {:.15}  closed form {:.15}", x, f.tau_k(k, 0.3));
        x = m.forward(x);
    }
    println!("limit {}", f.limit());
    for lambda in [-1, 0, 1] {
        println!("ratio for lambda {lambda}: {:.6}, gate {:.1e}", f.ratio(lambda), f.gate(f.ratio(lambda), lambda));
    }

    let (grid, levels) = fractional_chain(2.0, 1.0, 1.0, -1.0, 1.0, 30, 3)?;
    println!("group orbit of 1/2: {} points", grid.len());
    for k in 0..3 {
        let r = factorization_residual(&levels[k], &levels[k + 1], 8, 2)?;
        println!("level {k}: g = {:.6} residual {:.1e} positive {}", levels[k].g.re(5), r.residual, levels[k].w.positive());
    }
    Ok(())
}
