//! Little q-Jacobi chain: eigenvalues from the chain constants, polynomials by
//! descent, and the factorization check between consecutive levels.

use taucalc::chain::factorization_residual;
use taucalc::hilbert::inner_product;
use taucalc::scenarios::little_q_jacobi;

fn main() -> taucalc::Result<()> {
    let ch = little_q_jacobi(0.5, 0.5, 0.5, 60, 5)?;
    for k in 0..5 {
        let r = factorization_residual(&ch.levels[k], &ch.levels[k + 1], 10, 1)?;
        println!("level {k}: c = {:<10} residual {:.2e}  band {:.2e}", ch.c[k], r.residual, r.band_residual);
    }
    let ps: Vec<_> = (0..4).map(|n| ch.polynomial(n)).collect::<taucalc::Result<_>>()?;
    for (n, p) in ps.iter().enumerate() {
        let pair = ch.eigenpair(0, n)?;
        println!("P_{n}: lambda {:.6}  residual {:.1e}  P_{n}(1) = {:.6}", pair.lambda.re, pair.residual, p.re(0));
    }
    let w = &ch.levels[0].w;
    println!("<P_1, P_3> = {:.2e}", inner_product(&ps[1], &ps[3], w).value.norm());
    Ok(())
}
