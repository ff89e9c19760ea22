//! A chain level as a three-term equation and back, and the truncated
//! tridiagonal eigenvalues against the chain's closed form.

use taucalc::bands::lowest_eigenvalues;
use taucalc::chain::{coefficient_equation_residual, from_coefficients, to_coefficients};
use taucalc::grid_fn::c;
use taucalc::scenarios::little_q_jacobi;

fn main() -> taucalc::Result<()> {
    let ch = little_q_jacobi(0.5, 0.5, 0.5, 40, 3)?;
    let lvl = &ch.levels[0];
    let coef = to_coefficients(lvl, c(ch.eigenvalue(2)));
    println!("alpha(1) {:.6} beta(1) {:.6} gamma(0.5) {:.6}", coef.alpha.re(0), coef.beta.re(0), coef.gamma.re(1));
    println!("P_2 solves it to {:.1e}", coefficient_equation_residual(&coef, &ch.polynomial(2)?));

    // seed = phi_0 / h_0 at the base
    let back = from_coefficients(&coef, &lvl.h, lvl.phi.value(0) / lvl.h.value(0))?;
    println!("recovered eta(0.25) {:.12} vs {:.12}", back.eta.re(2), lvl.eta.re(2));

    let deep = little_q_jacobi(0.85, 0.5, 0.5, 220, 4)?;
    for (n, e) in lowest_eigenvalues(&deep.levels[0], 200, 4)?.iter().enumerate() {
        println!("lambda_{n}: matrix {:.10}  chain {:.10}", e, deep.eigenvalue(n));
    }
    Ok(())
}
