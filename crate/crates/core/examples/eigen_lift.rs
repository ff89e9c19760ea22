//! Constant-gauge q-chain: a kernel function of A*_{k-1} at level 1 is lifted
//! with A_k, the eigenvalue following lambda_{k+1} = (lambda_k - c_k) / d_k.

use taucalc::chain::lift;
use taucalc::scenarios::const_g_scenario;

fn main() -> taucalc::Result<()> {
    let sc = const_g_scenario(0.5, 1.0, -1.0, 0.4, 10, 5, 1)?;
    let mut pair = sc.kernel_pair(1)?;
    println!("level 1: lambda {:.6} residual {:.1e}", pair.lambda.re, pair.residual);
    for k in 1..5 {
        pair = lift(&pair, &sc.levels[k], &sc.levels[k + 1])?;
        let ray = pair.rayleigh(&sc.levels[k + 1])?;
        println!("level {}: lambda {:.6} rayleigh {:.6} residual {:.1e}", k + 1, pair.lambda.re, ray.re, pair.residual);
    }
    println!("beta root at level 1: {}", sc.beta_root(1));
    Ok(())
}
