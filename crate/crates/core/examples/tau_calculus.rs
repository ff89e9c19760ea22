//! Derivative, integral and antiderivative on an orbit, against the
//! Jackson q-calculus for tau(x) = q x.

use taucalc::calculus::{tau_antiderivative, tau_derivative, tau_exponential, tau_integral};
use taucalc::qoracle;
use taucalc::{GridFunction, GridSpec, OrbitGrid, TauMap};

fn main() -> taucalc::Result<()> {
    let q = 0.7;
    let grid = OrbitGrid::build(&TauMap::linear(q, 0.0), &GridSpec::semigroup(1.0))?;
    let f = GridFunction::from_real_fn(&grid, |x| x * x * x - 2.0 * x);

    let d = tau_derivative(&f);
    let jackson = qoracle::q_derivative(|x| x * x * x - 2.0 * x, q, 1.0);
    println!("d_tau f(1) = {:.15}  q-derivative {:.15}", d.re(0), jackson);

    let integral = tau_integral(&f);
    println!("int_0^1 f d_tau = {:.15} (tail {:e}, converged {})", integral.value.re, integral.tail, integral.converged);
    println!("jackson          = {:.15}", qoracle::jackson_integral(|x| x * x * x - 2.0 * x, q, 1.0, 400));

    let back = tau_derivative(&tau_antiderivative(&f));
    println!("d_tau of antiderivative at x=0.49: {:.12} vs {:.12}", back.re(2), f.re(2));

    let e = tau_exponential(&grid)?;
    println!("tau-exponential at 1: {:.12}, q-exp {:.12}", e.re(0), qoracle::q_exponential(q, 1.0, 400));
    Ok(())
}
