//! Plain q-calculus on the orbit `x0 q^n`, written from the textbook formulas
//! without the grid machinery. Serves as an independent reference for
//! `tau(x) = q x`.

/// Orbit points `x0 q^n`, `n = 0..len`.
pub fn points(q: f64, x0: f64, len: usize) -> Vec<f64> {
    (0..len).map(|n| x0 * q.powi(n as i32)).collect()
}

/// `D_q f(x) = (f(x) - f(q x)) / ((1 - q) x)`.
pub fn q_derivative(f: impl Fn(f64) -> f64, q: f64, x: f64) -> f64 {
    (f(x) - f(q * x)) / ((1.0 - q) * x)
}

/// Jackson integral `int_0^x f d_q t = (1 - q) x sum_{n < terms} q^n f(x q^n)`.
pub fn jackson_integral(f: impl Fn(f64) -> f64, q: f64, x: f64, terms: usize) -> f64 {
    let mut qn = 1.0;
    let mut s = 0.0;
    for _ in 0..terms {
        s += qn * f(x * qn);
        qn *= q;
    }
    (1.0 - q) * x * s
}

/// `e_q(x) = prod_{n < terms} 1 / (1 - (1 - q) x q^n)`.
pub fn q_exponential(q: f64, x: f64, terms: usize) -> f64 {
    let mut qn = 1.0;
    let mut p = 1.0;
    for _ in 0..terms {
        p /= 1.0 - (1.0 - q) * x * qn;
        qn *= q;
    }
    p
}

/// `prod_{n < terms} F(x q^n)`.
pub fn q_product(f: impl Fn(f64) -> f64, q: f64, x: f64, terms: usize) -> f64 {
    let mut qn = 1.0;
    let mut p = 1.0;
    for _ in 0..terms {
        p *= f(x * qn);
        qn *= q;
    }
    p
}

/// Solution of `D_q psi = f psi`, `psi(0) = init`:
/// `psi(x) = init / prod_n (1 - (1 - q) x q^n f(x q^n))`.
pub fn q_first_order(f: impl Fn(f64) -> f64, q: f64, x: f64, init: f64, terms: usize) -> f64 {
    init / q_product(|t| 1.0 - (1.0 - q) * t * f(t), q, x, terms)
}
