//! Running part of the acceptance suite programmatically.

use taucalc::validate::{run, Options};

fn main() {
    for name in ["q-oracle", "riccati"] {
        for r in run(&Options { tol: None, only: Some(name.into()) }) {
            println!("criterion {} {}: {}", r.id, r.name, if r.passed { "pass" } else { "FAIL" });
            for ch in &r.checks {
                println!("  {:<40} {:.2e} (threshold {:.0e})", ch.name, ch.measured, ch.threshold);
            }
        }
    }
}
