//! One line per acceptance criterion; exits nonzero if any fails.

use taucalc::validate::{run, Options};

fn main() {
    let reports = run(&Options::default());
    let mut failed = 0;
    for r in &reports {
        match r.first_failure() {
            None if r.passed => println!("criterion {:>2} {:<14} PASS", r.id, r.name),
            other => {
                failed += 1;
                println!("criterion {:>2} {:<14} FAIL  {}", r.id, r.name, other.unwrap_or_default());
            }
        }
    }
    println!("{} of {} criteria passed", reports.len() - failed, reports.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
