//! Driving the chain command from a JSON config, as the binary does.

use taucalc::commands::cmd_chain;
use taucalc::config::RunConfig;

fn main() -> taucalc::Result<()> {
    let mut cfg = RunConfig::from_json(
        r#"{
            "map": {"linear": {"q": 0.5}},
            "grid": {"mode": "semigroup", "base": 1.0, "depth": 50},
            "constants": {"q": 0.5},
            "level0": {"functions": {"B": "x*(1 - x)", "eta": "0.25*x*(1 - 0.25*x)", "f": "0", "h": "1"}},
            "chain": {"levels": 3, "source": {"explicit": {"g": "1/q", "c": "(1 - 0.25*q^(2*k + 2)) / (q^k*(1 - q))"}}}
        }"#,
    )?;
    cfg.out = Some(std::env::temp_dir().join("taucalc-run-config"));
    let m = cmd_chain(&cfg)?;
    for l in &m.levels {
        println!("k {} c {:<10} lambda {:?} comm {:?}", l.k, l.c[0], l.lambda.map(|v| v[0]), l.residuals.comm);
    }
    println!("failures: {:?}", m.failures);
    println!("preset qhahn as JSON:\n{}", serde_json::to_string_pretty(&RunConfig::preset("qhahn")?)?);
    Ok(())
}
