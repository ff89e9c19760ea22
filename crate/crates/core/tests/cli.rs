use std::path::Path;
use std::process::{Command, Output};

fn taucalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taucalc")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn repo_file(rel: &str) -> String {
    format!("{}/../../{rel}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn grid_presets() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lin");
    let o = taucalc(&["grid", "--preset", "linear", "--depth", "25", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = std::fs::read_to_string(out.join("grid.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 26);
    assert_eq!(json(&out.join("limits.json"))["segments"][0]["limit"], 0.0);

    let out = dir.path().join("frac");
    let o = taucalc(&["grid", "--preset", "fractional", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let lim = json(&out.join("limits.json"))["segments"][0]["limit"].as_f64().unwrap();
    assert!((lim - 1.0).abs() < 1e-12);
}

#[test]
fn coincident_orbits_is_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"map": {"linear": {"q": 0.5}}, "grid": {"mode": "interval", "a": 1.0, "b": 0.125}}"#).unwrap();
    let o = taucalc(&["grid", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("orbit of b hits orbit of a"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"map": {"linear": {"q": 0.5}}, "gird": {}}"#).unwrap();
    assert_eq!(code(&taucalc(&["grid", "--config", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&taucalc(&["chain", "--preset", "no-such-preset"])), 2);
    assert_eq!(code(&taucalc(&["grid"])), 2);
    assert_eq!(code(&taucalc(&["validate", "--criterion", "no-such-criterion"])), 2);

    std::fs::write(
        &cfg,
        r#"{"map": {"linear": {"q": 0.5}}, "grid": {"mode": "semigroup", "base": 1.0},
            "level0": {"coefficients": {"alpha": "-1", "beta": "1", "gamma": "x"}},
            "chain": {"levels": 1, "source": {"explicit": {"g": "2"}}}}"#,
    )
    .unwrap();
    let o = taucalc(&["chain", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("seed"));

    std::fs::write(
        &cfg,
        r#"{"map": {"linear": {"q": 0.5}}, "grid": {"mode": "semigroup", "base": 1.0},
            "level0": {"functions": {"B": "1 - x", "eta": "1 + y"}},
            "chain": {"levels": 1, "source": {"xi_route": {}}}}"#,
    )
    .unwrap();
    let o = taucalc(&["chain", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unknown name 'y'"));
}

#[test]
fn qhahn_chain_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = taucalc(&["chain", "--preset", "qhahn", "--out", d.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for k in 0..=5 {
        assert!(a.join(format!("level_{k}.csv")).exists());
    }
    assert!(!a.join("level_6.csv").exists());
    let m = json(&a.join("manifest.json"));
    assert_eq!(m["levels"].as_array().unwrap().len(), 6);
    assert!(m["failures"].as_array().unwrap().is_empty());
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for n in names {
        let (x, y) = (std::fs::read(a.join(&n)).unwrap(), std::fs::read(b.join(&n)).unwrap());
        assert!(x == y, "{n:?} differs between runs");
    }
}

#[test]
fn xi_route_emits_gauges() {
    let dir = tempfile::tempdir().unwrap();
    let o = taucalc(&["chain", "--preset", "xi-route", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["gauge_0.csv", "gauge_1.csv", "xi_0.csv", "xi_1.csv", "level_2.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let head = std::fs::read_to_string(dir.path().join("gauge_0.csv")).unwrap();
    assert!(head.starts_with("n,x,re,im,valid\n"));
}

#[test]
fn coefficient_config_reproduces_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo_file("configs/qjacobi_coefficients.json");
    let o = taucalc(&["chain", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = json(&dir.path().join("manifest.json"));
    let lam = m["levels"][0]["lambda"][0].as_f64().unwrap();
    // (q^-4 - 1)(1 - ab q^5) q / (1 - q)^2 with q = 1/2, ab = 1/4
    assert!((lam - 15.0 * (1.0 - 0.25 / 32.0) * 2.0).abs() < 1e-9, "{lam}");
}

#[test]
fn residual_failure_exits_3_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let o = taucalc(&["chain", "--preset", "qhahn", "--tol", "1e-30", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("residual at level"), "{}", stderr(&o));
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn validate_filter_and_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let o = taucalc(&["validate", "--criterion", "adjoint", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = json(&dir.path().join("validate.json"));
    assert_eq!(r["total"], 1);
    assert_eq!(r["criteria"][0]["id"], 3);

    let o = taucalc(&["validate", "--criterion", "3", "--tol", "1e-18"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}
