//! The `grid`, `chain` and `validate` commands behind the binary.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::chain::{
    build_chain, chain_equation_residual, descend, eigen_residual, factorization_residual, from_coefficients, lift,
    advance_level, ChainLevel, CoefficientTriple, EigenPair,
};
use crate::config::{ChainSource, Emit, Level0, RunConfig};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::gauge::{base_matched_xi0, particular_gauge_xi};
use crate::grid_fn::{c, GridFunction};
use crate::hilbert::pearson_residual;
use crate::io;
use crate::orbit::{Grid, OrbitGrid};
use crate::scenarios::{const_g_scenario, fractional_chain, little_q_jacobi};
use crate::validate::{self, CriterionReport, Options};

/// 0 pass, 1 validation failures, 2 configuration errors, 3 numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        2
    } else {
        3
    }
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

#[derive(Debug, Clone, Serialize)]
pub struct GridOutput {
    pub rows: usize,
    pub diagnostics: io::LimitDiagnostics,
    pub files: Vec<PathBuf>,
}

/// Writes `grid.csv` and `limits.json`.
pub fn cmd_grid(cfg: &RunConfig) -> Result<GridOutput> {
    let map = cfg.map()?;
    let spec = cfg.grid_spec()?;
    let grid = OrbitGrid::build(&map, &spec)?;
    let dir = out_dir(cfg)?;
    let diagnostics = io::limit_diagnostics(&grid, spec.fixed_point_tol, spec.max_iter);
    let mut files = Vec::new();
    if cfg.emits(Emit::Csv) {
        files.push(dir.join("grid.csv"));
        io::write_grid_csv(&grid, &dir.join("grid.csv"))?;
    }
    if cfg.emits(Emit::Json) {
        files.push(dir.join("limits.json"));
        io::write_json(&diagnostics, &dir.join("limits.json"))?;
    }
    Ok(GridOutput { rows: grid.len(), diagnostics, files })
}

fn eval_on(grid: &Grid, e: &Expr) -> Result<GridFunction> {
    let vals = (0..grid.len()).map(|i| e.eval_checked(grid.x(i))).collect::<Result<Vec<_>>>()?;
    Ok(GridFunction::from_real(grid, vals))
}

fn level_zero(cfg: &RunConfig, grid: &Grid) -> Result<ChainLevel> {
    match cfg.level0.as_ref().ok_or_else(|| Error::Config("missing 'level0'".into()))? {
        Level0::Functions(f) => {
            let [b, eta, h, ff] = [&f.b, &f.eta, &f.h, &f.f].map(|s| cfg.expr(s));
            ChainLevel::from_f(0, eval_on(grid, &b?)?, eval_on(grid, &eta?)?, eval_on(grid, &h?)?, eval_on(grid, &ff?)?)
        }
        Level0::Coefficients(cd) => {
            let seed = cd.seed.ok_or_else(|| {
                Error::Config("coefficient input needs 'seed', the value of phi_0 / h_0 at the orbit base".into())
            })?;
            let [a, b, g, h] = [&cd.alpha, &cd.beta, &cd.gamma, &cd.h].map(|s| cfg.expr(s));
            let coef = CoefficientTriple {
                alpha: eval_on(grid, &a?)?,
                beta: eval_on(grid, &b?)?,
                gamma: eval_on(grid, &g?)?,
                lambda: c(cd.lambda),
            };
            from_coefficients(&coef, &eval_on(grid, &h?)?, c(seed))
        }
    }
}

/// Levels, grid, extra per-level functions to export, and an eigenpair to track.
struct Built {
    grid: Grid,
    levels: Vec<ChainLevel>,
    extras: Vec<(String, GridFunction)>,
    seed_pair: Option<EigenPair>,
}

fn build(cfg: &RunConfig) -> Result<Built> {
    let chain = cfg.chain.as_ref().ok_or_else(|| Error::Config("missing 'chain'".into()))?;
    let k_max = chain.levels;
    let depth = cfg.constant("depth", 60.0) as usize;
    let mut extras = Vec::new();
    let (grid, levels, seed_pair) = match &chain.source {
        ChainSource::Scenario(name) => match name.as_str() {
            "qhahn" => {
                let ch = little_q_jacobi(cfg.constant("q", 0.5), cfg.constant("a", 0.5), cfg.constant("b", 0.5), depth, k_max)
                    .map_err(as_config)?;
                (ch.grid, ch.levels, None)
            }
            "const-gauge" => {
                let kl = cfg.constant("kernel_level", 1.0) as usize;
                let sc = const_g_scenario(
                    cfg.constant("q", 0.5),
                    cfg.constant("b", 1.0),
                    cfg.constant("c0", -1.0),
                    cfg.constant("x0", 0.4),
                    depth,
                    k_max,
                    kl,
                )
                .map_err(as_config)?;
                let pair = sc.kernel_pair(kl).map_err(as_config)?;
                (sc.grid, sc.levels, Some(pair))
            }
            "fractional" => {
                let (grid, levels) = fractional_chain(
                    cfg.constant("a", 2.0),
                    cfg.constant("a0", 1.0),
                    cfg.constant("b0", 1.0),
                    cfg.constant("c", -1.0),
                    cfg.constant("d", 1.0),
                    depth,
                    k_max,
                )
                .map_err(as_config)?;
                (grid, levels, None)
            }
            other => return Err(Error::Config(format!("unknown scenario '{other}' (qhahn, const-gauge, fractional)"))),
        },
        ChainSource::Explicit { g, h, c: ck, d } => {
            let grid = OrbitGrid::build(&cfg.map()?, &cfg.grid_spec()?)?;
            let level0 = level_zero(cfg, &grid)?;
            let mut links = Vec::new();
            for k in 0..k_max {
                let mut local = cfg.clone();
                local.constants.insert("k".into(), k as f64);
                let gk = eval_on(&grid, &local.expr(g)?)?;
                let hk = eval_on(&grid, &local.expr(h)?)?;
                let ck = local.expr(ck)?.eval_checked(0.0)?;
                let dk = local.expr(d)?.eval_checked(0.0)?;
                links.push((gk, hk, c(ck), c(dk)));
            }
            let levels = build_chain(level0, links)?;
            (grid, levels, None)
        }
        ChainSource::XiRoute { xi0, d } => {
            let grid = OrbitGrid::build(&cfg.map()?, &cfg.grid_spec()?)?;
            let mut levels = vec![level_zero(cfg, &grid)?];
            let one = GridFunction::constant(&grid, 1.0);
            for k in 0..k_max {
                let last = levels.pop().expect("nonempty");
                let x0 = match xi0 {
                    Some(v) => c(*v),
                    None => base_matched_xi0(&last)?,
                };
                let xg = particular_gauge_xi(&last, c(*d), x0)?;
                let linked = last.with_link(xg.g.clone(), c(0.0), c(*d));
                let next = advance_level(&linked, &xg.g, &one, c(*d))?;
                extras.push((format!("xi_{k}"), xg.xi));
                levels.push(linked);
                levels.push(next);
            }
            (grid, levels, None)
        }
    };
    for (k, l) in levels.iter().enumerate().take(k_max) {
        extras.push((format!("gauge_{k}"), l.g.clone()));
    }
    // a vanishing f at the top level makes the constant a kernel function of A
    let seed_pair = match seed_pair {
        Some(p) => Some(p),
        None => {
            let top = levels.last().expect("nonempty");
            let f_zero = top.f.valid_count() > 0 && top.f.valid_indices().iter().all(|&i| top.f.value(i).norm() <= 1e-12 * top.phi.value(i).norm());
            if f_zero {
                Some(EigenPair::new(top, GridFunction::constant(&grid, 1.0), c(0.0))?)
            } else {
                None
            }
        }
    };
    Ok(Built { grid, levels, extras, seed_pair })
}

// scenario constructors reject bad parameters with InvalidInput
fn as_config(e: Error) -> Error {
    match e {
        Error::InvalidInput(m) => Error::Config(m),
        other => other,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelResiduals {
    pub pearson: f64,
    pub comm: Option<f64>,
    pub band: Option<f64>,
    pub two_path_gap: Option<f64>,
    pub chain: Option<f64>,
    pub eigen: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelEntry {
    pub k: i32,
    pub c: [f64; 2],
    pub d: [f64; 2],
    /// Eigenvalue of the tracked eigenfunction at this level.
    pub lambda: Option<[f64; 2]>,
    pub positive_weight: bool,
    pub residuals: LevelResiduals,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainManifest {
    pub levels: Vec<LevelEntry>,
    pub thresholds: crate::config::Tolerances,
    pub failures: Vec<String>,
    pub files: Vec<String>,
}

fn track(built: &Built) -> Vec<Option<EigenPair>> {
    let n = built.levels.len();
    let mut out: Vec<Option<EigenPair>> = vec![None; n];
    let Some(seed) = built.seed_pair.clone() else { return out };
    let start = seed.level as usize;
    out[start] = Some(seed);
    for k in start..n - 1 {
        match out[k].as_ref().map(|p| lift(p, &built.levels[k], &built.levels[k + 1])) {
            Some(Ok(p)) => out[k + 1] = Some(p),
            _ => break,
        }
    }
    for k in (0..start).rev() {
        match out[k + 1].as_ref().map(|p| descend(p, &built.levels[k])) {
            Some(Ok(p)) => out[k] = Some(p),
            _ => break,
        }
    }
    out
}

/// Per-level CSVs, gauge files and `manifest.json`. Threshold violations are
/// listed in `failures`; the files are written either way.
pub fn cmd_chain(cfg: &RunConfig) -> Result<ChainManifest> {
    let built = build(cfg)?;
    let dir = out_dir(cfg)?;
    let tol = cfg.tolerances;
    let pairs = track(&built);
    let n = built.levels.len();
    let mut entries = Vec::with_capacity(n);
    let mut failures = Vec::new();
    let mut check = |name: &str, k: usize, v: f64, thr: f64| {
        if !(v <= thr) {
            failures.push(format!("{name} residual at level {k}: {v:e} exceeds {thr:e}"));
        }
    };
    for (k, l) in built.levels.iter().enumerate() {
        let pearson = pearson_residual(&l.pearson(), &l.w).max();
        check("pearson", k, pearson, tol.pearson);
        let (mut comm, mut band, mut gap, mut chain) = (None, None, None, None);
        if k + 1 < n {
            let next = &built.levels[k + 1];
            let r = factorization_residual(l, next, tol.probes, tol.seed)?;
            let ce = chain_equation_residual(l, &next.h, &l.g, l.c, l.d);
            check("comm", k, r.residual, tol.comm);
            check("band", k, r.band_residual, tol.comm);
            check("chain", k, ce, tol.chain);
            (comm, band, gap, chain) = (Some(r.residual), Some(r.band_residual), Some(r.two_path_gap), Some(ce));
        }
        let eigen = match &pairs[k] {
            Some(p) => {
                let r = eigen_residual(l, &p.psi, p.lambda)?;
                check("eigen", k, r, tol.eigen);
                Some(r)
            }
            None => None,
        };
        entries.push(LevelEntry {
            k: l.k,
            c: [l.c.re, l.c.im],
            d: [l.d.re, l.d.im],
            lambda: pairs[k].as_ref().map(|p| [p.lambda.re, p.lambda.im]),
            positive_weight: l.w.positive(),
            residuals: LevelResiduals { pearson, comm, band, two_path_gap: gap, chain, eigen },
        });
    }
    let mut files = Vec::new();
    if cfg.emits(Emit::Csv) {
        io::write_grid_csv(&built.grid, &dir.join("grid.csv"))?;
        files.push("grid.csv".to_string());
        for (k, l) in built.levels.iter().enumerate() {
            let name = format!("level_{k}.csv");
            io::write_level_csv(l, &dir.join(&name))?;
            files.push(name);
        }
        for (name, f) in &built.extras {
            let name = format!("{name}.csv");
            io::write_function_csv(f, &dir.join(&name))?;
            files.push(name);
        }
        for (k, p) in pairs.iter().enumerate() {
            if let Some(p) = p {
                let name = format!("eigen_{k}.csv");
                io::write_function_csv(&p.psi, &dir.join(&name))?;
                files.push(name);
            }
        }
    }
    let manifest = ChainManifest { levels: entries, thresholds: tol, failures, files };
    if cfg.emits(Emit::Json) {
        io::write_json(&manifest, &dir.join("manifest.json"))?;
    }
    Ok(manifest)
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub passed: usize,
    pub total: usize,
    pub criteria: Vec<CriterionReport>,
}

/// Runs the acceptance criteria and writes `validate.json` when `out` is set.
pub fn cmd_validate(opts: &Options, out: Option<&Path>) -> Result<ValidationReport> {
    if let Some(name) = &opts.only {
        if validate::criterion_id(name).is_none() {
            return Err(Error::Config(format!("unknown criterion '{name}' (one of {})", validate::CRITERIA.join(", "))));
        }
    }
    if let Some(t) = opts.tol {
        if !(t > 0.0) {
            return Err(Error::Config("--tol must be positive".into()));
        }
    }
    let criteria = validate::run(opts);
    let report = ValidationReport { passed: criteria.iter().filter(|r| r.passed).count(), total: criteria.len(), criteria };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
        io::write_json(&report, &dir.join("validate.json"))?;
    }
    Ok(report)
}
