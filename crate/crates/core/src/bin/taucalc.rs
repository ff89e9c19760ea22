use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use taucalc::commands::{cmd_chain, cmd_grid, cmd_validate, exit_code};
use taucalc::config::RunConfig;
use taucalc::validate::Options;
use taucalc::{Error, Result};

#[derive(Parser)]
#[command(name = "taucalc", version, about = "tau-calculus grids, ladder chains and the validation suite")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build an orbit grid; writes grid.csv and limits.json.
    Grid(Common),
    /// Build a factorization chain; writes per-level CSVs and manifest.json.
    Chain(Common),
    /// Run the acceptance criteria; writes validate.json when --out is given.
    Validate {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace every upper-bound threshold.
        #[arg(long)]
        tol: Option<f64>,
        /// Run one criterion, by number or name.
        #[arg(long)]
        criterion: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    depth: Option<usize>,
    /// Chain residual threshold (all columns).
    #[arg(long)]
    tol: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(_), Some(_)) => return Err(Error::Config("give --config or --preset, not both".into())),
            (Some(p), None) => RunConfig::load(p)?,
            (None, Some(name)) => RunConfig::preset(name)?,
            (None, None) => return Err(Error::Config("one of --config or --preset is required".into())),
        };
        if let Some(d) = self.depth {
            cfg.set_depth(d);
        }
        if let Some(t) = self.tol {
            let t_ = &mut cfg.tolerances;
            (t_.pearson, t_.comm, t_.chain, t_.eigen) = (t, t, t, t);
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Grid(c) => {
            let out = cmd_grid(&c.load()?)?;
            println!("{} points, map {}", out.rows, out.diagnostics.map);
            for s in &out.diagnostics.segments {
                println!("base {} limit {} ({} points)", s.base, s.limit, s.points);
            }
            Ok(0)
        }
        Cmd::Chain(c) => {
            let m = cmd_chain(&c.load()?)?;
            println!("{} levels, {} files", m.levels.len(), m.files.len());
            if m.failures.is_empty() {
                return Ok(0);
            }
            for f in &m.failures {
                eprintln!("{f}");
            }
            Ok(3)
        }
        Cmd::Validate { out, tol, criterion } => {
            let report = cmd_validate(&Options { tol, only: criterion }, out.as_deref())?;
            for r in &report.criteria {
                let status = if r.passed { "PASS" } else { "FAIL" };
                println!("criterion {:>2} {:<14} {status}  {}", r.id, r.name, r.first_failure().unwrap_or_default());
            }
            println!("{} of {} criteria passed", report.passed, report.total);
            Ok(if report.passed == report.total { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
