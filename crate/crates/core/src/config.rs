//! JSON run configuration and named presets.
//!
//! ```json
//! {
//!   "map": {"linear": {"q": 0.5}},
//!   "grid": {"mode": "semigroup", "base": 1.0, "depth": 60},
//!   "constants": {"a": 0.5},
//!   "level0": {"functions": {"B": "1 - x", "eta": "1 + 0.3*x - 0.2*x^2"}},
//!   "chain": {"levels": 2, "source": {"xi_route": {}}}
//! }
//! ```
//!
//! Unknown keys are rejected everywhere.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::orbit::{GridSpec, TauMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Linear {
        q: f64,
        #[serde(default)]
        h: f64,
    },
    Fractional {
        a: f64,
    },
    Power {
        p: f64,
    },
    /// Applies the listed maps in order.
    Compose(Vec<MapSpec>),
}

impl MapSpec {
    pub fn build(&self) -> Result<TauMap> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        match *self {
            MapSpec::Linear { q, h } => {
                if q == 0.0 || !q.is_finite() || !h.is_finite() {
                    return bad("linear map needs finite q != 0 and finite h");
                }
                Ok(TauMap::linear(q, h))
            }
            MapSpec::Fractional { a } => {
                if !(a > 0.0 && a != 1.0 && a.is_finite()) {
                    return bad("fractional map needs a > 0, a != 1");
                }
                Ok(TauMap::fractional(a))
            }
            MapSpec::Power { p } => {
                if !(p > 0.0 && p.is_finite()) {
                    return bad("power map needs p > 0");
                }
                Ok(TauMap::power(p))
            }
            MapSpec::Compose(ref maps) => {
                if maps.is_empty() {
                    return bad("empty composition");
                }
                let built = maps.iter().map(MapSpec::build).collect::<Result<Vec<_>>>()?;
                Ok(TauMap::compose(&built))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// `semigroup`, `interval` or `group`.
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backward_depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_point_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backward_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_match_tol: Option<f64>,
}

impl GridConfig {
    pub fn semigroup(base: f64, depth: usize) -> Self {
        Self {
            mode: "semigroup".into(),
            base: Some(base),
            a: None,
            b: None,
            depth: Some(depth),
            backward_depth: None,
            fixed_point_tol: None,
            delta_tol: None,
            backward_tol: None,
            limit_match_tol: None,
        }
    }

    pub fn spec(&self) -> Result<GridSpec> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::Config(format!("grid mode '{}' needs '{name}'", self.mode)));
        let mut spec = match self.mode.as_str() {
            "semigroup" => GridSpec::semigroup(need(self.base, "base")?),
            "group" => GridSpec::group(need(self.base, "base")?),
            "interval" => GridSpec::interval(need(self.a, "a")?, need(self.b, "b")?),
            other => return Err(Error::Config(format!("unknown grid mode '{other}' (semigroup, interval, group)"))),
        };
        if let Some(d) = self.depth {
            spec.max_depth = d;
        }
        if let Some(d) = self.backward_depth {
            spec.max_backward_depth = d;
        }
        if let Some(t) = self.fixed_point_tol {
            spec.fixed_point_tol = t;
        }
        if let Some(t) = self.delta_tol {
            spec.delta_tol = t;
        }
        if let Some(t) = self.backward_tol {
            spec.backward_tol = t;
        }
        if let Some(t) = self.limit_match_tol {
            spec.limit_match_tol = t;
        }
        for t in [spec.fixed_point_tol, spec.delta_tol, spec.backward_tol, spec.limit_match_tol] {
            if !(t > 0.0) {
                return Err(Error::Config("grid tolerances must be positive".into()));
            }
        }
        Ok(spec)
    }
}

fn one() -> String {
    "1".into()
}

fn zero() -> String {
    "0".into()
}

/// Direct level-0 data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionData {
    #[serde(rename = "B")]
    pub b: String,
    pub eta: String,
    #[serde(default = "one")]
    pub h: String,
    #[serde(default = "zero")]
    pub f: String,
}

/// Coefficients of `alpha psi(tau x) + beta psi(x) + gamma psi(tau^-1 x) = lambda psi(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientData {
    pub alpha: String,
    pub beta: String,
    pub gamma: String,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "one")]
    pub h: String,
    /// Value of `phi_0 / h_0` at the orbit base; required.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Level0 {
    Functions(FunctionData),
    Coefficients(CoefficientData),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChainSource {
    /// Link data as expressions; `k` is bound to the level index.
    Explicit {
        g: String,
        #[serde(default = "one")]
        h: String,
        #[serde(default = "zero")]
        c: String,
        #[serde(default = "one")]
        d: String,
    },
    /// Particular gauge with `c = 0`, `h = 1` and `xi ~ xi0 / (x - l)`. Without
    /// `xi0` the constant is matched to the orbit base at every level.
    XiRoute {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        xi0: Option<f64>,
        #[serde(default = "unit")]
        d: f64,
    },
    /// `qhahn`, `const-gauge` or `fractional`; parameters come from `constants`.
    Scenario(String),
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub levels: usize,
    pub source: ChainSource,
}

/// Thresholds for the chain residual table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub pearson: f64,
    pub comm: f64,
    pub chain: f64,
    pub eigen: f64,
    /// Edge margin of the probe window.
    pub margin: usize,
    pub probes: usize,
    pub seed: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { pearson: 1e-9, comm: 1e-9, chain: 1e-9, eigen: 1e-7, margin: 5, probes: 20, seed: 7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level0: Option<Level0>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default = "all_formats")]
    pub emit: Vec<Emit>,
}

fn all_formats() -> Vec<Emit> {
    vec![Emit::Csv, Emit::Json]
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            map: None,
            grid: None,
            constants: BTreeMap::new(),
            level0: None,
            chain: None,
            tolerances: Tolerances::default(),
            out: None,
            emit: all_formats(),
        }
    }
}

pub const PRESETS: [&str; 6] = ["linear", "fractional", "qhahn", "const-gauge", "fractional-chain", "xi-route"];

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let scenario = |levels: usize, s: &str| Some(ChainConfig { levels, source: ChainSource::Scenario(s.into()) });
        match name {
            "linear" => {
                cfg.map = Some(MapSpec::Linear { q: 0.5, h: 0.0 });
                cfg.grid = Some(GridConfig::semigroup(1.0, 40));
            }
            "fractional" => {
                cfg.map = Some(MapSpec::Fractional { a: 2.0 });
                cfg.grid = Some(GridConfig::semigroup(0.5, 60));
            }
            "qhahn" => {
                cfg.constants = [("q", 0.5), ("a", 0.5), ("b", 0.5), ("depth", 60.0)].map(|(k, v)| (k.to_string(), v)).into();
                cfg.chain = scenario(5, "qhahn");
            }
            "const-gauge" => {
                cfg.constants = [("q", 0.5), ("b", 1.0), ("c0", -1.0), ("x0", 0.4), ("depth", 10.0)].map(|(k, v)| (k.to_string(), v)).into();
                cfg.chain = scenario(5, "const-gauge");
            }
            "fractional-chain" => {
                cfg.constants = [("a", 2.0), ("a0", 1.0), ("b0", 1.0), ("c", -1.0), ("d", 1.0), ("depth", 30.0)].map(|(k, v)| (k.to_string(), v)).into();
                cfg.chain = scenario(3, "fractional");
            }
            "xi-route" => {
                cfg.map = Some(MapSpec::Linear { q: 0.5, h: 0.0 });
                cfg.grid = Some(GridConfig::semigroup(1.0, 60));
                cfg.level0 = Some(Level0::Functions(FunctionData {
                    b: "1 - x".into(),
                    eta: "1 + 0.3*x - 0.2*x^2".into(),
                    h: one(),
                    f: zero(),
                }));
                cfg.chain = Some(ChainConfig { levels: 2, source: ChainSource::XiRoute { xi0: None, d: 1.0 } });
            }
            other => return Err(Error::Config(format!("unknown preset '{other}' (one of {})", PRESETS.join(", ")))),
        }
        Ok(cfg)
    }

    /// Overrides the grid depth (and the `depth` constant used by scenarios).
    pub fn set_depth(&mut self, depth: usize) {
        if let Some(g) = self.grid.as_mut() {
            g.depth = Some(depth);
        }
        if matches!(self.chain, Some(ChainConfig { source: ChainSource::Scenario(_), .. })) {
            self.constants.insert("depth".into(), depth as f64);
        }
    }

    pub fn map(&self) -> Result<TauMap> {
        self.map.as_ref().ok_or_else(|| Error::Config("missing 'map'".into()))?.build()
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        self.grid.as_ref().ok_or_else(|| Error::Config("missing 'grid'".into()))?.spec()
    }

    pub fn expr(&self, src: &str) -> Result<Expr> {
        parse(src, &self.constants)
    }

    /// Scenario constant with a default.
    pub fn constant(&self, name: &str, default: f64) -> f64 {
        self.constants.get(name).copied().unwrap_or(default)
    }

    pub fn emits(&self, e: Emit) -> bool {
        self.emit.contains(&e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_through_json() {
        for p in PRESETS {
            let cfg = RunConfig::preset(p).unwrap();
            let text = serde_json::to_string(&cfg).unwrap();
            assert_eq!(RunConfig::from_json(&text).unwrap(), cfg, "{p}");
        }
        assert!(RunConfig::preset("nope").unwrap_err().is_config());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"mapp": {"linear": {"q": 0.5}}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"grid": {"mode": "semigroup", "base": 1, "bogus": 2}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"map": {"linear": {"q": 0.5, "r": 1}}}"#).is_err());
        let ok = RunConfig::from_json(r#"{"map": {"compose": [{"linear": {"q": 0.5}}, {"power": {"p": 2}}]}}"#).unwrap();
        let m = ok.map().unwrap();
        assert!((m.forward(0.6) - 0.09).abs() < 1e-15);
    }

    #[test]
    fn bad_parameters_are_config_errors() {
        let cfg = RunConfig::from_json(r#"{"map": {"fractional": {"a": 1}}, "grid": {"mode": "ring"}}"#).unwrap();
        assert!(cfg.map().unwrap_err().is_config());
        assert!(cfg.grid_spec().unwrap_err().is_config());
    }
}
