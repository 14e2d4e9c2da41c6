use std::path::{Path, PathBuf};

use microlocal::appendix_wkb::WkbConfig;
use microlocal::bounds::ScalingConfig;
use microlocal::states::{StateSpec, Window, WindowSpec};
use microlocal::symbols::Symbol;
use microlocal::theorem1::Theorem1Config;
use microlocal::wavefront::{FitPolicy, HLadder, PhaseRect};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Transform,
    Scan,
    Example1,
    Example2,
    Theorem1,
    Wkb,
    Bounds,
    Selftest,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Transform => "transform",
            Experiment::Scan => "scan",
            Experiment::Example1 => "example1",
            Experiment::Example2 => "example2",
            Experiment::Theorem1 => "theorem1",
            Experiment::Wkb => "wkb",
            Experiment::Bounds => "bounds",
            Experiment::Selftest => "selftest",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for result files; `run` falls back to the working directory.
    pub dir: Option<PathBuf>,
    /// File stem; defaults to the experiment name.
    pub name: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformConfig {
    pub h: f64,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self { h: 2f64.powi(-10) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub rect: PhaseRect,
    pub ladder: HLadder,
    pub policy: FitPolicy,
    pub probe: WindowSpec,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            rect: PhaseRect { x: [-2.0, 2.0], xi: [-2.0, 2.0], nx: 41, nxi: 41 },
            ladder: HLadder::default(),
            policy: FitPolicy::default(),
            probe: WindowSpec::Gaussian { scale: 1.0 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingCase {
    pub symbol: Symbol,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    /// Last index of the exponent recurrence.
    pub recurrence: usize,
    pub catalog_dx: f64,
    pub ladder: HLadder,
    pub scaling: ScalingConfig,
    pub cases: Vec<ScalingCase>,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            recurrence: 200,
            catalog_dx: 1.0 / 512.0,
            ladder: HLadder::default(),
            scaling: ScalingConfig::default(),
            cases: vec![
                ScalingCase { symbol: Symbol::Bump { power: 2.0, x0: 0.0, xi0: 0.0, radius: 1.0 }, alpha: 2.0 },
                ScalingCase { symbol: Symbol::ScaledBump { delta: 0.3, power: 2.0, radius: 1.0 }, alpha: 2.0 },
                ScalingCase { symbol: Symbol::Oscillating { power: 2.0, delta: 0.3 }, alpha: 2.0 },
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelftestConfig {
    pub criteria: Vec<u8>,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self { criteria: (1..=12).collect() }
    }
}

/// A whole configuration file. Sections not used by `experiment` keep
/// their defaults and are left out of the echoed config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub state: Option<StateSpec>,
    #[serde(default)]
    pub symbol: Option<Symbol>,
    #[serde(default)]
    pub transform: TransformConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub theorem1: Theorem1Config,
    #[serde(default)]
    pub wkb: WkbConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub selftest: SelftestConfig,
}

fn schema(path: &str, message: impl Into<String>) -> CliError {
    CliError::Schema { path: path.to_string(), message: message.into() }
}

fn root_path(p: &serde_path_to_error::Path) -> String {
    let s = p.to_string();
    if s == "." { "(root)".to_string() } else { s }
}

/// Deserializes a TOML table, reporting failures by key path.
pub fn from_table(table: toml::Table) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = serde_path_to_error::deserialize(table)
        .map_err(|e| schema(&root_path(e.path()), e.inner().message().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_table(text: &str, origin: &str) -> Result<toml::Table, CliError> {
    text.parse::<toml::Table>().map_err(|e| CliError::Syntax { origin: origin.to_string(), message: e.to_string() })
}

pub fn read_table(path: &Path) -> Result<toml::Table, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_table(&text, &path.display().to_string())
}

impl RunConfig {
    /// State of `transform`, `scan` and `wkb`, with its per-experiment default.
    pub fn state(&self) -> StateSpec {
        self.state.unwrap_or(match self.experiment {
            Experiment::Wkb => StateSpec::RealQuadratic {},
            _ => StateSpec::Coherent { window: WindowSpec::Gaussian { scale: 1.0 }, x0: 0.5, xi0: -1.0 },
        })
    }

    pub fn symbol(&self) -> Symbol {
        match self.experiment {
            Experiment::Example1 => Symbol::example1(),
            Experiment::Example2 => Symbol::example2(),
            _ => self.symbol.clone().unwrap_or_else(Symbol::example1),
        }
    }

    pub fn stem(&self) -> String {
        self.output.name.clone().unwrap_or_else(|| self.experiment.name().to_string())
    }

    fn validate(&self) -> Result<(), CliError> {
        let e = self.experiment;
        let uses_state = matches!(e, Experiment::Transform | Experiment::Scan | Experiment::Wkb);
        if self.state.is_some() && !uses_state {
            return Err(schema("state", format!("not used by {}", e.name())));
        }
        if self.symbol.is_some() && e != Experiment::Theorem1 {
            return Err(schema("symbol", format!("not used by {}", e.name())));
        }
        match e {
            Experiment::Transform => {
                let h = self.transform.h;
                if !(h > 0.0 && h < 1.0) {
                    return Err(schema("transform.h", format!("must lie in (0, 1), got {h}")));
                }
                self.state().plan(h, 0.0, 0.0).map_err(|err| schema("state", err.to_string()))?;
            }
            Experiment::Scan => {
                self.scan.rect.validate().map_err(|err| schema("scan.rect", err.to_string()))?;
                Window::new(self.scan.probe).map_err(|err| schema("scan.probe", err.to_string()))?;
                self.state()
                    .plan(self.scan.ladder.values()[0], 0.0, 0.0)
                    .map_err(|err| schema("state", err.to_string()))?;
            }
            Experiment::Example1 | Experiment::Example2 | Experiment::Theorem1 => {
                let a = self.symbol();
                a.validate().map_err(|err| schema("symbol", err.to_string()))?;
                let eps = self.theorem1.epsilon;
                let cap = 0.5 * (0.5 - a.delta());
                if !(eps > 0.0 && eps < cap) {
                    return Err(schema(
                        "theorem1.epsilon",
                        format!("must satisfy 0 < epsilon < (1/2)(1/2 - delta) = {cap} for delta = {}, got {eps}", a.delta()),
                    ));
                }
                if !(self.theorem1.radius > 0.0 && self.theorem1.radius.is_finite()) {
                    return Err(schema("theorem1.radius", format!("must be positive, got {}", self.theorem1.radius)));
                }
                self.theorem1.validate(&a).map_err(|err| schema("theorem1", err.to_string()))?;
            }
            Experiment::Wkb => {
                if self.state().wkb_case().is_none() {
                    return Err(schema("state.kind", "wkb needs a WKB state, not a coherent state"));
                }
                self.wkb.rect.validate().map_err(|err| schema("wkb.rect", err.to_string()))?;
            }
            Experiment::Bounds => {
                if self.bounds.recurrence < 1 {
                    return Err(schema("bounds.recurrence", "must be at least 1"));
                }
                let dx = self.bounds.catalog_dx;
                if !(dx > 0.0 && dx < 1.0) {
                    return Err(schema("bounds.catalog_dx", format!("must lie in (0, 1), got {dx}")));
                }
                for (i, c) in self.bounds.cases.iter().enumerate() {
                    c.symbol.validate().map_err(|err| schema(&format!("bounds.cases[{i}].symbol"), err.to_string()))?;
                }
            }
            Experiment::Selftest => {
                if let Some(bad) = self.selftest.criteria.iter().find(|&&c| !(1..=12).contains(&c)) {
                    return Err(schema("selftest.criteria", format!("criteria are numbered 1 to 12, got {bad}")));
                }
            }
        }
        Ok(())
    }

    /// The resolved settings that determine the result, with defaults filled in.
    pub fn echo(&self) -> Value {
        let mut out = json!({ "experiment": self.experiment.name() });
        let o = out.as_object_mut().expect("object literal");
        match self.experiment {
            Experiment::Transform => {
                o.insert("state".into(), v(&self.state()));
                o.insert("transform".into(), v(&self.transform));
            }
            Experiment::Scan => {
                o.insert("state".into(), v(&self.state()));
                o.insert("scan".into(), v(&self.scan));
            }
            Experiment::Example1 | Experiment::Example2 | Experiment::Theorem1 => {
                o.insert("symbol".into(), v(&self.symbol()));
                o.insert("theorem1".into(), v(&self.theorem1));
            }
            Experiment::Wkb => {
                o.insert("state".into(), v(&self.state()));
                o.insert("wkb".into(), v(&self.wkb));
            }
            Experiment::Bounds => {
                o.insert("bounds".into(), v(&self.bounds));
            }
            Experiment::Selftest => {
                o.insert("selftest".into(), v(&self.selftest));
            }
        }
        out
    }
}

fn v<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("configs serialize to JSON")
}
