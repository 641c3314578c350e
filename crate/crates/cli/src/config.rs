//! Run configuration, read from a single TOML file. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use uhlmann_core::chern::SweepOptions;
use uhlmann_core::models::DEFAULT_FOCK_DIM;
use uhlmann_core::{ChernOrder, CoherentOscillator, FourBandGamma, GridSpec, Haldane, Hamiltonian, ModelSpec, TwoLevelSphere};

use crate::CliError;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelConfig>,
    pub grid: Option<GridConfig>,
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    TwoLevelSphere {
        #[serde(default = "one")]
        radius: f64,
    },
    Haldane {
        #[serde(default = "one")]
        t1: f64,
        t2: f64,
        phi: f64,
        mass: f64,
    },
    FourBandGamma {
        m: f64,
    },
    CoherentOscillator {
        #[serde(default = "one")]
        hbar_omega: f64,
        #[serde(default = "default_fock_dim")]
        fock_dim: usize,
    },
}

fn one() -> f64 {
    1.0
}

fn default_fock_dim() -> usize {
    DEFAULT_FOCK_DIM
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelSpec, CliError> {
        Ok(match *self {
            ModelConfig::TwoLevelSphere { radius } => TwoLevelSphere::new(radius)?.into(),
            ModelConfig::Haldane { t1, t2, phi, mass } => Haldane::new(t1, t2, phi, mass)?.into(),
            ModelConfig::FourBandGamma { m } => FourBandGamma::new(m)?.into(),
            ModelConfig::CoherentOscillator { hbar_omega, fock_dim } => CoherentOscillator::new(hbar_omega, fock_dim)?.into(),
        })
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub resolution: Resolution,
}

/// One resolution for every direction, or one per direction.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum Resolution {
    Uniform(usize),
    PerAxis(Vec<usize>),
}

impl GridConfig {
    pub fn build(&self, model: &ModelSpec) -> Result<GridSpec, CliError> {
        let manifold = model.manifold();
        let res = match &self.resolution {
            Resolution::Uniform(n) => vec![*n; manifold.dim()],
            Resolution::PerAxis(v) => v.clone(),
        };
        Ok(GridSpec::new(manifold, res)?)
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    Sweep,
    Map,
    Chern,
    Verify,
}

/// A temperature in units of `R0`: a number, or `"inf"` for `beta = 0`.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum Temperature {
    Value(f64),
    Word(String),
}

impl Temperature {
    fn value(&self) -> Result<f64, CliError> {
        match self {
            Temperature::Value(t) => Ok(*t),
            Temperature::Word(w) if w == "inf" => Ok(f64::INFINITY),
            Temperature::Word(w) => Err(CliError::Config(format!("temperatures: expected a number or \"inf\", got {w:?}"))),
        }
    }
}

/// Deliberately broken inputs for exercising the verifier.
#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Fixture {
    /// Perturbs the fourth Gamma matrix so the Clifford relations fail.
    CorruptGamma4,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub kind: RunKind,
    #[serde(default)]
    pub temperatures: Vec<Temperature>,
    pub order: Option<u8>,
    pub workers: Option<usize>,
    pub fixture: Option<Fixture>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub degeneracy_tol: f64,
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let d = SweepOptions::default();
        Self {
            degeneracy_tol: d.degeneracy_tol,
            fd_step: d.fd_step,
        }
    }
}

impl Tolerances {
    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions {
            degeneracy_tol: self.degeneracy_tol,
            fd_step: self.fd_step,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<(), CliError> {
        let t = &self.tolerances;
        if !(t.degeneracy_tol > 0.0 && t.degeneracy_tol.is_finite()) {
            return Err(CliError::Config(format!("tolerances.degeneracy_tol must be positive, got {}", t.degeneracy_tol)));
        }
        if !(t.fd_step > 0.0 && t.fd_step.is_finite()) {
            return Err(CliError::Config(format!("tolerances.fd_step must be positive, got {}", t.fd_step)));
        }
        if self.run.workers == Some(0) {
            return Err(CliError::Config("run.workers must be at least 1".into()));
        }
        if let Some(o) = self.run.order {
            if o != 1 && o != 2 {
                return Err(CliError::Config(format!("run.order must be 1 or 2, got {o}")));
            }
        }
        if self.run.fixture.is_some() && self.run.kind != RunKind::Verify {
            return Err(CliError::Config("run.fixture is only allowed with kind = \"verify\"".into()));
        }
        let temps = self.temperatures()?;
        match self.run.kind {
            RunKind::Verify => return Ok(()),
            RunKind::Sweep if temps.is_empty() => return Err(CliError::Config("temperatures: empty".into())),
            RunKind::Map if temps.len() != 1 => {
                return Err(CliError::Config(format!(
                    "temperatures: a map takes exactly one temperature, got {}",
                    temps.len()
                )))
            }
            _ => {}
        }
        if temps.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return Err(CliError::Config("temperatures: must be strictly ascending".into()));
        }
        if temps.iter().any(|t| t.is_nan() || *t < 0.0) {
            return Err(CliError::Config("temperatures: must be non-negative".into()));
        }
        let model = self.model.as_ref().ok_or_else(|| CliError::Config("missing [model] section".into()))?;
        if self.grid.is_none() {
            return Err(CliError::Config("missing [grid] section".into()));
        }
        let dim = match model {
            ModelConfig::FourBandGamma { .. } => 4,
            _ => 2,
        };
        if self.run.kind == RunKind::Map && dim != 2 {
            return Err(CliError::Config("map runs need a two-dimensional model".into()));
        }
        if let Some(o) = self.run.order {
            if (o == 2) != (dim == 4) {
                return Err(CliError::Config(format!("run.order = {o} does not match a {dim}-dimensional model")));
            }
        }
        Ok(())
    }

    pub fn temperatures(&self) -> Result<Vec<f64>, CliError> {
        self.run.temperatures.iter().map(Temperature::value).collect()
    }

    pub fn order(&self, model: &ModelSpec) -> ChernOrder {
        if model.manifold().dim() == 4 {
            ChernOrder::Second
        } else {
            ChernOrder::First
        }
    }
}
