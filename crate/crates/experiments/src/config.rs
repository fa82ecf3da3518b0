//! Experiment configuration: one TOML file per run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ExpError, ExpResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Elliptic,
    Dynamic,
    Sweep,
    Counterexample,
    Laplace,
    Cubic,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Elliptic => "elliptic",
            Kind::Dynamic => "dynamic",
            Kind::Sweep => "sweep",
            Kind::Counterexample => "counterexample",
            Kind::Laplace => "laplace",
            Kind::Cubic => "cubic",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    #[default]
    Memory,
    KelvinVoigt,
    Undamped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub length: f64,
    pub elements: usize,
}

/// A single value for every element, or one value per element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Constant(f64),
    PerElement(Vec<f64>),
}

impl Coefficient {
    pub fn values(&self, elements: usize) -> ExpResult<Vec<f64>> {
        match self {
            Coefficient::Constant(v) => Ok(vec![*v; elements]),
            Coefficient::PerElement(v) if v.len() == elements => Ok(v.clone()),
            Coefficient::PerElement(v) => Err(ExpError::Config(format!(
                "coefficient list has {} entries for {elements} elements",
                v.len()
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSpec {
    pub a: Coefficient,
    pub b: Coefficient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSpec {
    pub horizon: f64,
    pub steps: usize,
    #[serde(default)]
    pub eta: f64,
}

/// Time factor of a load term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeProfile {
    Constant { value: f64 },
    Polynomial { coeffs: Vec<f64> },
    Sine { amplitude: f64, omega: f64, phase: f64 },
    Exponential { amplitude: f64, rate: f64 },
}

/// Spatial factor of a load term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceShape {
    Constant { value: f64 },
    Polynomial { coeffs: Vec<f64> },
    /// `amplitude · sin(mode π x / L)`.
    Sine { mode: u32, amplitude: f64 },
    /// Mass-normalised discrete eigenmode of the elastic operator, counted from 1.
    Eigenmode { index: usize, amplitude: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadTerm {
    pub time: TimeProfile,
    pub space: SpaceShape,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct Loads {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub f: Vec<LoadTerm>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub g: Vec<LoadTerm>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub z: Vec<LoadTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HistorySpec {
    /// Zero displacement, velocity and memory at `t = 0`.
    #[default]
    Rest,
    /// `u_in(τ)` equal to the stationary solution for the load `g(τ)`.
    Compatible,
    /// Explicit separable pre-history, nodal.
    Separable { terms: Vec<LoadTerm> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Both loads present; square-integrable conclusions only.
    #[default]
    General,
    /// `f = 0`; adds uniform conclusions on `[η, T]`.
    NoInertialLoad,
    /// `f = 0` and a compatible pre-history; uniform on `[0, T]`.
    Compatible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct SweepSpec {
    #[serde(default)]
    pub mode: SweepMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactSolution {
    /// Constant stiffness and a spatially constant load on `(0, L)`.
    UniformBar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticSpec {
    pub refinements: usize,
    pub exact: ExactSolution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct DynamicSpec {
    #[serde(default)]
    pub oracle: bool,
    /// Step counts for the energy-balance refinement study.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub energy_steps: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeScaling {
    /// Load amplitude fixed across the sweep.
    Fixed,
    /// Load amplitude proportional to `ε`.
    Eps,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleSpec {
    /// Eigenmode driven, counted from 1.
    pub mode: usize,
    pub amplitude: f64,
    pub scaling: AmplitudeScaling,
    /// Drive at zero frequency instead of the rescaled natural one.
    #[serde(default)]
    pub static_load: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSpec {
    pub s1: f64,
    pub ds2: f64,
    pub k_max: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceSpec {
    pub line: LineSpec,
    pub coercivity_eps: Vec<f64>,
    pub coercivity_points: usize,
    pub coercivity_s2_max: f64,
    pub trials: usize,
    pub plancherel_line: LineSpec,
    /// Nodal signal for the Plancherel identity, measured in the `L²` norm.
    pub plancherel: Vec<LoadTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicSpecConfig {
    pub beta: f64,
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
    pub c1: f64,
    pub samples: usize,
    pub pair_samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Strictly decreasing along the series.
    Decreasing,
    NonIncreasing,
    /// `last ≤ value · first`.
    LastOverFirstAtMost,
    /// `min ≥ value · max`.
    MinOverMaxAtLeast,
    AtMost,
    AtLeast,
    Within,
}

/// Acceptance predicate evaluated on a named series of the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    pub series: String,
    pub rule: Rule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub beta: f64,
    #[serde(default)]
    pub law: Law,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eps: Vec<f64>,
    pub mesh: MeshSpec,
    pub coefficients: CoefficientSpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub loads: Loads,
    #[serde(default)]
    pub history: HistorySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elliptic: Option<EllipticSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamic: Option<DynamicSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laplace: Option<LaplaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cubic: Option<CubicSpecConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckSpec>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn positive(name: &str, v: f64) -> ExpResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ExpError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

fn eps_list(name: &str, list: &[f64]) -> ExpResult<()> {
    if list.is_empty() {
        return Err(ExpError::Config(format!("{name} must not be empty")));
    }
    for v in list {
        positive(name, *v)?;
    }
    if list.windows(2).any(|p| p[1] >= p[0]) {
        return Err(ExpError::Config(format!("{name} must be strictly decreasing")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> ExpResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| ExpError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> ExpResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ExpError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> ExpResult<String> {
        toml::to_string(self).map_err(|e| ExpError::Config(e.to_string()))
    }

    /// SHA-256 of the canonical serialization, ignoring the worker count.
    pub fn hash(&self) -> ExpResult<String> {
        let mut canonical = self.clone();
        canonical.workers = None;
        let digest = Sha256::digest(canonical.to_toml()?.as_bytes());
        Ok(hex::encode(digest))
    }

    pub fn validate(&self) -> ExpResult<()> {
        positive("beta", self.beta)?;
        positive("mesh.length", self.mesh.length)?;
        if self.mesh.elements < 2 {
            return Err(ExpError::Config("mesh needs at least two elements".into()));
        }
        positive("time.horizon", self.time.horizon)?;
        if self.time.steps == 0 {
            return Err(ExpError::Config("time.steps must be positive".into()));
        }
        if !(self.time.eta >= 0.0 && self.time.eta < self.time.horizon) {
            return Err(ExpError::Config(format!(
                "time.eta = {} must lie in [0, {})",
                self.time.eta, self.time.horizon
            )));
        }
        self.coefficients.a.values(self.mesh.elements)?;
        self.coefficients.b.values(self.mesh.elements)?;
        if self.workers == Some(0) {
            return Err(ExpError::Config("workers must be at least 1".into()));
        }
        let needs_eps = !matches!(self.kind, Kind::Elliptic | Kind::Cubic);
        if needs_eps || !self.eps.is_empty() {
            eps_list("eps", &self.eps)?;
        }
        let missing = |section: &str| ExpError::Config(format!("kind {} needs a [{section}] section", self.kind.name()));
        match self.kind {
            Kind::Elliptic => {
                self.elliptic.as_ref().ok_or_else(|| missing("elliptic"))?;
            }
            Kind::Sweep => {
                let mode = self.sweep.as_ref().map(|s| s.mode).unwrap_or_default();
                if mode != SweepMode::General && !self.loads.f.is_empty() {
                    return Err(ExpError::Config("this sweep mode requires f = 0".into()));
                }
                if mode == SweepMode::Compatible && self.history != HistorySpec::Compatible {
                    return Err(ExpError::Config("compatible sweep mode needs history.kind = \"compatible\"".into()));
                }
            }
            Kind::Counterexample => {
                self.counterexample.as_ref().ok_or_else(|| missing("counterexample"))?;
            }
            Kind::Laplace => {
                let l = self.laplace.as_ref().ok_or_else(|| missing("laplace"))?;
                eps_list("laplace.coercivity_eps", &l.coercivity_eps)?;
                for line in [&l.line, &l.plancherel_line] {
                    positive("line.s1", line.s1)?;
                    positive("line.ds2", line.ds2)?;
                }
                if self.loads.f.is_empty() {
                    return Err(ExpError::Config("the line study transforms loads.f, which is empty".into()));
                }
            }
            Kind::Cubic => {
                self.cubic.as_ref().ok_or_else(|| missing("cubic"))?;
            }
            Kind::Dynamic => {}
        }
        for c in &self.checks {
            let needs_value = matches!(
                c.rule,
                Rule::LastOverFirstAtMost | Rule::MinOverMaxAtLeast | Rule::AtMost | Rule::AtLeast
            );
            if needs_value && c.value.is_none() {
                return Err(ExpError::Config(format!("check on {} needs a value", c.series)));
            }
            if c.rule == Rule::Within && (c.lower.is_none() || c.upper.is_none()) {
                return Err(ExpError::Config(format!("check on {} needs lower and upper", c.series)));
            }
        }
        Ok(())
    }
}
