//! Study configuration read from a single JSON document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mfsc::{Amplitude, ForcingSpec, InitialCondition, McConfig, Mesh1D, MultifidConfig, SolverConfig};

/// Invalid or unreadable configuration; `field` is the dotted key at fault.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Problem {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub mu: f64,
    /// `standard` for `0.1 cos 4πx`, `zero`, or a number for a constant amplitude.
    pub sigma: serde_json::Value,
    /// `standard` or `zero`.
    pub u0: String,
    pub d: usize,
}

impl Default for Problem {
    fn default() -> Self {
        Problem {
            horizon: 0.8,
            mu: 0.01,
            sigma: serde_json::Value::String("standard".into()),
            u0: "standard".into(),
            d: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Discretization {
    pub intervals: usize,
    pub steps: usize,
    pub snapshots: usize,
    pub modes: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization {
            intervals: 32,
            steps: 20,
            snapshots: 20,
            modes: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Collocation {
    pub level: usize,
    pub bound: f64,
    pub eta: Vec<f64>,
    /// `extrapolated`, `expanded` or `plain`.
    pub basis: String,
    pub extrapolate_mean: bool,
}

impl Default for Collocation {
    fn default() -> Self {
        Collocation {
            level: 8,
            bound: 4.0,
            eta: vec![16.0, 4.0, 1.0, 0.5, 0.25],
            basis: "extrapolated".into(),
            extrapolate_mean: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        MonteCarlo {
            samples: 10_000,
            seed: 12345,
        }
    }
}

/// Settings of the basis-improvement study along a segment through `ξ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sensitivity {
    /// Number of `θ` values spread evenly over `[-half_width, half_width]`.
    pub points: usize,
    pub half_width: f64,
    pub fd_step: f64,
    /// Stream seed for the random endpoints `ξ` and `ζ`.
    pub seed: u64,
}

impl Default for Sensitivity {
    fn default() -> Self {
        Sensitivity {
            points: 11,
            half_width: 0.5,
            fd_step: 1e-3,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub directory: PathBuf,
    pub formats: Vec<String>,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            directory: PathBuf::from("out"),
            formats: vec!["csv".into(), "json".into()],
        }
    }
}

impl Outputs {
    pub fn csv(&self) -> bool {
        self.formats.iter().any(|f| f == "csv")
    }

    pub fn json(&self) -> bool {
        self.formats.iter().any(|f| f == "json")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    pub problem: Problem,
    pub discretization: Discretization,
    pub collocation: Collocation,
    pub mc: MonteCarlo,
    pub sensitivity: Sensitivity,
    pub outputs: Outputs,
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be a positive number, got {v}")))
    }
}

fn at_least(field: &str, v: usize, min: usize) -> Result<(), ConfigError> {
    if v >= min {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be at least {min}, got {v}")))
    }
}

/// Locates the offending key in a serde message such as "unknown field `x`".
fn serde_field(msg: &str) -> String {
    msg.split('`').nth(1).unwrap_or("config").to_string()
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: StudyConfig = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            ConfigError::new(serde_field(&msg), msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.problem;
        positive("problem.T", p.horizon)?;
        positive("problem.mu", p.mu)?;
        at_least("problem.d", p.d, 1)?;
        self.amplitude()?;
        self.initial_condition()?;

        let d = &self.discretization;
        at_least("discretization.intervals", d.intervals, 3)?;
        at_least("discretization.steps", d.steps, 1)?;
        at_least("discretization.snapshots", d.snapshots, 1)?;
        at_least("discretization.modes", d.modes, 1)?;
        if !d.steps.is_multiple_of(d.snapshots) {
            return Err(ConfigError::new(
                "discretization.snapshots",
                format!("must divide discretization.steps ({})", d.steps),
            ));
        }

        let c = &self.collocation;
        positive("collocation.bound", c.bound)?;
        if c.eta.is_empty() {
            return Err(ConfigError::new("collocation.eta", "must not be empty"));
        }
        for (i, e) in c.eta.iter().enumerate() {
            positive(&format!("collocation.eta[{i}]"), *e)?;
        }
        self.basis_kind()?;

        at_least("mc.samples", self.mc.samples, 1)?;

        let s = &self.sensitivity;
        at_least("sensitivity.points", s.points, 1)?;
        positive("sensitivity.half_width", s.half_width)?;
        positive("sensitivity.fd_step", s.fd_step)?;

        for (i, f) in self.outputs.formats.iter().enumerate() {
            if f != "csv" && f != "json" {
                return Err(ConfigError::new(
                    format!("outputs.formats[{i}]"),
                    format!("unknown format {f:?}; expected \"csv\" or \"json\""),
                ));
            }
        }
        Ok(())
    }

    pub fn amplitude(&self) -> Result<Amplitude, ConfigError> {
        match &self.problem.sigma {
            serde_json::Value::String(s) if s == "standard" => Ok(Amplitude::Standard),
            serde_json::Value::String(s) if s == "zero" => Ok(Amplitude::Constant(0.0)),
            serde_json::Value::Number(n) => n
                .as_f64()
                .filter(|v| v.is_finite())
                .map(Amplitude::Constant)
                .ok_or_else(|| ConfigError::new("problem.sigma", "constant amplitude must be finite")),
            other => Err(ConfigError::new(
                "problem.sigma",
                format!("expected \"standard\", \"zero\" or a number, got {other}"),
            )),
        }
    }

    pub fn initial_condition(&self) -> Result<InitialCondition, ConfigError> {
        match self.problem.u0.as_str() {
            "standard" => Ok(InitialCondition::Standard),
            "zero" => Ok(InitialCondition::Zero),
            other => Err(ConfigError::new(
                "problem.u0",
                format!("expected \"standard\" or \"zero\", got {other:?}"),
            )),
        }
    }

    pub fn basis_kind(&self) -> Result<mfsc::BasisKind, ConfigError> {
        match self.collocation.basis.as_str() {
            "extrapolated" => Ok(mfsc::BasisKind::Extrapolated),
            "expanded" => Ok(mfsc::BasisKind::Expanded),
            "plain" => Ok(mfsc::BasisKind::Plain),
            other => Err(ConfigError::new(
                "collocation.basis",
                format!("expected \"extrapolated\", \"expanded\" or \"plain\", got {other:?}"),
            )),
        }
    }

    pub fn solver(&self) -> Result<SolverConfig, ConfigError> {
        let mesh = Mesh1D::uniform(self.discretization.intervals)
            .map_err(|e| ConfigError::new("discretization.intervals", e.to_string()))?;
        let forcing = ForcingSpec::new(self.amplitude()?, self.problem.horizon, self.problem.d)
            .map_err(|e| ConfigError::new("problem", e.to_string()))?;
        Ok(SolverConfig {
            mesh,
            mu: self.problem.mu,
            steps: self.discretization.steps,
            u0: self.initial_condition()?,
            forcing,
        })
    }

    pub fn multifid(&self) -> Result<MultifidConfig, ConfigError> {
        let mut m = MultifidConfig::new(self.solver()?, self.discretization.snapshots, self.discretization.modes);
        m.kind = self.basis_kind()?;
        m.extrapolate_mean = self.collocation.extrapolate_mean;
        Ok(m)
    }

    pub fn monte_carlo(&self) -> Result<McConfig, ConfigError> {
        Ok(McConfig {
            samples: self.mc.samples,
            seed: self.mc.seed,
            solver: self.solver()?,
        })
    }

    /// Configuration of the basis-improvement study: `d = 10`, 64 intervals,
    /// 200 steps and snapshots, 10 modes.
    pub fn basis_study() -> Self {
        let mut c = StudyConfig::default();
        c.problem.d = 10;
        c.discretization = Discretization {
            intervals: 64,
            steps: 200,
            snapshots: 200,
            modes: 10,
        };
        c
    }
}
