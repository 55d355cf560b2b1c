use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::NewtonConfig;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Collective,
    Conventional,
    Both,
}

impl Method {
    pub fn schemes(self) -> &'static [Scheme] {
        match self {
            Method::Collective => &[Scheme::Collective],
            Method::Conventional => &[Scheme::Conventional],
            Method::Both => &[Scheme::Collective, Scheme::Conventional],
        }
    }
}

/// A single discretisation, as opposed to [`Method`] which may select both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Collective,
    Conventional,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Collective => "collective",
            Scheme::Conventional => "conventional",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    /// `1 + cos(2πx/L)/2`.
    CosineBump,
    /// `1 + exp(-sin²(πx/L))/2`.
    PeriodicBump,
    /// Periodic travelling wave of the configured Hamiltonian with period
    /// `L`, oscillating about 1 with maximum [`WAVE_PEAK`].
    TravellingWave,
    /// Expression in `x` and `L`, e.g. `"1 + 0.2*sin(2*pi*x/L)"`.
    Custom(String),
}

pub const WAVE_CENTER: f64 = 1.0;
pub const WAVE_PEAK: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Inviscid Burgers' shock formation.
    Burgers,
    /// Travelling wave of the extended Burgers' equation.
    TravellingWave,
    /// Long run of the extended Burgers' equation from a smooth bump.
    PeriodicBump,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Burgers, Preset::TravellingWave, Preset::PeriodicBump];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Burgers => "burgers",
            Preset::TravellingWave => "travelling_wave",
            Preset::PeriodicBump => "periodic_bump",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    pub spec: HamiltonianSpec,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    pub dt: f64,
    pub t_end: f64,
    pub initial_condition: InitialCondition,
    pub observe_every: usize,
    #[serde(default)]
    pub newton: NewtonConfig,
    pub output_path: PathBuf,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let base = |spec, n, dt: f64, t_end, ic, observe_every| Self {
            method: Method::Both,
            spec,
            n,
            length: 8.0,
            dt,
            t_end,
            initial_condition: ic,
            observe_every,
            newton: NewtonConfig::default(),
            output_path: PathBuf::from(preset.name()),
        };
        match preset {
            Preset::Burgers => base(
                HamiltonianSpec::burgers(),
                64,
                2f64.powi(-12),
                1.37,
                InitialCondition::CosineBump,
                64,
            ),
            Preset::TravellingWave => base(
                HamiltonianSpec::extended_burgers(),
                16,
                2f64.powi(-6),
                437.0,
                InitialCondition::TravellingWave,
                64,
            ),
            Preset::PeriodicBump => base(
                HamiltonianSpec::extended_burgers(),
                32,
                2f64.powi(-8),
                1000.0,
                InitialCondition::PeriodicBump,
                256,
            ),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.newton.validate()?;
        if self.n < 3 {
            return Err(Error::Config(format!("N must be >= 3, got {}", self.n)));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::Config(format!("L must be > 0, got {}", self.length)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if self.observe_every == 0 {
            return Err(Error::Config("observe_every must be >= 1".into()));
        }
        if let InitialCondition::Custom(expr) = &self.initial_condition {
            let _profile = super::problem::parse_expression(expr, self.length)?;
        }
        Ok(())
    }

    /// Number of time steps, `t_end / dt` rounded to the nearest integer.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}
