use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Field, PeriodicGrid, Staggering};
use crate::reference::{
    burgers_shock_time, find_travelling_wave, scalar_characteristics, TravellingWave, WaveSearch,
};

use super::config::{ExperimentConfig, InitialCondition, WAVE_CENTER, WAVE_PEAK};

type Profile = Box<dyn Fn(f64) -> f64>;

/// Parses a custom initial condition in the variables `x` and `L`.
pub fn parse_expression(expr: &str, length: f64) -> Result<Profile> {
    let parsed: meval::Expr = expr
        .parse()
        .map_err(|e| Error::Config(format!("initial condition '{expr}': {e}")))?;
    let f = parsed
        .bind2("x", "L")
        .map_err(|e| Error::Config(format!("initial condition '{expr}': {e}")))?;
    let profile = move |x: f64| f(x, length);
    let probe = profile(0.0);
    if !probe.is_finite() {
        return Err(Error::Config(format!(
            "initial condition '{expr}' is not finite at x = 0"
        )));
    }
    Ok(Box::new(profile))
}

/// Where exact solution values come from, if anywhere.
#[derive(Debug, Clone)]
pub enum Reference {
    None,
    /// `u_t = a u u_x` solved by characteristics, valid before `shock_time`.
    Characteristics { a: f64, shock_time: f64 },
    Wave(TravellingWave),
}

impl Reference {
    pub fn kind(&self) -> &'static str {
        match self {
            Reference::None => "none",
            Reference::Characteristics { .. } => "characteristics",
            Reference::Wave(_) => "travelling_wave",
        }
    }
}

/// Initial profile plus reference for a configuration.
pub struct Problem {
    pub u0: Profile,
    pub reference: Reference,
}

impl Problem {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let l = cfg.length;
        let u0: Profile = match &cfg.initial_condition {
            InitialCondition::CosineBump => Box::new(move |x| 1.0 + 0.5 * (2.0 * PI * x / l).cos()),
            InitialCondition::PeriodicBump => {
                Box::new(move |x| 1.0 + 0.5 * (-(PI * x / l).sin().powi(2)).exp())
            }
            InitialCondition::TravellingWave => {
                let search = WaveSearch::new(l, WAVE_CENTER, WAVE_PEAK);
                let wave = find_travelling_wave(&cfg.spec, &search)
                    .map_err(|e| Error::Config(format!("travelling wave: {e}")))?;
                let w = wave.clone();
                return Ok(Self {
                    u0: Box::new(move |x| w.profile(x)),
                    reference: Reference::Wave(wave),
                });
            }
            InitialCondition::Custom(expr) => parse_expression(expr, l)?,
        };
        let reference = if cfg.spec.is_pure_burgers() {
            let a = 6.0 * cfg.spec.c1;
            Reference::Characteristics {
                a,
                shock_time: burgers_shock_time(&*u0, a, l),
            }
        } else {
            Reference::None
        };
        Ok(Self { u0, reference })
    }

    /// Exact solution sampled on `staggering` at time `t`, when available.
    pub fn exact(&self, grid: &PeriodicGrid, staggering: Staggering, t: f64) -> Option<Field> {
        match &self.reference {
            Reference::None => None,
            Reference::Characteristics { a, shock_time } => {
                if t >= *shock_time {
                    return None;
                }
                let values: Result<Vec<f64>> = grid
                    .nodes(staggering)
                    .into_iter()
                    .map(|x| scalar_characteristics(&*self.u0, *a, x, t))
                    .collect();
                values.ok().map(|v| Field::new(v, staggering))
            }
            Reference::Wave(w) => Some(grid.sample(staggering, |x| w.exact(x, t))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Preset;

    #[test]
    fn custom_expression_evaluates() {
        let f = parse_expression("1 + 0.5*cos(2*pi*x/L)", 8.0).unwrap();
        assert!((f(2.0) - 1.0).abs() < 1e-15);
        assert!((f(0.0) - 1.5).abs() < 1e-15);
        assert!(parse_expression("1 + y", 8.0).is_err());
    }

    #[test]
    fn burgers_reference_is_characteristics() {
        let p = Problem::new(&ExperimentConfig::preset(Preset::Burgers)).unwrap();
        let Reference::Characteristics { a, shock_time } = p.reference else {
            panic!("wrong reference")
        };
        assert_eq!(a, 6.0);
        assert!((shock_time - 8.0 / (6.0 * PI)).abs() < 1e-4);
        let g = PeriodicGrid::new(16, 8.0).unwrap();
        assert!(p.exact(&g, Staggering::Half, 0.2).is_some());
        assert!(p.exact(&g, Staggering::Half, 0.5).is_none());
    }

    #[test]
    fn extended_bump_has_no_reference() {
        let p = Problem::new(&ExperimentConfig::preset(Preset::PeriodicBump)).unwrap();
        assert!(matches!(p.reference, Reference::None));
        assert!(((p.u0)(0.0) - 1.5).abs() < 1e-15);
    }
}
