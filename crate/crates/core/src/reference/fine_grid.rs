use crate::clebsch::{lift, momentum_map, ClebschState};
use crate::dynamics::{integrate, CollectiveSystem, NewtonConfig};
use crate::error::Result;
use crate::grid::{Field, PeriodicGrid, Staggering};
use crate::hamiltonian::HamiltonianSpec;

/// Refinement of a fine-grid reference run relative to the coarse grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Refinement {
    /// Spatial refinement; must be even so coarse half nodes land on fine
    /// full nodes.
    pub space: usize,
    /// Time-step divisor.
    pub time: usize,
}

impl Default for Refinement {
    fn default() -> Self {
        Self { space: 8, time: 4 }
    }
}

/// Collective solution on a grid refined 8x in space with `dt / 4`, restricted
/// to the requested coarse node set.
pub fn fine_grid_reference(
    spec: &HamiltonianSpec,
    coarse: &PeriodicGrid,
    u0: &dyn Fn(f64) -> f64,
    dt: f64,
    t_end: f64,
    newton: &NewtonConfig,
    staggering: Staggering,
) -> Result<Field> {
    fine_grid_reference_with(
        spec,
        coarse,
        u0,
        dt,
        t_end,
        newton,
        staggering,
        Refinement::default(),
    )
}

#[allow(clippy::too_many_arguments)]
pub fn fine_grid_reference_with(
    spec: &HamiltonianSpec,
    coarse: &PeriodicGrid,
    u0: &dyn Fn(f64) -> f64,
    dt: f64,
    t_end: f64,
    newton: &NewtonConfig,
    staggering: Staggering,
    refinement: Refinement,
) -> Result<Field> {
    assert!(
        refinement.space >= 2 && refinement.space % 2 == 0 && refinement.time >= 1,
        "invalid refinement {refinement:?}"
    );
    let fine = PeriodicGrid::new(coarse.n() * refinement.space, coarse.length())?;
    let fine_dt = dt / refinement.time as f64;
    let steps = (t_end / fine_dt).round() as usize;

    let state = lift(&fine, &fine.sample(Staggering::Full, u0))?;
    let system = CollectiveSystem {
        spec: *spec,
        grid: fine,
        winding: state.winding(),
    };
    let z = integrate(&system, &state.to_flat(), fine_dt, steps, newton, |_, _, _| {})
        .map_err(|f| f.source)?;
    let u_fine = momentum_map(&fine, &ClebschState::from_flat(&fine, &z, system.winding)?)?;

    // Every coarse node (full or half) is a fine full node; average the two
    // adjacent fine half-node values there.
    let nf = fine.n();
    let r = refinement.space;
    let at_fine_full = |k: usize| {
        let v = u_fine.values();
        0.5 * (v[(k + nf - 1) % nf] + v[k % nf])
    };
    let values = (1..=coarse.n())
        .map(|j| match staggering {
            Staggering::Full => at_fine_full(r * j),
            Staggering::Half => at_fine_full(r * j - r / 2),
        })
        .collect();
    Ok(Field::new(values, staggering))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::burgers_characteristics;
    use std::f64::consts::PI;

    fn bump(x: f64) -> f64 {
        1.0 + 0.5 * (2.0 * PI * x / 8.0).cos()
    }

    #[test]
    fn constant_profile_is_exact() {
        let g = PeriodicGrid::new(4, 8.0).unwrap();
        let r = fine_grid_reference(
            &HamiltonianSpec::burgers(),
            &g,
            &|_x| 1.25,
            0.01,
            0.05,
            &NewtonConfig::default(),
            Staggering::Full,
        )
        .unwrap();
        for v in r.values() {
            assert!((v - 1.25).abs() < 1e-12);
        }
    }

    #[test]
    fn agrees_with_characteristics_before_shock() {
        let g = PeriodicGrid::new(8, 8.0).unwrap();
        let (dt, t_end) = (2f64.powi(-8), 0.125);
        for stag in [Staggering::Full, Staggering::Half] {
            let r = fine_grid_reference(
                &HamiltonianSpec::burgers(),
                &g,
                &bump,
                dt,
                t_end,
                &NewtonConfig::default(),
                stag,
            )
            .unwrap();
            let exact = g.sample(stag, |x| burgers_characteristics(&bump, x, t_end).unwrap());
            let err = r.sub(&exact).unwrap().max_abs();
            // fine dx = 1/8
            assert!(err < 5e-3, "{stag:?}: {err}");
        }
    }

    #[test]
    fn refinement_change_is_below_coarse_error() {
        let g = PeriodicGrid::new(8, 8.0).unwrap();
        let (dt, t_end) = (2f64.powi(-7), 0.0625);
        let spec = HamiltonianSpec::burgers();
        let newton = NewtonConfig::default();
        let reference = |space| {
            fine_grid_reference_with(
                &spec,
                &g,
                &bump,
                dt,
                t_end,
                &newton,
                Staggering::Half,
                Refinement { space, time: 4 },
            )
            .unwrap()
        };
        let (r8, r16) = (reference(8), reference(16));

        let state = lift(&g, &g.sample(Staggering::Full, bump)).unwrap();
        let sys = CollectiveSystem {
            spec,
            grid: g,
            winding: state.winding(),
        };
        let steps = (t_end / dt).round() as usize;
        let z = integrate(&sys, &state.to_flat(), dt, steps, &newton, |_, _, _| {}).unwrap();
        let coarse = momentum_map(&g, &ClebschState::from_flat(&g, &z, sys.winding).unwrap()).unwrap();

        let coarse_err = coarse.sub(&r8).unwrap().max_abs();
        let change = r16.sub(&r8).unwrap().max_abs();
        assert!(change < coarse_err, "change {change}, coarse error {coarse_err}");
    }
}
