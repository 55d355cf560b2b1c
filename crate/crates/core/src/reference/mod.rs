//! Reference solutions used to measure the schemes: exact pre-shock Burgers'
//! solutions by characteristics, travelling waves of the general family via
//! an adaptive Runge-Kutta integrator, and fine-grid collective runs.

mod characteristics;
mod fine_grid;
mod ode;
mod travelling_wave;

pub use characteristics::{burgers_characteristics, burgers_shock_time, scalar_characteristics};
pub use fine_grid::{fine_grid_reference, fine_grid_reference_with, Refinement};
pub use ode::{integrate_ode_adaptive, AdaptiveOptions, DenseTrajectory};
pub use travelling_wave::{
    find_travelling_wave, lie_poisson_rhs, travelling_wave_rhs, travelling_wave_rhs_with_floor,
    TravellingWave, TravellingWaveState, WaveSearch, DEFAULT_SINGULARITY_FLOOR,
};
