pub mod clebsch;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod harness;
pub mod reference;

pub use error::{Error, Result};
