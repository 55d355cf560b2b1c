//! The polynomial Hamiltonian family
//! `H(u) = ∫ C1 u² + C2 u_x² + C3 u³ + C4 u_x³ dx`, discretised in the
//! collective and in the conventional picture, with exact gradients.

use serde::{Deserialize, Serialize};

use crate::clebsch::{jet, jet_adjoint_accumulate, ClebschState, JetTable};
use crate::error::{Error, Result};
use crate::grid::{Field, PeriodicGrid, Staggering};

/// Coefficients of `u²`, `u_x²`, `u³`, `u_x³`.
///
/// The density splits into an even part `C1 u² + C3 u³` (evaluated on the
/// half grid) and an odd part `C2 u_x² + C4 u_x³` (evaluated on the full
/// grid).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
}

impl HamiltonianSpec {
    pub fn new(c1: f64, c2: f64, c3: f64, c4: f64) -> Result<Self> {
        let spec = Self { c1, c2, c3, c4 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.c1, self.c2, self.c3, self.c4]
            .iter()
            .all(|c| c.is_finite())
        {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "Hamiltonian coefficients must be finite: {self:?}"
            )))
        }
    }

    /// Inviscid Burgers' equation `u_t = 6 u u_x`.
    pub fn burgers() -> Self {
        Self {
            c1: 1.0,
            c2: 0.0,
            c3: 0.0,
            c4: 0.0,
        }
    }

    /// The cubic "extended Burgers" Hamiltonian.
    pub fn extended_burgers() -> Self {
        Self {
            c1: 0.5,
            c2: 0.5,
            c3: -0.25,
            c4: 0.5,
        }
    }

    pub fn zero() -> Self {
        Self {
            c1: 0.0,
            c2: 0.0,
            c3: 0.0,
            c4: 0.0,
        }
    }

    /// True when only `C1` is non-zero, i.e. the flow is `u_t = 6 C1 u u_x`.
    pub fn is_pure_burgers(&self) -> bool {
        self.c1 != 0.0 && self.c2 == 0.0 && self.c3 == 0.0 && self.c4 == 0.0
    }

    pub fn even_density(&self, u: f64) -> f64 {
        u * u * (self.c1 + self.c3 * u)
    }

    pub fn odd_density(&self, ux: f64) -> f64 {
        ux * ux * (self.c2 + self.c4 * ux)
    }

    pub fn even_density_derivative(&self, u: f64) -> f64 {
        u * (2.0 * self.c1 + 3.0 * self.c3 * u)
    }

    pub fn odd_density_derivative(&self, ux: f64) -> f64 {
        ux * (2.0 * self.c2 + 3.0 * self.c4 * ux)
    }

    pub fn density(&self, u: f64, ux: f64) -> f64 {
        self.even_density(u) + self.odd_density(ux)
    }
}

fn check_full(u: &Field) -> Result<()> {
    if u.staggering() != Staggering::Full {
        return Err(Error::StaggeringMismatch {
            expected: Staggering::Full,
            found: u.staggering(),
        });
    }
    Ok(())
}

fn split_sum(spec: &HamiltonianSpec, jet: &JetTable) -> f64 {
    let even: f64 = jet.row(0).values().iter().map(|&u| spec.even_density(u)).sum();
    let odd: f64 = jet.row(1).values().iter().map(|&ux| spec.odd_density(ux)).sum();
    even + odd
}

/// Collective `Ĥ(J(q, p))`: even part summed over half nodes, odd part over
/// full nodes, no `dx` factor (it lives in the symplectic form).
pub fn discrete_h_collective(
    spec: &HamiltonianSpec,
    grid: &PeriodicGrid,
    state: &ClebschState,
) -> Result<f64> {
    Ok(split_sum(spec, &jet(grid, state, 1)?))
}

/// Gradients `(∇_q, ∇_p)` of [`discrete_h_collective`] as a function on `R^{2N}`.
pub fn grad_collective(
    spec: &HamiltonianSpec,
    grid: &PeriodicGrid,
    state: &ClebschState,
) -> Result<(Field, Field)> {
    let table = jet(grid, state, 1)?;
    let cotangents = JetTable::from_rows(vec![
        table.row(0).map(|u| spec.even_density_derivative(u)),
        table.row(1).map(|ux| spec.odd_density_derivative(ux)),
    ])?;
    let g_u = jet_adjoint_accumulate(grid, &cotangents)?;
    let qx = grid.apply_d(state.q(), state.winding())?;
    let sp = grid.apply_s(state.p())?;
    let gp = grid.apply_st(&qx.hadamard(&g_u)?)?;
    let gq = grid.apply_tt(&sp.hadamard(&g_u)?)?.scale(1.0 / grid.dx());
    Ok((gq, gp))
}

/// Conventional `Ĥ(u) = dx Σ (C1 u² + C2 u_x² + C3 u³ + C4 u_x³)` with
/// `u_x = T u / dx`.
pub fn discrete_h_conventional(
    spec: &HamiltonianSpec,
    grid: &PeriodicGrid,
    u: &Field,
) -> Result<f64> {
    check_full(u)?;
    let ux = grid.apply_t(u)?;
    let even: f64 = u.values().iter().map(|&v| spec.even_density(v)).sum();
    let odd: f64 = ux.values().iter().map(|&v| spec.odd_density(v)).sum();
    Ok(grid.dx() * (even + odd))
}

/// `∇_u` of [`discrete_h_conventional`]:
/// `dx (2 C1 u + 3 C3 u²) + T^T (2 C2 u_x + 3 C4 u_x²)`.
pub fn grad_conventional(spec: &HamiltonianSpec, grid: &PeriodicGrid, u: &Field) -> Result<Field> {
    check_full(u)?;
    let ux = grid.apply_t(u)?;
    let odd = grid.apply_tt(&ux.map(|v| spec.odd_density_derivative(v)))?;
    let dx = grid.dx();
    u.map(|v| dx * spec.even_density_derivative(v)).add(&odd)
}

/// Discrete Casimir `dx Σ sqrt|u_j|` on whatever staggering `u` carries.
pub fn casimir(grid: &PeriodicGrid, u: &Field) -> f64 {
    grid.dx() * u.values().iter().map(|v| v.abs().sqrt()).sum::<f64>()
}
