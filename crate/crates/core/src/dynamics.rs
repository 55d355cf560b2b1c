//! Semi-discrete vector fields and the implicit midpoint rule.
//!
//! Two vector fields are provided over flat state vectors:
//! the collective canonical system on `(q, p)` (packed `q` then `p`) and the
//! conventional skew-gradient system on `u`. Both are stepped with
//! [`midpoint_step`], which solves `z+ = z + dt F((z + z+)/2)` by Newton's
//! method with a finite-difference Jacobian.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clebsch::ClebschState;
use crate::error::{Error, Result};
use crate::grid::{Field, PeriodicGrid, Staggering};
use crate::hamiltonian::{grad_collective, grad_conventional, HamiltonianSpec};

/// A vector field `F: R^dim -> R^dim`.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, z: &[f64], out: &mut [f64]) -> Result<()>;
}

/// Adapts a closure to [`VectorField`].
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[f64], &mut [f64]),
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(&[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        (self.f)(z, out);
        Ok(())
    }
}

/// `q' = ∇_p Ĥ(J(q, p))`, `p' = -∇_q Ĥ(J(q, p))`.
pub fn collective_field(
    spec: &HamiltonianSpec,
    grid: &PeriodicGrid,
    state: &ClebschState,
) -> Result<(Field, Field)> {
    let (gq, gp) = grad_collective(spec, grid, state)?;
    Ok((gp, gq.scale(-1.0)))
}

/// The discrete coadjoint operator `K(u) = U D + D U` applied to `g`, with
/// `D` the periodic centred difference.
pub fn apply_k(grid: &PeriodicGrid, u: &Field, g: &Field) -> Result<Field> {
    if u.len() != g.len() || u.len() != grid.n() {
        return Err(Error::LengthMismatch {
            expected: grid.n(),
            found: if u.len() != grid.n() { u.len() } else { g.len() },
        });
    }
    let n = grid.n();
    let (u, gv) = (u.values(), g.values());
    let scale = 0.5 / grid.dx();
    let values = (0..n)
        .map(|i| {
            let prev = (i + n - 1) % n;
            let next = (i + 1) % n;
            scale * ((u[i] + u[next]) * gv[next] - (u[prev] + u[i]) * gv[prev])
        })
        .collect();
    Ok(Field::new(values, g.staggering()))
}

/// Skew-gradient right-hand side `K(u) ∇Ĥ(u) / dx`.
///
/// `∇Ĥ / dx` is the discrete variational derivative; the `1/dx` keeps the
/// field consistent with `u_t = (∂u + u∂) δH/δu` while leaving `Ĥ` a first
/// integral.
pub fn conventional_field(spec: &HamiltonianSpec, grid: &PeriodicGrid, u: &Field) -> Result<Field> {
    let grad = grad_conventional(spec, grid, u)?;
    Ok(apply_k(grid, u, &grad)?.scale(1.0 / grid.dx()))
}

/// [`collective_field`] over the packed state `(q, p)`.
#[derive(Debug, Clone)]
pub struct CollectiveSystem {
    pub spec: HamiltonianSpec,
    pub grid: PeriodicGrid,
    pub winding: f64,
}

impl VectorField for CollectiveSystem {
    fn dim(&self) -> usize {
        2 * self.grid.n()
    }

    fn eval(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.grid.n();
        let state = ClebschState::from_flat(&self.grid, z, self.winding)?;
        let (qdot, pdot) = collective_field(&self.spec, &self.grid, &state)?;
        out[..n].copy_from_slice(qdot.values());
        out[n..].copy_from_slice(pdot.values());
        Ok(())
    }
}

/// [`conventional_field`] over `u`.
#[derive(Debug, Clone)]
pub struct ConventionalSystem {
    pub spec: HamiltonianSpec,
    pub grid: PeriodicGrid,
}

impl VectorField for ConventionalSystem {
    fn dim(&self) -> usize {
        self.grid.n()
    }

    fn eval(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        let u = Field::new(z.to_vec(), Staggering::Full);
        let f = conventional_field(&self.spec, &self.grid, &u)?;
        out.copy_from_slice(f.values());
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JacobianMode {
    /// Re-assemble the Jacobian at every Newton iteration.
    FiniteDifference,
    /// Assemble once per step at the initial guess and reuse it.
    FrozenFiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub jacobian_mode: JacobianMode,
    pub fd_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
            jacobian_mode: JacobianMode::FrozenFiniteDifference,
            fd_step: 1e-7,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("Newton tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("Newton max_iter must be >= 1".into()));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(Error::Config(format!(
                "Newton fd_step must be > 0, got {}",
                self.fd_step
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// Number of residual evaluations performed.
    pub newton_iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
}

fn max_abs(v: &[f64]) -> f64 {
    // NaN must not be swallowed by `f64::max`
    v.iter()
        .map(|x| x.abs())
        .fold(0.0, |m, x| if x > m || x.is_nan() { x } else { m })
}

/// `I - (dt/2) DF(mid)` by forward differences, reusing `f_mid = F(mid)`.
fn residual_jacobian<F: VectorField + ?Sized>(
    field: &F,
    mid: &[f64],
    f_mid: &[f64],
    dt: f64,
    fd_step: f64,
) -> Result<DMatrix<f64>> {
    let n = mid.len();
    let mut jac = DMatrix::<f64>::identity(n, n);
    let mut shifted = mid.to_vec();
    let mut f_shifted = vec![0.0; n];
    for k in 0..n {
        let h = fd_step * mid[k].abs().max(1.0);
        shifted[k] = mid[k] + h;
        field.eval(&shifted, &mut f_shifted)?;
        shifted[k] = mid[k];
        let scale = 0.5 * dt / h;
        for i in 0..n {
            jac[(i, k)] -= scale * (f_shifted[i] - f_mid[i]);
        }
    }
    Ok(jac)
}

/// One implicit midpoint step from `z` with step `dt`.
///
/// A negative `dt` steps backwards in time.
pub fn midpoint_step<F: VectorField + ?Sized>(
    field: &F,
    z: &[f64],
    dt: f64,
    cfg: &NewtonConfig,
) -> Result<(Vec<f64>, StepReport)> {
    let n = z.len();
    if n != field.dim() {
        return Err(Error::LengthMismatch {
            expected: field.dim(),
            found: n,
        });
    }
    let mut w = z.to_vec();
    let mut mid = vec![0.0; n];
    let mut f_mid = vec![0.0; n];
    let mut residual = vec![0.0; n];
    let mut lu = None;
    let mut res_norm = f64::INFINITY;

    for iteration in 1..=cfg.max_iter {
        for i in 0..n {
            mid[i] = 0.5 * (z[i] + w[i]);
        }
        field.eval(&mid, &mut f_mid)?;
        for i in 0..n {
            residual[i] = w[i] - z[i] - dt * f_mid[i];
        }
        res_norm = max_abs(&residual);
        if !res_norm.is_finite() {
            break;
        }
        if res_norm <= cfg.tol {
            return Ok((
                w,
                StepReport {
                    newton_iterations: iteration,
                    final_residual: res_norm,
                    converged: true,
                },
            ));
        }
        if lu.is_none() || cfg.jacobian_mode == JacobianMode::FiniteDifference {
            let jac = residual_jacobian(field, &mid, &f_mid, dt, cfg.fd_step)?;
            lu = Some(jac.lu());
        }
        let rhs = DVector::from_iterator(n, residual.iter().map(|r| -r));
        let Some(delta) = lu.as_ref().and_then(|lu| lu.solve(&rhs)) else {
            break;
        };
        for i in 0..n {
            w[i] += delta[i];
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iter,
        residual: res_norm,
    })
}

/// A run that stopped early because a step failed.
#[derive(Debug, Clone, Error)]
#[error("step {step} failed: {source}")]
pub struct IntegrationFailure {
    /// Index (1-based) of the step that failed.
    pub step: usize,
    /// Last successfully computed state.
    pub state: Vec<f64>,
    pub source: Error,
}

/// Fixed-step midpoint integration. `observer` sees `(step, z, report)` after
/// each completed step; steps are numbered from 1.
pub fn integrate<F, O>(
    field: &F,
    z0: &[f64],
    dt: f64,
    n_steps: usize,
    cfg: &NewtonConfig,
    mut observer: O,
) -> std::result::Result<Vec<f64>, IntegrationFailure>
where
    F: VectorField + ?Sized,
    O: FnMut(usize, &[f64], &StepReport),
{
    let mut z = z0.to_vec();
    for step in 1..=n_steps {
        match midpoint_step(field, &z, dt, cfg) {
            Ok((next, report)) => {
                z = next;
                observer(step, &z, &report);
            }
            Err(source) => {
                return Err(IntegrationFailure {
                    step,
                    state: z,
                    source,
                })
            }
        }
    }
    Ok(z)
}

/// Jacobian of the one-step midpoint map `z -> z⁺` at `z`, by central
/// differences with step `h`.
pub fn step_jacobian<F: VectorField + ?Sized>(
    field: &F,
    z: &[f64],
    dt: f64,
    cfg: &NewtonConfig,
    h: f64,
) -> Result<DMatrix<f64>> {
    let n = z.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut zs = z.to_vec();
    for k in 0..n {
        zs[k] = z[k] + h;
        let (plus, _) = midpoint_step(field, &zs, dt, cfg)?;
        zs[k] = z[k] - h;
        let (minus, _) = midpoint_step(field, &zs, dt, cfg)?;
        zs[k] = z[k];
        for i in 0..n {
            m[(i, k)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    Ok(m)
}

/// `‖Mᵀ J M - J‖∞` for `J = scale · [[0, I], [-I, 0]]` on `R^{2N}`.
pub fn symplecticity_defect(m: &DMatrix<f64>, scale: f64) -> f64 {
    let n2 = m.nrows();
    let n = n2 / 2;
    let mut j = DMatrix::<f64>::zeros(n2, n2);
    for i in 0..n {
        j[(i, n + i)] = scale;
        j[(n + i, i)] = -scale;
    }
    (m.transpose() * &j * m - &j).amax()
}
