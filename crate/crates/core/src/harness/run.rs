use crate::clebsch::{lift, momentum_map, ClebschState};
use crate::dynamics::{integrate, CollectiveSystem, ConventionalSystem, StepReport, VectorField};
use crate::error::{Error, Result};
use crate::grid::{Field, PeriodicGrid, Staggering};
use crate::hamiltonian::{casimir, discrete_h_collective, discrete_h_conventional, HamiltonianSpec};

use super::config::{ExperimentConfig, Scheme};
use super::diagnostics::{fourier_modes, relative_change, solution_error, DiagnosticsRecord};
use super::problem::{Problem, Reference};

/// Where and why a scheme stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    /// 1-based step that failed.
    pub step: usize,
    pub t: f64,
    pub error: Error,
}

#[derive(Debug, Clone)]
pub struct SchemeRun {
    pub scheme: Scheme,
    pub records: Vec<DiagnosticsRecord>,
    /// Last completed step.
    pub final_step: usize,
    /// `u` on the full grid (conventional) or half grid (collective).
    pub final_u: Field,
    /// `(q, p)` for the collective scheme.
    pub final_qp: Option<(Field, Field)>,
    pub failure: Option<RunFailure>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub reference: Reference,
    pub runs: Vec<SchemeRun>,
}

impl RunOutput {
    pub fn failed(&self) -> bool {
        self.runs.iter().any(|r| r.failure.is_some())
    }

    pub fn run(&self, scheme: Scheme) -> Option<&SchemeRun> {
        self.runs.iter().find(|r| r.scheme == scheme)
    }

    /// Records of all schemes ordered by step, schemes in a fixed order
    /// within a step.
    pub fn interleaved_records(&self) -> Vec<&DiagnosticsRecord> {
        let mut all: Vec<&DiagnosticsRecord> = self.runs.iter().flat_map(|r| &r.records).collect();
        all.sort_by_key(|r| (r.step, r.scheme));
        all
    }
}

struct Tracker<'a> {
    scheme: Scheme,
    spec: HamiltonianSpec,
    grid: PeriodicGrid,
    winding: f64,
    problem: &'a Problem,
    dt: f64,
    h0: f64,
    c0: f64,
}

impl Tracker<'_> {
    fn u_of(&self, z: &[f64]) -> Result<Field> {
        match self.scheme {
            Scheme::Collective => momentum_map(
                &self.grid,
                &ClebschState::from_flat(&self.grid, z, self.winding)?,
            ),
            Scheme::Conventional => Ok(Field::full(z.to_vec())),
        }
    }

    /// `Ĥ` normalised so both schemes approximate `∫ H dx`.
    fn energy(&self, z: &[f64]) -> Result<f64> {
        match self.scheme {
            Scheme::Collective => {
                let state = ClebschState::from_flat(&self.grid, z, self.winding)?;
                Ok(self.grid.dx() * discrete_h_collective(&self.spec, &self.grid, &state)?)
            }
            Scheme::Conventional => {
                discrete_h_conventional(&self.spec, &self.grid, &Field::full(z.to_vec()))
            }
        }
    }

    fn record(&self, step: usize, z: &[f64], newton_iters: usize) -> Result<DiagnosticsRecord> {
        let t = step as f64 * self.dt;
        let u = self.u_of(z)?;
        let h = self.energy(z)?;
        let c = casimir(&self.grid, &u);
        let solution_rel_err = match self.problem.exact(&self.grid, u.staggering(), t) {
            Some(exact) => Some(solution_error(&u, &exact)?),
            None => None,
        };
        let modes = fourier_modes(&u);
        Ok(DiagnosticsRecord {
            scheme: self.scheme,
            step,
            t,
            h_hat: h,
            casimir: c,
            h_rel_err: relative_change(self.h0, h),
            casimir_rel_err: relative_change(self.c0, c),
            solution_rel_err,
            nyquist_amp: modes.nyquist().unwrap_or(f64::NAN),
            fourier_amp: modes.amplitudes,
            newton_iters,
        })
    }
}

fn run_scheme(cfg: &ExperimentConfig, problem: &Problem, scheme: Scheme) -> Result<SchemeRun> {
    let grid = PeriodicGrid::new(cfg.n, cfg.length)?;
    let u0 = grid.sample(Staggering::Full, &*problem.u0);
    let (system, z0, winding): (Box<dyn VectorField>, Vec<f64>, f64) = match scheme {
        Scheme::Collective => {
            let state = lift(&grid, &u0)?;
            let winding = state.winding();
            let sys = CollectiveSystem {
                spec: cfg.spec,
                grid,
                winding,
            };
            (Box::new(sys), state.to_flat(), winding)
        }
        Scheme::Conventional => {
            let sys = ConventionalSystem {
                spec: cfg.spec,
                grid,
            };
            (Box::new(sys), u0.into_values(), 0.0)
        }
    };
    let mut tracker = Tracker {
        scheme,
        spec: cfg.spec,
        grid,
        winding,
        problem,
        dt: cfg.dt,
        h0: 0.0,
        c0: 0.0,
    };
    tracker.h0 = tracker.energy(&z0)?;
    tracker.c0 = casimir(&grid, &tracker.u_of(&z0)?);

    let n_steps = cfg.n_steps();
    let mut records = vec![tracker.record(0, &z0, 0)?];
    let mut diag_error = None;
    let mut last_iters = 0;
    let observer = |step: usize, z: &[f64], report: &StepReport| {
        last_iters = report.newton_iterations;
        if diag_error.is_some() || !(step % cfg.observe_every == 0 || step == n_steps) {
            return;
        }
        match tracker.record(step, z, report.newton_iterations) {
            Ok(r) => records.push(r),
            Err(e) => diag_error = Some(e),
        }
    };
    let outcome = integrate(&*system, &z0, cfg.dt, n_steps, &cfg.newton, observer);
    if let Some(e) = diag_error {
        return Err(e);
    }
    let (z, final_step, failure) = match outcome {
        Ok(z) => (z, n_steps, None),
        Err(f) => {
            let failure = RunFailure {
                step: f.step,
                t: f.step as f64 * cfg.dt,
                error: f.source,
            };
            (f.state, failure.step - 1, Some(failure))
        }
    };
    if records.last().map(|r| r.step) != Some(final_step) {
        records.push(tracker.record(final_step, &z, last_iters)?);
    }
    let final_u = tracker.u_of(&z)?;
    let final_qp = match scheme {
        Scheme::Collective => {
            let s = ClebschState::from_flat(&grid, &z, winding)?;
            Some((s.q().clone(), s.p().clone()))
        }
        Scheme::Conventional => None,
    };
    Ok(SchemeRun {
        scheme,
        records,
        final_step,
        final_u,
        final_qp,
        failure,
    })
}

/// Runs every scheme selected by `cfg.method` from the same initial data.
///
/// Newton failures end that scheme's run and are reported in
/// [`SchemeRun::failure`] with the records gathered so far; other errors
/// are returned.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let problem = Problem::new(cfg)?;
    let runs = cfg
        .method
        .schemes()
        .iter()
        .map(|&s| run_scheme(cfg, &problem, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunOutput {
        config: cfg.clone(),
        reference: problem.reference,
        runs,
    })
}
