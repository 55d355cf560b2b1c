use std::thread;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::PeriodicGrid;
use crate::reference::fine_grid_reference;

use super::config::{ExperimentConfig, Method, Scheme};
use super::diagnostics::solution_error;
use super::problem::Problem;
use super::run::run_experiment;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub scheme: Scheme,
    #[serde(rename = "N")]
    pub n: usize,
    pub dx: f64,
    /// Largest `|casimir_rel_err|` over the run.
    pub casimir_err: f64,
    /// Largest `|H_rel_err|` over the run.
    #[serde(rename = "H_err")]
    pub h_err: f64,
    /// Relative L2 solution error at `t_end`.
    pub solution_err: f64,
    /// Order against the previous level of the same scheme.
    pub observed_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    /// `characteristics`, `travelling_wave` or `fine_grid`.
    pub reference: String,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn rows_for(&self, scheme: Scheme) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(move |r| r.scheme == scheme)
    }
}

fn run_level(base: &ExperimentConfig, scheme: Scheme, n: usize) -> Result<(ConvergenceRow, String)> {
    let cfg = ExperimentConfig {
        n,
        method: match scheme {
            Scheme::Collective => Method::Collective,
            Scheme::Conventional => Method::Conventional,
        },
        observe_every: 1,
        ..base.clone()
    };
    let out = run_experiment(&cfg)?;
    let run = &out.runs[0];
    if let Some(f) = &run.failure {
        return Err(f.error.clone());
    }
    let last = run.records.last().expect("at least one record");
    let max_abs = |f: fn(&super::diagnostics::DiagnosticsRecord) -> f64| {
        run.records
            .iter()
            .map(|r| f(r).abs())
            .fold(0.0f64, |m, v| if v > m || v.is_nan() { v } else { m })
    };
    let (solution_err, source) = match last.solution_rel_err {
        Some(e) => (e, out.reference.kind().to_string()),
        None => {
            let problem = Problem::new(&cfg)?;
            let grid = PeriodicGrid::new(n, cfg.length)?;
            let reference = fine_grid_reference(
                &cfg.spec,
                &grid,
                &*problem.u0,
                cfg.dt,
                cfg.n_steps() as f64 * cfg.dt,
                &cfg.newton,
                run.final_u.staggering(),
            )?;
            (solution_error(&run.final_u, &reference)?, "fine_grid".to_string())
        }
    };
    let row = ConvergenceRow {
        scheme,
        n,
        dx: cfg.length / n as f64,
        casimir_err: max_abs(|r| r.casimir_rel_err),
        h_err: max_abs(|r| r.h_rel_err),
        solution_err,
        observed_order: None,
    };
    Ok((row, source))
}

/// Runs `base` at each grid size in `levels` (concurrently) for every scheme
/// selected by `base.method`, and reports errors with observed orders
/// `log(e_k / e_{k+1}) / log(N_{k+1} / N_k)`.
pub fn convergence_study(base: &ExperimentConfig, levels: &[usize]) -> Result<ConvergenceTable> {
    if levels.is_empty() {
        return Err(Error::Config("convergence study needs at least one level".into()));
    }
    let jobs: Vec<(Scheme, usize)> = base
        .method
        .schemes()
        .iter()
        .flat_map(|&s| levels.iter().map(move |&n| (s, n)))
        .collect();
    let results: Vec<Result<(ConvergenceRow, String)>> = thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(s, n)| scope.spawn(move || run_level(base, s, n)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("convergence level panicked"))
            .collect()
    });
    let mut rows = Vec::with_capacity(results.len());
    let mut reference = String::new();
    for r in results {
        let (row, source) = r?;
        if reference.is_empty() || source == "fine_grid" {
            reference = source;
        }
        rows.push(row);
    }
    for i in 1..rows.len() {
        let (prev, cur) = (&rows[i - 1], &rows[i]);
        if prev.scheme == cur.scheme {
            let order = (prev.solution_err / cur.solution_err).ln()
                / (cur.n as f64 / prev.n as f64).ln();
            rows[i].observed_order = Some(order);
        }
    }
    Ok(ConvergenceTable { reference, rows })
}
