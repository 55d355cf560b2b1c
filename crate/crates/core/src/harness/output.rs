use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::error::Result;
use crate::grid::PeriodicGrid;

use super::convergence::ConvergenceTable;
use super::problem::Reference;
use super::run::{RunOutput, SchemeRun};

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

const COLUMNS: [&str; 10] = [
    "scheme",
    "step",
    "t",
    "H_hat",
    "casimir",
    "H_rel_err",
    "casimir_rel_err",
    "solution_rel_err",
    "nyquist_amp",
    "newton_iters",
];

pub fn diagnostics_csv(out: &RunOutput) -> String {
    let modes = out.config.n / 2 + 1;
    let mut s = COLUMNS.join(",");
    for k in 0..modes {
        write!(s, ",amp_{k}").unwrap();
    }
    s.push('\n');
    for r in out.interleaved_records() {
        write!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.scheme.name(),
            r.step,
            fmt_f64(r.t),
            fmt_f64(r.h_hat),
            fmt_f64(r.casimir),
            fmt_f64(r.h_rel_err),
            fmt_f64(r.casimir_rel_err),
            fmt_opt(r.solution_rel_err),
            fmt_f64(r.nyquist_amp),
            r.newton_iters
        )
        .unwrap();
        for a in &r.fourier_amp {
            write!(s, ",{}", fmt_f64(*a)).unwrap();
        }
        s.push('\n');
    }
    s
}

fn column_csv(names: &[&str], cols: &[&[f64]]) -> String {
    let mut s = names.join(",");
    s.push('\n');
    for i in 0..cols[0].len() {
        let row: Vec<String> = cols.iter().map(|c| fmt_f64(c[i])).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Final fields of one scheme: `x,u` for the conventional scheme;
/// `x_full,q,p,x_half,u` for the collective one.
pub fn final_fields_csv(run: &SchemeRun, out: &RunOutput) -> String {
    let grid = PeriodicGrid::new(out.config.n, out.config.length)
        .expect("validated config");
    let nodes = grid.nodes(run.final_u.staggering());
    match &run.final_qp {
        Some((q, p)) => column_csv(
            &["x_full", "q", "p", "x_half", "u"],
            &[&grid.full_nodes(), q.values(), p.values(), &nodes, run.final_u.values()],
        ),
        None => column_csv(&["x", "u"], &[&nodes, run.final_u.values()]),
    }
}

pub fn metadata(out: &RunOutput) -> serde_json::Value {
    let runs: Vec<_> = out
        .runs
        .iter()
        .map(|r| {
            json!({
                "scheme": r.scheme,
                "final_step": r.final_step,
                "final_t": r.final_step as f64 * out.config.dt,
                "records": r.records.len(),
                "failure": r.failure.as_ref().map(|f| json!({
                    "step": f.step,
                    "t": f.t,
                    "error": f.error.to_string(),
                })),
            })
        })
        .collect();
    let wave = match &out.reference {
        Reference::Wave(w) => json!({
            "speed": w.speed,
            "integration_constant": w.integration_constant,
            "initial_f_f1_f2": w.initial,
            "periodicity_defect": w.periodicity_defect(),
        }),
        _ => serde_json::Value::Null,
    };
    json!({
        "config": out.config,
        "steps": out.config.n_steps(),
        "reference": out.reference.kind(),
        "travelling_wave": wave,
        "solution_error_nodes": {"collective": "half", "conventional": "full"},
        "nyquist_defined": out.config.n % 2 == 0,
        "H_hat_normalisation": "dx times the discrete Hamiltonian for the collective scheme",
        "runs": runs,
    })
}

pub fn gnuplot_script(out: &RunOutput, csv_name: &str) -> String {
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\n");
    let panels = [
        ("H_rel_err", 6, false),
        ("casimir_rel_err", 7, false),
        ("nyquist_amp", 9, true),
    ];
    for (name, col, log) in panels {
        let _ = writeln!(s, "set title '{name}'");
        let _ = writeln!(s, "{}", if log { "set logscale y" } else { "unset logscale y" });
        let plots: Vec<String> = out
            .runs
            .iter()
            .map(|r| {
                let n = r.scheme.name();
                format!("'{csv_name}' using 3:(strcol(1) eq '{n}' ? ${col} : NaN) with lines title '{n}'")
            })
            .collect();
        let _ = writeln!(s, "plot {}\npause -1", plots.join(", "));
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub diagnostics: PathBuf,
    pub final_fields: Vec<PathBuf>,
    pub metadata: PathBuf,
    pub plot: Option<PathBuf>,
}

/// Writes `diagnostics.csv`, `final_<scheme>.csv`, `meta.json` and
/// optionally `plot.gp` into `dir`.
pub fn write_run(out: &RunOutput, dir: &Path, emit_plots: bool) -> Result<OutputFiles> {
    fs::create_dir_all(dir)?;
    let diagnostics = dir.join("diagnostics.csv");
    fs::write(&diagnostics, diagnostics_csv(out))?;
    let mut final_fields = Vec::new();
    for run in &out.runs {
        let path = dir.join(format!("final_{}.csv", run.scheme.name()));
        fs::write(&path, final_fields_csv(run, out))?;
        final_fields.push(path);
    }
    let metadata_path = dir.join("meta.json");
    fs::write(
        &metadata_path,
        serde_json::to_string_pretty(&metadata(out)).expect("metadata serialises"),
    )?;
    let plot = if emit_plots {
        let p = dir.join("plot.gp");
        fs::write(&p, gnuplot_script(out, "diagnostics.csv"))?;
        Some(p)
    } else {
        None
    };
    Ok(OutputFiles {
        diagnostics,
        final_fields,
        metadata: metadata_path,
        plot,
    })
}

pub fn convergence_csv(table: &ConvergenceTable) -> String {
    let mut s = String::from("scheme,N,dx,casimir_err,H_err,solution_err,observed_order\n");
    for r in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.scheme.name(),
            r.n,
            fmt_f64(r.dx),
            fmt_f64(r.casimir_err),
            fmt_f64(r.h_err),
            fmt_f64(r.solution_err),
            fmt_opt(r.observed_order)
        );
    }
    s
}

/// Writes `convergence.csv` into `dir`.
pub fn write_convergence(table: &ConvergenceTable, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("convergence.csv");
    fs::write(&path, convergence_csv(table))?;
    Ok(path)
}

/// Parses a field column written by [`final_fields_csv`].
pub fn read_column(csv: &str, name: &str) -> Option<Vec<f64>> {
    let mut lines = csv.lines();
    let idx = lines.next()?.split(',').position(|h| h == name)?;
    lines
        .map(|l| l.split(',').nth(idx).and_then(|v| v.parse().ok()))
        .collect()
}
