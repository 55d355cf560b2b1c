use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clebsch_core::harness::{
    convergence_study, run_experiment, write_convergence, write_run, ExperimentConfig,
    InitialCondition, Method, Preset,
};
use clebsch_core::Error;

const OUTPUT_DIR_ENV: &str = "CLEBSCH_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "clebsch", version, about = "Collective and conventional integrators for Burgers-type equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write diagnostics.csv, final_*.csv and meta.json.
    Run(RunArgs),
    /// Run a convergence study over several grid sizes and write convergence.csv.
    Converge {
        #[command(flatten)]
        run: RunArgs,
        /// Grid sizes, e.g. 16,32,64,128.
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
    },
    /// List the presets, or print one as a JSON config.
    Presets {
        /// Preset to print in full.
        name: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Collective,
    Conventional,
    Both,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Collective => Method::Collective,
            MethodArg::Conventional => Method::Conventional,
            MethodArg::Both => Method::Both,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Start from a preset (ignored when --config is given).
    #[arg(long, default_value = "burgers")]
    preset: String,
    /// JSON config file; the flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "L")]
    length: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// cosine_bump, periodic_bump, travelling_wave, or an expression in x and L.
    #[arg(long)]
    ic: Option<String>,
    #[arg(long)]
    observe_every: Option<usize>,
    /// Output directory; defaults to the config's output_path under $CLEBSCH_OUTPUT_DIR.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script.
    #[arg(long)]
    emit_plots: bool,
}

fn parse_ic(s: &str) -> InitialCondition {
    match s {
        "cosine_bump" => InitialCondition::CosineBump,
        "periodic_bump" => InitialCondition::PeriodicBump,
        "travelling_wave" => InitialCondition::TravellingWave,
        expr => InitialCondition::Custom(expr.to_string()),
    }
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::preset(Preset::from_name(&self.preset)?),
        };
        if let Some(m) = self.method {
            cfg.method = m.into();
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(l) = self.length {
            cfg.length = l;
        }
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        if let Some(t) = self.t_end {
            cfg.t_end = t;
        }
        if let Some(ic) = &self.ic {
            cfg.initial_condition = parse_ic(ic);
        }
        if let Some(k) = self.observe_every {
            cfg.observe_every = k;
        }
        if let Some(out) = &self.out {
            cfg.output_path = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        if self.out.is_some() {
            return cfg.output_path.clone();
        }
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(base) => Path::new(&base).join(&cfg.output_path),
            None => cfg.output_path.clone(),
        }
    }
}

fn run(args: &RunArgs) -> Result<bool, Error> {
    let cfg = args.config()?;
    let out = run_experiment(&cfg)?;
    let dir = args.out_dir(&cfg);
    let files = write_run(&out, &dir, args.emit_plots)?;
    for r in &out.runs {
        let last = r.records.last().expect("initial record");
        println!(
            "{:<12} t = {:<10} H_rel_err = {:+.3e}  casimir_rel_err = {:+.3e}{}",
            r.scheme.name(),
            last.t,
            last.h_rel_err,
            last.casimir_rel_err,
            last.solution_rel_err
                .map(|e| format!("  solution_rel_err = {e:.3e}"))
                .unwrap_or_default()
        );
        if let Some(f) = &r.failure {
            eprintln!("{}: stopped at step {} (t = {}): {}", r.scheme.name(), f.step, f.t, f.error);
        }
    }
    println!("wrote {}", files.diagnostics.display());
    Ok(!out.failed())
}

fn converge(args: &RunArgs, levels: &[usize]) -> Result<bool, Error> {
    let cfg = args.config()?;
    if levels.len() < 2 {
        return Err(Error::Config("--levels needs at least two grid sizes".into()));
    }
    let table = convergence_study(&cfg, levels)?;
    println!("reference: {}", table.reference);
    println!("{:<12} {:>6} {:>12} {:>12} {:>12} {:>8}", "scheme", "N", "H_err", "casimir_err", "solution_err", "order");
    for r in &table.rows {
        println!(
            "{:<12} {:>6} {:>12.3e} {:>12.3e} {:>12.3e} {:>8}",
            r.scheme.name(),
            r.n,
            r.h_err,
            r.casimir_err,
            r.solution_err,
            r.observed_order.map(|o| format!("{o:.3}")).unwrap_or_default()
        );
    }
    let path = write_convergence(&table, &args.out_dir(&cfg))?;
    println!("wrote {}", path.display());
    Ok(true)
}

fn presets(name: Option<&str>) -> Result<bool, Error> {
    match name {
        Some(n) => println!("{}", ExperimentConfig::preset(Preset::from_name(n)?).to_json()),
        None => {
            for p in Preset::ALL {
                let c = ExperimentConfig::preset(p);
                println!(
                    "{:<16} N = {:<3} L = {} dt = {:e} t_end = {}",
                    p.name(),
                    c.n,
                    c.length,
                    c.dt,
                    c.t_end
                );
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Converge { run, levels } => converge(run, levels),
        Command::Presets { name } => presets(name.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e @ Error::NonConvergence { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
