use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qbeat_core::analysis::{beat_analysis, CorrelationTrace, COL_C, COL_D};
use qbeat_core::scenario::{figure_preset, run_scenario, run_scenarios, write_trace_atomic, ScenarioConfig};
use qbeat_core::validation::validate;
use qbeat_core::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Two qubits in local Lorentzian reservoirs: correlation dynamics, beats and protection.
#[derive(Debug, Parser)]
#[command(name = "qbeat", version)]
struct Cli {
    /// Directory for CSV output.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Override the number of time samples.
    #[arg(long, global = true, value_name = "N")]
    steps: Option<usize>,

    /// Override the end of the time window (units of 1/gamma0).
    #[arg(long, global = true, value_name = "T")]
    tmax: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario from a config file and write its CSV.
    Evolve { config: PathBuf },
    /// Run a figure preset (1 to 5), one CSV per curve.
    Figure { id: u32 },
    /// Run the oracle suite; exits with status 2 on any failure.
    Validate,
    /// Run a scenario and print the beat analysis of one column.
    Beat {
        config: PathBuf,
        /// Column to analyse (defaults to C, or D if C is absent).
        #[arg(long)]
        column: Option<String>,
    },
}

enum Failure {
    Usage(String),
    Validation,
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Cli {
    fn apply_overrides(&self, cfg: &mut ScenarioConfig) {
        if let Some(n) = self.steps {
            cfg.n_steps = n;
        }
        if let Some(t) = self.tmax {
            cfg.t_max = t;
        }
    }

    fn load(&self, path: &Path) -> Result<ScenarioConfig, Failure> {
        let mut cfg = ScenarioConfig::read(path)?;
        self.apply_overrides(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

fn write(dir: &Path, cfg: &ScenarioConfig, trace: &CorrelationTrace) -> Result<(), Failure> {
    let path = write_trace_atomic(dir, &cfg.name, trace)?;
    println!("{}", path.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Evolve { config } => {
            let cfg = cli.load(config)?;
            let trace = run_scenario(&cfg)?;
            write(&cli.out_dir(), &cfg, &trace)
        }
        Command::Figure { id } => {
            let mut configs = figure_preset(*id).map_err(|e| Failure::Usage(e.to_string()))?;
            for cfg in &mut configs {
                cli.apply_overrides(cfg);
                cfg.validate()?;
            }
            let dir = cli.out_dir();
            let mut first_error = None;
            for (cfg, result) in configs.iter().zip(run_scenarios(&configs)) {
                match result {
                    Ok(trace) => write(&dir, cfg, &trace)?,
                    Err(e) => {
                        eprintln!("error: {e}");
                        first_error.get_or_insert(e);
                    }
                }
            }
            first_error.map_or(Ok(()), |e| Err(Failure::Core(e)))
        }
        Command::Validate => {
            let report = validate();
            print!("{report}");
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Validation)
            }
        }
        Command::Beat { config, column } => {
            let cfg = cli.load(config)?;
            let mut trace = run_scenario(&cfg)?;
            let column = match column {
                Some(c) => c.clone(),
                None if trace.column(COL_C).is_some() => COL_C.to_string(),
                None => COL_D.to_string(),
            };
            if trace.column(&column).is_none() {
                return Err(Failure::Usage(format!("scenario has no column {column}")));
            }
            let report = beat_analysis(&trace, &column, &cfg.beat).map_err(|e| e.in_scenario(&cfg.name))?;
            println!("# beat.column = {column}");
            print!("{report}");
            if cli.out.is_some() {
                trace.set_meta("beat.column", &column);
                for (k, v) in report.to_meta() {
                    trace.set_meta(k, v);
                }
                write(&cli.out_dir(), &cfg, &trace)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Validation) => ExitCode::from(EXIT_VALIDATION),
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE })
        }
    }
}
