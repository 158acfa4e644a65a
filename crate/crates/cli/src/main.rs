//! Command-line front end: run outage experiments, summarize CSV results and
//! run the built-in self-checks.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fdrelay::experiment::{emit_report, parse_entries, run_experiment, CurveSet, ExperimentConfig};
use fdrelay::Error;

#[derive(Parser)]
#[command(
    name = "fdrelay",
    version,
    about = "Outage experiments for an energy-harvesting full-duplex relay"
)]
struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a key = value config file.
    Run {
        config: PathBuf,
        /// Override a config entry, e.g. `--set trials=100000`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// CSV destination; overrides `output` in the config. `-` for stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print the dB-gain report after the run.
        #[arg(long)]
        report: bool,
    },
    /// Print dB gains between schemes from a CSV produced by `run`.
    Report { csv: PathBuf },
    /// Run the built-in consistency checks.
    Validate {
        /// Multiplier on the default sample sizes.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::InvalidParams(_) | Error::Io(_) => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Config(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run {
            config,
            overrides,
            output,
            report,
        } => run(&config, &overrides, output, report),
        Command::Report { csv } => {
            let file = File::open(&csv).map_err(|e| io_failure(&csv, e))?;
            let set = CurveSet::read_csv(file)?;
            if set.points.is_empty() {
                return Err(Failure::Config(format!("{}: no data rows", csv.display())));
            }
            print!("{}", emit_report(&set));
            Ok(())
        }
        Command::Validate { scale, seed } => {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Failure::Config(format!(
                    "scale must be positive, got {scale}"
                )));
            }
            let results = fdrelay::validate::run_all(scale, seed);
            for c in &results {
                println!(
                    "{}: {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            match results.iter().filter(|c| !c.passed).count() {
                0 => Ok(()),
                n => Err(Failure::Numerical(format!("{n} check(s) failed"))),
            }
        }
    }
}

fn run(
    config: &Path,
    overrides: &[String],
    output: Option<PathBuf>,
    report: bool,
) -> Result<(), Failure> {
    let text = std::fs::read_to_string(config).map_err(|e| io_failure(config, e))?;
    let mut entries: BTreeMap<String, String> = parse_entries(&text)?;
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("--set expects KEY=VALUE, got `{o}`")))?;
        entries.insert(k.trim().to_string(), v.trim().to_string());
    }
    let mut cfg = ExperimentConfig::from_entries(&entries)?;
    if output.is_some() {
        cfg.output_path = output;
    }
    log::info!(
        "{} sweep over {} points, {} trials each",
        cfg.sweep,
        cfg.sweep_points.len(),
        cfg.trials
    );
    let set = run_experiment(&cfg)?;

    match cfg.output_path.as_deref() {
        Some(path) if path != Path::new("-") => {
            let file = File::create(path).map_err(|e| io_failure(path, e))?;
            set.write_csv(BufWriter::new(file))?;
            log::info!("wrote {}", path.display());
        }
        _ => set.write_csv(io::stdout().lock())?,
    }
    if report {
        let mut err = io::stderr().lock();
        let _ = write!(err, "{}", emit_report(&set));
    }
    Ok(())
}
