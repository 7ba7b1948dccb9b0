use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pinch_ee::benchmarks::DEFAULT_EXHAUSTIVE_CAP;
use pinch_ee::experiment::{
    convergence_to_csv, convergence_to_json, generate_scenario, results_to_csv, results_to_json, run_convergence,
    run_scheme, run_sweep, write_convergence, write_results, OutputFormat, SweepSpec,
};
use pinch_ee::validation::{run_all, ValidationOptions};
use pinch_ee::{ConfigFile, Error, SchemeId};

const EXIT_CONFIG: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "pinch-ee",
    version,
    about = "Energy-efficient pinching-antenna NOMA downlink optimizer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Solves one seeded scenario and prints the outcome of each scheme as JSON.
    Run {
        #[command(flatten)]
        common: Common,
        /// Comma-separated scheme names.
        #[arg(long, value_delimiter = ',', default_value = "proposed")]
        schemes: Vec<SchemeId>,
        #[arg(long)]
        exhaustive_cap: Option<usize>,
    },
    /// Monte-Carlo sweep described by the config file.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<SchemeId>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        exhaustive_cap: Option<usize>,
    },
    /// Utility after every accepted move of one matching run.
    Convergence {
        #[command(flatten)]
        common: Common,
    },
    /// Runs the end-to-end validation suites.
    Validate {
        #[arg(long)]
        seed: Option<u64>,
        /// Scales every suite down for a quick smoke run.
        #[arg(long)]
        quick: bool,
    },
}

fn load(common: &Common) -> Result<ConfigFile, Error> {
    let mut file = match &common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(seed) = common.seed {
        file.seed = Some(seed);
    }
    Ok(file)
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(command: Command) -> Result<bool, Error> {
    match command {
        Command::Run {
            common,
            schemes,
            exhaustive_cap,
        } => {
            let config = load(&common)?.scenario()?;
            let cap = exhaustive_cap.unwrap_or(DEFAULT_EXHAUSTIVE_CAP);
            let scenario = generate_scenario(&config, config.seed)?;
            let mut out = serde_json::Map::new();
            for &scheme in &schemes {
                let outcome = match run_scheme(scheme, &config, config.seed, &scenario, cap) {
                    Ok(r) => serde_json::to_value(&r.outcome).expect("outcome serializes"),
                    Err(Error::InitializationInfeasible) => serde_json::Value::Null,
                    Err(e) => return Err(e),
                };
                out.insert(scheme.to_string(), outcome);
            }
            // a lone scheme prints its outcome bare
            let value = match (schemes.len(), out.values().next()) {
                (1, Some(v)) => v.clone(),
                _ => serde_json::Value::Object(out),
            };
            let text = serde_json::to_string_pretty(&value).expect("outcome serializes") + "\n";
            emit(&text, &common.out)?;
            Ok(true)
        }
        Command::Sweep {
            common,
            schemes,
            trials,
            exhaustive_cap,
        } => {
            let file = load(&common)?;
            let mut spec = SweepSpec::from_config_file(&file)?;
            if let Some(s) = schemes {
                spec.schemes = s;
            }
            if let Some(t) = trials {
                spec.num_trials = t;
            }
            if let Some(cap) = exhaustive_cap {
                spec.exhaustive_cap = cap;
            }
            let records = run_sweep(&spec)?;
            match &common.out {
                Some(path) => write_results(&records, path, common.format)?,
                None => emit(
                    &match common.format {
                        OutputFormat::Csv => results_to_csv(&records),
                        OutputFormat::Json => results_to_json(&records),
                    },
                    &None,
                )?,
            }
            Ok(true)
        }
        Command::Convergence { common } => {
            let config = load(&common)?.scenario()?;
            let records = run_convergence(&config, config.seed)?;
            match &common.out {
                Some(path) => write_convergence(&records, path, common.format)?,
                None => emit(
                    &match common.format {
                        OutputFormat::Csv => convergence_to_csv(&records),
                        OutputFormat::Json => convergence_to_json(&records),
                    },
                    &None,
                )?,
            }
            Ok(true)
        }
        Command::Validate { seed, quick } => {
            let mut opts = if quick {
                ValidationOptions {
                    inner_scenarios: 20,
                    exhaustive_scenarios: 10,
                    ascent_runs: 20,
                    trend_trials: 10,
                    identity_draws: 500,
                    ..ValidationOptions::default()
                }
            } else {
                ValidationOptions::default()
            };
            if let Some(s) = seed {
                opts.seed = s;
            }
            let reports = run_all(&opts, |r| println!("{r}"))?;
            Ok(reports.iter().all(|r| r.passed))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VALIDATION),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { EXIT_CONFIG } else { EXIT_IO })
        }
    }
}
