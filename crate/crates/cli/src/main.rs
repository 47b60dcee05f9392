//! `riskscore`: batch front door for the risk scoring engine.
//!
//! Every numeric default lives in the config file, so a run is fully
//! described by (config, inputs, seed). All outputs are CSV/JSONL written
//! atomically (temp file + rename), sorted by identifier.

mod commands;
mod ioutil;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use riskscore::config::{load_config, EngineConfig};

/// Exit code classes: 0 success, 1 data error, 2 config error,
/// 3 model-validity error.
pub const EXIT_DATA: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_MODEL: u8 = 3;

/// Environment variable consulted when `--config` is absent.
pub const CONFIG_ENV: &str = "RISKSCORE_CONFIG";

#[derive(Parser)]
#[command(
    name = "riskscore",
    version,
    about = "Contact-event risk scoring engine"
)]
struct Cli {
    /// Config file (TOML). Falls back to $RISKSCORE_CONFIG, then defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score recipients from contact events and source reports.
    Score {
        /// Contact events, JSONL.
        #[arg(long)]
        events: PathBuf,
        /// Source reports, JSONL.
        #[arg(long)]
        reports: PathBuf,
        /// Per-recipient scores, CSV. A per-source breakdown goes to a
        /// companion `.breakdown.jsonl`.
        #[arg(long)]
        out: PathBuf,
        /// Also write the ingest journal here, ready for `decascade`.
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Apply a source's negative test to a stored journal.
    Decascade {
        /// Store journal, JSONL (rewritten with the new entry appended).
        #[arg(long)]
        store: PathBuf,
        /// Source that tested negative.
        #[arg(long)]
        source: String,
        /// Test time, minutes since epoch.
        #[arg(long)]
        test_time: i64,
        /// Outcome records, JSONL.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample the generation-minus-incubation difference and report the
    /// Gaussian fit.
    ValidateInfectiousness {
        /// Histogram CSV; the fit report goes to a companion `.fit.json`.
        #[arg(long)]
        out: PathBuf,
        /// Sample count; defaults to prob.mc_samples from the config.
        #[arg(long)]
        n: Option<usize>,
        /// Seed; defaults to prob.seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Histogram bin count.
        #[arg(long, default_value_t = 100)]
        bins: usize,
        /// Exit 3 when the KS statistic reaches this bound.
        #[arg(long, default_value_t = 0.05)]
        ks_bound: f64,
    },
    /// Emit symptom-free decay curves for a set of initial infection
    /// probabilities.
    DecayCurve {
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated initial infection probabilities in (0,1).
        #[arg(long, default_value = "0.1,0.25,0.5,0.75,0.9")]
        probs: String,
    },
    /// Emit the risk score over a distance/onset-offset/duration grid.
    RiskSurface {
        #[arg(long)]
        out: PathBuf,
        /// Distance grid, metres: `start:stop:step` or a single value.
        #[arg(long, default_value = "0.25:4:0.25")]
        distance: String,
        /// Onset-offset grid, days: `start:stop:step` or a single value.
        #[arg(long, default_value = "-7:7:0.25", allow_hyphen_values = true)]
        time_from_onset: String,
        /// Duration grid, minutes: `start:stop:step` or a single value.
        #[arg(long, default_value = "15")]
        duration: String,
    },
    /// Estimate the posterior of nu from observed outcomes.
    FitNu {
        /// Outcome records, CSV with columns rho_total, infected.
        #[arg(long)]
        outcomes: PathBuf,
        /// Posterior method.
        #[arg(long, value_parser = ["grid", "mcmc"], default_value = "grid")]
        method: String,
        /// Posterior grid CSV; diagnostics go to `.diagnostics.json` and
        /// MCMC samples to `.samples.csv`.
        #[arg(long)]
        out: PathBuf,
        /// Seed; defaults to prob.seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Grid resolution for the grid method.
        #[arg(long, default_value_t = 1024)]
        grid_size: usize,
        /// Retained MCMC samples.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Burn-in iterations; defaults to samples / 5.
        #[arg(long)]
        burn_in: Option<usize>,
        /// Random-walk step on the logit scale.
        #[arg(long, default_value_t = 0.5)]
        step: f64,
    },
    /// Generate a synthetic outcome dataset for recovery tests.
    SimulateOutcomes {
        #[arg(long)]
        true_nu: f64,
        /// Number of records.
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.5)]
        rho_low: f64,
        #[arg(long, default_value_t = 2.0)]
        rho_high: f64,
        /// Seed; defaults to prob.seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// What a command run produced.
pub struct CommandOutcome {
    pub exit_code: u8,
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
}

impl CommandOutcome {
    fn success(summary: String, artifacts: Vec<PathBuf>) -> Self {
        CommandOutcome {
            exit_code: 0,
            summary,
            artifacts,
        }
    }
}

/// A failed command: exit class plus the error lines to print.
pub struct CommandFailure {
    pub exit_code: u8,
    pub errors: Vec<String>,
}

impl CommandFailure {
    pub fn new(exit_code: u8, message: impl Into<String>) -> Self {
        CommandFailure {
            exit_code,
            errors: vec![message.into()],
        }
    }

    pub fn data(errors: Vec<String>) -> Self {
        CommandFailure {
            exit_code: EXIT_DATA,
            errors,
        }
    }
}

impl From<riskscore::Error> for CommandFailure {
    fn from(err: riskscore::Error) -> Self {
        use riskscore::Error;
        let exit_code = match &err {
            Error::Param(_) | Error::Config(_) => EXIT_CONFIG,
            Error::ModelValidity(_) | Error::Horizon(_) => EXIT_MODEL,
            _ => EXIT_DATA,
        };
        match err {
            Error::Validation { problems } => CommandFailure {
                exit_code,
                errors: problems,
            },
            other => CommandFailure {
                exit_code,
                errors: vec![other.to_string()],
            },
        }
    }
}

impl From<std::io::Error> for CommandFailure {
    fn from(err: std::io::Error) -> Self {
        CommandFailure::new(EXIT_DATA, err.to_string())
    }
}

fn resolve_config(cli_path: Option<&PathBuf>) -> Result<EngineConfig, CommandFailure> {
    let path = cli_path
        .cloned()
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    match path {
        Some(path) => load_config(&path).map_err(|e| {
            let mut failure = CommandFailure::from(e);
            failure.exit_code = EXIT_CONFIG;
            failure
        }),
        None => Ok(EngineConfig::default()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match resolve_config(cli.config.as_ref()) {
        Ok(config) => config,
        Err(failure) => return report_failure(failure),
    };

    let result = match cli.command {
        Command::Score {
            events,
            reports,
            out,
            store,
        } => commands::score(&config, &events, &reports, &out, store.as_deref()),
        Command::Decascade {
            store,
            source,
            test_time,
            out,
        } => commands::decascade(&config, &store, &source, test_time, &out),
        Command::ValidateInfectiousness {
            out,
            n,
            seed,
            bins,
            ks_bound,
        } => commands::validate_infectiousness(&config, &out, n, seed, bins, ks_bound),
        Command::DecayCurve { out, probs } => commands::decay_curve(&config, &out, &probs),
        Command::RiskSurface {
            out,
            distance,
            time_from_onset,
            duration,
        } => commands::risk_surface(&config, &out, &distance, &time_from_onset, &duration),
        Command::FitNu {
            outcomes,
            method,
            out,
            seed,
            grid_size,
            samples,
            burn_in,
            step,
        } => commands::fit_nu(
            &config, &outcomes, &method, &out, seed, grid_size, samples, burn_in, step,
        ),
        Command::SimulateOutcomes {
            true_nu,
            m,
            rho_low,
            rho_high,
            seed,
            out,
        } => commands::simulate_outcomes(&config, true_nu, m, rho_low, rho_high, seed, &out),
    };

    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for artifact in &outcome.artifacts {
                println!("wrote {}", artifact.display());
            }
            ExitCode::from(outcome.exit_code)
        }
        Err(failure) => report_failure(failure),
    }
}

fn report_failure(failure: CommandFailure) -> ExitCode {
    for line in &failure.errors {
        eprintln!("error: {line}");
    }
    ExitCode::from(failure.exit_code)
}
