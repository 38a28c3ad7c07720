//! `planarmatch`: solvers, oracle checks and Monte Carlo experiments for
//! extremal planar matchings of bipartite graphs.
//!
//! Exit codes: 0 success, 1 internal error (including any deterministic
//! bound violation), 2 invalid input or configuration.

mod config;
mod experiment;
mod oracle_check;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use planarmatch::{min_weight_planar, BipartiteInstance, Error, PlanarMatching};

use config::ExperimentConfig;
use experiment::run_experiment;
use oracle_check::run_oracle_check;

#[derive(Parser)]
#[command(name = "planarmatch", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance exactly.
    Solve {
        #[command(subcommand)]
        task: SolveTask,
    },
    /// Compare the fast solvers against the exhaustive oracles.
    OracleCheck {
        /// Largest instance size to sweep (at most 8).
        #[arg(long = "n-max")]
        n_max: usize,
        /// Random instances per size where the sweep is not exhaustive.
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Master seed for the random instances.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a configured Monte Carlo experiment.
    Experiment {
        /// JSON experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for tables, reports and the manifest.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores; falls back to the
        /// PLANARMATCH_THREADS environment variable). Results do not
        /// depend on this setting.
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Subcommand)]
enum SolveTask {
    /// Maximum size of a length-constrained planar matching on a states
    /// instance.
    MaxSize {
        #[command(flatten)]
        io: SolveIo,
        /// Edge-length cap.
        #[arg(long = "L")]
        length_cap: usize,
    },
    /// Minimum weight of a planar matching with at least `tau` edges on a
    /// weights instance.
    MinWeight {
        #[command(flatten)]
        io: SolveIo,
        /// Minimum number of matching edges.
        #[arg(long)]
        tau: usize,
    },
}

#[derive(Args)]
struct SolveIo {
    /// Instance CSV (see the file-format notes in the README).
    #[arg(long)]
    input: PathBuf,
    /// Write the optimal matching as `k,i,j` CSV lines.
    #[arg(long)]
    witness: Option<PathBuf>,
}

fn write_witness(path: &PathBuf, witness: &PlanarMatching) -> Result<(), Error> {
    std::fs::write(path, witness.to_witness_csv())?;
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Solve { task } => match task {
            SolveTask::MaxSize { io, length_cap } => {
                let inst = BipartiteInstance::read_csv_path(&io.input)?;
                let res = planarmatch::max_size_planar(&inst, length_cap)?;
                println!("{}", res.size);
                if let Some(path) = &io.witness {
                    write_witness(path, &res.witness)?;
                }
                Ok(0)
            }
            SolveTask::MinWeight { io, tau } => {
                let inst = BipartiteInstance::read_csv_path(&io.input)?;
                let res = min_weight_planar(&inst, tau)?;
                println!("{}", res.weight);
                if let Some(path) = &io.witness {
                    write_witness(path, &res.witness)?;
                }
                Ok(0)
            }
        },
        Command::OracleCheck { n_max, trials, seed } => {
            let outcome = run_oracle_check(n_max, trials, seed)?;
            println!(
                "oracle-check: {} comparisons, {} mismatches",
                outcome.comparisons, outcome.mismatches
            );
            Ok(if outcome.mismatches == 0 { 0 } else { 1 })
        }
        Command::Experiment { config, out, threads } => {
            let config = ExperimentConfig::from_path(&config)?;
            let threads = threads.or_else(|| {
                std::env::var("PLANARMATCH_THREADS").ok().and_then(|v| v.parse().ok())
            });
            let outcome = match threads {
                Some(t) if t > 0 => rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
                    .install(|| run_experiment(&config, &out)),
                _ => run_experiment(&config, &out),
            }?;
            if outcome.probabilistic_failures > 0 {
                println!(
                    "warning: {} probabilistic bound(s) outside their interval",
                    outcome.probabilistic_failures
                );
            }
            if outcome.skipped > 0 {
                println!("note: {} bound(s) skipped", outcome.skipped);
            }
            if outcome.deterministic_violations > 0 {
                eprintln!(
                    "error: {} deterministic (theorem-backed) bound(s) violated",
                    outcome.deterministic_violations
                );
                Ok(1)
            } else {
                Ok(0)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_user_error() { 2 } else { 1 })
        }
    }
}
