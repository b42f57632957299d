use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use coded_demixing::access::{Scenario, System};
use coded_demixing::harness::{find_threshold, run_trial, sweep, Axis, SimulationOracle};

#[derive(Parser)]
#[command(
    version,
    about = "Coded demixing simulations for unsourced random access"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep Eb/N0 or the number of users and write a CSV of error rates.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "ebno")]
        axis: Axis,
        /// Comma-separated axis values.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        points: Vec<f64>,
        /// Trials per point (defaults to the scenario's value).
        #[arg(long)]
        trials: Option<usize>,
        /// Master seed (defaults to the scenario's value).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Output CSV; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bisect for the Eb/N0 at which the error rate crosses a target.
    Threshold {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        target: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
        hi: f64,
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run a single trial and print its outcome.
    Trial {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit per-iteration AMP diagnostics as JSON lines.
        #[arg(long)]
        verbose: bool,
    },
}

fn run(cli: Cli) -> coded_demixing::Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            axis,
            points,
            trials,
            seed,
            threads,
            out,
        } => {
            let mut sc = Scenario::load(&config)?;
            if let Some(s) = seed {
                sc.seed = s;
            }
            let trials = trials.unwrap_or(sc.trials);
            let result = sweep(&sc, axis, &points, trials, threads)?;
            match out {
                Some(path) => result.write_csv(path)?,
                None => print!("{}", result.to_csv()),
            }
        }
        Command::Threshold {
            config,
            target,
            lo,
            hi,
            tolerance,
            trials,
            seed,
            threads,
        } => {
            let sc = Scenario::load(&config)?;
            let system = System::new(&sc)?;
            let mut oracle = SimulationOracle {
                system: &system,
                trials: trials.unwrap_or(sc.trials),
                seed: seed.unwrap_or(sc.seed),
                threads,
            };
            let result = find_threshold(&mut oracle, target, lo, hi, tolerance)?;
            println!("{}", serde_json::to_string_pretty(&result)?);
        }
        Command::Trial {
            config,
            seed,
            verbose,
        } => {
            let sc = Scenario::load(&config)?;
            let system = System::new(&sc)?;
            let outcome = run_trial(&system, seed)?;
            if verbose {
                for (run, amp) in outcome.receiver.amp_runs.iter().enumerate() {
                    for rec in &amp.records {
                        println!(
                            "{}",
                            json!({"event": "amp_iteration", "run": run, "groups": amp.groups, "record": rec})
                        );
                    }
                }
            }
            let total = outcome.total();
            println!(
                "{}",
                json!({
                    "event": "trial",
                    "seed": outcome.seed,
                    "counts": outcome.counts,
                    "pupe": total.missed as f64 / total.sent.max(1) as f64,
                    "occupancy": outcome.receiver.occupancy,
                    "true_counts": outcome.true_counts,
                    "extraction": outcome.receiver.extraction,
                    "bin_pruned": outcome.receiver.bin_pruned,
                    "diverged": outcome.diverged(),
                })
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
