use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dsm_core::bench::{self, BenchError, RunConfig};

/// Regularized Newton flow solvers and benchmark driver.
#[derive(Debug, Parser)]
#[command(name = "dsm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one config; writes the trace CSV and the JSON report.
    Run { config: PathBuf },
    /// Noisy runs over several noise levels; writes a CSV of final errors.
    SweepNoise {
        config: PathBuf,
        /// Comma-separated noise levels.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        deltas: Vec<f64>,
        /// Output path for the sweep CSV; defaults to stdout.
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Run the lemma verifiers and print the JSON report.
    VerifyLemmas,
    /// List the benchmark problems.
    ListProblems,
    /// Print the default config with every key.
    PrintDefaults,
}

fn fail(e: BenchError) -> ExitCode {
    eprintln!("dsm: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command {
        Command::Run { config } => {
            let report = RunConfig::from_path(&config).and_then(|cfg| bench::run(&cfg));
            match report {
                Ok(report) => {
                    println!("{}", report.summary);
                    ExitCode::from(report.exit_code() as u8)
                }
                Err(e) => fail(e),
            }
        }
        Command::SweepNoise { config, deltas, out } => {
            let sweep = RunConfig::from_path(&config).and_then(|cfg| bench::sweep_noise(&cfg, &deltas));
            match sweep {
                Ok(sweep) => {
                    let csv = sweep.to_csv_string();
                    if out == "-" {
                        print!("{csv}");
                    } else if let Err(source) = std::fs::write(&out, csv) {
                        return fail(BenchError::Io { path: out, source });
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::VerifyLemmas => {
            let report = bench::verify_lemmas();
            println!("{}", report.to_json());
            if report.expectations_met {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::ListProblems => match bench::list_problems() {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::PrintDefaults => {
            print!("{}", RunConfig::defaults_toml());
            ExitCode::SUCCESS
        }
    }
}
