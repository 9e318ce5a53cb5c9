use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use orqc::experiment::table1::{run_table1, Table1Options};
use orqc::experiment::{emit, run_experiment, ExperimentConfig, PARALLEL_WIDTH_ENV};
use orqc::oracle::{render_report, run_all_oracles};
use orqc::{Error, Result};

/// Random-circuit density-matrix experiments.
#[derive(Parser)]
#[command(name = "orqc", version, after_help = format!("Set {PARALLEL_WIDTH_ENV} to override the worker count."))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the brute-force oracle suite.
    Sanity,
    /// Run the saturation grid for n = 4, 6, 8.
    Table1 {
        /// Directory for the per-cell series and `table1.csv`.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        realizations: usize,
        #[arg(long, default_value_t = 30)]
        steps: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Comma-separated system sizes.
        #[arg(long, value_delimiter = ',', default_values_t = [4, 6, 8])]
        sizes: Vec<usize>,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = run_experiment(&cfg)?;
            match &cfg.output {
                Some(target) => {
                    for path in emit(&out, target)? {
                        println!("wrote {}", path.display());
                    }
                }
                None => println!("{}", serde_json::to_string_pretty(&out)?),
            }
            for (name, value) in &out.manifest.saturation {
                eprintln!("saturation {name} = {value:.6}");
            }
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            println!(
                "ok: {:?} on {} {} qubits, {} realizations",
                cfg.observable,
                cfg.circuit.class.name(),
                cfg.circuit.n_system,
                cfg.realizations
            );
        }
        Command::Sanity => {
            let reports = run_all_oracles();
            print!("{}", render_report(&reports));
            let failed = reports.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(Error::Invariant(format!("{failed} oracle(s) failed")));
            }
        }
        Command::Table1 {
            out,
            realizations,
            steps,
            seed,
            sizes,
        } => {
            let opts = Table1Options {
                sizes,
                realizations,
                steps,
                master_seed: seed,
                parallel_width: None,
            };
            run_table1(&opts, &out, |e| {
                eprintln!(
                    "n = {} {:<5} {:?}: {:.4} (reference {})",
                    e.n_system,
                    e.class.name(),
                    e.observable,
                    e.saturation,
                    e.reference.map_or("-".into(), |r| r.to_string())
                );
            })?;
            println!("wrote {}", out.join("table1.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
