//! spinekit command line: build and cache exact tables, run identity-check
//! suites, emit correlation curves and benchmark the wedge strategies.
//!
//! Exit codes: 0 success, 1 check failure or runtime error, 2 usage error,
//! 3 budget exceeded, 4 corrupted cache.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spinekit::Error;

mod bench;
mod checks;
mod curve;
mod tables;

#[derive(Parser)]
#[command(
    name = "spinekit",
    version,
    about = "Exact engine for beta = L^2 log-gas ensembles"
)]
struct Cli {
    /// Worker threads (defaults to available parallelism). Results are
    /// exact and independent of the thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize the momentum-sector basis of one configuration.
    Spine {
        #[arg(long = "L")]
        charge: u32,
        #[arg(long = "M")]
        particles: u32,
        /// Write the JSON summary here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Compute and cache an exact table (idempotent per digest).
    Tables {
        #[arg(long = "L")]
        charge: u32,
        #[arg(long = "M")]
        particles: u32,
        #[arg(long, value_enum)]
        kind: TableKind,
        /// Cache directory; defaults to $SPINEKIT_CACHE_DIR or ./spinekit-cache.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Emit the normalized circular two-point curve as CSV.
    Curve {
        #[arg(long = "L")]
        charge: u32,
        #[arg(long = "M")]
        particles: u32,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
        /// Allow the float path for stretch configurations (L = 6).
        #[arg(long)]
        stretch_float: bool,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Run an identity-check suite and report pass/fail.
    Check {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Benchmark the wedge-power strategies on one configuration.
    Bench {
        #[arg(long = "L")]
        charge: u32,
        #[arg(long = "M")]
        particles: u32,
        /// Comma-separated subset of naive,pruned,squaring.
        #[arg(long, default_value = "naive,pruned,squaring", value_delimiter = ',')]
        strategies: Vec<BenchStrategy>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the report here (stdout otherwise).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
        format: ReportFormat,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    Tau,
    Pair,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Vandermonde,
    Plucker,
    Hirota,
    Routes,
    Oracle,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Debug)]
pub enum BenchStrategy {
    Naive,
    Pruned,
    Squaring,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
}

pub fn cache_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("SPINEKIT_CACHE_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("spinekit-cache"))
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::BudgetExceeded { .. }) => 3,
        Some(Error::CacheInvalid(_)) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("threads: {e}");
            return ExitCode::from(2);
        }
    }

    let outcome = match cli.command {
        Command::Spine {
            charge,
            particles,
            json,
        } => run_spine(charge, particles, json),
        Command::Tables {
            charge,
            particles,
            kind,
            cache_dir: dir,
        } => tables::run(charge, particles, kind, cache_dir(dir)),
        Command::Curve {
            charge,
            particles,
            grid,
            out,
            stretch_float,
            cache_dir: dir,
        } => curve::run(charge, particles, grid, &out, stretch_float, cache_dir(dir)),
        Command::Check { suite, seed, json } => {
            return match checks::run(suite, seed, json) {
                Ok(all_pass) => {
                    if all_pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code_for(&e))
                }
            };
        }
        Command::Bench {
            charge,
            particles,
            strategies,
            seed,
            out,
            format,
        } => bench::run(charge, particles, &strategies, seed, out, format),
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn run_spine(charge: u32, particles: u32, json: Option<PathBuf>) -> anyhow::Result<()> {
    let ctx = spinekit::SpineContext::new(charge, particles)?;
    let basis = spinekit::spine::build_spine(&ctx, &spinekit::Budget::default())?;
    let summary = spinekit::spine::spine_summary(&basis);
    let text = serde_json::to_string_pretty(&summary)?;
    match json {
        Some(path) => std::fs::write(&path, text)?,
        None => {
            println!(
                "L={} M={}: {} blades across {} momentum sectors (|p| <= {})",
                charge,
                particles,
                summary.blade_count,
                summary.sector_count,
                summary.momentum_range.1
            );
            println!("{text}");
        }
    }
    Ok(())
}
