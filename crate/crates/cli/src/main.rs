use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use synthmia::{ErrorClass, Result};

mod commands;
mod manifest;

#[derive(Parser)]
#[command(
    name = "synthmia",
    version,
    about = "Membership-inference auditing for synthetic tabular data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the bundled demo table and its schema declaration
    Demo {
        /// Number of records
        #[arg(long, default_value_t = 20_000)]
        records: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for demo.csv and demo.schema.json
        #[arg(long)]
        out: PathBuf,
    },
    /// Ingest a CSV, quantile-bin continuous attributes, write a cache
    Prepare {
        #[arg(long)]
        csv: PathBuf,
        /// Schema declaration JSON
        #[arg(long)]
        schema: PathBuf,
        /// Quantile bins for continuous attributes
        #[arg(long, default_value_t = 20)]
        bins: usize,
        /// Cache directory to create
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank records by nearest-neighbour vulnerability score
    Vulnerable {
        /// Cache directory from `prepare`
        #[arg(long)]
        cache: PathBuf,
        /// Neighbours per score
        #[arg(short, long, default_value_t = 5)]
        k: usize,
        /// Rows to keep in the ranking
        #[arg(long, default_value_t = 10)]
        top_n: usize,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the attack experiment described by a manifest
    Attack {
        #[arg(long)]
        manifest: PathBuf,
        /// Override the manifest's output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cap worker threads; 0 keeps the rayon default
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Validate the manifest and print the derived seed plan, run nothing
        #[arg(long)]
        dry_run: bool,
        /// Continue a previous run from its prediction logs
        #[arg(long)]
        resume: bool,
    },
    /// Repeat a black-box attack across shadow-pool sizes
    Sweep {
        #[arg(long)]
        manifest: PathBuf,
        /// Pool sizes to run, e.g. --m 5000 --m 20000
        #[arg(long = "m", required = true)]
        m_values: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        resume: bool,
    },
    /// Rebuild summary tables from finished run directories
    Report {
        /// Run directories (each holds config.json and predictions.csv)
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Directory for summary.md and summary.csv
        #[arg(long)]
        out: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Demo { records, seed, out } => commands::demo(records, seed, &out),
        Command::Prepare {
            csv,
            schema,
            bins,
            out,
        } => commands::prepare(&csv, &schema, bins, &out),
        Command::Vulnerable {
            cache,
            k,
            top_n,
            out,
        } => commands::vulnerable(&cache, k, top_n, &out),
        Command::Attack {
            manifest,
            out,
            workers,
            dry_run,
            resume,
        } => commands::attack(&manifest, out.as_deref(), workers, dry_run, resume),
        Command::Sweep {
            manifest,
            m_values,
            out,
            workers,
            resume,
        } => commands::sweep(&manifest, &m_values, out.as_deref(), workers, resume),
        Command::Report { dirs, out } => commands::report(&dirs, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e.class() {
                ErrorClass::Config => ExitCode::from(2),
                ErrorClass::Data => ExitCode::from(3),
                ErrorClass::Runtime => ExitCode::from(4),
            }
        }
    }
}
