//! `gsmlab`: build tables, simulate captures and run the attack on them.
//!
//! Every command prints JSON lines on stdout, each with a `schema` field.
//! Exit status: 0 success, 2 key not recovered, 3 corrupt input, 4
//! configuration error, 1 anything else.

mod bench;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "gsmlab",
    version,
    about = "Passive GSM eavesdropping laboratory"
)]
struct Cli {
    /// Worker threads for table building and cracking (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
pub struct ConfigArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one configuration key, `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Args, Clone)]
pub struct TableDirArg {
    /// Directory of table files.
    #[arg(long, env = "GTL_TABLE_DIR")]
    pub tables_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the table set described by the configuration.
    GenTables {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory (default: $GTL_TABLE_DIR).
        #[arg(long, env = "GTL_TABLE_DIR")]
        out_dir: Option<PathBuf>,
        /// Overrides `table_seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Describe a table set and measure its coverage.
    TableStats {
        #[command(flatten)]
        tables: TableDirArg,
        /// Monte-Carlo trials; 0 skips the measurement.
        #[arg(long, default_value_t = 2000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also count covered states exhaustively (small domains only).
        #[arg(long)]
        exact: bool,
    },
    /// Simulate one session and write its capture.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Capture file to write.
        #[arg(long)]
        out: PathBuf,
        /// Overrides `seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Do not write the ground-truth sidecar.
        #[arg(long)]
        no_truth: bool,
    },
    /// Show the known plaintext and keystream samples a capture yields.
    Extract {
        #[arg(long)]
        capture: PathBuf,
        /// Also print every sample.
        #[arg(long)]
        samples: bool,
    },
    /// Run the full attack on a capture.
    Crack {
        #[arg(long)]
        capture: PathBuf,
        #[command(flatten)]
        tables: TableDirArg,
        #[command(flatten)]
        budget: BudgetArgs,
        /// For sessions under a cipher without tables, replay the recorded
        /// challenge and crack the re-run instead.
        #[arg(long)]
        replay: bool,
        /// Subscriber and cell settings for the replay.
        #[command(flatten)]
        config: ConfigArgs,
        /// Seed of the replayed session.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Dehop and decipher a capture with a known key.
    Decrypt {
        #[arg(long)]
        capture: PathBuf,
        /// Session key in hex.
        #[arg(long)]
        key: String,
    },
    /// Recover a strong-cipher session through a challenge replay.
    ReplayDemo {
        #[arg(long)]
        capture: PathBuf,
        #[command(flatten)]
        tables: TableDirArg,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Measure kernel throughput on this host.
    Bench {
        /// Minimum wall time per kernel, in seconds.
        #[arg(long, default_value_t = 1.0)]
        min_seconds: f64,
    },
}

#[derive(Args, Clone, Copy)]
pub struct BudgetArgs {
    /// Try at most this many samples, in capture order.
    #[arg(long)]
    pub max_samples: Option<usize>,
    /// Backward-search node budget per candidate state.
    #[arg(long, default_value_t = gsmlab::a51::DEFAULT_NODE_BUDGET)]
    pub node_budget: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Corrupt(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 4,
            CliError::Corrupt(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

/// What a successful command reports through its exit status.
pub enum Status {
    Done,
    NotRecovered,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(4);
        }
    }
    let result = match cli.command {
        Command::GenTables {
            config,
            out_dir,
            seed,
        } => commands::gen_tables(&config, out_dir, seed),
        Command::TableStats {
            tables,
            trials,
            seed,
            exact,
        } => commands::table_stats(&tables, trials, seed, exact),
        Command::Simulate {
            config,
            out,
            seed,
            no_truth,
        } => commands::simulate(&config, &out, seed, no_truth),
        Command::Extract { capture, samples } => commands::extract(&capture, samples),
        Command::Crack {
            capture,
            tables,
            budget,
            replay,
            config,
            seed,
        } => commands::crack(&capture, &tables, budget, replay, &config, seed),
        Command::Decrypt { capture, key } => commands::decrypt(&capture, &key),
        Command::ReplayDemo {
            capture,
            tables,
            budget,
            config,
            seed,
        } => commands::replay_demo(&capture, &tables, budget, &config, seed),
        Command::Bench { min_seconds } => bench::run(min_seconds),
    };
    match result {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::NotRecovered) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
