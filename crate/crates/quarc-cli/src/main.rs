use clap::{Parser, Subcommand};
use quarc_cli::commands;
use quarc_cli::config::{resolve, Overrides};
use quarc_cli::error::Result;
use std::path::PathBuf;

/// Train and analyze small quantum-circuit classifiers.
///
/// Exit codes: 0 success, 2 configuration error, 3 data error,
/// 4 numeric failure.
#[derive(Parser)]
#[command(name = "quarc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat key=value configuration file (a resolved.cfg snapshot replays).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory holding the dataset CSV snapshots.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,

    /// Output directory for artifacts (default: quarc-out/<command>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed; every random stream derives from it by name.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel workloads (0 = one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Shots per expectation estimate (0 = exact expectations).
    #[arg(long, global = true)]
    shots: Option<u64>,

    /// Circuit architecture id (e.g. simple-a, mnist-c).
    #[arg(long, global = true)]
    arch: Option<String>,

    /// Dataset: parity, cancer, wines, or mnist.
    #[arg(long, global = true)]
    dataset: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train on split 0 and write history, metrics, and a checkpoint.
    Train,
    /// Evaluate a checkpoint on its full dataset.
    Eval { checkpoint: PathBuf },
    /// Mean test accuracy over independent stratified splits.
    Crossval,
    /// Cost surface on a random 2-plane around a trained optimum.
    Landscape,
    /// Harmonic fit of the readout against each circuit angle.
    Scan,
    /// Retrain across the entangler (theta, phi) grid.
    Sweep,
    /// Train every cataloged image architecture and tabulate.
    ArchCompare,
    /// Project training wall time on shot-based hardware.
    EstimateTime,
    /// Emit the n-bit parity dataset as CSV.
    GenParity { bits: Option<usize> },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Train => "train",
            Command::Eval { .. } => "eval",
            Command::Crossval => "crossval",
            Command::Landscape => "landscape",
            Command::Scan => "scan",
            Command::Sweep => "sweep",
            Command::ArchCompare => "arch-compare",
            Command::EstimateTime => "estimate-time",
            Command::GenParity { .. } => "gen-parity",
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let flags = Overrides {
        config: cli.config,
        data_dir: cli.data_dir,
        seed: cli.seed,
        threads: cli.threads,
        shots: cli.shots,
        arch: cli.arch,
        dataset: cli.dataset,
    };
    let mut cfg = resolve(cli.command.name(), &flags)?;
    match &cli.command {
        Command::Eval { checkpoint } => cfg.checkpoint = checkpoint.display().to_string(),
        Command::GenParity { bits: Some(b) } => cfg.parity_bits = *b,
        _ => {}
    }
    if cfg.threads > 0 {
        // A later invocation in the same process cannot resize the pool;
        // ignore the error so tests may call run() repeatedly.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    let out = cli
        .out
        .unwrap_or_else(|| PathBuf::from("quarc-out").join(cli.command.name()));

    match cli.command {
        Command::Train => commands::cmd_train(&cfg, &out),
        Command::Eval { .. } => commands::cmd_eval(&cfg, &out),
        Command::Crossval => commands::cmd_crossval(&cfg, &out),
        Command::Landscape => commands::cmd_landscape(&cfg, &out),
        Command::Scan => commands::cmd_scan(&cfg, &out),
        Command::Sweep => commands::cmd_sweep(&cfg, &out),
        Command::ArchCompare => commands::cmd_arch_compare(&cfg, &out),
        Command::EstimateTime => commands::cmd_estimate_time(&cfg, &out),
        Command::GenParity { .. } => commands::cmd_gen_parity(&cfg, &out),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
