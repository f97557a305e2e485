//! `satqkd`: command-line tools for satellite QKD link analysis.
//!
//! Every subcommand reads one scenario configuration, writes its artifacts
//! into `--out`, and is bit-for-bit reproducible from the
//! `resolved_config.ini` it leaves behind. Exit codes: 0 on success, 1 when
//! a computation fails a quantitative gate, 2 for usage, configuration or
//! I/O errors.

mod commands;
mod error;
mod report;

use clap::{Args, Parser, Subcommand};
use error::CliError;
use satqkd_core::config::ScenarioConfig;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "satqkd", version, about = "Satellite QKD link analysis tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario configuration file.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Override the configured random seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the link-budget model against the built-in reference scenarios.
    Table1 {
        /// Optional scenario file; the reference table itself is built in.
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Output directory, created if missing.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Override the configured random seed.
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
    },
    /// Sweep detector-limited QBER across loss and temperature grids.
    QberSweep(CommonArgs),
    /// Sweep secure-key and classical-overhead rates across a loss grid.
    KeyrateSweep(CommonArgs),
    /// Simulate link, QBER and key yield over one orbital pass.
    PassSim(CommonArgs),
    /// Run a photon-level Monte Carlo of one protocol session.
    ProtocolMc {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write the final sifted keys (keys_a.txt, keys_b.txt).
        #[arg(long)]
        dump_keys: bool,
    },
    /// Demonstrate the trusted-node XOR relay between two ground stations.
    RelayDemo(CommonArgs),
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::io(&format!("reading {}", p.display()), e))?;
            ScenarioConfig::parse(&text)?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.set("run", "seed", &seed.to_string())?;
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Table1 { config, out, seed } => {
            let mut cfg = load_config(config.as_deref(), seed)?;
            commands::table1::run(&mut cfg, &out)
        }
        Command::QberSweep(a) => {
            let mut cfg = load_config(Some(&a.config), a.seed)?;
            commands::qber_sweep::run(&mut cfg, &a.out)
        }
        Command::KeyrateSweep(a) => {
            let mut cfg = load_config(Some(&a.config), a.seed)?;
            commands::keyrate_sweep::run(&mut cfg, &a.out)
        }
        Command::PassSim(a) => {
            let mut cfg = load_config(Some(&a.config), a.seed)?;
            commands::pass_sim::run(&mut cfg, &a.out)
        }
        Command::ProtocolMc { common, dump_keys } => {
            let mut cfg = load_config(Some(&common.config), common.seed)?;
            commands::protocol_mc::run(&mut cfg, &common.out, dump_keys)
        }
        Command::RelayDemo(a) => {
            let mut cfg = load_config(Some(&a.config), a.seed)?;
            commands::relay_demo::run(&mut cfg, &a.out)
        }
    }
}

fn main() -> ExitCode {
    // clap itself exits with code 2 on usage errors and 0 for --help.
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
