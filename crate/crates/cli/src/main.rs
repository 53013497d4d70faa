//! `ris-mimo` command-line driver.

use clap::{Args, Parser, Subcommand, ValueEnum};
use ris_mimo::harness::{self, ExperimentConfig, SweepKind};
use ris_mimo::se::CodeTransfer;
use ris_mimo::{channel, Error};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ris-mimo", version, about = "RIS-assisted quantized mmWave MIMO experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML or JSON); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepMode {
    Se,
    Mc,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the scenario channel; writes the matrix CSV and a JSON metadata sidecar.
    SynthChannel(Common),
    /// Build the code-transfer table by Monte-Carlo BCJR runs.
    CharacterizeCode(Common),
    /// Descent and ascent SE curves over the SNR grid.
    Se(Common),
    /// Monte-Carlo BER over the SNR grid, with SE columns.
    McBer(Common),
    /// One curve per value of the config's `sweep` axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "se")]
        mode: SweepMode,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(w) = common.workers {
        if w == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::SynthChannel(c) => {
            let cfg = load(&c)?;
            let ch = channel::synthesize(&cfg.scenario())?;
            ch.write_csv(&c.out)?;
            let meta = c.out.with_extension("json");
            let text = serde_json::to_string_pretty(&ch.metadata())?;
            std::fs::write(&meta, text).map_err(|e| Error::Io {
                path: meta.clone(),
                source: e,
            })?;
        }
        Command::CharacterizeCode(c) => {
            let mut cfg = load(&c)?;
            if let Some(s) = c.seed {
                cfg.transfer.mc.seed = s;
            }
            let t = match &cfg.transfer_cache {
                Some(_) => harness::load_transfer(&cfg)?,
                None => CodeTransfer::build(&cfg.transfer_params())?,
            };
            t.write_csv(&c.out)?;
        }
        Command::Se(c) => {
            let cfg = load(&c)?;
            harness::run_se_curve(&cfg, None)?.write_csv(&c.out)?;
        }
        Command::McBer(c) => {
            let cfg = load(&c)?;
            harness::run_mc_ber(&cfg, None)?.write_csv(&c.out)?;
        }
        Command::Sweep { common, mode } => {
            let cfg = load(&common)?;
            let spec = cfg
                .sweep
                .clone()
                .ok_or_else(|| Error::Config("config has no [sweep] section".into()))?;
            let kind = match mode {
                SweepMode::Se => SweepKind::StateEvolution,
                SweepMode::Mc => SweepKind::MonteCarlo,
            };
            let curves = harness::sweep(&spec, &cfg, kind, None)?;
            harness::write_curves(&curves, &common.out)?;
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

