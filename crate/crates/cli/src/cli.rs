//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::{sweeps, CliResult};

const SCHEMAS: &str = "\
CSV schemas (fixed header per subcommand):
  rate-sweep:        method,snr_db,trials,failed,mean_rate_bits_hz,std_err
  robustness-sweep:  method,snr_test_db,trials,failed,mean_rate_bits_hz,std_err
  timing:            method,tx_antennas,trials,median_wall_s,mean_rate_bits_hz

Binary formats: datasets use the HBFD container, models the ELMB container.
The HBF_THREADS environment variable caps the worker count; outputs do not
depend on it.";

#[derive(Parser)]
#[command(
    name = "hbf",
    version,
    about = "Hybrid beamforming benchmark harness for mmWave multi-user MIMO",
    after_help = SCHEMAS
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration file (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override the configuration's base seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output path (CSV for sweeps, HBFD/ELMB for dataset/model).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a solver-labelled training dataset (HBFD file).
    GenDataset(CommonArgs),
    /// Train the ELM on a stored dataset and write the model (ELMB file).
    Train(CommonArgs),
    /// Sum-rate vs SNR for FP-FD, FP-MM-HBF, and (with a model) ELM-HBF.
    RateSweep(CommonArgs),
    /// Sum-rate vs SNR_Test for ELM-HBF and FP-MM-HBF on perturbed channels.
    RobustnessSweep(CommonArgs),
    /// Wall-clock comparison of FP-MM-HBF solves and ELM training/prediction.
    Timing(CommonArgs),
}

/// Parses `argv` and runs the selected subcommand. Returns the process exit
/// code: 0 on success, 1 for usage/configuration errors, 2 for runtime
/// failures.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            return 1;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn load(args: &CommonArgs) -> CliResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::GenDataset(args) => {
            let cfg = load(&args)?;
            let out = args
                .out
                .or_else(|| cfg.dataset_path.clone())
                .unwrap_or_else(|| PathBuf::from("dataset.hbfd"));
            let dataset = sweeps::gen_dataset(&cfg, &out)?;
            println!(
                "wrote {} ({} rows, {} features, {} targets)",
                out.display(),
                dataset.rows(),
                dataset.features.ncols(),
                dataset.targets.ncols()
            );
            Ok(())
        }
        Command::Train(args) => {
            let cfg = load(&args)?;
            let dataset_path = cfg
                .dataset_path
                .clone()
                .unwrap_or_else(|| PathBuf::from("dataset.hbfd"));
            let out = args
                .out
                .or_else(|| cfg.model_path.clone())
                .unwrap_or_else(|| PathBuf::from("model.elmb"));
            let model = sweeps::train_model(&cfg, &dataset_path, &out)?;
            println!(
                "wrote {} ({} hidden nodes, lambda {})",
                out.display(),
                model.hidden_nodes(),
                model.lambda
            );
            Ok(())
        }
        Command::RateSweep(args) => {
            let cfg = load(&args)?;
            let out = args
                .out
                .or_else(|| cfg.out.clone())
                .unwrap_or_else(|| PathBuf::from("rate_sweep.csv"));
            let table = sweeps::run_rate_vs_snr(&cfg)?;
            table.write(&out)?;
            println!("wrote {} ({} rows)", out.display(), table.rows.len());
            Ok(())
        }
        Command::RobustnessSweep(args) => {
            let cfg = load(&args)?;
            let out = args
                .out
                .or_else(|| cfg.out.clone())
                .unwrap_or_else(|| PathBuf::from("robustness_sweep.csv"));
            let table = sweeps::run_robustness_sweep(&cfg)?;
            table.write(&out)?;
            println!("wrote {} ({} rows)", out.display(), table.rows.len());
            Ok(())
        }
        Command::Timing(args) => {
            let cfg = load(&args)?;
            let out = args
                .out
                .or_else(|| cfg.out.clone())
                .unwrap_or_else(|| PathBuf::from("timing.csv"));
            let table = sweeps::run_timing(&cfg)?;
            table.write(&out)?;
            println!("wrote {} ({} rows)", out.display(), table.rows.len());
            Ok(())
        }
    }
}
