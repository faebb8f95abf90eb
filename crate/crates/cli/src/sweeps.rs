//! Monte-Carlo sweeps and persistence entry points.
//!
//! Trials are independent tasks with seeds derived from `(base_seed, trial)`,
//! so results do not depend on the worker count; aggregation runs in trial
//! order afterwards.

use std::path::Path;
use std::time::Instant;

use hbf_core::channel::{generate_channel, perturb_channel_with, ChannelModelParams, ChannelSet, SystemConfig};
use hbf_core::elm::{self, ElmModel, TrainingDataset};
use hbf_core::error::Result as CoreResult;
use hbf_core::exec::{self, derive_seed};
use hbf_core::metrics::{sum_rate, sum_rate_hybrid};
use hbf_core::mm_hbf::fp_mm_pipeline;

use crate::config::ExperimentConfig;
use crate::dataset_io;
use crate::results::{fmt_f64, mean_and_stderr, median, ResultTable};
use crate::{CliError, CliResult};

pub const RATE_SWEEP_HEADER: [&str; 6] =
    ["method", "snr_db", "trials", "failed", "mean_rate_bits_hz", "std_err"];
pub const ROBUSTNESS_HEADER: [&str; 6] =
    ["method", "snr_test_db", "trials", "failed", "mean_rate_bits_hz", "std_err"];
pub const TIMING_HEADER: [&str; 5] =
    ["method", "tx_antennas", "trials", "median_wall_s", "mean_rate_bits_hz"];

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn load_model_if_configured(cfg: &ExperimentConfig) -> CliResult<Option<ElmModel>> {
    match &cfg.model_path {
        None => Ok(None),
        Some(path) if !path.exists() => Ok(None),
        Some(path) => Ok(Some(
            elm::load_model(path, &cfg.system).map_err(runtime)?,
        )),
    }
}

fn push_method_rows(
    table: &mut ResultTable,
    method: &str,
    coordinate: f64,
    outcomes: &[CoreResult<f64>],
) {
    let rates: Vec<f64> = outcomes.iter().filter_map(|r| r.as_ref().ok()).copied().collect();
    let failed = outcomes.len() - rates.len();
    for e in outcomes.iter().filter_map(|r| r.as_ref().err()) {
        eprintln!("warning: {method} trial failed at {coordinate}: {e}");
    }
    let (mean, se) = mean_and_stderr(&rates);
    table.push(vec![
        method.to_string(),
        fmt_f64(coordinate),
        outcomes.len().to_string(),
        failed.to_string(),
        fmt_f64(mean),
        fmt_f64(se),
    ]);
}

/// Sum-rate vs operating SNR for FP-FD, FP-MM-HBF, and (when a model file is
/// configured) ELM-HBF. With `snr_test_db` set, every method designs on
/// channels perturbed at that SNR_Test; rates are always evaluated on the
/// true channel.
pub fn run_rate_vs_snr(cfg: &ExperimentConfig) -> CliResult<ResultTable> {
    let model = load_model_if_configured(cfg)?;
    let stops = cfg.stops();
    let mut table = ResultTable::new(&RATE_SWEEP_HEADER);

    for &snr in &cfg.sweep.snr_db {
        let sys = cfg.system.with_snr_db(snr);
        type TrialOutcome = (CoreResult<f64>, CoreResult<f64>, Option<CoreResult<f64>>);
        let outcomes: Vec<TrialOutcome> = exec::map_indexed(cfg.sweep.trials, |t| {
            let trial_seed = derive_seed(cfg.base_seed, t as u64);
            let clean = match generate_channel(&sys, &cfg.channel, derive_seed(trial_seed, 0)) {
                Ok(c) => c,
                Err(e) => return (Err(e.clone()), Err(e.clone()), model.as_ref().map(|_| Err(e))),
            };
            let input = match cfg.snr_test_db {
                Some(s) => perturb_channel_with(
                    &clean,
                    s,
                    derive_seed(trial_seed, 1),
                    cfg.noise_db_convention,
                ),
                None => clean.clone(),
            };
            let fd = hbf_core::fp_fd::solve(&sys, &input, derive_seed(trial_seed, 2), &stops.fp)
                .and_then(|(fd, _, _)| sum_rate(&sys, &clean, &fd));
            let hb = fp_mm_pipeline(&sys, &input, derive_seed(trial_seed, 3), &stops)
                .and_then(|hb| sum_rate_hybrid(&sys, &clean, &hb));
            let learned = model
                .as_ref()
                .map(|m| elm::predict(m, &input).and_then(|hb| sum_rate_hybrid(&sys, &clean, &hb)));
            (fd, hb, learned)
        });

        let fd: Vec<_> = outcomes.iter().map(|o| o.0.clone()).collect();
        let hb: Vec<_> = outcomes.iter().map(|o| o.1.clone()).collect();
        push_method_rows(&mut table, "fp-fd", snr, &fd);
        push_method_rows(&mut table, "fp-mm-hbf", snr, &hb);
        if model.is_some() {
            let learned: Vec<_> = outcomes.iter().map(|o| o.2.clone().expect("model present")).collect();
            push_method_rows(&mut table, "elm-hbf", snr, &learned);
        }
    }
    Ok(table)
}

/// Channels the trained labels came from: realization `r` of the dataset
/// derivation chain.
fn label_channel(cfg: &ExperimentConfig, realization: u64) -> CoreResult<ChannelSet> {
    let base = derive_seed(cfg.base_seed, realization);
    generate_channel(&cfg.system, &cfg.channel, derive_seed(base, 0))
}

/// Sum-rate vs SNR_Test for ELM-HBF and FP-MM-HBF on identically perturbed
/// copies of the label channels, evaluated on the true channels.
pub fn run_robustness_sweep(cfg: &ExperimentConfig) -> CliResult<ResultTable> {
    let model = load_model_if_configured(cfg)?.ok_or_else(|| {
        CliError::Config("robustness-sweep needs a trained model (model_path)".into())
    })?;
    let stops = cfg.stops();
    let realizations = cfg.dataset.realizations as u64;
    let mut table = ResultTable::new(&ROBUSTNESS_HEADER);

    for &snr_test in &cfg.sweep.snr_test_db {
        let outcomes: Vec<(CoreResult<f64>, CoreResult<f64>)> =
            exec::map_indexed(cfg.sweep.trials, |t| {
                let trial_seed = derive_seed(cfg.base_seed, 1_000_000 + t as u64);
                let clean = match label_channel(cfg, t as u64 % realizations) {
                    Ok(c) => c,
                    Err(e) => return (Err(e.clone()), Err(e)),
                };
                let noisy = perturb_channel_with(
                    &clean,
                    snr_test,
                    derive_seed(trial_seed, 1),
                    cfg.noise_db_convention,
                );
                let learned =
                    elm::predict(&model, &noisy).and_then(|hb| sum_rate_hybrid(&cfg.system, &clean, &hb));
                let solved = fp_mm_pipeline(&cfg.system, &noisy, derive_seed(trial_seed, 2), &stops)
                    .and_then(|hb| sum_rate_hybrid(&cfg.system, &clean, &hb));
                (learned, solved)
            });
        let learned: Vec<_> = outcomes.iter().map(|o| o.0.clone()).collect();
        let solved: Vec<_> = outcomes.iter().map(|o| o.1.clone()).collect();
        push_method_rows(&mut table, "elm-hbf", snr_test, &learned);
        push_method_rows(&mut table, "fp-mm-hbf", snr_test, &solved);
    }
    Ok(table)
}

/// Wall-clock comparison per BS antenna count: median FP-MM-HBF solve time,
/// median ELM prediction time, and the one-off ELM training time, plus mean
/// rates. Trials run sequentially so the medians are undistorted; absolute
/// numbers are machine-specific.
pub fn run_timing(cfg: &ExperimentConfig) -> CliResult<ResultTable> {
    let stops = cfg.stops();
    let snr_test = cfg.snr_test_db.unwrap_or(10.0);
    let mut table = ResultTable::new(&TIMING_HEADER);

    for &nt in &cfg.sweep.nt_list {
        let sys = SystemConfig {
            tx_antennas: nt,
            tx_rf_chains: cfg.system.tx_rf_chains.min(nt),
            ..cfg.system
        };
        let params = ChannelModelParams {
            tx_grid: hbf_core::channel::near_square_grid(nt),
            ..cfg.channel
        };
        sys.validate().map_err(|e| CliError::Config(e.to_string()))?;

        let dataset_seed = derive_seed(cfg.base_seed, 7_000 + nt as u64);
        let dataset = elm::build_dataset(
            &sys,
            &params,
            cfg.dataset.realizations,
            cfg.dataset.noisy_per_realization,
            &cfg.dataset.snr_train_db,
            cfg.noise_db_convention,
            dataset_seed,
            &stops,
        )
        .map_err(runtime)?;
        let mut model = elm::init_random(
            &sys,
            cfg.elm.hidden_nodes,
            cfg.elm.activation,
            cfg.elm.lambda,
            derive_seed(cfg.base_seed, 8_000 + nt as u64),
        )
        .map_err(runtime)?;
        let t0 = Instant::now();
        elm::train(&mut model, &dataset).map_err(runtime)?;
        let train_s = t0.elapsed().as_secs_f64();

        let mut solve_times = Vec::with_capacity(cfg.sweep.trials);
        let mut predict_times = Vec::with_capacity(cfg.sweep.trials);
        let mut solve_rates = Vec::new();
        let mut predict_rates = Vec::new();
        for t in 0..cfg.sweep.trials {
            // Fresh noisy copies of the channels the model was trained on,
            // identical inputs for both methods.
            let realization = derive_seed(dataset_seed, (t % cfg.dataset.realizations) as u64);
            let clean = generate_channel(&sys, &params, derive_seed(realization, 0))
                .map_err(runtime)?;
            let noisy = perturb_channel_with(
                &clean,
                snr_test,
                derive_seed(realization, 1_000_000 + t as u64),
                cfg.noise_db_convention,
            );
            let t1 = Instant::now();
            let hb = fp_mm_pipeline(&sys, &noisy, derive_seed(realization, 2_000_000 + t as u64), &stops)
                .map_err(runtime)?;
            solve_times.push(t1.elapsed().as_secs_f64());
            solve_rates.push(sum_rate_hybrid(&sys, &clean, &hb).map_err(runtime)?);
            let t2 = Instant::now();
            let predicted = elm::predict(&model, &noisy).map_err(runtime)?;
            predict_times.push(t2.elapsed().as_secs_f64());
            predict_rates.push(sum_rate_hybrid(&sys, &clean, &predicted).map_err(runtime)?);
        }

        let n = cfg.sweep.trials.to_string();
        table.push(vec![
            "fp-mm-hbf".into(),
            nt.to_string(),
            n.clone(),
            format!("{:.6}", median(&solve_times)),
            fmt_f64(mean_and_stderr(&solve_rates).0),
        ]);
        table.push(vec![
            "elm-hbf".into(),
            nt.to_string(),
            n,
            format!("{:.6}", median(&predict_times)),
            fmt_f64(mean_and_stderr(&predict_rates).0),
        ]);
        table.push(vec![
            "elm-train".into(),
            nt.to_string(),
            "1".into(),
            format!("{train_s:.6}"),
            String::new(),
        ]);
    }
    Ok(table)
}

/// Builds the training dataset from the configuration and writes it.
pub fn gen_dataset(cfg: &ExperimentConfig, out: &Path) -> CliResult<TrainingDataset> {
    let dataset = elm::build_dataset(
        &cfg.system,
        &cfg.channel,
        cfg.dataset.realizations,
        cfg.dataset.noisy_per_realization,
        &cfg.dataset.snr_train_db,
        cfg.noise_db_convention,
        cfg.base_seed,
        &cfg.stops(),
    )
    .map_err(runtime)?;
    dataset_io::write_dataset(out, &dataset).map_err(runtime)?;
    Ok(dataset)
}

/// Trains the ELM on a stored dataset and writes the model file.
pub fn train_model(cfg: &ExperimentConfig, dataset_path: &Path, out: &Path) -> CliResult<ElmModel> {
    let dataset = dataset_io::read_dataset(dataset_path).map_err(runtime)?;
    let stored = elm::TargetLayout::from_config(&dataset.meta.system);
    let expected = elm::TargetLayout::from_config(&cfg.system);
    if stored != expected {
        return Err(CliError::Config(format!(
            "dataset was generated for {:?}, configuration implies {:?}",
            stored, expected
        )));
    }
    let mut model = elm::init_random(
        &cfg.system,
        cfg.elm.hidden_nodes,
        cfg.elm.activation,
        cfg.elm.lambda,
        derive_seed(cfg.base_seed, 0x31337),
    )
    .map_err(runtime)?;
    elm::train(&mut model, &dataset).map_err(runtime)?;
    elm::save_model(&model, out).map_err(runtime)?;
    Ok(model)
}
