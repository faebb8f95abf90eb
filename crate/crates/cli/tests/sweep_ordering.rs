//! Ordering and trend properties of the sweep outputs: the fully-digital
//! curve dominates the hybrid curve at every SNR point, mean rates grow with
//! SNR, and the solver-on-noisy-channels curve degrades as SNR_Test drops.

use hbf_core::channel::{ChannelModelParams, NoiseDbConvention, SystemConfig};
use hbf_core::elm::Activation;
use hbf_cli::config::{DatasetParams, ElmParams, ExperimentConfig, SweepParams};
use hbf_cli::results::ResultTable;
use hbf_cli::sweeps;

fn desk_config(dir: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        system: SystemConfig {
            users: 2,
            streams: 1,
            tx_antennas: 8,
            rx_antennas: 4,
            tx_rf_chains: 4,
            rx_rf_chains: 2,
            total_power: 1.0,
            noise_power: 1.0,
        },
        channel: ChannelModelParams::near_square(4, 5, 8, 4),
        fp_stop: Default::default(),
        mm_stop: Default::default(),
        elm: ElmParams {
            hidden_nodes: 64,
            activation: Activation::PRelu(0.25),
            lambda: 1e-3,
        },
        dataset: DatasetParams {
            realizations: 4,
            noisy_per_realization: 4,
            snr_train_db: vec![15.0, 20.0, 25.0],
        },
        sweep: SweepParams {
            snr_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0],
            snr_test_db: vec![0.0, 15.0, 30.0],
            nt_list: vec![8],
            trials: 6,
        },
        noise_db_convention: NoiseDbConvention::Amplitude20,
        snr_test_db: None,
        base_seed: 3,
        model_path: Some(dir.join("model.elmb")),
        dataset_path: Some(dir.join("dataset.hbfd")),
        out: None,
    }
}

fn column(table: &ResultTable, method: &str, value_idx: usize) -> Vec<f64> {
    table
        .rows
        .iter()
        .filter(|r| r[0] == method)
        .map(|r| r[value_idx].parse::<f64>().unwrap())
        .collect()
}

#[test]
fn digital_dominates_hybrid_and_rates_grow_with_snr() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = desk_config(dir.path());
    let table = sweeps::run_rate_vs_snr(&cfg).unwrap();

    let fd = column(&table, "fp-fd", 4);
    let hb = column(&table, "fp-mm-hbf", 4);
    assert_eq!(fd.len(), cfg.sweep.snr_db.len());
    for (i, (d, h)) in fd.iter().zip(&hb).enumerate() {
        assert!(d >= h, "SNR point {i}: digital {d} below hybrid {h}");
    }
    for pair in fd.windows(2) {
        assert!(
            pair[1] > pair[0],
            "digital mean rate not strictly increasing: {fd:?}"
        );
    }
    // No failed trials on this configuration.
    assert!(table.rows.iter().all(|r| r[3] == "0"));
}

#[test]
fn solver_on_noisy_channels_degrades_as_snr_test_drops() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = desk_config(dir.path());
    sweeps::gen_dataset(&cfg, &dir.path().join("dataset.hbfd")).unwrap();
    sweeps::train_model(
        &cfg,
        &dir.path().join("dataset.hbfd"),
        &dir.path().join("model.elmb"),
    )
    .unwrap();
    let table = sweeps::run_robustness_sweep(&cfg).unwrap();
    // snr_test_db = [0, 15, 30]: the solver curve improves with SNR_Test.
    let mm = column(&table, "fp-mm-hbf", 4);
    assert_eq!(mm.len(), 3);
    assert!(
        mm[0] < mm[2],
        "solver rate should degrade under heavier perturbation: {mm:?}"
    );
    let elm = column(&table, "elm-hbf", 4);
    assert!(elm.iter().all(|r| r.is_finite() && *r > 0.0));
}
