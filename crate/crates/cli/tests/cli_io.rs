//! End-to-end checks of the `hbf` binary: exit codes, smoke runs of every
//! subcommand on a desk-scale configuration, and byte-level determinism of
//! outputs under different worker counts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

fn hbf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hbf"))
}

fn tiny_config(dir: &Path) -> PathBuf {
    let path = dir.join("config.json");
    let text = format!(
        r#"{{
  "system": {{"users": 2, "streams": 1, "tx_antennas": 8, "rx_antennas": 4,
             "tx_rf_chains": 3, "rx_rf_chains": 2,
             "total_power": 1.0, "noise_power": 1.0}},
  "channel": {{"clusters": 4, "rays_per_cluster": 5, "angle_spread_deg": 7.5,
              "tx_grid": [2, 4], "rx_grid": [2, 2], "spacing_wavelengths": 0.5}},
  "elm": {{"hidden_nodes": 64, "activation": {{"prelu": 0.25}}, "lambda": 0.001}},
  "dataset": {{"realizations": 2, "noisy_per_realization": 2, "snr_train_db": [15.0, 20.0]}},
  "sweep": {{"snr_db": [-5.0, 0.0], "snr_test_db": [10.0, 30.0], "nt_list": [8], "trials": 2}},
  "base_seed": 11,
  "dataset_path": "{dir}/dataset.hbfd",
  "model_path": "{dir}/model.elmb"
}}"#,
        dir = dir.display()
    );
    std::fs::write(&path, text).unwrap();
    path
}

fn run_ok(mut cmd: Command) -> Output {
    let out = cmd.output().expect("spawn hbf");
    assert!(
        out.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn help_exits_zero_and_documents_flags() {
    let out = hbf().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in [
        "gen-dataset",
        "train",
        "rate-sweep",
        "robustness-sweep",
        "timing",
        "CSV schemas",
    ] {
        assert!(text.contains(needle), "--help missing {needle}: {text}");
    }
    let sub = hbf().args(["rate-sweep", "--help"]).output().unwrap();
    assert_eq!(sub.status.code(), Some(0));
    let text = String::from_utf8_lossy(&sub.stdout);
    for needle in ["--config", "--seed", "--out"] {
        assert!(text.contains(needle), "subcommand help missing {needle}");
    }
}

#[test]
fn unknown_flag_exits_one_with_usage() {
    let out = hbf().args(["rate-sweep", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.to_lowercase().contains("usage"), "stderr: {text}");
}

#[test]
fn missing_config_exits_one_naming_path() {
    let out = hbf()
        .args(["rate-sweep", "--config", "/nonexistent/cfg.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("/nonexistent/cfg.json"), "stderr: {text}");
}

#[test]
fn missing_subcommand_exits_one() {
    let out = hbf().output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn smoke_all_subcommands_on_tiny_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let t0 = Instant::now();

    run_ok({
        let mut c = hbf();
        c.args(["gen-dataset", "--config"]).arg(&config);
        c
    });
    assert!(dir.path().join("dataset.hbfd").exists());

    run_ok({
        let mut c = hbf();
        c.args(["train", "--config"]).arg(&config);
        c
    });
    assert!(dir.path().join("model.elmb").exists());

    for (sub, file) in [
        ("rate-sweep", "rate.csv"),
        ("robustness-sweep", "robust.csv"),
        ("timing", "timing.csv"),
    ] {
        let out_path = dir.path().join(file);
        run_ok({
            let mut c = hbf();
            c.args([sub, "--config"]).arg(&config).arg("--out").arg(&out_path);
            c
        });
        let text = std::fs::read_to_string(&out_path).unwrap();
        assert!(text.lines().count() > 1, "{sub} wrote an empty table");
    }

    // Rate sweep with a model present reports all three methods.
    let rate = std::fs::read_to_string(dir.path().join("rate.csv")).unwrap();
    for m in ["fp-fd", "fp-mm-hbf", "elm-hbf"] {
        assert!(rate.contains(m), "rate sweep missing {m}:\n{rate}");
    }

    assert!(
        t0.elapsed().as_secs() < 60,
        "smoke run took {:?}",
        t0.elapsed()
    );
}

#[test]
fn outputs_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());

    let variants = [("1", "a"), ("4", "b"), ("2", "c")];
    let mut datasets = Vec::new();
    let mut models = Vec::new();
    let mut rates = Vec::new();
    let mut robusts = Vec::new();
    for (threads, tag) in variants {
        let dataset = dir.path().join(format!("dataset-{tag}.hbfd"));
        let model = dir.path().join(format!("model-{tag}.elmb"));
        let rate = dir.path().join(format!("rate-{tag}.csv"));
        let robust = dir.path().join(format!("robust-{tag}.csv"));

        run_ok({
            let mut c = hbf();
            c.args(["gen-dataset", "--config"]).arg(&config).arg("--out").arg(&dataset);
            c.env("HBF_THREADS", threads);
            c
        });
        // Point the model at this dataset via --out/--config defaults: train
        // reads the configured dataset_path, so copy ours over it first.
        std::fs::copy(&dataset, dir.path().join("dataset.hbfd")).unwrap();
        run_ok({
            let mut c = hbf();
            c.args(["train", "--config"]).arg(&config).arg("--out").arg(&model);
            c.env("HBF_THREADS", threads);
            c
        });
        std::fs::copy(&model, dir.path().join("model.elmb")).unwrap();
        run_ok({
            let mut c = hbf();
            c.args(["rate-sweep", "--config"]).arg(&config).arg("--out").arg(&rate);
            c.env("HBF_THREADS", threads);
            c
        });
        run_ok({
            let mut c = hbf();
            c.args(["robustness-sweep", "--config"]).arg(&config).arg("--out").arg(&robust);
            c.env("HBF_THREADS", threads);
            c
        });

        datasets.push(std::fs::read(&dataset).unwrap());
        models.push(std::fs::read(&model).unwrap());
        rates.push(std::fs::read(&rate).unwrap());
        robusts.push(std::fs::read(&robust).unwrap());
    }
    for i in 1..variants.len() {
        assert_eq!(datasets[0], datasets[i], "dataset bytes differ");
        assert_eq!(models[0], models[i], "model bytes differ");
        assert_eq!(rates[0], rates[i], "rate sweep bytes differ");
        assert_eq!(robusts[0], robusts[i], "robustness sweep bytes differ");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let a = dir.path().join("a.hbfd");
    let b = dir.path().join("b.hbfd");
    run_ok({
        let mut c = hbf();
        c.args(["gen-dataset", "--config"]).arg(&config).arg("--out").arg(&a);
        c.args(["--seed", "99"]);
        c
    });
    run_ok({
        let mut c = hbf();
        c.args(["gen-dataset", "--config"]).arg(&config).arg("--out").arg(&b);
        c
    });
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
