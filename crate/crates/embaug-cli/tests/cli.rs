//! End-to-end checks of the `embaug` binary: flag parsing, the exit-code
//! contract, and the stable output filenames.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_embaug"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary should run")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).to_string()
}

/// Deterministic labeled-embedding JSONL: `classes` clusters with unit-ish
/// jitter around well-separated means.
fn write_dataset(path: &Path, classes: usize, per_class: usize, dim: usize) {
    let mut state = 0x2545f4914f6cdd1du64;
    let mut jitter = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut lines = Vec::new();
    for c in 0..classes {
        for i in 0..per_class {
            let vector: Vec<f64> = (0..dim).map(|_| c as f64 * 10.0 + jitter()).collect();
            lines.push(
                serde_json::json!({
                    "id": format!("r-{c}-{i}"),
                    "label": format!("class_{c}"),
                    "vector": vector,
                })
                .to_string(),
            );
        }
    }
    std::fs::write(path, lines.join("\n")).unwrap();
}

#[test]
fn augment_emits_combined_dataset_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    write_dataset(&data, 2, 60, 4);
    let out = run(
        &[
            "augment",
            "--dataset",
            "d.jsonl",
            "--d",
            "50",
            "--factor",
            "2",
            "--k",
            "15",
            "--generator",
            "mock",
            "--seed",
            "1",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    // 50 real + 50 synthetic per class
    let text = std::fs::read_to_string(dir.path().join("o/augmented.jsonl")).unwrap();
    let mut per_class: BTreeMap<String, usize> = BTreeMap::new();
    for line in text.lines().skip(1) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        *per_class
            .entry(v["label"].as_str().unwrap().to_string())
            .or_default() += 1;
    }
    assert_eq!(per_class.len(), 2);
    assert!(per_class.values().all(|&n| n == 100), "{per_class:?}");

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/gen_report.json")).unwrap())
            .unwrap();
    for class in ["class_0", "class_1"] {
        assert_eq!(report["per_class"][class]["requested"], 50);
        assert_eq!(report["per_class"][class]["accepted"], 50);
    }
}

#[test]
fn cost_model_prints_default_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["cost-model", "--resolution", "256", "--out", "o"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("117.03"), "{text}");
    assert!(text.contains("234.06"), "{text}");
    let sweep = std::fs::read_to_string(dir.path().join("o/plotdata_cost.csv")).unwrap();
    assert!(sweep.starts_with("resolution,input_ratio,output_ratio\n"));
}

#[test]
fn missing_config_file_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    write_dataset(&data, 2, 10, 3);
    let out = run(
        &["stress", "--dataset", "d.jsonl", "--config", "missing.toml"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("missing.toml"), "{}", stderr(&out));
}

#[test]
fn config_validation_lists_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&dir.path().join("d.jsonl"), 2, 10, 3);
    std::fs::write(
        dir.path().join("bad.toml"),
        "d_values = []\nfactors = [0.5]\n",
    )
    .unwrap();
    let out = run(
        &["stress", "--dataset", "d.jsonl", "--config", "bad.toml"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("d_values must be non-empty"), "{err}");
    assert!(err.contains("factor 0.5 must be > 1"), "{err}");
}

#[test]
fn flags_override_config_file_values() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&dir.path().join("d.jsonl"), 2, 24, 3);
    std::fs::write(
        dir.path().join("cfg.toml"),
        concat!(
            "d_values = [4]\n",
            "factors = [2.0]\n",
            "k_values = [2]\n",
            "methods = [\"none\", \"mock\"]\n",
            "seeds = [0]\n",
            "[train]\n",
            "hidden_dim = 4\n",
            "max_epochs = 5\n",
            "patience = 2\n",
        ),
    )
    .unwrap();
    let out = run(
        &[
            "stress",
            "--dataset",
            "d.jsonl",
            "--config",
            "cfg.toml",
            "--d",
            "3",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("o/results.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("none,3,")), "{csv}");
    assert!(csv.lines().any(|l| l.starts_with("mock,3,")), "{csv}");
    assert!(
        !csv.lines().any(|l| l.starts_with("none,4,")),
        "config d=4 should be overridden by --d 3:\n{csv}"
    );
    assert!(dir.path().join("o/results.json").exists());
}

#[test]
fn unknown_subcommand_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn llm_without_api_key_fails_before_any_request() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&dir.path().join("d.jsonl"), 2, 12, 3);
    let out = bin()
        .args([
            "augment",
            "--dataset",
            "d.jsonl",
            "--d",
            "10",
            "--factor",
            "2",
            "--k",
            "5",
            "--generator",
            "llm",
            "--endpoint-url",
            "http://127.0.0.1:1/unreachable",
        ])
        .env_remove("EMBAUG_API_KEY")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("EMBAUG_API_KEY"), "{err}");
}

#[test]
fn drift_sim_emits_accuracy_and_point_clouds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["drift-sim", "--n-per-class", "500", "--seed", "0", "--out", "o"],
        dir.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let acc = std::fs::read_to_string(dir.path().join("o/plotdata_drift_accuracy.csv")).unwrap();
    assert!(acc.starts_with("timestep,class,accuracy\n"));
    // 3 timesteps x (overall + 2 classes)
    assert_eq!(acc.lines().count(), 1 + 3 * 3, "{acc}");
    let pts = std::fs::read_to_string(dir.path().join("o/plotdata_drift_points.csv")).unwrap();
    assert_eq!(pts.lines().count(), 1 + 3 * 2 * 500);
}

#[test]
fn mock_runs_are_reproducible_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&dir.path().join("d.jsonl"), 2, 24, 3);
    let args = [
        "stress",
        "--dataset",
        "d.jsonl",
        "--d",
        "4",
        "--factor",
        "2",
        "--k",
        "3",
        "--seeds",
        "0",
        "--hidden-dim",
        "4",
        "--max-epochs",
        "5",
        "--patience",
        "2",
    ];
    let mut first: Option<Vec<u8>> = None;
    for out_dir in ["o1", "o2"] {
        let mut full: Vec<&str> = args.to_vec();
        full.extend(["--out", out_dir]);
        let out = run(&full, dir.path());
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        let bytes = std::fs::read(dir.path().join(out_dir).join("results.csv")).unwrap();
        match &first {
            None => first = Some(bytes),
            Some(prev) => assert_eq!(prev, &bytes, "results.csv differs between runs"),
        }
    }
}

#[test]
fn train_then_evaluate_round_trips_the_model() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&dir.path().join("d.jsonl"), 2, 30, 3);
    let out = run(
        &[
            "train",
            "--dataset",
            "d.jsonl",
            "--hidden-dim",
            "8",
            "--max-epochs",
            "30",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(dir.path().join("o/plotdata_training.csv").exists());
    let model: PathBuf = dir.path().join("o/model.json");
    let out = run(
        &[
            "evaluate",
            "--dataset",
            "d.jsonl",
            "--model",
            model.to_str().unwrap(),
            "--out",
            "o2",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("macro-F1"), "{}", stdout(&out));
    assert!(dir.path().join("o2/results.json").exists());
}
