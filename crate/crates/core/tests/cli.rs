use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
seed = 17

[synth]
n_samples = 1500

[model]
spatial_neurons = 8

[model.train]
epochs = 2
neurons_per_hidden_layer = 16
hidden_layers = 2

[coeffratio]
runs = 3
n_samples = 1500

[coeffratio.regression.train]
epochs = 2
"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_lobspatial"))
        .current_dir(dir)
        .args(["--config", "run.toml", "--out", "out"])
        .args(args)
        .output()
        .unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn pipeline(dir: &Path) {
    fs::write(dir.join("run.toml"), CONFIG).unwrap();
    run(dir, &["synth"]);
    for f in ["naive", "logistic", "standard", "spatial"] {
        run(dir, &["train", "--family", f]);
    }
    run(
        dir,
        &[
            "compare",
            "--models",
            "out/naive.model.json",
            "out/logistic.model.json",
            "out/standard.model.json",
            "out/spatial.model.json",
        ],
    );
}

fn read(dir: &Path, rel: &str) -> Vec<u8> {
    fs::read(dir.join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

#[test]
fn pipeline_is_byte_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    pipeline(a.path());
    pipeline(b.path());
    let files = [
        "out/synth.csv",
        "out/ground_truth.json",
        "out/test.csv",
        "out/naive.model.json",
        "out/logistic.model.json",
        "out/standard.model.json",
        "out/spatial.model.json",
        "out/spatial.history.csv",
        "out/compare/report.json",
        "out/compare/metrics.csv",
        "out/compare/wins.csv",
        "out/compare/pct_decrease.csv",
    ];
    for f in files {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f} differs");
    }
    let report = String::from_utf8(read(a.path(), "out/compare/report.json")).unwrap();
    assert!(report.contains("\"win_matrix\""));
}

#[test]
fn wellposed_and_coeffratio_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("run.toml"), CONFIG).unwrap();
    let out = run(d, &["wellposed"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("relu_case1: PASS"), "{text}");
    assert!(text.contains("relu_case3: mass escape"), "{text}");
    assert!(d.join("out/wellposed/relu_case3.csv").exists());

    run(d, &["coeffratio"]);
    let csv = fs::read_to_string(d.join("out/coeffratio.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);
    assert!(csv.starts_with("run,n_rows,intercept,theta_-10,"));
}

#[test]
fn errors_exit_nonzero_with_operation_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lobspatial"))
        .current_dir(dir.path())
        .args(["eval", "--model", "missing.model.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error: "), "{err}");
    assert!(err.contains("missing.model.json"), "{err}");

    fs::write(dir.path().join("bad.toml"), "nonsense = 1\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lobspatial"))
        .current_dir(dir.path())
        .args(["--config", "bad.toml", "synth"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("invalid configuration"));
}
