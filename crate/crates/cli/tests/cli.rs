use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn laser() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/laser.txt")
}

fn esplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esplab"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn conditions_reports_all_flags() {
    let data = laser();
    let out = stdout(&esplab(&[
        "conditions",
        "--rho",
        "0.5",
        "--scale",
        "1",
        "--n-r",
        "100",
        "--seed",
        "1",
        "--data",
        data.to_str().unwrap(),
    ]));
    assert_eq!(value(&out, "necessary"), "1");
    assert!(["certified", "unknown"].contains(&value(&out, "schur")));
    value(&out, "input_condition_lhs").parse::<f64>().unwrap();
    value(&out, "input_condition_rhs").parse::<f64>().unwrap();
}

#[test]
fn esp_index_is_deterministic() {
    let data = laser();
    let args = [
        "esp-index",
        "--data",
        data.to_str().unwrap(),
        "--rho",
        "1.5",
        "--scale",
        "5",
        "--n-r",
        "30",
        "--L",
        "400",
        "--T",
        "200",
        "--P",
        "8",
        "--seed",
        "1",
    ];
    let a = stdout(&esplab(&args));
    assert_eq!(a, stdout(&esplab(&args)));
    assert_eq!(value(&a, "trials"), "8");
    assert!(value(&a, "esp_index").parse::<f64>().unwrap() >= 0.0);
}

#[test]
fn train_eval_with_fixed_lambda() {
    let data = laser();
    let out = stdout(&esplab(&[
        "train-eval",
        "--data",
        data.to_str().unwrap(),
        "--rho",
        "0.9",
        "--scale",
        "1",
        "--n-r",
        "20",
        "--train-len",
        "1500",
        "--test-len",
        "500",
        "--washout",
        "200",
        "--lambda",
        "0.001",
    ]));
    assert_eq!(value(&out, "lambda"), "0.001");
    assert!(value(&out, "test_mse").parse::<f64>().unwrap() < 0.05);
}

fn sweep(dir: &Path, name: &str, threads: &str) -> Vec<u8> {
    let cfg = dir.join("tiny.cfg");
    std::fs::write(
        &cfg,
        "dataset = laser\nrho = 0.5,2\nscale = 1,30\nn_seeds = 2\nn_r = 15\nesp_trials = 4\nesp_horizon = 300\nesp_transient = 100\ntrain_len = 1200\ntest_len = 300\nwashout = 100\n",
    )
    .unwrap();
    let out = dir.join(name);
    let data = laser();
    stdout(&esplab(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--threads",
        threads,
    ]));
    std::fs::read(out).unwrap()
}

#[test]
fn sweep_is_thread_independent_and_resumable() {
    let dir = tempfile::tempdir().unwrap();
    let one = sweep(dir.path(), "a.csv", "1");
    let many = sweep(dir.path(), "b.csv", "4");
    assert_eq!(one, many);
    // Re-running on a finished file recomputes nothing and keeps it intact.
    assert_eq!(sweep(dir.path(), "a.csv", "2"), one);
    let cells = std::fs::read_to_string(dir.path().join("a.csv.cells.csv")).unwrap();
    assert_eq!(cells.lines().count(), 5);

    let svg = dir.path().join("mse.svg");
    let a = dir.path().join("a.csv");
    stdout(&esplab(&[
        "plot",
        "--results",
        a.to_str().unwrap(),
        "--quantity",
        "log10_test_mse",
        "--out",
        svg.to_str().unwrap(),
    ]));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert_eq!(text.matches("<title>rho=").count(), 4);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let data = laser();
    let d = data.to_str().unwrap();
    let bad_cfg = dir.path().join("bad.cfg");
    std::fs::write(&bad_cfg, "rho = 0.5\nwidth = 3\n").unwrap();
    let out = dir.path().join("r.csv");
    let cases: Vec<Vec<&str>> = vec![
        vec![
            "esp-index",
            "--data",
            d,
            "--rho",
            "1",
            "--scale",
            "1",
            "--bogus",
        ],
        vec![
            "esp-index",
            "--data",
            "/nonexistent/laser.txt",
            "--rho",
            "1",
            "--scale",
            "1",
        ],
        vec![
            "sweep",
            "--config",
            bad_cfg.to_str().unwrap(),
            "--data",
            d,
            "--out",
            out.to_str().unwrap(),
        ],
        vec![
            "plot",
            "--results",
            d,
            "--quantity",
            "contrast",
            "--out",
            out.to_str().unwrap(),
        ],
        vec!["frobnicate"],
    ];
    for args in cases {
        let o = esplab(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(!err.trim().is_empty(), "{args:?}");
    }
}

#[test]
fn runtime_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    sweep(dir.path(), "a.csv", "1");
    let a = dir.path().join("a.csv");
    let o = esplab(&[
        "plot",
        "--results",
        a.to_str().unwrap(),
        "--out",
        "/nonexistent/dir/x.svg",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&o.stderr).lines().count(), 1);
}
