use std::path::Path;
use std::process::{Command, Output};

const BASE: &str = r#"
[system]
n_modes = 3

[bath]
gamma0 = 0.05
cutoff = 100.0
temperature = 10.0

[initial_state]
family = "ghz"
r = 1.2

[integration]
t_max = 2.0
dt = 0.001
sample_dt = 0.05

[output]
outputs = ["trajectory", "entanglement", "coefficients"]
plots = false
"#;

fn oscbath(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oscbath"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

#[test]
fn run_writes_files_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", BASE);
    for out in ["a", "b"] {
        let o = oscbath(tmp.path(), &["run", "--config", &cfg, "--out", out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["trajectory.csv", "entanglement.csv", "coefficients.csv"] {
        let a = std::fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(f)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{f} differs between identical runs");
    }
}

#[test]
fn effective_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", BASE);
    assert!(oscbath(tmp.path(), &["run", "--config", &cfg, "--out", "first"]).status.success());
    let dumped = tmp.path().join("first").join("effective_config.toml");
    let o = oscbath(tmp.path(), &["run", "--config", dumped.to_str().unwrap(), "--out", "second"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = std::fs::read(tmp.path().join("first/entanglement.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("second/entanglement.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn plot_is_svg() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", &BASE.replace("plots = false", "plots = true"));
    assert!(oscbath(tmp.path(), &["run", "--config", &cfg, "--out", "p"]).status.success());
    let svg = std::fs::read_to_string(tmp.path().join("p/entanglement.svg")).unwrap();
    assert!(svg.contains("<svg"));
    assert!(oscbath(tmp.path(), &["run", "--config", &cfg, "--out", "q", "--no-plots"]).status.success());
    assert!(!tmp.path().join("q/entanglement.svg").exists());
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(tmp.path(), "bad.toml", &BASE.replace("dt = 0.001", "dt = -0.001"));
    let o = oscbath(tmp.path(), &["run", "--config", &bad]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.trim().lines().count(), 1, "{err}");

    let typo = write(tmp.path(), "typo.toml", &BASE.replace("gamma0", "gamma_0"));
    assert_eq!(oscbath(tmp.path(), &["run", "--config", &typo]).status.code(), Some(2));

    let coarse = write(
        tmp.path(),
        "coarse.toml",
        &BASE.replace("dt = 0.001", "dt = 0.05").replace("sample_dt = 0.05", "sample_dt = 0.1"),
    );
    assert_eq!(oscbath(tmp.path(), &["run", "--config", &coarse]).status.code(), Some(2));

    let empty = write(tmp.path(), "empty.toml", &format!("{BASE}\n[sweep]\nparameter = \"r\"\nvalues = []\n"));
    assert_eq!(oscbath(tmp.path(), &["sweep", "--config", &empty]).status.code(), Some(2));

    let missing = oscbath(tmp.path(), &["run", "--config", "nope.toml"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn numerical_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    // Strong damping relaxes quickly; both ends of the bracket stay entangled.
    let cfg = write(tmp.path(), "strong.toml", &BASE.replace("gamma0 = 0.05", "gamma0 = 5.0"));
    let o = oscbath(tmp.path(), &["threshold", "--config", &cfg, "--r-lo", "3.0", "--r-hi", "3.5"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn sweep_rows_are_sorted_with_status() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!(
        "{}\n[sweep]\nparameter = \"gamma0\"\nvalues = [5.0, 1.0]\n",
        BASE.replace("t_max = 2.0", "t_max = 1.0")
    );
    let cfg = write(tmp.path(), "sweep.toml", &text);
    let o = Command::new(env!("CARGO_BIN_EXE_oscbath"))
        .current_dir(tmp.path())
        .env("OSCBATH_THREADS", "2")
        .args(["sweep", "--config", &cfg, "--out", "s"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("s/sweep.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "gamma0,late_min_eta,late_min_combined_variance,status");
    assert!(lines[1].starts_with("1e0,") && lines[1].ends_with(",ok"));
    assert!(lines[2].starts_with("5e0,") && lines[2].ends_with(",ok"));
}

#[test]
fn dump_coefficients_only() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", BASE);
    let o = oscbath(tmp.path(), &["dump-coefficients", "--config", &cfg, "--out", "c"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("c/coefficients.csv")).unwrap();
    assert!(csv.lines().count() > 100);
    assert!(!tmp.path().join("c/trajectory.csv").exists());
}
