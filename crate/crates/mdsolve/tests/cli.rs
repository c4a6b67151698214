//! End-to-end checks of the command-line interface: subcommands, config
//! overrides, exit codes and CSV output.

use std::path::Path;
use std::process::Command;

fn mdsolve() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mdsolve"))
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("run.cfg");
    std::fs::write(
        &path,
        "
[equation]
system = advection
a1 = 0.3
a2 = 0.3

[mesh]
nx = 4
ny = 4
n = 3

[time]
q = 4
kmax = 0
dt = 0.1
t_end = 0.2
dt_list = 0.2, 0.1
",
    )
    .unwrap();
    path
}

#[test]
fn run_writes_summary_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = mdsolve()
        .args(["run"])
        .arg(&cfg)
        .args(["--out", dir.path().join("results").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("L2 error"), "{stdout}");
    assert!(stdout.contains("newton total"), "{stdout}");
    let csv = std::fs::read_to_string(dir.path().join("results/run.csv")).unwrap();
    assert!(csv.starts_with("# mdsolve-csv-v1"));
}

#[test]
fn convergence_and_iteration_studies_emit_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out_dir = dir.path().join("study");
    let out = mdsolve()
        .args(["convergence"])
        .arg(&cfg)
        .args(["--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("convergence.csv")).unwrap();
    assert!(csv.lines().count() >= 4, "{csv}");
    assert!(csv.lines().nth(1).unwrap().contains("eoc_sum"));

    let out = mdsolve()
        .args(["iterations"])
        .arg(&cfg)
        .args(["--out", out_dir.to_str().unwrap(), "--precond", "bj_ext"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("iterations.csv")).unwrap();
    assert!(csv.contains("gmres_per_dt"), "{csv}");
    assert!(csv.contains("bj_ext"), "{csv}");
}

#[test]
fn overrides_change_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = mdsolve()
        .args(["run"])
        .arg(&cfg)
        .args([
            "--dt",
            "0.05",
            "--q",
            "6",
            "--kmax",
            "1",
            "--precond",
            "none",
            "--mode",
            "schur",
            "--threads",
            "1",
            "--out",
            dir.path().join("o").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("4 steps"), "{stdout}");
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "[equation]\nfoo = 1\n").unwrap();
    let out = mdsolve().args(["run"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));

    // bad override value is also a config error
    let cfg = write_config(dir.path());
    let out = mdsolve()
        .args(["run"])
        .arg(&cfg)
        .args(["--precond", "ilu"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // missing file
    let out = mdsolve().args(["run", "/no/such/file.cfg"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solver_failures_exit_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("hard.cfg");
    // an absurdly large implicit step with a crippled Krylov budget
    std::fs::write(
        &cfg,
        "
[equation]
system = advection

[mesh]
nx = 8
ny = 8
n = 4

[time]
q = 4
kmax = 0
dt = 50.0
t_end = 50.0

[solver]
preconditioner = none
gmres_restart = 3
gmres_max_total = 6
newton_max_iter = 2
",
    )
    .unwrap();
    let out = mdsolve().args(["run"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed"));
}

#[test]
fn selftest_passes() {
    let out = mdsolve().args(["selftest"]).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 8);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("FAIL")).count(), 0);
}
