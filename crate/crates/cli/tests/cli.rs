//! End to end flows through the command line binary: artifact production,
//! exit codes and byte identical reruns.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(cfg: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_puccilab"))
        .arg("-c")
        .arg(cfg)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_cfg(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    std::fs::write(&path, body).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn stderr_text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn solve_rates_and_harnack_produce_their_artifacts() {
    let td = tempfile::tempdir().unwrap();
    let out_dir = td.path().join("out");
    let cfg = write_cfg(
        td.path(),
        &format!(
            "alpha = 0.5\nnodes = 513\noutput_dir = {}\n",
            out_dir.display()
        ),
    );

    let solve = run(&cfg, &["solve"]);
    assert_eq!(code(&solve), 0, "stderr: {}", stderr_text(&solve));
    assert!(out_dir.join("solution.csv").exists());
    assert!(out_dir.join("report.json").exists());

    let rates = run(&cfg, &["rates"]);
    assert_eq!(code(&rates), 0, "stderr: {}", stderr_text(&rates));
    assert!(out_dir.join("rates.json").exists());
    let summary = stdout_text(&rates);
    assert!(summary.contains("Linear"), "stdout: {summary}");

    let harnack = run(&cfg, &["harnack"]);
    assert_eq!(code(&harnack), 0, "stderr: {}", stderr_text(&harnack));
    let ratios = std::fs::read_to_string(out_dir.join("harnack.csv")).unwrap();
    assert_eq!(ratios.lines().count(), 7);
    assert!(ratios.starts_with("scale,ratio\n"));
    let osc = std::fs::read_to_string(out_dir.join("oscillation.csv")).unwrap();
    assert_eq!(osc.lines().count(), 7);
    assert!(osc.starts_with("scale,oscillation,gamma\n"));
}

#[test]
fn rates_before_solve_exits_with_two() {
    let td = tempfile::tempdir().unwrap();
    let out_dir = td.path().join("out");
    let cfg = write_cfg(
        td.path(),
        &format!("output_dir = {}\n", out_dir.display()),
    );
    let rates = run(&cfg, &["rates"]);
    assert_eq!(code(&rates), 2);
    assert!(stderr_text(&rates).contains("run solve first"));
}

#[test]
fn solve_reruns_write_byte_identical_artifacts() {
    let td = tempfile::tempdir().unwrap();
    let out_dir = td.path().join("out");
    let cfg = write_cfg(
        td.path(),
        &format!(
            "alpha = 3\nnodes = 257\noutput_dir = {}\n",
            out_dir.display()
        ),
    );
    assert_eq!(code(&run(&cfg, &["solve"])), 0);
    let first_csv = std::fs::read(out_dir.join("solution.csv")).unwrap();
    let first_json = std::fs::read(out_dir.join("report.json")).unwrap();
    assert_eq!(code(&run(&cfg, &["solve"])), 0);
    assert_eq!(std::fs::read(out_dir.join("solution.csv")).unwrap(), first_csv);
    assert_eq!(std::fs::read(out_dir.join("report.json")).unwrap(), first_json);
}

#[test]
fn certify_succeeds_in_regime_and_exhausts_outside_it() {
    let td = tempfile::tempdir().unwrap();
    let out_dir = td.path().join("out");
    let critical = write_cfg(
        td.path(),
        &format!("output_dir = {}\n", out_dir.display()),
    );
    let ok = run(&critical, &["certify", "--ineq", "I3"]);
    assert_eq!(code(&ok), 0, "stderr: {}", stderr_text(&ok));
    let certs = std::fs::read_to_string(out_dir.join("certificates.json")).unwrap();
    assert!(certs.contains("\"I3\""));

    let power = td.path().join("power.cfg");
    std::fs::write(
        &power,
        format!("alpha = 3\noutput_dir = {}\n", out_dir.display()),
    )
    .unwrap();
    let fail = run(&power, &["certify", "--ineq", "I3"]);
    assert_eq!(code(&fail), 3);
    assert!(stdout_text(&fail).contains("I3 FAILED"));
}

#[test]
fn set_without_ineq_exits_with_two() {
    let td = tempfile::tempdir().unwrap();
    let out_dir = td.path().join("out");
    let cfg = write_cfg(
        td.path(),
        &format!("output_dir = {}\n", out_dir.display()),
    );
    let out = run(&cfg, &["certify", "--set", "m1=0.2"]);
    assert_eq!(code(&out), 2);
    assert!(stderr_text(&out).contains("--ineq"));
}

#[test]
fn unknown_config_keys_exit_with_two() {
    let td = tempfile::tempdir().unwrap();
    let cfg = write_cfg(td.path(), "wavelength = 3\n");
    let out = run(&cfg, &["solve"]);
    assert_eq!(code(&out), 2);
    assert!(stderr_text(&out).contains("wavelength"));
}

#[test]
fn sweep_joins_parallel_results_in_input_order() {
    let td = tempfile::tempdir().unwrap();
    let out_dir = td.path().join("out");
    let cfg = write_cfg(
        td.path(),
        &format!(
            "nodes = 513\nsweep = mu,alpha\npairs = 0:0.5,0:3\noutput_dir = {}\n",
            out_dir.display()
        ),
    );
    let out = run(&cfg, &["sweep", "--jobs", "2"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_text(&out));
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("mu,alpha,predicted,exponent"));
    let alpha_of = |line: &str| line.split(',').nth(1).unwrap().parse::<f64>().unwrap();
    assert_eq!(alpha_of(lines[1]), 0.5);
    assert_eq!(alpha_of(lines[2]), 3.0);
}

#[test]
fn empty_sweep_tables_are_rejected() {
    let td = tempfile::tempdir().unwrap();
    let out_dir = td.path().join("out");
    let cfg = write_cfg(
        td.path(),
        &format!("output_dir = {}\n", out_dir.display()),
    );
    let out = run(&cfg, &["sweep"]);
    assert_eq!(code(&out), 2);
    assert!(stderr_text(&out).contains("pairs"));
}

#[test]
fn eigen_writes_the_pair_and_its_summary() {
    let td = tempfile::tempdir().unwrap();
    let out_dir = td.path().join("out");
    let cfg = write_cfg(
        td.path(),
        &format!("nodes = 513\noutput_dir = {}\n", out_dir.display()),
    );
    let out = run(&cfg, &["eigen"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_text(&out));
    assert!(out_dir.join("psi.csv").exists());
    let summary = std::fs::read_to_string(out_dir.join("eigen.json")).unwrap();
    assert!(summary.contains("lambda_hat"));
}

#[test]
fn report_writes_a_stable_effective_config() {
    let td = tempfile::tempdir().unwrap();
    let out_dir = td.path().join("out");
    let cfg = write_cfg(
        td.path(),
        &format!(
            "alpha = 0.5\nrho = 1.5\noutput_dir = {}\n",
            out_dir.display()
        ),
    );
    let out = run(&cfg, &["report"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_text(&out));
    let first = std::fs::read(out_dir.join("effective.cfg")).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.contains("alpha = 0.5"));
    assert!(text.contains("rho = 1.5"));
    assert_eq!(code(&run(&cfg, &["report"])), 0);
    assert_eq!(std::fs::read(out_dir.join("effective.cfg")).unwrap(), first);
}
