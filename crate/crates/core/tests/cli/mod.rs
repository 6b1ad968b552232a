//! Exit codes, output files and determinism of the `rgflow` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn rgflow(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rgflow"))
        .args(args)
        .env("RGFLOW_OUTPUT_DIR", out_dir)
        .output()
        .unwrap()
}

fn write_cfg(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn malformed_config_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "rg.L = 2.0\n\nkernel.colour = 3\n");
    let out = rgflow(&["constants", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":3: unknown key 'kernel.colour'"), "{err}");
}

#[test]
fn missing_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.cfg");
    let out = rgflow(&["rg-run", missing.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn refused_flow_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "nonlinearity.alpha = 2\nrg.n_steps = 2\n");
    let out = rgflow(&["rg-run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("marginal"));
}

#[test]
fn picard_failure_flushes_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "rg.picard_max_iter = 1\nrg.n_steps = 3\n");
    let out = rgflow(&["rg-run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let csv = fs::read_to_string(dir.path().join("rg_convergence.csv")).unwrap();
    // header and the n = 0 row
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn constants_table_shows_critical_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("default.cfg");
    let out = rgflow(&["constants", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.split_whitespace().collect::<Vec<_>>() == ["alpha_c", "2"]));
    assert!(dir.path().join("constants.csv").exists());
}

#[test]
fn linear_rg_run_has_constant_amplitude() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "nonlinearity.lambda = 0.0\ninitial.perturbation = 0.2\nrg.n_steps = 4\n");
    let out = rgflow(&["rg-run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("rg_convergence.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["n", "t", "A_n", "bq_g_n", "bq_f_n", "err_to_Afpstar", "theory_rate_g", "theory_rate_A"]
    );
    let a: Vec<String> = rdr.records().map(|r| r.unwrap()[2].to_string()).collect();
    assert_eq!(a.len(), 5);
    assert!(a.iter().all(|v| v == &a[0]));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = configs().join("default.cfg");
    for dir in [&a, &b] {
        let out = rgflow(&["contraction-study", cfg.to_str().unwrap()], dir.path());
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["contraction.csv", "manifest_contraction_study.txt", "plot_contraction.py"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn output_dir_from_config_without_override() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_config");
    let cfg = write_cfg(dir.path(), &format!("output.dir = \"{}\"\n", target.display()));
    let out = Command::new(env!("CARGO_BIN_EXE_rgflow"))
        .args(["constants", &cfg])
        .env_remove("RGFLOW_OUTPUT_DIR")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(target.join("constants.csv").exists());
}

#[test]
fn stable_kernel_validation_warns_but_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("stable.cfg");
    let out = rgflow(&["validate-kernel", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("G(i) violated"));
    let csv = fs::read_to_string(dir.path().join("kernel_validation.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with("false"));
}

#[test]
fn oracle_run_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "nonlinearity.lambda = 0.0\ninitial.amplitude = 1.0\noracle.T = 8.0\ngrid.n_points = 256\n");
    let out = rgflow(&["oracle-run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    // t = 1, 2, 4, 8 snapshots of 256 points each
    assert_eq!(traj.lines().count(), 1 + 4 * 256);
    assert!(fs::read_to_string(dir.path().join("trajectory_manifest.txt"))
        .unwrap()
        .contains("n_points = 256"));
}
