use std::path::Path;
use std::process::{Command, Output};

use superkvn_cli::Report;

fn superkvn(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_superkvn"));
    cmd.args(args).env_remove("SUPERKVN_OUT");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(dir: &Path, suite: &str) -> Report {
    let text = std::fs::read_to_string(dir.join(format!("{suite}.report.json"))).unwrap();
    Report::from_json(&text).unwrap()
}

fn small_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let p = dir.join("small.cfg");
    std::fs::write(&p, format!("# quick run\nsamples = 4\npath_degree = 2\ngrid_n = 64\n{extra}")).unwrap();
    p
}

#[test]
fn same_seed_gives_identical_report_body() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [a.path(), b.path()] {
        let cfg = small_config(d, "");
        let out = superkvn(
            &["verify", "superfield", "--seed", "11", "--config", path_str(&cfg), "--out", path_str(d)],
            &[],
        );
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    }
    let (ra, rb) = (report(a.path(), "superfield"), report(b.path(), "superfield"));
    assert_eq!(ra.body_json(), rb.body_json());
    assert_eq!(ra.body.seed, 11);
    assert_eq!(ra.body.config["seed"], "11");
}

#[test]
fn different_seeds_draw_different_samples() {
    let d = tempfile::tempdir().unwrap();
    let cfg = small_config(d.path(), "");
    for seed in ["1", "2"] {
        let out = superkvn(
            &["verify", "algebra", "--seed", seed, "--config", path_str(&cfg), "--out", path_str(d.path())],
            &[],
        );
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(report(d.path(), "algebra").body.seed, 2);
}

#[test]
fn kernels_report_records_mehler_error() {
    let d = tempfile::tempdir().unwrap();
    let out = superkvn(&["verify", "kernels", "--slices", "4096", "--out", path_str(d.path())], &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(d.path(), "kernels");
    assert_eq!(r.body.config["slices"], "4096");
    for name in ["oscillator_kernel_modulus", "oscillator_kernel_phase"] {
        let c = r.body.checks.iter().find(|c| c.name == name).unwrap();
        assert!(c.residual.unwrap() <= 1e-3);
    }
    let table = std::fs::read_to_string(d.path().join("kernel_table.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("q0,q1,abs_discrete,abs_oracle,rel_error"));
    assert_eq!(table.lines().count(), 1 + 49);
}

#[test]
fn vierbein_at_unit_epsilon_reduces_to_classical() {
    let d = tempfile::tempdir().unwrap();
    let cfg = small_config(d.path(), "");
    let out = superkvn(
        &["verify", "vierbein", "--epsilon", "1", "--config", path_str(&cfg), "--out", path_str(d.path())],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = report(d.path(), "vierbein");
    let c = r.body.checks.iter().find(|c| c.name == "quantum_equals_classical[ε=1]").unwrap();
    assert_eq!(c.status, superkvn_cli::Status::Pass);
    let sweep = std::fs::read_to_string(d.path().join("epsilon_sweep.csv")).unwrap();
    let mut lines = sweep.lines();
    assert_eq!(lines.next(), Some("eps,classical_residual,quantum_residual"));
    assert_eq!(lines.next().unwrap().split(',').nth(1), Some("0"));
}

#[test]
fn failing_check_exits_with_one() {
    let d = tempfile::tempdir().unwrap();
    let cfg = small_config(d.path(), "tol_flow = 1e-30\n");
    let out = superkvn(&["verify", "dynamics", "--config", path_str(&cfg), "--out", path_str(d.path())], &[]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(d.path(), "dynamics");
    assert!(!r.passed());
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    let out = superkvn(&["verify", "nonsense"], &[]);
    assert_eq!(out.status.code(), Some(2));

    let bad = d.path().join("bad.cfg");
    std::fs::write(&bad, "tol_kvn = -1\n").unwrap();
    let out = superkvn(&["verify", "kvn", "--config", path_str(&bad), "--out", path_str(d.path())], &[]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(&bad, "colour = blue\n").unwrap();
    let out = superkvn(&["verify", "kvn", "--config", path_str(&bad), "--out", path_str(d.path())], &[]);
    assert_eq!(out.status.code(), Some(2));

    let out = superkvn(&["verify", "kvn", "--config", "/nonexistent/cfg"], &[]);
    assert_eq!(out.status.code(), Some(2));

    let out = superkvn(&["verify", "vierbein", "--epsilon", "0", "--out", path_str(d.path())], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn emit_requires_prior_outputs() {
    let d = tempfile::tempdir().unwrap();
    let out = superkvn(&["emit", "wave_snapshot", "--out", path_str(d.path())], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("verify kvn"));
}

#[test]
fn emit_regenerates_from_prior_run_via_env_dir() {
    let d = tempfile::tempdir().unwrap();
    let cfg = small_config(d.path(), "total_time = 1.5707963267948966\n");
    let env = [("SUPERKVN_OUT", d.path())];
    let out = superkvn(&["verify", "kvn", "--config", path_str(&cfg)], &env);
    assert!(out.status.code().is_some());
    let first = std::fs::read(d.path().join("wave_snapshot.csv")).unwrap();
    std::fs::remove_file(d.path().join("wave_snapshot.csv")).unwrap();

    let out = superkvn(&["emit", "wave_snapshot"], &env);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let again = std::fs::read(d.path().join("wave_snapshot.csv")).unwrap();
    assert_eq!(first, again);
    let text = String::from_utf8(again).unwrap();
    assert_eq!(text.lines().next(), Some("q,p,re_psi,im_psi,rho"));
    assert_eq!(text.lines().count(), 1 + 64 * 64);
}
