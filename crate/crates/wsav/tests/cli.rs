use std::path::Path;
use std::process::Command;

use wsav::cli_main;
use wsav::record::read_timeseries;

fn wsav(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_wsav")).args(args).output().unwrap()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(cli_main(["wsav"]), 2);
    assert_eq!(cli_main(["wsav", "frobnicate"]), 2);
    assert_eq!(cli_main(["wsav", "run", "--preset", "nonesuch"]), 2);
    assert_eq!(cli_main(["wsav", "run", "--lambda", "1.5"]), 2);
    assert_eq!(cli_main(["wsav", "run", "--tau", "3e-4", "--t-end", "0.001"]), 2);
}

#[test]
fn list_presets() {
    let out = wsav(&["list-presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["sine", "cross", "curve2", "curve3", "curve4", "torus"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}

#[test]
fn run_prints_csv_and_is_deterministic() {
    let args = ["run", "--preset", "sine", "--steps", "5", "--grid", "16"];
    let a = wsav(&args);
    let b = wsav(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with("t,lambda,r,E,E_mod,E_norm,mass,mass_dev,newton_iters,dissipation\n"));
}

#[test]
fn torus_run_is_dissipative_and_conservative() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("torus");
    let code = cli_main([
        "wsav", "run", "--preset", "torus", "--scheme", "cn", "--tau", "1e-4",
        "--out", out.to_str().unwrap(), "--snapshot-every", "50",
    ]);
    assert_eq!(code, 0);
    let rows = read_timeseries(&out.join("timeseries.csv")).unwrap();
    assert_eq!(rows.len(), 101);
    for w in rows.windows(2) {
        assert!(w[1].energy_norm <= w[0].energy_norm);
        assert!(w[1].t > w[0].t);
    }
    assert!(rows.iter().all(|r| r.mass_dev <= 1e-12));
    assert!(rows.iter().all(|r| r.energy_norm == r.energy / rows[0].energy));
    for step in [0, 50, 100] {
        assert!(out.join(format!("phi_{step:08}.bin")).exists());
    }
    let cfg = std::fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(cfg.contains("preset = torus"));
}

#[test]
fn lagrange_failure_exits_nonzero_with_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cross");
    let o = wsav(&[
        "run", "--preset", "cross", "--gamma", "0", "--lambda", "0", "--tau", "1e-3",
        "--t-end", "1", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert!(stderr.contains("status=failed"));
    assert!(stderr.contains("kind=unsolvable"));
    let record = std::fs::read_to_string(out.join("failure.txt")).unwrap();
    assert!(record.starts_with("status=failed step="));
    assert!(record.contains("lambda=0"));
    // the accepted prefix is still written
    assert!(!read_timeseries(&out.join("timeseries.csv")).unwrap().is_empty());
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.txt");
    std::fs::write(&cfg, "preset = curve3\ngrid = 16\ntau = 1e-3\nsteps = 4\n").unwrap();
    let out = dir.path().join("o");
    let code = cli_main([
        "wsav", "run", "--config", cfg.to_str().unwrap(), "--steps", "3",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(read_timeseries(&out.join("timeseries.csv")).unwrap().len(), 4);
    let written = std::fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(written.contains("preset = curve3") && written.contains("grid = 16x16"));
    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(cli_main(["wsav", "run", "--config", cfg.to_str().unwrap()]), 2);
    assert_eq!(cli_main(["wsav", "run", "--config", Path::new("/nonexistent/x").to_str().unwrap()]), 2);
}

#[test]
fn studies_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv");
    let code = cli_main([
        "wsav", "converge", "--preset", "sine", "--grid", "16", "--tau", "1e-2", "--t-end", "0.08",
        "--levels", "2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let table = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    let out = dir.path().join("lam");
    let code = cli_main([
        "wsav", "lambda-study", "--preset", "curve3", "--grid", "16", "--tau", "1e-3", "--t-end", "0.01",
        "--levels", "2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(out.join("lambda_study.csv")).unwrap().lines().count(), 3);
}
