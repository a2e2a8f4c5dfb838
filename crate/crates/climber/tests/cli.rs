//! End-to-end checks of the `climber` binary.

use std::path::Path;
use std::process::{Command, Output};

use climber::config::RunConfig;
use climber::export::read_sweep_csv;

fn climber(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_climber")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn small_sweep(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("sweep.toml");
    std::fs::write(
        &path,
        "[sweep]\ngamma_deg = { start = 60, stop = 90, step = 30 }\nomega_deg_s = { start = 500, stop = 1500, step = 500 }\n",
    )
    .unwrap();
    path
}

#[test]
fn simulate_writes_outputs_and_echo_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[policy]\ngamma_max_deg = 80\n[sim]\nwork = \"signed\"\n").unwrap();
    let out = climber(dir.path(), &["simulate", "--config", "c.toml", "--out-dir", "o", "--slip-mm", "3", "--drag", "off"]);
    ok(&out);
    for f in ["trajectory.csv", "metrics.json", "config.echo.toml"] {
        assert!(dir.path().join("o").join(f).exists(), "{f}");
    }
    let echo = std::fs::read_to_string(dir.path().join("o/config.echo.toml")).unwrap();
    let parsed = RunConfig::from_toml(&echo, "echo").unwrap();
    assert_eq!(parsed.sim.slip_mm, Some(3.0));
    assert_eq!(parsed.policy.gamma_max_deg, Some(80.0));
    assert_eq!(RunConfig::from_toml(&parsed.to_toml(), "again").unwrap(), parsed);

    // Re-running from the echo reproduces the metrics exactly.
    let first = std::fs::read(dir.path().join("o/metrics.json")).unwrap();
    std::fs::write(dir.path().join("echo.toml"), &echo).unwrap();
    ok(&climber(dir.path(), &["simulate", "--config", "echo.toml", "--out-dir", "p"]));
    assert_eq!(std::fs::read(dir.path().join("p/metrics.json")).unwrap(), first);
}

#[test]
fn flags_override_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[sim]\nslip_mm = 9\n[output]\nout_dir = \"from_file\"\n").unwrap();
    ok(&climber(dir.path(), &["simulate", "--config", "c.toml", "--slip-mm", "2", "--out-dir", "from_flag"]));
    assert!(!dir.path().join("from_file").exists());
    let m: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("from_flag/metrics.json")).unwrap()).unwrap();
    let j = &m["jumps"][0];
    let gap = j["dy_max_mm"].as_f64().unwrap() - j["dy_net_mm"].as_f64().unwrap();
    assert!((gap - 2.0).abs() < 1e-9);
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("unknown.toml", "[params]\nmass_kg = 0.1\n"),
        ("syntax.toml", "[params\nmass_g = 1\n"),
        ("invalid.toml", "[params]\nmass_g = -5\n"),
        ("section.toml", "[plot]\nx = 1\n"),
    ] {
        std::fs::write(dir.path().join(name), text).unwrap();
        for cmd in ["simulate", "sweep", "optimize"] {
            let out = climber(dir.path(), &[cmd, "--config", name, "--out-dir", "o"]);
            assert_eq!(out.status.code(), Some(2), "{cmd} {name}");
            assert!(String::from_utf8_lossy(&out.stderr).contains(name), "{cmd} {name}");
            assert!(!dir.path().join("o").exists(), "{cmd} {name}");
        }
    }
    let out = climber(dir.path(), &["simulate", "--drag", "sometimes", "--out-dir", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn one_cell_sweep_matches_simulate() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "[policy]\ngamma_max_deg = 70\nomega_c_deg_s = 1200\n[sweep]\ngamma_deg = { start = 70, stop = 70, step = 1 }\nomega_deg_s = { start = 1200, stop = 1200, step = 1 }\n",
    )
    .unwrap();
    ok(&climber(dir.path(), &["sweep", "--config", "c.toml", "--out-dir", "o"]));
    ok(&climber(dir.path(), &["simulate", "--config", "c.toml", "--out-dir", "o"]));
    let rows = read_sweep_csv(&std::fs::read(dir.path().join("o/sweep.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    let m: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("o/metrics.json")).unwrap()).unwrap();
    let j = &m["jumps"][0];
    assert_eq!(rows[0].dy_max_mm, j["dy_max_mm"].as_f64());
    assert_eq!(rows[0].dy_net_mm, j["dy_net_mm"].as_f64());
    assert_eq!(rows[0].dx_mm, j["dx_mm"].as_f64());
    assert_eq!(rows[0].eta, j["eta"].as_f64());
}

#[test]
fn resumed_sweep_equals_uninterrupted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_sweep(dir.path());
    let cfg = cfg.to_str().unwrap();
    ok(&climber(dir.path(), &["sweep", "--config", cfg, "--out-dir", "full"]));
    let out = climber(dir.path(), &["sweep", "--config", cfg, "--out-dir", "part", "--stop-after", "4"]);
    ok(&out);
    assert!(!dir.path().join("part/sweep.csv").exists());
    ok(&climber(dir.path(), &["sweep", "--config", cfg, "--out-dir", "part"]));
    let full = std::fs::read(dir.path().join("full/sweep.csv")).unwrap();
    assert_eq!(std::fs::read(dir.path().join("part/sweep.csv")).unwrap(), full);
    assert_eq!(read_sweep_csv(&full).unwrap().len(), 6);
}

#[test]
fn parallel_sweep_equals_serial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_sweep(dir.path());
    let cfg = cfg.to_str().unwrap();
    ok(&climber(dir.path(), &["sweep", "--config", cfg, "--out-dir", "a", "--parallel", "1"]));
    ok(&climber(dir.path(), &["sweep", "--config", cfg, "--out-dir", "b", "--parallel", "4"]));
    for f in ["sweep.csv", "sweep.json"] {
        assert_eq!(
            std::fs::read(dir.path().join("a").join(f)).unwrap(),
            std::fs::read(dir.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn zero_iteration_optimize_echoes_x0() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[optimize]\nmotors = [\"75:1\"]\nstarts = 1\nmax_iterations = 0\n").unwrap();
    ok(&climber(dir.path(), &["optimize", "--config", "c.toml", "--out-dir", "o"]));
    let r: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("o/optimize.json")).unwrap()).unwrap();
    let res = &r["results"][0];
    assert_eq!(res["best"], res["x0"]);
    assert_eq!(res["best"]["link_length_mm"].as_f64(), Some(182.0));
    let log = std::fs::read_to_string(dir.path().join("o/optimize_log.jsonl")).unwrap();
    for line in log.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["motor"], "75:1");
    }
}

#[test]
fn gait_script_runs_and_empty_script_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.toml"), "").unwrap();
    let out = climber(dir.path(), &["gait", "--script", "empty.toml", "--out-dir", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("o").exists());

    std::fs::write(dir.path().join("stride.toml"), "[[step]]\nkind = \"vertical\"\ncount = 2\n").unwrap();
    ok(&climber(dir.path(), &["gait", "--script", "stride.toml", "--out-dir", "o"]));
    let m: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("o/gait_metrics.json")).unwrap()).unwrap();
    let jumps = m["jumps"].as_array().unwrap();
    assert_eq!(jumps.len(), 2);
    let net = jumps[0]["dy_net_mm"].as_f64().unwrap();
    assert!((m["total_dy_mm"].as_f64().unwrap() - 2.0 * net).abs() < 1e-6);
    assert!(m["total_dx_mm"].as_f64().unwrap().abs() < 1e-5);
    let csv = std::fs::read_to_string(dir.path().join("o/gait_trajectory.csv")).unwrap();
    assert!(csv.lines().last().unwrap().ends_with(",1"));
}
