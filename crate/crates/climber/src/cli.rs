//! Command-line interface. Every command validates its whole input before
//! creating any output file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use climber_core::analysis::ratio_map;
use climber_core::gait::plan_pulses;
use climber_core::hybrid::RestTime;
use climber_core::{simulate_gait, simulate_jump};

use crate::config::{Resolved, RunConfig, Toggle};
use crate::export::{
    sweep_csv, sweep_rows, to_json_pretty, trajectory_csv, write_atomic, MetricsDocument, SweepDocument,
};
use crate::script::GaitScript;
use crate::sweep::{run_resumable, ResumeOptions, SweepJob};
use crate::{optimize, Error};

#[derive(Debug, Parser)]
#[command(name = "climber", version, about = "Three-link wall-climbing jump simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one jump from rest.
    Simulate(Common),
    /// Sweep compression magnitude and speed.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Stop after this many new cells (the manifest allows resuming).
        #[arg(long, hide = true)]
        stop_after: Option<usize>,
    },
    /// Optimize the design for each motor row.
    Optimize(Common),
    /// Run a multi-jump steering script.
    Gait {
        #[command(flatten)]
        common: Common,
        /// Gait script (TOML); overrides `gait.script` in the config.
        #[arg(long)]
        script: Option<PathBuf>,
    },
}

/// Flags shared by all commands; each overrides the matching config key.
#[derive(Debug, Args, Default)]
pub struct Common {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub drag: Option<Toggle>,
    #[arg(long)]
    pub slip_mm: Option<f64>,
    /// Worker threads.
    #[arg(long)]
    pub parallel: Option<usize>,
    /// Relative integration tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Start from a published design row: 50:1, 75:1 or 100:1.
    #[arg(long)]
    pub table1_row: Option<String>,
}

impl Common {
    /// Loads the config file and folds the flags into it.
    pub fn config(&self) -> Result<RunConfig, Error> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.out_dir {
            c.output.out_dir = Some(v.clone());
        }
        if let Some(v) = self.drag {
            c.sim.drag = Some(v);
        }
        if let Some(v) = self.slip_mm {
            c.sim.slip_mm = Some(v);
        }
        if let Some(v) = self.parallel {
            c.output.parallel = Some(v);
        }
        if let Some(v) = self.tol {
            c.sim.rtol = Some(v);
        }
        if let Some(v) = &self.table1_row {
            c.design.table1_row = Some(v.clone());
        }
        Ok(c)
    }

    /// Resolves `config`, naming the config file in validation errors.
    fn resolve(&self, config: &RunConfig, drag_default: bool) -> Result<Resolved, Error> {
        config.resolve(drag_default).map_err(|e| match (e, &self.config) {
            (Error::Config { path, reason }, Some(file)) => {
                Error::Config { path: format!("{}: {path}", file.display()), reason }
            }
            (e, _) => e,
        })
    }
}

const ECHO: &str = "config.echo.toml";

fn out(resolved: &Resolved, name: &str) -> PathBuf {
    resolved.out_dir.join(name)
}

fn echo(config: &RunConfig, resolved: &Resolved) -> Result<(), Error> {
    write_atomic(&out(resolved, ECHO), config.to_toml().as_bytes())
}

pub fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate(common) => simulate(&common),
        Command::Sweep { common, stop_after } => sweep(&common, stop_after),
        Command::Optimize(common) => optimize_cmd(&common),
        Command::Gait { common, script } => gait(&common, script.as_deref()),
    }
}

fn simulate(common: &Common) -> Result<(), Error> {
    let config = common.config()?;
    let r = common.resolve(&config, true)?;
    let (traj, m) = simulate_jump(&r.params, &r.policy, &r.sim)?;
    write_atomic(&out(&r, "trajectory.csv"), &trajectory_csv(&traj, &r.params)?)?;
    write_atomic(&out(&r, "metrics.json"), &to_json_pretty(&MetricsDocument::new(&[m], &traj)))?;
    echo(&config, &r)?;
    let eta = m.eta.map_or("n/a".to_string(), |e| format!("{:.4}", e));
    println!(
        "dy_max={:.3} mm dy_net={:.3} mm dx={:.3} mm eta={eta} lifted_off={}",
        m.dy_max * 1e3,
        m.dy_net * 1e3,
        m.dx * 1e3,
        m.lifted_off
    );
    Ok(())
}

fn sweep(common: &Common, stop_after: Option<usize>) -> Result<(), Error> {
    let config = common.config()?;
    let r = common.resolve(&config, true)?;
    let job = SweepJob::new(r.sweep.clone(), r.params, r.policy, r.sim);
    let nw = job.spec.omega_values.len();
    let rows = job.spec.gamma_values.len();
    let manifest = out(&r, "sweep.manifest.jsonl");
    let opts = ResumeOptions { threads: r.parallel, stop_after };
    let done = std::sync::atomic::AtomicUsize::new(0);
    let grid = run_resumable(&job, &manifest, opts, |row| {
        let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
        eprintln!(
            "row {row} (gamma {:.1} deg) done: {n} new rows of {rows}",
            crate::export::round_deg(job.spec.gamma_values[row])
        );
    })?;
    let Some(grid) = grid else {
        eprintln!("stopped early; rerun to resume from {}", manifest.display());
        return Ok(());
    };
    let ratios = ratio_map(&grid, &r.regimes);
    write_atomic(&out(&r, "sweep.csv"), &sweep_csv(&sweep_rows(&grid, &ratios))?)?;
    write_atomic(&out(&r, "sweep.json"), &to_json_pretty(&SweepDocument::new(&grid, &ratios)))?;
    echo(&config, &r)?;
    let doc = SweepDocument::new(&grid, &ratios);
    println!("cells={} ({} x {})", grid.cells.len(), rows, nw);
    if let Some(c) = doc.max_dy {
        println!("max dy_max at gamma={} deg omega={} deg/s", c.gamma_deg, c.omega_deg_s);
    }
    if let Some(c) = doc.max_eta {
        println!("max eta at gamma={} deg omega={} deg/s", c.gamma_deg, c.omega_deg_s);
    }
    if let Some(c) = doc.lateral_regime {
        println!("lateral regime at gamma={} deg omega={} deg/s", c.gamma_deg, c.omega_deg_s);
    }
    Ok(())
}

fn optimize_cmd(common: &Common) -> Result<(), Error> {
    let config = common.config()?;
    let r = common.resolve(&config, false)?;
    let (report, log) = optimize::run(&r)?;
    let mut lines = String::new();
    for l in &log {
        lines.push_str(&serde_json::to_string(l).expect("log serializes"));
        lines.push('\n');
    }
    write_atomic(&out(&r, "optimize.json"), &to_json_pretty(&report))?;
    write_atomic(&out(&r, "optimize_log.jsonl"), lines.as_bytes())?;
    echo(&config, &r)?;
    println!("{:<6} {:>9} {:>9} {:>8} {:>8} {:>8} {:>8} {:>6} {:>6}", "motor", "x0 dy", "best dy", "L mm", "gamma", "omega_C", "omega_E", "kp", "kd");
    for label in &report.ranking {
        let m = report.results.iter().find(|m| &m.motor == label).expect("ranked motors exist");
        let b = &m.best;
        println!(
            "{:<6} {:>9.2} {:>9.2} {:>8.1} {:>8.1} {:>8.0} {:>8.0} {:>6.2} {:>6.3}",
            m.motor, m.x0_dy_mm, m.dy_mm, b.link_length_mm, b.gamma_max_deg, b.omega_c_deg_s, b.omega_e_deg_s, b.kp, b.kd
        );
    }
    Ok(())
}

fn gait(common: &Common, script_flag: Option<&Path>) -> Result<(), Error> {
    let mut config = common.config()?;
    if let Some(p) = script_flag {
        config.gait.script = Some(p.to_path_buf());
    }
    let r = common.resolve(&config, true)?;
    let path = config.gait.script.clone().ok_or_else(|| Error::Usage("gait needs --script or gait.script".into()))?;
    let script = GaitScript::load(&path)?;
    let directives = script.directives()?;
    let pulses = plan_pulses(&directives, &r.plan).map_err(|e| Error::Usage(e.to_string()))?;
    let mut sim = r.sim;
    if script.has_rest() && config.sim.rest.is_none() {
        sim.rest = RestTime::Policy;
    }
    let outcome = simulate_gait(&r.params, &pulses, &sim)?;
    write_atomic(&out(&r, "gait_trajectory.csv"), &trajectory_csv(&outcome.trajectory, &r.params)?)?;
    write_atomic(
        &out(&r, "gait_metrics.json"),
        &to_json_pretty(&MetricsDocument::new(&outcome.jumps, &outcome.trajectory)),
    )?;
    echo(&config, &r)?;
    println!(
        "jumps={} total_dx={:.1} mm total_dy={:.1} mm",
        outcome.jumps.len(),
        outcome.total_dx * 1e3,
        outcome.total_dy * 1e3
    );
    Ok(())
}
