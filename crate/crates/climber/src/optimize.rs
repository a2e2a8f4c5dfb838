//! Multi-start design optimization over the motor rows, run in parallel.

use climber_core::analysis::{best_of, optimize_design, start_points, DesignStudy, DesignVector, OptimizeResult};
use climber_core::math::to_deg;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Resolved;
use crate::Error;

/// Design vector in boundary units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignRecord {
    pub link_length_mm: f64,
    pub gamma_max_deg: f64,
    pub omega_c_deg_s: f64,
    pub omega_e_deg_s: f64,
    pub kp: f64,
    pub kd: f64,
}

impl From<&DesignVector> for DesignRecord {
    fn from(x: &DesignVector) -> Self {
        Self {
            link_length_mm: x.link_length * 1e3,
            gamma_max_deg: to_deg(x.gamma_max),
            omega_c_deg_s: to_deg(x.omega_c),
            omega_e_deg_s: to_deg(x.omega_e),
            kp: x.kp,
            kd: x.kd,
        }
    }
}

/// One line of the optimization log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLine {
    pub motor: String,
    pub start: usize,
    pub iteration: usize,
    pub evaluations: usize,
    pub best_objective: f64,
    pub x: DesignRecord,
}

/// Best design found for one motor row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotorResult {
    pub motor: String,
    pub gear_ratio: f64,
    pub x0: DesignRecord,
    pub x0_dy_mm: f64,
    pub best: DesignRecord,
    pub dy_mm: f64,
    pub best_start: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub results: Vec<MotorResult>,
    /// Motor labels from highest to lowest optimized jump.
    pub ranking: Vec<String>,
}

/// Runs every (motor, start) pair; returns the report and the log in
/// deterministic (motor, start, iteration) order.
pub fn run(resolved: &Resolved) -> Result<(OptimizeReport, Vec<LogLine>), Error> {
    let settings = &resolved.optimize;
    let study = DesignStudy {
        base: resolved.params,
        sim: climber_core::SimOptions { sample_dt: None, ..resolved.sim },
        mass: settings.mass,
        ..DesignStudy::default()
    };
    let tasks: Vec<(usize, usize, DesignVector)> = settings
        .rows
        .iter()
        .enumerate()
        .flat_map(|(r, row)| {
            start_points(&row.design, settings.starts, settings.spread, &study.bounds)
                .into_iter()
                .enumerate()
                .map(move |(s, x0)| (r, s, x0))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolved.parallel)
        .build()
        .map_err(|e| Error::Format(e.to_string()))?;
    let results: Vec<OptimizeResult> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(r, _, x0)| optimize_design(&settings.rows[r].motor(&study.base), &x0, &study, &settings.nelder_mead))
            .collect()
    });

    let mut log = Vec::new();
    let mut report = Vec::new();
    for (r, row) in settings.rows.iter().enumerate() {
        let mine: Vec<(usize, &OptimizeResult)> =
            tasks.iter().zip(&results).filter(|((tr, _, _), _)| *tr == r).map(|((_, s, _), res)| (*s, res)).collect();
        for (s, res) in &mine {
            log.extend(res.log.iter().map(|rec| LogLine {
                motor: row.label.to_string(),
                start: *s,
                iteration: rec.iteration,
                evaluations: rec.evaluations,
                best_objective: rec.best_objective,
                x: DesignRecord::from(&rec.best),
            }));
        }
        let owned: Vec<OptimizeResult> = mine.iter().map(|(_, r)| (*r).clone()).collect();
        let best = best_of(&owned).expect("at least one start");
        let best_start = mine.iter().position(|(_, r)| *r == best).unwrap_or(0);
        let x0_dy = climber_core::analysis::objective(&row.design, &row.motor(&study.base), &study);
        report.push(MotorResult {
            motor: row.label.to_string(),
            gear_ratio: row.gear_ratio,
            x0: DesignRecord::from(&row.design),
            x0_dy_mm: -x0_dy * 1e3,
            best: DesignRecord::from(&best.best),
            dy_mm: best.dy * 1e3,
            best_start,
            evaluations: owned.iter().map(|r| r.evaluations).sum(),
            converged: best.converged,
        });
    }
    let mut order: Vec<&MotorResult> = report.iter().collect();
    order.sort_by(|a, b| b.dy_mm.total_cmp(&a.dy_mm));
    let ranking = order.iter().map(|m| m.motor.clone()).collect();
    Ok((OptimizeReport { results: report, ranking }, log))
}
