//! Design optimization and control-space sweeps.
//!
//! The design study maximizes drag-free jump height over link length, pulse
//! shape and PD gains with a Nelder-Mead simplex. The sweep tabulates jump
//! metrics with drag over a grid of compression magnitudes and speeds.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::actuation::{MotorModel, PulsePolicy};
use crate::hybrid::{simulate_jump, JumpMetrics, SimOptions};
use crate::math::{deg, fabs, sqrt};
use crate::params::ClimberParams;

/// Link length, pulse shape and PD gains optimized together.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignVector {
    /// Link length (m).
    pub link_length: f64,
    /// Compression magnitude (rad).
    pub gamma_max: f64,
    /// Compression speed (rad/s).
    pub omega_c: f64,
    /// Extension speed (rad/s).
    pub omega_e: f64,
    pub kp: f64,
    pub kd: f64,
}

/// Lengths in decimeters, angles in radians, speeds in 1000 °/s.
const SCALE: [f64; 6] = [10.0, 1.0, 1.0 / (1000.0 * core::f64::consts::PI / 180.0), 1.0 / (1000.0 * core::f64::consts::PI / 180.0), 1.0, 1.0];

impl DesignVector {
    /// Coordinates used by the simplex, each of order one.
    pub fn to_scaled(&self) -> [f64; 6] {
        let v = self.as_array();
        core::array::from_fn(|i| v[i] * SCALE[i])
    }

    pub fn from_scaled(z: &[f64; 6]) -> Self {
        Self::from_array(core::array::from_fn(|i| z[i] / SCALE[i]))
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.link_length, self.gamma_max, self.omega_c, self.omega_e, self.kp, self.kd]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self { link_length: v[0], gamma_max: v[1], omega_c: v[2], omega_e: v[3], kp: v[4], kd: v[5] }
    }

    /// Pulse with this design's shape and gains; rest time zero.
    pub fn policy(&self) -> PulsePolicy {
        PulsePolicy {
            omega_c: self.omega_c,
            omega_e: self.omega_e,
            gamma_max: self.gamma_max,
            rest_time: 0.0,
            kp: self.kp,
            kd: self.kd,
        }
    }

    /// `base` with this design's link length and `motor`'s constants.
    pub fn params(&self, base: &ClimberParams, motor: &MotorModel) -> ClimberParams {
        ClimberParams { link_length: self.link_length, ..base.with_motor(motor) }
    }

    /// As [`params`](Self::params), with link mass following `mass`.
    pub fn params_with(&self, base: &ClimberParams, motor: &MotorModel, mass: MassModel) -> ClimberParams {
        let mut p = self.params(base, motor);
        if let MassModel::PerLength = mass {
            p.mass = base.mass * self.link_length / base.link_length;
        }
        p
    }
}

/// How link mass responds to link length in the design study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MassModel {
    /// Every design uses the base link mass.
    #[default]
    Fixed,
    /// Mass scales with length at the base mass per unit length.
    PerLength,
}

/// Box bounds on a design, closed above and open below for the zero-bounded
/// entries.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignBounds {
    pub link_length: (f64, f64),
    pub gamma_max: f64,
    pub speed: f64,
    pub gain: f64,
}

impl Default for DesignBounds {
    fn default() -> Self {
        Self { link_length: (0.05, 0.3), gamma_max: deg(150.0), speed: deg(3000.0), gain: 10.0 }
    }
}

impl DesignBounds {
    /// Distance outside the bounds in scaled coordinates; zero inside.
    pub fn violation(&self, x: &DesignVector) -> f64 {
        let over = |v: f64, lo: f64, hi: f64, open_lo: bool| -> f64 {
            if !v.is_finite() {
                f64::INFINITY
            } else if v < lo || (open_lo && v == lo) {
                lo - v + if open_lo { 1e-12 } else { 0.0 }
            } else if v > hi {
                v - hi
            } else {
                0.0
            }
        };
        let parts = [
            over(x.link_length, self.link_length.0, self.link_length.1, false) * SCALE[0],
            over(x.gamma_max, 0.0, self.gamma_max, true) * SCALE[1],
            over(x.omega_c, 0.0, self.speed, true) * SCALE[2],
            over(x.omega_e, 0.0, self.speed, true) * SCALE[3],
            over(x.kp, 0.0, self.gain, true) * SCALE[4],
            over(x.kd, 0.0, self.gain, true) * SCALE[5],
        ];
        parts.iter().sum()
    }

    pub fn contains(&self, x: &DesignVector) -> bool {
        self.violation(x) == 0.0
    }
}

/// Objective value for designs outside the bounds or whose simulation fails.
pub const PENALTY: f64 = 1.0e3;

/// Settings for [`objective`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignStudy {
    /// Constants other than link length and motor.
    pub base: ClimberParams,
    pub bounds: DesignBounds,
    pub sim: SimOptions,
    pub mass: MassModel,
}

impl Default for DesignStudy {
    fn default() -> Self {
        Self {
            base: ClimberParams::default(),
            bounds: DesignBounds::default(),
            sim: SimOptions::drag_free(),
            mass: MassModel::Fixed,
        }
    }
}

/// `−Δy_max` of one jump with the design applied, or a penalty.
///
/// Out-of-bounds designs score `PENALTY` plus their scaled distance to the
/// box so the simplex is pushed back inside.
pub fn objective(x: &DesignVector, motor: &MotorModel, study: &DesignStudy) -> f64 {
    let v = study.bounds.violation(x);
    if v > 0.0 {
        return PENALTY + if v.is_finite() { v } else { PENALTY };
    }
    match simulate_jump(&x.params_with(&study.base, motor, study.mass), &x.policy(), &study.sim) {
        Ok((_, m)) if m.dy_max.is_finite() => -m.dy_max,
        _ => PENALTY,
    }
}

/// Nelder-Mead settings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimizeOptions {
    pub max_evaluations: usize,
    pub max_iterations: usize,
    /// Stop once every vertex is this close to the best in scaled coordinates.
    pub diameter_tol: f64,
    /// Relative size of the initial simplex edges.
    pub initial_step: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { max_evaluations: 2000, max_iterations: usize::MAX, diameter_tol: 1e-4, initial_step: 0.05 }
    }
}

/// Best vertex after one simplex iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationRecord {
    pub iteration: usize,
    pub evaluations: usize,
    pub best_objective: f64,
    pub best: DesignVector,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimizeResult {
    pub best: DesignVector,
    pub best_objective: f64,
    /// Jump height of `best` (m); zero when no feasible jump was found.
    pub dy: f64,
    pub evaluations: usize,
    pub iterations: usize,
    /// True when the simplex diameter fell below the tolerance.
    pub converged: bool,
    pub log: Vec<IterationRecord>,
}

/// Nelder-Mead minimization in scaled coordinates.
///
/// Uses the standard reflection, expansion, contraction and shrink
/// coefficients (1, 2, ½, ½). The initial simplex perturbs each coordinate
/// of `x0` by `initial_step` of its value. Ties never displace the incumbent
/// best vertex, so a constant objective returns `x0`.
pub fn nelder_mead<F>(mut f: F, x0: &DesignVector, opts: &OptimizeOptions) -> OptimizeResult
where
    F: FnMut(&DesignVector) -> f64,
{
    const N: usize = 6;
    let mut evals = 0usize;
    let mut eval = |z: &[f64; N], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(&DesignVector::from_scaled(z));
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let z0 = x0.to_scaled();
    let f0 = eval(&z0, &mut evals);
    let finish = |verts: &[([f64; N], f64)], evals: usize, iterations: usize, converged: bool, log: Vec<IterationRecord>| {
        let (z, fv) = verts[0];
        OptimizeResult {
            best: if z == z0 { *x0 } else { DesignVector::from_scaled(&z) },
            best_objective: fv,
            dy: if fv < 0.0 { -fv } else { 0.0 },
            evaluations: evals,
            iterations,
            converged,
            log,
        }
    };
    if opts.max_iterations == 0 || opts.max_evaluations <= 1 {
        return finish(&[(z0, f0)], evals, 0, false, Vec::new());
    }

    let mut verts: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    verts.push((z0, f0));
    for i in 0..N {
        let mut z = z0;
        z[i] = if z0[i] != 0.0 { z0[i] * (1.0 + opts.initial_step) } else { 0.00025 };
        let fv = eval(&z, &mut evals);
        verts.push((z, fv));
    }
    // Stable sort keeps earlier vertices ahead on ties.
    let order = |verts: &mut Vec<([f64; N], f64)>| verts.sort_by(|a, b| a.1.total_cmp(&b.1));
    order(&mut verts);

    let diameter = |verts: &[([f64; N], f64)]| -> f64 {
        let best = verts[0].0;
        verts[1..]
            .iter()
            .map(|(z, _)| sqrt(z.iter().zip(&best).map(|(a, b)| (a - b) * (a - b)).sum()))
            .fold(0.0, f64::max)
    };

    let mut log = Vec::new();
    let mut iterations = 0;
    loop {
        if diameter(&verts) < opts.diameter_tol {
            return finish(&verts, evals, iterations, true, log);
        }
        if evals >= opts.max_evaluations || iterations >= opts.max_iterations {
            return finish(&verts, evals, iterations, false, log);
        }
        iterations += 1;

        let mut centroid = [0.0; N];
        for (z, _) in &verts[..N] {
            for k in 0..N {
                centroid[k] += z[k] / N as f64;
            }
        }
        let worst = verts[N];
        let along = |t: f64| -> [f64; N] { core::array::from_fn(|k| centroid[k] + t * (worst.0[k] - centroid[k])) };

        let zr = along(-1.0);
        let fr = eval(&zr, &mut evals);
        let (fbest, fsecond) = (verts[0].1, verts[N - 1].1);
        if fr < fbest {
            let ze = along(-2.0);
            let fe = eval(&ze, &mut evals);
            verts[N] = if fe < fr { (ze, fe) } else { (zr, fr) };
        } else if fr < fsecond {
            verts[N] = (zr, fr);
        } else {
            let (zc, fc) = if fr < worst.1 {
                let z = along(-0.5);
                (z, eval(&z, &mut evals))
            } else {
                let z = along(0.5);
                (z, eval(&z, &mut evals))
            };
            if fc < fr.min(worst.1) {
                verts[N] = (zc, fc);
            } else {
                let best = verts[0].0;
                for v in verts.iter_mut().skip(1) {
                    let z: [f64; N] = core::array::from_fn(|k| best[k] + 0.5 * (v.0[k] - best[k]));
                    *v = (z, eval(&z, &mut evals));
                }
            }
        }
        order(&mut verts);
        log.push(IterationRecord {
            iteration: iterations,
            evaluations: evals,
            best_objective: verts[0].1,
            best: DesignVector::from_scaled(&verts[0].0),
        });
    }
}

/// Minimizes [`objective`] for one motor from `x0`.
pub fn optimize_design(motor: &MotorModel, x0: &DesignVector, study: &DesignStudy, opts: &OptimizeOptions) -> OptimizeResult {
    nelder_mead(|x| objective(x, motor, study), x0, opts)
}

/// Deterministic start points around `x0`: `x0` itself, then points whose
/// coordinates are scaled by factors in `[1 − spread, 1 + spread]` taken
/// from a Halton sequence, pulled back inside `bounds`.
pub fn start_points(x0: &DesignVector, n: usize, spread: f64, bounds: &DesignBounds) -> Vec<DesignVector> {
    const BASES: [u32; 6] = [2, 3, 5, 7, 11, 13];
    let halton = |mut i: u32, b: u32| -> f64 {
        let (mut f, mut r) = (1.0, 0.0);
        while i > 0 {
            f /= b as f64;
            r += f * (i % b) as f64;
            i /= b;
        }
        r
    };
    let base = x0.as_array();
    let hi = [bounds.link_length.1, bounds.gamma_max, bounds.speed, bounds.speed, bounds.gain, bounds.gain];
    let lo = [bounds.link_length.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    (0..n)
        .map(|k| {
            if k == 0 {
                return *x0;
            }
            DesignVector::from_array(core::array::from_fn(|i| {
                let u = halton(k as u32, BASES[i]);
                let v = base[i] * (1.0 + spread * (2.0 * u - 1.0));
                v.min(hi[i]).max(lo[i] + 1e-6 * (hi[i] - lo[i]))
            }))
        })
        .collect()
}

/// Best of several results; earlier entries win ties.
pub fn best_of(results: &[OptimizeResult]) -> Option<&OptimizeResult> {
    results.iter().reduce(|a, b| if b.best_objective < a.best_objective { b } else { a })
}

/// Serial multi-start optimization.
pub fn optimize_multi_start(
    motor: &MotorModel,
    starts: &[DesignVector],
    study: &DesignStudy,
    opts: &OptimizeOptions,
) -> Vec<OptimizeResult> {
    starts.iter().map(|x0| optimize_design(motor, x0, study, opts)).collect()
}

/// One published design row: motor gearing, design vector and its jump height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignRow {
    pub label: &'static str,
    /// Gear reduction, e.g. 75 for 75:1.
    pub gear_ratio: f64,
    pub design: DesignVector,
    /// Reported drag-free jump height (m).
    pub reported_dy: f64,
}

impl DesignRow {
    /// Default motor regeared from the 75:1 catalog values.
    pub fn motor(&self, base: &ClimberParams) -> MotorModel {
        base.motor().regeared(75.0, self.gear_ratio)
    }
}

fn row(label: &'static str, gear_ratio: f64, l_mm: f64, wc: f64, we: f64, g: f64, kp: f64, kd: f64, dy_mm: f64) -> DesignRow {
    DesignRow {
        label,
        gear_ratio,
        design: DesignVector {
            link_length: l_mm * 1e-3,
            gamma_max: deg(g),
            omega_c: deg(wc),
            omega_e: deg(we),
            kp,
            kd,
        },
        reported_dy: dy_mm * 1e-3,
    }
}

/// The three optimized designs for the 50:1, 75:1 and 100:1 gearmotors.
pub fn design_table() -> [DesignRow; 3] {
    [
        row("50:1", 50.0, 89.0, 718.0, 682.0, 125.0, 1.6, 0.02, 55.0),
        row("75:1", 75.0, 182.0, 1580.0, 900.0, 140.0, 1.0, 0.1, 122.0),
        row("100:1", 100.0, 141.0, 1324.0, 718.0, 132.0, 1.1, 0.05, 93.0),
    ]
}

/// Looks up a design row by its label (`"75:1"`, `"75"`).
pub fn design_row(label: &str) -> Option<DesignRow> {
    let key = label.trim();
    design_table()
        .into_iter()
        .find(|r| r.label == key || r.label.strip_suffix(":1") == Some(key))
}

/// Axes of a control-space sweep.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepSpec {
    /// Compression magnitudes (rad).
    pub gamma_values: Vec<f64>,
    /// Compression speeds (rad/s).
    pub omega_values: Vec<f64>,
}

impl Default for SweepSpec {
    /// 5°..110° in 5° steps by 70..2800 °/s in 70 °/s steps: 22 × 40 cells.
    fn default() -> Self {
        Self {
            gamma_values: (1..=22).map(|k| deg(5.0 * k as f64)).collect(),
            omega_values: (1..=40).map(|k| deg(70.0 * k as f64)).collect(),
        }
    }
}

impl SweepSpec {
    pub fn len(&self) -> usize {
        self.gamma_values.len() * self.omega_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(γ index, ω index)` of cell `k`; rows run over γ, columns over ω.
    pub fn cell_index(&self, k: usize) -> (usize, usize) {
        (k / self.omega_values.len(), k % self.omega_values.len())
    }

    /// Pulse of cell `k`: `template` with that cell's `γ_max` and `ω_C`.
    pub fn cell_policy(&self, k: usize, template: &PulsePolicy) -> PulsePolicy {
        let (i, j) = self.cell_index(k);
        PulsePolicy { gamma_max: self.gamma_values[i], omega_c: self.omega_values[j], ..*template }
    }
}

/// Outcome of one sweep cell.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SweepCell {
    Done(JumpMetrics),
    Failed(String),
}

impl SweepCell {
    pub fn metrics(&self) -> Option<&JumpMetrics> {
        match self {
            SweepCell::Done(m) => Some(m),
            SweepCell::Failed(_) => None,
        }
    }
}

/// Metrics over a complete rectangular grid, row-major in `(γ, ω)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepGrid {
    pub gamma_values: Vec<f64>,
    pub omega_values: Vec<f64>,
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn get(&self, i: usize, j: usize) -> Option<&SweepCell> {
        self.cells.get(i * self.omega_values.len() + j)
    }

    pub fn metrics(&self, i: usize, j: usize) -> Option<&JumpMetrics> {
        self.get(i, j).and_then(SweepCell::metrics)
    }

    /// Cell with the largest `dy_max`; first in row-major order on ties.
    pub fn argmax_dy(&self) -> Option<(usize, usize)> {
        self.argmax_by(|m| m.dy_max)
    }

    /// Cell with the largest efficiency.
    pub fn argmax_eta(&self) -> Option<(usize, usize)> {
        self.argmax_by(|m| m.eta.unwrap_or(f64::NEG_INFINITY))
    }

    fn argmax_by(&self, key: impl Fn(&JumpMetrics) -> f64) -> Option<(usize, usize)> {
        let nw = self.omega_values.len();
        let mut best: Option<(usize, f64)> = None;
        for (k, c) in self.cells.iter().enumerate() {
            if let Some(m) = c.metrics() {
                let v = key(m);
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((k, v));
                }
            }
        }
        best.map(|(k, _)| (k / nw, k % nw))
    }
}

/// Simulates one sweep cell; failures become [`SweepCell::Failed`].
pub fn sweep_cell(spec: &SweepSpec, k: usize, params: &ClimberParams, template: &PulsePolicy, opts: &SimOptions) -> SweepCell {
    match simulate_jump(params, &spec.cell_policy(k, template), opts) {
        Ok((_, m)) => SweepCell::Done(m),
        Err(e) => SweepCell::Failed(format!("{e}")),
    }
}

/// Serial sweep in row-major cell order.
pub fn run_sweep(spec: &SweepSpec, params: &ClimberParams, template: &PulsePolicy, opts: &SimOptions) -> SweepGrid {
    let opts = SimOptions { sample_dt: None, ..*opts };
    SweepGrid {
        gamma_values: spec.gamma_values.clone(),
        omega_values: spec.omega_values.clone(),
        cells: (0..spec.len()).map(|k| sweep_cell(spec, k, params, template, &opts)).collect(),
    }
}

/// Lateral displacements below this are treated as zero by [`ratio_map`] (m).
pub const LATERAL_EPS: f64 = 1e-6;

/// Thresholds for picking the lateral steering regime.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegimeSelection {
    /// Largest vertical-to-lateral ratio counted as lateral.
    pub max_ratio: f64,
    /// Smallest per-jump `|Δx|` worth steering with (m).
    pub min_lateral: f64,
}

impl Default for RegimeSelection {
    fn default() -> Self {
        Self { max_ratio: 0.4, min_lateral: 0.015 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RatioMap {
    /// `Δy_net / |Δx|` per cell, row-major; `None` without lift-off or lateral motion.
    pub ratios: Vec<Option<f64>>,
    /// Cell with the largest `Δy_max`.
    pub vertical_regime: Option<(usize, usize)>,
    /// Cells meeting the lateral thresholds.
    pub lateral_cells: Vec<(usize, usize)>,
    /// Lateral cell with the fastest compression (smallest `γ_max` on ties).
    pub lateral_regime: Option<(usize, usize)>,
}

/// Vertical-to-lateral ratios and the steering regimes of a grid.
pub fn ratio_map(grid: &SweepGrid, selection: &RegimeSelection) -> RatioMap {
    let nw = grid.omega_values.len();
    let ratios: Vec<Option<f64>> = grid
        .cells
        .iter()
        .map(|c| match c.metrics() {
            Some(m) if m.lifted_off && fabs(m.dx) >= LATERAL_EPS => Some(m.dy_net / fabs(m.dx)),
            _ => None,
        })
        .collect();
    let mut lateral_cells = Vec::new();
    for (k, r) in ratios.iter().enumerate() {
        if let (Some(r), Some(m)) = (r, grid.cells[k].metrics()) {
            if *r <= selection.max_ratio && fabs(m.dx) >= selection.min_lateral {
                lateral_cells.push((k / nw, k % nw));
            }
        }
    }
    let lateral_regime = lateral_cells
        .iter()
        .copied()
        .reduce(|a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a });
    RatioMap { ratios, vertical_regime: grid.argmax_dy(), lateral_cells, lateral_regime }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_round_trips() {
        let x = design_table()[1].design;
        let back = DesignVector::from_scaled(&x.to_scaled());
        for (a, b) in x.as_array().iter().zip(back.as_array()) {
            assert!((a - b).abs() <= 1e-15 * a.abs());
        }
        let z = x.to_scaled();
        assert!((z[0] - 1.82).abs() < 1e-12);
        assert!((z[2] - 1.58).abs() < 1e-12);
    }

    #[test]
    fn bounds_penalize_outside() {
        let b = DesignBounds::default();
        let mut x = design_table()[1].design;
        assert!(b.contains(&x));
        x.link_length = 0.4;
        assert!(!b.contains(&x));
        x.link_length = 0.2;
        x.kd = 0.0;
        assert!(!b.contains(&x));
        let m = ClimberParams::default().motor();
        assert!(objective(&x, &m, &DesignStudy::default()) > PENALTY);
    }

    #[test]
    fn default_grid_has_880_cells() {
        let s = SweepSpec::default();
        assert_eq!(s.gamma_values.len(), 22);
        assert_eq!(s.omega_values.len(), 40);
        assert_eq!(s.len(), 880);
        assert_eq!(s.cell_index(41), (1, 1));
        let p = s.cell_policy(879, &PulsePolicy::default());
        assert!((p.gamma_max - deg(110.0)).abs() < 1e-12);
        assert!((p.omega_c - deg(2800.0)).abs() < 1e-9);
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let target = [1.0, 0.5, 1.2, 0.8, 2.0, 0.3];
        let x0 = DesignVector::from_scaled(&[1.5, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let r = nelder_mead(
            |x| {
                let z = x.to_scaled();
                z.iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum()
            },
            &x0,
            &OptimizeOptions { max_evaluations: 20_000, ..Default::default() },
        );
        assert!(r.converged);
        for (a, b) in r.best.to_scaled().iter().zip(&target) {
            assert!((a - b).abs() < 1e-3, "{a} vs {b}");
        }
        for w in r.log.windows(2) {
            assert!(w[1].best_objective <= w[0].best_objective);
        }
    }

    #[test]
    fn constant_objective_returns_start() {
        let x0 = design_table()[0].design;
        let r = nelder_mead(|_| 7.0, &x0, &OptimizeOptions::default());
        assert_eq!(r.best, x0);
        assert_eq!(r.dy, 0.0);
        let r = nelder_mead(|_| -1.0, &x0, &OptimizeOptions { max_iterations: 0, ..Default::default() });
        assert_eq!(r.best, x0);
        assert_eq!(r.evaluations, 1);
    }

    #[test]
    fn start_points_are_deterministic_and_bounded() {
        let b = DesignBounds::default();
        let x0 = design_table()[1].design;
        let a = start_points(&x0, 8, 0.2, &b);
        assert_eq!(a, start_points(&x0, 8, 0.2, &b));
        assert_eq!(a[0], x0);
        assert!(a.iter().all(|x| b.contains(x)));
    }

    #[test]
    fn row_lookup() {
        assert_eq!(design_row("75:1").unwrap().gear_ratio, 75.0);
        assert_eq!(design_row("100").unwrap().label, "100:1");
        assert!(design_row("30:1").is_none());
    }
}
