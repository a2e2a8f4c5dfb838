//! Output formats. All writers go through [`write_atomic`].
//!
//! Boundary units: lengths in mm, angles in degrees, rates in °/s, torques
//! in N·mm, forces in N, time in s, work in mJ.

use std::io::Write;
use std::path::Path;

use climber_core::analysis::{RatioMap, SweepCell, SweepGrid};
use climber_core::hybrid::{EventKind, PhaseEvent};
use climber_core::math::to_deg;
use climber_core::{ClimberParams, JumpMetrics, Trajectory};
use serde::{Deserialize, Serialize};

use crate::Error;

/// Writes `bytes` to a temporary file beside `path`, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub const TRAJECTORY_HEADER: [&str; 20] = [
    "t", "phase", "theta1", "theta2", "theta3", "theta_dot1", "theta_dot2", "theta_dot3", "x", "y", "gamma1", "gamma2",
    "tau1", "tau2", "fx1", "fy1", "head_x", "head_y", "work", "jump",
];

/// One row per sample. `x, y` is the center of link 1; `fx1, fy1` are empty
/// in flight. `jump` counts re-attachments before the sample.
pub fn trajectory_csv(traj: &Trajectory, params: &ClimberParams) -> Result<Vec<u8>, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
    let reattach: Vec<f64> =
        traj.events.iter().filter(|e| e.kind == EventKind::Reattach).map(|e| e.t).collect();
    let mm = |v: f64| format!("{}", v * 1e3);
    let dg = |v: f64| format!("{}", to_deg(v));
    for s in &traj.samples {
        let st = &s.state;
        let (center, _) = st.head_link_center(params);
        let (tip, _) = st.head_tip(params);
        let gamma = st.joint_angles();
        // The apex sample shares its time with the re-attachment and closes its jump.
        let jump = reattach.iter().filter(|&&t| t < st.t).count();
        let (fx, fy) = match s.forces.head {
            Some(f) => (f[0].to_string(), f[1].to_string()),
            None => (String::new(), String::new()),
        };
        let mut row = vec![st.t.to_string(), st.phase.as_str().to_string()];
        row.extend(st.theta.iter().map(|&v| dg(v)));
        row.extend(st.theta_dot.iter().map(|&v| dg(v)));
        row.extend([mm(center[0]), mm(center[1])]);
        row.extend(gamma.iter().map(|&v| dg(v)));
        row.extend(s.torques.0.iter().map(|&v| mm(v)));
        row.extend([fx, fy, mm(tip[0]), mm(tip[1]), mm(s.work), jump.to_string()]);
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Per-jump record in boundary units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub jump: usize,
    pub lifted_off: bool,
    pub dy_max_mm: f64,
    pub dy_net_mm: f64,
    pub dx_mm: f64,
    pub eta: Option<f64>,
    pub eta_net: Option<f64>,
    pub specific_resistance: Option<f64>,
    pub work_in_mj: f64,
    pub t_liftoff_s: f64,
    pub t_flight_s: f64,
    pub t_jump_s: f64,
}

impl MetricsRecord {
    pub fn new(jump: usize, m: &JumpMetrics) -> Self {
        Self {
            jump,
            lifted_off: m.lifted_off,
            dy_max_mm: m.dy_max * 1e3,
            dy_net_mm: m.dy_net * 1e3,
            dx_mm: m.dx * 1e3,
            eta: m.eta,
            eta_net: m.eta_net,
            specific_resistance: m.specific_resistance(),
            work_in_mj: m.work_in * 1e3,
            t_liftoff_s: m.t_liftoff,
            t_flight_s: m.t_flight,
            t_jump_s: m.t_jump,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub t: f64,
    pub kind: String,
    pub residual: f64,
    pub at_breakpoint: bool,
}

impl From<&PhaseEvent> for EventRecord {
    fn from(e: &PhaseEvent) -> Self {
        Self { t: e.t, kind: e.kind.as_str().to_string(), residual: e.residual, at_breakpoint: e.at_breakpoint }
    }
}

/// Metrics document for `simulate` and `gait`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDocument {
    pub jumps: Vec<MetricsRecord>,
    pub total_dx_mm: f64,
    pub total_dy_mm: f64,
    pub events: Vec<EventRecord>,
}

impl MetricsDocument {
    pub fn new(jumps: &[JumpMetrics], traj: &Trajectory) -> Self {
        Self {
            jumps: jumps.iter().enumerate().map(|(k, m)| MetricsRecord::new(k, m)).collect(),
            total_dx_mm: jumps.iter().map(|m| m.dx).sum::<f64>() * 1e3,
            total_dy_mm: jumps.iter().map(|m| m.dy_net).sum::<f64>() * 1e3,
            events: traj.events.iter().map(EventRecord::from).collect(),
        }
    }
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("records always serialize");
    v.push(b'\n');
    v
}

pub const SWEEP_HEADER: [&str; 8] = ["gamma_deg", "omega_deg_s", "dy_max_mm", "dy_net_mm", "dx_mm", "eta", "ratio", "status"];

/// One sweep row in boundary units. Numeric fields are empty for failed cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma_deg: f64,
    pub omega_deg_s: f64,
    pub dy_max_mm: Option<f64>,
    pub dy_net_mm: Option<f64>,
    pub dx_mm: Option<f64>,
    pub eta: Option<f64>,
    /// `dy_net / |dx|`; empty when `|dx|` is negligible.
    pub ratio: Option<f64>,
    /// `ok`, `no_liftoff` or the failure message.
    pub status: String,
}

pub fn sweep_rows(grid: &SweepGrid, ratios: &RatioMap) -> Vec<SweepRow> {
    let nw = grid.omega_values.len();
    grid.cells
        .iter()
        .enumerate()
        .map(|(k, cell)| {
            let (i, j) = (k / nw, k % nw);
            let base = SweepRow {
                gamma_deg: round_deg(grid.gamma_values[i]),
                omega_deg_s: round_deg(grid.omega_values[j]),
                dy_max_mm: None,
                dy_net_mm: None,
                dx_mm: None,
                eta: None,
                ratio: None,
                status: String::new(),
            };
            match cell {
                SweepCell::Done(m) => SweepRow {
                    dy_max_mm: Some(m.dy_max * 1e3),
                    dy_net_mm: Some(m.dy_net * 1e3),
                    dx_mm: Some(m.dx * 1e3),
                    eta: m.eta,
                    ratio: ratios.ratios[k],
                    status: if m.lifted_off { "ok".into() } else { "no_liftoff".into() },
                    ..base
                },
                SweepCell::Failed(msg) => SweepRow { status: msg.clone(), ..base },
            }
        })
        .collect()
}

/// Degrees with float noise from the radian round trip removed.
pub fn round_deg(rad: f64) -> f64 {
    (to_deg(rad) * 1e9).round() / 1e9
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    if rows.is_empty() {
        w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}

pub fn read_sweep_csv(bytes: &[u8]) -> Result<Vec<SweepRow>, Error> {
    csv::Reader::from_reader(bytes).deserialize().collect::<Result<_, _>>().map_err(csv_err)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeRecord {
    pub gamma_deg: f64,
    pub omega_deg_s: f64,
}

/// Sweep JSON: the rows plus the selected regimes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub gamma_deg: Vec<f64>,
    pub omega_deg_s: Vec<f64>,
    pub cells: Vec<SweepRow>,
    pub max_dy: Option<RegimeRecord>,
    pub max_eta: Option<RegimeRecord>,
    pub vertical_regime: Option<RegimeRecord>,
    pub lateral_regime: Option<RegimeRecord>,
    pub lateral_cells: usize,
}

impl SweepDocument {
    pub fn new(grid: &SweepGrid, ratios: &RatioMap) -> Self {
        let at = |c: Option<(usize, usize)>| {
            c.map(|(i, j)| RegimeRecord {
                gamma_deg: round_deg(grid.gamma_values[i]),
                omega_deg_s: round_deg(grid.omega_values[j]),
            })
        };
        Self {
            gamma_deg: grid.gamma_values.iter().map(|&g| round_deg(g)).collect(),
            omega_deg_s: grid.omega_values.iter().map(|&w| round_deg(w)).collect(),
            cells: sweep_rows(grid, ratios),
            max_dy: at(grid.argmax_dy()),
            max_eta: at(grid.argmax_eta()),
            vertical_regime: at(ratios.vertical_regime),
            lateral_regime: at(ratios.lateral_regime),
            lateral_cells: ratios.lateral_cells.len(),
        }
    }
}
