//! Run configuration in boundary units (degrees, millimeters, seconds).
//!
//! A configuration is a TOML file. Every key is optional and unknown keys are
//! rejected. Command-line flags are folded into the same structure before it
//! is resolved, so the echoed file reproduces the run exactly.

use std::path::{Path, PathBuf};

use climber_core::actuation::ControlMode;
use climber_core::analysis::{design_row, DesignRow, MassModel, OptimizeOptions, RegimeSelection, SweepSpec};
use climber_core::gait::PlanSettings;
use climber_core::hybrid::{JointLimit, RestPosture, RestTime, SimOptions, WorkMode};
use climber_core::math::{deg, rpm};
use climber_core::ode::Tolerances;
use climber_core::{ClimberParams, PulsePolicy};
use serde::{Deserialize, Serialize};

use crate::Error;

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "is_default")]
    pub design: DesignConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub params: ParamConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub policy: PolicyConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub sim: SimConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub sweep: SweepConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub optimize: OptimizeConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub gait: GaitConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub output: OutputConfig,
}

/// Start from one of the published optimized designs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    /// `"50:1"`, `"75:1"` or `"100:1"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table1_row: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gravity_m_s2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_angle_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link_length_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drag_x_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drag_y_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drag_band_mm_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inertia_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub supply_voltage: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub motor_voltage: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_load_rpm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stall_torque_nmm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub torque_constant_nm_a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_max_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_c_deg_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_e_deg_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rest_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kd: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Toggle {
    On,
    Off,
}

impl Toggle {
    pub fn is_on(self) -> bool {
        self == Toggle::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkConfig {
    Rectified,
    Signed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RestConfig {
    /// Rest so that each pulse plus flight fills `1 / cycle_hz`.
    Cycle,
    /// Use each pulse's own rest time.
    Policy,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Drag in both phases. Defaults to on, except `optimize` which defaults to off.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drag: Option<Toggle>,
    /// Drag during flight only; overrides `drag` for that phase.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flight_drag: Option<Toggle>,
    /// 1 kHz zero-order-hold control and ±90° joint stops.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hardware: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub work: Option<WorkConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slip_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rest: Option<RestConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_hz: Option<f64>,
    /// `hanging` (default) or `held`: the posture each later gait pulse starts from.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rest_posture: Option<PostureConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PostureConfig {
    Hanging,
    Held,
}

/// Inclusive arithmetic range `start, start + step, ..., <= stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.start + k as f64 * self.step).collect()
    }

    fn check(&self, key: &str) -> Result<(), Error> {
        let ok = [self.start, self.stop, self.step].iter().all(|v| v.is_finite())
            && self.step > 0.0
            && self.stop >= self.start
            && (self.stop - self.start) / self.step < 1e6;
        if ok {
            Ok(())
        } else {
            Err(Error::config(key, "needs finite start <= stop and step > 0"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_deg: Option<Axis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_deg_s: Option<Axis>,
    /// Largest vertical-to-lateral ratio counted as the lateral regime.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lateral_max_ratio: Option<f64>,
    /// Smallest per-jump lateral displacement for the lateral regime.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lateral_min_dx_mm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    /// Design rows to optimize; all three by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub motors: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub starts: Option<usize>,
    /// Relative spread of the extra start points around each row.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_evaluations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diameter_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_model: Option<MassModel>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaitConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub script: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertical_gamma_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertical_omega_deg_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lateral_gamma_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lateral_omega_deg_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for sweeps and multi-start runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallel: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::config(origin, e.message().trim()).with_span(text, e.span()))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    /// Resolves into simulator settings. `drag_default` is the drag setting
    /// used when neither the file nor a flag chooses one.
    pub fn resolve(&self, drag_default: bool) -> Result<Resolved, Error> {
        let row = match &self.design.table1_row {
            Some(label) => Some(
                design_row(label).ok_or_else(|| Error::config("design.table1_row", format!("unknown row {label:?}; expected 50:1, 75:1 or 100:1")))?,
            ),
            None => None,
        };

        let mut params = ClimberParams::default();
        let mut policy = PulsePolicy::default();
        if let Some(r) = &row {
            params = r.design.params(&params, &r.motor(&params));
            policy = r.design.policy();
        }
        let p = &self.params;
        let set = |slot: &mut f64, v: Option<f64>, f: fn(f64) -> f64| {
            if let Some(v) = v {
                *slot = f(v);
            }
        };
        set(&mut params.mass, p.mass_g, |v| v * 1e-3);
        set(&mut params.gravity, p.gravity_m_s2, |v| v);
        set(&mut params.wall_angle, p.wall_angle_deg, deg);
        set(&mut params.link_length, p.link_length_mm, |v| v * 1e-3);
        set(&mut params.drag_x, p.drag_x_n, |v| v);
        set(&mut params.drag_y, p.drag_y_n, |v| v);
        set(&mut params.drag_band, p.drag_band_mm_s, |v| v * 1e-3);
        set(&mut params.inertia_scale, p.inertia_scale, |v| v);
        set(&mut params.supply_voltage, p.supply_voltage, |v| v);
        set(&mut params.motor_voltage, p.motor_voltage, |v| v);
        set(&mut params.no_load_speed, p.no_load_rpm, rpm);
        set(&mut params.stall_torque, p.stall_torque_nmm, |v| v * 1e-3);
        set(&mut params.torque_constant, p.torque_constant_nm_a, |v| v);
        params.validate().map_err(|e| Error::config("params", e.to_string()))?;

        let q = &self.policy;
        set(&mut policy.gamma_max, q.gamma_max_deg, deg);
        set(&mut policy.omega_c, q.omega_c_deg_s, deg);
        set(&mut policy.omega_e, q.omega_e_deg_s, deg);
        set(&mut policy.rest_time, q.rest_s, |v| v);
        set(&mut policy.kp, q.kp, |v| v);
        set(&mut policy.kd, q.kd, |v| v);
        policy.validate().map_err(|e| Error::config("policy", e.to_string()))?;

        let sim = self.sim_options(drag_default)?;
        let sweep = self.sweep_spec()?;
        let optimize = self.optimize_settings()?;
        let plan = self.plan_settings(&policy)?;
        let parallel = self.output.parallel.unwrap_or(1);
        if parallel == 0 {
            return Err(Error::config("output.parallel", "must be at least 1"));
        }
        Ok(Resolved {
            params,
            policy,
            sim,
            sweep,
            regimes: self.regime_selection(),
            optimize,
            plan,
            row,
            out_dir: self.output.out_dir.clone().unwrap_or_else(|| PathBuf::from(".")),
            parallel,
        })
    }

    fn sim_options(&self, drag_default: bool) -> Result<SimOptions, Error> {
        let s = &self.sim;
        let mut o = SimOptions::default();
        let drag = s.drag.map(Toggle::is_on).unwrap_or(drag_default);
        o.drag_in_stance = drag;
        o.drag_in_flight = s.flight_drag.map(Toggle::is_on).unwrap_or(drag);
        if s.hardware == Some(true) {
            o.control = ControlMode::ZeroOrderHold { period: 1e-3 };
            o.joint_limit = Some(JointLimit::default());
        }
        if let Some(w) = s.work {
            o.work = match w {
                WorkConfig::Rectified => WorkMode::Rectified,
                WorkConfig::Signed => WorkMode::Signed,
            };
        }
        if let Some(v) = s.slip_mm {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config("sim.slip_mm", "must be >= 0"));
            }
            o.slip = v * 1e-3;
        }
        if let Some(hz) = s.sample_hz {
            if !(hz.is_finite() && hz > 0.0) {
                return Err(Error::config("sim.sample_hz", "must be > 0"));
            }
            o.sample_dt = Some(1.0 / hz);
        }
        let base = Tolerances::default();
        let rtol = s.rtol.unwrap_or(base.rtol);
        let atol = s.atol.unwrap_or(if s.rtol.is_some() { rtol * 1e-2 } else { base.atol });
        if !(rtol > 0.0 && rtol < 1.0 && atol > 0.0 && atol.is_finite()) {
            return Err(Error::config("sim.rtol", "tolerances must lie in (0, 1)"));
        }
        o.tol = Tolerances { rtol, atol, ..base };
        let hz = s.cycle_hz.unwrap_or(1.3);
        if !(hz.is_finite() && hz > 0.0) {
            return Err(Error::config("sim.cycle_hz", "must be > 0"));
        }
        o.rest = match s.rest.unwrap_or(RestConfig::Cycle) {
            RestConfig::Cycle => RestTime::Cycle { frequency: hz },
            RestConfig::Policy => RestTime::Policy,
        };
        if let Some(p) = s.rest_posture {
            o.rest_posture = match p {
                PostureConfig::Hanging => RestPosture::Hanging,
                PostureConfig::Held => RestPosture::Held,
            };
        }
        Ok(o)
    }

    fn sweep_spec(&self) -> Result<SweepSpec, Error> {
        let mut spec = SweepSpec::default();
        if let Some(a) = &self.sweep.gamma_deg {
            a.check("sweep.gamma_deg")?;
            spec.gamma_values = a.values().into_iter().map(deg).collect();
            if spec.gamma_values.iter().any(|g| *g <= 0.0 || *g >= std::f64::consts::PI) {
                return Err(Error::config("sweep.gamma_deg", "values must lie in (0, 180)"));
            }
        }
        if let Some(a) = &self.sweep.omega_deg_s {
            a.check("sweep.omega_deg_s")?;
            spec.omega_values = a.values().into_iter().map(deg).collect();
            if spec.omega_values.contains(&0.0) {
                return Err(Error::config("sweep.omega_deg_s", "values must be nonzero"));
            }
        }
        for (key, v) in [("sweep.lateral_max_ratio", self.sweep.lateral_max_ratio), ("sweep.lateral_min_dx_mm", self.sweep.lateral_min_dx_mm)] {
            if v.is_some_and(|v| !v.is_finite()) {
                return Err(Error::config(key, "must be finite"));
            }
        }
        Ok(spec)
    }

    fn regime_selection(&self) -> RegimeSelection {
        let mut sel = RegimeSelection::default();
        if let Some(v) = self.sweep.lateral_max_ratio {
            sel.max_ratio = v;
        }
        if let Some(v) = self.sweep.lateral_min_dx_mm {
            sel.min_lateral = v * 1e-3;
        }
        sel
    }

    fn optimize_settings(&self) -> Result<OptimizeSettings, Error> {
        let c = &self.optimize;
        let labels = c.motors.clone().unwrap_or_else(|| vec!["50:1".into(), "75:1".into(), "100:1".into()]);
        if labels.is_empty() {
            return Err(Error::config("optimize.motors", "needs at least one row"));
        }
        let rows = labels
            .iter()
            .map(|l| design_row(l).ok_or_else(|| Error::config("optimize.motors", format!("unknown row {l:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let starts = c.starts.unwrap_or(8);
        if starts == 0 {
            return Err(Error::config("optimize.starts", "must be at least 1"));
        }
        let spread = c.spread.unwrap_or(0.2);
        if !(0.0..1.0).contains(&spread) {
            return Err(Error::config("optimize.spread", "must lie in [0, 1)"));
        }
        let mut nm = OptimizeOptions::default();
        if let Some(v) = c.max_evaluations {
            nm.max_evaluations = v;
        }
        if let Some(v) = c.max_iterations {
            nm.max_iterations = v;
        }
        if let Some(v) = c.diameter_tol {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config("optimize.diameter_tol", "must be > 0"));
            }
            nm.diameter_tol = v;
        }
        Ok(OptimizeSettings { rows, starts, spread, nelder_mead: nm, mass: c.mass_model.unwrap_or_default() })
    }

    fn plan_settings(&self, template: &PulsePolicy) -> Result<PlanSettings, Error> {
        let g = &self.gait;
        let mut plan = PlanSettings { template: *template, ..PlanSettings::default() };
        let pick = |key: &str, v: Option<f64>, slot: &mut f64| -> Result<(), Error> {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::config(key, "must be > 0"));
                }
                *slot = deg(v);
            }
            Ok(())
        };
        pick("gait.vertical_gamma_deg", g.vertical_gamma_deg, &mut plan.vertical.gamma_max)?;
        pick("gait.vertical_omega_deg_s", g.vertical_omega_deg_s, &mut plan.vertical.omega_c)?;
        pick("gait.lateral_gamma_deg", g.lateral_gamma_deg, &mut plan.lateral.gamma_max)?;
        pick("gait.lateral_omega_deg_s", g.lateral_omega_deg_s, &mut plan.lateral.omega_c)?;
        Ok(plan)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeSettings {
    pub rows: Vec<DesignRow>,
    pub starts: usize,
    pub spread: f64,
    pub nelder_mead: OptimizeOptions,
    pub mass: MassModel,
}

/// Configuration translated to SI simulator settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub params: ClimberParams,
    pub policy: PulsePolicy,
    pub sim: SimOptions,
    pub sweep: SweepSpec,
    pub regimes: RegimeSelection,
    pub optimize: OptimizeSettings,
    pub plan: PlanSettings,
    pub row: Option<DesignRow>,
    pub out_dir: PathBuf,
    pub parallel: usize,
}
