//! Stance/flight hybrid simulation of single jumps and multi-jump gaits.
//!
//! A jump starts pinned at the head with the pulse clock at zero. Stance
//! ends when the vertical head reaction `Fy_1` falls to zero; the state is
//! then mapped onto the free-head coordinates and flight runs until the head
//! tip's vertical velocity falls to zero (apex). At the apex the head
//! re-attaches, slipping down by a fixed distance, with all rates zeroed.
//!
//! The ODE state carries the actuator work integral as its last component,
//! so efficiency is integrated to the same accuracy as the motion.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::actuation::{pd_torques, reference, ControlMode, JointController, PulsePolicy};
use crate::dynamics::{
    flight_accel, head_vertical_velocity, stance_accel, DynamicsError, HybridState, JointTorques, Phase,
    ReactionForces,
};
use crate::math::{cos, sin};
use crate::ode::{integrate, Event, EventArming, OdeError, OdeSystem, SampleGrid, Tolerances};
use crate::params::ClimberParams;

/// How motor power enters the work integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum WorkMode {
    /// `Σ max(τ_j·γ̇_j, 0)`: negative work is not recovered.
    Rectified,
    /// `Σ τ_j·γ̇_j`.
    Signed,
}

/// Rest time between pulses of a gait.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RestTime {
    /// Use each policy's `rest_time`.
    Policy,
    /// `max(0, 1/f − t_compress − t_extend − t_flight)` per pulse.
    Cycle { frequency: f64 },
}

/// Hard stop emulation for the ±90° joint range of the hardware.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JointLimit {
    /// Limit on `|γ_j|` (rad).
    pub range: f64,
    /// Stop stiffness (N·m/rad).
    pub stiffness: f64,
    /// Stop damping (N·m·s/rad), active only while past the limit.
    pub damping: f64,
}

impl Default for JointLimit {
    fn default() -> Self {
        // Close to critical damping for one link swinging about its joint.
        Self { range: FRAC_PI_2, stiffness: 50.0, damping: 1.0 }
    }
}

impl JointLimit {
    fn torque(&self, gamma: f64, gamma_dot: f64) -> f64 {
        if gamma > self.range {
            -self.stiffness * (gamma - self.range) - self.damping * gamma_dot
        } else if gamma < -self.range {
            -self.stiffness * (gamma + self.range) - self.damping * gamma_dot
        } else {
            0.0
        }
    }
}

/// Simulation settings shared by single jumps, gaits and sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimOptions {
    pub tol: Tolerances,
    pub drag_in_stance: bool,
    pub drag_in_flight: bool,
    pub work: WorkMode,
    pub control: ControlMode,
    /// `Some` enables the hardware joint stops.
    pub joint_limit: Option<JointLimit>,
    /// Vertical slip on re-attachment (m).
    pub slip: f64,
    /// Output sampling interval; `None` records only phase boundaries.
    pub sample_dt: Option<f64>,
    /// Stance is abandoned this long after the extension ramp ends (s).
    pub stance_timeout: f64,
    /// Longest allowed flight (s).
    pub flight_timeout: f64,
    pub rest: RestTime,
    /// Posture at the start of each later pulse of a gait.
    pub rest_posture: RestPosture,
}

/// What the chain does while attached between pulses of a gait.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RestPosture {
    /// Joints regulated back to zero and the chain hanging still below the pin.
    Hanging,
    /// The re-attachment posture is kept unchanged.
    Held,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            drag_in_stance: true,
            drag_in_flight: true,
            work: WorkMode::Rectified,
            control: ControlMode::Continuous,
            joint_limit: None,
            slip: 0.005,
            sample_dt: Some(0.005),
            stance_timeout: 0.25,
            flight_timeout: 2.0,
            rest: RestTime::Cycle { frequency: 1.3 },
            rest_posture: RestPosture::Hanging,
        }
    }
}

impl SimOptions {
    /// Settings for the drag-free design study: no drag, no slip, no samples.
    pub fn drag_free() -> Self {
        Self {
            drag_in_stance: false,
            drag_in_flight: false,
            slip: 0.0,
            sample_dt: None,
            ..Self::default()
        }
    }

    pub fn with_drag(mut self, on: bool) -> Self {
        self.drag_in_stance = on;
        self.drag_in_flight = on;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("step size underflow at t = {t} ({phase:?})")]
    StepUnderflow { t: f64, phase: Phase },
    #[error("non-finite solution at t = {t} ({phase:?})")]
    NonFinite { t: f64, phase: Phase },
    #[error("no apex within {limit} s of lift-off")]
    FlightTimeout { limit: f64 },
    #[error(transparent)]
    Params(#[from] crate::params::ParamError),
    #[error(transparent)]
    Policy(#[from] crate::actuation::ActuationError),
    #[error("expected a {expected:?} state")]
    WrongPhase { expected: Phase },
    #[error("pulse sequence is empty")]
    EmptyGait,
}

fn map_ode(e: OdeError<DynamicsError>, phase: Phase) -> SimError {
    match e {
        OdeError::StepUnderflow { t } => SimError::StepUnderflow { t, phase },
        OdeError::NonFinite { t } => SimError::NonFinite { t, phase },
        OdeError::System(d) => SimError::Dynamics(d),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EventKind {
    LiftOff,
    Apex,
    Reattach,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::LiftOff => "lift_off",
            EventKind::Apex => "apex",
            EventKind::Reattach => "reattach",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseEvent {
    pub t: f64,
    pub kind: EventKind,
    /// Event function value at the located point (`Fy_1` or head `ẏ`).
    pub residual: f64,
    /// The event function jumped across zero at a pulse breakpoint instead
    /// of crossing it continuously; `residual` is then the right limit.
    pub at_breakpoint: bool,
}

/// One recorded instant.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sample {
    pub state: HybridState,
    /// Saturated motor torques.
    pub torques: JointTorques,
    pub forces: ReactionForces,
    /// Actuator work accumulated since the start of the trajectory (J).
    pub work: f64,
}

impl Sample {
    pub fn t(&self) -> f64 {
        self.state.t
    }
}

/// Time-ordered samples plus phase events.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<PhaseEvent>,
}

impl Trajectory {
    fn push(&mut self, s: Sample) {
        match self.samples.last() {
            Some(last) if last.t() >= s.t() => {}
            _ => self.samples.push(s),
        }
    }

    fn push_final(&mut self, s: Sample) {
        if let Some(last) = self.samples.last_mut() {
            if last.t() >= s.t() {
                *last = s;
                return;
            }
        }
        self.samples.push(s);
    }

    pub fn first(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn event(&self, kind: EventKind) -> Option<&PhaseEvent> {
        self.events.iter().find(|e| e.kind == kind)
    }

    /// Appends `other`, shifting its work values so they stay cumulative.
    pub fn extend_from(&mut self, other: &Trajectory) {
        let offset = self.samples.last().map(|s| s.work).unwrap_or(0.0)
            - other.samples.first().map(|s| s.work).unwrap_or(0.0);
        for s in &other.samples {
            let mut s = *s;
            s.work += offset;
            self.push(s);
        }
        self.events.extend_from_slice(&other.events);
    }
}

/// Summary of one jump. Lengths in meters, times in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JumpMetrics {
    pub lifted_off: bool,
    /// Head-tip rise from the stance pin to the apex.
    pub dy_max: f64,
    /// `dy_max` minus re-attachment slip.
    pub dy_net: f64,
    /// Head-tip lateral displacement from the stance pin to the apex.
    pub dx: f64,
    /// `3·m·g·cos(α)·dy_max / work_in`; `None` without input work.
    pub eta: Option<f64>,
    /// Same with `dy_net`.
    pub eta_net: Option<f64>,
    /// Actuator work from pulse start to apex (J).
    pub work_in: f64,
    pub t_liftoff: f64,
    pub t_flight: f64,
    /// Pulse start to apex (or to the end of stance without lift-off).
    pub t_jump: f64,
}

impl JumpMetrics {
    /// Input work per unit weight and net height: `1 / eta_net`.
    pub fn specific_resistance(&self) -> Option<f64> {
        self.eta_net.filter(|e| *e > 0.0).map(|e| 1.0 / e)
    }
}

/// Per-phase model shared by the stance and flight right-hand sides.
struct Model {
    params: ClimberParams,
    controller: JointController,
    pulse_start: f64,
    pin: [f64; 2],
    /// PD command latched at the current hold period (zero-order hold).
    held: Option<[f64; 2]>,
    limit: Option<JointLimit>,
    work: WorkMode,
}

struct Drive {
    applied: [f64; 2],
    total: [f64; 2],
    power: f64,
}

impl Model {
    fn drive(&self, state: &HybridState) -> Drive {
        let gamma = state.joint_angles();
        let gamma_dot = state.joint_rates();
        let out = match self.held {
            Some(cmd) => self.controller.apply(cmd, gamma_dot),
            None => self.controller.torques(state.t - self.pulse_start, gamma, gamma_dot),
        };
        let mut total = out.applied;
        if let Some(lim) = &self.limit {
            for j in 0..2 {
                total[j] += lim.torque(gamma[j], gamma_dot[j]);
            }
        }
        let mut power = 0.0;
        for j in 0..2 {
            let p = out.applied[j] * gamma_dot[j];
            power += match self.work {
                WorkMode::Rectified => p.max(0.0),
                WorkMode::Signed => p,
            };
        }
        Drive { applied: out.applied, total, power }
    }

    fn latch(&mut self, state: &HybridState) {
        if let ControlMode::ZeroOrderHold { .. } = self.controller.mode {
            let r = reference(state.t - self.pulse_start, &self.controller.policy).unwrap_or_default();
            let p = &self.controller.policy;
            self.held = Some(pd_torques(state.joint_angles(), state.joint_rates(), r, p.kp, p.kd));
        }
    }
}

/// Pinned-head system. State: `θ_1..3, θ̇_1..3, W`.
struct StanceSystem(Model);
/// Free-head system. State: `θ_1..3, x, y, θ̇_1..3, ẋ, ẏ, W`.
struct FlightSystem(Model);

trait PhaseSystem<const N: usize>: OdeSystem<N, Error = DynamicsError> {
    const PHASE: Phase;
    fn model(&mut self) -> &mut Model;
    fn state(&self, t: f64, y: &[f64; N]) -> HybridState;
    fn sample(&self, t: f64, y: &[f64; N]) -> Result<Sample, DynamicsError>;
    fn event(&self, t: f64, y: &[f64; N]) -> Result<f64, DynamicsError>;
}

impl OdeSystem<7> for StanceSystem {
    type Error = DynamicsError;
    fn rhs(&self, t: f64, y: &[f64; 7]) -> Result<[f64; 7], DynamicsError> {
        let s = self.state(t, y);
        let d = self.0.drive(&s);
        let a = stance_accel(&s, &JointTorques(d.total), &self.0.params)?;
        Ok([y[3], y[4], y[5], a.theta_ddot[0], a.theta_ddot[1], a.theta_ddot[2], d.power])
    }
}

impl PhaseSystem<7> for StanceSystem {
    const PHASE: Phase = Phase::Stance;
    fn model(&mut self) -> &mut Model {
        &mut self.0
    }
    fn state(&self, t: f64, y: &[f64; 7]) -> HybridState {
        HybridState::stance(t, [y[0], y[1], y[2]], [y[3], y[4], y[5]], self.0.pin)
    }
    fn sample(&self, t: f64, y: &[f64; 7]) -> Result<Sample, DynamicsError> {
        let s = self.state(t, y);
        let d = self.0.drive(&s);
        let a = stance_accel(&s, &JointTorques(d.total), &self.0.params)?;
        Ok(Sample { state: s, torques: JointTorques(d.applied), forces: a.forces, work: y[6] })
    }
    fn event(&self, t: f64, y: &[f64; 7]) -> Result<f64, DynamicsError> {
        let s = self.state(t, y);
        let d = self.0.drive(&s);
        let a = stance_accel(&s, &JointTorques(d.total), &self.0.params)?;
        Ok(a.forces.head_normal().unwrap_or(0.0))
    }
}

impl OdeSystem<11> for FlightSystem {
    type Error = DynamicsError;
    fn rhs(&self, t: f64, y: &[f64; 11]) -> Result<[f64; 11], DynamicsError> {
        let s = self.state(t, y);
        let d = self.0.drive(&s);
        let a = flight_accel(&s, &JointTorques(d.total), &self.0.params)?;
        Ok([
            y[5],
            y[6],
            y[7],
            y[8],
            y[9],
            a.theta_ddot[0],
            a.theta_ddot[1],
            a.theta_ddot[2],
            a.head_link_accel[0],
            a.head_link_accel[1],
            d.power,
        ])
    }
}

impl PhaseSystem<11> for FlightSystem {
    const PHASE: Phase = Phase::Flight;
    fn model(&mut self) -> &mut Model {
        &mut self.0
    }
    fn state(&self, t: f64, y: &[f64; 11]) -> HybridState {
        let mut s = HybridState::flight(t, [y[0], y[1], y[2]], [y[5], y[6], y[7]], [y[3], y[4]], [y[8], y[9]]);
        s.pin = self.0.pin;
        s
    }
    fn sample(&self, t: f64, y: &[f64; 11]) -> Result<Sample, DynamicsError> {
        let s = self.state(t, y);
        let d = self.0.drive(&s);
        let a = flight_accel(&s, &JointTorques(d.total), &self.0.params)?;
        Ok(Sample { state: s, torques: JointTorques(d.applied), forces: a.forces, work: y[10] })
    }
    fn event(&self, t: f64, y: &[f64; 11]) -> Result<f64, DynamicsError> {
        Ok(head_vertical_velocity(&self.state(t, y), &self.0.params))
    }
}

fn stance_vector(s: &HybridState, work: f64) -> [f64; 7] {
    [s.theta[0], s.theta[1], s.theta[2], s.theta_dot[0], s.theta_dot[1], s.theta_dot[2], work]
}

fn flight_vector(s: &HybridState, work: f64) -> [f64; 11] {
    [
        s.theta[0],
        s.theta[1],
        s.theta[2],
        s.head_link_pos[0],
        s.head_link_pos[1],
        s.theta_dot[0],
        s.theta_dot[1],
        s.theta_dot[2],
        s.head_link_vel[0],
        s.head_link_vel[1],
        work,
    ]
}

/// How a phase integration ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEnd<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    /// `Some(residual)` if the terminal event fired.
    pub event: Option<f64>,
    /// The event fired at the start of a segment other than the first.
    pub at_breakpoint: bool,
}

/// Integrates one phase across the pulse breakpoints, stopping at the
/// phase's terminal event or at `t_end`.
fn run_phase<S, const N: usize>(
    sys: &mut S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &SimOptions,
    with_event: bool,
    traj: &mut Trajectory,
) -> Result<PhaseEnd<N>, SimError>
where
    S: PhaseSystem<N>,
{
    let (pulse_start, policy, mode) = {
        let m = sys.model();
        (m.pulse_start, m.controller.policy, m.controller.mode)
    };
    let [b1, b2] = policy.breakpoints();
    let hold_period = match mode {
        ControlMode::ZeroOrderHold { period } if period > 0.0 => Some(period),
        _ => None,
    };

    let next_break = |t: f64| -> f64 {
        let mut nb = t_end;
        for b in [pulse_start + b1, pulse_start + b2] {
            if b > t * (1.0 + 1e-15) + 1e-15 && b < nb {
                nb = b;
            }
        }
        if let Some(p) = hold_period {
            let k = libm::floor((t - pulse_start) / p + 1e-9) + 1.0;
            let b = pulse_start + k * p;
            if b < nb {
                nb = b;
            }
        }
        nb
    };

    let grid = opts.sample_dt.map(|dt| SampleGrid { origin: 0.0, dt });
    let first = sys.sample(t0, &y0)?;
    traj.push(first);

    let mut t = t0;
    let mut y = y0;
    let mut h: Option<f64> = None;
    let mut first_segment = true;
    loop {
        let seg_end = next_break(t);
        {
            let s = sys.state(t, &y);
            sys.model().latch(&s);
        }
        let sys_ref: &S = sys;
        let arming = if S::PHASE == Phase::Flight && first_segment {
            EventArming::AfterPositive
        } else {
            EventArming::Immediate
        };
        let event = if with_event {
            Some(Event { g: |tt: f64, yy: &[f64; N]| sys_ref.event(tt, yy), arming })
        } else {
            None
        };
        let seg_start = t;
        let mut recorded: Vec<Sample> = Vec::new();
        let out = integrate(sys_ref, t, y, seg_end, h, &opts.tol, event, grid, |tt, yy| {
            recorded.push(sys_ref.sample(tt, yy)?);
            Ok(())
        })
        .map_err(|e| map_ode(e, S::PHASE))?;
        for s in recorded {
            traj.push(s);
        }
        // A discontinuous event function at a segment boundary leaves the
        // root collapsed onto that boundary from either side.
        let at_breakpoint = out.event
            && ((!first_segment && out.t == seg_start) || (seg_end < t_end && (out.t - seg_end).abs() <= 1e-12));
        first_segment = false;
        h = Some(out.next_step);
        t = out.t;
        y = out.y;
        if out.event {
            traj.push_final(sys.sample(t, &y)?);
            return Ok(PhaseEnd { t, y, event: out.event_value.or(Some(0.0)), at_breakpoint });
        }
        traj.push(sys.sample(t, &y)?);
        if t >= t_end {
            return Ok(PhaseEnd { t, y, event: None, at_breakpoint: false });
        }
    }
}

/// Result of [`integrate_phase`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRun {
    pub trajectory: Trajectory,
    pub end_state: HybridState,
    /// Final value of the work integral.
    pub work: f64,
    /// `Some(residual)` if the phase's terminal event fired before `t_end`.
    pub event: Option<f64>,
    pub at_breakpoint: bool,
}

/// Integrates a single phase from `start` until its terminal event
/// (lift-off in stance, apex in flight) or `t_end`.
///
/// The pulse clock starts at `pulse_start`. Drag follows the phase's
/// setting in `opts`.
pub fn integrate_phase(
    start: &HybridState,
    params: &ClimberParams,
    policy: &PulsePolicy,
    pulse_start: f64,
    t_end: f64,
    opts: &SimOptions,
) -> Result<PhaseRun, SimError> {
    params.validate()?;
    policy.validate()?;
    let mut controller = JointController::new(*policy, params.motor());
    controller.mode = opts.control;
    let model = |drag: bool| Model {
        params: phase_params(params, drag),
        controller,
        pulse_start,
        pin: start.pin,
        held: None,
        limit: opts.joint_limit,
        work: opts.work,
    };
    let mut trajectory = Trajectory::default();
    match start.phase {
        Phase::Stance => {
            let mut sys = StanceSystem(model(opts.drag_in_stance));
            let end = run_phase(&mut sys, start.t, stance_vector(start, 0.0), t_end, opts, true, &mut trajectory)?;
            Ok(PhaseRun {
                end_state: sys.state(end.t, &end.y),
                work: end.y[6],
                event: end.event,
                at_breakpoint: end.at_breakpoint,
                trajectory,
            })
        }
        Phase::Flight => {
            let mut sys = FlightSystem(model(opts.drag_in_flight));
            let end = run_phase(&mut sys, start.t, flight_vector(start, 0.0), t_end, opts, true, &mut trajectory)?;
            Ok(PhaseRun {
                end_state: sys.state(end.t, &end.y),
                work: end.y[10],
                event: end.event,
                at_breakpoint: end.at_breakpoint,
                trajectory,
            })
        }
    }
}

/// Maps the end-of-stance state onto flight coordinates.
///
/// Angles and rates carry over; the link-1 center is placed at
/// `pin + (L/2)(cos θ_1, sin θ_1)` with velocity `(L/2)θ̇_1(−sin θ_1, cos θ_1)`.
pub fn stance_to_flight(s: &HybridState, params: &ClimberParams) -> Result<HybridState, SimError> {
    if s.phase != Phase::Stance {
        return Err(SimError::WrongPhase { expected: Phase::Stance });
    }
    let h = 0.5 * params.link_length;
    let (sn, cs) = (sin(s.theta[0]), cos(s.theta[0]));
    let w = s.theta_dot[0];
    let mut f = HybridState::flight(
        s.t,
        s.theta,
        s.theta_dot,
        [s.pin[0] + h * cs, s.pin[1] + h * sn],
        [-h * sn * w, h * cs * w],
    );
    f.pin = s.pin;
    Ok(f)
}

/// Re-attaches the head at its current tip, `slip` meters lower, with all
/// rates zeroed.
pub fn flight_to_stance(s: &HybridState, slip: f64, params: &ClimberParams) -> Result<HybridState, SimError> {
    if s.phase != Phase::Flight {
        return Err(SimError::WrongPhase { expected: Phase::Flight });
    }
    let (tip, _) = s.head_tip(params);
    Ok(HybridState::stance(s.t, s.theta, [0.0; 3], [tip[0], tip[1] - slip]))
}

/// Metrics of one jump recorded in `traj`.
///
/// Displacements run from the head tip of the first sample to the head tip
/// of the last sample; the last sample is the apex when the jump lifted off.
pub fn compute_metrics(traj: &Trajectory, params: &ClimberParams, slip: f64) -> JumpMetrics {
    let (first, last) = match (traj.first(), traj.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return JumpMetrics::default(),
    };
    let liftoff = traj.event(EventKind::LiftOff);
    let apex = traj.event(EventKind::Apex);
    let work_in = last.work - first.work;
    let weight = params.total_mass() * params.wall_gravity();

    let (dy_max, dx, dy_net, t_liftoff, t_flight) = match (liftoff, apex) {
        (Some(lo), Some(ap)) => {
            let (p0, _) = first.state.head_tip(params);
            let (p1, _) = last.state.head_tip(params);
            let dy = p1[1] - p0[1];
            (dy, p1[0] - p0[0], dy - slip, lo.t - first.t(), ap.t - lo.t)
        }
        _ => (0.0, 0.0, 0.0, 0.0, 0.0),
    };
    let efficiency = |dy: f64| if work_in > 0.0 { Some(weight * dy / work_in) } else { None };
    JumpMetrics {
        lifted_off: liftoff.is_some() && apex.is_some(),
        dy_max,
        dy_net,
        dx,
        eta: efficiency(dy_max),
        eta_net: efficiency(dy_net),
        work_in,
        t_liftoff,
        t_flight,
        t_jump: last.t() - first.t(),
    }
}

/// Result of one jump started from an arbitrary stance state.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOutcome {
    pub trajectory: Trajectory,
    pub metrics: JumpMetrics,
    /// Stance state after re-attachment; equal to the end of stance when
    /// the chain never lifted off.
    pub end_state: HybridState,
}

fn phase_params(params: &ClimberParams, drag: bool) -> ClimberParams {
    if drag {
        *params
    } else {
        params.drag_free()
    }
}

/// Runs one pulse from a stance state whose time marks the pulse start.
pub fn jump_from(
    start: &HybridState,
    params: &ClimberParams,
    policy: &PulsePolicy,
    opts: &SimOptions,
) -> Result<JumpOutcome, SimError> {
    if start.phase != Phase::Stance {
        return Err(SimError::WrongPhase { expected: Phase::Stance });
    }
    params.validate()?;
    policy.validate()?;

    let mut controller = JointController::new(*policy, params.motor());
    controller.mode = opts.control;
    let mut traj = Trajectory::default();
    let t0 = start.t;
    let [_, ext_end] = policy.breakpoints();

    let mut stance = StanceSystem(Model {
        params: phase_params(params, opts.drag_in_stance),
        controller,
        pulse_start: t0,
        pin: start.pin,
        held: None,
        limit: opts.joint_limit,
        work: opts.work,
    });
    let stance_end = t0 + ext_end + opts.stance_timeout;
    let end = run_phase(&mut stance, t0, stance_vector(start, 0.0), stance_end, opts, true, &mut traj)?;
    let lift_state = stance.state(end.t, &end.y);

    let Some(fy_residual) = end.event else {
        let metrics = compute_metrics(&traj, params, opts.slip);
        return Ok(JumpOutcome { trajectory: traj, metrics, end_state: lift_state });
    };
    traj.events.push(PhaseEvent {
        t: end.t,
        kind: EventKind::LiftOff,
        residual: fy_residual,
        at_breakpoint: end.at_breakpoint,
    });

    let flight_start = stance_to_flight(&lift_state, params)?;
    let mut flight = FlightSystem(Model {
        params: phase_params(params, opts.drag_in_flight),
        controller,
        pulse_start: t0,
        pin: start.pin,
        held: None,
        limit: opts.joint_limit,
        work: opts.work,
    });
    let y0 = flight_vector(&flight_start, end.y[6]);
    // The stance sample at lift-off stays; flight samples follow it.
    let mut flight_traj = Trajectory::default();
    let fend = run_phase(&mut flight, end.t, y0, end.t + opts.flight_timeout, opts, true, &mut flight_traj)?;
    let Some(vy_residual) = fend.event else {
        return Err(SimError::FlightTimeout { limit: opts.flight_timeout });
    };
    for s in flight_traj.samples.into_iter().skip(1) {
        traj.push(s);
    }
    let apex = flight.state(fend.t, &fend.y);
    if fend.t == end.t {
        // Head moved down immediately: the apex is the lift-off point.
        traj.push_final(flight.sample(fend.t, &fend.y)?);
    }
    traj.events.push(PhaseEvent {
        t: fend.t,
        kind: EventKind::Apex,
        residual: vy_residual,
        at_breakpoint: fend.at_breakpoint,
    });

    let metrics = compute_metrics(&traj, params, opts.slip);
    let end_state = flight_to_stance(&apex, opts.slip, params)?;
    traj.events.push(PhaseEvent { t: fend.t, kind: EventKind::Reattach, residual: 0.0, at_breakpoint: false });
    Ok(JumpOutcome { trajectory: traj, metrics, end_state })
}

/// One jump from the chain hanging straight down at rest from a pin at the origin.
pub fn simulate_jump(
    params: &ClimberParams,
    policy: &PulsePolicy,
    opts: &SimOptions,
) -> Result<(Trajectory, JumpMetrics), SimError> {
    let out = jump_from(&HybridState::hanging([0.0; 2]), params, policy, opts)?;
    Ok((out.trajectory, out.metrics))
}

/// Result of a pulse sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitOutcome {
    pub trajectory: Trajectory,
    pub jumps: Vec<JumpMetrics>,
    /// Sum of per-jump lateral displacements (m).
    pub total_dx: f64,
    /// Sum of per-jump net vertical displacements (m).
    pub total_dy: f64,
    /// Final head pin position.
    pub final_pin: [f64; 2],
}

/// Chains jumps, re-attaching between them.
///
/// Each pulse starts at the pin where the previous one re-attached. The
/// rest interval between pulses is spent attached; with
/// [`RestPosture::Hanging`] the chain settles to hang straight down from
/// the pin, so every pulse starts from commanded rest.
pub fn simulate_gait(
    params: &ClimberParams,
    pulses: &[PulsePolicy],
    opts: &SimOptions,
) -> Result<GaitOutcome, SimError> {
    if pulses.is_empty() {
        return Err(SimError::EmptyGait);
    }
    let mut state = HybridState::hanging([0.0; 2]);
    let mut trajectory = Trajectory::default();
    let mut jumps = Vec::with_capacity(pulses.len());
    let (mut total_dx, mut total_dy) = (0.0, 0.0);

    for policy in pulses {
        // Each jump runs on a local clock with the pin at the origin, then
        // moves into place, so identical pulses give identical results.
        let (t0, pin) = (state.t, state.pin);
        let local = HybridState { t: 0.0, pin: [0.0; 2], ..state };
        let mut out = jump_from(&local, params, policy, opts)?;
        for s in &mut out.trajectory.samples {
            s.state = translated(&s.state, t0, pin);
        }
        for e in &mut out.trajectory.events {
            e.t += t0;
        }
        out.end_state = translated(&out.end_state, t0, pin);
        let m = out.metrics;
        total_dx += m.dx;
        total_dy += m.dy_net;
        trajectory.extend_from(&out.trajectory);
        jumps.push(m);

        let rest = match opts.rest {
            RestTime::Policy => policy.rest_time,
            RestTime::Cycle { frequency } => {
                (1.0 / frequency - policy.compression_time() - policy.extension_time() - m.t_flight).max(0.0)
            }
        };
        let next_start = (state.t + policy.compression_time() + policy.extension_time() + rest).max(out.end_state.t);
        state = match opts.rest_posture {
            RestPosture::Hanging => HybridState::hanging(out.end_state.pin),
            RestPosture::Held => out.end_state,
        };
        state.t = next_start;
    }

    Ok(GaitOutcome { trajectory, jumps, total_dx, total_dy, final_pin: state.pin })
}

fn translated(s: &HybridState, dt: f64, d: [f64; 2]) -> HybridState {
    let mut s = *s;
    s.t += dt;
    for k in 0..2 {
        s.pin[k] += d[k];
        if s.phase == Phase::Flight {
            s.head_link_pos[k] += d[k];
        }
    }
    s
}
