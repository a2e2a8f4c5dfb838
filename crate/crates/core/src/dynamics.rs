//! Kinematics and Newton-Euler equations of motion of the three-link chain.
//!
//! Angles are inertial and measured counterclockwise from the wall's lateral
//! `+x` axis. Link 1 is the head link; its proximal end is the head tip, which
//! is pinned to the wall during stance. Each link points from its proximal
//! joint toward the tail, so a chain hanging straight down from the head has
//! `θ = (−90°, −90°, −90°)` and a chain standing straight up from the pin has
//! `θ = (90°, 90°, 90°)`.
//!
//! Both phases are solved as one 9×9 linear system holding the link
//! accelerations and the joint reaction forces together. Reaction force
//! `F_i` is the force joint `i` applies to link `i`; link `i − 1` receives
//! `−F_i`. Joint torque `τ_j` acts positively on link `j + 1` and negatively
//! on link `j`, so it drives the relative angle `γ_j = θ_{j+1} − θ_j`.

use core::f64::consts::PI;

use crate::math::{cos, fabs, norm, residual, sgn, sin, solve_dense};
use crate::params::ClimberParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Phase {
    /// Head tip pinned to the wall.
    Stance,
    /// Head free to translate.
    Flight,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Stance => "stance",
            Phase::Flight => "flight",
        }
    }
}

/// Phase-tagged mechanism state.
///
/// In stance, `pin` is the world position of the head tip and
/// `head_link_pos`/`head_link_vel` are ignored; use
/// [`HybridState::head_link_center`] for the derived values. In flight,
/// `head_link_pos`/`head_link_vel` are the center position and velocity of
/// link 1 and `pin` keeps the last attachment point for bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HybridState {
    pub phase: Phase,
    pub t: f64,
    pub theta: [f64; 3],
    pub theta_dot: [f64; 3],
    pub pin: [f64; 2],
    pub head_link_pos: [f64; 2],
    pub head_link_vel: [f64; 2],
}

impl HybridState {
    pub fn stance(t: f64, theta: [f64; 3], theta_dot: [f64; 3], pin: [f64; 2]) -> Self {
        Self {
            phase: Phase::Stance,
            t,
            theta,
            theta_dot,
            pin,
            head_link_pos: [0.0; 2],
            head_link_vel: [0.0; 2],
        }
    }

    pub fn flight(t: f64, theta: [f64; 3], theta_dot: [f64; 3], head_link_pos: [f64; 2], head_link_vel: [f64; 2]) -> Self {
        Self {
            phase: Phase::Flight,
            t,
            theta,
            theta_dot,
            pin: [0.0; 2],
            head_link_pos,
            head_link_vel,
        }
    }

    /// Chain hanging straight down from a pin at rest.
    pub fn hanging(pin: [f64; 2]) -> Self {
        Self::stance(0.0, [-PI / 2.0; 3], [0.0; 3], pin)
    }

    /// Relative joint angles `γ_1 = θ_2 − θ_1`, `γ_2 = θ_3 − θ_2`.
    pub fn joint_angles(&self) -> [f64; 2] {
        [self.theta[1] - self.theta[0], self.theta[2] - self.theta[1]]
    }

    pub fn joint_rates(&self) -> [f64; 2] {
        [self.theta_dot[1] - self.theta_dot[0], self.theta_dot[2] - self.theta_dot[1]]
    }

    /// Center position and velocity of link 1.
    pub fn head_link_center(&self, params: &ClimberParams) -> ([f64; 2], [f64; 2]) {
        match self.phase {
            Phase::Flight => (self.head_link_pos, self.head_link_vel),
            Phase::Stance => {
                let h = 0.5 * params.link_length;
                let (s, c) = (sin(self.theta[0]), cos(self.theta[0]));
                let w = self.theta_dot[0];
                ([self.pin[0] + h * c, self.pin[1] + h * s], [-h * s * w, h * c * w])
            }
        }
    }

    /// Position and velocity of the head tip (proximal end of link 1).
    pub fn head_tip(&self, params: &ClimberParams) -> ([f64; 2], [f64; 2]) {
        match self.phase {
            Phase::Stance => (self.pin, [0.0; 2]),
            Phase::Flight => {
                let h = 0.5 * params.link_length;
                let (s, c) = (sin(self.theta[0]), cos(self.theta[0]));
                let w = self.theta_dot[0];
                let p = self.head_link_pos;
                let v = self.head_link_vel;
                ([p[0] - h * c, p[1] - h * s], [v[0] + h * s * w, v[1] - h * c * w])
            }
        }
    }

    /// Left-right mirror image about the vertical line through the origin.
    pub fn mirrored(&self) -> Self {
        let mut m = *self;
        for i in 0..3 {
            m.theta[i] = PI - self.theta[i];
            m.theta_dot[i] = -self.theta_dot[i];
        }
        m.pin[0] = -self.pin[0];
        m.head_link_pos[0] = -self.head_link_pos[0];
        m.head_link_vel[0] = -self.head_link_vel[0];
        m
    }
}

/// Actuator torques at joints 1 and 2 (N·m).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JointTorques(pub [f64; 2]);

/// Joint reaction forces `(F_x, F_y)` acting on the distal link of each joint.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReactionForces {
    /// Force from the wall pin on link 1; `None` in flight.
    pub head: Option<[f64; 2]>,
    /// Forces at joints 2 and 3 (link 1 on link 2, link 2 on link 3).
    pub joints: [[f64; 2]; 2],
}

impl ReactionForces {
    /// Vertical head reaction `Fy_1`, if pinned.
    pub fn head_normal(&self) -> Option<f64> {
        self.head.map(|f| f[1])
    }

    /// Force pair acting on link `i` at its proximal joint (zero for a free head).
    pub fn at_joint(&self, i: usize) -> [f64; 2] {
        match i {
            0 => self.head.unwrap_or([0.0; 2]),
            1 | 2 => self.joints[i - 1],
            _ => [0.0; 2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("singular mass matrix at t = {t}")]
    Singular { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

/// Link centers, velocities, and joint points in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainKinematics {
    /// Head tip, joint 2, joint 3, tail tip.
    pub joints: [[f64; 2]; 4],
    pub joint_velocities: [[f64; 2]; 4],
    pub centers: [[f64; 2]; 3],
    pub center_velocities: [[f64; 2]; 3],
}

/// Positions and velocities of every link center and joint point.
pub fn link_kinematics(state: &HybridState, params: &ClimberParams) -> ChainKinematics {
    let l = params.link_length;
    let h = 0.5 * l;
    let (tip, tip_vel) = state.head_tip(params);

    let mut joints = [[0.0; 2]; 4];
    let mut joint_velocities = [[0.0; 2]; 4];
    let mut centers = [[0.0; 2]; 3];
    let mut center_velocities = [[0.0; 2]; 3];
    joints[0] = tip;
    joint_velocities[0] = tip_vel;

    for i in 0..3 {
        let (s, c) = (sin(state.theta[i]), cos(state.theta[i]));
        let w = state.theta_dot[i];
        let p = joints[i];
        let v = joint_velocities[i];
        centers[i] = [p[0] + h * c, p[1] + h * s];
        center_velocities[i] = [v[0] - h * s * w, v[1] + h * c * w];
        joints[i + 1] = [p[0] + l * c, p[1] + l * s];
        joint_velocities[i + 1] = [v[0] - l * s * w, v[1] + l * c * w];
    }

    if state.phase == Phase::Flight {
        // Link 1's center is a state variable in flight; keep it exact.
        centers[0] = state.head_link_pos;
        center_velocities[0] = state.head_link_vel;
        let (s, c) = (sin(state.theta[0]), cos(state.theta[0]));
        let w = state.theta_dot[0];
        let p = state.head_link_pos;
        let v = state.head_link_vel;
        joints[1] = [p[0] + h * c, p[1] + h * s];
        joint_velocities[1] = [v[0] - h * s * w, v[1] + h * c * w];
    }

    ChainKinematics { joints, joint_velocities, centers, center_velocities }
}

/// Coulomb drag on one velocity component: `−sgn(v)·C` with `sgn(0) = 0`.
pub fn coulomb_drag(vel_component: f64, coefficient: f64) -> f64 {
    -sgn(vel_component) * coefficient
}

/// Coulomb drag that ramps linearly to zero inside `|v| < band`.
///
/// Identical to [`coulomb_drag`] outside the band and for `band == 0`.
/// The ramp keeps sliding-mode (stick) intervals integrable.
pub fn banded_drag(vel_component: f64, coefficient: f64, band: f64) -> f64 {
    if band > 0.0 && fabs(vel_component) < band {
        -coefficient * vel_component / band
    } else {
        coulomb_drag(vel_component, coefficient)
    }
}

/// Solution of the pinned-head system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StanceAccel {
    pub theta_ddot: [f64; 3],
    pub forces: ReactionForces,
    /// `‖M z − rhs‖ / ‖rhs‖` of the linear solve.
    pub relative_residual: f64,
}

/// Solution of the free-head system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightAccel {
    pub theta_ddot: [f64; 3],
    /// Acceleration of the link-1 center.
    pub head_link_accel: [f64; 2],
    pub forces: ReactionForces,
    pub relative_residual: f64,
}

type System = ([[f64; 9]; 9], [f64; 9]);

/// Assembles the per-link force and moment balances.
///
/// Unknowns: `θ̈_1..3` in columns 0..3, then either the head pin force
/// (stance) or the link-1 center acceleration (flight) in columns 3..5, then
/// the joint-2 and joint-3 forces in columns 5..9.
fn assemble(state: &HybridState, tau: &JointTorques, params: &ClimberParams, pinned: bool) -> System {
    let m = params.mass;
    let l = params.link_length;
    let h = 0.5 * l;
    let inertia = params.link_inertia();
    let g = params.wall_gravity();
    let kin = link_kinematics(state, params);

    let s = [sin(state.theta[0]), sin(state.theta[1]), sin(state.theta[2])];
    let c = [cos(state.theta[0]), cos(state.theta[1]), cos(state.theta[2])];
    let w2 = [
        state.theta_dot[0] * state.theta_dot[0],
        state.theta_dot[1] * state.theta_dot[1],
        state.theta_dot[2] * state.theta_dot[2],
    ];
    // Lever from the chain's reference point to link i's center, along link j.
    let weight = |i: usize, j: usize| -> f64 {
        if j > i {
            0.0
        } else if j == i {
            if pinned || i > 0 { h } else { 0.0 }
        } else if pinned || j > 0 {
            l
        } else {
            h
        }
    };
    let torque_on = |i: usize| -> f64 {
        let from_prev = if i > 0 { tau.0[i - 1] } else { 0.0 };
        let to_next = if i < 2 { tau.0[i] } else { 0.0 };
        from_prev - to_next
    };

    let mut a = [[0.0; 9]; 9];
    let mut b = [0.0; 9];

    for i in 0..3 {
        let (rx, ry, rm) = (3 * i, 3 * i + 1, 3 * i + 2);
        let vel = kin.center_velocities[i];

        let mut cent_x = 0.0;
        let mut cent_y = 0.0;
        for j in 0..=i {
            let w = weight(i, j);
            a[rx][j] += -m * w * s[j];
            a[ry][j] += m * w * c[j];
            cent_x += w * w2[j] * c[j];
            cent_y += w * w2[j] * s[j];
        }
        if !pinned {
            a[rx][3] += m;
            a[ry][4] += m;
        }

        // Proximal joint force on link i (columns for i = 0 exist only when pinned).
        if pinned || i > 0 {
            let col = 3 + 2 * i;
            a[rx][col] -= 1.0;
            a[ry][col + 1] -= 1.0;
            a[rm][col] -= h * s[i];
            a[rm][col + 1] += h * c[i];
        }
        // Distal joint force: link i + 1 pushes back with −F_{i+1}.
        if i < 2 {
            let col = 3 + 2 * (i + 1);
            a[rx][col] += 1.0;
            a[ry][col + 1] += 1.0;
            a[rm][col] -= h * s[i];
            a[rm][col + 1] += h * c[i];
        }
        a[rm][i] += inertia;

        b[rx] = m * cent_x + banded_drag(vel[0], params.drag_x, params.drag_band);
        b[ry] = m * cent_y - m * g + banded_drag(vel[1], params.drag_y, params.drag_band);
        b[rm] = torque_on(i);
    }
    (a, b)
}

fn solve(state: &HybridState, system: System) -> Result<([f64; 9], f64), DynamicsError> {
    let finite = state.theta.iter().chain(&state.theta_dot).all(|v| v.is_finite());
    if !finite {
        return Err(DynamicsError::NonFinite { t: state.t });
    }
    let (a, b) = system;
    let z = solve_dense(a, b).ok_or(DynamicsError::Singular { t: state.t })?;
    if z.iter().any(|v| !v.is_finite()) {
        return Err(DynamicsError::NonFinite { t: state.t });
    }
    let rhs = norm(&b);
    let res = residual(&a, &z, &b);
    Ok((z, if rhs > 0.0 { res / rhs } else { res }))
}

/// Angular accelerations and all three joint reaction pairs with the head pinned.
pub fn stance_accel(state: &HybridState, tau: &JointTorques, params: &ClimberParams) -> Result<StanceAccel, DynamicsError> {
    let (z, relative_residual) = solve(state, assemble(state, tau, params, true))?;
    Ok(StanceAccel {
        theta_ddot: [z[0], z[1], z[2]],
        forces: ReactionForces {
            head: Some([z[3], z[4]]),
            joints: [[z[5], z[6]], [z[7], z[8]]],
        },
        relative_residual,
    })
}

/// Angular accelerations, link-1 center acceleration, and the two internal
/// joint reactions with the head free.
pub fn flight_accel(state: &HybridState, tau: &JointTorques, params: &ClimberParams) -> Result<FlightAccel, DynamicsError> {
    let (z, relative_residual) = solve(state, assemble(state, tau, params, false))?;
    Ok(FlightAccel {
        theta_ddot: [z[0], z[1], z[2]],
        head_link_accel: [z[3], z[4]],
        forces: ReactionForces {
            head: None,
            joints: [[z[5], z[6]], [z[7], z[8]]],
        },
        relative_residual,
    })
}

/// Vertical velocity of the head tip, `ẏ + (L/2)·cos(θ_1 − π)·θ̇_1`.
///
/// In flight this is the apex event function. In stance the head tip is
/// pinned and the value is zero.
pub fn head_vertical_velocity(state: &HybridState, params: &ClimberParams) -> f64 {
    let (_, vel) = state.head_link_center(params);
    vel[1] + 0.5 * params.link_length * cos(state.theta[0] - PI) * state.theta_dot[0]
}

/// Kinetic plus gravitational potential energy of the chain.
pub fn mechanical_energy(state: &HybridState, params: &ClimberParams) -> f64 {
    let kin = link_kinematics(state, params);
    let inertia = params.link_inertia();
    let g = params.wall_gravity();
    (0..3)
        .map(|i| {
            let v = kin.center_velocities[i];
            0.5 * params.mass * (v[0] * v[0] + v[1] * v[1])
                + 0.5 * inertia * state.theta_dot[i] * state.theta_dot[i]
                + params.mass * g * kin.centers[i][1]
        })
        .sum()
}

/// Position and velocity of the chain's center of mass.
pub fn center_of_mass(state: &HybridState, params: &ClimberParams) -> ([f64; 2], [f64; 2]) {
    let kin = link_kinematics(state, params);
    let mut p = [0.0; 2];
    let mut v = [0.0; 2];
    for i in 0..3 {
        for k in 0..2 {
            p[k] += kin.centers[i][k] / 3.0;
            v[k] += kin.center_velocities[i][k] / 3.0;
        }
    }
    (p, v)
}

/// Angular momentum about the center of mass (out of the wall plane).
pub fn angular_momentum_about_com(state: &HybridState, params: &ClimberParams) -> f64 {
    let kin = link_kinematics(state, params);
    let (pc, vc) = center_of_mass(state, params);
    let inertia = params.link_inertia();
    (0..3)
        .map(|i| {
            let r = [kin.centers[i][0] - pc[0], kin.centers[i][1] - pc[1]];
            let v = [kin.center_velocities[i][0] - vc[0], kin.center_velocities[i][1] - vc[1]];
            params.mass * (r[0] * v[1] - r[1] * v[0]) + inertia * state.theta_dot[i]
        })
        .sum()
}
