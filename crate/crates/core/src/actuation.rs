//! Triangular joint-angle pulses, PD tracking, and motor torque saturation.
//!
//! A pulse ramps the commanded joint-1 angle from zero to `±γ_max` at
//! `|ω_C|`, returns to zero at `ω_E`, then rests at zero for `t_r`. Joint 2
//! is always commanded to the negative of joint 1.

use crate::math::fabs;

/// Feedforward pulse shape and PD gains.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PulsePolicy {
    /// Compression speed (rad/s). The sign selects the bending direction.
    pub omega_c: f64,
    /// Extension speed (rad/s), positive.
    pub omega_e: f64,
    /// Compression magnitude (rad).
    pub gamma_max: f64,
    /// Rest time after extension (s).
    pub rest_time: f64,
    /// Proportional gain (N·m/rad).
    pub kp: f64,
    /// Derivative gain (N·m·s/rad).
    pub kd: f64,
}

impl Default for PulsePolicy {
    /// The peak vertical operating point: 90°, 1000 °/s compression,
    /// 500 °/s extension, with the 75:1 design gains.
    fn default() -> Self {
        use crate::math::deg;
        Self {
            omega_c: deg(1000.0),
            omega_e: deg(500.0),
            gamma_max: deg(90.0),
            rest_time: 0.0,
            kp: 1.0,
            kd: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ActuationError {
    #[error("compression speed is zero; no pulse can be formed")]
    ZeroCompressionSpeed,
    #[error("{name} must be {requirement}, got {value}")]
    OutOfRange {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

impl PulsePolicy {
    pub fn validate(&self) -> Result<(), ActuationError> {
        let check = |name, value: f64, ok: bool, requirement| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(ActuationError::OutOfRange { name, requirement, value })
            }
        };
        if self.omega_c == 0.0 {
            return Err(ActuationError::ZeroCompressionSpeed);
        }
        check("omega_c", self.omega_c, true, "finite")?;
        check("omega_e", self.omega_e, self.omega_e > 0.0, "> 0")?;
        check(
            "gamma_max",
            self.gamma_max,
            self.gamma_max > 0.0 && self.gamma_max < core::f64::consts::PI,
            "in (0, π)",
        )?;
        check("rest_time", self.rest_time, self.rest_time >= 0.0, ">= 0")?;
        check("kp", self.kp, self.kp > 0.0, "> 0")?;
        check("kd", self.kd, self.kd >= 0.0, ">= 0")?;
        Ok(())
    }

    /// Duration of the compression ramp.
    pub fn compression_time(&self) -> f64 {
        self.gamma_max / fabs(self.omega_c)
    }

    /// Duration of the extension ramp.
    pub fn extension_time(&self) -> f64 {
        self.gamma_max / self.omega_e
    }

    /// Compression plus extension plus rest.
    pub fn period(&self) -> f64 {
        self.compression_time() + self.extension_time() + self.rest_time
    }

    /// Times where the reference slope changes: end of compression, end of extension.
    pub fn breakpoints(&self) -> [f64; 2] {
        let t1 = self.compression_time();
        [t1, t1 + self.extension_time()]
    }

    /// Copy with the compression direction flipped.
    pub fn mirrored(&self) -> Self {
        Self { omega_c: -self.omega_c, ..*self }
    }
}

/// Commanded joint-1 angle and its slope. Joint 2 gets the negatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Reference {
    pub angle: f64,
    pub rate: f64,
}

/// Joint-1 reference of a single pulse at time `t` after its start.
///
/// Segments are closed on the left, so at a segment boundary the returned
/// rate is the slope of the segment that begins there. After the pulse the
/// reference holds `(0, 0)`.
pub fn reference(t: f64, policy: &PulsePolicy) -> Result<Reference, ActuationError> {
    if policy.omega_c == 0.0 {
        return Err(ActuationError::ZeroCompressionSpeed);
    }
    let dir = if policy.omega_c > 0.0 { 1.0 } else { -1.0 };
    let [t1, t2] = policy.breakpoints();
    let r = if t < 0.0 {
        Reference::default()
    } else if t < t1 {
        Reference { angle: policy.omega_c * t, rate: policy.omega_c }
    } else if t < t2 {
        Reference {
            angle: dir * (policy.gamma_max - policy.omega_e * (t - t1)),
            rate: -dir * policy.omega_e,
        }
    } else {
        Reference::default()
    };
    Ok(r)
}

/// Reference for pulses repeated back to back with period [`PulsePolicy::period`].
pub fn reference_periodic(t: f64, policy: &PulsePolicy) -> Result<Reference, ActuationError> {
    let period = policy.period();
    if period.is_nan() || period <= 0.0 || t < 0.0 {
        return reference(t, policy);
    }
    let k = libm::floor(t / period);
    reference(t - k * period, policy)
}

/// PD tracking torques for both joints, before saturation.
pub fn pd_torques(gamma: [f64; 2], gamma_dot: [f64; 2], reference: Reference, kp: f64, kd: f64) -> [f64; 2] {
    [
        kp * (reference.angle - gamma[0]) + kd * (reference.rate - gamma_dot[0]),
        kp * (-reference.angle - gamma[1]) + kd * (-reference.rate - gamma_dot[1]),
    ]
}

/// Linear DC motor model behind a gearbox, driven above its rated voltage.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MotorModel {
    /// Stall torque at `motor_voltage` (N·m).
    pub stall_torque: f64,
    /// No-load speed at `motor_voltage` (rad/s).
    pub no_load_speed: f64,
    pub supply_voltage: f64,
    pub motor_voltage: f64,
    /// Torque constant (N·m/A).
    pub torque_constant: f64,
}

impl MotorModel {
    fn voltage_ratio(&self) -> f64 {
        self.supply_voltage / self.motor_voltage
    }

    /// Stall torque at the supply voltage.
    pub fn peak_torque(&self) -> f64 {
        self.voltage_ratio() * self.stall_torque
    }

    /// No-load speed at the supply voltage.
    pub fn peak_speed(&self) -> f64 {
        self.voltage_ratio() * self.no_load_speed
    }

    /// Upper torque limit at joint rate `rate`.
    pub fn max_torque(&self, rate: f64) -> f64 {
        if rate <= 0.0 {
            self.peak_torque()
        } else if rate <= self.peak_speed() {
            self.peak_torque() - self.stall_torque / self.no_load_speed * rate
        } else {
            0.0
        }
    }

    /// Lower torque limit at joint rate `rate`.
    pub fn min_torque(&self, rate: f64) -> f64 {
        -self.max_torque(-rate)
    }

    /// Clamps a commanded torque into the envelope at `rate`.
    pub fn saturate(&self, commanded: f64, rate: f64) -> f64 {
        let hi = self.max_torque(rate);
        let lo = self.min_torque(rate);
        if commanded > hi {
            hi
        } else if commanded < lo {
            lo
        } else {
            commanded
        }
    }

    /// Winding current needed for `torque`.
    pub fn current(&self, torque: f64) -> f64 {
        torque / self.torque_constant
    }

    /// Same motor behind a different gear reduction, assuming an ideal
    /// gearbox: torque scales with the ratio, speed inversely.
    pub fn regeared(&self, from_ratio: f64, to_ratio: f64) -> Self {
        let k = to_ratio / from_ratio;
        Self {
            stall_torque: self.stall_torque * k,
            no_load_speed: self.no_load_speed / k,
            torque_constant: self.torque_constant * k,
            ..*self
        }
    }
}

/// Free-function form of [`MotorModel::saturate`].
pub fn saturate(commanded: f64, rate: f64, motor: &MotorModel) -> f64 {
    motor.saturate(commanded, rate)
}

/// How the PD law is sampled in time.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ControlMode {
    /// Evaluated at every integrator stage.
    Continuous,
    /// Sampled every `period` seconds and held in between.
    ZeroOrderHold { period: f64 },
}

/// Torques at the joints for one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlOutput {
    pub commanded: [f64; 2],
    pub applied: [f64; 2],
}

/// Pulse reference, PD law and motor saturation bundled together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointController {
    pub policy: PulsePolicy,
    pub motor: MotorModel,
    pub mode: ControlMode,
}

impl JointController {
    pub fn new(policy: PulsePolicy, motor: MotorModel) -> Self {
        Self { policy, motor, mode: ControlMode::Continuous }
    }

    /// Saturated torques at pulse time `t` given the joint state.
    ///
    /// Saturation always uses the current joint rate, even when the PD
    /// command itself is held.
    pub fn torques(&self, t: f64, gamma: [f64; 2], gamma_dot: [f64; 2]) -> ControlOutput {
        let r = reference(t, &self.policy).unwrap_or_default();
        let commanded = pd_torques(gamma, gamma_dot, r, self.policy.kp, self.policy.kd);
        self.apply(commanded, gamma_dot)
    }

    /// Saturates an already computed command.
    pub fn apply(&self, commanded: [f64; 2], gamma_dot: [f64; 2]) -> ControlOutput {
        ControlOutput {
            commanded,
            applied: [
                self.motor.saturate(commanded[0], gamma_dot[0]),
                self.motor.saturate(commanded[1], gamma_dot[1]),
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{deg, rpm};
    use crate::params::ClimberParams;

    fn policy() -> PulsePolicy {
        PulsePolicy {
            omega_c: deg(1000.0),
            omega_e: deg(500.0),
            gamma_max: deg(90.0),
            rest_time: 0.1,
            kp: 1.0,
            kd: 0.1,
        }
    }

    #[test]
    fn reference_segments() {
        let p = policy();
        let r = reference(0.0, &p).unwrap();
        assert_eq!(r.angle, 0.0);
        assert_eq!(r.rate, p.omega_c);

        let t1 = p.compression_time();
        assert!((t1 - 0.09).abs() < 1e-15);
        let r = reference(t1, &p).unwrap();
        assert!((r.angle - deg(90.0)).abs() < 1e-12);
        assert_eq!(r.rate, -p.omega_e);

        let r = reference(0.27, &p).unwrap();
        assert!(r.angle.abs() < 1e-12);
        let r = reference(0.27 + 1e-12, &p).unwrap();
        assert_eq!(r.rate, 0.0);
        assert!(r.angle.abs() < 1e-9);
    }

    #[test]
    fn zero_compression_speed_is_an_error() {
        let p = PulsePolicy { omega_c: 0.0, ..policy() };
        assert_eq!(reference(0.1, &p), Err(ActuationError::ZeroCompressionSpeed));
        assert!(p.validate().is_err());
    }

    #[test]
    fn pd_examples() {
        let r = Reference { angle: 0.3, rate: 2.0 };
        assert_eq!(pd_torques([0.3, -0.3], [2.0, -2.0], r, 3.0, 0.2), [0.0, 0.0]);
        let r = Reference { angle: 0.5, rate: 0.0 };
        assert_eq!(pd_torques([0.0; 2], [0.0; 2], r, 1.0, 0.0), [0.5, -0.5]);
        let r = Reference { angle: deg(90.0), rate: deg(1000.0) };
        let tau = pd_torques([deg(45.0), 0.0], [deg(500.0), 0.0], r, 1.0, 0.1);
        let expected = core::f64::consts::FRAC_PI_4 + 0.1 * deg(500.0);
        assert!((tau[0] - expected).abs() < 1e-12);
        assert!((tau[0] - 1.658).abs() < 5e-4);
    }

    #[test]
    fn saturation_envelope() {
        let m = ClimberParams::default().motor();
        assert!((m.max_torque(0.0) - 0.232833).abs() < 1e-6);
        assert!((m.min_torque(0.0) + 0.232833).abs() < 1e-6);
        let edge = 11.0 / 6.0 * rpm(410.0);
        assert!(m.max_torque(edge).abs() < 1e-12);
        assert_eq!(m.max_torque(edge * 1.5), 0.0);
        assert!((m.saturate(1.0, 0.0) - 0.232833).abs() < 1e-6);
        assert_eq!(m.saturate(0.1, 0.0), 0.1);
        // Pushing backwards against the motion is allowed at full stall torque.
        assert_eq!(m.min_torque(edge * 2.0), -m.peak_torque());
    }

    #[test]
    fn regearing_keeps_power() {
        let m = ClimberParams::default().motor();
        let r = m.regeared(75.0, 50.0);
        assert!((r.stall_torque * r.no_load_speed - m.stall_torque * m.no_load_speed).abs() < 1e-12);
        assert!((r.no_load_speed - rpm(615.0)).abs() < 1e-9);
    }

    #[test]
    fn periodic_reference_wraps() {
        let p = policy();
        let a = reference_periodic(0.05, &p).unwrap();
        let b = reference_periodic(0.05 + p.period(), &p).unwrap();
        assert!((a.angle - b.angle).abs() < 1e-12);
        assert_eq!(a.rate, b.rate);
    }
}
