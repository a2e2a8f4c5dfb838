//! Physical and motor constants of the three-link chain.

use crate::actuation::MotorModel;
use crate::math::{cos, deg, rpm};

/// Constants describing the chain, the wall, and the joint motors.
///
/// All fields are SI: kilograms, meters, seconds, radians, newtons.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClimberParams {
    /// Mass of one link (kg).
    pub mass: f64,
    /// Gravitational acceleration (m/s²).
    pub gravity: f64,
    /// Wall angle measured from vertical (rad).
    pub wall_angle: f64,
    /// Length of one link (m).
    pub link_length: f64,
    /// Coulomb drag per link along the lateral axis (N).
    pub drag_x: f64,
    /// Coulomb drag per link along the vertical axis (N).
    pub drag_y: f64,
    /// Speed below which drag ramps linearly to zero (m/s). Zero gives the
    /// ideal discontinuous Coulomb law.
    pub drag_band: f64,
    /// Scale applied to the slender-rod inertia to account for gearbox inertia.
    pub inertia_scale: f64,
    /// Motor supply voltage (V).
    pub supply_voltage: f64,
    /// Voltage at which the motor's catalog values are specified (V).
    pub motor_voltage: f64,
    /// No-load output speed at `motor_voltage` (rad/s).
    pub no_load_speed: f64,
    /// Stall torque at `motor_voltage` (N·m).
    pub stall_torque: f64,
    /// Torque constant (N·m/A). Only used to report motor current.
    pub torque_constant: f64,
}

impl Default for ClimberParams {
    fn default() -> Self {
        Self {
            mass: 0.054,
            gravity: 9.81,
            wall_angle: deg(20.0),
            link_length: 0.182,
            drag_x: 0.08,
            drag_y: 0.45,
            drag_band: 1e-3,
            inertia_scale: 2.0,
            supply_voltage: 11.0,
            motor_voltage: 6.0,
            no_load_speed: rpm(410.0),
            stall_torque: 0.127,
            // 75:1 HP micro gearmotor: 127 N·mm at a 1.6 A stall current.
            torque_constant: 0.127 / 1.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("{name} must be {requirement}, got {value}")]
    OutOfRange {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

fn check(name: &'static str, value: f64, ok: bool, requirement: &'static str) -> Result<(), ParamError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ParamError::OutOfRange { name, requirement, value })
    }
}

impl ClimberParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        check("mass", self.mass, self.mass > 0.0, "> 0")?;
        check("gravity", self.gravity, self.gravity > 0.0, "> 0")?;
        check("wall_angle", self.wall_angle, self.wall_angle.abs() < core::f64::consts::FRAC_PI_2, "in (-90°, 90°)")?;
        check("link_length", self.link_length, self.link_length > 0.0, "> 0")?;
        check("drag_x", self.drag_x, self.drag_x >= 0.0, ">= 0")?;
        check("drag_y", self.drag_y, self.drag_y >= 0.0, ">= 0")?;
        check("drag_band", self.drag_band, self.drag_band >= 0.0, ">= 0")?;
        check("inertia_scale", self.inertia_scale, self.inertia_scale >= 1.0, ">= 1")?;
        check("supply_voltage", self.supply_voltage, self.supply_voltage > 0.0, "> 0")?;
        check("motor_voltage", self.motor_voltage, self.motor_voltage > 0.0, "> 0")?;
        check("no_load_speed", self.no_load_speed, self.no_load_speed > 0.0, "> 0")?;
        check("stall_torque", self.stall_torque, self.stall_torque > 0.0, "> 0")?;
        check("torque_constant", self.torque_constant, self.torque_constant > 0.0, "> 0")?;
        Ok(())
    }

    /// Gravity component along the wall's vertical axis.
    pub fn wall_gravity(&self) -> f64 {
        self.gravity * cos(self.wall_angle)
    }

    /// Rotational inertia of one link about its center.
    pub fn link_inertia(&self) -> f64 {
        self.inertia_scale / 12.0 * self.mass * self.link_length * self.link_length
    }

    pub fn total_mass(&self) -> f64 {
        3.0 * self.mass
    }

    pub fn motor(&self) -> MotorModel {
        MotorModel {
            stall_torque: self.stall_torque,
            no_load_speed: self.no_load_speed,
            supply_voltage: self.supply_voltage,
            motor_voltage: self.motor_voltage,
            torque_constant: self.torque_constant,
        }
    }

    /// Copy with the motor constants replaced.
    pub fn with_motor(mut self, motor: &MotorModel) -> Self {
        self.stall_torque = motor.stall_torque;
        self.no_load_speed = motor.no_load_speed;
        self.supply_voltage = motor.supply_voltage;
        self.motor_voltage = motor.motor_voltage;
        self.torque_constant = motor.torque_constant;
        self
    }

    /// Copy with both drag coefficients zeroed.
    pub fn drag_free(mut self) -> Self {
        self.drag_x = 0.0;
        self.drag_y = 0.0;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_hardware() {
        let p = ClimberParams::default();
        assert_eq!(p.mass, 0.054);
        assert_eq!(p.link_length, 0.182);
        assert_eq!(p.drag_y, 0.45);
        assert_eq!(p.drag_x, 0.08);
        assert!((p.no_load_speed - 42.935).abs() < 1e-3);
        assert!((p.wall_gravity() - 9.2184).abs() < 1e-4);
        p.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut p = ClimberParams::default();
        p.inertia_scale = 0.5;
        assert!(p.validate().is_err());
        let mut p = ClimberParams::default();
        p.drag_y = -0.1;
        assert!(p.validate().is_err());
        let mut p = ClimberParams::default();
        p.mass = f64::NAN;
        assert!(p.validate().is_err());
    }
}
