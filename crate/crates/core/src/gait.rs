//! Steering plans built from pulse operating points, and the relation
//! between body sinuosity and joint compression.
//!
//! Direction rule: a positive compression speed bends the first two links
//! with their convex side toward `−x` and the chain jumps toward `−x`
//! ("left"); a negative speed jumps toward `+x` ("right"). Alternating the
//! sign cancels the lateral motion and climbs straight up.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::actuation::PulsePolicy;
use crate::math::{acos, deg, fabs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SteeringKind {
    /// Alternating compression signs at the vertical operating point.
    Vertical,
    /// Positive compression speeds at the lateral operating point.
    LateralLeft,
    /// Negative compression speeds at the lateral operating point.
    LateralRight,
}

/// `count` pulses of one kind, optionally overriding the operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SteeringDirective {
    pub kind: SteeringKind,
    pub count: usize,
    /// Compression magnitude override (rad).
    pub gamma_max: Option<f64>,
    /// Compression speed magnitude override (rad/s); the kind sets the sign.
    pub omega_c: Option<f64>,
    /// Extension speed override (rad/s).
    pub omega_e: Option<f64>,
    /// Rest time override (s).
    pub rest_time: Option<f64>,
}

impl SteeringDirective {
    pub fn new(kind: SteeringKind, count: usize) -> Self {
        Self { kind, count, gamma_max: None, omega_c: None, omega_e: None, rest_time: None }
    }
}

/// Compression magnitude and speed magnitude of a steering regime.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OperatingPoint {
    /// Rad.
    pub gamma_max: f64,
    /// Rad/s, positive.
    pub omega_c: f64,
}

impl OperatingPoint {
    /// 90° at 1000 °/s.
    pub fn vertical() -> Self {
        Self { gamma_max: deg(90.0), omega_c: deg(1000.0) }
    }

    /// 50° at 2000 °/s.
    pub fn lateral() -> Self {
        Self { gamma_max: deg(50.0), omega_c: deg(2000.0) }
    }
}

/// Operating points and the pulse fields they do not set.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlanSettings {
    pub vertical: OperatingPoint,
    pub lateral: OperatingPoint,
    /// Supplies extension speed, rest time and gains.
    pub template: PulsePolicy,
}

impl Default for PlanSettings {
    fn default() -> Self {
        Self { vertical: OperatingPoint::vertical(), lateral: OperatingPoint::lateral(), template: PulsePolicy::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GaitError {
    #[error("steering plan is empty")]
    EmptyPlan,
    #[error("directive {index} has a zero pulse count")]
    ZeroCount { index: usize },
    #[error("sinuosity {omega} is outside [1/3, 1]")]
    SinuosityDomain { omega: f64 },
}

/// Expands directives into one pulse per jump.
///
/// Vertical pulses alternate sign across the whole plan, starting positive,
/// so two vertical directives of odd length continue each other's pattern.
pub fn plan_pulses(directives: &[SteeringDirective], settings: &PlanSettings) -> Result<Vec<PulsePolicy>, GaitError> {
    if directives.is_empty() {
        return Err(GaitError::EmptyPlan);
    }
    let mut pulses = Vec::with_capacity(directives.iter().map(|d| d.count).sum());
    let mut vertical_parity = 0usize;
    for (index, d) in directives.iter().enumerate() {
        if d.count == 0 {
            return Err(GaitError::ZeroCount { index });
        }
        let op = match d.kind {
            SteeringKind::Vertical => settings.vertical,
            SteeringKind::LateralLeft | SteeringKind::LateralRight => settings.lateral,
        };
        let base = PulsePolicy {
            gamma_max: d.gamma_max.unwrap_or(op.gamma_max),
            omega_e: d.omega_e.unwrap_or(settings.template.omega_e),
            rest_time: d.rest_time.unwrap_or(settings.template.rest_time),
            ..settings.template
        };
        let speed = fabs(d.omega_c.unwrap_or(op.omega_c));
        for _ in 0..d.count {
            let sign = match d.kind {
                SteeringKind::Vertical => {
                    vertical_parity += 1;
                    if vertical_parity % 2 == 1 { 1.0 } else { -1.0 }
                }
                SteeringKind::LateralLeft => 1.0,
                SteeringKind::LateralRight => -1.0,
            };
            pulses.push(PulsePolicy { omega_c: sign * speed, ..base });
        }
    }
    Ok(pulses)
}

/// Compression magnitude whose three-link chord matches sinuosity `omega`,
/// `γ_max = π − acos(5/4 − 9Ω²/4)`.
///
/// Sinuosity is end-to-end length over total link length; the relation
/// holds with the two joints at equal and opposite angles.
pub fn sinuosity_to_gamma(omega: f64) -> Result<f64, GaitError> {
    let arg = 1.25 - 2.25 * omega * omega;
    if !omega.is_finite() || !(-1.0..=1.0).contains(&arg) || omega < 0.0 {
        return Err(GaitError::SinuosityDomain { omega });
    }
    Ok(PI - acos(arg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{cos, sqrt, to_deg};

    #[test]
    fn vertical_pair_alternates() {
        let p = plan_pulses(&[SteeringDirective::new(SteeringKind::Vertical, 2)], &PlanSettings::default()).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p[0].omega_c > 0.0 && p[1].omega_c < 0.0);
        assert!((to_deg(p[0].omega_c) - 1000.0).abs() < 1e-9);
        assert!((to_deg(p[1].gamma_max) - 90.0).abs() < 1e-12);
    }

    #[test]
    fn lateral_right_is_negative() {
        let p = plan_pulses(&[SteeringDirective::new(SteeringKind::LateralRight, 10)], &PlanSettings::default()).unwrap();
        assert_eq!(p.len(), 10);
        for q in &p {
            assert!((to_deg(q.omega_c) + 2000.0).abs() < 1e-9);
            assert!((to_deg(q.gamma_max) - 50.0).abs() < 1e-12);
        }
        let p = plan_pulses(&[SteeringDirective::new(SteeringKind::LateralLeft, 1)], &PlanSettings::default()).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p[0].omega_c > 0.0);
    }

    #[test]
    fn overrides_apply() {
        let mut d = SteeringDirective::new(SteeringKind::LateralLeft, 1);
        d.omega_c = Some(-deg(500.0));
        d.rest_time = Some(0.2);
        let p = plan_pulses(&[d], &PlanSettings::default()).unwrap();
        assert!((to_deg(p[0].omega_c) - 500.0).abs() < 1e-9);
        assert_eq!(p[0].rest_time, 0.2);
    }

    #[test]
    fn empty_and_zero_count_rejected() {
        assert_eq!(plan_pulses(&[], &PlanSettings::default()), Err(GaitError::EmptyPlan));
        assert_eq!(
            plan_pulses(&[SteeringDirective::new(SteeringKind::Vertical, 0)], &PlanSettings::default()),
            Err(GaitError::ZeroCount { index: 0 })
        );
    }

    #[test]
    fn sinuosity_endpoints() {
        assert!(sinuosity_to_gamma(1.0).unwrap().abs() < 1e-12);
        assert!((sinuosity_to_gamma(sqrt(5.0) / 3.0).unwrap() - PI / 2.0).abs() < 1e-12);
        assert!((sinuosity_to_gamma(1.0 / 3.0).unwrap() - PI).abs() < 1e-12);
        assert!(sinuosity_to_gamma(1.01).is_err());
        assert!(sinuosity_to_gamma(0.3).is_err());
        assert!(sinuosity_to_gamma(f64::NAN).is_err());
    }

    #[test]
    fn sinuosity_matches_chain_geometry() {
        // Chord of links at angles 0, γ, 0 over 3L.
        for g in [0.2, 0.7, 1.3, 2.0] {
            let chord = sqrt((2.0 + cos(g)).powi(2) + libm::sin(g).powi(2));
            let omega = chord / 3.0;
            assert!((sinuosity_to_gamma(omega).unwrap() - g).abs() < 1e-9);
        }
    }
}
