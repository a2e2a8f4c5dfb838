//! Gait scripts: an ordered list of steering steps in TOML.
//!
//! ```toml
//! [[step]]
//! kind = "lateral_right"   # vertical | lateral_left | lateral_right
//! count = 10
//! gamma_deg = 50.0         # optional overrides of the operating point
//! omega_deg_s = 2000.0     # magnitude; the kind sets the sign
//! omega_E_deg_s = 500.0
//! rest_s = 0.0
//! ```

use std::path::Path;

use climber_core::gait::{SteeringDirective, SteeringKind};
use climber_core::math::deg;
use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptStep {
    pub kind: SteeringKind,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_deg_s: Option<f64>,
    #[serde(default, rename = "omega_E_deg_s", skip_serializing_if = "Option::is_none")]
    pub omega_e_deg_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rest_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaitScript {
    #[serde(default)]
    pub step: Vec<ScriptStep>,
}

impl GaitScript {
    pub fn parse(text: &str, origin: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::config(origin, e.message().trim()).with_span(text, e.span()))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// The sequence of 10 right, 31 vertical and 10 left jumps used to
    /// climb around an obstacle.
    pub fn obstacle_example() -> Self {
        let step = |kind, count| ScriptStep {
            kind,
            count,
            gamma_deg: None,
            omega_deg_s: None,
            omega_e_deg_s: None,
            rest_s: None,
        };
        Self {
            step: vec![
                step(SteeringKind::LateralRight, 10),
                step(SteeringKind::Vertical, 31),
                step(SteeringKind::LateralLeft, 10),
            ],
        }
    }

    /// Directives in SI units. Empty scripts and zero counts are usage errors.
    pub fn directives(&self) -> Result<Vec<SteeringDirective>, Error> {
        if self.step.is_empty() {
            return Err(Error::Usage("gait script has no steps".into()));
        }
        self.step
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if s.count == 0 {
                    return Err(Error::Usage(format!("step {i}: count must be at least 1")));
                }
                let positive = |key: &str, v: Option<f64>| match v {
                    Some(v) if !(v.is_finite() && v > 0.0) => Err(Error::Usage(format!("step {i}: {key} must be > 0"))),
                    _ => Ok(v),
                };
                let rest = match s.rest_s {
                    Some(v) if !(v.is_finite() && v >= 0.0) => {
                        return Err(Error::Usage(format!("step {i}: rest_s must be >= 0")))
                    }
                    v => v,
                };
                Ok(SteeringDirective {
                    kind: s.kind,
                    count: s.count,
                    gamma_max: positive("gamma_deg", s.gamma_deg)?.map(deg),
                    omega_c: positive("omega_deg_s", s.omega_deg_s)?.map(deg),
                    omega_e: positive("omega_E_deg_s", s.omega_e_deg_s)?.map(deg),
                    rest_time: rest,
                })
            })
            .collect()
    }

    /// True when any step sets its own rest time.
    pub fn has_rest(&self) -> bool {
        self.step.iter().any(|s| s.rest_s.is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_schema() {
        let s = GaitScript::parse(
            "[[step]]\nkind = \"lateral_right\"\ncount = 10\ngamma_deg = 50\nomega_deg_s = 2000\nomega_E_deg_s = 400\nrest_s = 0.1\n\n[[step]]\nkind = \"vertical\"\ncount = 2\n",
            "s",
        )
        .unwrap();
        let d = s.directives().unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].kind, SteeringKind::LateralRight);
        assert!((d[0].omega_e.unwrap() - deg(400.0)).abs() < 1e-12);
        assert_eq!(d[0].rest_time, Some(0.1));
        assert!(s.has_rest());
    }

    #[test]
    fn round_trips_through_toml() {
        let s = GaitScript::obstacle_example();
        let text = toml::to_string(&s).unwrap();
        assert_eq!(GaitScript::parse(&text, "s").unwrap(), s);
    }

    #[test]
    fn empty_and_bad_scripts_rejected() {
        assert_eq!(GaitScript::parse("", "s").unwrap().directives().unwrap_err().exit_code(), 2);
        assert!(GaitScript::parse("[[step]]\nkind = \"diagonal\"\ncount = 1\n", "s").is_err());
        assert!(GaitScript::parse("[[step]]\nkind = \"vertical\"\ncount = 1\nspeed = 3\n", "s").is_err());
        let zero = GaitScript::parse("[[step]]\nkind = \"vertical\"\ncount = 0\n", "s").unwrap();
        assert!(zero.directives().is_err());
    }
}
