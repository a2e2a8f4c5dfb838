//! Steering plans run through the simulator.

use climber_core::gait::{plan_pulses, sinuosity_to_gamma, OperatingPoint, PlanSettings, SteeringDirective, SteeringKind};
use climber_core::math::deg;
use climber_core::{simulate_gait, simulate_jump, ClimberParams, PulsePolicy, SimOptions};
use proptest::prelude::*;

fn metrics_only() -> SimOptions {
    SimOptions { sample_dt: None, ..SimOptions::default() }
}

#[test]
fn even_vertical_plans_climb_straight() {
    let p = ClimberParams::default();
    for n in [2, 4, 6] {
        let plan = plan_pulses(&[SteeringDirective::new(SteeringKind::Vertical, n)], &PlanSettings::default()).unwrap();
        let g = simulate_gait(&p, &plan, &metrics_only()).unwrap();
        assert!(g.total_dy > 0.0);
        assert!(g.total_dx.abs() < 0.05 * g.total_dy, "{n}: {} {}", g.total_dx, g.total_dy);
    }
}

#[test]
fn lateral_direction_follows_compression_sign() {
    // Positive compression speed jumps toward -x.
    let p = ClimberParams::default();
    let op = OperatingPoint::lateral();
    for g in [30.0, 40.0, 50.0, 60.0, 70.0] {
        for w in [1400.0, 2000.0, 2800.0] {
            let left = PulsePolicy { gamma_max: deg(g), omega_c: deg(w), ..PulsePolicy::default() };
            let (_, m) = simulate_jump(&p, &left, &metrics_only()).unwrap();
            if m.dx.abs() > 1e-3 {
                assert!(m.dx < 0.0, "{g} {w}: {}", m.dx);
            }
            let (_, r) = simulate_jump(&p, &left.mirrored(), &metrics_only()).unwrap();
            if r.dx.abs() > 1e-3 {
                assert!(r.dx > 0.0, "{g} {w}: {}", r.dx);
            }
        }
    }
    let plan = plan_pulses(&[SteeringDirective::new(SteeringKind::LateralLeft, 1)], &PlanSettings::default()).unwrap();
    assert_eq!(plan[0].omega_c, op.omega_c);
    let (_, m) = simulate_jump(&p, &plan[0], &metrics_only()).unwrap();
    assert!(m.dx < -1e-3);
}

proptest! {
    #[test]
    fn sinuosity_map_strictly_decreases(a in 1.0 / 3.0..1.0f64, b in 1.0 / 3.0..1.0f64) {
        prop_assume!(a != b);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(sinuosity_to_gamma(lo).unwrap() > sinuosity_to_gamma(hi).unwrap());
    }

    #[test]
    fn vertical_plans_alternate(n in 1usize..40) {
        let plan = plan_pulses(&[SteeringDirective::new(SteeringKind::Vertical, n)], &PlanSettings::default()).unwrap();
        prop_assert_eq!(plan.len(), n);
        let net: f64 = plan.iter().map(|p| p.omega_c.signum()).sum();
        prop_assert!(net == f64::from(u8::from(n % 2 == 1)));
    }
}
