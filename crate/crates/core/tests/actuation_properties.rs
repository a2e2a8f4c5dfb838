//! Envelope, power and reference-shape properties of the actuation layer.

use climber_core::actuation::{reference, reference_periodic, MotorModel};
use climber_core::math::{deg, rpm};
use climber_core::{ClimberParams, PulsePolicy};
use proptest::prelude::*;

fn motor() -> MotorModel {
    ClimberParams::default().motor()
}

fn any_motor() -> impl Strategy<Value = MotorModel> {
    (0.05..1.0f64, 100.0..1500.0f64, 3.0..15.0f64, 3.0..12.0f64).prop_map(|(st, rpm_nl, vs, vm)| MotorModel {
        stall_torque: st,
        no_load_speed: rpm(rpm_nl),
        supply_voltage: vs,
        motor_voltage: vm,
        torque_constant: 0.1,
    })
}

fn any_policy() -> impl Strategy<Value = PulsePolicy> {
    (5.0..150.0f64, 50.0..3000.0f64, any::<bool>(), 50.0..3000.0f64, 0.0..0.3f64).prop_map(|(g, wc, neg, we, rest)| {
        PulsePolicy {
            gamma_max: deg(g),
            omega_c: if neg { -deg(wc) } else { deg(wc) },
            omega_e: deg(we),
            rest_time: rest,
            ..PulsePolicy::default()
        }
    })
}

/// Envelope written out independently of `MotorModel`.
fn envelope(m: &MotorModel, rate: f64) -> (f64, f64) {
    let r = m.supply_voltage / m.motor_voltage;
    let hi = |w: f64| {
        if w <= 0.0 {
            r * m.stall_torque
        } else {
            (r * m.stall_torque * (1.0 - w / (r * m.no_load_speed))).max(0.0)
        }
    };
    (-hi(-rate), hi(rate))
}

#[test]
fn stall_torque_at_supply_voltage() {
    let m = motor();
    let expected = 11.0 / 6.0 * 0.127;
    assert!((m.max_torque(0.0) - expected).abs() < 1e-12);
    assert!((m.saturate(1.0, 0.0) - expected).abs() < 1e-12);
    assert_eq!(m.max_torque(11.0 / 6.0 * rpm(410.0) * (1.0 + 1e-12)), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn saturated_torque_stays_in_envelope(m in any_motor(), tau in -5.0..5.0f64, rate in -300.0..300.0f64) {
        let out = m.saturate(tau, rate);
        let (lo, hi) = envelope(&m, rate);
        prop_assert!(out >= lo - 1e-12 && out <= hi + 1e-12);
        prop_assert!((m.max_torque(rate) - hi).abs() < 1e-12);
        prop_assert!((m.min_torque(rate) - lo).abs() < 1e-12);
        if (lo..=hi).contains(&tau) {
            prop_assert_eq!(out, tau);
        }
    }

    #[test]
    fn envelope_is_continuous(m in any_motor(), rate in -300.0..300.0f64) {
        // Slope of the envelope is bounded by stall torque over no-load speed.
        let h = 1e-7;
        let lip = m.stall_torque / m.no_load_speed;
        prop_assert!((m.max_torque(rate + h) - m.max_torque(rate)).abs() <= lip * h * (1.0 + 1e-6) + 1e-15);
        prop_assert!((m.min_torque(rate + h) - m.min_torque(rate)).abs() <= lip * h * (1.0 + 1e-6) + 1e-15);
    }

    #[test]
    fn output_power_is_bounded(m in any_motor(), tau in -5.0..5.0f64, rate in -300.0..300.0f64) {
        let r = m.supply_voltage / m.motor_voltage;
        let peak = r * r * m.stall_torque * m.no_load_speed / 4.0;
        prop_assert!(m.saturate(tau, rate) * rate <= peak * (1.0 + 1e-12));
    }

    #[test]
    fn periodic_reference_repeats(p in any_policy(), t in 0.0..2.0f64, k in 1u32..5) {
        let a = reference_periodic(t, &p).unwrap();
        let b = reference_periodic(t + f64::from(k) * p.period(), &p).unwrap();
        prop_assert!((a.angle - b.angle).abs() < 1e-9);
    }

    #[test]
    fn reference_rate_integrates_to_zero(p in any_policy()) {
        // Midpoint rule on each piece between breakpoints.
        let [t1, t2] = p.breakpoints();
        let knots = [0.0, t1, t2, p.period()];
        let n = 64;
        let mut total = 0.0;
        for w in knots.windows(2) {
            let dt = (w[1] - w[0]) / f64::from(n);
            total += (0..n).map(|i| reference(w[0] + (f64::from(i) + 0.5) * dt, &p).unwrap().rate * dt).sum::<f64>();
        }
        prop_assert!(total.abs() < 1e-12, "{total}");
        prop_assert!(reference(p.period(), &p).unwrap().angle.abs() < 1e-12);
    }

    #[test]
    fn negating_speed_negates_reference(p in any_policy(), t in -0.1..1.0f64) {
        let a = reference(t, &p).unwrap();
        let b = reference(t, &p.mirrored()).unwrap();
        prop_assert_eq!(a.angle, -b.angle);
        prop_assert_eq!(a.rate, -b.rate);
    }
}
