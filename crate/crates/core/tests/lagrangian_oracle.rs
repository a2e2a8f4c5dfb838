//! Newton-Euler accelerations checked against an independent Lagrangian
//! formulation built from link Jacobians.

mod support;

use climber_core::dynamics::{
    angular_momentum_about_com, center_of_mass, flight_accel, link_kinematics, mechanical_energy, stance_accel,
};
use climber_core::{ClimberParams, HybridState, JointTorques};
use proptest::prelude::*;
use support::{drag, rel_close, run_passive, Lagrangian};

fn angle() -> impl Strategy<Value = f64> {
    -std::f64::consts::PI..std::f64::consts::PI
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn stance_matches_lagrangian(
        th in prop::array::uniform3(angle()),
        w in prop::array::uniform3(-20.0..20.0f64),
        tau in prop::array::uniform2(-0.3..0.3f64),
        pin in prop::array::uniform2(-1.0..1.0f64),
    ) {
        let p = ClimberParams::default();
        let s = HybridState::stance(0.0, th, w, pin);
        let ne = stance_accel(&s, &JointTorques(tau), &p).unwrap();
        let lag = Lagrangian { pinned: true }.accel(&s, tau, &p);
        prop_assert!(rel_close(&ne.theta_ddot, lag.as_slice(), 1e-6), "{:?} vs {}", ne.theta_ddot, lag);

        // Head reaction from total linear momentum: F_1 = Σ m a_i − Σ external.
        let kin = link_kinematics(&s, &p);
        let mut need = [0.0; 2];
        let g = p.gravity * p.wall_angle.cos();
        let l = p.link_length;
        for i in 0..3 {
            let mut a = [0.0; 2];
            for j in 0..=i {
                let arm = if j == i { l / 2.0 } else { l };
                let (sn, cs) = th[j].sin_cos();
                a[0] += arm * (-sn * ne.theta_ddot[j] - cs * w[j] * w[j]);
                a[1] += arm * (cs * ne.theta_ddot[j] - sn * w[j] * w[j]);
            }
            let v = kin.center_velocities[i];
            need[0] += p.mass * a[0] - drag(v[0], p.drag_x, p.drag_band);
            need[1] += p.mass * a[1] + p.mass * g - drag(v[1], p.drag_y, p.drag_band);
        }
        let head = ne.forces.head.unwrap();
        prop_assert!(rel_close(&head, &need, 1e-6), "{head:?} vs {need:?}");
    }

    #[test]
    fn flight_matches_lagrangian(
        th in prop::array::uniform3(angle()),
        w in prop::array::uniform3(-20.0..20.0f64),
        tau in prop::array::uniform2(-0.3..0.3f64),
        pos in prop::array::uniform2(-1.0..1.0f64),
        vel in prop::array::uniform2(-2.0..2.0f64),
    ) {
        let p = ClimberParams::default();
        let s = HybridState::flight(0.0, th, w, pos, vel);
        let ne = flight_accel(&s, &JointTorques(tau), &p).unwrap();
        let lag = Lagrangian { pinned: false }.accel(&s, tau, &p);
        let mut got = ne.head_link_accel.to_vec();
        got.extend_from_slice(&ne.theta_ddot);
        prop_assert!(rel_close(&got, lag.as_slice(), 1e-6), "{got:?} vs {lag}");
    }

    #[test]
    fn free_flight_conserves_com_and_momentum_rates(
        th in prop::array::uniform3(angle()),
        w in prop::array::uniform3(-20.0..20.0f64),
        tau in prop::array::uniform2(-0.3..0.3f64),
        vel in prop::array::uniform2(-2.0..2.0f64),
    ) {
        let p = ClimberParams::default().drag_free();
        let s = HybridState::flight(0.0, th, w, [0.0; 2], vel);
        let a = flight_accel(&s, &JointTorques(tau), &p).unwrap();
        // Finite-difference the momentum along the exact acceleration.
        let dt = 1e-6;
        let step = |sgn: f64| {
            let mut n = s;
            for i in 0..3 {
                n.theta[i] += sgn * dt * w[i] + 0.5 * dt * dt * a.theta_ddot[i];
                n.theta_dot[i] += sgn * dt * a.theta_ddot[i];
            }
            for k in 0..2 {
                n.head_link_pos[k] += sgn * dt * vel[k] + 0.5 * dt * dt * a.head_link_accel[k];
                n.head_link_vel[k] += sgn * dt * a.head_link_accel[k];
            }
            n
        };
        let (fwd, back) = (step(1.0), step(-1.0));
        let dh = (angular_momentum_about_com(&fwd, &p) - angular_momentum_about_com(&back, &p)) / (2.0 * dt);
        prop_assert!(dh.abs() < 1e-5, "dH/dt = {dh}");
        let dv = |k: usize| (center_of_mass(&fwd, &p).1[k] - center_of_mass(&back, &p).1[k]) / (2.0 * dt);
        prop_assert!(dv(0).abs() < 1e-5);
        prop_assert!((dv(1) + p.wall_gravity()).abs() < 1e-5);
    }
}

#[test]
fn passive_pendulum_conserves_energy() {
    let y0 = [-0.3, 0.8, -1.9, 0.0, 0.0, 1.0, -2.0, 3.0, 0.0, 0.0];
    let (sys, y1) = run_passive(true, y0, 1.0);
    let e0 = mechanical_energy(&sys.state(&y0), &sys.params);
    let e1 = mechanical_energy(&sys.state(&y1), &sys.params);
    assert!((e1 - e0).abs() < 1e-6, "drift {}", e1 - e0);
}

#[test]
fn ballistic_flight_conserves_energy_momentum_and_com_path() {
    let y0 = [0.4, 1.2, 2.5, 0.0, 0.0, 3.0, -4.0, 6.0, 0.3, 1.1];
    let t = 0.4;
    let (sys, y1) = run_passive(false, y0, t);
    let (s0, s1) = (sys.state(&y0), sys.state(&y1));
    let p = &sys.params;
    assert!((mechanical_energy(&s1, p) - mechanical_energy(&s0, p)).abs() < 1e-6);
    assert!((angular_momentum_about_com(&s1, p) - angular_momentum_about_com(&s0, p)).abs() < 1e-9);
    let (c0, v0) = center_of_mass(&s0, p);
    let (c1, v1) = center_of_mass(&s1, p);
    let g = p.wall_gravity();
    assert!((c1[0] - (c0[0] + v0[0] * t)).abs() < 1e-9);
    assert!((c1[1] - (c0[1] + v0[1] * t - 0.5 * g * t * t)).abs() < 1e-9);
    assert!((v1[1] - (v0[1] - g * t)).abs() < 1e-9);
}
