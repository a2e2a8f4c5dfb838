//! Independent Lagrangian model of the chain, shared by the oracle tests
//! and the acceptance run.
#![allow(dead_code)]

use climber_core::dynamics::{flight_accel, stance_accel};
use climber_core::ode::{integrate, Event, OdeSystem, Tolerances};
use climber_core::{ClimberParams, HybridState, JointTorques};
use nalgebra::{DMatrix, DVector};

pub fn drag(v: f64, c: f64, band: f64) -> f64 {
    if v.abs() < band {
        -c * v / band
    } else if v > 0.0 {
        -c
    } else if v < 0.0 {
        c
    } else {
        0.0
    }
}

/// Generalized coordinates: `θ_1..3` when pinned, `x_1, y_1, θ_1..3` when free.
pub struct Lagrangian {
    pub pinned: bool,
}

impl Lagrangian {
    fn dof(&self) -> usize {
        if self.pinned {
            3
        } else {
            5
        }
    }

    fn angle_index(&self, i: usize) -> usize {
        if self.pinned {
            i
        } else {
            2 + i
        }
    }

    /// Center Jacobian and velocity-product bias for link `i`.
    fn link_terms(&self, s: &HybridState, p: &ClimberParams, i: usize) -> (DMatrix<f64>, [f64; 2]) {
        let n = self.dof();
        let l = p.link_length;
        let h = l / 2.0;
        let mut jac = DMatrix::zeros(2, n);
        let mut bias = [0.0; 2];
        if !self.pinned {
            jac[(0, 0)] = 1.0;
            jac[(1, 1)] = 1.0;
        }
        for j in 0..=i {
            // Lever along link j to the center of link i.
            let arm = if j == i {
                if self.pinned || i > 0 { h } else { 0.0 }
            } else if !self.pinned && j == 0 {
                h
            } else {
                l
            };
            let (sn, cs) = s.theta[j].sin_cos();
            let k = self.angle_index(j);
            jac[(0, k)] += -arm * sn;
            jac[(1, k)] += arm * cs;
            let w = s.theta_dot[j];
            bias[0] -= arm * cs * w * w;
            bias[1] -= arm * sn * w * w;
        }
        (jac, bias)
    }

    fn qdot(&self, s: &HybridState) -> DVector<f64> {
        let mut v = Vec::new();
        if !self.pinned {
            v.extend_from_slice(&s.head_link_vel);
        }
        v.extend_from_slice(&s.theta_dot);
        DVector::from_vec(v)
    }

    pub fn accel(&self, s: &HybridState, tau: [f64; 2], p: &ClimberParams) -> DVector<f64> {
        let n = self.dof();
        let inertia = p.inertia_scale / 12.0 * p.mass * p.link_length.powi(2);
        let g = p.gravity * p.wall_angle.cos();
        let qd = self.qdot(s);
        let mut mass = DMatrix::zeros(n, n);
        let mut force = DVector::zeros(n);
        for i in 0..3 {
            let (jac, bias) = self.link_terms(s, p, i);
            let v = &jac * &qd;
            mass += p.mass * jac.transpose() * &jac;
            let f = DVector::from_vec(vec![
                drag(v[0], p.drag_x, p.drag_band) - p.mass * bias[0],
                -p.mass * g + drag(v[1], p.drag_y, p.drag_band) - p.mass * bias[1],
            ]);
            force += jac.transpose() * f;
            mass[(self.angle_index(i), self.angle_index(i))] += inertia;
        }
        // Joint j drives link j + 1 against link j.
        force[self.angle_index(0)] -= tau[0];
        force[self.angle_index(1)] += tau[0] - tau[1];
        force[self.angle_index(2)] += tau[1];
        mass.lu().solve(&force).expect("mass matrix is positive definite")
    }
}

pub fn rel_close(a: &[f64], b: &[f64], rel: f64) -> bool {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff <= rel * scale.max(1.0)
}

pub struct Passive {
    pub params: ClimberParams,
    pub pinned: bool,
}

impl Passive {
    pub fn state(&self, y: &[f64; 10]) -> HybridState {
        let th = [y[0], y[1], y[2]];
        let w = [y[5], y[6], y[7]];
        if self.pinned {
            HybridState::stance(0.0, th, w, [0.0; 2])
        } else {
            HybridState::flight(0.0, th, w, [y[3], y[4]], [y[8], y[9]])
        }
    }
}

impl OdeSystem<10> for Passive {
    type Error = ();
    fn rhs(&self, _t: f64, y: &[f64; 10]) -> Result<[f64; 10], ()> {
        let s = self.state(y);
        let (th, xy) = if self.pinned {
            (stance_accel(&s, &JointTorques::default(), &self.params).map_err(|_| ())?.theta_ddot, [0.0; 2])
        } else {
            let a = flight_accel(&s, &JointTorques::default(), &self.params).map_err(|_| ())?;
            (a.theta_ddot, a.head_link_accel)
        };
        Ok([y[5], y[6], y[7], y[8], y[9], th[0], th[1], th[2], xy[0], xy[1]])
    }
}

pub fn run_passive(pinned: bool, y0: [f64; 10], t_end: f64) -> (Passive, [f64; 10]) {
    let sys = Passive { params: ClimberParams::default().drag_free(), pinned };
    let tol = Tolerances { rtol: 1e-11, atol: 1e-13, ..Tolerances::default() };
    let out = integrate(
        &sys,
        0.0,
        y0,
        t_end,
        None,
        &tol,
        None::<Event<fn(f64, &[f64; 10]) -> Result<f64, ()>>>,
        None,
        |_, _| Ok(()),
    )
    .unwrap();
    (sys, out.y)
}
