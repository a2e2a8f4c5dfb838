//! Hybrid dynamics, pulse control and design search for a three-link
//! wall-climbing chain.
//!
//! The chain hangs from a head-mounted attachment on an inclined wall and
//! climbs by jumping: a triangular joint-angle pulse compresses the body,
//! the head releases when its normal reaction vanishes, and the chain flies
//! until the head tip stops rising, where it re-attaches.
//!
//! This crate is `no_std` with `alloc`. File formats, the parallel sweep
//! runner and the command-line tool live in the `climber` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod actuation;
pub mod analysis;
pub mod dynamics;
pub mod gait;
pub mod hybrid;
pub mod math;
pub mod ode;
pub mod params;

pub use actuation::{JointController, MotorModel, PulsePolicy};
pub use dynamics::{HybridState, JointTorques, Phase, ReactionForces};
pub use hybrid::{integrate_phase, simulate_gait, simulate_jump, JumpMetrics, RestPosture, SimError, SimOptions, Trajectory};
pub use params::ClimberParams;
