//! Dynamics, actuator models and controllers for a two-rotor tilt-rotor
//! vehicle with a coaxial pair of driven wheels.
//!
//! The math is generic over [`Real`] (`f32` or `f64`). The aliases at the
//! crate root fix the scalar to `f64`; [`f32`] has the single-precision set.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Small fixed-size matrix code reads better with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod controllers;
pub mod dynamics;
pub mod error;
mod linsolve;
pub mod scalar;
pub mod se3;
pub mod vehicle;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Vec3 = se3::Vec3<f64>;
pub type Mat3 = se3::Mat3<f64>;
pub type EulerAngles = se3::EulerAngles<f64>;
pub type VehicleParams = vehicle::VehicleParams<f64>;
pub type ActuatorCommand = vehicle::ActuatorCommand<f64>;
pub type AerialState = dynamics::AerialState<f64>;
pub type GroundState = dynamics::GroundState<f64>;
pub type VehicleState = dynamics::VehicleState<f64>;
pub type ContactForces = dynamics::ContactForces<f64>;
pub type ControlGains = controllers::ControlGains<f64>;
pub type ControlSetpoint = controllers::ControlSetpoint<f64>;
pub type ModeManager = controllers::ModeManager<f64>;
pub type Config = config::Config<f64>;

/// Single-precision aliases.
pub mod f32 {
    pub type Vec3 = crate::se3::Vec3<f32>;
    pub type Mat3 = crate::se3::Mat3<f32>;
    pub type VehicleParams = crate::vehicle::VehicleParams<f32>;
    pub type ActuatorCommand = crate::vehicle::ActuatorCommand<f32>;
    pub type VehicleState = crate::dynamics::VehicleState<f32>;
    pub type ControlGains = crate::controllers::ControlGains<f32>;
    pub type ModeManager = crate::controllers::ModeManager<f32>;
}
