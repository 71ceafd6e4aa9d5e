use crate::scalar::Real;
use crate::se3::Vec3;
use crate::vehicle::ActuatorCommand;

/// Bicopter allocation.
///
/// ```text
/// T₁ =  τ_roll + T_d      σ₁ = τ_pitch − τ_yaw
/// T₂ = −τ_roll + T_d      σ₂ = τ_pitch + τ_yaw
/// ```
///
/// `collective` is the per-motor thrust in N. Wheel torques are zero and
/// nothing is saturated.
pub fn mixer<S: Real>(tau: Vec3<S>, collective: S) -> ActuatorCommand<S> {
    ActuatorCommand {
        thrust: [tau.x + collective, -tau.x + collective],
        tilt: [tau.y - tau.z, tau.y + tau.z],
        wheel_torque: [S::zero(); 2],
    }
}
