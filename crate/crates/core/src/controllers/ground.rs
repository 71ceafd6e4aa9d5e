use super::pid::PidState;
use super::GroundGains;
use crate::dynamics::GroundState;
use crate::scalar::Real;
use crate::vehicle::VehicleParams;

/// Balance-bot cascade.
///
/// The outer loop turns the axle-speed error into a lean target,
/// `θ_e = k_v·(v_d − v) − θ`, and the inner PID gives `u`. Positive wheel
/// torque drives the wheels forward and pitches the chassis back, so the
/// common-mode torque is `−u`; yaw rate error is added differentially.
#[allow(clippy::too_many_arguments)]
pub fn ground_balance_control<S: Real>(
    v_d: S,
    yaw_rate_d: S,
    s: &GroundState<S>,
    g: &GroundGains<S>,
    p: &VehicleParams<S>,
    dt: S,
    tau_d: S,
    pid: &mut PidState<S>,
) -> [S; 2] {
    let v = s.axle_speed(p);
    let measured = g.kv * v + s.pitch;
    let theta_e = g.kv * v_d - measured;
    let u = pid.update(&g.balance, theta_e, measured, dt, tau_d);
    let yaw = g.k_yaw * (yaw_rate_d - s.yaw_rate);
    [-u - yaw, -u + yaw]
}
