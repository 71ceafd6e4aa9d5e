use serde::{Deserialize, Serialize};

use super::pid::PidState;
use super::DecoupledGains;
use crate::dynamics::GroundState;
use crate::scalar::Real;
use crate::vehicle::ActuatorCommand;

/// How the pitch-rate error maps to a thrust error.
///
/// Raising thrust unloads the wheels, which removes the support moment that
/// tips the chassis away from upright. Leaning back (`θ < 0`) more thrust
/// therefore pitches up and leaning forward it pitches down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignRule {
    /// `T_e = −ω_θe` for `θ > 0`, `+ω_θe` otherwise.
    #[default]
    Physical,
    /// `T_e = −ω_θe` when `θ > 0 ∧ θ̇ ≤ θ̇_d < 0` or
    /// `θ < 0 ∧ ¬(θ̇ ≥ θ̇_d ∧ θ̇_d > 0)`, `+ω_θe` otherwise, with `θ̇_d = ω_θd`.
    Printed,
}

impl SignRule {
    /// `±1` factor taking the pitch-rate error to the thrust error.
    pub fn sign<S: Real>(self, pitch: S, pitch_rate: S, rate_d: S) -> S {
        let negate = match self {
            SignRule::Physical => pitch > S::zero(),
            SignRule::Printed => {
                let z = S::zero();
                (pitch > z && pitch_rate <= rate_d && rate_d < z)
                    || (pitch < z && !(pitch_rate >= rate_d && rate_d > z))
            }
        };
        if negate {
            -S::one()
        } else {
            S::one()
        }
    }

    pub fn thrust_error<S: Real>(self, pitch: S, pitch_rate: S, rate_d: S, rate_e: S) -> S {
        self.sign(pitch, pitch_rate, rate_d) * rate_e
    }
}

/// PID states of the decoupled controller.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DecoupledPids<S> {
    pub throttle: PidState<S>,
    pub tilt: PidState<S>,
}

impl<S: Real> DecoupledPids<S> {
    pub fn reset(&mut self) {
        self.throttle.reset();
        self.tilt.reset();
    }
}

/// Pitch held by thrust and tilt, translation and steering by the wheels.
///
/// `t_hold` is the per-motor base thrust in N, and the thrust never exceeds
/// `g.thrust_max`. Servo tilts track `−θ` plus a
/// PID bias on the pitch-rate error. Wheel torques are open-loop in `v_d`
/// and `γ̇_d` and never read the pitch state.
#[allow(clippy::too_many_arguments)]
pub fn decoupled_control<S: Real>(
    pitch_d: S,
    v_d: S,
    yaw_rate_d: S,
    s: &GroundState<S>,
    g: &DecoupledGains<S>,
    t_hold: S,
    dt: S,
    tau_d: S,
    pids: &mut DecoupledPids<S>,
) -> ActuatorCommand<S> {
    let rate_d = g.kp_theta * (pitch_d - s.pitch);
    let rate_e = rate_d - s.pitch_rate;
    let rate_meas = g.kp_theta * s.pitch + s.pitch_rate;

    let sign = g.sign_rule.sign(s.pitch, s.pitch_rate, rate_d);
    let thrust = t_hold
        + pids
            .throttle
            .update(&g.throttle, sign * rate_e, sign * rate_meas, dt, tau_d);
    let thrust = thrust.min(g.thrust_max);
    let tilt = -s.pitch + pids.tilt.update(&g.tilt, rate_e, rate_meas, dt, tau_d);

    ActuatorCommand {
        thrust: [thrust, thrust],
        tilt: [tilt, tilt],
        wheel_torque: decoupled_wheel_torques(v_d, yaw_rate_d, g),
    }
}

/// `τ₁ = k_v·v_d − k_s·γ̇_d`, `τ₂ = k_v·v_d + k_s·γ̇_d`.
pub fn decoupled_wheel_torques<S: Real>(v_d: S, yaw_rate_d: S, g: &DecoupledGains<S>) -> [S; 2] {
    let drive = g.kv * v_d;
    let steer = g.ks * yaw_rate_d;
    [drive - steer, drive + steer]
}
