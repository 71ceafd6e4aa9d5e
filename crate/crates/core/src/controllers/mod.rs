//! Aerial cascade and mixer, ground balance cascade, throttle-scheduled
//! transition blending, decoupled pitch control and the mode manager.

mod aerial;
mod decoupled;
mod ground;
mod manager;
mod mixer;
mod pid;
mod transition;

pub use aerial::aerial_attitude_control;
pub use decoupled::{decoupled_control, decoupled_wheel_torques, DecoupledPids, SignRule};
pub use ground::ground_balance_control;
pub use manager::{ActiveMode, ControlOutput, ControlSetpoint, ModeManager, ModeRequest};
pub use mixer::mixer;
pub use pid::{PidGains, PidState};
pub use transition::{apply_transition, transition_scale};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::se3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(
    deserialize = "S: Copy + Deserialize<'de>",
    serialize = "S: Copy + Serialize"
))]
pub struct AerialGains<S> {
    /// Attitude-to-rate gains, 1/s.
    pub kp_r: Vec3<S>,
    /// Roll, pitch and yaw rate loops.
    pub rate: [PidGains<S>; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundGains<S> {
    /// Speed error to lean target, rad per m/s.
    pub kv: S,
    /// Lean loop, N·m per rad.
    pub balance: PidGains<S>,
    /// Yaw-rate loop, N·m per rad/s.
    pub k_yaw: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoupledGains<S> {
    /// Pitch error to pitch-rate target, 1/s.
    pub kp_theta: S,
    /// Thrust loop, N per rad/s.
    pub throttle: PidGains<S>,
    /// Tilt bias loop, rad per rad/s.
    pub tilt: PidGains<S>,
    /// Drive torque per desired speed, N·m per m/s.
    pub kv: S,
    /// Steer torque per desired yaw rate, N·m per rad/s.
    pub ks: S,
    /// Per-motor thrust ceiling, N. Keeps the wheels loaded.
    pub thrust_max: S,
    #[serde(default)]
    pub sign_rule: SignRule,
}

/// Complete controller configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[serde(bound(
    deserialize = "S: Real + Deserialize<'de>",
    serialize = "S: Real + Serialize"
))]
pub struct ControlGains<S> {
    pub aerial: AerialGains<S>,
    pub ground: GroundGains<S>,
    pub decoupled: DecoupledGains<S>,
    /// Per-motor base thrust in decoupled mode, N.
    pub t_hold: S,
    /// Throttle below which the transition scale is 0.
    pub thr_idle: S,
    /// Throttle at and above which the transition scale is 1.
    pub thr_hover: S,
    /// Derivative low-pass time constant shared by every loop, s.
    pub d_filter_tau: S,
}

impl<S: Real> Default for ControlGains<S> {
    fn default() -> Self {
        default_gains()
    }
}

/// Gains tuned against the default vehicle at `dt = 1 ms`.
pub fn default_gains<S: Real>() -> ControlGains<S> {
    let l = S::lit;
    let pid = |kp, ki, kd, lim| PidGains::new(l(kp), l(ki), l(kd), l(lim));
    ControlGains {
        aerial: AerialGains {
            kp_r: Vec3::new(l(6.0), l(6.0), l(3.0)),
            rate: [
                pid(2.0, 0.5, 0.02, 0.5),
                pid(0.9, 0.3, 0.01, 0.5),
                pid(0.16, 0.05, 0.0, 0.5),
            ],
        },
        ground: GroundGains {
            kv: l(0.15),
            balance: pid(5.0, 2.0, 0.18, 0.5),
            k_yaw: l(0.1),
        },
        decoupled: DecoupledGains {
            kp_theta: l(3.0),
            throttle: pid(4.0, 2.0, 0.0, 2.0),
            tilt: pid(0.3, 0.2, 0.0, 1.0),
            kv: l(1.0),
            ks: l(0.18),
            thrust_max: l(12.0),
            sign_rule: SignRule::Physical,
        },
        t_hold: l(8.0),
        thr_idle: l(0.15),
        thr_hover: l(0.68),
        d_filter_tau: l(0.02),
    }
}

impl<S: Real> ControlGains<S> {
    pub fn validate(&self) -> Result<()> {
        let a = &self.aerial;
        let g = &self.ground;
        let d = &self.decoupled;
        let mut gains = vec![
            ("aerial.kp_r.x", a.kp_r.x),
            ("aerial.kp_r.y", a.kp_r.y),
            ("aerial.kp_r.z", a.kp_r.z),
            ("ground.kv", g.kv),
            ("ground.k_yaw", g.k_yaw),
            ("decoupled.kp_theta", d.kp_theta),
            ("decoupled.kv", d.kv),
            ("decoupled.ks", d.ks),
            ("decoupled.thrust_max", d.thrust_max),
            ("t_hold", self.t_hold),
        ];
        let loops = [
            ("aerial.rate[0]", a.rate[0]),
            ("aerial.rate[1]", a.rate[1]),
            ("aerial.rate[2]", a.rate[2]),
            ("ground.balance", g.balance),
            ("decoupled.throttle", d.throttle),
            ("decoupled.tilt", d.tilt),
        ];
        for (name, pg) in loops {
            gains.extend([(name, pg.kp), (name, pg.ki), (name, pg.kd)]);
            if !(pg.i_limit > S::zero()) {
                return Err(Error::InvalidParams(format!("{name}.i_limit must be > 0")));
            }
        }
        for (name, v) in gains {
            if !(v >= S::zero() && v.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "gain {name} must be finite and >= 0, got {v}"
                )));
            }
        }
        let (idle, hover) = (self.thr_idle, self.thr_hover);
        if !(idle >= S::zero() && idle < hover && hover <= S::one()) {
            return Err(Error::InvalidParams(format!(
                "need 0 <= thr_idle < thr_hover <= 1, got {idle} and {hover}"
            )));
        }
        if !(self.d_filter_tau > S::zero()) {
            return Err(Error::InvalidParams("d_filter_tau must be > 0".into()));
        }
        Ok(())
    }
}
