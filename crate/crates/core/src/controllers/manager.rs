use log::warn;

use super::decoupled::{decoupled_control, DecoupledPids};
use super::{
    aerial_attitude_control, apply_transition, ground_balance_control, mixer, transition_scale,
};
use super::{ControlGains, PidState};
use crate::dynamics::{embed, Body, VehicleState};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::se3::Mat3;
use crate::vehicle::{saturate, throttle_to_thrust, ActuatorCommand, VehicleParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ModeRequest {
    Aerial,
    #[default]
    Ground,
    Decoupled,
}

/// Mode actually in effect after the manager's guards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActiveMode {
    Idle,
    Ground,
    /// Airborne, or on the ground with nonzero aerial authority.
    Aerial,
    Decoupled,
}

impl ActiveMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ActiveMode::Idle => "idle",
            ActiveMode::Ground => "ground",
            ActiveMode::Aerial => "aerial",
            ActiveMode::Decoupled => "decoupled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSetpoint<S> {
    /// Disarmed vehicles get an all-zero command.
    pub armed: bool,
    pub mode: ModeRequest,
    /// Desired attitude in flight.
    pub attitude: Mat3<S>,
    /// Pilot throttle in `[0, 1]`; sets the collective and the transition scale.
    pub throttle: S,
    /// Desired pitch in decoupled mode, rad.
    pub pitch: S,
    /// Desired speed along the heading, m/s.
    pub speed: S,
    /// Desired yaw rate on the ground, rad/s.
    pub yaw_rate: S,
}

impl<S: Real> Default for ControlSetpoint<S> {
    fn default() -> Self {
        Self {
            armed: false,
            mode: ModeRequest::Ground,
            attitude: Mat3::identity(),
            throttle: S::zero(),
            pitch: S::zero(),
            speed: S::zero(),
            yaw_rate: S::zero(),
        }
    }
}

impl<S: Real> ControlSetpoint<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.throttle >= S::zero() && self.throttle <= S::one()) {
            return Err(Error::OutOfRange {
                what: "throttle",
                value: self.throttle.to_f64_lossy(),
                lo: 0.0,
                hi: 1.0,
            });
        }
        let finite = self.attitude.is_finite()
            && self.pitch.is_finite()
            && self.speed.is_finite()
            && self.yaw_rate.is_finite();
        if !finite {
            return Err(Error::InvalidParams(
                "setpoint has non-finite fields".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput<S> {
    /// Saturated actuator command.
    pub cmd: ActuatorCommand<S>,
    pub mode: ActiveMode,
    /// Transition scale used this tick.
    pub blend: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Loops {
    aerial: bool,
    ground: bool,
    decoupled: bool,
}

/// Selects and runs the controllers for the current request and contact
/// state. Each loop's integrators restart whenever that loop becomes active.
#[derive(Debug, Clone)]
pub struct ModeManager<S> {
    pub gains: ControlGains<S>,
    aerial: [PidState<S>; 3],
    ground: PidState<S>,
    decoupled: DecoupledPids<S>,
    active: Loops,
    warned_decoupled_in_air: bool,
}

impl<S: Real> ModeManager<S> {
    pub fn new(gains: ControlGains<S>) -> Self {
        Self {
            gains,
            aerial: [PidState::default(); 3],
            ground: PidState::default(),
            decoupled: DecoupledPids::default(),
            active: Loops::default(),
            warned_decoupled_in_air: false,
        }
    }

    pub fn reset(&mut self) {
        *self = Self::new(self.gains);
    }

    pub fn update(
        &mut self,
        sp: &ControlSetpoint<S>,
        s: &VehicleState<S>,
        p: &VehicleParams<S>,
        dt: S,
    ) -> Result<ControlOutput<S>> {
        sp.validate()?;
        let g = self.gains;
        let tau_d = g.d_filter_tau;

        if !sp.armed {
            self.activate(Loops::default());
            return Ok(ControlOutput {
                cmd: ActuatorCommand::zero(),
                mode: ActiveMode::Idle,
                blend: S::zero(),
            });
        }

        let collective = throttle_to_thrust(sp.throttle, p)?;
        let (mode, blend, cmd) = match &s.body {
            Body::Aerial(a) => {
                if sp.mode == ModeRequest::Decoupled && !self.warned_decoupled_in_air {
                    warn!("decoupled mode requested while airborne; flying in aerial mode");
                    self.warned_decoupled_in_air = true;
                }
                self.activate(Loops {
                    aerial: true,
                    ..Loops::default()
                });
                let tau = aerial_attitude_control(
                    &sp.attitude,
                    &a.r,
                    a.omega,
                    &g.aerial,
                    dt,
                    tau_d,
                    &mut self.aerial,
                );
                // The scale has no effect in flight but is still logged, so
                // the trace stays a function of throttle alone.
                let c = transition_scale(sp.throttle, g.thr_idle, g.thr_hover);
                (ActiveMode::Aerial, c, mixer(tau, collective))
            }
            Body::Ground(gs) => {
                self.warned_decoupled_in_air = false;
                if sp.mode == ModeRequest::Decoupled {
                    self.activate(Loops {
                        decoupled: true,
                        ..Loops::default()
                    });
                    let cmd = decoupled_control(
                        sp.pitch,
                        sp.speed,
                        sp.yaw_rate,
                        gs,
                        &g.decoupled,
                        g.t_hold,
                        dt,
                        tau_d,
                        &mut self.decoupled,
                    );
                    (ActiveMode::Decoupled, S::zero(), cmd)
                } else {
                    let c = transition_scale(sp.throttle, g.thr_idle, g.thr_hover);
                    let use_aerial = c > S::zero();
                    let use_ground = c < S::one();
                    self.activate(Loops {
                        aerial: use_aerial,
                        ground: use_ground,
                        decoupled: false,
                    });

                    let ground_cmd = if use_ground {
                        let tau = ground_balance_control(
                            sp.speed,
                            sp.yaw_rate,
                            gs,
                            &g.ground,
                            p,
                            dt,
                            tau_d,
                            &mut self.ground,
                        );
                        ActuatorCommand {
                            thrust: [collective; 2],
                            tilt: [S::zero(); 2],
                            wheel_torque: tau,
                        }
                    } else {
                        ActuatorCommand::zero()
                    };
                    let aerial_cmd = if use_aerial {
                        let a = embed(gs, p);
                        let tau = aerial_attitude_control(
                            &sp.attitude,
                            &a.r,
                            a.omega,
                            &g.aerial,
                            dt,
                            tau_d,
                            &mut self.aerial,
                        );
                        mixer(tau, collective)
                    } else {
                        ActuatorCommand::zero()
                    };
                    let mode = if use_aerial {
                        ActiveMode::Aerial
                    } else {
                        ActiveMode::Ground
                    };
                    (mode, c, apply_transition(c, &aerial_cmd, &ground_cmd))
                }
            }
        };
        Ok(ControlOutput {
            cmd: saturate(&cmd, p),
            mode,
            blend,
        })
    }

    fn activate(&mut self, next: Loops) {
        if next.aerial && !self.active.aerial {
            self.aerial = [PidState::default(); 3];
        }
        if next.ground && !self.active.ground {
            self.ground.reset();
        }
        if next.decoupled && !self.active.decoupled {
            self.decoupled.reset();
        }
        self.active = next;
    }
}
