//! Scenario files: vehicle and gain overrides, an initial state, an initial
//! setpoint and a list of timed events.
//!
//! Angles in scenario files are in degrees (`*_deg` keys); everything else
//! is SI. See `scenarios/README.md` for the full schema.

use serde::Deserialize;

use hagv_core::controllers::{ControlSetpoint, ModeRequest};
use hagv_core::dynamics::{AerialState, GroundState, VehicleState};
use hagv_core::se3::{euler_to_rotation, EulerAngles, Vec3};
use hagv_core::Config;

use crate::error::{Result, SimError};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Physics and control period, s.
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub duration: f64,
    /// Ground slope, degrees. Overrides `vehicle.incline` when present.
    #[serde(default)]
    pub incline_deg: Option<f64>,
    /// `[vehicle]` and `[gains]` overrides on top of the defaults.
    #[serde(default)]
    pub config: toml::Table,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default)]
    pub setpoint: SetpointPatch,
    #[serde(default)]
    pub events: Vec<Event>,
}

fn default_dt() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contact {
    #[default]
    Ground,
    Aerial,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialState {
    pub contact: Contact,
    pub x: f64,
    pub x_dot: f64,
    pub pitch_deg: f64,
    pub pitch_rate: f64,
    pub yaw_deg: f64,
    pub yaw_rate: f64,
    /// Aerial only.
    pub roll_deg: f64,
    /// Aerial only: CG height, m.
    pub altitude: f64,
    /// Aerial only: inertial velocity, m/s.
    pub velocity: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Aerial,
    Ground,
    Decoupled,
}

impl From<ModeName> for ModeRequest {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Aerial => ModeRequest::Aerial,
            ModeName::Ground => ModeRequest::Ground,
            ModeName::Decoupled => ModeRequest::Decoupled,
        }
    }
}

/// Partial setpoint; unset fields keep their current value.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SetpointPatch {
    pub armed: Option<bool>,
    pub mode: Option<ModeName>,
    pub throttle: Option<f64>,
    /// Decoupled pitch target.
    pub pitch_deg: Option<f64>,
    pub speed: Option<f64>,
    pub yaw_rate: Option<f64>,
    /// Desired roll, pitch, yaw in flight.
    pub attitude_deg: Option<[f64; 3]>,
}

impl SetpointPatch {
    pub fn apply(&self, sp: &mut ControlSetpoint<f64>) {
        if let Some(v) = self.armed {
            sp.armed = v;
        }
        if let Some(v) = self.mode {
            sp.mode = v.into();
        }
        if let Some(v) = self.throttle {
            sp.throttle = v;
        }
        if let Some(v) = self.pitch_deg {
            sp.pitch = v.to_radians();
        }
        if let Some(v) = self.speed {
            sp.speed = v;
        }
        if let Some(v) = self.yaw_rate {
            sp.yaw_rate = v;
        }
        if let Some([r, p, y]) = self.attitude_deg {
            sp.attitude = euler_to_rotation(EulerAngles::new(
                r.to_radians(),
                p.to_radians(),
                y.to_radians(),
            ));
        }
    }
}

/// Linear throttle ramp from the current throttle to `throttle` over `over` s.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ramp {
    pub throttle: f64,
    pub over: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    /// Event time, s. Must lie on the `dt` grid.
    pub at: f64,
    #[serde(default)]
    pub set: Option<SetpointPatch>,
    #[serde(default)]
    pub ramp: Option<Ramp>,
    /// Angular impulse about the pitch axis, N·m·s.
    #[serde(default)]
    pub impulse: Option<f64>,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(text).map_err(|e| SimError::Scenario(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SimError::Scenario(format!("{}: {m}", self.name)));
        if !(self.dt > 0.0 && self.dt <= hagv_core::dynamics::MAX_DT) {
            return bad(format!(
                "dt = {} outside (0, {}]",
                self.dt,
                hagv_core::dynamics::MAX_DT
            ));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad(format!("duration = {} must be > 0", self.duration));
        }
        let mut last = f64::NEG_INFINITY;
        for (i, e) in self.events.iter().enumerate() {
            if !(e.at >= 0.0 && e.at <= self.duration) {
                return bad(format!("event {i} at {} outside [0, duration]", e.at));
            }
            if e.at < last {
                return bad(format!("event {i} at {} is out of order", e.at));
            }
            last = e.at;
            let ticks = e.at / self.dt;
            if (ticks - ticks.round()).abs() > 1e-6 {
                return bad(format!("event {i} at {} is not a multiple of dt", e.at));
            }
            let actions =
                e.set.is_some() as u8 + e.ramp.is_some() as u8 + e.impulse.is_some() as u8;
            if actions != 1 {
                return bad(format!(
                    "event {i} must have exactly one of set, ramp, impulse"
                ));
            }
            if let Some(r) = e.ramp {
                if !(0.0..=1.0).contains(&r.throttle) || !(r.over >= 0.0) {
                    return bad(format!(
                        "event {i}: ramp needs throttle in [0, 1] and over >= 0"
                    ));
                }
            }
            if let Some(l) = e.impulse {
                if !l.is_finite() {
                    return bad(format!("event {i}: impulse must be finite"));
                }
            }
        }
        self.config()?;
        Ok(())
    }

    /// Defaults merged with the scenario's overrides.
    pub fn config(&self) -> Result<Config> {
        let mut cfg = Config::from_table(self.config.clone())?;
        if let Some(deg) = self.incline_deg {
            cfg.vehicle.incline = deg.to_radians();
            cfg.validate()?;
        }
        Ok(cfg)
    }

    pub fn ticks(&self) -> u64 {
        (self.duration / self.dt).round() as u64
    }

    pub fn initial_state(&self) -> VehicleState<f64> {
        let i = &self.initial;
        match i.contact {
            Contact::Ground => VehicleState::ground(GroundState {
                x: i.x,
                x_dot: i.x_dot,
                pitch: i.pitch_deg.to_radians(),
                pitch_rate: i.pitch_rate,
                yaw: i.yaw_deg.to_radians(),
                yaw_rate: i.yaw_rate,
                ..GroundState::upright()
            }),
            Contact::Aerial => {
                let mut a = AerialState::at_rest(Vec3::new(i.x, 0.0, i.altitude));
                a.r = euler_to_rotation(EulerAngles::new(
                    i.roll_deg.to_radians(),
                    i.pitch_deg.to_radians(),
                    i.yaw_deg.to_radians(),
                ));
                a.v = Vec3::from_array(i.velocity);
                a.odometer = i.x;
                VehicleState::aerial(a)
            }
        }
    }

    pub fn initial_setpoint(&self) -> ControlSetpoint<f64> {
        let mut sp = ControlSetpoint::default();
        self.setpoint.apply(&mut sp);
        sp
    }
}

/// Scenarios shipped in `scenarios/`, by name.
pub const BUILTIN: &[(&str, &str)] = &[
    (
        "disturbance_recovery",
        include_str!("../../../scenarios/disturbance_recovery.toml"),
    ),
    (
        "aerial_attitude_steps",
        include_str!("../../../scenarios/aerial_attitude_steps.toml"),
    ),
    (
        "air_ground_transition",
        include_str!("../../../scenarios/air_ground_transition.toml"),
    ),
    (
        "step_pitch",
        include_str!("../../../scenarios/step_pitch.toml"),
    ),
    (
        "pitch_hold_drive",
        include_str!("../../../scenarios/pitch_hold_drive.toml"),
    ),
    ("mission", include_str!("../../../scenarios/mission.toml")),
];

pub fn builtin(name: &str) -> Result<Scenario> {
    let (_, text) = BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| SimError::Scenario(format!("no built-in scenario named {name:?}")))?;
    Scenario::from_toml_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "name = \"t\"\nduration = 1.0\n";

    #[test]
    fn minimal_defaults() {
        let sc = Scenario::from_toml_str(MINIMAL).unwrap();
        assert_eq!(sc.dt, 1e-3);
        assert_eq!(sc.ticks(), 1000);
        assert!(!sc.initial_setpoint().armed);
    }

    #[test]
    fn rejects_off_grid_and_unsorted_events() {
        let off = format!("{MINIMAL}[[events]]\nat = 0.0005\nimpulse = 0.1\n");
        assert!(Scenario::from_toml_str(&off).is_err());
        let unsorted = format!(
            "{MINIMAL}[[events]]\nat = 0.5\nimpulse = 0.1\n[[events]]\nat = 0.2\nimpulse = 0.1\n"
        );
        assert!(Scenario::from_toml_str(&unsorted).is_err());
    }

    #[test]
    fn rejects_ambiguous_event() {
        let two =
            format!("{MINIMAL}[[events]]\nat = 0.5\nimpulse = 0.1\nset = {{ speed = 1.0 }}\n");
        assert!(Scenario::from_toml_str(&two).is_err());
    }

    #[test]
    fn overrides_reach_config() {
        let text = format!(
            "{MINIMAL}incline_deg = 5.0\n[config.vehicle]\nm = 2.5\n[config.gains]\nt_hold = 7.0\n"
        );
        let cfg = Scenario::from_toml_str(&text).unwrap().config().unwrap();
        assert_eq!(cfg.vehicle.m, 2.5);
        assert_eq!(cfg.gains.t_hold, 7.0);
        assert!((cfg.vehicle.incline - 5f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn builtins_parse() {
        for (name, _) in BUILTIN {
            let sc = builtin(name).unwrap();
            assert_eq!(&sc.name, name);
        }
    }
}
