//! Wire messages. Every message is one WebSocket text frame holding a JSON
//! object with a protocol version `v` and a `type` tag. See `PROTOCOL.md`
//! in this crate for the full schema.

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const VERSION: u32 = 1;

/// Largest commanded attitude in flight from a full stick, rad (30°).
pub const MAX_ATTITUDE: f64 = std::f64::consts::FRAC_PI_6;
/// Full velocity stick, m/s.
pub const MAX_SPEED: f64 = 1.5;
/// Full yaw stick, rad/s.
pub const MAX_YAW_RATE: f64 = 1.5;
/// Full pitch stick in decoupled mode, rad (90°).
pub const MAX_DECOUPLED_PITCH: f64 = std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Aerial,
    Ground,
    Decoupled,
}

/// Normalized pilot sticks. Missing fields are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sticks {
    /// `[0, 1]`.
    pub throttle: f64,
    /// `[-1, 1]`; negative is stick forward, nose down.
    pub pitch: f64,
    /// `[-1, 1]`; positive rolls right.
    pub roll: f64,
    /// `[-1, 1]`; positive turns left.
    pub yaw_rate: f64,
    /// `[-1, 1]`; positive drives forward.
    pub velocity: f64,
}

impl Sticks {
    /// Every axis clamped into its range. Callers must reject non-finite
    /// values first; `clamp` passes NaN through.
    pub fn clamped(&self) -> Self {
        let c = |v: f64| v.clamp(-1.0, 1.0);
        Self {
            throttle: self.throttle.clamp(0.0, 1.0),
            pitch: c(self.pitch),
            roll: c(self.roll),
            yaw_rate: c(self.yaw_rate),
            velocity: c(self.velocity),
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            self.throttle,
            self.pitch,
            self.roll,
            self.yaw_rate,
            self.velocity,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    pub fn in_range(&self) -> bool {
        self.is_finite() && *self == self.clamped()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PilotMessage {
    Sticks(Sticks),
    SetMode {
        mode: Mode,
    },
    Arm {},
    Disarm {},
    /// Reinitializes the vehicle from a built-in scenario's initial state.
    Reset {
        scenario: String,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("expected a JSON object")]
    NotObject,
    #[error("unsupported protocol version {0:?}, expected {VERSION}")]
    Version(Option<Value>),
    #[error("bad message: {0}")]
    Message(String),
    #[error("sticks must be finite")]
    NonFinite,
}

/// Parses one pilot message and clamps its sticks into range.
pub fn parse_pilot(text: &str) -> Result<PilotMessage, ProtocolError> {
    let v: Value = serde_json::from_str(text).map_err(|e| ProtocolError::Json(e.to_string()))?;
    let Value::Object(mut obj) = v else {
        return Err(ProtocolError::NotObject);
    };
    match obj.remove("v") {
        Some(Value::Number(n)) if n.as_u64() == Some(u64::from(VERSION)) => {}
        other => return Err(ProtocolError::Version(other)),
    }
    let msg: PilotMessage = serde_json::from_value(Value::Object(obj))
        .map_err(|e| ProtocolError::Message(e.to_string()))?;
    match msg {
        PilotMessage::Sticks(s) if !s.is_finite() => Err(ProtocolError::NonFinite),
        PilotMessage::Sticks(s) => Ok(PilotMessage::Sticks(s.clamped())),
        other => Ok(other),
    }
}

/// Serializes a pilot message with its version field.
pub fn encode_pilot(msg: &PilotMessage) -> String {
    with_version(serde_json::to_value(msg))
}

/// One telemetry sample. Angles in rad, SI elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Frame {
    /// Frame counter since the server started.
    pub seq: u64,
    /// Simulation time, s.
    pub t: f64,
    /// Controller mode: `idle`, `ground`, `aerial` or `decoupled`.
    pub mode: String,
    /// Contact mode: `ground` or `aerial`.
    pub contact: String,
    pub armed: bool,
    /// Whether a pilot currently holds the sticks.
    pub piloted: bool,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    /// CG height, m.
    pub altitude: f64,
    /// Inertial CG velocity, m/s.
    pub velocity: [f64; 3],
    /// Pitch the controllers are tracking, rad.
    pub pitch_d: f64,
    pub throttle: f64,
    /// Power drawn over the last tick, W.
    pub power: f64,
    /// Energy drawn since the last reset, J.
    pub energy: f64,
    /// Ground-to-air transition factor.
    pub blend: f64,
    /// Actuator command applied over the last tick.
    pub thrust: [f64; 2],
    pub tilt: [f64; 2],
    pub wheel_torque: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ServerMessage {
    Frame(Frame),
    Error { message: String },
    Heartbeat { t: f64 },
}

pub fn encode_server(msg: &ServerMessage) -> String {
    with_version(serde_json::to_value(msg))
}

/// Parses a server message, for clients and tests.
pub fn parse_server(text: &str) -> Result<ServerMessage, ProtocolError> {
    let v: Value = serde_json::from_str(text).map_err(|e| ProtocolError::Json(e.to_string()))?;
    let Value::Object(mut obj) = v else {
        return Err(ProtocolError::NotObject);
    };
    match obj.remove("v") {
        Some(Value::Number(n)) if n.as_u64() == Some(u64::from(VERSION)) => {}
        other => return Err(ProtocolError::Version(other)),
    }
    serde_json::from_value(Value::Object(obj)).map_err(|e| ProtocolError::Message(e.to_string()))
}

fn with_version(v: serde_json::Result<Value>) -> String {
    // The message types hold only strings, finite numbers and bools, so
    // serialization cannot fail.
    let mut v = v.expect("message serializes");
    if let Value::Object(obj) = &mut v {
        obj.insert("v".into(), Value::from(VERSION));
    }
    v.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_kind() {
        let m = parse_pilot(r#"{"v":1,"type":"sticks","throttle":0.5,"pitch":-0.2}"#).unwrap();
        assert_eq!(
            m,
            PilotMessage::Sticks(Sticks {
                throttle: 0.5,
                pitch: -0.2,
                ..Sticks::default()
            })
        );
        let m = parse_pilot(r#"{"v":1,"type":"set_mode","mode":"decoupled"}"#).unwrap();
        assert_eq!(
            m,
            PilotMessage::SetMode {
                mode: Mode::Decoupled
            }
        );
        assert_eq!(
            parse_pilot(r#"{"v":1,"type":"arm"}"#).unwrap(),
            PilotMessage::Arm {}
        );
        assert_eq!(
            parse_pilot(r#"{"type":"disarm","v":1}"#).unwrap(),
            PilotMessage::Disarm {}
        );
        let m = parse_pilot(r#"{"v":1,"type":"reset","scenario":"step_pitch"}"#).unwrap();
        assert_eq!(
            m,
            PilotMessage::Reset {
                scenario: "step_pitch".into()
            }
        );
    }

    #[test]
    fn clamps_sticks() {
        let m = parse_pilot(
            r#"{"v":1,"type":"sticks","throttle":3,"pitch":-7,"roll":1e300,"velocity":-0.5}"#,
        );
        let PilotMessage::Sticks(s) = m.unwrap() else {
            panic!()
        };
        assert_eq!(
            s,
            Sticks {
                throttle: 1.0,
                pitch: -1.0,
                roll: 1.0,
                yaw_rate: 0.0,
                velocity: -0.5
            }
        );
    }

    #[test]
    fn rejects_bad_messages() {
        for text in [
            "",
            "[]",
            "{}",
            r#"{"type":"arm"}"#,
            r#"{"v":2,"type":"arm"}"#,
            r#"{"v":"1","type":"arm"}"#,
            r#"{"v":1,"type":"fly"}"#,
            r#"{"v":1,"type":"arm","extra":1}"#,
            r#"{"v":1,"type":"sticks","boost":1}"#,
            r#"{"v":1,"type":"sticks","throttle":"full"}"#,
            r#"{"v":1,"type":"set_mode","mode":"hover"}"#,
            r#"{"v":1,"type":"reset"}"#,
        ] {
            assert!(parse_pilot(text).is_err(), "{text:?} accepted");
        }
    }

    #[test]
    fn round_trips() {
        for m in [
            PilotMessage::Sticks(Sticks {
                throttle: 0.25,
                roll: 0.1,
                ..Sticks::default()
            }),
            PilotMessage::SetMode { mode: Mode::Aerial },
            PilotMessage::Arm {},
            PilotMessage::Reset {
                scenario: "mission".into(),
            },
        ] {
            assert_eq!(parse_pilot(&encode_pilot(&m)).unwrap(), m);
        }
        let hb = ServerMessage::Heartbeat { t: 1.5 };
        assert_eq!(parse_server(&encode_server(&hb)).unwrap(), hb);
        let text = encode_server(&ServerMessage::Error {
            message: "x".into(),
        });
        assert!(text.contains(r#""v":1"#) && text.contains(r#""type":"error""#));
    }
}
