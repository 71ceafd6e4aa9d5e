//! Real-time teleoperation bridge: a WebSocket server that runs the
//! simulation against the wall clock, streams telemetry frames and takes
//! stick and mode commands from a single pilot.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bridge;
pub mod protocol;
pub mod server;

pub use bridge::{stick_setpoint, BridgeSim, ClientId};
pub use protocol::{parse_pilot, Frame, Mode, PilotMessage, ServerMessage, Sticks};
pub use server::{default_port, Server, ServerConfig, DEFAULT_PORT, PORT_ENV};
