//! The simulation side of the bridge. Everything here is deterministic: the
//! server feeds it wall-clock time and messages, tests feed it directly.

use std::time::Duration;

use hagv_core::controllers::{ControlSetpoint, ModeRequest};
use hagv_core::dynamics::{GroundState, VehicleState};
use hagv_core::se3::{euler_to_rotation, wrap_angle, EulerAngles};
use hagv_core::vehicle::ActuatorCommand;
use hagv_core::Config;
use hagv_sim::telemetry::Record;
use hagv_sim::{builtin, Simulation};

use crate::protocol::{
    Frame, Mode, PilotMessage, Sticks, MAX_ATTITUDE, MAX_DECOUPLED_PITCH, MAX_SPEED, MAX_YAW_RATE,
};

/// Connection identifier assigned by the server.
pub type ClientId = u64;

/// Setpoint for a given stick position.
///
/// Pitch and roll sticks command attitude in flight, the pitch stick
/// commands the held pitch in decoupled mode, and the yaw stick commands a
/// yaw rate on the ground. In flight the heading `yaw_d` is integrated from
/// the yaw stick by the caller.
pub fn stick_setpoint(
    sticks: &Sticks,
    mode: Mode,
    armed: bool,
    yaw_d: f64,
) -> ControlSetpoint<f64> {
    let s = sticks.clamped();
    ControlSetpoint {
        armed,
        mode: match mode {
            Mode::Aerial => ModeRequest::Aerial,
            Mode::Ground => ModeRequest::Ground,
            Mode::Decoupled => ModeRequest::Decoupled,
        },
        attitude: euler_to_rotation(EulerAngles::new(
            s.roll * MAX_ATTITUDE,
            -s.pitch * MAX_ATTITUDE,
            yaw_d,
        )),
        throttle: s.throttle,
        pitch: -s.pitch * MAX_DECOUPLED_PITCH,
        speed: s.velocity * MAX_SPEED,
        yaw_rate: s.yaw_rate * MAX_YAW_RATE,
    }
}

/// Fixed-step simulation driven by pilot messages.
///
/// Messages take effect on the next tick. Wall time goes through an
/// accumulator; at most `max_batch` ticks run per call to
/// [`advance`](Self::advance) and the rest of the backlog is dropped, so a
/// stalled host slows simulated time instead of bursting.
#[derive(Debug, Clone)]
pub struct BridgeSim {
    sim: Simulation,
    config: Config,
    sticks: Sticks,
    mode: Mode,
    armed: bool,
    pilot: Option<ClientId>,
    yaw_d: f64,
    acc: Duration,
    tick: Duration,
    pub max_batch: u32,
    last: Option<Record>,
}

impl BridgeSim {
    pub fn new(config: Config, dt: f64) -> Self {
        let sim = Simulation::new(
            &config,
            VehicleState::ground(GroundState::upright()),
            ControlSetpoint::default(),
            dt,
        );
        Self {
            sim,
            config,
            sticks: Sticks::default(),
            mode: Mode::Ground,
            armed: false,
            pilot: None,
            yaw_d: 0.0,
            acc: Duration::ZERO,
            tick: Duration::from_secs_f64(dt),
            max_batch: 50,
            last: None,
        }
    }

    pub fn dt(&self) -> f64 {
        self.sim.dt
    }

    pub fn state(&self) -> &VehicleState<f64> {
        &self.sim.state
    }

    pub fn setpoint(&self) -> &ControlSetpoint<f64> {
        &self.sim.setpoint
    }

    pub fn sticks(&self) -> Sticks {
        self.sticks
    }

    pub fn armed(&self) -> bool {
        self.armed
    }

    pub fn pilot(&self) -> Option<ClientId> {
        self.pilot
    }

    pub fn last_command(&self) -> ActuatorCommand<f64> {
        self.sim.last_command()
    }

    /// Applies one message from `client`. The first client to arm becomes
    /// the pilot; until it disarms or disconnects, other clients may watch
    /// but their commands are rejected.
    pub fn handle(&mut self, client: ClientId, msg: PilotMessage) -> Result<(), String> {
        if let Some(p) = self.pilot {
            if p != client {
                return Err(format!("client {p} is the pilot"));
            }
        }
        match msg {
            PilotMessage::Arm {} => {
                if !self.armed {
                    self.yaw_d = self.sim.state.euler().yaw;
                }
                self.armed = true;
                self.pilot = Some(client);
            }
            PilotMessage::Disarm {} => self.release(),
            PilotMessage::Sticks(s) => {
                if self.pilot.is_none() {
                    return Err("arm before sending sticks".into());
                }
                self.sticks = s.clamped();
            }
            PilotMessage::SetMode { mode } => self.mode = mode,
            PilotMessage::Reset { scenario } => self.reset(&scenario)?,
        }
        Ok(())
    }

    /// Drops `client`. A departing pilot disarms the vehicle.
    pub fn disconnect(&mut self, client: ClientId) {
        if self.pilot == Some(client) {
            self.release();
        }
    }

    fn release(&mut self) {
        self.armed = false;
        self.pilot = None;
        self.sticks = Sticks::default();
    }

    /// Reinitializes the vehicle from a built-in scenario's initial state and
    /// mode. Time keeps running so frame timestamps stay monotone; the
    /// energy counter restarts.
    fn reset(&mut self, name: &str) -> Result<(), String> {
        let sc = builtin(name).map_err(|e| e.to_string())?;
        let mut state = sc.initial_state();
        state.t = self.sim.state.t;
        self.sim.reset(state);
        self.mode = match sc.initial_setpoint().mode {
            ModeRequest::Aerial => Mode::Aerial,
            ModeRequest::Ground => Mode::Ground,
            ModeRequest::Decoupled => Mode::Decoupled,
        };
        self.yaw_d = state.euler().yaw;
        self.sticks.throttle = sc.initial_setpoint().throttle;
        self.last = None;
        Ok(())
    }

    /// Runs one control period with the current sticks.
    pub fn step(&mut self) -> Result<&Record, String> {
        let airborne = self.sim.state.mode() == hagv_core::dynamics::ContactMode::Aerial;
        if airborne && self.armed {
            self.yaw_d = wrap_angle(self.yaw_d + self.sticks.yaw_rate * MAX_YAW_RATE * self.sim.dt);
        } else {
            self.yaw_d = self.sim.state.euler().yaw;
        }
        self.sim.setpoint = stick_setpoint(&self.sticks, self.mode, self.armed, self.yaw_d);
        match self.sim.tick(0.0) {
            Ok(rec) => Ok(self.last.insert(rec)),
            Err(e) => {
                // A diverged or singular state would stall the bridge; start
                // over upright and disarmed.
                let t = self.sim.state.t;
                let mut fresh = VehicleState::ground(GroundState::upright());
                fresh.t = t;
                self.sim.reset(fresh);
                self.release();
                Err(e.to_string())
            }
        }
    }

    /// Adds `elapsed` wall time and runs the ticks that are due. Returns the
    /// number of ticks run and any tick error.
    pub fn advance(&mut self, elapsed: Duration) -> (u32, Option<String>) {
        self.acc += elapsed;
        let mut n = 0;
        let mut err = None;
        while self.acc >= self.tick && n < self.max_batch {
            self.acc -= self.tick;
            n += 1;
            if let Err(e) = self.step() {
                err = Some(e);
            }
        }
        if self.acc >= self.tick {
            self.acc = Duration::ZERO;
        }
        (n, err)
    }

    pub fn frame(&self, seq: u64) -> Frame {
        let s = &self.sim.state;
        let p = &self.sim.params;
        let e = s.euler();
        let sp = &self.sim.setpoint;
        let (mode, blend, cmd) = match &self.last {
            Some(r) => (r.mode.as_str(), r.blend, r.cmd),
            None => ("idle", 0.0, ActuatorCommand::zero()),
        };
        let pitch_d = match self.mode {
            Mode::Decoupled => sp.pitch,
            _ => -self.sticks.pitch * MAX_ATTITUDE,
        };
        Frame {
            seq,
            t: s.t,
            mode: mode.into(),
            contact: s.mode().as_str().into(),
            armed: self.armed,
            piloted: self.pilot.is_some(),
            roll: e.roll,
            pitch: e.pitch,
            yaw: e.yaw,
            altitude: s.position(p).z,
            velocity: s.velocity(p).to_array(),
            pitch_d,
            throttle: sp.throttle,
            power: s.power,
            energy: s.energy_used,
            blend,
            thrust: cmd.thrust,
            tilt: cmd.tilt,
            wheel_torque: cmd.wheel_torque,
        }
    }

    pub fn config(&self) -> &Config {
        &self.config
    }
}
