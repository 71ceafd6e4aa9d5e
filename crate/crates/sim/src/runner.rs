use hagv_core::controllers::{ActiveMode, ControlSetpoint, ModeManager};
use hagv_core::dynamics::{
    apply_pitch_impulse, contact_transition, step, ContactMode, VehicleState,
};
use hagv_core::vehicle::{slew_limit, ActuatorCommand, VehicleParams};
use hagv_core::Config;

use crate::error::{Result, SimError};
use crate::scenario::{Ramp, Scenario};
use crate::telemetry::{LoggedSetpoint, Record};

/// Fixed-step closed loop: controller, servo slew limit, dynamics, contact
/// switching.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub params: VehicleParams<f64>,
    pub manager: ModeManager<f64>,
    pub state: VehicleState<f64>,
    pub setpoint: ControlSetpoint<f64>,
    pub dt: f64,
    prev_cmd: ActuatorCommand<f64>,
}

impl Simulation {
    pub fn new(
        cfg: &Config,
        state: VehicleState<f64>,
        setpoint: ControlSetpoint<f64>,
        dt: f64,
    ) -> Self {
        Self {
            params: cfg.vehicle.clone(),
            manager: ModeManager::new(cfg.gains),
            state,
            setpoint,
            dt,
            prev_cmd: ActuatorCommand::zero(),
        }
    }

    /// Replaces the state and clears controller memory and the servo slew
    /// history.
    pub fn reset(&mut self, state: VehicleState<f64>) {
        self.manager.reset();
        self.prev_cmd = ActuatorCommand::zero();
        self.state = state;
    }

    /// Command applied over the last tick.
    pub fn last_command(&self) -> ActuatorCommand<f64> {
        self.prev_cmd
    }

    /// Record of the current state with no command applied yet.
    pub fn initial_record(&self) -> Record {
        Record {
            t: self.state.t,
            mode: match (self.setpoint.armed, self.state.mode()) {
                (false, _) => ActiveMode::Idle,
                (true, ContactMode::Aerial) => ActiveMode::Aerial,
                (true, ContactMode::Ground) => ActiveMode::Ground,
            },
            blend: 0.0,
            impulse: 0.0,
            state: self.state,
            cmd: ActuatorCommand::zero(),
            setpoint: self.logged_setpoint(),
        }
    }

    fn logged_setpoint(&self) -> LoggedSetpoint {
        LoggedSetpoint {
            throttle: self.setpoint.throttle,
            pitch: self.setpoint.pitch,
            speed: self.setpoint.speed,
            yaw_rate: self.setpoint.yaw_rate,
        }
    }

    /// Advances one period. `impulse` (N·m·s about pitch) hits the state
    /// before the controller samples it.
    pub fn tick(&mut self, impulse: f64) -> Result<Record> {
        let p = &self.params;
        let sampled = if impulse != 0.0 {
            apply_pitch_impulse(&self.state, impulse, p)
        } else {
            self.state
        };
        let fail = |source| SimError::Aborted {
            t: sampled.t,
            source,
        };
        let out = self
            .manager
            .update(&self.setpoint, &sampled, p, self.dt)
            .map_err(fail)?;
        // Disarmed servos are unpowered and, with no thrust, their angle
        // does nothing; the command drops to zero at once.
        let cmd = if out.mode == ActiveMode::Idle {
            ActuatorCommand::zero()
        } else {
            slew_limit(&self.prev_cmd, &out.cmd, self.dt, p)
        };
        let next = step(&sampled, &cmd, self.dt, p).map_err(fail)?;
        if !next.is_finite() {
            return Err(fail(hagv_core::Error::InvalidParams(
                "state diverged".into(),
            )));
        }
        self.state = contact_transition(&next, p);
        self.prev_cmd = cmd;
        Ok(Record {
            t: self.state.t,
            mode: out.mode,
            blend: out.blend,
            impulse,
            state: self.state,
            cmd,
            setpoint: self.logged_setpoint(),
        })
    }
}

/// Log of a scenario run. `error` is set when the run aborted early; the
/// records up to that point are kept.
#[derive(Debug, Clone)]
pub struct RunLog {
    pub scenario: String,
    pub params: VehicleParams<f64>,
    pub dt: f64,
    pub records: Vec<Record>,
    pub error: Option<String>,
}

impl RunLog {
    pub fn is_complete(&self) -> bool {
        self.error.is_none()
    }
}

struct ActiveRamp {
    start_tick: u64,
    ticks: u64,
    from: f64,
    to: f64,
}

impl ActiveRamp {
    fn new(r: &Ramp, tick: u64, dt: f64, from: f64) -> Self {
        Self {
            start_tick: tick,
            ticks: (r.over / dt).round() as u64,
            from,
            to: r.throttle,
        }
    }

    fn value(&self, tick: u64) -> f64 {
        let k = tick - self.start_tick;
        if k >= self.ticks {
            self.to
        } else {
            self.from + (self.to - self.from) * (k as f64 / self.ticks as f64)
        }
    }
}

/// Runs a scenario to completion.
pub fn run_scenario(sc: &Scenario) -> Result<RunLog> {
    let cfg = sc.config()?;
    let mut sim = Simulation::new(&cfg, sc.initial_state(), sc.initial_setpoint(), sc.dt);
    let mut log = RunLog {
        scenario: sc.name.clone(),
        params: cfg.vehicle.clone(),
        dt: sc.dt,
        records: vec![sim.initial_record()],
        error: None,
    };
    let mut events = sc.events.iter().peekable();
    let mut ramp: Option<ActiveRamp> = None;
    for tick in 0..sc.ticks() {
        let mut impulse = 0.0;
        while let Some(e) = events.next_if(|e| (e.at / sc.dt).round() as u64 == tick) {
            if let Some(patch) = &e.set {
                patch.apply(&mut sim.setpoint);
                if patch.throttle.is_some() {
                    ramp = None;
                }
            }
            if let Some(r) = &e.ramp {
                ramp = Some(ActiveRamp::new(r, tick, sc.dt, sim.setpoint.throttle));
            }
            if let Some(l) = e.impulse {
                impulse += l;
            }
        }
        if let Some(r) = &ramp {
            sim.setpoint.throttle = r.value(tick);
        }
        match sim.tick(impulse) {
            Ok(rec) => log.records.push(rec),
            Err(e) => {
                log.error = Some(e.to_string());
                break;
            }
        }
    }
    Ok(log)
}
