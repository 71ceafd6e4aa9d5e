//! One telemetry record per control tick, stored as CSV.
//!
//! The first line is a `#` comment naming the format version; the second is
//! the column header. Floats are written with 17 significant digits so a
//! log reloads bit-exactly.

use std::io::{Read, Write};

use hagv_core::controllers::ActiveMode;
use hagv_core::dynamics::{AerialState, Body, ContactForces, GroundState, VehicleState};
use hagv_core::se3::{Mat3, Vec3};
use hagv_core::vehicle::ActuatorCommand;

use crate::error::{Result, SimError};

pub const FORMAT_LINE: &str = "# hagv-telemetry v1";

pub const COLUMNS: &[&str] = &[
    "t",
    "mode",
    "contact",
    "blend",
    "impulse",
    "px",
    "py",
    "pz",
    "vx",
    "vy",
    "vz",
    "r00",
    "r01",
    "r02",
    "r10",
    "r11",
    "r12",
    "r20",
    "r21",
    "r22",
    "wx",
    "wy",
    "wz",
    "x",
    "x_dot",
    "roll",
    "pitch",
    "pitch_rate",
    "yaw",
    "yaw_rate",
    "wheel_l",
    "wheel_r",
    "thrust_l",
    "thrust_r",
    "tilt_l",
    "tilt_r",
    "torque_l",
    "torque_r",
    "normal_l",
    "normal_r",
    "friction_l",
    "friction_r",
    "power",
    "energy",
    "throttle_d",
    "pitch_d",
    "speed_d",
    "yaw_rate_d",
];

/// Setpoint fields logged alongside the state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoggedSetpoint {
    pub throttle: f64,
    pub pitch: f64,
    pub speed: f64,
    pub yaw_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub t: f64,
    /// Controller mode that produced `cmd`.
    pub mode: ActiveMode,
    pub blend: f64,
    /// Pitch impulse applied to the previous state before this step, N·m·s.
    pub impulse: f64,
    pub state: VehicleState<f64>,
    /// Command applied over the step that ended at `t`.
    pub cmd: ActuatorCommand<f64>,
    pub setpoint: LoggedSetpoint,
}

fn mode_from_str(s: &str) -> Result<ActiveMode> {
    Ok(match s {
        "idle" => ActiveMode::Idle,
        "ground" => ActiveMode::Ground,
        "aerial" => ActiveMode::Aerial,
        "decoupled" => ActiveMode::Decoupled,
        other => return Err(SimError::Telemetry(format!("unknown mode {other:?}"))),
    })
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

impl Record {
    /// Field values in [`COLUMNS`] order. Derived fields are filled for both
    /// contact modes; contact forces are empty while airborne.
    pub fn fields(&self, p: &hagv_core::VehicleParams) -> Vec<String> {
        let s = &self.state;
        let (a, g) = match &s.body {
            Body::Aerial(a) => (*a, hagv_core::dynamics::project(a, p)),
            Body::Ground(g) => (hagv_core::dynamics::embed(g, p), *g),
        };
        let e = s.euler();
        let mut out = vec![
            num(self.t),
            self.mode.as_str().to_string(),
            s.mode().as_str().to_string(),
            num(self.blend),
            num(self.impulse),
        ];
        out.extend(a.p.to_array().map(num));
        out.extend(a.v.to_array().map(num));
        out.extend(a.r.m.iter().flatten().map(|v| num(*v)));
        out.extend(a.omega.to_array().map(num));
        let x = match &s.body {
            Body::Aerial(a) => a.odometer,
            Body::Ground(g) => g.x,
        };
        out.extend([x, g.x_dot, e.roll, e.pitch, g.pitch_rate, e.yaw, g.yaw_rate].map(num));
        out.extend(g.wheel_angle.map(num));
        let c = &self.cmd;
        out.extend(c.thrust.map(num));
        out.extend(c.tilt.map(num));
        out.extend(c.wheel_torque.map(num));
        match &s.contact {
            Some(f) => {
                out.extend(f.n.map(num));
                out.extend(f.f.map(num));
            }
            None => out.extend(std::iter::repeat_n(String::new(), 4)),
        }
        out.extend([s.power, s.energy_used].map(num));
        let sp = &self.setpoint;
        out.extend([sp.throttle, sp.pitch, sp.speed, sp.yaw_rate].map(num));
        out
    }
}

pub fn write_csv<W: Write>(out: W, records: &[Record], p: &hagv_core::VehicleParams) -> Result<()> {
    let mut out = out;
    writeln!(out, "{FORMAT_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in records {
        w.write_record(r.fields(p))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(records: &[Record], p: &hagv_core::VehicleParams) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, records, p)?;
    String::from_utf8(buf).map_err(|e| SimError::Telemetry(e.to_string()))
}

/// Parses a log written by [`write_csv`]. State is rebuilt from the columns
/// of the logged contact mode; derived columns are ignored.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<Record>> {
    let mut input = input;
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let Some((first, rest)) = text.split_once('\n') else {
        return Err(SimError::Telemetry("empty log".into()));
    };
    if first.trim_end() != FORMAT_LINE {
        return Err(SimError::Telemetry(format!(
            "unsupported format line {first:?}"
        )));
    }
    let mut rd = csv::Reader::from_reader(rest.as_bytes());
    let header = rd.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != COLUMNS {
        return Err(SimError::Telemetry("column header mismatch".into()));
    }
    let col = |name: &str| {
        COLUMNS
            .iter()
            .position(|c| *c == name)
            .expect("known column")
    };
    let mut records = Vec::new();
    for (line, row) in rd.records().enumerate() {
        let row = row?;
        let f = |name: &str| -> Result<f64> {
            let raw = &row[col(name)];
            raw.parse::<f64>()
                .map_err(|e| SimError::Telemetry(format!("row {line}, {name} = {raw:?}: {e}")))
        };
        let v3 =
            |a: &str, b: &str, c: &str| -> Result<Vec3<f64>> { Ok(Vec3::new(f(a)?, f(b)?, f(c)?)) };
        let wheel_angle = [f("wheel_l")?, f("wheel_r")?];
        let body = match &row[col("contact")] {
            "aerial" => {
                let names = [
                    "r00", "r01", "r02", "r10", "r11", "r12", "r20", "r21", "r22",
                ];
                let mut m = [[0.0; 3]; 3];
                for (k, n) in names.iter().enumerate() {
                    m[k / 3][k % 3] = f(n)?;
                }
                Body::Aerial(AerialState {
                    p: v3("px", "py", "pz")?,
                    v: v3("vx", "vy", "vz")?,
                    r: Mat3::from_rows(m),
                    omega: v3("wx", "wy", "wz")?,
                    wheel_angle,
                    odometer: f("x")?,
                })
            }
            "ground" => Body::Ground(GroundState {
                x: f("x")?,
                x_dot: f("x_dot")?,
                pitch: f("pitch")?,
                pitch_rate: f("pitch_rate")?,
                yaw: f("yaw")?,
                yaw_rate: f("yaw_rate")?,
                wheel_angle,
                north: f("px")?,
                east: f("py")?,
            }),
            other => {
                return Err(SimError::Telemetry(format!(
                    "row {line}: unknown contact {other:?}"
                )))
            }
        };
        let contact = if row[col("normal_l")].is_empty() {
            None
        } else {
            Some(ContactForces {
                h: [0.0; 2],
                n: [f("normal_l")?, f("normal_r")?],
                f: [f("friction_l")?, f("friction_r")?],
            })
        };
        let state = VehicleState {
            body,
            contact,
            energy_used: f("energy")?,
            power: f("power")?,
            t: f("t")?,
        };
        records.push(Record {
            t: f("t")?,
            mode: mode_from_str(&row[col("mode")])?,
            blend: f("blend")?,
            impulse: f("impulse")?,
            state,
            cmd: ActuatorCommand {
                thrust: [f("thrust_l")?, f("thrust_r")?],
                tilt: [f("tilt_l")?, f("tilt_r")?],
                wheel_torque: [f("torque_l")?, f("torque_r")?],
            },
            setpoint: LoggedSetpoint {
                throttle: f("throttle_d")?,
                pitch: f("pitch_d")?,
                speed: f("speed_d")?,
                yaw_rate: f("yaw_rate_d")?,
            },
        });
    }
    Ok(records)
}
