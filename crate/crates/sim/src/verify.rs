//! Acceptance checks. Each check runs standalone and reports a one-line
//! detail with the measured value next to its limit.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hagv_core::controllers::{decoupled_control, default_gains, mixer, ActiveMode, DecoupledPids};
use hagv_core::dynamics::{
    aerial_derivative, ground_derivative, lagrangian_oracle, step, thrust_along_track, AerialState,
    Body, GroundState, VehicleState,
};
use hagv_core::se3::Vec3;
use hagv_core::vehicle::{default_params, ActuatorCommand, VehicleParams};

use crate::energy::energy_report;
use crate::runner::{run_scenario, RunLog};
use crate::scenario::{builtin, BUILTIN};
use crate::telemetry::to_csv_string;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }

    fn failed(name: &'static str, detail: impl fmt::Display) -> Self {
        Self::new(name, false, detail.to_string())
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<22} {}", self.name, self.detail)
    }
}

/// A named acceptance check.
pub type CheckFn = fn() -> Check;

pub const CHECKS: &[(&str, CheckFn)] = &[
    ("oracle_equivalence", oracle_equivalence),
    ("mixer_exactness", mixer_exactness),
    ("passive_conservation", passive_conservation),
    ("hover_equilibrium", hover_equilibrium),
    ("disturbance_recovery", disturbance_recovery),
    ("step_sequence", step_sequence),
    ("pitch_hold", pitch_hold),
    ("transition_smoothness", transition_smoothness),
    ("energy_ordering", energy_ordering),
    ("determinism", determinism),
    ("decoupling_invariant", decoupling_invariant),
];

pub fn run_all() -> Vec<Check> {
    CHECKS.iter().map(|(_, f)| f()).collect()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn random_ground(rng: &mut ChaCha8Rng) -> (GroundState<f64>, ActuatorCommand<f64>) {
    let s = GroundState {
        x: rng.gen_range(-5.0..5.0),
        x_dot: rng.gen_range(-2.0..2.0),
        pitch: rng.gen_range(-1.45..1.45),
        pitch_rate: rng.gen_range(-4.0..4.0),
        yaw: rng.gen_range(-3.1..3.1),
        yaw_rate: rng.gen_range(-3.0..3.0),
        wheel_angle: [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)],
        north: 0.0,
        east: 0.0,
    };
    let cmd = ActuatorCommand {
        thrust: [rng.gen_range(0.0..15.0), rng.gen_range(0.0..15.0)],
        tilt: [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)],
        wheel_torque: [rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2)],
    };
    (s, cmd)
}

pub fn oracle_equivalence() -> Check {
    const NAME: &str = "oracle_equivalence";
    const N: usize = 1000;
    let mut p = default_params::<f64>();
    p.pitch_stop = f64::INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(0x0_5eed);
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for k in 0..N {
        let (s, cmd) = random_ground(&mut rng);
        let ne = match ground_derivative(&s, &cmd, &p) {
            Ok((d, _)) => d,
            Err(e) => return Check::failed(NAME, format!("sample {k}: {e}")),
        };
        let la = lagrangian_oracle(&s, &cmd, &p);
        let errs = [
            rel_err(ne.x_ddot, la.x_ddot),
            rel_err(ne.pitch_accel, la.pitch_accel),
            rel_err(ne.yaw_accel, la.yaw_accel),
            rel_err(ne.wheel_rate[0], la.wheel_rate[0]),
            rel_err(ne.wheel_rate[1], la.wheel_rate[1]),
        ];
        worst = errs.iter().fold(worst, |a, &b| a.max(b));
    }
    let elapsed = t0.elapsed();
    let passed = worst <= 1e-8 && elapsed < Duration::from_secs(10);
    Check::new(
        NAME,
        passed,
        format!("{N} samples, max rel err {worst:.2e} (<= 1e-8), {elapsed:.2?} (< 10 s)"),
    )
}

pub fn mixer_exactness() -> Check {
    const NAME: &str = "mixer_exactness";
    let cases = [
        (Vec3::new(0.0, 0.0, 0.0), 5.0, [5.0, 5.0], [0.0, 0.0]),
        (Vec3::new(1.0, 0.0, 0.0), 5.0, [6.0, 4.0], [0.0, 0.0]),
        (
            Vec3::new(0.0, 0.2, 0.1),
            0.0,
            [0.0, 0.0],
            [0.2 - 0.1, 0.2 + 0.1],
        ),
    ];
    for (k, (tau, c, thrust, tilt)) in cases.iter().enumerate() {
        let out = mixer(*tau, *c);
        let bits = |a: [f64; 2]| a.map(f64::to_bits);
        if bits(out.thrust) != bits(*thrust)
            || bits(out.tilt) != bits(*tilt)
            || out.wheel_torque != [0.0; 2]
        {
            return Check::failed(NAME, format!("example {k}: got {out:?}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mut v = || {
            Vec3::new(
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
            )
        };
        let (t1, t2) = (v(), v());
        let (c1, c2): (f64, f64) = (rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0));
        let (a, b): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let lhs = mixer(t1 * a + t2 * b, a * c1 + b * c2);
        let (m1, m2) = (mixer(t1, c1), mixer(t2, c2));
        for i in 0..2 {
            worst = worst.max((lhs.thrust[i] - (a * m1.thrust[i] + b * m2.thrust[i])).abs());
            worst = worst.max((lhs.tilt[i] - (a * m1.tilt[i] + b * m2.tilt[i])).abs());
        }
    }
    Check::new(
        NAME,
        worst < 1e-12,
        format!("3 examples bit-exact, linearity max err {worst:.1e} on 1000 inputs"),
    )
}

fn pitch_after(dt: f64, t_end: f64, p: &VehicleParams<f64>) -> Option<[f64; 6]> {
    let cmd = ActuatorCommand {
        thrust: [15.0, 13.0],
        tilt: [0.2, -0.1],
        ..ActuatorCommand::zero()
    };
    let mut a = AerialState::at_rest(Vec3::new(0.0, 0.0, 5.0));
    a.omega = Vec3::new(0.5, -1.0, 2.0);
    let mut s = VehicleState::aerial(a);
    for _ in 0..(t_end / dt).round() as usize {
        s = step(&s, &cmd, dt, p).ok()?;
    }
    let Body::Aerial(a) = s.body else { return None };
    Some([a.p.x, a.p.y, a.p.z, a.r.m[0][2], a.r.m[1][2], a.r.m[2][0]])
}

/// Energy drift of the unpowered pendulum with open-circuit motors and no
/// pitch stop, then the RK4 convergence order on a tumbling flight.
pub fn passive_conservation() -> Check {
    const NAME: &str = "passive_conservation";
    let mut p = default_params::<f64>();
    p.pitch_stop = f64::INFINITY;
    p.b_motor = 0.0;
    let g0 = GroundState {
        pitch: 0.3,
        pitch_rate: 0.5,
        x_dot: 0.2,
        yaw_rate: 0.5,
        ..GroundState::upright()
    };
    let e0 = g0.mechanical_energy(&p);
    let mut s = VehicleState::ground(g0);
    let zero = ActuatorCommand::zero();
    let mut drift = 0.0f64;
    for k in 0..10_000 {
        s = match step(&s, &zero, 1e-3, &p) {
            Ok(s) => s,
            Err(e) => return Check::failed(NAME, format!("step {k}: {e}")),
        };
        let Body::Ground(g) = s.body else {
            return Check::failed(NAME, "left the ground");
        };
        drift = drift.max((g.mechanical_energy(&p) - e0).abs() / e0.abs().max(1.0));
    }

    let p = default_params::<f64>();
    let t = 1.0;
    let (Some(reference), Some(x1), Some(x2)) = (
        pitch_after(0.01 / 16.0, t, &p),
        pitch_after(0.01, t, &p),
        pitch_after(0.005, t, &p),
    ) else {
        return Check::failed(NAME, "aerial maneuver left the air");
    };
    let err = |x: [f64; 6]| {
        (0..6)
            .map(|i| (x[i] - reference[i]).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let order = (err(x1) / err(x2)).log2();
    let passed = drift < 1e-6 && order >= 3.8;
    Check::new(
        NAME,
        passed,
        format!("energy drift {drift:.2e} (< 1e-6) over 10 s, RK4 order {order:.3} (>= 3.8)"),
    )
}

pub fn hover_equilibrium() -> Check {
    let p = default_params::<f64>();
    let t = p.weight() / 2.0;
    let cmd = ActuatorCommand {
        thrust: [t, t],
        ..ActuatorCommand::zero()
    };
    let d = aerial_derivative(&AerialState::at_rest(Vec3::new(0.0, 0.0, 1.0)), &cmd, &p);
    let norm = (d.v_dot.norm().powi(2) + d.omega_dot.norm().powi(2)).sqrt();
    Check::new(
        "hover_equilibrium",
        norm < 1e-12,
        format!("acceleration norm {norm:.1e} (< 1e-12)"),
    )
}

fn run_builtin(name: &str) -> Result<(RunLog, Duration), String> {
    let sc = builtin(name).map_err(|e| e.to_string())?;
    let t0 = Instant::now();
    let log = run_scenario(&sc).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    match &log.error {
        Some(e) => Err(format!("{name} aborted: {e}")),
        None => Ok((log, elapsed)),
    }
}

fn pitch_deg(log: &RunLog) -> impl Iterator<Item = (f64, f64)> + '_ {
    log.records
        .iter()
        .map(|r| (r.t, r.state.euler().pitch.to_degrees()))
}

/// Half a tick, for comparing logged times against window edges.
fn eps(log: &RunLog) -> f64 {
    0.5 * log.dt
}

pub fn disturbance_recovery() -> Check {
    const NAME: &str = "disturbance_recovery";
    let (log, elapsed) = match run_builtin("disturbance_recovery") {
        Ok(v) => v,
        Err(e) => return Check::failed(NAME, e),
    };
    let last_out = pitch_deg(&log)
        .filter(|(_, p)| p.abs() >= 3.0)
        .map(|(t, _)| t)
        .fold(0.0, f64::max);
    let end = log.records.last().map_or(0.0, |r| r.t);
    let passed = last_out < 5.0 && elapsed < Duration::from_secs(1);
    Check::new(
        NAME,
        passed,
        format!("|pitch| < 3 deg from {last_out:.3} s (< 5 s) to {end:.0} s, runtime {elapsed:.2?} (< 1 s)"),
    )
}

/// Response to one step of the pitch sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResponse {
    pub from: f64,
    pub to: f64,
    /// Largest excursion past the target in the direction of the step, deg.
    pub overshoot: f64,
    /// Largest error over the last half second before the next step, deg.
    pub final_error: f64,
}

impl StepResponse {
    /// Toward upright.
    pub fn rising(&self) -> bool {
        self.to.abs() < self.from.abs()
    }
}

/// Splits the step scenario log into per-step responses. Steps start at the
/// times of the scenario's pitch setpoint changes.
pub fn step_responses(log: &RunLog) -> Vec<StepResponse> {
    let mut changes = Vec::new();
    for w in log.records.windows(2) {
        if w[1].setpoint.pitch != w[0].setpoint.pitch {
            changes.push((
                w[0].t,
                w[0].setpoint.pitch.to_degrees(),
                w[1].setpoint.pitch.to_degrees(),
            ));
        }
    }
    let end = log.records.last().map_or(0.0, |r| r.t);
    let e = eps(log);
    (0..changes.len())
        .map(|k| {
            let (t0, from, to) = changes[k];
            let t1 = changes.get(k + 1).map_or(end, |c| c.0);
            let dir = (to - from).signum();
            let window = pitch_deg(log).filter(|(t, _)| *t > t0 + e && *t <= t1 + e);
            let (overshoot, final_error) = window.fold((0.0f64, 0.0f64), |(o, f), (t, p)| {
                let f = if t >= t1 - 0.5 - e {
                    f.max((p - to).abs())
                } else {
                    f
                };
                (o.max(dir * (p - to)), f)
            });
            StepResponse {
                from,
                to,
                overshoot,
                final_error,
            }
        })
        .collect()
}

pub fn step_sequence() -> Check {
    const NAME: &str = "step_sequence";
    let (log, _) = match run_builtin("step_pitch") {
        Ok(v) => v,
        Err(e) => return Check::failed(NAME, e),
    };
    let steps = step_responses(&log);
    if steps.len() != 6 {
        return Check::failed(NAME, format!("expected 6 steps, found {}", steps.len()));
    }
    let settled = steps.iter().all(|s| s.final_error < 3.0);
    let rising_max = steps
        .iter()
        .filter(|s| s.rising())
        .map(|s| s.overshoot)
        .fold(0.0, f64::max);
    let falling_max = steps
        .iter()
        .filter(|s| !s.rising())
        .map(|s| s.overshoot)
        .fold(0.0, f64::max);
    let worst_final = steps.iter().map(|s| s.final_error).fold(0.0, f64::max);
    let passed = settled && rising_max <= 1.0 && falling_max > 0.0;
    Check::new(
        NAME,
        passed,
        format!(
            "worst settled error {worst_final:.2} deg (< 3), rising overshoot {rising_max:.2} deg (<= 1), \
             descending overshoot {falling_max:.2} deg (> 0)"
        ),
    )
}

/// Pitch held at −60° while driving. The error band is 3° throughout the
/// motion and after it stops; re-settling means staying within 1° from
/// 2.5 s after motion onset until the stop.
pub fn pitch_hold() -> Check {
    const NAME: &str = "pitch_hold";
    let (log, _) = match run_builtin("pitch_hold_drive") {
        Ok(v) => v,
        Err(e) => return Check::failed(NAME, e),
    };
    let times = |start: bool| {
        log.records.windows(2).find_map(|w| {
            let moving = (w[0].setpoint.speed == 0.0, w[1].setpoint.speed == 0.0);
            (moving == (start, !start)).then_some(w[0].t)
        })
    };
    let (Some(t_on), Some(t_off)) = (times(true), times(false)) else {
        return Check::failed(NAME, "no speed command found");
    };
    let target = -60.0;
    let e = eps(&log);
    let err: Vec<(f64, f64)> = pitch_deg(&log)
        .map(|(t, p)| (t, (p - target).abs()))
        .collect();
    let dip = err
        .iter()
        .filter(|(t, _)| *t > t_on + e)
        .map(|x| x.1)
        .fold(0.0, f64::max);
    let late = err
        .iter()
        .filter(|(t, _)| *t >= t_on + 2.5 - e && *t <= t_off + e)
        .map(|x| x.1)
        .fold(0.0, f64::max);
    let passed = dip <= 3.0 && late <= 1.0 && t_off - t_on >= 5.0 - e;
    Check::new(
        NAME,
        passed,
        format!(
            "drive {:.1} s, max error {dip:.2} deg (<= 3), error from onset + 2.5 s {late:.2} deg (<= 1)",
            t_off - t_on
        ),
    )
}

/// Attitude through a throttle ramp from idle past hover and the blend
/// factor's shape over the ramp.
pub fn transition_smoothness() -> Check {
    const NAME: &str = "transition_smoothness";
    let (log, _) = match run_builtin("air_ground_transition") {
        Ok(v) => v,
        Err(e) => return Check::failed(NAME, e),
    };
    let gains = default_gains::<f64>();
    let idle = gains.thr_idle;
    let hover = gains.thr_hover;
    let e = eps(&log);
    let Some(start) = log.records.iter().position(|r| r.setpoint.throttle > idle) else {
        return Check::failed(NAME, "throttle never leaves idle");
    };
    let Some(top) = log.records[start..].iter().position(|r| r.blend >= 1.0) else {
        return Check::failed(NAME, "throttle never reaches hover");
    };
    let ramp = &log.records[start - 1..=start + top];
    let t_end = ramp.last().map_or(0.0, |r| r.t) + 2.0;
    let attitude = log
        .records
        .iter()
        .filter(|r| r.t >= ramp[0].t - e && r.t <= t_end + e)
        .map(|r| {
            let a = r.state.euler();
            a.roll.abs().max(a.pitch.abs()).to_degrees()
        })
        .fold(0.0, f64::max);
    let airborne = log
        .records
        .iter()
        .any(|r| r.state.mode() == hagv_core::dynamics::ContactMode::Aerial);
    let max_du = ramp
        .windows(2)
        .map(|w| (w[1].setpoint.throttle - w[0].setpoint.throttle).abs())
        .fold(0.0, f64::max);
    let max_dc = ramp
        .windows(2)
        .map(|w| (w[1].blend - w[0].blend).abs())
        .fold(0.0, f64::max);
    let monotone = ramp.windows(2).all(|w| w[1].blend >= w[0].blend);
    let continuous = max_dc <= max_du / (hover - idle) + 1e-12;
    let passed = airborne && attitude < 5.0 && monotone && continuous;
    Check::new(
        NAME,
        passed,
        format!(
            "max |roll|,|pitch| {attitude:.2} deg (< 5), blend monotone {monotone}, max step {max_dc:.2e} \
             (<= {:.2e}), lifted off {airborne}",
            max_du / (hover - idle)
        ),
    )
}

pub fn energy_ordering() -> Check {
    const NAME: &str = "energy_ordering";
    let (log, _) = match run_builtin("mission") {
        Ok(v) => v,
        Err(e) => return Check::failed(NAME, e),
    };
    let rep = energy_report(&log.records);
    let modes = [
        ActiveMode::Aerial,
        ActiveMode::Decoupled,
        ActiveMode::Ground,
        ActiveMode::Idle,
    ];
    let mut means = [0.0; 4];
    for (m, out) in modes.iter().zip(&mut means) {
        match rep.mean_power(*m) {
            Some(v) => *out = v,
            None => return Check::failed(NAME, format!("mission has no {} segment", m.as_str())),
        }
    }
    let ordered = means.windows(2).all(|w| w[0] > w[1]);
    let gap = (rep.segment_sum() - rep.total).abs();
    Check::new(
        NAME,
        ordered && gap <= 1e-9,
        format!(
            "mean W aerial {:.1} > decoupled {:.1} > ground {:.1} > idle {:.1}: {ordered}, sum gap {gap:.1e} J (<= 1e-9)",
            means[0], means[1], means[2], means[3]
        ),
    )
}

pub fn determinism() -> Check {
    const NAME: &str = "determinism";
    for (name, _) in BUILTIN {
        let mut out = Vec::with_capacity(2);
        for _ in 0..2 {
            let (log, _) = match run_builtin(name) {
                Ok(v) => v,
                Err(e) => return Check::failed(NAME, e),
            };
            match to_csv_string(&log.records, &log.params) {
                Ok(s) => out.push(s),
                Err(e) => return Check::failed(NAME, e),
            }
        }
        if out[0] != out[1] {
            return Check::failed(NAME, format!("{name}: telemetry differs between runs"));
        }
    }
    Check::new(
        NAME,
        true,
        format!("{} scenarios byte-identical across two runs", BUILTIN.len()),
    )
}

/// Wheel torques ignore the pitch state, and the along-track thrust
/// vanishes exactly when the servo cancels the pitch.
pub fn decoupling_invariant() -> Check {
    const NAME: &str = "decoupling_invariant";
    let gains = default_gains::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..1000 {
        let v_d = rng.gen_range(-1.5..1.5);
        let yaw_rate_d = rng.gen_range(-1.5..1.5);
        let pitch_d = rng.gen_range(-1.5..1.5);
        let (mut a, _) = random_ground(&mut rng);
        let mut b = a;
        b.pitch = rng.gen_range(-1.5..1.5);
        b.pitch_rate = rng.gen_range(-4.0..4.0);
        a.pitch_rate = rng.gen_range(-4.0..4.0);
        let run = |s: &GroundState<f64>| {
            let mut pids = DecoupledPids::default();
            decoupled_control(
                pitch_d,
                v_d,
                yaw_rate_d,
                s,
                &gains.decoupled,
                gains.t_hold,
                1e-3,
                gains.d_filter_tau,
                &mut pids,
            )
        };
        let (ca, cb) = (run(&a), run(&b));
        if ca.wheel_torque.map(f64::to_bits) != cb.wheel_torque.map(f64::to_bits) {
            return Check::failed(
                NAME,
                format!(
                    "sample {k}: wheel torques {:?} vs {:?}",
                    ca.wheel_torque, cb.wheel_torque
                ),
            );
        }
        let thrust = rng.gen_range(0.0..15.0);
        let fx = thrust_along_track(thrust, a.pitch, -a.pitch);
        if fx != 0.0 {
            return Check::failed(
                NAME,
                format!("sample {k}: along-track thrust {fx:e} at sigma = -theta"),
            );
        }
    }
    Check::new(
        NAME,
        true,
        "1000 samples: wheel torques bit-identical, along-track thrust exactly 0".into(),
    )
}
