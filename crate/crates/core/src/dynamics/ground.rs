//! Planar balance-bot dynamics with yaw, solved by Newton–Euler.
//!
//! Unknowns are the accelerations and the constraint forces, solved together
//! as one linear system each call:
//!
//! | idx | unknown | meaning |
//! |-----|---------|---------|
//! | 0 | ẍ  | chassis CG acceleration along the heading |
//! | 1 | θ̈  | pitch acceleration |
//! | 2 | γ̈  | yaw acceleration |
//! | 3,4 | δ̈ᵢ | wheel spin accelerations |
//! | 5,6 | Hᵢ | horizontal wheel force on the chassis |
//! | 7 | V  | total vertical wheel force on the chassis |
//! | 8,9 | Fᵢ | ground friction on wheel i |
//!
//! Rows: chassis translation along the heading, chassis pitch about its CG,
//! chassis vertical balance (with `z_cg = r + l_wz·cos θ`), chassis yaw, wheel
//! translation, wheel spin, and the rolling constraint `r·δ̈ᵢ = ẍ_wᵢ` where
//! `ẍ_wᵢ = ẍ − l_wz·cos θ·θ̈ + l_wz·sin θ·θ̇² ∓ l_wy·γ̈` is the rigid-body
//! acceleration of the axle.

use crate::error::{Error, Result};
use crate::linsolve;
use crate::scalar::Real;
use crate::vehicle::{side, ActuatorCommand, VehicleParams};

/// Planar ground state. Index 0 is the left wheel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroundState<S> {
    /// Chassis CG displacement along the heading, m.
    pub x: S,
    pub x_dot: S,
    /// Pitch, rad. Positive tips the top of the chassis forward.
    pub pitch: S,
    pub pitch_rate: S,
    pub yaw: S,
    pub yaw_rate: S,
    /// Absolute wheel rotation angles, rad.
    pub wheel_angle: [S; 2],
    /// CG position in the inertial ground plane, m.
    pub north: S,
    pub east: S,
}

impl<S: Real> GroundState<S> {
    pub fn upright() -> Self {
        Self::default()
    }

    pub fn with_pitch(pitch: S) -> Self {
        Self {
            pitch,
            ..Self::default()
        }
    }

    /// CG height above the ground plane.
    pub fn cg_height(&self, p: &VehicleParams<S>) -> S {
        p.r + p.l_wz * self.pitch.cos()
    }

    /// Speed of the axle midpoint along the heading (wheel odometry).
    pub fn axle_speed(&self, p: &VehicleParams<S>) -> S {
        self.x_dot - p.l_wz * self.pitch.cos() * self.pitch_rate
    }

    /// Wheel spin rates implied by rolling without slip.
    pub fn wheel_rates(&self, p: &VehicleParams<S>) -> [S; 2] {
        let axle = self.axle_speed(p);
        core::array::from_fn(|i| (axle - side::<S>(i) * p.l_wy * self.yaw_rate) / p.r)
    }

    /// Wheel spin rates relative to the chassis, as seen by the gearmotors.
    pub fn motor_rates(&self, p: &VehicleParams<S>) -> [S; 2] {
        self.wheel_rates(p).map(|w| w - self.pitch_rate)
    }

    /// Torques the gearmotors deliver to the wheels under `cmd`.
    pub fn delivered_torques(&self, cmd: &ActuatorCommand<S>, p: &VehicleParams<S>) -> [S; 2] {
        let rates = self.motor_rates(p);
        core::array::from_fn(|i| cmd.wheel_torque[i] - p.b_motor * rates[i])
    }

    /// Ground speed of wheel `i`'s contact patch center (the axle above it).
    pub fn contact_speed(&self, i: usize, p: &VehicleParams<S>) -> S {
        self.axle_speed(p) - side::<S>(i) * p.l_wy * self.yaw_rate
    }

    /// Kinetic plus potential energy of the passive mechanism, J. Potential
    /// is referenced to the axle height on level ground.
    pub fn mechanical_energy(&self, p: &VehicleParams<S>) -> S {
        let half = S::lit(0.5);
        let (s, c) = self.pitch.sin_cos();
        let vz = -p.l_wz * s * self.pitch_rate;
        let chassis = half * p.m * (self.x_dot * self.x_dot + vz * vz)
            + half * p.j.y * self.pitch_rate * self.pitch_rate
            + half * (p.j.z + S::lit(2.0) * p.j_w.z) * self.yaw_rate * self.yaw_rate;
        let wheels: S = (0..2)
            .map(|i| {
                let v = self.contact_speed(i, p);
                let w = self.wheel_rates(p)[i];
                half * p.m_w * v * v + half * p.j_w.y * w * w
            })
            .fold(S::zero(), |a, b| a + b);
        let g = p.gravity();
        let heading_g = g.x * self.yaw.cos() + g.y * self.yaw.sin();
        let axle_x = self.x - p.l_wz * s;
        let potential = -p.m * (heading_g * self.x + g.z * p.l_wz * c)
            - S::lit(2.0) * p.m_w * heading_g * axle_x;
        chassis + wheels + potential
    }

    pub fn is_finite(&self) -> bool {
        [
            self.x,
            self.x_dot,
            self.pitch,
            self.pitch_rate,
            self.yaw,
            self.yaw_rate,
            self.wheel_angle[0],
            self.wheel_angle[1],
            self.north,
            self.east,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Time derivative of a [`GroundState`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroundRates<S> {
    pub x_dot: S,
    pub x_ddot: S,
    pub pitch_rate: S,
    pub pitch_accel: S,
    pub yaw_rate: S,
    pub yaw_accel: S,
    pub wheel_rate: [S; 2],
    pub north_dot: S,
    pub east_dot: S,
}

impl<S: Real> super::Integrate<S> for GroundState<S> {
    type Rate = GroundRates<S>;

    fn advance(&self, h: S, d: &GroundRates<S>) -> Self {
        Self {
            x: self.x + d.x_dot * h,
            x_dot: self.x_dot + d.x_ddot * h,
            pitch: self.pitch + d.pitch_rate * h,
            pitch_rate: self.pitch_rate + d.pitch_accel * h,
            yaw: self.yaw + d.yaw_rate * h,
            yaw_rate: self.yaw_rate + d.yaw_accel * h,
            wheel_angle: [
                self.wheel_angle[0] + d.wheel_rate[0] * h,
                self.wheel_angle[1] + d.wheel_rate[1] * h,
            ],
            north: self.north + d.north_dot * h,
            east: self.east + d.east_dot * h,
        }
    }
}

impl<S: Real> super::Rate<S> for GroundRates<S> {
    fn scaled_add(&self, k: S, o: &Self) -> Self {
        Self {
            x_dot: self.x_dot + o.x_dot * k,
            x_ddot: self.x_ddot + o.x_ddot * k,
            pitch_rate: self.pitch_rate + o.pitch_rate * k,
            pitch_accel: self.pitch_accel + o.pitch_accel * k,
            yaw_rate: self.yaw_rate + o.yaw_rate * k,
            yaw_accel: self.yaw_accel + o.yaw_accel * k,
            wheel_rate: [
                self.wheel_rate[0] + o.wheel_rate[0] * k,
                self.wheel_rate[1] + o.wheel_rate[1] * k,
            ],
            north_dot: self.north_dot + o.north_dot * k,
            east_dot: self.east_dot + o.east_dot * k,
        }
    }
}

/// Constraint forces solved alongside the ground accelerations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ContactForces<S> {
    /// Horizontal force of each wheel on the chassis, N.
    pub h: [S; 2],
    /// Ground normal force on each wheel, N. The total is exact; the
    /// left/right split is even.
    pub n: [S; 2],
    /// Ground friction on each wheel, N.
    pub f: [S; 2],
}

impl<S: Real> ContactForces<S> {
    pub fn normal_total(&self) -> S {
        self.n[0] + self.n[1]
    }

    pub fn is_finite(&self) -> bool {
        self.h
            .iter()
            .chain(&self.n)
            .chain(&self.f)
            .all(|v| v.is_finite())
    }
}

const XDD: usize = 0;
const TDD: usize = 1;
const GDD: usize = 2;
const D1: usize = 3;
const H1: usize = 5;
const V: usize = 7;
const F1: usize = 8;

/// Along-track component of one propeller's thrust, `T·sin(θ + σ)`. Zero
/// when the servo cancels the pitch.
pub fn thrust_along_track<S: Real>(thrust: S, pitch: S, tilt: S) -> S {
    thrust * (pitch + tilt).sin()
}

/// External load terms entering the Newton–Euler rows.
pub(crate) struct Loads<S> {
    /// Along-heading gravity component.
    pub g_along: S,
    /// Ground-normal gravity component (negative).
    pub g_normal: S,
    /// Horizontal and vertical thrust components per propeller.
    pub fx: [S; 2],
    pub fz: [S; 2],
}

impl<S: Real> Loads<S> {
    pub fn new(s: &GroundState<S>, cmd: &ActuatorCommand<S>, p: &VehicleParams<S>) -> Self {
        let g = p.gravity();
        let (sy, cy) = s.yaw.sin_cos();
        Self {
            g_along: g.x * cy + g.y * sy,
            g_normal: g.z,
            fx: core::array::from_fn(|i| thrust_along_track(cmd.thrust[i], s.pitch, cmd.tilt[i])),
            fz: core::array::from_fn(|i| cmd.thrust[i] * (s.pitch + cmd.tilt[i]).cos()),
        }
    }

    /// Yaw torque of the horizontal thrust components about the CG.
    pub fn thrust_yaw_torque(&self, p: &VehicleParams<S>) -> S {
        p.l_y * (self.fx[1] - self.fx[0])
    }
}

/// Ground-mode accelerations and contact forces.
///
/// When the chassis lies on its pitch stop and the free solution would push
/// it further, the stop supplies whatever moment keeps `θ̈ = 0`.
pub fn ground_derivative<S: Real>(
    s: &GroundState<S>,
    cmd: &ActuatorCommand<S>,
    p: &VehicleParams<S>,
) -> Result<(GroundRates<S>, ContactForces<S>)> {
    let free = solve_newton_euler(s, cmd, p, false)?;
    if resting_on_stop(s, free.0.pitch_accel, p) {
        return solve_newton_euler(s, cmd, p, true);
    }
    Ok(free)
}

fn resting_on_stop<S: Real>(s: &GroundState<S>, pitch_accel: S, p: &VehicleParams<S>) -> bool {
    let sign = s.pitch.signum();
    s.pitch.abs() >= p.pitch_stop
        && sign * pitch_accel > S::zero()
        && sign * s.pitch_rate >= S::zero()
}

fn solve_newton_euler<S: Real>(
    s: &GroundState<S>,
    cmd: &ActuatorCommand<S>,
    p: &VehicleParams<S>,
    pitch_locked: bool,
) -> Result<(GroundRates<S>, ContactForces<S>)> {
    let z = S::zero();
    let one = S::one();
    let (sth, cth) = s.pitch.sin_cos();
    let w2 = s.pitch_rate * s.pitch_rate;
    let loads = Loads::new(s, cmd, p);
    let tau = s.delivered_torques(cmd, p);
    // Centripetal part of the axle acceleration along the heading.
    let cen = p.l_wz * sth * w2;

    let mut a = [[z; 10]; 10];
    let mut b = [z; 10];

    a[0][XDD] = p.m;
    a[0][H1] = -one;
    a[0][H1 + 1] = -one;
    b[0] = loads.fx[0] + loads.fx[1] + p.m * loads.g_along;

    if pitch_locked {
        a[1][TDD] = one;
    } else {
        a[1][TDD] = p.j.y;
        a[1][H1] = p.l_wz * cth;
        a[1][H1 + 1] = p.l_wz * cth;
        a[1][V] = -p.l_wz * sth;
        b[1] = p.l_z * (cmd.thrust[0] * cmd.tilt[0].sin() + cmd.thrust[1] * cmd.tilt[1].sin())
            - (tau[0] + tau[1]);
    }

    a[2][TDD] = -p.m * p.l_wz * sth;
    a[2][V] = -one;
    b[2] = loads.fz[0] + loads.fz[1] + p.m * loads.g_normal + p.m * p.l_wz * cth * w2;

    a[3][GDD] = p.j.z + S::lit(2.0) * p.j_w.z;
    a[3][H1] = p.l_wy;
    a[3][H1 + 1] = -p.l_wy;
    b[3] = loads.thrust_yaw_torque(p);

    for i in 0..2 {
        let sd = side::<S>(i);
        let row = 4 + i;
        a[row][XDD] = p.m_w;
        a[row][TDD] = -p.m_w * p.l_wz * cth;
        a[row][GDD] = -sd * p.m_w * p.l_wy;
        a[row][F1 + i] = -one;
        a[row][H1 + i] = one;
        b[row] = p.m_w * loads.g_along - p.m_w * cen;

        let row = 6 + i;
        a[row][D1 + i] = p.j_w.y;
        a[row][F1 + i] = p.r;
        b[row] = tau[i];

        let row = 8 + i;
        a[row][D1 + i] = p.r;
        a[row][XDD] = -one;
        a[row][TDD] = p.l_wz * cth;
        a[row][GDD] = sd * p.l_wy;
        b[row] = cen;
    }

    let sol = linsolve::solve(a, b).map_err(|pivot| Error::SingularSystem {
        pivot: pivot.to_f64_lossy(),
        state: format!("{s:?} cmd={cmd:?}"),
    })?;

    let (sy, cy) = s.yaw.sin_cos();
    let rates = GroundRates {
        x_dot: s.x_dot,
        x_ddot: sol[XDD],
        pitch_rate: s.pitch_rate,
        pitch_accel: sol[TDD],
        yaw_rate: s.yaw_rate,
        yaw_accel: sol[GDD],
        wheel_rate: s.wheel_rates(p),
        north_dot: s.x_dot * cy,
        east_dot: s.x_dot * sy,
    };
    let half_v = sol[V] * S::lit(0.5);
    let contact = ContactForces {
        h: [sol[H1], sol[H1 + 1]],
        n: [
            half_v - p.m_w * loads.g_normal,
            half_v - p.m_w * loads.g_normal,
        ],
        f: [sol[F1], sol[F1 + 1]],
    };
    Ok((rates, contact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vehicle::default_params;

    #[test]
    fn upright_static_equilibrium() {
        let p = default_params::<f64>();
        let (d, c) =
            ground_derivative(&GroundState::upright(), &ActuatorCommand::zero(), &p).unwrap();
        assert_eq!(d.x_ddot, 0.0);
        assert_eq!(d.pitch_accel, 0.0);
        assert_eq!(d.yaw_accel, 0.0);
        assert!((c.normal_total() - p.weight()).abs() < 1e-12);
        assert!(c.h.iter().chain(&c.f).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn small_lean_falls_forward_and_base_reacts() {
        let p = default_params::<f64>();
        let (d, _) =
            ground_derivative(&GroundState::with_pitch(0.05), &ActuatorCommand::zero(), &p)
                .unwrap();
        assert!(d.pitch_accel > 0.0);
        assert!(d.x_ddot != 0.0);
    }

    #[test]
    fn thrust_along_negative_pitch_acts_only_through_pitch() {
        // With σ = −θ the horizontal thrust T·sin(θ + σ) vanishes. Stepping the
        // thrust then changes ẍ only through the wheel reaction to θ̈: with free
        // wheels, horizontal momentum balance gives
        //   Δẍ = (2m_w + 2J_wy/r²)·l_wz·cos θ·Δθ̈ / (m + 2m_w + 2J_wy/r²).
        let p = default_params::<f64>();
        let th = -30f64.to_radians();
        let s = GroundState::with_pitch(th);
        let base = ActuatorCommand {
            tilt: [-th, -th],
            ..ActuatorCommand::zero()
        };
        let pushed = ActuatorCommand {
            thrust: [8.0, 8.0],
            ..base
        };
        let loads = Loads::new(&s, &pushed, &p);
        assert_eq!(loads.fx[0] + loads.fx[1], 0.0);

        let (d0, _) = ground_derivative(&s, &base, &p).unwrap();
        let (d1, _) = ground_derivative(&s, &pushed, &p).unwrap();
        let d_theta = d1.pitch_accel - d0.pitch_accel;
        let wheel_mass = 2.0 * p.m_w + 2.0 * p.j_w.y / (p.r * p.r);
        let expected = wheel_mass * p.l_wz * th.cos() * d_theta / (p.m + wheel_mass);
        assert!(d_theta.abs() > 1.0);
        assert!(((d1.x_ddot - d0.x_ddot) - expected).abs() < 1e-9 * d_theta.abs());
    }

    #[test]
    fn heavy_thrust_unloads_wheels() {
        let p = default_params::<f64>();
        let t = 0.6 * p.weight();
        let cmd = ActuatorCommand {
            thrust: [t, t],
            ..ActuatorCommand::zero()
        };
        let (_, c) = ground_derivative(&GroundState::upright(), &cmd, &p).unwrap();
        assert!(c.normal_total() < 0.0);
    }

    #[test]
    fn differential_torque_turns() {
        let p = default_params::<f64>();
        let cmd = ActuatorCommand {
            wheel_torque: [-0.2, 0.2],
            ..ActuatorCommand::zero()
        };
        let (d, c) = ground_derivative(&GroundState::upright(), &cmd, &p).unwrap();
        assert!(d.yaw_accel > 0.0);
        assert!(d.x_ddot.abs() < 1e-12);
        // System yaw balance: (J_z + 2J_wz + 2m_w l_wy²)·γ̈ = (F₂ − F₁)·l_wy.
        let jz = p.inertia_total().m[2][2];
        assert!((jz * d.yaw_accel - (c.f[1] - c.f[0]) * p.l_wy).abs() < 1e-12);
    }

    #[test]
    fn flat_chassis_rests_on_stop() {
        let p = default_params::<f64>();
        let s = GroundState::with_pitch(-core::f64::consts::FRAC_PI_2);
        let (d, c) = ground_derivative(&s, &ActuatorCommand::zero(), &p).unwrap();
        assert_eq!(d.pitch_accel, 0.0);
        assert!(c.normal_total() > 0.0);
    }

    #[test]
    fn non_slip_rates() {
        let p = default_params::<f64>();
        let s = GroundState {
            x_dot: 0.4,
            pitch: 0.2,
            pitch_rate: -0.3,
            yaw_rate: 0.5,
            ..GroundState::upright()
        };
        let w = s.wheel_rates(&p);
        for i in 0..2 {
            assert!((w[i] * p.r - s.contact_speed(i, &p)).abs() < 1e-15);
        }
    }
}
