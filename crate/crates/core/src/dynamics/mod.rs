//! Vehicle dynamics: rigid-body flight, planar ground contact, contact-mode
//! switching and the fixed-step integrator.

mod aerial;
mod ground;
mod oracle;

pub use aerial::{aerial_derivative, prop_force, AerialRates, AerialState};
pub use ground::{ground_derivative, thrust_along_track, ContactForces, GroundRates, GroundState};
pub use oracle::{lagrangian_oracle, upright_pole};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::se3::{euler_to_rotation, rotation_to_euler, wrap_angle, EulerAngles, Vec3};
use crate::vehicle::{propeller_power, wheel_power, ActuatorCommand, VehicleParams};

/// Largest step accepted by [`step`], s.
pub const MAX_DT: f64 = 0.01;

/// A state that can be advanced along a rate.
pub trait Integrate<S>: Copy {
    type Rate: Rate<S>;
    fn advance(&self, h: S, rate: &Self::Rate) -> Self;
}

pub trait Rate<S>: Copy {
    /// `self + k·other`.
    fn scaled_add(&self, k: S, other: &Self) -> Self;
}

/// One classic fourth-order Runge–Kutta step.
pub fn rk4<S: Real, X: Integrate<S>>(
    x: &X,
    h: S,
    mut f: impl FnMut(&X) -> Result<X::Rate>,
) -> Result<X> {
    let half = h * S::lit(0.5);
    let two = S::lit(2.0);
    let k1 = f(x)?;
    let k2 = f(&x.advance(half, &k1))?;
    let k3 = f(&x.advance(half, &k2))?;
    let k4 = f(&x.advance(h, &k3))?;
    let sum = k1
        .scaled_add(two, &k2)
        .scaled_add(two, &k3)
        .scaled_add(S::one(), &k4);
    Ok(x.advance(h / S::lit(6.0), &sum))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContactMode {
    Aerial,
    Ground,
}

impl ContactMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ContactMode::Aerial => "aerial",
            ContactMode::Ground => "ground",
        }
    }
}

/// Mode-tagged body state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Body<S> {
    Aerial(AerialState<S>),
    Ground(GroundState<S>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState<S> {
    pub body: Body<S>,
    /// Contact forces at this state under the last applied command (ground only).
    pub contact: Option<ContactForces<S>>,
    /// Electrical energy drawn so far, J.
    pub energy_used: S,
    /// Power drawn during the last step, W.
    pub power: S,
    pub t: S,
}

impl<S: Real> VehicleState<S> {
    pub fn ground(g: GroundState<S>) -> Self {
        Self::new(Body::Ground(g))
    }

    pub fn aerial(a: AerialState<S>) -> Self {
        Self::new(Body::Aerial(a))
    }

    fn new(body: Body<S>) -> Self {
        Self {
            body,
            contact: None,
            energy_used: S::zero(),
            power: S::zero(),
            t: S::zero(),
        }
    }

    pub fn mode(&self) -> ContactMode {
        match self.body {
            Body::Aerial(_) => ContactMode::Aerial,
            Body::Ground(_) => ContactMode::Ground,
        }
    }

    /// Attitude as Euler angles, whichever mode is active.
    pub fn euler(&self) -> EulerAngles<S> {
        match &self.body {
            Body::Aerial(a) => rotation_to_euler(&a.r),
            Body::Ground(g) => EulerAngles::new(S::zero(), g.pitch, g.yaw),
        }
    }

    /// CG position in the inertial frame.
    pub fn position(&self, p: &VehicleParams<S>) -> Vec3<S> {
        match &self.body {
            Body::Aerial(a) => a.p,
            Body::Ground(g) => Vec3::new(g.north, g.east, g.cg_height(p)),
        }
    }

    /// CG velocity in the inertial frame.
    pub fn velocity(&self, p: &VehicleParams<S>) -> Vec3<S> {
        match &self.body {
            Body::Aerial(a) => a.v,
            Body::Ground(g) => embed(g, p).v,
        }
    }

    /// Wheel spin rates; zero while airborne.
    pub fn wheel_rates(&self, p: &VehicleParams<S>) -> [S; 2] {
        match &self.body {
            Body::Aerial(_) => [S::zero(); 2],
            Body::Ground(g) => g.wheel_rates(p),
        }
    }

    pub fn is_finite(&self) -> bool {
        let body = match &self.body {
            Body::Aerial(a) => a.is_finite(),
            Body::Ground(g) => g.is_finite(),
        };
        body && self.energy_used.is_finite() && self.t.is_finite()
    }
}

/// Electrical power drawn at state `s` under `cmd`, W. Wheel power uses the
/// commanded torque and the motor rate relative to the chassis.
pub fn instantaneous_power<S: Real>(
    s: &VehicleState<S>,
    cmd: &ActuatorCommand<S>,
    p: &VehicleParams<S>,
) -> S {
    let rates = match &s.body {
        Body::Aerial(_) => [S::zero(); 2],
        Body::Ground(g) => g.motor_rates(p),
    };
    let props = propeller_power(cmd.thrust[0], p) + propeller_power(cmd.thrust[1], p);
    let wheels = wheel_power(cmd.wheel_torque[0], rates[0], p)
        + wheel_power(cmd.wheel_torque[1], rates[1], p);
    props + wheels + p.p_idle
}

/// Advances the state by one RK4 step of the active mode's dynamics.
///
/// Attitude is re-orthonormalized in flight; on the ground the chassis is
/// held at its pitch stop and yaw is wrapped into `(-π, π]`. The contact
/// forces at the end state are stored for [`contact_transition`].
pub fn step<S: Real>(
    s: &VehicleState<S>,
    cmd: &ActuatorCommand<S>,
    dt: S,
    p: &VehicleParams<S>,
) -> Result<VehicleState<S>> {
    if !(dt > S::zero() && dt <= S::lit(MAX_DT)) {
        return Err(Error::OutOfRange {
            what: "dt",
            value: dt.to_f64_lossy(),
            lo: 0.0,
            hi: MAX_DT,
        });
    }
    let power = instantaneous_power(s, cmd, p);
    let (body, contact) = match &s.body {
        Body::Aerial(a) => {
            let mut next = rk4(a, dt, |x| Ok(aerial_derivative(x, cmd, p)))?;
            next.r = next.r.orthonormalized();
            (Body::Aerial(next), None)
        }
        Body::Ground(g) => {
            let mut next = rk4(g, dt, |x| ground_derivative(x, cmd, p).map(|(d, _)| d))?;
            let stop = p.pitch_stop;
            if next.pitch.abs() > stop {
                let sign = next.pitch.signum();
                next.pitch = sign * stop;
                if sign * next.pitch_rate > S::zero() {
                    next.pitch_rate = S::zero();
                }
            }
            next.yaw = wrap_angle(next.yaw);
            let (_, c) = ground_derivative(&next, cmd, p)?;
            (Body::Ground(next), Some(c))
        }
    };
    Ok(VehicleState {
        body,
        contact,
        energy_used: s.energy_used + dt * power,
        power,
        t: s.t + dt,
    })
}

/// Switches contact mode when the contact condition changes.
///
/// Touchdown happens when a wheel reaches the ground while not climbing; the
/// vertical velocity is discarded and roll snapped to zero. Liftoff happens
/// when the solved ground normal force is no longer positive.
pub fn contact_transition<S: Real>(s: &VehicleState<S>, p: &VehicleParams<S>) -> VehicleState<S> {
    match &s.body {
        Body::Aerial(a) => {
            if a.wheel_clearance(p) <= S::zero() && a.v.z <= S::zero() {
                VehicleState {
                    body: Body::Ground(project(a, p)),
                    contact: None,
                    ..*s
                }
            } else {
                *s
            }
        }
        Body::Ground(g) => match s.contact {
            Some(c) if c.normal_total() <= S::zero() => VehicleState {
                body: Body::Aerial(embed(g, p)),
                contact: None,
                ..*s
            },
            _ => *s,
        },
    }
}

/// Planar state of a vehicle touching down from flight.
///
/// Heading comes from the body `y` axis and pitch from the body `x` axis in
/// the heading plane, so lying flat (`|θ| = π/2`) is not singular. Roll is
/// discarded.
pub fn project<S: Real>(a: &AerialState<S>, p: &VehicleParams<S>) -> GroundState<S> {
    let _ = p;
    let m = &a.r.m;
    let yaw = (-m[0][1]).atan2(m[1][1]);
    let (sy, cy) = yaw.sin_cos();
    let pitch = (-m[2][0]).atan2(m[0][0] * cy + m[1][0] * sy);
    let w = a.r * a.omega;
    GroundState {
        x: a.odometer,
        x_dot: a.v.x * cy + a.v.y * sy,
        pitch,
        pitch_rate: a.omega.y,
        yaw,
        yaw_rate: w.z,
        wheel_angle: a.wheel_angle,
        north: a.p.x,
        east: a.p.y,
    }
}

/// Rigid-body state of a vehicle leaving the ground.
pub fn embed<S: Real>(g: &GroundState<S>, p: &VehicleParams<S>) -> AerialState<S> {
    let (sp, cp) = g.pitch.sin_cos();
    let (sy, cy) = g.yaw.sin_cos();
    AerialState {
        p: Vec3::new(g.north, g.east, g.cg_height(p)),
        v: Vec3::new(g.x_dot * cy, g.x_dot * sy, -p.l_wz * sp * g.pitch_rate),
        r: euler_to_rotation(EulerAngles::new(S::zero(), g.pitch, g.yaw)),
        omega: Vec3::new(-sp * g.yaw_rate, g.pitch_rate, cp * g.yaw_rate),
        wheel_angle: g.wheel_angle,
        odometer: g.x,
    }
}

/// Applies an angular impulse `l` (N·m·s) about the body pitch axis.
///
/// On the ground the impulse is shared with the wheels through the rolling
/// constraint, so both pitch rate and forward speed change.
pub fn apply_pitch_impulse<S: Real>(
    s: &VehicleState<S>,
    l: S,
    p: &VehicleParams<S>,
) -> VehicleState<S> {
    let body = match s.body {
        Body::Aerial(mut a) => {
            a.omega.y = a.omega.y + l / p.inertia_total().m[1][1];
            Body::Aerial(a)
        }
        Body::Ground(mut g) => {
            let two = S::lit(2.0);
            let cth = g.pitch.cos();
            let m11 = p.m + two * p.m_w + two * p.j_w.y / (p.r * p.r);
            let m12 = p.m * p.l_wz * cth;
            let m22 = p.m * p.l_wz * p.l_wz + p.j.y;
            let det = m11 * m22 - m12 * m12;
            let d_rate = m11 * l / det;
            let d_axle = -m12 * l / det;
            g.pitch_rate = g.pitch_rate + d_rate;
            g.x_dot = g.x_dot + d_axle + p.l_wz * cth * d_rate;
            Body::Ground(g)
        }
    };
    VehicleState { body, ..*s }
}
