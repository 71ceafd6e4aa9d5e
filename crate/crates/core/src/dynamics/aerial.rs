use crate::scalar::Real;
use crate::se3::{rot_y, skew, Mat3, Vec3};
use crate::vehicle::{ActuatorCommand, VehicleParams};

/// Full rigid-body state in flight. Wheels are locked to the chassis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AerialState<S> {
    /// Chassis CG position in the inertial frame, m.
    pub p: Vec3<S>,
    /// Inertial velocity, m/s.
    pub v: Vec3<S>,
    /// Body-to-inertial rotation.
    pub r: Mat3<S>,
    /// Body angular velocity, rad/s.
    pub omega: Vec3<S>,
    /// Wheel angles, frozen while airborne.
    pub wheel_angle: [S; 2],
    /// Along-track ground distance carried through the flight so the planar
    /// coordinate survives a hop.
    pub odometer: S,
}

impl<S: Real> AerialState<S> {
    pub fn at_rest(p: Vec3<S>) -> Self {
        Self {
            p,
            v: Vec3::zero(),
            r: Mat3::identity(),
            omega: Vec3::zero(),
            wheel_angle: [S::zero(); 2],
            odometer: S::zero(),
        }
    }

    /// Lowest point of either wheel above the ground plane, m.
    pub fn wheel_clearance(&self, p: &VehicleParams<S>) -> S {
        (0..2)
            .map(|i| (self.p + self.r * p.wheel_arm(i)).z - p.r)
            .fold(S::infinity(), S::min)
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite()
            && self.v.is_finite()
            && self.r.is_finite()
            && self.omega.is_finite()
            && self.odometer.is_finite()
    }
}

/// Time derivative of an [`AerialState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AerialRates<S> {
    pub p_dot: Vec3<S>,
    pub v_dot: Vec3<S>,
    pub r_dot: Mat3<S>,
    pub omega_dot: Vec3<S>,
}

impl<S: Real> super::Integrate<S> for AerialState<S> {
    type Rate = AerialRates<S>;

    fn advance(&self, h: S, d: &AerialRates<S>) -> Self {
        Self {
            p: self.p + d.p_dot * h,
            v: self.v + d.v_dot * h,
            r: self.r + d.r_dot.scale(h),
            omega: self.omega + d.omega_dot * h,
            ..*self
        }
    }
}

impl<S: Real> super::Rate<S> for AerialRates<S> {
    fn scaled_add(&self, k: S, o: &Self) -> Self {
        Self {
            p_dot: self.p_dot + o.p_dot * k,
            v_dot: self.v_dot + o.v_dot * k,
            r_dot: self.r_dot + o.r_dot.scale(k),
            omega_dot: self.omega_dot + o.omega_dot * k,
        }
    }
}

/// Thrust vector of propeller `i` in the body frame: `Ry(σ)·[0, 0, T]`.
pub fn prop_force<S: Real>(cmd: &ActuatorCommand<S>, i: usize) -> Vec3<S> {
    rot_y(cmd.tilt[i]) * Vec3::new(S::zero(), S::zero(), cmd.thrust[i])
}

/// Rigid bicopter dynamics with the wheels locked.
///
/// Translational: `(m + 2m_w)·v̇ = (m + 2m_w)·g + R·(f₁ + f₂)`.
/// Rotational: `J_Σ·ω̇ + ω × J_Σ·ω = d₁ × f₁ + d₂ × f₂`.
pub fn aerial_derivative<S: Real>(
    s: &AerialState<S>,
    cmd: &ActuatorCommand<S>,
    p: &VehicleParams<S>,
) -> AerialRates<S> {
    let f = [prop_force(cmd, 0), prop_force(cmd, 1)];
    let mass = p.total_mass();
    let v_dot = s.r * (f[0] + f[1]) * (S::one() / mass) + p.gravity();

    let torque = p.prop_arm(0).cross(f[0]) + p.prop_arm(1).cross(f[1]);
    let j = p.inertia_total();
    let gyro = s.omega.cross(j * s.omega);
    let omega_dot = j.diag_inverse() * (torque - gyro);

    AerialRates {
        p_dot: s.v,
        v_dot,
        r_dot: s.r * skew(s.omega),
        omega_dot,
    }
}
