//! Physical parameters, actuator limits and electrical power models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{clamp, Real};
use crate::se3::{Mat3, Vec3};

/// Physical parameters of the vehicle.
///
/// Offsets are measured from the chassis center of gravity: propellers sit at
/// `[0, ±l_y, l_z]` and wheel axles at `[0, ±l_wy, -l_wz]` in the body frame
/// (index 0 is the left side, `+y`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(
        deserialize = "S: Real + Deserialize<'de>",
        serialize = "S: Real + Serialize"
    )
)]
pub struct VehicleParams<S> {
    /// Chassis mass (everything except the two wheels), kg.
    pub m: S,
    /// Mass of one wheel, kg.
    pub m_w: S,
    /// Diagonal chassis inertia about its CG, kg·m².
    pub j: Vec3<S>,
    /// Diagonal wheel inertia about its own center; `y` is the spin axis.
    pub j_w: Vec3<S>,
    pub l_y: S,
    pub l_z: S,
    pub l_wy: S,
    pub l_wz: S,
    /// Wheel radius, m.
    pub r: S,
    pub g: S,
    /// Ground slope along inertial `+x`, rad. Gravity is rotated by this angle.
    pub incline: S,
    /// Per-motor maximum thrust, N.
    pub t_max: S,
    pub sigma_max: S,
    /// Servo slew rate, rad/s.
    pub sigma_rate: S,
    /// Per-wheel motor torque limit, N·m.
    pub tau_max: S,
    /// Wheel gearmotor back-EMF damping, N·m·s/rad. The torque delivered to
    /// a wheel is `τ − b_motor·(ω_wheel − θ̇)`.
    pub b_motor: S,
    pub rho: S,
    /// Disk area of one propeller, m².
    pub a_prop: S,
    /// Propeller figure of merit.
    pub fm: S,
    pub eta_wheel: S,
    /// Wheel motor holding-loss coefficient, W/(N·m)².
    pub k_hold: S,
    /// Avionics idle power, W.
    pub p_idle: S,
    /// |pitch| at which the chassis lies on the ground. `inf` disables the stop.
    pub pitch_stop: S,
}

impl<S: Real> VehicleParams<S> {
    pub fn total_mass(&self) -> S {
        self.m + self.m_w + self.m_w
    }

    pub fn weight(&self) -> S {
        self.total_mass() * self.g
    }

    /// Gravity vector in the inertial frame, m/s².
    pub fn gravity(&self) -> Vec3<S> {
        let (s, c) = self.incline.sin_cos();
        Vec3::new(-self.g * s, S::zero(), -self.g * c)
    }

    /// Propeller arm `d_i` in the body frame.
    pub fn prop_arm(&self, i: usize) -> Vec3<S> {
        Vec3::new(S::zero(), side::<S>(i) * self.l_y, self.l_z)
    }

    /// Wheel axle offset `d_wi` in the body frame.
    pub fn wheel_arm(&self, i: usize) -> Vec3<S> {
        Vec3::new(S::zero(), side::<S>(i) * self.l_wy, -self.l_wz)
    }

    /// Inertia of the whole vehicle about the chassis CG with locked wheels.
    pub fn inertia_total(&self) -> Mat3<S> {
        let two = S::lit(2.0);
        let (wy, wz) = (self.l_wy * self.l_wy, self.l_wz * self.l_wz);
        Mat3::diag(Vec3::new(
            self.j.x + two * (self.j_w.x + self.m_w * (wy + wz)),
            self.j.y + two * (self.j_w.y + self.m_w * wz),
            self.j.z + two * (self.j_w.z + self.m_w * wy),
        ))
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m", self.m),
            ("m_w", self.m_w),
            ("j.x", self.j.x),
            ("j.y", self.j.y),
            ("j.z", self.j.z),
            ("j_w.x", self.j_w.x),
            ("j_w.y", self.j_w.y),
            ("j_w.z", self.j_w.z),
            ("l_y", self.l_y),
            ("l_z", self.l_z),
            ("l_wy", self.l_wy),
            ("l_wz", self.l_wz),
            ("r", self.r),
            ("g", self.g),
            ("t_max", self.t_max),
            ("sigma_max", self.sigma_max),
            ("sigma_rate", self.sigma_rate),
            ("tau_max", self.tau_max),
            ("rho", self.rho),
            ("a_prop", self.a_prop),
            ("pitch_stop", self.pitch_stop),
        ];
        for (name, v) in positive {
            if !(v > S::zero()) {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [("fm", self.fm), ("eta_wheel", self.eta_wheel)] {
            if !(v > S::zero() && v <= S::one()) {
                return Err(Error::InvalidParams(format!(
                    "{name} must lie in (0, 1], got {v}"
                )));
            }
        }
        for (name, v) in [
            ("b_motor", self.b_motor),
            ("k_hold", self.k_hold),
            ("p_idle", self.p_idle),
        ] {
            if !(v >= S::zero()) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        if !self.incline.is_finite() || self.incline.abs() >= S::FRAC_PI_2() {
            return Err(Error::InvalidParams(format!(
                "incline out of range: {}",
                self.incline
            )));
        }
        Ok(())
    }

    /// Converts to another scalar type.
    pub fn cast<T: Real>(&self) -> VehicleParams<T> {
        let c = |v: S| T::lit(v.to_f64_lossy());
        let cv = |v: Vec3<S>| Vec3::new(c(v.x), c(v.y), c(v.z));
        VehicleParams {
            m: c(self.m),
            m_w: c(self.m_w),
            j: cv(self.j),
            j_w: cv(self.j_w),
            l_y: c(self.l_y),
            l_z: c(self.l_z),
            l_wy: c(self.l_wy),
            l_wz: c(self.l_wz),
            r: c(self.r),
            g: c(self.g),
            incline: c(self.incline),
            t_max: c(self.t_max),
            sigma_max: c(self.sigma_max),
            sigma_rate: c(self.sigma_rate),
            tau_max: c(self.tau_max),
            b_motor: c(self.b_motor),
            rho: c(self.rho),
            a_prop: c(self.a_prop),
            fm: c(self.fm),
            eta_wheel: c(self.eta_wheel),
            k_hold: c(self.k_hold),
            p_idle: c(self.p_idle),
            pitch_stop: c(self.pitch_stop),
        }
    }
}

/// `+1` for the left unit (index 0), `-1` for the right.
pub(crate) fn side<S: Real>(i: usize) -> S {
    if i == 0 {
        S::one()
    } else {
        -S::one()
    }
}

impl<S: Real> Default for VehicleParams<S> {
    fn default() -> Self {
        default_params()
    }
}

/// Reference parameter set.
///
/// Total mass is 2.78 kg with 0.15 kg per wheel. Wheels are 0.12 m in
/// diameter and propellers 10 in. Inertias come from a 0.51×0.36×0.12 m box
/// and solid-disk wheels.
pub fn default_params<S: Real>() -> VehicleParams<S> {
    let l = S::lit;
    let m_w = 0.15;
    let r = 0.06;
    let prop_radius = 0.127;
    VehicleParams {
        m: l(2.78 - 2.0 * m_w),
        m_w: l(m_w),
        j: Vec3::new(l(0.026), l(0.057), l(0.079)),
        j_w: Vec3::new(l(1.8e-4), l(0.5 * m_w * r * r), l(1.8e-4)),
        l_y: l(0.20),
        l_z: l(0.05),
        l_wy: l(0.18),
        l_wz: l(0.10),
        r: l(r),
        g: l(9.81),
        incline: S::zero(),
        t_max: l(30.0),
        sigma_max: S::FRAC_PI_2(),
        sigma_rate: l(6.0),
        tau_max: l(1.2),
        b_motor: l(0.06),
        rho: l(1.225),
        a_prop: S::PI() * l(prop_radius * prop_radius),
        fm: l(0.6),
        eta_wheel: l(0.7),
        k_hold: l(2.0),
        p_idle: l(10.0),
        pitch_stop: S::FRAC_PI_2(),
    }
}

/// Per-actuator command: thrusts (N), servo tilts (rad) and wheel torques
/// (N·m). Index 0 is the left unit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActuatorCommand<S> {
    pub thrust: [S; 2],
    pub tilt: [S; 2],
    pub wheel_torque: [S; 2],
}

impl<S: Real> ActuatorCommand<S> {
    pub fn zero() -> Self {
        Self {
            thrust: [S::zero(); 2],
            tilt: [S::zero(); 2],
            wheel_torque: [S::zero(); 2],
        }
    }

    /// Swaps left and right units.
    pub fn mirrored(&self) -> Self {
        let sw = |a: [S; 2]| [a[1], a[0]];
        Self {
            thrust: sw(self.thrust),
            tilt: sw(self.tilt),
            wheel_torque: sw(self.wheel_torque),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.thrust
            .iter()
            .chain(&self.tilt)
            .chain(&self.wheel_torque)
            .all(|v| v.is_finite())
    }
}

/// Quadratic static thrust curve `T = T_max·u²`.
pub fn throttle_to_thrust<S: Real>(u: S, p: &VehicleParams<S>) -> Result<S> {
    if !(u >= S::zero() && u <= S::one()) {
        return Err(Error::OutOfRange {
            what: "throttle",
            value: u.to_f64_lossy(),
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(p.t_max * u * u)
}

/// Inverse of [`throttle_to_thrust`], clamping to `[0, 1]`.
pub fn thrust_to_throttle<S: Real>(t: S, p: &VehicleParams<S>) -> S {
    clamp(t / p.t_max, S::zero(), S::one()).sqrt()
}

/// Throttle at which the two motors together carry the vehicle weight.
pub fn hover_throttle<S: Real>(p: &VehicleParams<S>) -> Result<S> {
    let weight = p.weight();
    let max = p.t_max + p.t_max;
    if weight > max {
        return Err(Error::InfeasibleHover {
            weight: weight.to_f64_lossy(),
            max_thrust: max.to_f64_lossy(),
        });
    }
    Ok((weight / max).sqrt())
}

/// Momentum-theory shaft power of one propeller at thrust `t`.
pub fn propeller_power<S: Real>(t: S, p: &VehicleParams<S>) -> S {
    let t = t.max(S::zero());
    let denom = p.fm * (S::lit(2.0) * p.rho * p.a_prop).sqrt();
    t * t.sqrt() / denom
}

/// Electrical power of one wheel motor: mechanical power through the
/// drivetrain efficiency plus an `I²R`-like holding loss.
pub fn wheel_power<S: Real>(tau: S, omega: S, p: &VehicleParams<S>) -> S {
    (tau * omega).abs() / p.eta_wheel + p.k_hold * tau * tau
}

/// Clamps every field to its actuator limit.
pub fn saturate<S: Real>(cmd: &ActuatorCommand<S>, p: &VehicleParams<S>) -> ActuatorCommand<S> {
    let mut out = *cmd;
    for i in 0..2 {
        out.thrust[i] = clamp(cmd.thrust[i], S::zero(), p.t_max);
        out.tilt[i] = clamp(cmd.tilt[i], -p.sigma_max, p.sigma_max);
        out.wheel_torque[i] = clamp(cmd.wheel_torque[i], -p.tau_max, p.tau_max);
    }
    out
}

/// Limits how far each servo can move from `prev` within `dt`.
pub fn slew_limit<S: Real>(
    prev: &ActuatorCommand<S>,
    cmd: &ActuatorCommand<S>,
    dt: S,
    p: &VehicleParams<S>,
) -> ActuatorCommand<S> {
    let step = p.sigma_rate * dt;
    let mut out = *cmd;
    for i in 0..2 {
        out.tilt[i] = clamp(cmd.tilt[i], prev.tilt[i] - step, prev.tilt[i] + step);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p() -> VehicleParams<f64> {
        default_params()
    }

    #[test]
    fn defaults_match_reference_vehicle() {
        let p = p();
        assert_relative_eq!(p.total_mass(), 2.78, epsilon = 1e-12);
        assert_relative_eq!(p.m, 2.48, epsilon = 1e-12);
        assert_eq!(p.r, 0.06);
        assert_relative_eq!(p.a_prop, 0.050_670_747, max_relative = 1e-6);
        assert_relative_eq!(p.j_w.y, 2.7e-4, epsilon = 1e-12);
        p.validate().unwrap();
    }

    #[test]
    fn throttle_curve_examples() {
        let p = p();
        assert_eq!(throttle_to_thrust(0.0, &p).unwrap(), 0.0);
        assert_eq!(throttle_to_thrust(1.0, &p).unwrap(), p.t_max);
        assert_eq!(throttle_to_thrust(0.5, &p).unwrap(), 0.25 * p.t_max);
        assert!(throttle_to_thrust(1.01, &p).is_err());
        assert!(throttle_to_thrust(-0.01, &p).is_err());
        assert!(throttle_to_thrust(f64::NAN, &p).is_err());
    }

    #[test]
    fn throttle_curve_monotone_on_grid() {
        let p = p();
        let mut last = -1.0;
        for k in 0..=10_000 {
            let t = throttle_to_thrust(k as f64 / 10_000.0, &p).unwrap();
            assert!(t >= last);
            last = t;
        }
    }

    #[test]
    fn hover_throttle_examples() {
        let mut p = p();
        let u = hover_throttle(&p).unwrap();
        assert_relative_eq!(u, (2.78 * 9.81 / 2.0 / 30.0_f64).sqrt(), epsilon = 1e-15);
        assert!((u - 0.674).abs() < 5e-4);
        assert!((2.0 * throttle_to_thrust(u, &p).unwrap() - p.weight()).abs() < 1e-9);

        p.t_max *= 2.0;
        assert_relative_eq!(
            hover_throttle(&p).unwrap(),
            u / 2f64.sqrt(),
            epsilon = 1e-15
        );

        p.t_max = 10.0;
        assert!(matches!(
            hover_throttle(&p),
            Err(Error::InfeasibleHover { .. })
        ));
    }

    #[test]
    fn propeller_power_examples() {
        let p = p();
        assert_eq!(propeller_power(0.0, &p), 0.0);
        // T^1.5 / (FM·sqrt(2·rho·A)) evaluated by hand: 50.32 / 0.2114.
        let hover = propeller_power(13.63, &p);
        assert!((hover - 238.0).abs() < 0.5, "{hover}");
        for t in [0.3, 4.0, 13.63, 27.0] {
            assert_relative_eq!(
                propeller_power(2.0 * t, &p) / propeller_power(t, &p),
                2f64.powf(1.5),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn wheel_power_examples() {
        let p = p();
        assert_eq!(wheel_power(0.0, 0.0, &p), 0.0);
        assert_relative_eq!(wheel_power(0.5, 10.0, &p), 5.0 / 0.7 + 0.5, epsilon = 1e-12);
        assert_eq!(wheel_power(0.5, -10.0, &p), wheel_power(0.5, 10.0, &p));
    }

    #[test]
    fn saturate_examples() {
        let p = p();
        let ok = ActuatorCommand {
            thrust: [5.0, 6.0],
            tilt: [0.1, -0.2],
            wheel_torque: [0.3, -0.4],
        };
        assert_eq!(saturate(&ok, &p), ok);
        let low = ActuatorCommand {
            thrust: [-3.0, 1.0],
            ..ok
        };
        assert_eq!(saturate(&low, &p).thrust[0], 0.0);
        let wide = ActuatorCommand {
            tilt: [2.0 * p.sigma_max, 0.0],
            ..ok
        };
        assert_eq!(saturate(&wide, &p).tilt[0], p.sigma_max);
    }

    #[test]
    fn slew_limit_caps_servo_motion() {
        let p = p();
        let prev = ActuatorCommand::zero();
        let cmd = ActuatorCommand {
            tilt: [0.5, -0.001],
            ..ActuatorCommand::zero()
        };
        let out = slew_limit(&prev, &cmd, 0.001, &p);
        assert_relative_eq!(out.tilt[0], 0.006, epsilon = 1e-15);
        assert_eq!(out.tilt[1], -0.001);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut q = p();
        q.fm = 1.5;
        assert!(q.validate().is_err());
        let mut q = p();
        q.l_wz = 0.0;
        assert!(q.validate().is_err());
    }

    #[test]
    fn total_inertia_adds_wheels() {
        let p = p();
        let j = p.inertia_total();
        assert!(j.m[0][0] > p.j.x && j.m[1][1] > p.j.y && j.m[2][2] > p.j.z);
        assert_eq!(j.m[0][1], 0.0);
    }

    proptest! {
        #[test]
        fn propeller_power_inverts_to_momentum_theory(t in 0.01..60.0f64) {
            let p = p();
            let lhs = propeller_power(t, &p) * p.fm * (2.0 * p.rho * p.a_prop).sqrt();
            prop_assert!((lhs - t.powf(1.5)).abs() <= 1e-9 * t.powf(1.5));
        }

        #[test]
        fn saturate_is_idempotent(
            t in prop::array::uniform2(-50.0..50.0f64),
            s in prop::array::uniform2(-3.0..3.0f64),
            w in prop::array::uniform2(-5.0..5.0f64),
        ) {
            let p = p();
            let c = ActuatorCommand { thrust: t, tilt: s, wheel_torque: w };
            let once = saturate(&c, &p);
            prop_assert_eq!(saturate(&once, &p), once);
        }
    }
}
