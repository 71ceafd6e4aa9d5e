use super::pid::PidState;
use super::AerialGains;
use crate::scalar::Real;
use crate::se3::{attitude_error, Mat3, Vec3};

/// Cascaded attitude controller: proportional on the rotation error, PID on
/// the body-rate error.
///
/// The outer loop drives `ω_d = K_R·e(R, R_d)`, i.e. toward the target; the
/// inner loop returns `τ` in mixer units (N for roll, rad for pitch and yaw).
pub fn aerial_attitude_control<S: Real>(
    r_d: &Mat3<S>,
    r: &Mat3<S>,
    omega: Vec3<S>,
    g: &AerialGains<S>,
    dt: S,
    tau_d: S,
    pid: &mut [PidState<S>; 3],
) -> Vec3<S> {
    let omega_d = g.kp_r.hadamard(attitude_error(r, r_d));
    let e = omega_d - omega;
    let mut tau = [S::zero(); 3];
    for (i, t) in tau.iter_mut().enumerate() {
        *t = pid[i].update(&g.rate[i], e[i], omega[i], dt, tau_d);
    }
    Vec3::from_array(tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::default_gains;
    use crate::se3::{euler_to_rotation, rot_z, EulerAngles};

    #[test]
    fn zero_error_zero_torque() {
        let g = default_gains::<f64>().aerial;
        let r = euler_to_rotation(EulerAngles::new(0.1, -0.2, 0.4));
        let mut pid = [PidState::default(); 3];
        let tau = aerial_attitude_control(&r, &r, Vec3::zero(), &g, 0.001, 0.02, &mut pid);
        assert_eq!(tau, Vec3::zero());
    }

    #[test]
    fn yaw_offset_first_call() {
        let g = default_gains::<f64>().aerial;
        let (eps, dt) = (0.1_f64, 0.001);
        let mut pid = [PidState::default(); 3];
        let tau = aerial_attitude_control(
            &rot_z(eps),
            &Mat3::identity(),
            Vec3::zero(),
            &g,
            dt,
            0.02,
            &mut pid,
        );
        let e = g.kp_r.z * eps.sin();
        let expected = g.rate[2].kp * e + g.rate[2].ki * e * dt;
        assert!((tau.z - expected).abs() < 1e-15);
        assert!(tau.x.abs() < 1e-15 && tau.y.abs() < 1e-15);
    }

    #[test]
    fn held_rate_error_ramps_at_ki() {
        let g = default_gains::<f64>().aerial;
        let dt = 0.001;
        let mut pid = [PidState::default(); 3];
        let r = Mat3::identity();
        let omega = Vec3::new(-1.0, 0.0, 0.0);
        let a = aerial_attitude_control(&r, &r, omega, &g, dt, 0.02, &mut pid);
        let b = aerial_attitude_control(&r, &r, omega, &g, dt, 0.02, &mut pid);
        assert!((b.x - a.x - g.rate[0].ki * dt).abs() < 1e-12);
    }
}
