//! Independent Lagrangian derivation of the ground-mode accelerations.
//!
//! Generalized coordinates are the axle position along the heading `x_a`, the
//! pitch `θ` and the yaw `γ`. With wheels rolling without slip
//! (`δᵢ = (x_a ∓ l_wy·γ)/r`) the kinetic energy is
//!
//! ```text
//! T = ½·M₁₁·ẋ_a² + M₁₂·ẋ_a·θ̇ + ½·M₂₂·θ̇² + ½·I_γ·γ̇²
//! M₁₁ = m + 2m_w + 2J_wy/r²
//! M₁₂ = m·l_wz·cos θ
//! M₂₂ = m·l_wz² + J_y
//! I_γ = J_z + 2J_wz + 2m_w·l_wy² + 2J_wy·l_wy²/r²
//! ```
//!
//! and the potential is `−m·(g_a·X + g_n·Z) − 2m_w·g_a·x_a` with the chassis
//! CG at `X = x_a + l_wz·sin θ`, `Z = r + l_wz·cos θ`. Euler–Lagrange gives
//!
//! ```text
//! M₁₁·ẍ_a + M₁₂·θ̈ = m·l_wz·sin θ·θ̇² + (m + 2m_w)·g_a + Q_x
//! M₁₂·ẍ_a + M₂₂·θ̈ = m·l_wz·(g_a·cos θ − g_n·sin θ) + Q_θ
//! I_γ·γ̈ = Q_γ
//! ```
//!
//! where the generalized forces come from virtual work of the wheel torques
//! (acting between wheel and chassis) and of the thrusts at the propeller hubs.

use super::ground::{GroundRates, GroundState};
use crate::scalar::Real;
use crate::vehicle::{ActuatorCommand, VehicleParams};

pub fn lagrangian_oracle<S: Real>(
    s: &GroundState<S>,
    cmd: &ActuatorCommand<S>,
    p: &VehicleParams<S>,
) -> GroundRates<S> {
    let two = S::lit(2.0);
    let (sth, cth) = s.pitch.sin_cos();
    let (sy, cy) = s.yaw.sin_cos();
    let th_dot = s.pitch_rate;

    let grav = p.gravity();
    let g_a = grav.x * cy + grav.y * sy;
    let g_n = grav.z;

    let wheel_spin = two * p.j_w.y / (p.r * p.r);
    let m11 = p.m + two * p.m_w + wheel_spin;
    let m12 = p.m * p.l_wz * cth;
    let m22 = p.m * p.l_wz * p.l_wz + p.j.y;
    let i_yaw =
        p.j.z + two * p.j_w.z + two * p.m_w * p.l_wy * p.l_wy + wheel_spin * p.l_wy * p.l_wy;

    // Wheel torques: virtual work τᵢ·(δδᵢ − δθ).
    let tau = s.delivered_torques(cmd, p);
    let tau_sum = tau[0] + tau[1];
    let mut q_x = tau_sum / p.r;
    let mut q_th = -tau_sum;
    let mut q_yaw = p.l_wy * (tau[1] - tau[0]) / p.r;

    // Thrusts act at hub i, located at arm (l_wz + l_z) above the axle and
    // lateral offset ±l_y. Hub position partials:
    //   ∂P/∂x_a = (1, 0), ∂P/∂θ = (arm·cos θ, −arm·sin θ), ∂P_heading/∂γ = ∓l_y.
    let arm = p.l_wz + p.l_z;
    for i in 0..2 {
        let lateral = if i == 0 { p.l_y } else { -p.l_y };
        let dir = s.pitch + cmd.tilt[i];
        let (fx, fz) = (cmd.thrust[i] * dir.sin(), cmd.thrust[i] * dir.cos());
        q_x = q_x + fx;
        q_th = q_th + fx * arm * cth - fz * arm * sth;
        q_yaw = q_yaw - fx * lateral;
    }

    let rhs_x = p.m * p.l_wz * sth * th_dot * th_dot + (p.m + two * p.m_w) * g_a + q_x;
    let rhs_th = p.m * p.l_wz * (g_a * cth - g_n * sth) + q_th;

    let det = m11 * m22 - m12 * m12;
    let xa_ddot = (rhs_x * m22 - m12 * rhs_th) / det;
    let th_ddot = (m11 * rhs_th - m12 * rhs_x) / det;
    let x_ddot = xa_ddot + p.l_wz * (cth * th_ddot - sth * th_dot * th_dot);

    let axle = s.x_dot - p.l_wz * cth * th_dot;
    GroundRates {
        x_dot: s.x_dot,
        x_ddot,
        pitch_rate: th_dot,
        pitch_accel: th_ddot,
        yaw_rate: s.yaw_rate,
        yaw_accel: q_yaw / i_yaw,
        wheel_rate: [
            (axle - p.l_wy * s.yaw_rate) / p.r,
            (axle + p.l_wy * s.yaw_rate) / p.r,
        ],
        north_dot: s.x_dot * cy,
        east_dot: s.x_dot * sy,
    }
}

/// Unstable pole of the upright, unactuated balance bot linearized at θ = 0:
/// `√(m·g·l_wz / J_eff)` with `J_eff = M₂₂ − M₁₂²/M₁₁`.
pub fn upright_pole<S: Real>(p: &VehicleParams<S>) -> S {
    let two = S::lit(2.0);
    let m11 = p.m + two * p.m_w + two * p.j_w.y / (p.r * p.r);
    let m12 = p.m * p.l_wz;
    let m22 = p.m * p.l_wz * p.l_wz + p.j.y;
    let j_eff = m22 - m12 * m12 / m11;
    (p.m * p.g * p.l_wz / j_eff).sqrt()
}
