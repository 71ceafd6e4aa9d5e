use crate::scalar::{clamp, Real};
use crate::vehicle::ActuatorCommand;

/// Blend factor between ground (0) and aerial (1) authority, linear in
/// throttle between `idle` and `hover`.
pub fn transition_scale<S: Real>(throttle: S, idle: S, hover: S) -> S {
    if throttle <= idle {
        S::zero()
    } else if throttle > hover {
        S::one()
    } else {
        clamp((throttle - idle) / (hover - idle), S::zero(), S::one())
    }
}

/// Scales servo tilts by `c` and wheel torques by `1 − c`. Thrusts come from
/// the aerial command unscaled. The endpoints return the inputs unchanged.
pub fn apply_transition<S: Real>(
    c: S,
    aerial: &ActuatorCommand<S>,
    ground: &ActuatorCommand<S>,
) -> ActuatorCommand<S> {
    if c <= S::zero() {
        return *ground;
    }
    if c >= S::one() {
        return *aerial;
    }
    let k = S::one() - c;
    ActuatorCommand {
        thrust: aerial.thrust,
        tilt: [c * aerial.tilt[0], c * aerial.tilt[1]],
        wheel_torque: [k * ground.wheel_torque[0], k * ground.wheel_torque[1]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const IDLE: f64 = 0.1;
    const HOVER: f64 = 0.68;

    #[test]
    fn endpoints_and_midpoint() {
        assert_eq!(transition_scale(IDLE, IDLE, HOVER), 0.0);
        assert_eq!(transition_scale(HOVER, IDLE, HOVER), 1.0);
        assert!((transition_scale(0.5 * (IDLE + HOVER), IDLE, HOVER) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn blend_arithmetic() {
        let a = ActuatorCommand {
            thrust: [7.0, 7.5],
            tilt: [0.2, -0.1],
            wheel_torque: [0.3, 0.3],
        };
        let g = ActuatorCommand {
            thrust: [7.0, 7.0],
            tilt: [0.0, 0.0],
            wheel_torque: [0.8, -0.2],
        };
        let b = apply_transition(0.5, &a, &g);
        assert_eq!(b.tilt, [0.1, -0.05]);
        assert_eq!(b.wheel_torque, [0.4, -0.1]);
        assert_eq!(b.thrust, a.thrust);
    }

    #[test]
    fn endpoints_are_exact_copies() {
        let a = ActuatorCommand {
            thrust: [1.0_f64, 2.0],
            tilt: [-0.0, 0.3],
            wheel_torque: [0.5, 0.5],
        };
        let g = ActuatorCommand {
            thrust: [3.0, 4.0],
            tilt: [0.0, 0.0],
            wheel_torque: [-0.0, 0.7],
        };
        assert_eq!(
            apply_transition(0.0, &a, &g).wheel_torque[0].to_bits(),
            (-0.0f64).to_bits()
        );
        assert_eq!(apply_transition(0.0, &a, &g), g);
        assert_eq!(apply_transition(1.0, &a, &g), a);
    }

    proptest! {
        #[test]
        fn monotone_and_bounded(u in -0.5..1.5f64, du in 0.0..0.5f64) {
            let c0 = transition_scale(u, IDLE, HOVER);
            let c1 = transition_scale(u + du, IDLE, HOVER);
            prop_assert!((0.0..=1.0).contains(&c0));
            prop_assert!(c1 >= c0);
        }

        #[test]
        fn continuous(u in 0.0..1.0f64) {
            let h = 1e-9;
            let d = transition_scale(u + h, IDLE, HOVER) - transition_scale(u, IDLE, HOVER);
            prop_assert!(d.abs() <= h / (HOVER - IDLE) + 1e-15);
        }
    }
}
