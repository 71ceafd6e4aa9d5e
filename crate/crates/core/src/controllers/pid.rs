use serde::{Deserialize, Serialize};

use crate::scalar::{clamp, Real};

/// Gains of one PID loop. The integral accumulator is clamped to
/// `±i_limit` (in units of error·s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains<S> {
    pub kp: S,
    pub ki: S,
    pub kd: S,
    pub i_limit: S,
}

impl<S: Real> PidGains<S> {
    pub fn new(kp: S, ki: S, kd: S, i_limit: S) -> Self {
        Self {
            kp,
            ki,
            kd,
            i_limit,
        }
    }

    pub fn p(kp: S) -> Self {
        Self::new(kp, S::zero(), S::zero(), S::one())
    }
}

/// Running state of one PID loop.
///
/// The derivative acts on the measurement (so setpoint steps do not kick)
/// and passes through a first-order low-pass with time constant `tau_d`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState<S> {
    pub integral: S,
    pub prev_measurement: Option<S>,
    pub derivative: S,
}

impl<S: Real> PidState<S> {
    pub fn reset(&mut self) {
        *self = Self::default();
    }

    /// Advances the loop by `dt` and returns the control output.
    ///
    /// `measurement` is the quantity the error is taken against; its negated
    /// rate stands in for the error rate.
    pub fn update(&mut self, g: &PidGains<S>, error: S, measurement: S, dt: S, tau_d: S) -> S {
        self.integral = clamp(self.integral + error * dt, -g.i_limit, g.i_limit);
        let raw = match self.prev_measurement {
            Some(prev) => -(measurement - prev) / dt,
            None => S::zero(),
        };
        self.prev_measurement = Some(measurement);
        let alpha = dt / (tau_d + dt);
        self.derivative = self.derivative + alpha * (raw - self.derivative);
        g.kp * error + g.ki * self.integral + g.kd * self.derivative
    }
}
