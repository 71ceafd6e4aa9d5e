//! Re-runs a log's commands through the dynamics alone.

use hagv_core::dynamics::{apply_pitch_impulse, contact_transition, step};
use hagv_core::VehicleParams;

use crate::telemetry::Record;

/// Index of the first record the dynamics do not reproduce bit-exactly,
/// or `None` when the whole log is self-consistent.
pub fn first_mismatch(records: &[Record], p: &VehicleParams, dt: f64) -> Option<usize> {
    for (k, w) in records.windows(2).enumerate() {
        let (prev, cur) = (&w[0], &w[1]);
        let start = if cur.impulse != 0.0 {
            apply_pitch_impulse(&prev.state, cur.impulse, p)
        } else {
            prev.state
        };
        let next = match step(&start, &cur.cmd, dt, p) {
            Ok(s) => contact_transition(&s, p),
            Err(_) => return Some(k + 1),
        };
        let same = next.body == cur.state.body
            && next.energy_used.to_bits() == cur.state.energy_used.to_bits()
            && next.t.to_bits() == cur.state.t.to_bits();
        if !same {
            return Some(k + 1);
        }
    }
    None
}
