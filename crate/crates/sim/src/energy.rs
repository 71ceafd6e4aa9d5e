//! Per-mode energy accounting over a telemetry log.

use std::fmt;

use hagv_core::controllers::ActiveMode;

use crate::telemetry::Record;

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub mode: ActiveMode,
    pub start: f64,
    pub end: f64,
    pub energy: f64,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn mean_power(&self) -> f64 {
        self.energy / self.duration()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub segments: Vec<Segment>,
    /// Cumulative energy at the end of the log, J.
    pub total: f64,
}

impl EnergyReport {
    /// Segments of one mode, in order.
    pub fn of_mode(&self, mode: ActiveMode) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(move |s| s.mode == mode)
    }

    /// Mean power over all segments of `mode`, W.
    pub fn mean_power(&self, mode: ActiveMode) -> Option<f64> {
        let (e, d) = self
            .of_mode(mode)
            .fold((0.0, 0.0), |(e, d), s| (e + s.energy, d + s.duration()));
        (d > 0.0).then(|| e / d)
    }

    pub fn segment_sum(&self) -> f64 {
        self.segments.iter().map(|s| s.energy).sum()
    }
}

/// Splits the log where the controller mode changes. Record `k` covers the
/// step from `t[k-1]` to `t[k]`, so the initial record only anchors time and
/// energy. Segment energies are differences of the cumulative counter, so
/// they telescope to the total.
pub fn energy_report(records: &[Record]) -> EnergyReport {
    let mut segments: Vec<Segment> = Vec::new();
    let mut e0 = 0.0;
    for w in records.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        match segments.last_mut() {
            Some(s) if s.mode == cur.mode => {
                s.end = cur.t;
                s.energy = cur.state.energy_used - e0;
            }
            _ => {
                e0 = prev.state.energy_used;
                segments.push(Segment {
                    mode: cur.mode,
                    start: prev.t,
                    end: cur.t,
                    energy: cur.state.energy_used - e0,
                });
            }
        }
    }
    let total = records.last().map_or(0.0, |r| r.state.energy_used);
    EnergyReport { segments, total }
}

impl fmt::Display for EnergyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:>9} {:>9} {:>11} {:>11}",
            "mode", "start s", "dur s", "mean W", "energy J"
        )?;
        for s in &self.segments {
            writeln!(
                f,
                "{:<10} {:>9.3} {:>9.3} {:>11.2} {:>11.2}",
                s.mode.as_str(),
                s.start,
                s.duration(),
                s.mean_power(),
                s.energy
            )?;
        }
        write!(
            f,
            "{:<10} {:>9} {:>9} {:>11} {:>11.2}",
            "total", "", "", "", self.total
        )
    }
}
