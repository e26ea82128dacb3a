use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::time::SimTime;
use crate::affine::Interval;
use crate::dd::{Condition, LeafKind, LeafRange};

/// Range of one signal at one tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: SimTime,
    pub hull: Interval,
    pub leaf_count: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub leaves: Vec<LeafRange>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalTrace {
    /// `process.port`.
    pub name: String,
    pub kind: LeafKind,
    pub events: Vec<TraceEvent>,
}

impl SignalTrace {
    /// Event at exactly `t`, if the signal has one.
    pub fn at(&self, t: SimTime) -> Option<&TraceEvent> {
        self.events
            .binary_search_by_key(&t, |e| e.time)
            .ok()
            .map(|i| &self.events[i])
    }
}

/// Per-signal ranges over a run. Boolean signals use 0 for `false` and 1
/// for `true`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub signals: Vec<SignalTrace>,
    /// Conditions referred to by leaf paths; empty for numeric runs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conditions: Vec<Condition>,
}

impl Trace {
    pub fn signal(&self, name: &str) -> Option<&SignalTrace> {
        self.signals.iter().find(|s| s.name == name)
    }

    /// Rows `time,signal,hull_lo,hull_hi,leaf_count`, ordered by time and
    /// then by signal declaration order.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<(SimTime, usize, &TraceEvent)> = self
            .signals
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.events.iter().map(move |e| (e.time, i, e)))
            .collect();
        rows.sort_by_key(|r| (r.0, r.1));
        let mut out = String::from("time,signal,hull_lo,hull_hi,leaf_count\n");
        for (t, i, e) in rows {
            let _ = writeln!(
                out,
                "{t},{},{},{},{}",
                self.signals[i].name, e.hull.lo, e.hull.hi, e.leaf_count
            );
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// Largest leaf count of any event.
    pub fn max_leaf_count(&self) -> usize {
        self.signals
            .iter()
            .flat_map(|s| s.events.iter().map(|e| e.leaf_count))
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(t: u64, lo: f64, hi: f64) -> TraceEvent {
        TraceEvent {
            time: SimTime::from_micros(t),
            hull: Interval::new(lo, hi),
            leaf_count: 1,
            leaves: Vec::new(),
        }
    }

    #[test]
    fn csv_rows_are_time_major() {
        let t = Trace {
            signals: vec![
                SignalTrace {
                    name: "a.y".into(),
                    kind: LeafKind::Real,
                    events: vec![ev(0, 1.0, 2.0), ev(100_000, 1.5, 2.5)],
                },
                SignalTrace {
                    name: "b.y".into(),
                    kind: LeafKind::Bool,
                    events: vec![ev(0, 0.0, 1.0)],
                },
            ],
            conditions: Vec::new(),
        };
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "time,signal,hull_lo,hull_hi,leaf_count");
        assert_eq!(lines[1], "0,a.y,1,2,1");
        assert_eq!(lines[2], "0,b.y,0,1,1");
        assert_eq!(lines[3], "0.1,a.y,1.5,2.5,1");
        assert_eq!(t.signal("a.y").unwrap().at(SimTime::from_micros(100_000)).unwrap().hull.lo, 1.5);
        let back: Trace = serde_json::from_str(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
    }
}
