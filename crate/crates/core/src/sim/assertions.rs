use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::time::SimTime;
use super::trace::{TraceEvent, Trace};
use crate::affine::Interval;
use crate::dd::Literal;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    /// A violation makes the run fail.
    #[default]
    Safety,
    /// Reported only.
    Spec,
}

/// `lo <= signal <= hi` at every traced tag. A missing bound is unchecked.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub signal: String,
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
    #[serde(default)]
    pub severity: Severity,
}

impl Assertion {
    pub fn new(signal: &str, lo: Option<f64>, hi: Option<f64>, severity: Severity) -> Self {
        Assertion {
            signal: signal.to_string(),
            lo,
            hi,
            severity,
        }
    }

    pub fn bounds(&self) -> Interval {
        Interval::new(
            self.lo.unwrap_or(f64::NEG_INFINITY),
            self.hi.unwrap_or(f64::INFINITY),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Status {
    Pass,
    ViolatedPossibly,
    Violated,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::ViolatedPossibly => "VIOLATED-POSSIBLY",
            Status::Violated => "VIOLATED",
        })
    }
}

/// First tag at which the worst status was reached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub time: SimTime,
    pub hull: Interval,
    /// Path to an offending leaf, when leaf ranges were recorded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<Literal>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaf_range: Option<Interval>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssertionResult {
    pub assertion: Assertion,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub results: Vec<AssertionResult>,
}

impl Report {
    /// No safety assertion is violated, possibly or certainly.
    pub fn safety_ok(&self) -> bool {
        self.results
            .iter()
            .all(|r| r.assertion.severity != Severity::Safety || r.status == Status::Pass)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let a = &r.assertion;
            let sev = match a.severity {
                Severity::Safety => "safety",
                Severity::Spec => "spec",
            };
            let _ = write!(out, "{} in {} [{sev}]: {}", a.signal, a.bounds(), r.status);
            if let Some(w) = &r.witness {
                let _ = write!(out, " at t={} hull {}", w.time, w.hull);
                if let Some(path) = &w.path {
                    let lits: Vec<String> = path.iter().map(|l| l.to_string()).collect();
                    let _ = write!(out, " path [{}]", lits.join(" "));
                }
                if let Some(range) = &w.leaf_range {
                    let _ = write!(out, " leaf {range}");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

fn disjoint(x: &Interval, b: &Interval) -> bool {
    x.hi < b.lo || x.lo > b.hi
}

fn classify(e: &TraceEvent, b: &Interval) -> (Status, Option<Witness>) {
    if e.hull.is_subset_of(b) {
        return (Status::Pass, None);
    }
    let certain = if e.leaves.is_empty() {
        disjoint(&e.hull, b)
    } else {
        e.leaves.iter().all(|l| disjoint(&l.interval, b))
    };
    let offending = e.leaves.iter().find(|l| !l.interval.is_subset_of(b));
    let witness = Witness {
        time: e.time,
        hull: e.hull,
        path: offending.map(|l| l.path.clone()),
        leaf_range: offending.map(|l| l.interval),
    };
    let status = if certain {
        Status::Violated
    } else {
        Status::ViolatedPossibly
    };
    (status, Some(witness))
}

/// Checks each assertion against every event of its signal.
pub fn check_assertions(trace: &Trace, assertions: &[Assertion]) -> Result<Report> {
    let mut results = Vec::with_capacity(assertions.len());
    for a in assertions {
        let signal = trace
            .signal(&a.signal)
            .ok_or_else(|| Error::UnknownSignal(a.signal.clone()))?;
        let bounds = a.bounds();
        let mut status = Status::Pass;
        let mut witness = None;
        for e in &signal.events {
            let (s, w) = classify(e, &bounds);
            if s > status {
                status = s;
                witness = w;
            }
        }
        results.push(AssertionResult {
            assertion: a.clone(),
            status,
            witness,
        });
    }
    Ok(Report { results })
}
