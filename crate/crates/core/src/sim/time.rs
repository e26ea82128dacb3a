use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TICKS_PER_SECOND: u64 = 1_000_000;

/// A time tag, counted in microseconds so that schedules are exact.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn from_micros(us: u64) -> Self {
        SimTime(us)
    }

    /// Rejects negative, non-finite and sub-microsecond values.
    pub fn from_secs(s: f64) -> Result<Self> {
        let ticks = s * TICKS_PER_SECOND as f64;
        if !ticks.is_finite() || ticks < 0.0 || (ticks - ticks.round()).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "time {s} s is not a whole number of microseconds"
            )));
        }
        Ok(SimTime(ticks.round() as u64))
    }

    pub fn micros(self) -> u64 {
        self.0
    }

    pub fn secs(self) -> f64 {
        self.0 as f64 / TICKS_PER_SECOND as f64
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.secs())
    }
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}
