//! Concrete runs used to cross-check symbolic traces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::domain::{Corner, Uncertainties};
use super::time::SimTime;
use super::trace::Trace;
use crate::affine::Interval;
use crate::error::Result;
use crate::par::{self, Parallelism};

/// Every combination of `eps = ±1` and fault values.
pub fn corners(u: &Uncertainties) -> Vec<Corner> {
    let n = u.reals.len();
    let m = u.faults.len();
    (0u64..1 << (n + m))
        .map(|bits| Corner {
            eps: (0..n)
                .map(|i| if bits >> i & 1 == 1 { 1.0 } else { -1.0 })
                .collect(),
            faults: (0..m).map(|j| bits >> (n + j) & 1 == 1).collect(),
        })
        .collect()
}

/// `count` uniform assignments, reproducible from `seed`.
pub fn random_samples(u: &Uncertainties, count: usize, seed: u64) -> Vec<Corner> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Corner {
            eps: (0..u.reals.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
            faults: (0..u.faults.len()).map(|_| rng.gen_bool(0.5)).collect(),
        })
        .collect()
}

/// Runs `run` once per assignment.
pub fn run_all<F>(mode: Parallelism, points: &[Corner], run: F) -> Result<Vec<Trace>>
where
    F: Fn(&Corner) -> Result<Trace> + Sync + Send,
{
    par::try_map(mode, points, run)
}

/// A concrete value outside the symbolic hull at the same tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Miss {
    pub signal: String,
    pub time: SimTime,
    pub value: f64,
    /// `None` when the symbolic trace has no event there.
    pub hull: Option<Interval>,
}

/// Concrete events of `concrete` that fall outside `symbolic` by more than
/// `slack`. Signals or tags missing from the symbolic trace count as misses.
pub fn containment_misses(symbolic: &Trace, concrete: &Trace, slack: f64) -> Vec<Miss> {
    let mut out = Vec::new();
    for c in &concrete.signals {
        let s = symbolic.signal(&c.name);
        for e in &c.events {
            let value = e.hull.lo;
            let hull = s.and_then(|s| s.at(e.time)).map(|ev| ev.hull);
            if !hull.is_some_and(|h| h.contains_with(value, slack)) {
                out.push(Miss {
                    signal: c.name.clone(),
                    time: e.time,
                    value,
                    hull,
                });
            }
        }
    }
    out
}
