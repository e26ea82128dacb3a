use serde::{Deserialize, Serialize};

use super::{Aadd, Context, Leaf, LeafKind, Literal};
use crate::affine::{AffineForm, Interval};
use crate::error::{Error, Result};
use crate::lp::BoundsResult;
use crate::par;

/// Tightened range of one feasible terminal and the path leading to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafRange {
    pub path: Vec<Literal>,
    pub interval: Interval,
}

impl Context {
    /// One entry per feasible root-to-terminal path. Boolean terminals are
    /// reported as the point interval 0 or 1.
    pub fn per_leaf_ranges(&self, x: &Aadd) -> Result<Vec<LeafRange>> {
        let paths = x.paths();
        let ranges = par::try_map(self.options().parallelism, &paths, |(path, leaf)| {
            let bool_form;
            let form = match leaf {
                Leaf::Real(form) => form,
                Leaf::Bool(b) => {
                    bool_form = AffineForm::constant(f64::from(u8::from(*b)));
                    &bool_form
                }
            };
            Ok::<_, Error>(match self.tighten(form, path)? {
                BoundsResult::Feasible { interval, .. } => Some(LeafRange {
                    path: path.clone(),
                    interval,
                }),
                BoundsResult::Infeasible => None,
            })
        })?;
        Ok(ranges.into_iter().flatten().collect())
    }

    /// Hull of all feasible terminal ranges.
    pub fn overall_range(&self, x: &Aadd) -> Result<Interval> {
        hull(&self.per_leaf_ranges(x)?)
    }

    /// Which Boolean values some feasible path reaches, as `(false, true)`.
    pub fn reachable_bools(&self, x: &Aadd) -> Result<(bool, bool)> {
        if x.kind() != LeafKind::Bool {
            return Err(Error::LeafKind("reachable_bools needs bool leaves".into()));
        }
        let mut found = [false, false];
        let paths = x.paths();
        for want in [false, true] {
            for (path, leaf) in &paths {
                if *leaf == &Leaf::Bool(want) && self.path_feasible(path)? {
                    found[usize::from(want)] = true;
                    break;
                }
            }
        }
        if !found[0] && !found[1] {
            return Err(Error::Inconsistent);
        }
        Ok((found[0], found[1]))
    }
}

pub(crate) fn hull(ranges: &[LeafRange]) -> Result<Interval> {
    ranges
        .iter()
        .map(|r| r.interval)
        .reduce(|a, b| a.hull(&b))
        .ok_or(Error::Inconsistent)
}
