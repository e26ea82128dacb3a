use super::{Aadd, Context, Leaf, LeafKind, Literal, Node};
use crate::affine::{AffineForm, Interval};
use crate::error::{Error, Result};
use crate::lp::{BoundsResult, Sense};
use crate::par;

/// Decides `v sense 0` for every `v` in `range`, or `None` when the range
/// allows both outcomes.
pub fn decide(sense: Sense, range: Interval) -> Option<bool> {
    let Interval { lo, hi } = range;
    match sense {
        Sense::Lt if hi < 0.0 => Some(true),
        Sense::Lt if lo >= 0.0 => Some(false),
        Sense::Le if hi <= 0.0 => Some(true),
        Sense::Le if lo > 0.0 => Some(false),
        Sense::Gt if lo > 0.0 => Some(true),
        Sense::Gt if hi <= 0.0 => Some(false),
        Sense::Ge if lo >= 0.0 => Some(true),
        Sense::Ge if hi < 0.0 => Some(false),
        Sense::Eq if lo == 0.0 && hi == 0.0 => Some(true),
        Sense::Eq if hi < 0.0 || lo > 0.0 => Some(false),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug)]
enum Outcome {
    Decided(bool),
    Uncertain,
    Unreachable,
}

impl Context {
    /// `x sense 0` as a Boolean diagram.
    ///
    /// Each terminal is decided from its range, tightened under the path to
    /// it; a terminal whose range still straddles 0 becomes a fresh
    /// comparison condition with `true`/`false` children. Terminals on
    /// infeasible paths become `false`.
    pub fn compare(&self, x: &Aadd, sense: Sense) -> Result<Aadd> {
        if x.kind() != LeafKind::Real {
            return Err(Error::LeafKind("compare needs real leaves".into()));
        }
        let leaves: Vec<(Vec<Literal>, &AffineForm)> = x
            .paths()
            .into_iter()
            .map(|(p, l)| match l {
                Leaf::Real(a) => (p, a),
                Leaf::Bool(_) => unreachable!(),
            })
            .collect();
        let outcomes = par::try_map(self.options().parallelism, &leaves, |(path, form)| {
            if let Some(b) = decide(sense, form.range()) {
                return Ok::<_, Error>(Outcome::Decided(b));
            }
            Ok(match self.tighten(form, path)? {
                BoundsResult::Infeasible => Outcome::Unreachable,
                BoundsResult::Feasible { interval, .. } => match decide(sense, interval) {
                    Some(b) => Outcome::Decided(b),
                    None => Outcome::Uncertain,
                },
            })
        })?;
        // conditions are allocated in depth-first order, so runs are repeatable
        let mut next = outcomes.into_iter().zip(leaves.iter().map(|(_, f)| *f));
        self.rebuild(x, sense, &mut next)
    }

    fn rebuild<'a>(
        &self,
        x: &Aadd,
        sense: Sense,
        next: &mut impl Iterator<Item = (Outcome, &'a AffineForm)>,
    ) -> Result<Aadd> {
        match x.node() {
            Node::Leaf(_) => {
                let (outcome, form) = next.next().expect("one outcome per leaf");
                Ok(match outcome {
                    Outcome::Decided(b) => Aadd::boolean(b),
                    Outcome::Unreachable => Aadd::boolean(false),
                    Outcome::Uncertain => {
                        let index = self.push_compare(form.clone(), sense);
                        Aadd::branch(index, Aadd::boolean(true), Aadd::boolean(false))?
                    }
                })
            }
            Node::Branch { index, hi, lo, .. } => {
                let h = self.rebuild(hi, sense, next)?;
                let l = self.rebuild(lo, sense, next)?;
                Aadd::branch(*index, h, l)
            }
        }
    }

    /// `x sense y`, compared as `x - y sense 0`.
    pub fn compare_with(&self, x: &Aadd, sense: Sense, y: &Aadd) -> Result<Aadd> {
        self.compare(&x.sub(y)?, sense)
    }
}
