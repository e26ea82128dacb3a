use std::collections::HashMap;

use super::{Aadd, Condition, Context, CondIndex, Leaf, Literal, Node};
use crate::affine::NoiseSymbolId;
use crate::error::Result;

/// Terminal forms closer than this (component-wise) are merged.
pub const LEAF_MERGE_TOL: f64 = 1e-9;

impl Context {
    /// Drops branches whose path is infeasible, then shares equal terminals
    /// and isomorphic subgraphs and removes tests whose children coincide.
    ///
    /// The result denotes the same function on every feasible assignment.
    /// It is not canonical: distinct conditions are never identified.
    pub fn reduce(&self, x: &Aadd) -> Result<Aadd> {
        let pruned = if self.options().refine {
            let mut path = Vec::new();
            self.prune(x, &mut path)?
        } else {
            x.clone()
        };
        Ok(reduce_structural(&pruned))
    }

    fn prune(&self, x: &Aadd, path: &mut Vec<Literal>) -> Result<Aadd> {
        let Node::Branch { index, hi, lo, .. } = x.node() else {
            return Ok(x.clone());
        };
        let is_compare = matches!(
            self.conditions().get(*index),
            Some(Condition::Compare { .. })
        );
        let mut side = |polarity: bool, child: &Aadd, this: &Self| -> Result<Option<Aadd>> {
            path.push(Literal {
                index: *index,
                polarity,
            });
            let r = if !is_compare || this.path_feasible(path)? {
                Some(this.prune(child, path)?)
            } else {
                None
            };
            path.pop();
            Ok(r)
        };
        let h = side(true, hi, self)?;
        let l = side(false, lo, self)?;
        match (h, l) {
            (Some(h), Some(l)) => Aadd::branch(*index, h, l),
            (Some(only), None) | (None, Some(only)) => Ok(only),
            // unreachable prefix; leave as is
            (None, None) => Ok(x.clone()),
        }
    }
}

/// Structural reduction only: merges terminals equal within
/// [`LEAF_MERGE_TOL`] and isomorphic internal nodes, and removes redundant
/// tests. No feasibility reasoning.
pub fn reduce_structural(x: &Aadd) -> Aadd {
    let mut r = Reducer::default();
    r.canon(x)
}

#[derive(Default)]
struct Reducer {
    done: HashMap<usize, Aadd>,
    bools: [Option<Aadd>; 2],
    reals: HashMap<Vec<NoiseSymbolId>, Vec<Aadd>>,
    unique: HashMap<(CondIndex, usize, usize), Aadd>,
}

impl Reducer {
    fn canon(&mut self, x: &Aadd) -> Aadd {
        if let Some(d) = self.done.get(&x.ptr()) {
            return d.clone();
        }
        let out = match x.node() {
            Node::Leaf(Leaf::Bool(b)) => self.bools[usize::from(*b)]
                .get_or_insert_with(|| x.clone())
                .clone(),
            Node::Leaf(Leaf::Real(form)) => {
                let bucket = self.reals.entry(form.symbols().collect()).or_default();
                match bucket.iter().find(|c| {
                    c.as_real()
                        .is_some_and(|f| f.approx_eq(form, LEAF_MERGE_TOL))
                }) {
                    Some(c) => c.clone(),
                    None => {
                        bucket.push(x.clone());
                        x.clone()
                    }
                }
            }
            Node::Branch { index, hi, lo, .. } => {
                let h = self.canon(hi);
                let l = self.canon(lo);
                if h.same_node(&l) {
                    h
                } else {
                    let key = (*index, h.ptr(), l.ptr());
                    match self.unique.get(&key) {
                        Some(n) => n.clone(),
                        None => {
                            let n = Aadd::branch(*index, h, l).expect("kinds already agree");
                            self.unique.insert(key, n.clone());
                            n
                        }
                    }
                }
            }
        };
        self.done.insert(x.ptr(), out.clone());
        out
    }
}
