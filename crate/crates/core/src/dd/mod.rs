//! Affine arithmetic decision diagrams.
//!
//! An [`Aadd`] is an ordered binary decision diagram over *conditions*
//! (free Boolean uncertainties and undecidable comparisons of affine forms)
//! whose terminals are affine forms or Booleans. Internal node `v` denotes
//! `c(v)·f(hi(v)) ∨ ¬c(v)·f(lo(v))`; indices strictly increase towards the
//! terminals on every path.
//!
//! Arithmetic and Boolean operators are applied by the usual pairwise
//! descent ([`apply_binary`]). Comparisons ([`Context::compare`]) are decided
//! per terminal from its range, tightened by an LP over the conditions on the
//! path to it, and only become new conditions when that range straddles 0.
//!
//! Diagrams are immutable and cheap to clone. Conditions live in a shared
//! [`Context`], whose table only ever grows, so indices allocated later always
//! sort after everything already in a diagram.

mod apply;
mod compare;
mod context;
mod dump;
pub mod reduce;
mod range;


use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::affine::{AffineForm, ApproxMode, NoiseSymbolId, UnaryFn};
use crate::error::{Error, Result};

pub use apply::{apply_binary, ite, BinaryOp};
pub use compare::decide;
pub use context::{Condition, ConditionTable, Context, ContextOptions, ContextStats};
pub use dump::{DiagramDump, NodeRecord};
pub use range::LeafRange;
pub(crate) use range::hull as range_hull;

/// Position of a condition in the [`ConditionTable`].
pub type CondIndex = u32;

/// One edge choice on a root-to-terminal path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub index: CondIndex,
    pub polarity: bool,
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.polarity {
            write!(f, "c{}", self.index)
        } else {
            write!(f, "!c{}", self.index)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeafKind {
    Real,
    Bool,
}

impl fmt::Display for LeafKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeafKind::Real => f.write_str("real"),
            LeafKind::Bool => f.write_str("bool"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Leaf {
    Real(AffineForm),
    Bool(bool),
}

impl Leaf {
    pub fn kind(&self) -> LeafKind {
        match self {
            Leaf::Real(_) => LeafKind::Real,
            Leaf::Bool(_) => LeafKind::Bool,
        }
    }
}

impl fmt::Display for Leaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Leaf::Real(a) => write!(f, "{a}"),
            Leaf::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug)]
pub enum Node {
    Leaf(Leaf),
    Branch {
        index: CondIndex,
        /// Child taken when the condition holds.
        hi: Aadd,
        lo: Aadd,
        kind: LeafKind,
    },
}

/// A shared handle to a diagram node.
#[derive(Clone, Debug)]
pub struct Aadd(Arc<Node>);

impl Aadd {
    pub fn leaf(leaf: Leaf) -> Self {
        Aadd(Arc::new(Node::Leaf(leaf)))
    }

    pub fn real(form: AffineForm) -> Self {
        Self::leaf(Leaf::Real(form))
    }

    pub fn constant(value: f64) -> Self {
        Self::real(AffineForm::constant(value))
    }

    pub fn boolean(value: bool) -> Self {
        Self::leaf(Leaf::Bool(value))
    }

    /// Terminal `center + radius·ε` over a fresh noise symbol.
    pub fn uncertain(center: f64, radius: f64) -> Result<Self> {
        AffineForm::new_uncertain(center, radius).map(Self::real)
    }

    /// Internal node; collapses to `hi` when both children are the same.
    pub fn branch(index: CondIndex, hi: Aadd, lo: Aadd) -> Result<Self> {
        if hi.same_node(&lo) || hi.same_leaf_value(&lo) {
            return Ok(hi);
        }
        let kind = hi.kind();
        if lo.kind() != kind {
            return Err(Error::LeafKind(format!(
                "branch children have {} and {} leaves",
                kind,
                lo.kind()
            )));
        }
        debug_assert!(index < hi.top_index() && index < lo.top_index());
        Ok(Aadd(Arc::new(Node::Branch { index, hi, lo, kind })))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn kind(&self) -> LeafKind {
        match &*self.0 {
            Node::Leaf(l) => l.kind(),
            Node::Branch { kind, .. } => *kind,
        }
    }

    pub fn as_leaf(&self) -> Option<&Leaf> {
        match &*self.0 {
            Node::Leaf(l) => Some(l),
            Node::Branch { .. } => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self.as_leaf() {
            Some(Leaf::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<&AffineForm> {
        match self.as_leaf() {
            Some(Leaf::Real(a)) => Some(a),
            _ => None,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.as_leaf().is_some()
    }

    /// Index of the root condition; `CondIndex::MAX` for terminals.
    pub fn top_index(&self) -> CondIndex {
        match &*self.0 {
            Node::Leaf(_) => CondIndex::MAX,
            Node::Branch { index, .. } => *index,
        }
    }

    /// Children for a split on `index`; a diagram not rooted at `index` does
    /// not depend on it.
    pub(crate) fn cofactors(&self, index: CondIndex) -> (Aadd, Aadd) {
        match &*self.0 {
            Node::Branch {
                index: i, hi, lo, ..
            } if *i == index => (hi.clone(), lo.clone()),
            _ => (self.clone(), self.clone()),
        }
    }

    pub fn same_node(&self, other: &Aadd) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    fn same_leaf_value(&self, other: &Aadd) -> bool {
        match (self.as_leaf(), other.as_leaf()) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    pub(crate) fn ptr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    fn expect_kind(&self, kind: LeafKind, what: &str) -> Result<()> {
        if self.kind() == kind {
            Ok(())
        } else {
            Err(Error::LeafKind(format!(
                "{what} needs {kind} leaves, got {}",
                self.kind()
            )))
        }
    }

    pub fn add(&self, other: &Aadd) -> Result<Aadd> {
        apply_binary(BinaryOp::Add, self, other)
    }

    pub fn sub(&self, other: &Aadd) -> Result<Aadd> {
        apply_binary(BinaryOp::Sub, self, other)
    }

    pub fn mul(&self, other: &Aadd) -> Result<Aadd> {
        apply_binary(BinaryOp::Mul, self, other)
    }

    pub fn and(&self, other: &Aadd) -> Result<Aadd> {
        apply_binary(BinaryOp::And, self, other)
    }

    pub fn or(&self, other: &Aadd) -> Result<Aadd> {
        apply_binary(BinaryOp::Or, self, other)
    }

    pub fn xor(&self, other: &Aadd) -> Result<Aadd> {
        apply_binary(BinaryOp::Xor, self, other)
    }

    pub fn not(&self) -> Result<Aadd> {
        self.expect_kind(LeafKind::Bool, "not")?;
        self.map_leaves(&|l| match l {
            Leaf::Bool(b) => Ok(Leaf::Bool(!b)),
            Leaf::Real(_) => unreachable!(),
        })
    }

    pub fn scale(&self, c: f64) -> Result<Aadd> {
        self.map_real("scale", |a| Ok(a.scale(c)))
    }

    pub fn add_const(&self, c: f64) -> Result<Aadd> {
        self.map_real("add_const", |a| Ok(a.add_const(c)))
    }

    pub fn neg(&self) -> Result<Aadd> {
        self.scale(-1.0)
    }

    pub fn approx_unary(&self, f: UnaryFn, mode: ApproxMode) -> Result<Aadd> {
        self.map_real("approx_unary", |a| a.approx_unary(f, mode))
    }

    fn map_real(
        &self,
        what: &str,
        f: impl Fn(&AffineForm) -> Result<AffineForm>,
    ) -> Result<Aadd> {
        self.expect_kind(LeafKind::Real, what)?;
        self.map_leaves(&|l| match l {
            Leaf::Real(a) => f(a).map(Leaf::Real),
            Leaf::Bool(_) => unreachable!(),
        })
    }

    /// Applies `f` to every terminal, keeping the branching structure.
    pub fn map_leaves(&self, f: &dyn Fn(&Leaf) -> Result<Leaf>) -> Result<Aadd> {
        let mut memo = HashMap::new();
        self.map_leaves_memo(f, &mut memo)
    }

    fn map_leaves_memo(
        &self,
        f: &dyn Fn(&Leaf) -> Result<Leaf>,
        memo: &mut HashMap<usize, Aadd>,
    ) -> Result<Aadd> {
        if let Some(done) = memo.get(&self.ptr()) {
            return Ok(done.clone());
        }
        let out = match &*self.0 {
            Node::Leaf(l) => Aadd::leaf(f(l)?),
            Node::Branch { index, hi, lo, .. } => Aadd::branch(
                *index,
                hi.map_leaves_memo(f, memo)?,
                lo.map_leaves_memo(f, memo)?,
            )?,
        };
        memo.insert(self.ptr(), out.clone());
        Ok(out)
    }

    /// Distinct terminal vertices.
    pub fn leaf_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut leaves = 0;
        self.visit(&mut seen, &mut |n| {
            if matches!(n.node(), Node::Leaf(_)) {
                leaves += 1;
            }
        });
        leaves
    }

    /// Distinct vertices, internal and terminal.
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut n = 0;
        self.visit(&mut seen, &mut |_| n += 1);
        n
    }

    /// Root-to-terminal paths (terminals reached along several paths count
    /// once per path).
    pub fn path_count(&self) -> u64 {
        fn go(x: &Aadd, memo: &mut HashMap<usize, u64>) -> u64 {
            if let Some(&n) = memo.get(&x.ptr()) {
                return n;
            }
            let n = match x.node() {
                Node::Leaf(_) => 1,
                Node::Branch { hi, lo, .. } => go(hi, memo).saturating_add(go(lo, memo)),
            };
            memo.insert(x.ptr(), n);
            n
        }
        go(self, &mut HashMap::new())
    }

    fn visit(&self, seen: &mut std::collections::HashSet<usize>, f: &mut dyn FnMut(&Aadd)) {
        if !seen.insert(self.ptr()) {
            return;
        }
        f(self);
        if let Node::Branch { hi, lo, .. } = &*self.0 {
            hi.visit(seen, f);
            lo.visit(seen, f);
        }
    }

    /// Every terminal with the literals on the path to it, depth-first with
    /// the `hi` edge first.
    pub fn paths(&self) -> Vec<(Vec<Literal>, &Leaf)> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_paths(&mut path, &mut out);
        out
    }

    fn collect_paths<'a>(&'a self, path: &mut Vec<Literal>, out: &mut Vec<(Vec<Literal>, &'a Leaf)>) {
        match &*self.0 {
            Node::Leaf(l) => out.push((path.clone(), l)),
            Node::Branch { index, hi, lo, .. } => {
                path.push(Literal {
                    index: *index,
                    polarity: true,
                });
                hi.collect_paths(path, out);
                path.last_mut().unwrap().polarity = false;
                lo.collect_paths(path, out);
                path.pop();
            }
        }
    }

    /// Checks that indices strictly increase along every edge and that all
    /// terminals share one kind.
    pub fn check_invariants(&self) -> Result<()> {
        let kind = self.kind();
        let mut seen = std::collections::HashSet::new();
        let mut problem: Option<String> = None;
        self.visit(&mut seen, &mut |n| {
            if problem.is_some() {
                return;
            }
            match n.node() {
                Node::Leaf(l) if l.kind() != kind => {
                    problem = Some(format!("mixed leaf kinds {} and {kind}", l.kind()));
                }
                Node::Branch { index, hi, lo, .. }
                    if (*index >= hi.top_index() || *index >= lo.top_index()) => {
                        problem = Some(format!("order violated below c{index}"));
                    }
                _ => {}
            }
        });
        match problem {
            None => Ok(()),
            Some(p) => Err(Error::LeafKind(p)),
        }
    }
}

impl From<AffineForm> for Aadd {
    fn from(a: AffineForm) -> Self {
        Aadd::real(a)
    }
}

/// Concrete values for the noise symbols and free Boolean conditions.
#[derive(Clone, Debug, Default)]
pub struct Assignment {
    noise: HashMap<NoiseSymbolId, f64>,
    bools: HashMap<CondIndex, bool>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_noise(&mut self, id: NoiseSymbolId, value: f64) -> &mut Self {
        self.noise.insert(id, value);
        self
    }

    pub fn set_bool(&mut self, index: CondIndex, value: bool) -> &mut Self {
        self.bools.insert(index, value);
        self
    }

    pub fn noise(&self, id: NoiseSymbolId) -> Option<f64> {
        self.noise.get(&id).copied()
    }

    pub fn boolean(&self, index: CondIndex) -> Option<bool> {
        self.bools.get(&index).copied()
    }
}

/// Result of evaluating a diagram under an [`Assignment`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Concrete {
    Real(f64),
    Bool(bool),
}

impl Concrete {
    pub fn as_real(self) -> Option<f64> {
        match self {
            Concrete::Real(v) => Some(v),
            Concrete::Bool(_) => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Concrete::Bool(b) => Some(b),
            Concrete::Real(_) => None,
        }
    }
}

#[cfg(test)]
mod tests;
