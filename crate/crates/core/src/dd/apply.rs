use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Aadd, Leaf, LeafKind, Node};
use crate::error::{Error, Result};

/// Terminal operation combined by [`apply_binary`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    And,
    Or,
    Xor,
}

impl BinaryOp {
    fn operand_kind(self) -> LeafKind {
        match self {
            BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul => LeafKind::Real,
            BinaryOp::And | BinaryOp::Or | BinaryOp::Xor => LeafKind::Bool,
        }
    }

    fn on_leaves(self, x: &Leaf, y: &Leaf) -> Leaf {
        match (self, x, y) {
            (BinaryOp::Add, Leaf::Real(a), Leaf::Real(b)) => Leaf::Real(a.add(b)),
            (BinaryOp::Sub, Leaf::Real(a), Leaf::Real(b)) => Leaf::Real(a.sub(b)),
            (BinaryOp::Mul, Leaf::Real(a), Leaf::Real(b)) => Leaf::Real(a.mul(b)),
            (BinaryOp::And, Leaf::Bool(a), Leaf::Bool(b)) => Leaf::Bool(*a && *b),
            (BinaryOp::Or, Leaf::Bool(a), Leaf::Bool(b)) => Leaf::Bool(*a || *b),
            (BinaryOp::Xor, Leaf::Bool(a), Leaf::Bool(b)) => Leaf::Bool(*a != *b),
            _ => unreachable!("leaf kinds are checked up front"),
        }
    }

    /// Result fixed by one Boolean operand alone, if any.
    fn short_circuit(self, x: &Aadd, y: &Aadd) -> Option<Aadd> {
        match (self, x.as_bool(), y.as_bool()) {
            (BinaryOp::And, Some(true), _) | (BinaryOp::Or, Some(false), _) => Some(y.clone()),
            (BinaryOp::And, _, Some(true)) | (BinaryOp::Or, _, Some(false)) => Some(x.clone()),
            (BinaryOp::And, Some(false), _) | (BinaryOp::Or, Some(true), _) => Some(x.clone()),
            (BinaryOp::And, _, Some(false)) | (BinaryOp::Or, _, Some(true)) => Some(y.clone()),
            _ => None,
        }
    }
}

/// Combines two diagrams terminal-by-terminal.
///
/// Two terminals combine directly. Otherwise the operand with the smaller
/// root index is split on it (an operand rooted deeper, or a terminal, is
/// passed unchanged to both sides) and the halves recurse. Pairs of shared
/// subgraphs are computed once.
pub fn apply_binary(op: BinaryOp, x: &Aadd, y: &Aadd) -> Result<Aadd> {
    let want = op.operand_kind();
    if x.kind() != want || y.kind() != want {
        return Err(Error::LeafKind(format!(
            "{op:?} needs {want} operands, got {} and {}",
            x.kind(),
            y.kind()
        )));
    }
    let mut memo = HashMap::new();
    apply_rec(op, x, y, &mut memo)
}

fn apply_rec(
    op: BinaryOp,
    x: &Aadd,
    y: &Aadd,
    memo: &mut HashMap<(usize, usize), Aadd>,
) -> Result<Aadd> {
    if let (Node::Leaf(a), Node::Leaf(b)) = (x.node(), y.node()) {
        return Ok(Aadd::leaf(op.on_leaves(a, b)));
    }
    if let Some(r) = op.short_circuit(x, y) {
        return Ok(r);
    }
    let key = (x.ptr(), y.ptr());
    if let Some(r) = memo.get(&key) {
        return Ok(r.clone());
    }
    let top = x.top_index().min(y.top_index());
    let (xh, xl) = x.cofactors(top);
    let (yh, yl) = y.cofactors(top);
    let hi = apply_rec(op, &xh, &yh, memo)?;
    let lo = apply_rec(op, &xl, &yl, memo)?;
    let r = Aadd::branch(top, hi, lo)?;
    memo.insert(key, r.clone());
    Ok(r)
}

/// `cond ? then : otherwise`, i.e. `cond·then ∨ ¬cond·otherwise`.
///
/// Where `cond` is a constant the matching branch is taken as is; where it
/// still branches, the three diagrams are split together on the smallest
/// root index, which keeps the result ordered.
pub fn ite(cond: &Aadd, then: &Aadd, otherwise: &Aadd) -> Result<Aadd> {
    if cond.kind() != LeafKind::Bool {
        return Err(Error::LeafKind(format!(
            "ite condition needs bool leaves, got {}",
            cond.kind()
        )));
    }
    if then.kind() != otherwise.kind() {
        return Err(Error::LeafKind(format!(
            "ite branches have {} and {} leaves",
            then.kind(),
            otherwise.kind()
        )));
    }
    let mut memo = HashMap::new();
    ite_rec(cond, then, otherwise, &mut memo)
}

fn ite_rec(
    c: &Aadd,
    t: &Aadd,
    e: &Aadd,
    memo: &mut HashMap<(usize, usize, usize), Aadd>,
) -> Result<Aadd> {
    match c.as_bool() {
        Some(true) => return Ok(t.clone()),
        Some(false) => return Ok(e.clone()),
        None => {}
    }
    if t.same_node(e) {
        return Ok(t.clone());
    }
    let key = (c.ptr(), t.ptr(), e.ptr());
    if let Some(r) = memo.get(&key) {
        return Ok(r.clone());
    }
    let top = c.top_index().min(t.top_index()).min(e.top_index());
    let (ch, cl) = c.cofactors(top);
    let (th, tl) = t.cofactors(top);
    let (eh, el) = e.cofactors(top);
    let hi = ite_rec(&ch, &th, &eh, memo)?;
    let lo = ite_rec(&cl, &tl, &el, memo)?;
    let r = Aadd::branch(top, hi, lo)?;
    memo.insert(key, r.clone());
    Ok(r)
}
