use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::{Aadd, Assignment, CondIndex, Concrete, Leaf, Literal, Node};
use crate::affine::AffineForm;
use crate::error::{Error, Result};
use crate::lp::{BoundsResult, LinearConstraint, LpInstance, Sense};
use crate::par::Parallelism;

/// A general discrete uncertainty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Condition {
    /// A basic discrete uncertainty, e.g. a possible fault.
    FreeBool { name: String },
    /// `form sense 0`, created when the comparison could not be decided.
    Compare { form: AffineForm, sense: Sense },
}

/// Append-only list of conditions; the position is the diagram order.
#[derive(Debug, Default)]
pub struct ConditionTable {
    entries: RwLock<Vec<Condition>>,
}

impl ConditionTable {
    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, index: CondIndex) -> Option<Condition> {
        self.entries.read().unwrap().get(index as usize).cloned()
    }

    fn push(&self, c: Condition) -> CondIndex {
        let mut entries = self.entries.write().unwrap();
        entries.push(c);
        CondIndex::try_from(entries.len() - 1).expect("condition table overflow")
    }

    /// LP constraints for the comparison literals of `path`; free Booleans
    /// only partition paths and contribute nothing.
    pub fn constraints(&self, path: &[Literal]) -> Result<Vec<LinearConstraint>> {
        let entries = self.entries.read().unwrap();
        let mut out = Vec::new();
        for lit in path {
            match entries.get(lit.index as usize) {
                Some(Condition::Compare { form, sense }) => {
                    out.push(LinearConstraint::new(form.clone(), *sense, lit.polarity));
                }
                Some(Condition::FreeBool { .. }) => {}
                None => return Err(Error::MissingSymbol(format!("condition c{}", lit.index))),
            }
        }
        Ok(out)
    }

    pub fn snapshot(&self) -> Vec<Condition> {
        self.entries.read().unwrap().clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextOptions {
    /// Tighten terminal ranges with the path LP. Without it the plain affine
    /// range is used and infeasible paths go unnoticed.
    pub refine: bool,
    pub parallelism: Parallelism,
}

impl Default for ContextOptions {
    fn default() -> Self {
        ContextOptions {
            refine: true,
            parallelism: Parallelism::default(),
        }
    }
}

#[derive(Debug, Default)]
pub struct ContextStats {
    lp_calls: AtomicU64,
    lp_fallbacks: AtomicU64,
}

impl ContextStats {
    pub fn lp_calls(&self) -> u64 {
        self.lp_calls.load(Ordering::Relaxed)
    }

    /// LP solves that failed numerically and fell back to the plain range.
    pub fn lp_fallbacks(&self) -> u64 {
        self.lp_fallbacks.load(Ordering::Relaxed)
    }
}

/// Condition table plus the settings every diagram operation shares.
#[derive(Default)]
pub struct Context {
    table: ConditionTable,
    options: ContextOptions,
    stats: ContextStats,
    lp_log: Mutex<Option<Box<dyn Write + Send>>>,
}

impl std::fmt::Debug for Context {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Context")
            .field("conditions", &self.table.len())
            .field("options", &self.options)
            .field("stats", &self.stats)
            .finish()
    }
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_options(options: ContextOptions) -> Self {
        Context {
            options,
            ..Self::default()
        }
    }

    pub fn options(&self) -> ContextOptions {
        self.options
    }

    pub fn stats(&self) -> &ContextStats {
        &self.stats
    }

    pub fn conditions(&self) -> &ConditionTable {
        &self.table
    }

    /// Writes every LP instance solved from now on to `sink`.
    pub fn set_lp_log(&self, sink: Box<dyn Write + Send>) {
        *self.lp_log.lock().unwrap() = Some(sink);
    }

    pub fn flush_lp_log(&self) -> Result<()> {
        if let Some(w) = self.lp_log.lock().unwrap().as_mut() {
            w.flush()?;
        }
        Ok(())
    }

    /// New free Boolean uncertainty, as a one-node diagram.
    pub fn free_bool(&self, name: impl Into<String>) -> Aadd {
        let index = self.table.push(Condition::FreeBool { name: name.into() });
        Aadd::branch(index, Aadd::boolean(true), Aadd::boolean(false))
            .expect("bool children")
    }

    pub(crate) fn push_compare(&self, form: AffineForm, sense: Sense) -> CondIndex {
        self.table.push(Condition::Compare { form, sense })
    }

    /// Range of `objective` on the terminal reached by `path`.
    pub fn tighten(&self, objective: &AffineForm, path: &[Literal]) -> Result<BoundsResult> {
        if !self.options.refine {
            return Ok(BoundsResult::Feasible {
                interval: objective.range(),
                tightened: false,
            });
        }
        let constraints = self.table.constraints(path)?;
        if constraints.is_empty() {
            return Ok(BoundsResult::Feasible {
                interval: objective.range(),
                tightened: true,
            });
        }
        let lp = LpInstance::new(objective, &constraints);
        let result = lp.solve();
        self.stats.lp_calls.fetch_add(1, Ordering::Relaxed);
        if let BoundsResult::Feasible {
            tightened: false, ..
        } = result
        {
            self.stats.lp_fallbacks.fetch_add(1, Ordering::Relaxed);
        }
        if let Some(w) = self.lp_log.lock().unwrap().as_mut() {
            writeln!(w, "{lp}=> {}\n", describe(&result))?;
        }
        Ok(result)
    }

    /// Whether some assignment satisfies every literal of `path`.
    pub fn path_feasible(&self, path: &[Literal]) -> Result<bool> {
        Ok(self.tighten(&AffineForm::zero(), path)?.is_feasible())
    }

    /// Concrete value of `x`. Comparison conditions are evaluated with their
    /// form's `err` taken as 0, as are terminal forms.
    pub fn evaluate(&self, x: &Aadd, a: &Assignment) -> Result<Concrete> {
        let conditions = self.table.entries.read().unwrap();
        let mut node = x;
        loop {
            match node.node() {
                Node::Leaf(Leaf::Bool(b)) => return Ok(Concrete::Bool(*b)),
                Node::Leaf(Leaf::Real(form)) => {
                    return form.eval(&|id| a.noise(id)).map(Concrete::Real);
                }
                Node::Branch { index, hi, lo, .. } => {
                    let holds = match conditions.get(*index as usize) {
                        Some(Condition::FreeBool { name }) => a
                            .boolean(*index)
                            .ok_or_else(|| Error::MissingSymbol(format!("{name} (c{index})")))?,
                        Some(Condition::Compare { form, sense }) => {
                            sense.holds(form.eval(&|id| a.noise(id))?)
                        }
                        None => return Err(Error::MissingSymbol(format!("condition c{index}"))),
                    };
                    node = if holds { hi } else { lo };
                }
            }
        }
    }
}

fn describe(r: &BoundsResult) -> String {
    match r {
        BoundsResult::Feasible {
            interval,
            tightened: true,
        } => format!("feasible {interval}"),
        BoundsResult::Feasible { interval, .. } => format!("solver failure, fallback {interval}"),
        BoundsResult::Infeasible => "infeasible".to_string(),
    }
}
