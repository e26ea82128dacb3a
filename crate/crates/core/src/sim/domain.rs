use std::collections::HashMap;
use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::affine::Interval;
use crate::dd::{self, Aadd, Context, LeafKind, LeafRange};
use crate::error::{Error, Result};
use crate::lp::Sense;

/// A basic continuous uncertainty `center ± radius`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertainParam {
    pub name: String,
    pub center: f64,
    pub radius: f64,
}

/// The basic uncertainties of a network: continuous ones and free Boolean
/// faults, in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Uncertainties {
    pub reals: Vec<UncertainParam>,
    pub faults: Vec<String>,
}

impl Uncertainties {
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for r in &self.reals {
            if !r.center.is_finite() || !r.radius.is_finite() || r.radius < 0.0 {
                return Err(Error::Config(format!(
                    "uncertain `{}` needs a finite center and non-negative radius",
                    r.name
                )));
            }
            if !seen.insert(r.name.as_str()) {
                return Err(Error::Config(format!("`{}` declared twice", r.name)));
            }
        }
        for f in &self.faults {
            if !seen.insert(f.as_str()) {
                return Err(Error::Config(format!("`{f}` declared twice")));
            }
        }
        Ok(())
    }
}

/// Range summary of one value at one tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub hull: Interval,
    /// Feasible root-to-terminal paths; 1 for a plain number.
    pub leaf_count: usize,
    /// Per-path ranges; empty for plain numbers.
    pub leaves: Vec<LeafRange>,
}

/// The value algebra process step functions are written against.
///
/// Writing a step function once against this trait gives both its symbolic
/// semantics ([`Symbolic`]) and its plain numeric semantics for one
/// assignment of the uncertainties ([`Numeric`]). Branches on values must go
/// through [`Domain::cmp`] and the `select_*` methods.
pub trait Domain: Sync {
    type Real: Clone + Debug + Send + Sync;
    type Bool: Clone + Debug + Send + Sync;

    fn constant(&self, c: f64) -> Self::Real;
    fn boolean(&self, b: bool) -> Self::Bool;
    /// The declared continuous uncertainty `name`.
    fn uncertain(&self, name: &str) -> Result<Self::Real>;
    /// The declared free Boolean uncertainty `name`.
    fn fault(&self, name: &str) -> Result<Self::Bool>;

    fn add(&self, x: &Self::Real, y: &Self::Real) -> Result<Self::Real>;
    fn sub(&self, x: &Self::Real, y: &Self::Real) -> Result<Self::Real>;
    fn mul(&self, x: &Self::Real, y: &Self::Real) -> Result<Self::Real>;
    fn scale(&self, x: &Self::Real, c: f64) -> Result<Self::Real>;
    fn add_const(&self, x: &Self::Real, c: f64) -> Result<Self::Real>;

    /// `x sense rhs`.
    fn cmp(&self, x: &Self::Real, sense: Sense, rhs: f64) -> Result<Self::Bool>;
    fn and(&self, x: &Self::Bool, y: &Self::Bool) -> Result<Self::Bool>;
    fn or(&self, x: &Self::Bool, y: &Self::Bool) -> Result<Self::Bool>;
    fn not(&self, x: &Self::Bool) -> Result<Self::Bool>;
    fn select_real(&self, c: &Self::Bool, t: &Self::Real, e: &Self::Real) -> Result<Self::Real>;
    fn select_bool(&self, c: &Self::Bool, t: &Self::Bool, e: &Self::Bool) -> Result<Self::Bool>;

    /// Simplifies a stored value; called once per hyperperiod.
    fn reduce_real(&self, x: &Self::Real) -> Result<Self::Real>;
    fn reduce_bool(&self, x: &Self::Bool) -> Result<Self::Bool>;

    fn summarize_real(&self, x: &Self::Real, with_leaves: bool) -> Result<Summary>;
    fn summarize_bool(&self, x: &Self::Bool, with_leaves: bool) -> Result<Summary>;
    fn same_real(&self, x: &Self::Real, y: &Self::Real) -> bool;
    fn same_bool(&self, x: &Self::Bool, y: &Self::Bool) -> bool;
}

/// Values are decision diagrams sharing one [`Context`].
pub struct Symbolic<'a> {
    ctx: &'a Context,
    reals: HashMap<String, Aadd>,
    faults: HashMap<String, Aadd>,
}

impl<'a> Symbolic<'a> {
    /// Allocates a noise symbol per continuous uncertainty and a condition
    /// per fault, in declaration order.
    pub fn new(ctx: &'a Context, u: &Uncertainties) -> Result<Self> {
        u.validate()?;
        let mut reals = HashMap::new();
        for r in &u.reals {
            reals.insert(r.name.clone(), Aadd::uncertain(r.center, r.radius)?);
        }
        let mut faults = HashMap::new();
        for f in &u.faults {
            faults.insert(f.clone(), ctx.free_bool(f.clone()));
        }
        Ok(Symbolic { ctx, reals, faults })
    }

    pub fn context(&self) -> &Context {
        self.ctx
    }

    fn summarize(&self, x: &Aadd, with_leaves: bool) -> Result<Summary> {
        let leaves = self.ctx.per_leaf_ranges(x)?;
        let hull = dd::range_hull(&leaves)?;
        Ok(Summary {
            hull,
            leaf_count: leaves.len(),
            leaves: if with_leaves { leaves } else { Vec::new() },
        })
    }
}

impl Domain for Symbolic<'_> {
    type Real = Aadd;
    type Bool = Aadd;

    fn constant(&self, c: f64) -> Aadd {
        Aadd::constant(c)
    }

    fn boolean(&self, b: bool) -> Aadd {
        Aadd::boolean(b)
    }

    fn uncertain(&self, name: &str) -> Result<Aadd> {
        self.reals
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Config(format!("undeclared uncertain `{name}`")))
    }

    fn fault(&self, name: &str) -> Result<Aadd> {
        self.faults
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Config(format!("undeclared fault `{name}`")))
    }

    fn add(&self, x: &Aadd, y: &Aadd) -> Result<Aadd> {
        x.add(y)
    }

    fn sub(&self, x: &Aadd, y: &Aadd) -> Result<Aadd> {
        x.sub(y)
    }

    fn mul(&self, x: &Aadd, y: &Aadd) -> Result<Aadd> {
        x.mul(y)
    }

    fn scale(&self, x: &Aadd, c: f64) -> Result<Aadd> {
        x.scale(c)
    }

    fn add_const(&self, x: &Aadd, c: f64) -> Result<Aadd> {
        x.add_const(c)
    }

    fn cmp(&self, x: &Aadd, sense: Sense, rhs: f64) -> Result<Aadd> {
        self.ctx.compare(&x.add_const(-rhs)?, sense)
    }

    fn and(&self, x: &Aadd, y: &Aadd) -> Result<Aadd> {
        x.and(y)
    }

    fn or(&self, x: &Aadd, y: &Aadd) -> Result<Aadd> {
        x.or(y)
    }

    fn not(&self, x: &Aadd) -> Result<Aadd> {
        x.not()
    }

    fn select_real(&self, c: &Aadd, t: &Aadd, e: &Aadd) -> Result<Aadd> {
        dd::ite(c, t, e)
    }

    fn select_bool(&self, c: &Aadd, t: &Aadd, e: &Aadd) -> Result<Aadd> {
        dd::ite(c, t, e)
    }

    fn reduce_real(&self, x: &Aadd) -> Result<Aadd> {
        self.ctx.reduce(x)
    }

    fn reduce_bool(&self, x: &Aadd) -> Result<Aadd> {
        self.ctx.reduce(x)
    }

    fn summarize_real(&self, x: &Aadd, with_leaves: bool) -> Result<Summary> {
        debug_assert_eq!(x.kind(), LeafKind::Real);
        self.summarize(x, with_leaves)
    }

    fn summarize_bool(&self, x: &Aadd, with_leaves: bool) -> Result<Summary> {
        debug_assert_eq!(x.kind(), LeafKind::Bool);
        self.summarize(x, with_leaves)
    }

    fn same_real(&self, x: &Aadd, y: &Aadd) -> bool {
        x.same_node(y)
    }

    fn same_bool(&self, x: &Aadd, y: &Aadd) -> bool {
        x.same_node(y)
    }
}

/// Plain numbers for one fixed assignment of the uncertainties.
#[derive(Clone, Debug, Default)]
pub struct Numeric {
    reals: HashMap<String, f64>,
    faults: HashMap<String, bool>,
}

/// Values of the basic uncertainties: `eps` in `[-1, 1]` per continuous
/// uncertainty and a truth value per fault, in declaration order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub eps: Vec<f64>,
    pub faults: Vec<bool>,
}

impl Corner {
    /// Short label such as `e+-f1`.
    pub fn label(&self) -> String {
        let mut s = String::from("e");
        for &e in &self.eps {
            s.push(if e > 0.0 {
                '+'
            } else if e < 0.0 {
                '-'
            } else {
                '0'
            });
        }
        if !self.faults.is_empty() {
            s.push('f');
            for &f in &self.faults {
                s.push(if f { '1' } else { '0' });
            }
        }
        s
    }
}

impl Numeric {
    pub fn new(u: &Uncertainties, corner: &Corner) -> Result<Self> {
        u.validate()?;
        if corner.eps.len() != u.reals.len() || corner.faults.len() != u.faults.len() {
            return Err(Error::InvalidArgument(
                "assignment does not match the declared uncertainties".into(),
            ));
        }
        if corner.eps.iter().any(|e| !(-1.0..=1.0).contains(e)) {
            return Err(Error::InvalidArgument("noise values must lie in [-1, 1]".into()));
        }
        let reals = u
            .reals
            .iter()
            .zip(&corner.eps)
            .map(|(r, e)| (r.name.clone(), r.center + r.radius * e))
            .collect();
        let faults = u.faults.iter().cloned().zip(corner.faults.iter().copied()).collect();
        Ok(Numeric { reals, faults })
    }
}

fn point(v: f64) -> Summary {
    Summary {
        hull: Interval::point(v),
        leaf_count: 1,
        leaves: Vec::new(),
    }
}

impl Domain for Numeric {
    type Real = f64;
    type Bool = bool;

    fn constant(&self, c: f64) -> f64 {
        c
    }

    fn boolean(&self, b: bool) -> bool {
        b
    }

    fn uncertain(&self, name: &str) -> Result<f64> {
        self.reals
            .get(name)
            .copied()
            .ok_or_else(|| Error::Config(format!("undeclared uncertain `{name}`")))
    }

    fn fault(&self, name: &str) -> Result<bool> {
        self.faults
            .get(name)
            .copied()
            .ok_or_else(|| Error::Config(format!("undeclared fault `{name}`")))
    }

    fn add(&self, x: &f64, y: &f64) -> Result<f64> {
        Ok(x + y)
    }

    fn sub(&self, x: &f64, y: &f64) -> Result<f64> {
        Ok(x - y)
    }

    fn mul(&self, x: &f64, y: &f64) -> Result<f64> {
        Ok(x * y)
    }

    fn scale(&self, x: &f64, c: f64) -> Result<f64> {
        Ok(x * c)
    }

    fn add_const(&self, x: &f64, c: f64) -> Result<f64> {
        Ok(x + c)
    }

    fn cmp(&self, x: &f64, sense: Sense, rhs: f64) -> Result<bool> {
        Ok(sense.holds(x - rhs))
    }

    fn and(&self, x: &bool, y: &bool) -> Result<bool> {
        Ok(*x && *y)
    }

    fn or(&self, x: &bool, y: &bool) -> Result<bool> {
        Ok(*x || *y)
    }

    fn not(&self, x: &bool) -> Result<bool> {
        Ok(!x)
    }

    fn select_real(&self, c: &bool, t: &f64, e: &f64) -> Result<f64> {
        Ok(if *c { *t } else { *e })
    }

    fn select_bool(&self, c: &bool, t: &bool, e: &bool) -> Result<bool> {
        Ok(if *c { *t } else { *e })
    }

    fn reduce_real(&self, x: &f64) -> Result<f64> {
        Ok(*x)
    }

    fn reduce_bool(&self, x: &bool) -> Result<bool> {
        Ok(*x)
    }

    fn summarize_real(&self, x: &f64, _: bool) -> Result<Summary> {
        Ok(point(*x))
    }

    fn summarize_bool(&self, x: &bool, _: bool) -> Result<Summary> {
        Ok(point(f64::from(u8::from(*x))))
    }

    fn same_real(&self, x: &f64, y: &f64) -> bool {
        x.to_bits() == y.to_bits()
    }

    fn same_bool(&self, x: &bool, y: &bool) -> bool {
        x == y
    }
}
