//! Affine arithmetic decision diagrams and a static-dataflow symbolic
//! simulation kernel built on them.

pub mod affine;
pub mod dd;
pub mod error;
pub mod lp;
pub mod par;
pub mod scenarios;
pub mod sim;

pub use affine::{AffineForm, ApproxMode, Interval, NoiseSymbolId, UnaryFn};
pub use dd::{Aadd, Assignment, Concrete, Condition, Context, ContextOptions, Leaf, LeafKind, Literal};
pub use error::{Error, Result};
pub use lp::{BoundsResult, LinearConstraint, Sense};
pub use par::Parallelism;
