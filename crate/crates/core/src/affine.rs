//! Affine arithmetic forms.
//!
//! An [`AffineForm`] is `x0 + Σ xi·εi ± err` where every noise symbol `εi`
//! ranges over `[-1, 1]` and `err` is the radius of all accumulated
//! approximation error. Linear operations are exact and preserve the
//! correlation carried by shared noise symbols; nonlinear operations fold
//! their remainder into `err`, which is treated as an independent symbol.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients below this magnitude are folded into `err`.
pub const COEFF_EPS: f64 = 1e-12;

static NEXT_SYMBOL: AtomicU32 = AtomicU32::new(1);

/// Identifier of a basic continuous uncertainty `εi ∈ [-1, 1]`.
///
/// Ids come from one process-wide counter and are never reused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NoiseSymbolId(u32);

impl NoiseSymbolId {
    pub fn fresh() -> Self {
        NoiseSymbolId(NEXT_SYMBOL.fetch_add(1, Ordering::Relaxed))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for NoiseSymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// A closed real interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn radius(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_with(&self, v: f64, slack: f64) -> bool {
        self.lo - slack <= v && v <= self.hi + slack
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Nonlinear unary functions with an affine approximation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnaryFn {
    Reciprocal,
    Sqrt,
    Exp,
}

impl UnaryFn {
    fn name(self) -> &'static str {
        match self {
            UnaryFn::Reciprocal => "reciprocal",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Exp => "exp",
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            UnaryFn::Reciprocal => 1.0 / x,
            UnaryFn::Sqrt => x.sqrt(),
            UnaryFn::Exp => x.exp(),
        }
    }

    fn derivative(self, x: f64) -> f64 {
        match self {
            UnaryFn::Reciprocal => -1.0 / (x * x),
            UnaryFn::Sqrt => 0.5 / x.sqrt(),
            UnaryFn::Exp => x.exp(),
        }
    }

    /// Point where the derivative equals `slope`, within `range`.
    fn inverse_derivative(self, slope: f64, range: Interval) -> f64 {
        let u = match self {
            UnaryFn::Reciprocal => {
                let mag = (-1.0 / slope).sqrt();
                if range.lo > 0.0 {
                    mag
                } else {
                    -mag
                }
            }
            UnaryFn::Sqrt => 1.0 / (4.0 * slope * slope),
            UnaryFn::Exp => slope.ln(),
        };
        u.clamp(range.lo, range.hi)
    }

    fn check_domain(self, range: Interval) -> Result<()> {
        let ok = match self {
            UnaryFn::Reciprocal => range.lo > 0.0 || range.hi < 0.0,
            UnaryFn::Sqrt => range.lo >= 0.0,
            UnaryFn::Exp => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain {
                function: self.name(),
                range,
            })
        }
    }
}

/// Which error criterion the affine approximation of a nonlinear function
/// optimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproxMode {
    /// The result's range equals the exact image interval.
    MinRange,
    /// The approximation error radius is minimal.
    Chebyshev,
}

/// `center + Σ coef·ε ± err`.
///
/// `terms` is kept sorted by symbol with no zero (or sub-[`COEFF_EPS`])
/// coefficients, and `err` is always non-negative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineForm {
    center: f64,
    #[serde(with = "terms_as_map")]
    terms: Vec<(NoiseSymbolId, f64)>,
    err: f64,
}

impl AffineForm {
    pub fn constant(value: f64) -> Self {
        AffineForm {
            center: value,
            terms: Vec::new(),
            err: 0.0,
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `center + radius·ε` over a freshly allocated noise symbol.
    pub fn new_uncertain(center: f64, radius: f64) -> Result<Self> {
        Self::new_uncertain_with_symbol(center, radius).map(|(form, _)| form)
    }

    /// Like [`new_uncertain`](Self::new_uncertain), also returning the new
    /// symbol (allocated even when `radius` is zero).
    pub fn new_uncertain_with_symbol(center: f64, radius: f64) -> Result<(Self, NoiseSymbolId)> {
        if !center.is_finite() || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "uncertain value needs finite center and radius, got {center} and {radius}"
            )));
        }
        if radius < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "negative radius {radius}"
            )));
        }
        let id = NoiseSymbolId::fresh();
        let terms = if radius == 0.0 {
            Vec::new()
        } else {
            vec![(id, radius)]
        };
        Ok((
            AffineForm {
                center,
                terms,
                err: 0.0,
            },
            id,
        ))
    }

    /// Builds a form from raw parts, normalizing the term list.
    pub fn from_parts(
        center: f64,
        terms: impl IntoIterator<Item = (NoiseSymbolId, f64)>,
        err: f64,
    ) -> Result<Self> {
        if !center.is_finite() || !err.is_finite() || err < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "bad affine form parts: center {center}, err {err}"
            )));
        }
        let mut merged: BTreeMap<NoiseSymbolId, f64> = BTreeMap::new();
        for (id, c) in terms {
            if !c.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite coefficient {c} on {id}"
                )));
            }
            *merged.entry(id).or_insert(0.0) += c;
        }
        Ok(Self::normalized(center, merged.into_iter().collect(), err))
    }

    fn normalized(center: f64, mut terms: Vec<(NoiseSymbolId, f64)>, mut err: f64) -> Self {
        terms.retain(|&(_, c)| {
            if c.abs() < COEFF_EPS {
                err += c.abs();
                false
            } else {
                true
            }
        });
        AffineForm { center, terms, err }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn terms(&self) -> &[(NoiseSymbolId, f64)] {
        &self.terms
    }

    pub fn err(&self) -> f64 {
        self.err
    }

    pub fn coeff(&self, id: NoiseSymbolId) -> f64 {
        self.terms
            .binary_search_by_key(&id, |&(k, _)| k)
            .map(|i| self.terms[i].1)
            .unwrap_or(0.0)
    }

    /// No noise terms and no error.
    pub fn is_exact(&self) -> bool {
        self.terms.is_empty() && self.err == 0.0
    }

    /// Sum of coefficient magnitudes plus `err`.
    pub fn radius(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.abs()).sum::<f64>() + self.err
    }

    pub fn range(&self) -> Interval {
        let r = self.radius();
        Interval::new(self.center - r, self.center + r)
    }

    pub fn lb(&self) -> f64 {
        self.range().lo
    }

    pub fn ub(&self) -> f64 {
        self.range().hi
    }

    pub fn symbols(&self) -> impl Iterator<Item = NoiseSymbolId> + '_ {
        self.terms.iter().map(|&(id, _)| id)
    }

    fn combine(&self, other: &AffineForm, sign: f64) -> AffineForm {
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let next = match (self.terms.get(i), other.terms.get(j)) {
                (Some(&(a, ca)), Some(&(b, cb))) if a == b => {
                    i += 1;
                    j += 1;
                    (a, ca + sign * cb)
                }
                (Some(&(a, ca)), Some(&(b, _))) if a < b => {
                    i += 1;
                    (a, ca)
                }
                (Some(_), Some(&(b, cb))) | (None, Some(&(b, cb))) => {
                    j += 1;
                    (b, sign * cb)
                }
                (Some(&(a, ca)), None) => {
                    i += 1;
                    (a, ca)
                }
                (None, None) => unreachable!(),
            };
            terms.push(next);
        }
        Self::normalized(
            self.center + sign * other.center,
            terms,
            self.err + other.err,
        )
    }

    pub fn add(&self, other: &AffineForm) -> AffineForm {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &AffineForm) -> AffineForm {
        self.combine(other, -1.0)
    }

    pub fn add_const(&self, c: f64) -> AffineForm {
        AffineForm {
            center: self.center + c,
            terms: self.terms.clone(),
            err: self.err,
        }
    }

    pub fn neg(&self) -> AffineForm {
        self.scale(-1.0)
    }

    pub fn scale(&self, c: f64) -> AffineForm {
        if c == 0.0 {
            return AffineForm::zero();
        }
        let terms = self.terms.iter().map(|&(id, x)| (id, c * x)).collect();
        Self::normalized(c * self.center, terms, c.abs() * self.err)
    }

    /// Enclosure of the purely quadratic part `Σi Σj xi·yj·εi·εj` of a
    /// product. Square terms use `εi² ∈ [0, 1]`, cross terms `εi·εj ∈ [-1, 1]`.
    pub fn mul_remainder(&self, other: &AffineForm) -> Interval {
        let pairs = self.aligned_with(other);
        let (mut lo, mut hi) = (0.0, 0.0);
        for (k, &(xi, yi)) in pairs.iter().enumerate() {
            let sq = xi * yi;
            if sq < 0.0 {
                lo += sq;
            } else {
                hi += sq;
            }
            for &(xj, yj) in &pairs[k + 1..] {
                let cross = (xi * yj + xj * yi).abs();
                lo -= cross;
                hi += cross;
            }
        }
        Interval::new(lo, hi)
    }

    /// Coefficient pairs over the union of both symbol sets.
    fn aligned_with(&self, other: &AffineForm) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.terms.get(i), other.terms.get(j)) {
                (Some(&(a, ca)), Some(&(b, cb))) if a == b => {
                    out.push((ca, cb));
                    i += 1;
                    j += 1;
                }
                (Some(&(a, ca)), Some(&(b, _))) if a < b => {
                    out.push((ca, 0.0));
                    i += 1;
                }
                (_, Some(&(_, cb))) => {
                    out.push((0.0, cb));
                    j += 1;
                }
                (Some(&(_, ca)), None) => {
                    out.push((ca, 0.0));
                    i += 1;
                }
                (None, None) => return out,
            }
        }
    }

    /// Product with the quadratic remainder folded in: its midpoint moves
    /// to the center, its radius to `err`.
    pub fn mul(&self, other: &AffineForm) -> AffineForm {
        let (x0, y0) = (self.center, other.center);
        let (ex, ey) = (self.err, other.err);
        let rx: f64 = self.terms.iter().map(|(_, c)| c.abs()).sum();
        let ry: f64 = other.terms.iter().map(|(_, c)| c.abs()).sum();

        let linear = self.scale_terms_only(y0).combine(&other.scale_terms_only(x0), 1.0);
        let rem = self.mul_remainder(other);
        let err = linear.err
            + x0.abs() * ey
            + y0.abs() * ex
            + rx * ey
            + ex * ry
            + ex * ey
            + rem.radius();
        Self::normalized(x0 * y0 + rem.mid(), linear.terms, err)
    }

    fn scale_terms_only(&self, c: f64) -> AffineForm {
        let terms = self.terms.iter().map(|&(id, x)| (id, c * x)).collect();
        Self::normalized(0.0, terms, 0.0)
    }

    /// Affine approximation `α·x + ζ ± δ` of `f(x)` over `range(x)`.
    pub fn approx_unary(&self, f: UnaryFn, mode: ApproxMode) -> Result<AffineForm> {
        let range = self.range();
        f.check_domain(range)?;
        let (a, b) = (range.lo, range.hi);
        if a == b {
            return finite(AffineForm::constant(f.eval(a)), f, range);
        }
        let (fa, fb) = (f.eval(a), f.eval(b));
        let (alpha, zeta, delta) = match mode {
            ApproxMode::MinRange => {
                // slope of smallest magnitude; g = f - α·x is then monotone
                let (da, db) = (f.derivative(a), f.derivative(b));
                let alpha = if da.abs() <= db.abs() { da } else { db };
                let (ga, gb) = (fa - alpha * a, fb - alpha * b);
                let (glo, ghi) = (ga.min(gb), ga.max(gb));
                (alpha, 0.5 * (glo + ghi), 0.5 * (ghi - glo))
            }
            ApproxMode::Chebyshev => {
                let alpha = (fb - fa) / (b - a);
                let u = f.inverse_derivative(alpha, range);
                let ga = fa - alpha * a;
                let gu = f.eval(u) - alpha * u;
                (alpha, 0.5 * (ga + gu), 0.5 * (ga - gu).abs())
            }
        };
        let mut out = self.scale(alpha).add_const(zeta);
        out.err += delta;
        finite(out, f, range)
    }

    /// Value under a full assignment of the noise symbols; `err` counts as 0.
    pub fn eval(&self, assignment: &impl Fn(NoiseSymbolId) -> Option<f64>) -> Result<f64> {
        let mut v = self.center;
        for &(id, c) in &self.terms {
            let e = assignment(id).ok_or_else(|| Error::MissingSymbol(id.to_string()))?;
            v += c * e;
        }
        Ok(v)
    }

    /// Component-wise equality within `tol`.
    pub fn approx_eq(&self, other: &AffineForm, tol: f64) -> bool {
        if (self.center - other.center).abs() > tol || (self.err - other.err).abs() > tol {
            return false;
        }
        self.aligned_with(other)
            .iter()
            .all(|(a, b)| (a - b).abs() <= tol)
    }
}

fn finite(out: AffineForm, f: UnaryFn, range: Interval) -> Result<AffineForm> {
    let ok = out.center.is_finite()
        && out.err.is_finite()
        && out.terms.iter().all(|(_, c)| c.is_finite());
    if ok {
        Ok(out)
    } else {
        Err(Error::Domain {
            function: f.name(),
            range,
        })
    }
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.center)?;
        for &(id, c) in &self.terms {
            if c < 0.0 {
                write!(f, " - {}·{}", -c, id)?;
            } else {
                write!(f, " + {}·{}", c, id)?;
            }
        }
        if self.err > 0.0 {
            write!(f, " ± {}", self.err)?;
        }
        Ok(())
    }
}

impl From<f64> for AffineForm {
    fn from(v: f64) -> Self {
        AffineForm::constant(v)
    }
}

/// Terms as a map keyed by the symbol's display name (`"e3"`), which stays a
/// plain string key inside any enclosing serde representation.
mod terms_as_map {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::NoiseSymbolId;

    pub fn serialize<S: Serializer>(
        terms: &[(NoiseSymbolId, f64)],
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let map: BTreeMap<String, f64> = terms.iter().map(|(id, c)| (id.to_string(), *c)).collect();
        map.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<Vec<(NoiseSymbolId, f64)>, D::Error> {
        let map = BTreeMap::<String, f64>::deserialize(d)?;
        let mut terms = Vec::with_capacity(map.len());
        for (k, c) in map {
            let id = k
                .strip_prefix('e')
                .and_then(|n| n.parse().ok())
                .filter(|&n: &u32| n > 0)
                .ok_or_else(|| D::Error::custom(format!("bad noise symbol {k:?}")))?;
            if c != 0.0 {
                terms.push((NoiseSymbolId(id), c));
            }
        }
        terms.sort_by_key(|t| t.0);
        Ok(terms)
    }
}
