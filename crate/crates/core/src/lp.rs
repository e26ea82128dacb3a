//! Range tightening of an affine form under path constraints.
//!
//! Every noise symbol is an LP variable boxed in `[-1, 1]`. A constraint form
//! with a nonzero error radius gets one extra boxed variable of its own. The
//! bounds are computed by a dense bounded-variable primal simplex (Bland's
//! rule), which is plenty for path-sized systems.
//!
//! Strict inequalities are relaxed to their closure for the bounds, but
//! emptiness is decided exactly: a system with strict rows is feasible iff
//! the largest uniform slack `t` on those rows is positive.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::affine::{AffineForm, Interval, NoiseSymbolId};

const COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
/// Minimum uniform slack for a system with strict rows to count as non-empty.
pub const STRICT_TOL: f64 = 1e-11;

/// Relational operator of a comparison against zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl Sense {
    pub const ALL: [Sense; 5] = [Sense::Lt, Sense::Le, Sense::Gt, Sense::Ge, Sense::Eq];

    /// Logical negation; `None` for `==`, whose negation (`!=`) is not a
    /// closed half-space.
    pub fn negate(self) -> Option<Sense> {
        match self {
            Sense::Lt => Some(Sense::Ge),
            Sense::Le => Some(Sense::Gt),
            Sense::Gt => Some(Sense::Le),
            Sense::Ge => Some(Sense::Lt),
            Sense::Eq => None,
        }
    }

    pub fn holds(self, v: f64) -> bool {
        match self {
            Sense::Lt => v < 0.0,
            Sense::Le => v <= 0.0,
            Sense::Gt => v > 0.0,
            Sense::Ge => v >= 0.0,
            Sense::Eq => v == 0.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Lt => "<",
            Sense::Le => "<=",
            Sense::Gt => ">",
            Sense::Ge => ">=",
            Sense::Eq => "==",
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `form sense 0` if `polarity`, otherwise its negation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub form: AffineForm,
    pub sense: Sense,
    pub polarity: bool,
}

impl LinearConstraint {
    pub fn new(form: AffineForm, sense: Sense, polarity: bool) -> Self {
        LinearConstraint {
            form,
            sense,
            polarity,
        }
    }

    /// The sense that must hold, or `None` if the constraint is `!=`.
    pub fn effective_sense(&self) -> Option<Sense> {
        if self.polarity {
            Some(self.sense)
        } else {
            self.sense.negate()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum BoundsResult {
    /// `tightened` is false when the solver failed and the plain range was
    /// returned instead.
    Feasible { interval: Interval, tightened: bool },
    Infeasible,
}

impl BoundsResult {
    pub fn interval(&self) -> Option<Interval> {
        match *self {
            BoundsResult::Feasible { interval, .. } => Some(interval),
            BoundsResult::Infeasible => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, BoundsResult::Feasible { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarLabel {
    Noise(NoiseSymbolId),
    /// Error radius of the `n`-th constraint.
    Err(usize),
}

impl fmt::Display for VarLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarLabel::Noise(id) => write!(f, "{id}"),
            VarLabel::Err(k) => write!(f, "err{k}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RowKind {
    Le,
    Eq,
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<f64>,
    kind: RowKind,
    strict: bool,
    rhs: f64,
}

/// One LP instance: optimize the objective's affine part over the box
/// intersected with the rows.
#[derive(Clone, Debug)]
pub struct LpInstance {
    vars: Vec<VarLabel>,
    rows: Vec<Row>,
    objective: Vec<f64>,
    objective_form: AffineForm,
}

impl LpInstance {
    pub fn new(objective: &AffineForm, constraints: &[LinearConstraint]) -> Self {
        let mut index: BTreeMap<NoiseSymbolId, usize> = BTreeMap::new();
        for id in objective
            .symbols()
            .chain(constraints.iter().flat_map(|c| c.form.symbols()))
        {
            index.entry(id).or_insert(0);
        }
        let mut vars: Vec<VarLabel> = Vec::with_capacity(index.len());
        for (i, (id, slot)) in index.iter_mut().enumerate() {
            *slot = i;
            vars.push(VarLabel::Noise(*id));
        }
        let err_vars: Vec<Option<usize>> = constraints
            .iter()
            .enumerate()
            .map(|(k, c)| {
                (c.form.err() > 0.0 && c.effective_sense().is_some()).then(|| {
                    vars.push(VarLabel::Err(k));
                    vars.len() - 1
                })
            })
            .collect();

        let nvars = vars.len();
        let mut rows = Vec::new();
        for (k, c) in constraints.iter().enumerate() {
            let Some(sense) = c.effective_sense() else {
                continue;
            };
            let mut coeffs = vec![0.0; nvars];
            for &(id, a) in c.form.terms() {
                coeffs[index[&id]] = a;
            }
            if let Some(j) = err_vars[k] {
                coeffs[j] = c.form.err();
            }
            let c0 = c.form.center();
            let (kind, strict, sign) = match sense {
                Sense::Le => (RowKind::Le, false, 1.0),
                Sense::Lt => (RowKind::Le, true, 1.0),
                Sense::Ge => (RowKind::Le, false, -1.0),
                Sense::Gt => (RowKind::Le, true, -1.0),
                Sense::Eq => (RowKind::Eq, false, 1.0),
            };
            if sign < 0.0 {
                coeffs.iter_mut().for_each(|a| *a = -*a);
            }
            rows.push(Row {
                coeffs,
                kind,
                strict,
                rhs: -sign * c0,
            });
        }

        let mut obj = vec![0.0; nvars];
        for &(id, a) in objective.terms() {
            obj[index[&id]] = a;
        }
        LpInstance {
            vars,
            rows,
            objective: obj,
            objective_form: objective.clone(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn solve(&self) -> BoundsResult {
        let unconstrained = self.objective_form.range();
        if self.rows.is_empty() {
            return BoundsResult::Feasible {
                interval: unconstrained,
                tightened: true,
            };
        }
        match self.solve_inner() {
            Ok(Some((min, max))) => {
                let c0 = self.objective_form.center();
                let e = self.objective_form.err();
                let lo = (c0 + min - e).max(unconstrained.lo);
                let hi = (c0 + max + e).min(unconstrained.hi);
                BoundsResult::Feasible {
                    interval: Interval::new(lo.min(hi), hi.max(lo)),
                    tightened: true,
                }
            }
            Ok(None) => BoundsResult::Infeasible,
            Err(SolverFailure) => BoundsResult::Feasible {
                interval: unconstrained,
                tightened: false,
            },
        }
    }

    /// `Ok(None)` when infeasible, else the min and max of the objective's
    /// noise part.
    fn solve_inner(&self) -> Result<Option<(f64, f64)>, SolverFailure> {
        let mut s = Simplex::new(self);
        if !s.phase_one()? {
            return Ok(None);
        }
        if let Some(t) = s.t_col {
            let mut cost = vec![0.0; s.ncols];
            cost[t] = -1.0;
            s.optimize(&cost)?;
            if s.x[t] <= STRICT_TOL {
                return Ok(None);
            }
        }
        if self.objective.iter().all(|&c| c == 0.0) {
            return Ok(Some((0.0, 0.0)));
        }
        let mut cost = vec![0.0; s.ncols];
        cost[..self.objective.len()].copy_from_slice(&self.objective);
        let min = s.optimize(&cost)?;
        cost.iter_mut().for_each(|c| *c = -*c);
        let max = -s.optimize(&cost)?;
        Ok(Some((min, max.max(min))))
    }
}

impl fmt::Display for LpInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "lp {} vars {} rows; all vars in [-1, 1]",
            self.vars.len(),
            self.rows.len()
        )?;
        write!(f, "vars:")?;
        for (j, v) in self.vars.iter().enumerate() {
            write!(f, " x{j}={v}")?;
        }
        writeln!(f)?;
        writeln!(f, "objective: {}", self.objective_form)?;
        for (i, r) in self.rows.iter().enumerate() {
            write!(f, "r{i}:")?;
            for (j, a) in r.coeffs.iter().enumerate() {
                if *a != 0.0 {
                    write!(f, " {a:+}*x{j}")?;
                }
            }
            let op = match (r.kind, r.strict) {
                (RowKind::Eq, _) => "=",
                (RowKind::Le, true) => "<",
                (RowKind::Le, false) => "<=",
            };
            writeln!(f, " {op} {}", r.rhs)?;
        }
        Ok(())
    }
}

/// Bounds of `objective` over the box intersected with `constraints`.
pub fn tighten(objective: &AffineForm, constraints: &[LinearConstraint]) -> BoundsResult {
    LpInstance::new(objective, constraints).solve()
}

/// Whether the constraint set has at least one satisfying assignment.
pub fn is_feasible(constraints: &[LinearConstraint]) -> bool {
    tighten(&AffineForm::zero(), constraints).is_feasible()
}

#[derive(Debug)]
struct SolverFailure;

/// Dense tableau over `[structural | t | slack | artificial]` columns.
struct Simplex {
    m: usize,
    ncols: usize,
    /// `B⁻¹·[A | b]`, row-major with `ncols + 1` entries per row.
    tab: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    t_col: Option<usize>,
    art_start: usize,
    max_iter: usize,
}

impl Simplex {
    fn new(lp: &LpInstance) -> Self {
        let nv = lp.vars.len();
        let m = lp.rows.len();
        let has_strict = lp.rows.iter().any(|r| r.strict);
        let t_col = has_strict.then_some(nv);
        let slack_start = nv + usize::from(has_strict);
        let art_start = slack_start + m;
        let ncols = art_start + m;
        let width = ncols + 1;

        let mut lower = vec![-1.0; ncols];
        let mut upper = vec![1.0; ncols];
        if let Some(t) = t_col {
            lower[t] = 0.0;
            upper[t] = 1.0;
        }
        for (i, r) in lp.rows.iter().enumerate() {
            lower[slack_start + i] = 0.0;
            upper[slack_start + i] = match r.kind {
                RowKind::Le => f64::INFINITY,
                RowKind::Eq => 0.0,
            };
            lower[art_start + i] = 0.0;
            upper[art_start + i] = 0.0;
        }
        let mut x = lower.clone();

        let mut tab = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let mut in_basis = vec![false; ncols];
        for (i, r) in lp.rows.iter().enumerate() {
            let row = &mut tab[i * width..(i + 1) * width];
            row[..nv].copy_from_slice(&r.coeffs);
            if let (Some(t), true) = (t_col, r.strict) {
                row[t] = 1.0;
            }
            row[slack_start + i] = 1.0;
            row[ncols] = r.rhs;
            let resid = r.rhs - r.coeffs.iter().zip(&x[..nv]).map(|(a, v)| a * v).sum::<f64>();
            if r.kind == RowKind::Le && resid >= 0.0 {
                basis[i] = slack_start + i;
                x[slack_start + i] = resid;
            } else {
                // artificial carries the residual; scale the row so its
                // basic coefficient is +1
                let sigma = if resid >= 0.0 { 1.0 } else { -1.0 };
                row[art_start + i] = sigma;
                if sigma < 0.0 {
                    row.iter_mut().for_each(|a| *a = -*a);
                }
                basis[i] = art_start + i;
                upper[art_start + i] = f64::INFINITY;
                x[art_start + i] = resid.abs();
            }
            in_basis[basis[i]] = true;
        }

        Simplex {
            m,
            ncols,
            tab,
            lower,
            upper,
            x,
            basis,
            in_basis,
            t_col,
            art_start,
            max_iter: 1000 + 50 * (m + ncols),
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.tab[i * (self.ncols + 1) + j]
    }

    fn phase_one(&mut self) -> Result<bool, SolverFailure> {
        let mut cost = vec![0.0; self.ncols];
        let mut any = false;
        for i in 0..self.m {
            if self.upper[self.art_start + i] > 0.0 {
                cost[self.art_start + i] = 1.0;
                any = true;
            }
        }
        if !any {
            return Ok(true);
        }
        let infeas = self.optimize(&cost)?;
        let scale = 1.0
            + (0..self.m)
                .map(|i| self.at(i, self.ncols).abs())
                .fold(0.0, f64::max);
        if infeas > FEAS_TOL * scale {
            return Ok(false);
        }
        for i in 0..self.m {
            let c = self.art_start + i;
            self.upper[c] = 0.0;
            if !self.in_basis[c] {
                self.x[c] = 0.0;
            }
        }
        Ok(true)
    }

    fn reduced_cost(&self, cost: &[f64], j: usize) -> f64 {
        let mut d = cost[j];
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                d -= cb * self.at(i, j);
            }
        }
        d
    }

    /// Minimizes `cost·x` from the current feasible basis.
    fn optimize(&mut self, cost: &[f64]) -> Result<f64, SolverFailure> {
        for _ in 0..self.max_iter {
            let Some((j, dir)) = self.entering(cost) else {
                let v: f64 = cost.iter().zip(&self.x).map(|(c, x)| c * x).sum();
                return if v.is_finite() { Ok(v) } else { Err(SolverFailure) };
            };
            self.step(j, dir)?;
        }
        Err(SolverFailure)
    }

    /// Smallest-index improving nonbasic column and its direction.
    fn entering(&self, cost: &[f64]) -> Option<(usize, f64)> {
        for j in 0..self.ncols {
            if self.in_basis[j] || self.upper[j] - self.lower[j] <= 0.0 {
                continue;
            }
            let d = self.reduced_cost(cost, j);
            let at_lower = self.x[j] <= self.lower[j];
            let at_upper = self.x[j] >= self.upper[j];
            if d < -COST_TOL && !at_upper {
                return Some((j, 1.0));
            }
            if d > COST_TOL && !at_lower {
                return Some((j, -1.0));
            }
        }
        None
    }

    fn step(&mut self, j: usize, dir: f64) -> Result<(), SolverFailure> {
        let mut best = self.upper[j] - self.lower[j];
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..self.m {
            let alpha = self.at(i, j) * dir;
            let b = self.basis[i];
            let (room, target) = if alpha > PIVOT_TOL {
                ((self.x[b] - self.lower[b]).max(0.0) / alpha, self.lower[b])
            } else if alpha < -PIVOT_TOL {
                ((self.upper[b] - self.x[b]).max(0.0) / -alpha, self.upper[b])
            } else {
                continue;
            };
            let better = match leave {
                None => room <= best,
                Some((r, _)) => {
                    room < best - 1e-12 || (room <= best + 1e-12 && b < self.basis[r])
                }
            };
            if better {
                best = best.min(room);
                leave = Some((i, target));
            }
        }
        if !best.is_finite() {
            return Err(SolverFailure);
        }
        let delta = dir * best;
        for i in 0..self.m {
            let a = self.at(i, j);
            if a != 0.0 {
                let b = self.basis[i];
                self.x[b] -= a * delta;
            }
        }
        self.x[j] += delta;
        match leave {
            None => {
                self.x[j] = if dir > 0.0 { self.upper[j] } else { self.lower[j] };
            }
            Some((r, target)) => {
                let b = self.basis[r];
                self.x[b] = target;
                self.pivot(r, j);
                self.refresh_basics();
            }
        }
        if self.x.iter().any(|v| v.is_nan()) {
            return Err(SolverFailure);
        }
        Ok(())
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let width = self.ncols + 1;
        let p = self.at(r, j);
        for k in 0..width {
            self.tab[r * width + k] /= p;
        }
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.at(i, j);
            if f == 0.0 {
                continue;
            }
            for k in 0..width {
                let v = self.tab[r * width + k];
                self.tab[i * width + k] -= f * v;
            }
        }
        self.in_basis[self.basis[r]] = false;
        self.in_basis[j] = true;
        self.basis[r] = j;
    }

    /// Recomputes basic values from the transformed rhs to stop drift.
    fn refresh_basics(&mut self) {
        for i in 0..self.m {
            let mut v = self.at(i, self.ncols);
            for j in 0..self.ncols {
                if !self.in_basis[j] {
                    let a = self.at(i, j);
                    if a != 0.0 {
                        v -= a * self.x[j];
                    }
                }
            }
            self.x[self.basis[i]] = v;
        }
    }
}
