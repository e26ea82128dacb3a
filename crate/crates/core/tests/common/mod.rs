//! Test oracles shared by the property suites and the acceptance run.
#![allow(dead_code)]

use aadd::dd::{ite, Node};
use aadd::lp::{tighten, BoundsResult, LinearConstraint, Sense};
use aadd::{Aadd, AffineForm, ApproxMode, Assignment, Condition, Context, Interval, Leaf, NoiseSymbolId, UnaryFn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SLACK: f64 = 1e-9;

// ---- relational table -------------------------------------------------

/// `(sense, range of x, expected decision of "x sense 0")`, three per sense:
/// decided true, decided false, undecided.
pub fn relational_cases() -> Vec<(Sense, Interval, Option<bool>)> {
    let i = Interval::new;
    vec![
        (Sense::Lt, i(-3.0, -1.0), Some(true)),
        (Sense::Lt, i(0.0, 2.0), Some(false)),
        (Sense::Lt, i(-1.0, 0.0), None),
        (Sense::Le, i(-3.0, 0.0), Some(true)),
        (Sense::Le, i(0.5, 2.0), Some(false)),
        (Sense::Le, i(-1.0, 1.0), None),
        (Sense::Gt, i(0.5, 2.0), Some(true)),
        (Sense::Gt, i(-2.0, 0.0), Some(false)),
        (Sense::Gt, i(0.0, 1.0), None),
        (Sense::Ge, i(0.0, 2.0), Some(true)),
        (Sense::Ge, i(-2.0, -0.5), Some(false)),
        (Sense::Ge, i(-1.0, 0.0), None),
        (Sense::Eq, i(0.0, 0.0), Some(true)),
        (Sense::Eq, i(0.5, 1.0), Some(false)),
        (Sense::Eq, i(-1.0, 1.0), None),
    ]
}

/// Affine form whose range is exactly `r`.
pub fn form_with_range(r: Interval) -> AffineForm {
    if r.lo == r.hi {
        AffineForm::constant(r.lo)
    } else {
        AffineForm::new_uncertain(r.mid(), r.radius()).unwrap()
    }
}

// ---- random programs over decision diagrams ---------------------------

/// `c + sum(k * var)`.
#[derive(Clone, Debug)]
pub struct Lin {
    c: f64,
    terms: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub enum Cond {
    Cmp(Lin, Sense),
    Free(usize),
}

#[derive(Clone, Debug)]
pub enum Stmt {
    Assign(usize, Lin),
    If(Cond, Vec<Stmt>, Vec<Stmt>),
}

#[derive(Clone, Debug)]
pub enum Tail {
    Mul(usize, usize, usize),
    Unary(usize, UnaryFn, ApproxMode, usize),
}

/// Variables `0..inputs.len()` start as `center + radius * e_i`; the last
/// variable starts at 0. Every constant is a small dyadic rational, so the
/// linear part is computed without rounding on both sides.
#[derive(Clone, Debug)]
pub struct Program {
    pub inputs: Vec<(f64, f64)>,
    pub body: Vec<Stmt>,
    pub tail: Vec<Tail>,
    pub frees: usize,
    pub depth: usize,
    pub branches: usize,
}

impl Program {
    pub fn vars(&self) -> usize {
        self.inputs.len() + 1
    }
}

fn dyadic(rng: &mut impl Rng, lo: i32, hi: i32, den: f64) -> f64 {
    f64::from(rng.gen_range(lo..=hi)) / den
}

fn gen_lin(rng: &mut impl Rng, vars: usize) -> Lin {
    let k = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];
    let n = rng.gen_range(1..=2);
    Lin {
        c: dyadic(rng, -4, 4, 2.0),
        terms: (0..n)
            .map(|_| (rng.gen_range(0..vars), *k.choose(rng).unwrap()))
            .collect(),
    }
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    vars: usize,
    branches_left: usize,
    frees: usize,
    max_depth: usize,
    depth_seen: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn block(&mut self, depth: usize) -> Vec<Stmt> {
        self.depth_seen = self.depth_seen.max(depth);
        let n = self.rng.gen_range(1..=3);
        (0..n).map(|_| self.stmt(depth)).collect()
    }

    fn stmt(&mut self, depth: usize) -> Stmt {
        if self.branches_left > 0 && depth < self.max_depth && self.rng.gen_bool(0.45) {
            self.branches_left -= 1;
            let cond = if self.rng.gen_bool(0.25) {
                self.frees += 1;
                Cond::Free(self.frees - 1)
            } else {
                let s = [Sense::Lt, Sense::Le, Sense::Gt, Sense::Ge];
                Cond::Cmp(gen_lin(self.rng, self.vars), *s.choose(self.rng).unwrap())
            };
            let t = self.block(depth + 1);
            let e = if self.rng.gen_bool(0.8) { self.block(depth + 1) } else { Vec::new() };
            Stmt::If(cond, t, e)
        } else {
            Stmt::Assign(self.rng.gen_range(0..self.vars), gen_lin(self.rng, self.vars))
        }
    }
}

/// A random program with at most 5 inputs, 4 branches and nesting depth 6.
pub fn gen_program(rng: &mut impl Rng, nonlinear: bool) -> Program {
    let n = rng.gen_range(1..=5);
    let inputs = (0..n)
        .map(|_| (dyadic(rng, -4, 4, 2.0), dyadic(rng, 2, 12, 4.0)))
        .collect();
    let mut g = Gen {
        rng,
        vars: n + 1,
        branches_left: 4,
        frees: 0,
        max_depth: 6,
        depth_seen: 0,
    };
    let mut body = g.block(0);
    while g.branches_left == 4 {
        // every program branches at least once
        body.push(g.stmt(0));
    }
    let (frees, depth, branches) = (g.frees, g.depth_seen, 4 - g.branches_left);
    let vars = n + 1;
    let mut tail = Vec::new();
    if nonlinear {
        for _ in 0..rng.gen_range(1..=3) {
            let dst = rng.gen_range(0..vars);
            if rng.gen_bool(0.5) {
                tail.push(Tail::Mul(dst, rng.gen_range(0..vars), rng.gen_range(0..vars)));
            } else {
                let f = *[UnaryFn::Reciprocal, UnaryFn::Sqrt, UnaryFn::Exp].choose(rng).unwrap();
                let mode = *[ApproxMode::MinRange, ApproxMode::Chebyshev].choose(rng).unwrap();
                tail.push(Tail::Unary(dst, f, mode, rng.gen_range(0..vars)));
            }
        }
    }
    Program {
        inputs,
        body,
        tail,
        frees,
        depth,
        branches,
    }
}

fn lin_sym(l: &Lin, vars: &[Aadd]) -> Aadd {
    let mut acc = Aadd::constant(l.c);
    for &(v, k) in &l.terms {
        acc = acc.add(&vars[v].scale(k).unwrap()).unwrap();
    }
    acc
}

fn lin_num(l: &Lin, vars: &[f64]) -> f64 {
    let mut acc = l.c;
    for &(v, k) in &l.terms {
        acc += vars[v] * k;
    }
    acc
}

/// Symbolic execution result: final variables, noise symbols of the
/// inputs, condition index of each free Boolean and which tail ops ran.
pub struct SymRun {
    pub vars: Vec<Aadd>,
    pub noise: Vec<NoiseSymbolId>,
    pub frees: Vec<usize>,
    pub tail_applied: Vec<bool>,
}

fn exec_sym(ctx: &Context, body: &[Stmt], vars: &mut [Aadd], frees: &mut Vec<(usize, usize)>) {
    for s in body {
        match s {
            Stmt::Assign(v, l) => vars[*v] = lin_sym(l, vars),
            Stmt::If(cond, t, e) => {
                let c = match cond {
                    Cond::Cmp(l, sense) => ctx.compare(&lin_sym(l, vars), *sense).unwrap(),
                    Cond::Free(k) => {
                        let b = ctx.free_bool(format!("b{k}"));
                        frees.push((*k, b.top_index() as usize));
                        b
                    }
                };
                let mut tv = vars.to_vec();
                exec_sym(ctx, t, &mut tv, frees);
                let mut ev = vars.to_vec();
                exec_sym(ctx, e, &mut ev, frees);
                for i in 0..vars.len() {
                    vars[i] = ite(&c, &tv[i], &ev[i]).unwrap();
                }
            }
        }
    }
}

fn leaf_ranges_within(x: &Aadd, bound: f64) -> bool {
    x.paths().iter().all(|(_, l)| match l {
        Leaf::Real(f) => f.lb() > -bound && f.ub() < bound,
        Leaf::Bool(_) => true,
    })
}

pub fn run_symbolic(ctx: &Context, p: &Program) -> SymRun {
    let mut vars = Vec::new();
    let mut noise = Vec::new();
    for &(c, r) in &p.inputs {
        let (f, id) = AffineForm::new_uncertain_with_symbol(c, r).unwrap();
        vars.push(Aadd::real(f));
        noise.push(id);
    }
    vars.push(Aadd::constant(0.0));
    let mut frees = Vec::new();
    exec_sym(ctx, &p.body, &mut vars, &mut frees);
    frees.sort();
    let frees = frees.into_iter().map(|(_, idx)| idx).collect();
    let mut tail_applied = Vec::new();
    for t in &p.tail {
        let out = match t {
            Tail::Mul(d, a, b) => vars[*a].mul(&vars[*b]).ok().map(|r| (*d, r)),
            Tail::Unary(d, f, mode, s) => {
                let ok = *f != UnaryFn::Exp || leaf_ranges_within(&vars[*s], 30.0);
                ok.then(|| vars[*s].approx_unary(*f, *mode).ok())
                    .flatten()
                    .map(|r| (*d, r))
            }
        };
        tail_applied.push(out.is_some());
        if let Some((d, r)) = out {
            vars[d] = r;
        }
    }
    SymRun {
        vars,
        noise,
        frees,
        tail_applied,
    }
}

fn exec_num(body: &[Stmt], vars: &mut [f64], bools: &[bool]) {
    for s in body {
        match s {
            Stmt::Assign(v, l) => vars[*v] = lin_num(l, vars),
            Stmt::If(cond, t, e) => {
                let take = match cond {
                    Cond::Cmp(l, sense) => sense.holds(lin_num(l, vars)),
                    Cond::Free(k) => bools[*k],
                };
                exec_num(if take { t } else { e }, vars, bools);
            }
        }
    }
}

pub fn run_concrete(p: &Program, eps: &[f64], bools: &[bool], applied: &[bool]) -> Vec<f64> {
    let mut vars: Vec<f64> = p.inputs.iter().zip(eps).map(|(&(c, r), e)| c + r * e).collect();
    vars.push(0.0);
    exec_num(&p.body, &mut vars, bools);
    for (t, &on) in p.tail.iter().zip(applied) {
        if !on {
            continue;
        }
        match t {
            Tail::Mul(d, a, b) => vars[*d] = vars[*a] * vars[*b],
            Tail::Unary(d, f, _, s) => vars[*d] = f.eval(vars[*s]),
        }
    }
    vars
}

/// Terminal reached under `a`; every condition must be err-free.
pub fn leaf_at<'x>(ctx: &Context, x: &'x Aadd, a: &Assignment) -> &'x Leaf {
    let mut x = x;
    loop {
        match x.node() {
            Node::Leaf(l) => return l,
            Node::Branch { index, hi, lo, .. } => {
                let take = match ctx.conditions().get(*index).unwrap() {
                    Condition::FreeBool { .. } => a.boolean(*index).unwrap(),
                    Condition::Compare { form, sense } => {
                        assert_eq!(form.err(), 0.0);
                        sense.holds(form.eval(&|id| a.noise(id)).unwrap())
                    }
                };
                x = if take { hi } else { lo };
            }
        }
    }
}

/// Runs one random program at `points` random assignments. Linear programs
/// must evaluate to exactly the concrete result; with nonlinear tail ops
/// the concrete result must lie within the reached leaf.
pub fn check_program(seed: u64, nonlinear: bool, points: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = gen_program(&mut rng, nonlinear);
    let ctx = Context::new();
    let sym = run_symbolic(&ctx, &p);
    for x in &sym.vars {
        x.check_invariants().map_err(|e| format!("seed {seed}: {e}"))?;
    }
    for _ in 0..points {
        let eps: Vec<f64> = p.inputs.iter().map(|_| dyadic(&mut rng, -64, 64, 64.0)).collect();
        let bools: Vec<bool> = (0..p.frees).map(|_| rng.gen_bool(0.5)).collect();
        let mut a = Assignment::new();
        for (id, e) in sym.noise.iter().zip(&eps) {
            a.set_noise(*id, *e);
        }
        for (idx, b) in sym.frees.iter().zip(&bools) {
            a.set_bool(*idx as _, *b);
        }
        let want = run_concrete(&p, &eps, &bools, &sym.tail_applied);
        for (i, (x, w)) in sym.vars.iter().zip(&want).enumerate() {
            if !nonlinear {
                let got = ctx.evaluate(x, &a).map_err(|e| format!("seed {seed}: {e}"))?;
                if got.as_real() != Some(*w) {
                    return Err(format!("seed {seed} var {i}: symbolic {got:?}, concrete {w}\n{p:?}"));
                }
            } else {
                let Leaf::Real(f) = leaf_at(&ctx, x, &a) else {
                    return Err(format!("seed {seed}: Boolean leaf"));
                };
                let center = f.eval(&|id| a.noise(id)).unwrap();
                let tol = f.err() + SLACK * (1.0 + w.abs());
                if !w.is_finite() || (w - center).abs() > tol {
                    return Err(format!(
                        "seed {seed} var {i}: concrete {w} outside {center} ± {}\n{p:?}",
                        f.err()
                    ));
                }
            }
        }
    }
    Ok(())
}

// ---- random LP systems -------------------------------------------------

fn gen_form(rng: &mut impl Rng, ids: &[NoiseSymbolId]) -> AffineForm {
    let mut terms = Vec::new();
    for &id in ids {
        if rng.gen_bool(0.7) {
            terms.push((id, rng.gen_range(-2.0..2.0)));
        }
    }
    AffineForm::from_parts(rng.gen_range(-1.5..1.5), terms, 0.0).unwrap()
}

fn gen_constraint(rng: &mut impl Rng, ids: &[NoiseSymbolId]) -> LinearConstraint {
    let sense = *[Sense::Lt, Sense::Le, Sense::Gt, Sense::Ge].choose(rng).unwrap();
    LinearConstraint::new(gen_form(rng, ids), sense, rng.gen_bool(0.7))
}

fn satisfied(cs: &[LinearConstraint], eps: &impl Fn(NoiseSymbolId) -> Option<f64>) -> bool {
    cs.iter().all(|c| {
        let v = c.form.eval(eps).unwrap();
        match c.effective_sense() {
            Some(s) => s.holds(v),
            None => v != 0.0,
        }
    })
}

fn within(outer: Interval, inner: Interval) -> bool {
    inner.lo >= outer.lo - SLACK && inner.hi <= outer.hi + SLACK
}

/// A random system of at most 6 constraints over at most 5 symbols.
/// Feasible samples must lie inside the tightened range, and adding a
/// constraint must never widen it.
pub fn check_lp(seed: u64, samples: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<NoiseSymbolId> = (0..rng.gen_range(1..=5)).map(|_| NoiseSymbolId::fresh()).collect();
    let n = rng.gen_range(0..=5);
    let cs: Vec<LinearConstraint> = (0..n).map(|_| gen_constraint(&mut rng, &ids)).collect();
    let objective = gen_form(&mut rng, &ids);
    let base = tighten(&objective, &cs);
    let mut hits = 0;
    for _ in 0..samples {
        let point: Vec<f64> = ids.iter().map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let eps = |id: NoiseSymbolId| ids.iter().position(|&i| i == id).map(|k| point[k]);
        if !satisfied(&cs, &eps) {
            continue;
        }
        hits += 1;
        let v = objective.eval(&eps).unwrap();
        match base {
            BoundsResult::Feasible { interval, .. } if interval.contains_with(v, SLACK) => {}
            ref other => {
                return Err(format!("seed {seed}: feasible value {v} not in {other:?}"));
            }
        }
    }
    let mut more = cs.clone();
    more.push(gen_constraint(&mut rng, &ids));
    match (&base, tighten(&objective, &more)) {
        (_, BoundsResult::Infeasible) => {}
        (BoundsResult::Feasible { interval: a, .. }, BoundsResult::Feasible { interval: b, .. })
            if within(*a, b) => {}
        (a, b) => return Err(format!("seed {seed}: adding a constraint widened {a:?} to {b:?}")),
    }
    Ok(hits)
}
