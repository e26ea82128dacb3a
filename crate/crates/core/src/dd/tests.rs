use super::*;
use crate::affine::Interval;
use crate::lp::Sense;

fn close(a: Interval, lo: f64, hi: f64) -> bool {
    (a.lo - lo).abs() < 1e-9 && (a.hi - hi).abs() < 1e-9
}

/// `b = 3 + e; if (b > 3) b += 10; else b -= 10;`
fn branch_example(ctx: &Context) -> (Aadd, NoiseSymbolId) {
    let (form, e) = AffineForm::new_uncertain_with_symbol(3.0, 1.0).unwrap();
    let b = Aadd::real(form);
    let cond = ctx.compare_with(&b, Sense::Gt, &Aadd::constant(3.0)).unwrap();
    let t = b.add_const(10.0).unwrap();
    let f = b.add_const(-10.0).unwrap();
    (ite(&cond, &t, &f).unwrap(), e)
}

#[test]
fn branch_example_has_one_condition_and_two_leaves() {
    let ctx = Context::new();
    let (b, e) = branch_example(&ctx);
    assert_eq!(ctx.conditions().len(), 1);
    assert_eq!(b.leaf_count(), 2);
    let paths = b.paths();
    let hi = paths[0].1;
    let lo = paths[1].1;
    let mut want_hi = AffineForm::constant(13.0);
    want_hi = want_hi.add(&AffineForm::from_parts(0.0, [(e, 1.0)], 0.0).unwrap());
    let want_lo = want_hi.add_const(-20.0);
    assert_eq!(hi, &Leaf::Real(want_hi));
    assert_eq!(lo, &Leaf::Real(want_lo));
    b.check_invariants().unwrap();
}

#[test]
fn branch_example_ranges_and_hull() {
    let ctx = Context::new();
    let (b, _) = branch_example(&ctx);
    let ranges = ctx.per_leaf_ranges(&b).unwrap();
    assert_eq!(ranges.len(), 2);
    assert!(close(ranges[0].interval, 13.0, 14.0));
    // b - 10 with b = 3 + e and e <= 0
    assert!(close(ranges[1].interval, -8.0, -7.0));
    assert!(close(ctx.overall_range(&b).unwrap(), -8.0, 14.0));
}

#[test]
fn branch_example_evaluates_per_side() {
    let ctx = Context::new();
    let (b, e) = branch_example(&ctx);
    let mut a = Assignment::new();
    a.set_noise(e, 0.5);
    assert_eq!(ctx.evaluate(&b, &a).unwrap(), Concrete::Real(13.5));
    a.set_noise(e, -0.5);
    assert_eq!(ctx.evaluate(&b, &a).unwrap(), Concrete::Real(-7.5));
}

#[test]
fn evaluate_needs_every_symbol() {
    let ctx = Context::new();
    let (b, _) = branch_example(&ctx);
    assert!(matches!(
        ctx.evaluate(&b, &Assignment::new()),
        Err(Error::MissingSymbol(_))
    ));
    assert_eq!(
        ctx.evaluate(&Aadd::constant(4.0), &Assignment::new()).unwrap(),
        Concrete::Real(4.0)
    );
}

#[test]
fn adding_a_constant_keeps_structure() {
    let ctx = Context::new();
    let (b, _) = branch_example(&ctx);
    let c = b.add(&Aadd::constant(1.0)).unwrap();
    assert_eq!(c.top_index(), b.top_index());
    let ranges = ctx.per_leaf_ranges(&c).unwrap();
    assert!(close(ranges[0].interval, 14.0, 15.0));
    assert!(close(ranges[1].interval, -7.0, -6.0));
    let same = b.add(&Aadd::constant(0.0)).unwrap();
    assert_eq!(same.paths().len(), 2);
    for ((_, x), (_, y)) in same.paths().iter().zip(b.paths().iter()) {
        assert_eq!(x, y);
    }
}

#[test]
fn compare_on_decided_terminal() {
    let ctx = Context::new();
    let r = ctx.compare(&Aadd::constant(-1.0), Sense::Lt).unwrap();
    assert_eq!(r.as_bool(), Some(true));
    assert!(ctx.conditions().is_empty());
}

#[test]
fn only_the_path_lp_decides() {
    let ctx = Context::new();
    let (e1, e) = AffineForm::new_uncertain_with_symbol(0.0, 1.0).unwrap();
    let guard = ctx.compare(&Aadd::real(e1.clone()), Sense::Gt).unwrap();
    let x = ite(
        &guard,
        &Aadd::real(e1.add_const(0.5)),
        &Aadd::constant(-1.0),
    )
    .unwrap();
    let r = ctx.compare(&x, Sense::Gt).unwrap();
    // the guard is the only condition: both sides were decided
    assert_eq!(ctx.conditions().len(), 1);
    let mut a = Assignment::new();
    a.set_noise(e, 0.3);
    assert_eq!(ctx.evaluate(&r, &a).unwrap(), Concrete::Bool(true));

    let plain = Context::with_options(ContextOptions {
        refine: false,
        ..ContextOptions::default()
    });
    let g = plain.compare(&Aadd::real(e1.clone()), Sense::Gt).unwrap();
    let x = ite(&g, &Aadd::real(e1.add_const(0.5)), &Aadd::constant(-1.0)).unwrap();
    plain.compare(&x, Sense::Gt).unwrap();
    assert_eq!(plain.conditions().len(), 2);
}

#[test]
fn nested_branch_gives_three_leaves() {
    let ctx = Context::new();
    let (b, e) = AffineForm::new_uncertain_with_symbol(0.0, 1.0).unwrap();
    let b = Aadd::real(b);
    let outer = ctx.compare(&b, Sense::Gt).unwrap();
    let inner = ctx.compare_with(&b, Sense::Gt, &Aadd::constant(0.5)).unwrap();
    let t = ite(&inner, &b.scale(2.0).unwrap(), &b.add_const(1.0).unwrap()).unwrap();
    let r = ite(&outer, &t, &b.neg().unwrap()).unwrap();
    r.check_invariants().unwrap();
    assert_eq!(r.leaf_count(), 3);
    for v in [-0.9, -0.2, 0.2, 0.4, 0.6, 0.95] {
        let mut a = Assignment::new();
        a.set_noise(e, v);
        let want = if v > 0.0 {
            if v > 0.5 {
                2.0 * v
            } else {
                v + 1.0
            }
        } else {
            -v
        };
        let got = ctx.evaluate(&r, &a).unwrap().as_real().unwrap();
        assert!((got - want).abs() < 1e-12, "{v}: {got} vs {want}");
    }
}

#[test]
fn inner_compare_on_infeasible_side_is_not_created() {
    let ctx = Context::new();
    let (b, _) = AffineForm::new_uncertain_with_symbol(0.0, 1.0).unwrap();
    let b = Aadd::real(b);
    let pos = ctx.compare(&b, Sense::Gt).unwrap();
    // under b > 0 the form b is decided for `> -0.5`
    let x = ite(&pos, &b, &Aadd::constant(1.0)).unwrap();
    let r = ctx.compare_with(&x, Sense::Gt, &Aadd::constant(-0.5)).unwrap();
    assert_eq!(r.as_bool(), Some(true));
}

#[test]
fn infeasible_path_is_skipped_in_ranges_and_pruned() {
    let ctx = Context::new();
    let (b, _) = AffineForm::new_uncertain_with_symbol(0.0, 1.0).unwrap();
    let b = Aadd::real(b);
    let pos = ctx.compare(&b, Sense::Gt).unwrap();
    let neg = ctx.compare(&b, Sense::Le).unwrap();
    // under pos, neg is a separate condition, so its true side is infeasible
    let x = ite(
        &pos,
        &ite(&neg, &Aadd::constant(100.0), &Aadd::constant(1.0)).unwrap(),
        &Aadd::constant(2.0),
    )
    .unwrap();
    assert_eq!(x.path_count(), 3);
    let ranges = ctx.per_leaf_ranges(&x).unwrap();
    assert_eq!(ranges.len(), 2);
    assert!(close(ctx.overall_range(&x).unwrap(), 1.0, 2.0));
    let reduced = ctx.reduce(&x).unwrap();
    assert_eq!(reduced.path_count(), 2);
    assert!(close(ctx.overall_range(&reduced).unwrap(), 1.0, 2.0));
}

#[test]
fn contradictory_literals_are_infeasible() {
    let ctx = Context::new();
    let (b, _) = AffineForm::new_uncertain_with_symbol(0.0, 1.0).unwrap();
    let b = Aadd::real(b);
    let c1 = ctx.compare(&b, Sense::Gt).unwrap().top_index();
    let c2 = ctx.compare(&b, Sense::Lt).unwrap().top_index();
    let lit = |index, polarity| Literal { index, polarity };
    assert!(!ctx.path_feasible(&[lit(c1, true), lit(c2, true)]).unwrap());
    assert!(ctx.path_feasible(&[lit(c1, true), lit(c2, false)]).unwrap());
    assert!(ctx.path_feasible(&[lit(c1, false), lit(c2, false)]).unwrap());
}

#[test]
fn empty_hull_is_inconsistent() {
    assert!(matches!(range::hull(&[]), Err(Error::Inconsistent)));
}

#[test]
fn mixed_kinds_are_rejected() {
    let ctx = Context::new();
    let f = ctx.free_bool("f");
    assert!(matches!(
        f.add(&Aadd::constant(1.0)),
        Err(Error::LeafKind(_))
    ));
    assert!(ite(&Aadd::constant(1.0), &f, &f).is_err());
    assert!(ite(&f, &f, &Aadd::constant(1.0)).is_err());
    assert!(ctx.compare(&f, Sense::Lt).is_err());
    assert!(Aadd::constant(1.0).not().is_err());
}

#[test]
fn ite_on_constant_condition() {
    let t = Aadd::constant(1.0);
    let e = Aadd::constant(2.0);
    assert!(ite(&Aadd::boolean(true), &t, &e).unwrap().same_node(&t));
    assert!(ite(&Aadd::boolean(false), &t, &e).unwrap().same_node(&e));
}

#[test]
fn and_with_true_is_identity() {
    let ctx = Context::new();
    let f = ctx.free_bool("f");
    assert!(Aadd::boolean(true).and(&f).unwrap().same_node(&f));
    assert_eq!(Aadd::boolean(false).and(&f).unwrap().as_bool(), Some(false));
}

#[test]
fn or_with_complement_reduces_to_true() {
    let ctx = Context::new();
    let f = ctx.free_bool("f");
    let r = f.or(&f.not().unwrap()).unwrap();
    assert_eq!(ctx.reduce(&r).unwrap().as_bool(), Some(true));
}

#[test]
fn double_negation_on_all_assignments() {
    let ctx = Context::new();
    let a = ctx.free_bool("a");
    let b = ctx.free_bool("b");
    let c = ctx.free_bool("c");
    let x = a.and(&b).unwrap().xor(&c).unwrap();
    let y = x.not().unwrap().not().unwrap();
    for bits in 0..8u32 {
        let mut asg = Assignment::new();
        for i in 0..3 {
            asg.set_bool(i, bits >> i & 1 == 1);
        }
        assert_eq!(ctx.evaluate(&x, &asg).unwrap(), ctx.evaluate(&y, &asg).unwrap());
    }
}

#[test]
fn redundant_test_is_removed() {
    let ctx = Context::new();
    let c = ctx.free_bool("c");
    let v = Aadd::uncertain(1.0, 2.0).unwrap();
    let r = ite(&c, &v, &v).unwrap();
    assert!(r.same_node(&v));
    // built by hand, the redundant node survives until reduce
    let Node::Branch { index, .. } = c.node() else { panic!() };
    let copy = Aadd::real(v.as_real().unwrap().clone());
    let raw = Aadd(Arc::new(Node::Branch {
        index: *index,
        hi: v.clone(),
        lo: copy,
        kind: LeafKind::Real,
    }));
    assert_eq!(raw.node_count(), 3);
    assert_eq!(ctx.reduce(&raw).unwrap().node_count(), 1);
}

#[test]
fn near_equal_leaves_are_shared() {
    let ctx = Context::new();
    let c = ctx.free_bool("c");
    let d = ctx.free_bool("d");
    let Node::Branch { index: ci, .. } = c.node() else { panic!() };
    let Node::Branch { index: di, .. } = d.node() else { panic!() };
    let inner1 = Aadd::branch(*di, Aadd::constant(1.0), Aadd::constant(2.0)).unwrap();
    let inner2 = Aadd::branch(*di, Aadd::constant(1.0 + 1e-12), Aadd::constant(2.0)).unwrap();
    let x = Aadd::branch(*ci, inner1, inner2).unwrap();
    assert_eq!(x.leaf_count(), 4);
    let r = reduce::reduce_structural(&x);
    assert_eq!(r.leaf_count(), 2);
    assert_eq!(r.top_index(), *di);
}

#[test]
fn dump_is_deterministic_and_renders_dot() {
    let ctx = Context::new();
    let (b, _) = branch_example(&ctx);
    let d1 = DiagramDump::new(&b, &ctx);
    let d2 = DiagramDump::new(&b, &ctx);
    assert_eq!(d1, d2);
    assert_eq!(d1.nodes.len(), 3);
    assert_eq!(d1.conditions.len(), 1);
    let json = serde_json::to_string(&d1).unwrap();
    let back: DiagramDump = serde_json::from_str(&json).unwrap();
    assert_eq!(back, d1);
    let dot = d1.to_dot();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("style=dashed"));
    assert!(dot.contains("> 0"));
}

#[test]
fn reachable_bools_follow_feasibility() {
    let ctx = Context::new();
    let (b, _) = AffineForm::new_uncertain_with_symbol(0.0, 1.0).unwrap();
    let r = ctx.compare(&Aadd::real(b), Sense::Gt).unwrap();
    assert_eq!(ctx.reachable_bools(&r).unwrap(), (true, true));
    assert_eq!(
        ctx.reachable_bools(&Aadd::boolean(true)).unwrap(),
        (false, true)
    );
}

#[test]
fn lp_log_records_instances() {
    use std::sync::{Arc as StdArc, Mutex};
    struct Sink(StdArc<Mutex<Vec<u8>>>);
    impl std::io::Write for Sink {
        fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
            self.0.lock().unwrap().extend_from_slice(buf);
            Ok(buf.len())
        }
        fn flush(&mut self) -> std::io::Result<()> {
            Ok(())
        }
    }
    let buf = StdArc::new(Mutex::new(Vec::new()));
    let ctx = Context::new();
    ctx.set_lp_log(Box::new(Sink(buf.clone())));
    let (b, _) = branch_example(&ctx);
    ctx.overall_range(&b).unwrap();
    ctx.flush_lp_log().unwrap();
    let text = String::from_utf8(buf.lock().unwrap().clone()).unwrap();
    assert!(text.contains("feasible"));
    assert!(ctx.stats().lp_calls() >= 2);
}
