use aadd::scenarios::WaterLevelParams;
use aadd::sim::oracle;
use aadd::{Aadd, AffineForm, Context, ContextOptions, Parallelism, Sense};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [Parallelism; 2] = [Parallelism::Sequential, Parallelism::Parallel];

fn context(mode: Parallelism) -> Context {
    Context::with_options(ContextOptions {
        parallelism: mode,
        ..ContextOptions::default()
    })
}

/// Sum of `n` correlated branches; up to 2^n paths, each needing an LP.
fn branchy(ctx: &Context, n: usize) -> Aadd {
    let eps: Vec<AffineForm> = (0..n)
        .map(|_| AffineForm::new_uncertain(0.0, 1.0).unwrap())
        .collect();
    let mut x = Aadd::constant(0.0);
    for k in 0..n {
        let g = eps[k].add(&eps[(k + 1) % n].scale(0.3));
        let c = ctx.compare(&Aadd::real(g), Sense::Gt).unwrap();
        let step = aadd::dd::ite(&c, &Aadd::real(eps[k].add_const(1.0)), &Aadd::constant(-1.0)).unwrap();
        x = x.add(&step).unwrap();
    }
    x
}

fn leaf_ranges(c: &mut Criterion) {
    let mut group = c.benchmark_group("leaf_ranges");
    for mode in MODES {
        let ctx = context(mode);
        let x = branchy(&ctx, 8);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &x, |b, x| {
            b.iter(|| ctx.per_leaf_ranges(x).unwrap())
        });
    }
    group.finish();
}

fn waterlevel(c: &mut Criterion) {
    let sc = WaterLevelParams { horizon: 10.0, ..Default::default() }
        .scenario(true, true)
        .unwrap();
    let mut group = c.benchmark_group("waterlevel_symbolic");
    group.sample_size(10);
    for mode in MODES {
        group.bench_function(format!("{mode:?}"), |b| {
            b.iter(|| sc.run_symbolic(&context(mode), &sc.run_options()).unwrap())
        });
    }
    group.finish();

    let points = oracle::random_samples(sc.uncertainties(), 64, 1);
    let mut group = c.benchmark_group("waterlevel_numeric_points");
    group.sample_size(10);
    for mode in MODES {
        group.bench_function(format!("{mode:?}"), |b| {
            b.iter(|| oracle::run_all(mode, &points, |p| sc.run_numeric(p, &sc.run_options())).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, leaf_ranges, waterlevel);
criterion_main!(benches);
