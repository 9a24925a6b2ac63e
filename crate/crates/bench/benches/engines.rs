use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hopl_bench::*;
use hopl_core::{Engine, Program};

fn nrev(c: &mut Criterion) {
    let list: Vec<String> = (1..=30).map(|i| format!("c{i}")).collect();
    let f = Fixture::new(NREV, &format!("nrev ({} :: nil) R", list.join(" :: ")));
    let mut g = c.benchmark_group("nrev30");
    for e in [Engine::Interp, Engine::Vm] {
        let mut store = None;
        g.bench_function(BenchmarkId::from_parameter(e), |b| b.iter(|| f.exhaust(e, &mut store)));
    }
    g.finish();
}

fn mapfun_reverse(c: &mut Criterion) {
    let f = Fixture::new(MAPFUN, "mapfun (a :: b :: nil) F ((g a a) :: (g a b) :: nil)");
    let mut g = c.benchmark_group("mapfun_reverse");
    for e in [Engine::Interp, Engine::Vm] {
        let mut store = None;
        g.bench_function(BenchmarkId::from_parameter(e), |b| b.iter(|| f.exhaust(e, &mut store)));
    }
    g.finish();
}

fn reduction(c: &mut Criterion) {
    let (p, _) = Program::from_source(CHURCH_SIG).unwrap();
    let mut g = c.benchmark_group("church_tower");
    for depth in [2, 3] {
        let t = church_tower(&p, depth);
        g.bench_with_input(BenchmarkId::from_parameter(depth), &t, |b, t| b.iter(|| normalize(&p, t)));
    }
    g.finish();
}

criterion_group!(benches, nrev, mapfun_reverse, reduction);
criterion_main!(benches);
