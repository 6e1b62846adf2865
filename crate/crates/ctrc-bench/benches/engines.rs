use std::time::Duration;

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use ctrc_bench::{system, tower, EVEN, FIB};
use ctrc_core::cs::CsEngine;
use ctrc_core::labeled::{label, Engine};
use ctrc_core::transform::{transform, xi, ApMode, Star};
use ctrc_core::SearchBudget;

fn bench_labeled_dh(c: &mut Criterion) {
    let mut group = c.benchmark_group("labeled-dh");
    group
        .sample_size(20)
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(5));
    let sys = system(EVEN);
    let t = label(&sys, &sys.parse_term(&tower("even", 5)).unwrap());
    group.bench_function("even tower 5", |b| {
        b.iter(|| {
            let mut engine = Engine::new(&sys, SearchBudget::default());
            black_box(engine.dh(black_box(&t)).unwrap())
        })
    });
    let fib = system(FIB);
    let t = label(&fib, &fib.parse_term(&tower("fib", 3)).unwrap());
    group.bench_function("fib tower 3", |b| {
        b.iter(|| {
            let mut engine = Engine::new(&fib, SearchBudget::default());
            black_box(engine.dh(black_box(&t)).unwrap())
        })
    });
    group.finish();
}

fn bench_transform(c: &mut Criterion) {
    let sys = system(EVEN);
    c.bench_function("transform even/odd", |b| {
        b.iter(|| black_box(transform(black_box(&sys), ApMode::Full).unwrap()))
    });
}

fn bench_cs_dh(c: &mut Criterion) {
    let mut group = c.benchmark_group("cs-dh");
    group
        .sample_size(20)
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(5));
    let sys = system(EVEN);
    let trs = transform(&sys, ApMode::Full).unwrap();
    let t = xi(
        &sys,
        &trs.hsig,
        &sys.parse_term(&tower("even", 5)).unwrap(),
        Star::Top,
    );
    group.bench_function("even tower 5", |b| {
        b.iter(|| {
            let mut engine = CsEngine::new(&trs, SearchBudget::default());
            black_box(engine.dh(black_box(&t)))
        })
    });
    group.finish();
}

criterion_group!(benches, bench_labeled_dh, bench_transform, bench_cs_dh);
criterion_main!(benches);
