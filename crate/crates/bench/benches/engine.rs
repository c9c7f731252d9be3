use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gossamer_bench::{comparisons, limits, CHAIN};
use gossamer_core::gnum;
use gossamer_core::limit::{limit, newton_sqrt2_demo, sqrt2_digits};
use gossamer_core::relate::{compare, parse_chain, verify_chain};
use gossamer_core::{Assumptions, Context, Point};

fn bench_compare(c: &mut Criterion) {
    let mut group = c.benchmark_group("compare");
    for k in comparisons() {
        let g = k.g.as_ref().unwrap();
        group.bench_function(k.name, |b| b.iter(|| compare(black_box(&k.f), g, &k.point, &k.assume).unwrap()));
    }
    group.finish();
}

fn bench_limit(c: &mut Criterion) {
    let mut group = c.benchmark_group("limit");
    for k in limits() {
        group.bench_function(k.name, |b| b.iter(|| limit(black_box(&k.f), &k.point, &k.assume).unwrap()));
    }
    group.finish();
}

fn bench_series(c: &mut Criterion) {
    let e = Context::new().with_var("x").parse("exp(x)/(1 - x)").unwrap().expr;
    let none = Assumptions::new();
    let mut group = c.benchmark_group("series");
    for terms in [4, 8, 16] {
        group.bench_with_input(BenchmarkId::from_parameter(terms), &terms, |b, &t| {
            b.iter(|| gnum::expand(black_box(&e), &Point::ZeroPlus, &none, t).unwrap())
        });
    }
    group.finish();
}

fn bench_chain(c: &mut Criterion) {
    let chain = parse_chain(CHAIN).unwrap();
    c.bench_function("verify_chain", |b| b.iter(|| assert!(verify_chain(black_box(&chain)).all_ok())));
}

fn bench_sqrt2(c: &mut Criterion) {
    c.bench_function("sqrt2_newton_5", |b| b.iter(|| sqrt2_digits(&newton_sqrt2_demo(black_box(5)))));
}

criterion_group!(benches, bench_compare, bench_limit, bench_series, bench_chain, bench_sqrt2);
criterion_main!(benches);
