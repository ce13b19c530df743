use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use locdiv_bench::comb;
use locdiv_core::coord::{ratio, Index};
use locdiv_core::kernels::{certify_below, HaarDyadic, KernelFamily, TrigFamily};
use locdiv_core::{Interval, IntervalSet};

fn apply_indicator(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply_indicator");
    let s = comb(8);
    for n in [64u64, 1024, 4096] {
        let d = TrigFamily::dirichlet();
        group.bench_with_input(BenchmarkId::new("dirichlet", n), &n, |b, &n| {
            let n = Index::new(n);
            b.iter(|| d.apply_indicator_f64(&n, &s, black_box(0.3)).unwrap())
        });
    }
    let h = HaarDyadic::new();
    let hs = IntervalSet::from_intervals([
        Interval::new(ratio(1, 7), ratio(2, 7)).unwrap(),
        Interval::new(ratio(3, 7), ratio(5, 7)).unwrap(),
    ]);
    for e in [10u64, 100, 400] {
        group.bench_with_input(BenchmarkId::new("haar_pow2", e), &e, |b, &e| {
            let n = Index::pow2(e);
            let x = ratio(2, 7);
            b.iter(|| h.apply_indicator(&n, &hs, black_box(&x)).unwrap())
        });
    }
    group.finish();
}

fn certification(c: &mut Criterion) {
    let d = TrigFamily::dirichlet();
    let s = IntervalSet::from_f64_pairs(&[(-1.0, 1.0)]).unwrap();
    let iv = Interval::from_f64(-0.5, 0.5).unwrap();
    c.bench_function("certify_below/dirichlet_256", |b| {
        let n = Index::new(256);
        b.iter(|| certify_below(&d, &n, &s, &iv, 1.0, 0.05, 64).unwrap())
    });
}

fn set_algebra(c: &mut Criterion) {
    let a = comb(64);
    let b = IntervalSet::from_f64_pairs(&[(-2.0, -0.5), (0.25, 2.75)]).unwrap();
    c.bench_function("interval_set/subtract_64", |bch| bch.iter(|| black_box(&a).subtract(&b)));
    c.bench_function("interval_set/union_64", |bch| bch.iter(|| black_box(&a).union(&b)));
}

criterion_group!(benches, apply_indicator, certification, set_algebra);
criterion_main!(benches);
