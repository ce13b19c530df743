use criterion::{criterion_group, criterion_main, Criterion};

use locdiv_bench::{dirichlet_state, haar_state};
use locdiv_core::{assemble_g, check_conditions, construct, Context};

fn haar(c: &mut Criterion) {
    let mut group = c.benchmark_group("construct");
    group.sample_size(10);
    let st = haar_state(6);
    let ctx = Context::new(&st).unwrap();
    group.bench_function("haar_k6", |b| b.iter(|| construct(&ctx, st.clone()).unwrap()));
    let built = construct(&ctx, st.clone()).unwrap().state;
    group.bench_function("haar_k6_check", |b| b.iter(|| check_conditions(&ctx, &built).unwrap()));
    group.bench_function("haar_k6_assemble", |b| b.iter(|| assemble_g(&built)));
    let dst = dirichlet_state();
    let dctx = Context::new(&dst).unwrap();
    group.bench_function("dirichlet_k2", |b| b.iter(|| construct(&dctx, dst.clone()).unwrap()));
    group.finish();
}

criterion_group!(benches, haar);
criterion_main!(benches);
