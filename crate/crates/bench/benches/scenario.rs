use criterion::{criterion_group, criterion_main, Criterion};
use deep_mpc_bench::wing_rock;

fn short_run(c: &mut Criterion) {
    let scenario = wing_rock(60);
    let mut group = c.benchmark_group("scenario");
    group.sample_size(10);
    group.bench_function("wing_rock_60_steps", |b| b.iter(|| scenario.run().unwrap()));
    group.finish();
}

criterion_group!(benches, short_run);
criterion_main!(benches);
