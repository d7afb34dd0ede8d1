use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use deep_mpc::mpc::solve_tracking_mpc;
use deep_mpc::ocp::{solve_qp, QpSettings};
use deep_mpc::Vector;
use deep_mpc_bench::{box_qp, wing_rock};
use std::hint::black_box;

fn qp(c: &mut Criterion) {
    let settings = QpSettings::default();
    let mut group = c.benchmark_group("qp");
    for (n, k) in [(20, 40), (60, 120)] {
        let problem = box_qp(n, k);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{k}")), &problem, |b, p| {
            b.iter(|| solve_qp(black_box(p), &settings).unwrap())
        });
    }
    group.finish();
}

fn tracking_step(c: &mut Criterion) {
    let s = wing_rock(1);
    let x = s.config.x0();
    let u_a = Vector::zeros(1);
    c.bench_function("tracking_mpc_step", |b| {
        b.iter(|| solve_tracking_mpc(&s.model, black_box(&x), &u_a, &s.reference, 0, &s.mpc, &s.tight).unwrap())
    });
}

criterion_group!(benches, qp, tracking_step);
criterion_main!(benches);
