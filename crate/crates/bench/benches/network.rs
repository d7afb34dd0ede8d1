use criterion::{criterion_group, criterion_main, Criterion};
use deep_mpc::trainer::{dataset_loss, gradient};
use deep_mpc::Vector;
use deep_mpc_bench::network_and_data;
use std::hint::black_box;

fn forward_backward(c: &mut Criterion) {
    let (net, k, data) = network_and_data(256);
    let x = Vector::from_vec(vec![0.1, -0.2]);
    c.bench_function("features_forward", |b| b.iter(|| net.forward_features(black_box(&x))));
    c.bench_function("loss_256", |b| b.iter(|| dataset_loss(black_box(&data), &net, &k).unwrap()));
    c.bench_function("gradient_256", |b| b.iter(|| gradient(black_box(&data), &net, &k)));
}

criterion_group!(benches, forward_backward);
criterion_main!(benches);
