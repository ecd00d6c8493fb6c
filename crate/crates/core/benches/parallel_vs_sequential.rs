//! The data-parallel loops under both execution strategies: retrieval
//! scoring (one task per query), the per-epoch weight refresh (one task per
//! instance) and the per-instance loss pass over the training split.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array2;
use rand::Rng;

use sphash::datakit::LabelMatrix;
use sphash::encoder::{init_centers, init_params, BinaryCode};
use sphash::evaluator::{mean_average_precision, Direction, RetrievalTask};
use sphash::losses::LossConfig;
use sphash::pacer::refresh_weights;
use sphash::seed;
use sphash::trainer::instance_losses;
use sphash::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn random_codes(rng: &mut impl Rng, n: usize, bits: usize) -> Vec<BinaryCode> {
    (0..n)
        .map(|_| {
            let signs: Vec<i8> = (0..bits)
                .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
                .collect();
            BinaryCode::from_signs(&signs)
        })
        .collect()
}

fn retrieval(c: &mut Criterion) {
    let mut rng = seed::rng(1);
    let (queries, gallery, k) = (400, 2000, 8);
    let q_classes: Vec<usize> = (0..queries).map(|_| rng.random_range(0..k)).collect();
    let g_classes: Vec<usize> = (0..gallery).map(|_| rng.random_range(0..k)).collect();
    let task = RetrievalTask::new(
        Direction::I2T,
        random_codes(&mut rng, queries, 32),
        LabelMatrix::from_classes(&q_classes, k).unwrap(),
        random_codes(&mut rng, gallery, 32),
        LabelMatrix::from_classes(&g_classes, k).unwrap(),
    )
    .unwrap();
    let mut group = c.benchmark_group("map_400x2000");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| mean_average_precision(black_box(&task), exec))
        });
    }
    group.finish();
}

fn weight_refresh(c: &mut Criterion) {
    let mut rng = seed::rng(2);
    let losses: Vec<f64> = (0..200_000).map(|_| rng.random_range(0.0..3.0)).collect();
    let mut group = c.benchmark_group("refresh_200k");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| refresh_weights(black_box(&losses), 1.5, exec).unwrap())
        });
    }
    group.finish();
}

fn loss_pass(c: &mut Criterion) {
    let mut rng = seed::rng(3);
    let (n, k, dims) = (1400, 8, [64usize, 48]);
    let features: Vec<Array2<f64>> = dims
        .iter()
        .map(|&d| Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0)))
        .collect();
    let classes: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    let labels = LabelMatrix::from_classes(&classes, k).unwrap();
    let params = init_params(&dims, 256, 32, 4).unwrap();
    let centers = init_centers(k, 32, 5).unwrap();
    let cfg = LossConfig::default();
    let mut group = c.benchmark_group("instance_losses_1400");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| instance_losses(black_box(&params), &centers, &features, &labels, &cfg, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, retrieval, weight_refresh, loss_pass);
criterion_main!(benches);
