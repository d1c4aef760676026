use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use refd_bench::{default_config, large_dataset, paper_shape_dataset};
use refd_core::{
    allocate_points, compute_factor_stats, pearson_matrix, run_rating, screen_dataset, sensitivity,
    IntervalTable, StdDevMode,
};

fn bench_stats(c: &mut Criterion) {
    let dataset = paper_shape_dataset(7);
    let column = dataset.factor_column(&dataset.factors[0].id);
    c.bench_function("factor_stats/83", |b| {
        b.iter(|| compute_factor_stats(black_box(&column), StdDevMode::Population).unwrap())
    });
}

fn bench_allocation(c: &mut Criterion) {
    let dataset = paper_shape_dataset(7);
    let column = dataset.factor_column(&dataset.factors[0].id);
    let stats = compute_factor_stats(&column, StdDevMode::Population).unwrap();
    let table = IntervalTable::standard();
    c.bench_function("allocate_points/83", |b| {
        b.iter(|| {
            column
                .iter()
                .map(|&v| allocate_points(black_box(v), &stats, &table) as u64)
                .sum::<u64>()
        })
    });
}

fn bench_pearson(c: &mut Criterion) {
    let dataset = paper_shape_dataset(7);
    let ids = dataset.factor_ids();
    let columns: Vec<Vec<f64>> = ids.iter().map(|id| dataset.factor_column(id)).collect();
    c.bench_function("pearson_matrix/20x83", |b| {
        b.iter(|| pearson_matrix(black_box(&ids), black_box(&columns)).unwrap())
    });
}

fn bench_rating(c: &mut Criterion) {
    let config = default_config();
    let dataset = paper_shape_dataset(7);
    c.bench_function("run_rating/83x20", |b| {
        b.iter(|| run_rating(black_box(&dataset), &config).unwrap())
    });
    let large = large_dataset(7);
    c.bench_function("run_rating/830x40", |b| {
        b.iter(|| run_rating(black_box(&large), &config).unwrap())
    });
}

fn bench_screening(c: &mut Criterion) {
    let dataset = paper_shape_dataset(7);
    c.bench_function("screen_dataset/20x83", |b| {
        b.iter(|| screen_dataset(black_box(&dataset), 0.7).unwrap())
    });
}

fn bench_sensitivity(c: &mut Criterion) {
    let config = default_config();
    let dataset = paper_shape_dataset(7);
    c.bench_function("sensitivity/83x20x20trials", |b| {
        b.iter(|| sensitivity(black_box(&dataset), &config, 0.2, 20, 42).unwrap())
    });
}

criterion_group!(
    benches,
    bench_stats,
    bench_allocation,
    bench_pearson,
    bench_rating,
    bench_screening,
    bench_sensitivity
);
criterion_main!(benches);
