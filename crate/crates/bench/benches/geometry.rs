use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use patchwork_bench::{random_model, random_points, tangent_halfspaces};
use patchwork_core::extract::{chebyshev_center, extract_tropical, marching_cubes, sample_grid, ExtractOptions};
use patchwork_core::metrics::compare_point_sets;
use patchwork_core::pipeline::extraction_box;
use patchwork_core::shapes::dodecahedron_model;

fn lp(c: &mut Criterion) {
    let mut group = c.benchmark_group("chebyshev_center");
    for k in [16, 128, 1024] {
        let hs = tangent_halfspaces(k, 1);
        group.bench_with_input(BenchmarkId::from_parameter(k), &hs, |b, hs| {
            b.iter(|| chebyshev_center(black_box(hs), 3))
        });
    }
    group.finish();
}

fn tropical(c: &mut Criterion) {
    let dodeca = dodecahedron_model(0.8, 100.0).unwrap();
    let opts3 = ExtractOptions::new(3);
    c.bench_function("extract_tropical/dodecahedron", |b| b.iter(|| extract_tropical(black_box(&dodeca), &opts3)));

    let opts2 = ExtractOptions::new(2);
    let mut group = c.benchmark_group("extract_tropical/random2d");
    group.sample_size(20);
    for n in [8, 32] {
        let model = random_model(2, n, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &model, |b, m| b.iter(|| extract_tropical(m, &opts2)));
    }
    group.finish();
}

fn marching(c: &mut Criterion) {
    let model = dodecahedron_model(0.8, 100.0).unwrap();
    let bbox = extraction_box(3);
    let mut group = c.benchmark_group("marching_cubes");
    group.sample_size(10);
    for res in [32, 64] {
        group.bench_with_input(BenchmarkId::from_parameter(res), &res, |b, &res| {
            b.iter(|| marching_cubes(&sample_grid(&model, res, &bbox).unwrap()))
        });
    }
    group.finish();
}

fn metrics(c: &mut Criterion) {
    let a = random_points(3, 20_000, 3);
    let b = random_points(3, 20_000, 4);
    let mut group = c.benchmark_group("metrics");
    group.sample_size(10);
    group.bench_function("compare_point_sets/20k", |bench| {
        bench.iter(|| compare_point_sets(black_box(&a), black_box(&b), Some(0.002)))
    });
    group.finish();
}

criterion_group!(benches, lp, tropical, marching, metrics);
criterion_main!(benches);
