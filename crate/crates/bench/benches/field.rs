use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use patchwork_bench::{random_model, random_points, sphere_samples};
use patchwork_core::field::{eval_tropical_values, eval_values, grad_params};
use patchwork_core::init::geometric_init;
use patchwork_core::train::{evaluate_losses, sample_off_surface, LossToggles, SurfaceBatch};
use patchwork_core::BBox;

fn eval(c: &mut Criterion) {
    let points = random_points(3, 4096, 1);
    let mut group = c.benchmark_group("eval");
    group.throughput(Throughput::Elements(points.len() as u64));
    for n in [16, 256, 2048] {
        let model = random_model(3, n, 2);
        group.bench_with_input(BenchmarkId::new("smooth", n), &model, |b, m| {
            b.iter(|| eval_values(m, black_box(&points)))
        });
        group.bench_with_input(BenchmarkId::new("tropical", n), &model, |b, m| {
            b.iter(|| eval_tropical_values(m, black_box(&points)))
        });
    }
    group.finish();
}

fn gradients(c: &mut Criterion) {
    let model = random_model(3, 512, 3);
    c.bench_function("grad_params/n=512", |b| b.iter(|| grad_params(&model, black_box(&[0.1, -0.2, 0.3]))));

    let samples = sphere_samples(1024, 4);
    let model = geometric_init(&samples, 200.0, 75.0).unwrap();
    let off = sample_off_surface(&BBox::symmetric(3, 1.0), 1024, &mut patchwork_bench::rng(5));
    c.bench_function("losses/m=1024", |b| {
        b.iter(|| {
            let batch = SurfaceBatch {
                points: black_box(&samples.points),
                normals: &samples.normals,
            };
            evaluate_losses(&model, batch, &off, LossToggles::default())
        })
    });
}

fn init(c: &mut Criterion) {
    let samples = sphere_samples(4096, 6);
    c.bench_function("geometric_init/m=4096", |b| b.iter(|| geometric_init(black_box(&samples), 200.0, 75.0)));
}

criterion_group!(benches, eval, gradients, init);
criterion_main!(benches);
