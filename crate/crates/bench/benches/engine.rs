use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use shadow_core::analysis::cube14_caps;
use shadow_core::constructions::{
    build_cube14, build_lemma, random_equal_balls, random_exterior_point,
};
use shadow_core::rng::seeded;
use shadow_core::sphere_cover::DEFAULT_FALSIFIER_GRID;
use shadow_core::{cover_circle, cover_sphere, point_shadow, Arc, ArcSet, Period, DEFAULT_TOL};

fn circle(c: &mut Criterion) {
    let arcs = (0..64)
        .map(|k| Arc::new(k as f64 * 0.37, 0.02 + (k % 5) as f64 * 0.01, Period::Pi))
        .collect();
    let set = ArcSet::new(Period::Pi, arcs).unwrap();
    c.bench_function("cover_circle/64 arcs", |b| {
        b.iter(|| cover_circle(black_box(&set), DEFAULT_TOL))
    });
}

fn sphere(c: &mut Criterion) {
    let caps = cube14_caps(&build_cube14().unwrap()).unwrap();
    let mut g = c.benchmark_group("cover_sphere");
    g.sample_size(20);
    g.bench_function("cube14", |b| {
        b.iter(|| cover_sphere(black_box(&caps), DEFAULT_TOL, DEFAULT_FALSIFIER_GRID))
    });
    g.finish();
}

fn shadow(c: &mut Criterion) {
    let lemma = build_lemma(1.0).unwrap();
    let centroid = lemma.centroid();
    c.bench_function("point_shadow/lemma centroid", |b| {
        b.iter(|| point_shadow(&lemma.scene, black_box(&centroid), DEFAULT_TOL))
    });

    let scene = random_equal_balls(3, 3, 1.0, 5).unwrap();
    let x = random_exterior_point(&scene, 6.0, &mut seeded(6));
    let mut g = c.benchmark_group("point_shadow");
    g.sample_size(20);
    g.bench_function("three balls in R3", |b| {
        b.iter(|| point_shadow(&scene, black_box(&x), DEFAULT_TOL))
    });
    g.finish();
}

criterion_group!(benches, circle, sphere, shadow);
criterion_main!(benches);
