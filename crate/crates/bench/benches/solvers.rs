use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qgraph::eig::dense;
use qgraph::spectral::{persson_limit, PerssonSchedule};
use qgraph::{smallest_eigenpair, EigenOptions, SpectralOptions};
use qgraph_bench::{half_line, rough_tree, whole_forms, whole_pencil};

fn eigensolve(c: &mut Criterion) {
    let mut group = c.benchmark_group("smallest_eigenpair");
    let (g, f, _) = half_line(40);
    for h in [0.05, 0.02, 0.01] {
        let pencil = whole_pencil(&g, &f, h);
        group.bench_with_input(BenchmarkId::new("half_line_40", pencil.dim()), &pencil, |b, p| {
            b.iter(|| smallest_eigenpair(black_box(p), &EigenOptions::default()).unwrap())
        });
    }
    let (g, f) = rough_tree(5);
    let pencil = whole_pencil(&g, &f, 0.05);
    group.bench_with_input(BenchmarkId::new("rough_tree_5", pencil.dim()), &pencil, |b, p| {
        b.iter(|| smallest_eigenpair(black_box(p), &EigenOptions::default()).unwrap())
    });
    group.finish();

    let (g, f, _) = half_line(4);
    let small = whole_pencil(&g, &f, 0.025);
    c.bench_function("dense_reference_159", |b| b.iter(|| dense::smallest(black_box(&small)).unwrap()));
}

fn assembly(c: &mut Criterion) {
    let (g, f) = rough_tree(5);
    c.bench_function("assemble_rough_tree_5_h0.01", |b| b.iter(|| whole_forms(black_box(&g), &f, 0.01)));
    let (g, f, _) = half_line(40);
    c.bench_function("assemble_half_line_40_h0.01", |b| b.iter(|| whole_forms(black_box(&g), &f, 0.01)));
}

fn persson(c: &mut Criterion) {
    let (g, f, ex) = half_line(40);
    let schedule = PerssonSchedule {
        levels: vec![1, 2, 4, 8],
        outer: vec![12, 18, 24, 30],
    };
    let opts = SpectralOptions {
        h: 0.02,
        ..Default::default()
    };
    let mut group = c.benchmark_group("persson");
    group.sample_size(10);
    group.bench_function("half_line_40_h0.02", |b| {
        b.iter(|| persson_limit(&g, &f, &ex, black_box(&schedule), &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, eigensolve, assembly, persson);
criterion_main!(benches);
