//! Kernel benchmarks: sparse mat-vec, the Galerkin triple product,
//! submatrix extraction, factorization and graph partitioning.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ddg_core::coarse::{build_generating_basis, build_restriction, RANK_TOL_DEFAULT};
use ddg_core::partition::graph_partition;
use ddg_core::problems::poisson3d_7pt;
use ddg_core::sparse::{extract_principal_submatrix, triple_product};
use ddg_core::{cholesky_factorize, gaussian_rhs};

fn spmv(c: &mut Criterion) {
    let p = poisson3d_7pt(24, 1).unwrap();
    let x = gaussian_rhs(p.n(), 2);
    c.bench_function("spmv poisson3d m=24", |b| {
        b.iter(|| black_box(p.a.spmv(black_box(&x)).unwrap()))
    });
}

fn rap(c: &mut Criterion) {
    let p = poisson3d_7pt(16, 1).unwrap();
    let part = graph_partition(&p.a, 64, 1).unwrap();
    let f = build_generating_basis(&p.coords, 3, 1, 1, None).unwrap();
    let (r0, _) = build_restriction(&f, &part, RANK_TOL_DEFAULT).unwrap();
    c.bench_function("triple product m=16 p=1", |b| {
        b.iter(|| black_box(triple_product(black_box(&r0), &p.a).unwrap()))
    });
}

fn extract(c: &mut Criterion) {
    let p = poisson3d_7pt(20, 1).unwrap();
    let idx: Vec<usize> = (0..p.n()).step_by(7).collect();
    c.bench_function("principal submatrix m=20 n/7 rows", |b| {
        b.iter(|| black_box(extract_principal_submatrix(&p.a, black_box(&idx)).unwrap()))
    });
}

fn factorize(c: &mut Criterion) {
    let p = poisson3d_7pt(10, 1).unwrap();
    c.bench_function("sparse cholesky m=10", |b| {
        b.iter(|| black_box(cholesky_factorize(black_box(&p.a)).unwrap()))
    });
}

fn partition(c: &mut Criterion) {
    let p = poisson3d_7pt(16, 1).unwrap();
    let mut group = c.benchmark_group("partition");
    group.sample_size(20);
    group.bench_function("graph m=16 into 64", |b| {
        b.iter(|| black_box(graph_partition(black_box(&p.a), 64, 1).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, spmv, rap, extract, factorize, partition);
criterion_main!(benches);
