//! End-to-end benchmarks: preconditioner construction, one apply, and a
//! full PCG solve on a mid-sized 3D Poisson problem.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use ddg_core::coarse::build_generating_basis;
use ddg_core::krylov::{pcg, PcgOptions};
use ddg_core::partition::inertial_partition;
use ddg_core::problems::poisson3d_7pt;
use ddg_core::schwarz::{SchwarzOptions, TwoLevelPreconditioner};
use ddg_core::gaussian_rhs;

fn setup(m: usize, degree: usize) -> (Arc<ddg_core::CsrMatrix>, TwoLevelPreconditioner, Vec<f64>) {
    let p = poisson3d_7pt(m, 1).unwrap();
    let num_parts = (p.num_nodes() / 512).next_power_of_two();
    let part = inertial_partition(&p.coords, 3, num_parts, 1, true).unwrap();
    let f = build_generating_basis(&p.coords, 3, degree, 1, None).unwrap();
    let a = Arc::new(p.a.clone());
    let pre =
        TwoLevelPreconditioner::build_two_level(a.clone(), &f, &part, &SchwarzOptions::default())
            .unwrap();
    let rhs = gaussian_rhs(p.n(), 3);
    (a, pre, rhs)
}

fn build(c: &mut Criterion) {
    let p = poisson3d_7pt(16, 1).unwrap();
    let part = inertial_partition(&p.coords, 3, 8, 1, true).unwrap();
    let f = build_generating_basis(&p.coords, 3, 2, 1, None).unwrap();
    let a = Arc::new(p.a.clone());
    let mut group = c.benchmark_group("build");
    group.sample_size(10);
    group.bench_function("two-level m=16 p=2", |b| {
        b.iter(|| {
            black_box(
                TwoLevelPreconditioner::build_two_level(
                    a.clone(),
                    &f,
                    &part,
                    &SchwarzOptions::default(),
                )
                .unwrap(),
            )
        })
    });
    group.finish();
}

fn apply(c: &mut Criterion) {
    let (_a, pre, rhs) = setup(20, 2);
    c.bench_function("apply m=20 p=2", |b| {
        b.iter(|| black_box(pre.apply(black_box(&rhs))))
    });
}

fn solve(c: &mut Criterion) {
    let (a, pre, rhs) = setup(16, 2);
    let opts = PcgOptions::default();
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    group.bench_function("pcg m=16 p=2 tol=1e-9", |b| {
        b.iter(|| black_box(pcg(&a, &pre, black_box(&rhs), &opts).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, build, apply, solve);
criterion_main!(benches);
