//! Preconditioner checks: the sweep against a literal dense oracle of the
//! subdomain update equation, the CG-admissibility probes (symmetry,
//! positivity, linearity), and the three-level consistency cases.

mod common;

use std::sync::Arc;

use common::*;
use ddg_core::coarse::{build_generating_basis, CoarseSpace, RANK_TOL_DEFAULT};
use ddg_core::partition::{expand_overlap, graph_partition, Partition};
use ddg_core::schwarz::{SchwarzOptions, SubdomainSolver, SweepOrder, TwoLevelPreconditioner};
use ddg_core::sparse::CsrMatrix;

fn two_level_on_grid(
    nx: usize,
    ny: usize,
    parts: usize,
    degree: usize,
    delta: usize,
) -> (Arc<CsrMatrix>, TwoLevelPreconditioner) {
    let (a, coords) = grid_laplacian_2d(nx, ny);
    let a = Arc::new(a);
    let part = graph_partition(&a, parts, 13).unwrap();
    let f = build_generating_basis(&coords, 2, degree, 1, None).unwrap();
    let opts = SchwarzOptions {
        delta,
        ..SchwarzOptions::default()
    };
    let pre = TwoLevelPreconditioner::build_two_level(a.clone(), &f, &part, &opts).unwrap();
    (a, pre)
}

#[test]
fn forward_sweep_matches_literal_dense_oracle() {
    // 1D Laplacian n = 16, two overlapping halves; the oracle applies
    // u += R_i^T A_i^{-1} R_i (f - A u) literally with dense solves
    let n = 16;
    let (a, coords) = laplacian_1d(n);
    let a = Arc::new(a);
    let assignment: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
    let part = Partition::new(assignment, 2).unwrap();
    let f = build_generating_basis(&coords, 1, 0, 1, None).unwrap();
    let opts = SchwarzOptions {
        delta: 2,
        ..SchwarzOptions::default()
    };
    let pre = TwoLevelPreconditioner::build_two_level(a.clone(), &f, &part, &opts).unwrap();

    let rhs = random_vector(n, 71);
    let mut u = vec![0.0f64; n];
    pre.smooth_sweep(&mut u, &rhs, SweepOrder::Forward);

    // oracle
    let ad = csr_to_dense(&a);
    let overlap = expand_overlap(&a, &part, 2);
    let mut u_oracle = vec![0.0f64; n];
    for idx in &overlap.subdomains {
        // residual restriction
        let au = dense_matvec(&ad, &u_oracle);
        let rloc: Vec<f64> = idx.iter().map(|&i| rhs[i] - au[i]).collect();
        // dense local matrix
        let aloc: Dense = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| ad[i][j]).collect())
            .collect();
        let d = dense_solve_gepp(&aloc, &rloc);
        for (&i, &di) in idx.iter().zip(&d) {
            u_oracle[i] += di;
        }
    }
    assert!(
        max_abs_diff(&u, &u_oracle) <= 1e-12 * norm2(&u_oracle).max(1.0),
        "sweep deviates from the literal update oracle"
    );
}

#[test]
fn apply_symmetry_probe_on_grid() {
    let (_a, pre) = two_level_on_grid(24, 24, 4, 1, 0);
    for seed in 0..3u64 {
        let r1 = random_vector(576, 100 + seed);
        let r2 = random_vector(576, 200 + seed);
        let z1 = pre.apply(&r1);
        let z2 = pre.apply(&r2);
        let s1 = dot(&z1, &r2);
        let s2 = dot(&r1, &z2);
        assert!(
            (s1 - s2).abs() <= 1e-9 * norm2(&r1) * norm2(&r2),
            "asymmetry {} vs {}",
            s1,
            s2
        );
    }
}

#[test]
fn apply_is_positive_definite_on_probes() {
    let (_a, pre) = two_level_on_grid(16, 16, 4, 1, 1);
    for seed in 0..20u64 {
        let r = random_vector(256, 300 + seed);
        let z = pre.apply(&r);
        let mrr = dot(&z, &r);
        assert!(mrr > 0.0, "<Mr, r> = {mrr} at seed {seed}");
    }
}

#[test]
fn apply_is_linear() {
    let (_a, pre) = two_level_on_grid(12, 12, 4, 1, 0);
    let n = 144;
    let r1 = random_vector(n, 401);
    let r2 = random_vector(n, 402);
    let (alpha, beta) = (0.7, -1.3);
    let combo: Vec<f64> = r1
        .iter()
        .zip(&r2)
        .map(|(a, b)| alpha * a + beta * b)
        .collect();
    let z_combo = pre.apply(&combo);
    let z1 = pre.apply(&r1);
    let z2 = pre.apply(&r2);
    let z_lin: Vec<f64> = z1
        .iter()
        .zip(&z2)
        .map(|(a, b)| alpha * a + beta * b)
        .collect();
    let scale = norm2(&z_lin).max(1.0);
    assert!(max_abs_diff(&z_combo, &z_lin) <= 1e-10 * scale);
}

#[test]
fn coarse_range_residual_composition_oracle() {
    // when the pre-smooth leaves a residual exactly in the coarse range, the
    // coarse correction contributes R0^T A0^{-1} R0 r of it; verify the whole
    // apply against a dense composition of the three stages
    let (a, pre) = two_level_on_grid(12, 12, 4, 1, 0);
    let n = 144;
    let r = random_vector(n, 55);
    let z = pre.apply(&r);

    // dense oracle of the full composition
    let ad = csr_to_dense(&a);
    let overlap = expand_overlap(&a, &pre.coarse().partition, 0);
    let sweep = |u: &mut Vec<f64>, forward: bool| {
        let order: Vec<usize> = if forward {
            (0..overlap.subdomains.len()).collect()
        } else {
            (0..overlap.subdomains.len()).rev().collect()
        };
        for si in order {
            let idx = &overlap.subdomains[si];
            let au = dense_matvec(&ad, u);
            let rloc: Vec<f64> = idx.iter().map(|&i| r[i] - au[i]).collect();
            let aloc: Dense = idx
                .iter()
                .map(|&i| idx.iter().map(|&j| ad[i][j]).collect())
                .collect();
            let d = dense_solve_gepp(&aloc, &rloc);
            for (&i, &di) in idx.iter().zip(&d) {
                u[i] += di;
            }
        }
    };
    let mut u = vec![0.0f64; n];
    sweep(&mut u, true);
    let au = dense_matvec(&ad, &u);
    let resid: Vec<f64> = r.iter().zip(&au).map(|(x, y)| x - y).collect();
    let rd = csr_to_dense(&pre.coarse().restriction);
    let a0 = dense_matmul(&dense_matmul(&rd, &ad), &dense_transpose(&rd));
    let rc = dense_matvec(&rd, &resid);
    let yc = dense_solve_gepp(&a0, &rc);
    let corr = dense_matvec(&dense_transpose(&rd), &yc);
    for (ui, ci) in u.iter_mut().zip(&corr) {
        *ui += ci;
    }
    sweep(&mut u, false);

    assert!(max_abs_diff(&z, &u) <= 1e-9 * norm2(&u).max(1.0));
}

#[test]
fn stationary_iteration_contracts_energy_norm() {
    let (a, pre) = two_level_on_grid(16, 16, 4, 1, 0);
    let n = 256;
    let rhs = random_vector(n, 61);
    let u_star = dense_solve_gepp(&csr_to_dense(&a), &rhs);
    let anorm = |e: &[f64]| -> f64 {
        let ae = a.spmv(e).unwrap();
        dot(e, &ae).max(0.0).sqrt()
    };
    for seed in 0..5u64 {
        let u0 = random_vector(n, 500 + seed);
        let au0 = a.spmv(&u0).unwrap();
        let r0: Vec<f64> = rhs.iter().zip(&au0).map(|(f, v)| f - v).collect();
        let u1: Vec<f64> = u0
            .iter()
            .zip(pre.apply(&r0))
            .map(|(u, z)| u + z)
            .collect();
        let e0: Vec<f64> = u0.iter().zip(&u_star).map(|(u, s)| u - s).collect();
        let e1: Vec<f64> = u1.iter().zip(&u_star).map(|(u, s)| u - s).collect();
        assert!(
            anorm(&e1) < anorm(&e0),
            "no contraction: {} -> {}",
            anorm(&e0),
            anorm(&e1)
        );
    }
}

#[test]
fn apply_is_bitwise_deterministic() {
    let (_a, pre1) = two_level_on_grid(12, 12, 4, 2, 1);
    let (_a2, pre2) = two_level_on_grid(12, 12, 4, 2, 1);
    let r = random_vector(144, 77);
    assert_eq!(pre1.apply(&r), pre2.apply(&r));
}

#[test]
fn ssor_subdomain_mode_still_contracts() {
    let (a, coords) = grid_laplacian_2d(12, 12);
    let a = Arc::new(a);
    let part = graph_partition(&a, 4, 13).unwrap();
    let f = build_generating_basis(&coords, 2, 1, 1, None).unwrap();
    let opts = SchwarzOptions {
        delta: 0,
        subdomain_solve: ddg_core::schwarz::SubdomainSolve::FixedSsor {
            sweeps: 4,
            omega: 1.2,
        },
        ..SchwarzOptions::default()
    };
    let pre = TwoLevelPreconditioner::build_two_level(a.clone(), &f, &part, &opts).unwrap();
    let rhs = random_vector(144, 81);
    let u_star = dense_solve_gepp(&csr_to_dense(&a), &rhs);
    let z = pre.apply(&rhs);
    let e: Vec<f64> = z.iter().zip(&u_star).map(|(u, s)| u - s).collect();
    assert!(
        norm2(&e) < norm2(&u_star),
        "SSOR-mode correction did not reduce error"
    );
}

#[test]
fn three_level_rank_bound_and_symmetry() {
    // level-2 parts are unions of level-1 aggregates, so the second level
    // needs num_parts / coarsening^d >= 2; a 40x40 grid at coarsening 4
    // (100 parts at level 1, ~6 at level 2) exercises the recursion
    let (a, coords) = grid_laplacian_2d(40, 40);
    let a = Arc::new(a);
    let part = graph_partition(&a, 100, 17).unwrap();
    let degree = 1usize;
    let f = build_generating_basis(&coords, 2, degree, 1, None).unwrap();
    let pre = TwoLevelPreconditioner::build_three_level(
        a.clone(),
        &f,
        &part,
        4.0,
        2,
        17,
        &SchwarzOptions::default(),
    )
    .unwrap();
    assert_eq!(pre.levels(), 3);
    let nested = pre.next_level().unwrap();
    // level-2 coarse rank bounded by k * parts2
    let k = f.num_columns();
    let parts2 = nested.coarse().partition.num_parts();
    assert!(nested.coarse().coarse_rank() <= k * parts2);

    for seed in 0..2u64 {
        let r1 = random_vector(1600, 700 + seed);
        let r2 = random_vector(1600, 800 + seed);
        let z1 = pre.apply(&r1);
        let z2 = pre.apply(&r2);
        assert!(
            (dot(&z1, &r2) - dot(&r1, &z2)).abs() <= 1e-9 * norm2(&r1) * norm2(&r2),
            "three-level apply failed the symmetry probe"
        );
    }
}

#[test]
fn three_level_with_exact_nested_solve_matches_two_level() {
    // nested preconditioner whose single subdomain covers all of A0 solves
    // it exactly, so the V-cycle collapses to the two-level apply
    let (a, coords) = grid_laplacian_2d(16, 16);
    let a = Arc::new(a);
    let part = graph_partition(&a, 8, 19).unwrap();
    let f = build_generating_basis(&coords, 2, 1, 1, None).unwrap();
    let opts = SchwarzOptions::default();
    let two = TwoLevelPreconditioner::build_two_level(a.clone(), &f, &part, &opts).unwrap();

    let a0 = Arc::new(two.coarse().coarse_matrix.clone());
    let n0 = a0.nrows();
    let part0 = Partition::new(vec![0; n0], 1).unwrap();
    let f0 = ddg_core::coarse::coarsen_generators(two.coarse(), &f).unwrap();
    let nested_coarse = CoarseSpace::build(&a0, &f0, &part0, RANK_TOL_DEFAULT).unwrap();
    let full_subdomain =
        SubdomainSolver::build(&a0, (0..n0).collect(), ddg_core::schwarz::SubdomainSolve::Exact)
            .unwrap();
    let nested = TwoLevelPreconditioner::from_parts(
        a0,
        vec![full_subdomain],
        nested_coarse,
        None,
    );

    let coarse_again = CoarseSpace::build(&a, &f, &part, RANK_TOL_DEFAULT).unwrap();
    let mut subdomains = Vec::new();
    for idx in expand_overlap(&a, &part, 0).subdomains {
        subdomains
            .push(SubdomainSolver::build(&a, idx, ddg_core::schwarz::SubdomainSolve::Exact).unwrap());
    }
    let three = TwoLevelPreconditioner::from_parts(
        a.clone(),
        subdomains,
        coarse_again,
        Some(Box::new(nested)),
    );

    let r = random_vector(256, 91);
    let z2 = two.apply(&r);
    let z3 = three.apply(&r);
    assert!(
        max_abs_diff(&z2, &z3) <= 1e-12 * norm2(&z2).max(1.0),
        "exact nested solve should collapse to the two-level apply"
    );
}

#[test]
fn three_level_too_small_rejected_with_single_part_per_level() {
    // sized exactly (H/h)^d per part at level 1 with one part
    let (a, coords) = grid_laplacian_2d(4, 4);
    let a = Arc::new(a);
    let part = Partition::new(vec![0; 16], 1).unwrap();
    let f = build_generating_basis(&coords, 2, 1, 1, None).unwrap();
    let err = TwoLevelPreconditioner::build_three_level(
        a,
        &f,
        &part,
        4.0,
        2,
        0,
        &SchwarzOptions::default(),
    )
    .unwrap_err();
    assert!(err.to_string().contains("three levels"));
}
