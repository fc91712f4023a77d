//! PCG checks against dense direct solves and known spectra, and the
//! Lanczos condition-estimate checks against eigensolve oracles.

mod common;

use common::*;
use rand::Rng;
use ddg_core::chol::cholesky_factorize;
use ddg_core::dense::symmetric_eigenvalues;
use ddg_core::krylov::{
    fractional_iterations, pcg, ConvergenceReference, IdentityPreconditioner, PcgOptions,
    Preconditioner,
};
use ddg_core::sparse::CsrMatrix;

/// Exact-inverse preconditioner backed by a Cholesky factorization.
struct ExactInverse(ddg_core::CholeskyFactor);

impl Preconditioner for ExactInverse {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        self.0.solve(r).unwrap()
    }
}

#[test]
fn unpreconditioned_cg_matches_dense_solve() {
    let (a, _) = laplacian_1d(32);
    let f = random_vector(32, 7);
    let rep = pcg(&a, &IdentityPreconditioner, &f, &PcgOptions::default()).unwrap();
    assert!(rep.converged);
    let oracle = dense_solve_gepp(&csr_to_dense(&a), &f);
    // error in the A-norm, relative to the solution's A-norm
    let e: Vec<f64> = rep.solution.iter().zip(&oracle).map(|(x, y)| x - y).collect();
    let ae = a.spmv(&e).unwrap();
    let err = dot(&e, &ae).max(0.0).sqrt();
    let ao = a.spmv(&oracle).unwrap();
    let scale = dot(&oracle, &ao).sqrt();
    assert!(err <= 1e-7 * scale, "A-norm error {err}");
}

#[test]
fn perfect_preconditioner_converges_in_two_iterations() {
    let a = random_spd(40, 0.2, 17);
    let m = ExactInverse(cholesky_factorize(&a).unwrap());
    let f = random_vector(40, 18);
    let opts = PcgOptions {
        tol: 1e-12,
        reference: ConvergenceReference::InitialResidual,
        ..PcgOptions::default()
    };
    let rep = pcg(&a, &m, &f, &opts).unwrap();
    assert!(rep.converged);
    assert!(rep.iterations <= 2, "took {} iterations", rep.iterations);
    let last = *rep.residual_history.last().unwrap();
    assert!(last <= 1e-12 * rep.residual_history[0]);
}

#[test]
fn fractional_iterations_matches_fine_interpolation_oracle() {
    // geometric decay with jitter; oracle scans a dense grid of candidate
    // crossings on the same polyline
    let mut r = rng(23);
    let mut h = vec![1.0f64];
    for _ in 0..12 {
        let factor = r.random_range(0.05f64..0.5);
        let last = *h.last().unwrap();
        h.push(last * factor);
    }
    let target = h[8] * 1.7; // between samples
    let frac = fractional_iterations(&h, target, 1.0);

    let mut oracle = f64::INFINITY;
    let steps = 4_000_000usize;
    'outer: for k in 1..h.len() {
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let logv = h[k - 1].log10() * (1.0 - t) + h[k].log10() * t;
            if logv <= target.log10() {
                oracle = (k - 1) as f64 + t;
                break 'outer;
            }
        }
    }
    assert!(
        (frac - oracle).abs() <= 1e-5,
        "fractional {frac} vs scanned {oracle}"
    );
    // and the closed form agrees to 1e-12 with the analytic crossing
    let k = frac.floor() as usize;
    let exact = k as f64
        + (h[k].log10() - target.log10()) / (h[k].log10() - h[k + 1].log10());
    assert!((frac - exact).abs() <= 1e-12);
}

#[test]
fn condition_estimate_on_known_spectrum() {
    // diag(1..10): kappa = 10
    let t: Vec<(usize, usize, f64)> = (0..10).map(|i| (i, i, (i + 1) as f64)).collect();
    let a = CsrMatrix::from_triplets(10, 10, &t)
        .unwrap()
        .into_symmetric()
        .unwrap();
    let f = random_vector(10, 29);
    let opts = PcgOptions {
        tol: 1e-14,
        max_iter: 20,
        reference: ConvergenceReference::InitialResidual,
    };
    let rep = pcg(&a, &IdentityPreconditioner, &f, &opts).unwrap();
    assert!(
        (rep.condition_estimate - 10.0).abs() <= 0.05 * 10.0,
        "kappa estimate {}",
        rep.condition_estimate
    );
}

#[test]
fn condition_estimate_on_laplacian_matches_eigensolve() {
    let (a, _) = laplacian_1d(64);
    let f = random_vector(64, 31);
    let opts = PcgOptions {
        tol: 1e-13,
        max_iter: 200,
        reference: ConvergenceReference::InitialResidual,
    };
    let rep = pcg(&a, &IdentityPreconditioner, &f, &opts).unwrap();
    let eigs = symmetric_eigenvalues(&a.to_dense()).unwrap();
    let kappa_true = eigs[eigs.len() - 1] / eigs[0];
    let rel = (rep.condition_estimate - kappa_true).abs() / kappa_true;
    assert!(
        rel <= 0.10,
        "kappa {} vs true {kappa_true}",
        rep.condition_estimate
    );
}

#[test]
fn lanczos_extremes_stay_inside_operator_spectrum() {
    let a = random_spd(80, 0.1, 37);
    let f = random_vector(80, 38);
    let opts = PcgOptions {
        tol: 1e-12,
        max_iter: 100,
        reference: ConvergenceReference::InitialResidual,
    };
    let rep = pcg(&a, &IdentityPreconditioner, &f, &opts).unwrap();
    let (diag, off) =
        ddg_core::krylov::lanczos_tridiagonal(&rep.lanczos_alphas, &rep.lanczos_betas);
    let (lo, hi) = ddg_core::krylov::tridiagonal_extreme_eigenvalues(&diag, &off);
    let eigs = symmetric_eigenvalues(&a.to_dense()).unwrap();
    let (amin, amax) = (eigs[0], eigs[eigs.len() - 1]);
    let slack = 1e-8 * amax;
    assert!(lo >= amin - slack, "Ritz min {lo} below spectrum min {amin}");
    assert!(hi <= amax + slack, "Ritz max {hi} above spectrum max {amax}");
}

#[test]
fn a_norm_error_is_monotone_nonincreasing() {
    let (a, _) = grid_laplacian_2d(10, 10);
    let f = random_vector(100, 41);
    let u_star = dense_solve_gepp(&csr_to_dense(&a), &f);
    // rerun PCG step by step via max_iter truncation and compare A-norm errors
    let mut prev = f64::INFINITY;
    for iters in 1..=20 {
        let opts = PcgOptions {
            tol: 1e-30,
            max_iter: iters,
            reference: ConvergenceReference::InitialResidual,
        };
        let rep = pcg(&a, &IdentityPreconditioner, &f, &opts).unwrap();
        let e: Vec<f64> = rep.solution.iter().zip(&u_star).map(|(x, y)| x - y).collect();
        let ae = a.spmv(&e).unwrap();
        let err = dot(&e, &ae).max(0.0).sqrt();
        assert!(
            err <= prev * (1.0 + 1e-12),
            "A-norm error grew from {prev} to {err} at iteration {iters}"
        );
        prev = err;
    }
}

#[test]
fn residual_history_is_bitwise_reproducible() {
    let a = random_spd(50, 0.2, 43);
    let f = random_vector(50, 44);
    let r1 = pcg(&a, &IdentityPreconditioner, &f, &PcgOptions::default()).unwrap();
    let r2 = pcg(&a, &IdentityPreconditioner, &f, &PcgOptions::default()).unwrap();
    assert_eq!(r1.residual_history, r2.residual_history);
    assert_eq!(r1.solution, r2.solution);
}

#[test]
fn report_invariants_hold_on_converged_solves() {
    let (a, _) = laplacian_1d(48);
    let f = random_vector(48, 51);
    let rep = pcg(&a, &IdentityPreconditioner, &f, &PcgOptions::default()).unwrap();
    assert!(rep.converged);
    // residual_history[iterations] / R_ref <= tol
    assert!(rep.residual_history[rep.iterations] <= 1e-9 * rep.reference_residual);
    // fractional <= iterations <= fractional + 1
    assert!(rep.fractional_iterations <= rep.iterations as f64);
    assert!((rep.iterations as f64) <= rep.fractional_iterations + 1.0);
    assert!(rep.condition_estimate >= 1.0);
}

#[test]
fn perfect_preconditioner_is_two_iterations_on_benchmark_instances() {
    use ddg_core::problems::{annulus_mesh, biharmonic_13pt, fem_poisson_p1, poisson3d_7pt};
    let mut instances = vec![poisson3d_7pt(6, 1).unwrap().a, biharmonic_13pt(10).unwrap().a];
    let mesh = annulus_mesh(8, 20).unwrap();
    instances.push(fem_poisson_p1(&mesh, &|_, _| 1.0, None).unwrap().a);
    for a in instances {
        let m = ExactInverse(cholesky_factorize(&a).unwrap());
        let f = random_vector(a.nrows(), 99);
        let opts = PcgOptions {
            tol: 1e-12,
            reference: ConvergenceReference::InitialResidual,
            ..PcgOptions::default()
        };
        let rep = pcg(&a, &m, &f, &opts).unwrap();
        assert!(rep.converged && rep.iterations <= 2, "{} iterations", rep.iterations);
    }
}

#[test]
fn indefinite_preconditioner_is_rejected_up_front() {
    struct Negated;
    impl Preconditioner for Negated {
        fn apply(&self, r: &[f64]) -> Vec<f64> {
            r.iter().map(|x| -x).collect()
        }
    }
    let (a, _) = laplacian_1d(8);
    let f = random_vector(8, 61);
    let err = pcg(&a, &Negated, &f, &PcgOptions::default()).unwrap_err();
    assert!(matches!(err, ddg_core::Error::PreconditionerNotSpd(_)));
}
