//! Preconditioned conjugate gradient with residual-history capture,
//! fractional iteration counts and a condition-number estimate from the
//! Lanczos tridiagonal assembled out of the CG coefficients.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// A symmetric positive definite preconditioner applied to a residual.
pub trait Preconditioner {
    fn apply(&self, r: &[f64]) -> Vec<f64>;
}

/// M = I.
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        r.to_vec()
    }
}

/// What the convergence tolerance is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceReference {
    /// The true residual norm after the first preconditioned CG iteration.
    FirstPreconditionedResidual,
    /// The initial residual norm ||f|| (zero initial guess).
    InitialResidual,
}

#[derive(Debug, Clone)]
pub struct PcgOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub reference: ConvergenceReference,
}

impl Default for PcgOptions {
    fn default() -> Self {
        PcgOptions {
            tol: 1e-9,
            max_iter: 1000,
            reference: ConvergenceReference::FirstPreconditionedResidual,
        }
    }
}

/// Outcome of a PCG solve.
///
/// `residual_history[k]` is the true residual norm ||f - A u_k||, k = 0
/// first. `fractional_iterations` is the crossing point of the
/// log-residual polyline with the tolerance line (infinity when the solve
/// never crossed it).
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub fractional_iterations: f64,
    pub converged: bool,
    pub lanczos_alphas: Vec<f64>,
    pub lanczos_betas: Vec<f64>,
    pub condition_estimate: f64,
    pub iteration_bound: f64,
    /// Reference residual the tolerance was measured against.
    pub reference_residual: f64,
    /// Breakdown diagnostic when the recurrence lost positivity mid-solve.
    pub breakdown: Option<String>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Preconditioned conjugate gradient with zero initial guess.
///
/// Convergence is declared when the true residual drops below
/// `tol * R_ref`, where `R_ref` is chosen by [`ConvergenceReference`]. The
/// true residual is recomputed from `f - A u_k` every iteration; the
/// recurrence residual still drives the CG update.
pub fn pcg(
    a: &CsrMatrix,
    m: &dyn Preconditioner,
    f: &[f64],
    opts: &PcgOptions,
) -> Result<SolveReport> {
    if a.nrows() != a.ncols() {
        return Err(Error::dim(
            "pcg",
            format!("matrix is {}x{}", a.nrows(), a.ncols()),
        ));
    }
    if f.len() != a.nrows() {
        return Err(Error::dim(
            "pcg",
            format!("matrix is {}x{}, rhs has {}", a.nrows(), a.ncols(), f.len()),
        ));
    }
    let n = a.nrows();
    let mut x = vec![0.0f64; n];
    let mut r = f.to_vec();
    let mut history = vec![norm2(&r)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    let finish = |x: Vec<f64>,
                  history: Vec<f64>,
                  alphas: Vec<f64>,
                  betas: Vec<f64>,
                  converged: bool,
                  iterations: usize,
                  r_ref: f64,
                  breakdown: Option<String>| {
        let (kappa, bound) = condition_estimate(&alphas, &betas, opts.tol);
        let frac = fractional_iterations(&history, opts.tol, r_ref);
        SolveReport {
            solution: x,
            residual_history: history,
            iterations,
            fractional_iterations: frac,
            converged,
            lanczos_alphas: alphas,
            lanczos_betas: betas,
            condition_estimate: kappa,
            iteration_bound: bound,
            reference_residual: r_ref,
            breakdown,
        }
    };

    if history[0] == 0.0 {
        return Ok(finish(x, history, alphas, betas, true, 0, 0.0, None));
    }

    let mut z = m.apply(&r);
    let mut rz = dot(&r, &z);
    if rz <= 0.0 {
        return Err(Error::PreconditionerNotSpd(format!(
            "<Mr, r> = {rz:e} on the initial residual"
        )));
    }
    let mut p = z.clone();
    let mut r_ref = history[0];
    let mut threshold = opts.tol * r_ref;
    let mut converged = false;
    let mut breakdown = None;
    let mut iterations = 0usize;

    for k in 1..=opts.max_iter {
        let ap = a.spmv(&p)?;
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            breakdown = Some(format!("<p, Ap> = {pap:e} at iteration {k}"));
            break;
        }
        let alpha = rz / pap;
        alphas.push(alpha);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let au = a.spmv(&x)?;
        let true_res = norm2(
            &f.iter()
                .zip(&au)
                .map(|(fi, ai)| fi - ai)
                .collect::<Vec<f64>>(),
        );
        history.push(true_res);
        if k == 1 {
            r_ref = match opts.reference {
                ConvergenceReference::FirstPreconditionedResidual => history[1],
                ConvergenceReference::InitialResidual => history[0],
            };
            threshold = opts.tol * r_ref;
        }
        iterations = k;
        if true_res <= threshold {
            converged = true;
            break;
        }
        z = m.apply(&r);
        let rz_new = dot(&r, &z);
        if rz_new <= 0.0 {
            breakdown = Some(format!("<Mr, r> = {rz_new:e} at iteration {k}"));
            break;
        }
        let beta = rz_new / rz;
        betas.push(beta);
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rz = rz_new;
    }

    Ok(finish(
        x, history, alphas, betas, converged, iterations, r_ref, breakdown,
    ))
}

/// Real-valued iteration count at which the linear interpolation of
/// `(k, log10 residual_history[k])` crosses `log10(tol * r_ref)`.
///
/// Returns exactly k when the crossing lands on a sample and +infinity when
/// the history never crosses the tolerance line.
pub fn fractional_iterations(history: &[f64], tol: f64, r_ref: f64) -> f64 {
    let target = tol * r_ref;
    if history.is_empty() {
        return f64::INFINITY;
    }
    if history[0] <= target {
        return 0.0;
    }
    let lt = target.log10();
    for k in 1..history.len() {
        if history[k] <= target {
            if history[k] == target {
                return k as f64;
            }
            let lo = history[k - 1].log10();
            let hi = history[k].log10();
            return (k - 1) as f64 + (lo - lt) / (lo - hi);
        }
    }
    f64::INFINITY
}

/// Condition number of the Lanczos tridiagonal built from the CG
/// coefficients, and the classical CG iteration bound
/// ln(2/tol) / ln((sqrt(k)+1)/(sqrt(k)-1)).
///
/// With fewer than two alpha coefficients the estimate is 1.
pub fn condition_estimate(alphas: &[f64], betas: &[f64], tol: f64) -> (f64, f64) {
    if alphas.len() < 2 {
        return (1.0, 0.0);
    }
    let (diag, off) = lanczos_tridiagonal(alphas, betas);
    let (lo, hi) = tridiagonal_extreme_eigenvalues(&diag, &off);
    let kappa = if lo > 0.0 { (hi / lo).max(1.0) } else { f64::INFINITY };
    let bound = if kappa.is_finite() && kappa > 1.0 {
        let s = kappa.sqrt();
        (2.0 / tol).ln() / ((s + 1.0) / (s - 1.0)).ln()
    } else if kappa <= 1.0 {
        0.0
    } else {
        f64::INFINITY
    };
    (kappa, bound)
}

/// Lanczos tridiagonal from CG coefficients:
/// `diag[k] = 1/alpha_k + beta_{k-1}/alpha_{k-1}` (with `beta_{-1}/alpha_{-1}`
/// taken as 0) and `off[k] = sqrt(beta_k)/alpha_k`.
pub fn lanczos_tridiagonal(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = alphas.len();
    let mut diag = Vec::with_capacity(m);
    let mut off = Vec::with_capacity(m.saturating_sub(1));
    for k in 0..m {
        let mut d = 1.0 / alphas[k];
        if k > 0 {
            d += betas[k - 1] / alphas[k - 1];
        }
        diag.push(d);
        if k + 1 < m && k < betas.len() {
            off.push(betas[k].max(0.0).sqrt() / alphas[k]);
        }
    }
    (diag, off)
}

/// Extreme eigenvalues of a symmetric tridiagonal matrix by Sturm-sequence
/// bisection.
pub fn tridiagonal_extreme_eigenvalues(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    assert!(n >= 1);
    assert_eq!(off.len(), n.saturating_sub(1));
    if n == 1 {
        return (diag[0], diag[0]);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 }
            + if i < n - 1 { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }

    // number of eigenvalues strictly below x
    let count_below = |x: f64| -> usize {
        let mut count = 0usize;
        let mut t = diag[0] - x;
        if t < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let denom = if t == 0.0 { 1e-300 } else { t };
            t = diag[i] - x - off[i - 1] * off[i - 1] / denom;
            if t < 0.0 {
                count += 1;
            }
        }
        count
    };

    let bisect = |want: usize| -> f64 {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..120 {
            let mid = 0.5 * (a + b);
            if count_below(mid) >= want {
                b = mid;
            } else {
                a = mid;
            }
            if b - a <= 1e-14 * hi.abs().max(lo.abs()).max(1e-300) {
                break;
            }
        }
        0.5 * (a + b)
    };

    (bisect(1), bisect(n))
}
