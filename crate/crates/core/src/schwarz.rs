//! Multiplicative overlapping Schwarz smoothing and the symmetric two-level
//! preconditioner: one forward pass over the subdomains, a coarse-grid
//! correction, then a reverse pass. The reverse ordering makes the operator
//! symmetric and usable inside CG. A three-level variant replaces the exact
//! coarse solve with one V-cycle of the same construction applied to A0.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use crate::chol::{cholesky_factorize, CholeskyFactor};
use crate::coarse::{coarsen_generators, CoarseSpace, GeneratingBasis};
use crate::error::{Error, Result};
use crate::krylov::Preconditioner;
use crate::partition::{expand_overlap, graph_partition, subdomain_adjacency, Partition};
use crate::sparse::{extract_principal_submatrix, CsrMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOrder {
    Forward,
    Reverse,
}

/// How subdomain systems are solved inside sweeps.
///
/// `Exact` factorizes each A_i once. `FixedSsor` runs a fixed number of
/// symmetric SOR sweeps instead; the operator stays linear but is only
/// approximately an exact solve, so it is excluded from symmetry-critical
/// verification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubdomainSolve {
    Exact,
    FixedSsor { sweeps: usize, omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchwarzOptions {
    /// Algebraic overlap: subdomains grow by this many graph layers.
    pub delta: usize,
    /// Rank tolerance forwarded to the coarse-space construction.
    pub rank_tol: f64,
    pub subdomain_solve: SubdomainSolve,
}

impl Default for SchwarzOptions {
    fn default() -> Self {
        SchwarzOptions {
            delta: 0,
            rank_tol: crate::coarse::RANK_TOL_DEFAULT,
            subdomain_solve: SubdomainSolve::Exact,
        }
    }
}

#[derive(Debug)]
enum LocalSolver {
    Direct(CholeskyFactor),
    Ssor {
        a: CsrMatrix,
        diag: Vec<f64>,
        sweeps: usize,
        omega: f64,
    },
}

/// One overlapping subdomain: its sorted node set and an exact (or fixed
/// SSOR) solver for A_i = R_i A R_i^T.
#[derive(Debug)]
pub struct SubdomainSolver {
    indices: Vec<usize>,
    local: LocalSolver,
}

impl SubdomainSolver {
    pub fn build(a: &CsrMatrix, indices: Vec<usize>, mode: SubdomainSolve) -> Result<Self> {
        let a_local = extract_principal_submatrix(a, &indices)?;
        let local = match mode {
            SubdomainSolve::Exact => LocalSolver::Direct(cholesky_factorize(&a_local)?),
            SubdomainSolve::FixedSsor { sweeps, omega } => {
                let diag = a_local.diagonal();
                if diag.iter().any(|&d| d <= 0.0) {
                    return Err(Error::InvalidArgument(
                        "SSOR subdomain solve requires positive diagonal".into(),
                    ));
                }
                LocalSolver::Ssor {
                    a: a_local,
                    diag,
                    sweeps,
                    omega,
                }
            }
        };
        Ok(SubdomainSolver { indices, local })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    fn solve_local(&self, rhs: &[f64]) -> Vec<f64> {
        match &self.local {
            LocalSolver::Direct(f) => f.solve(rhs).expect("local dimensions fixed at build"),
            LocalSolver::Ssor {
                a,
                diag,
                sweeps,
                omega,
            } => {
                let n = rhs.len();
                let mut x = vec![0.0f64; n];
                for _ in 0..*sweeps {
                    for i in 0..n {
                        let r = rhs[i] - a.row_dot(i, &x);
                        x[i] += omega * r / diag[i];
                    }
                    for i in (0..n).rev() {
                        let r = rhs[i] - a.row_dot(i, &x);
                        x[i] += omega * r / diag[i];
                    }
                }
                x
            }
        }
    }
}

/// Symmetric multiplicative two-level (optionally three-level) overlapping
/// Schwarz preconditioner.
///
/// As an operator on residuals with zero initial guess it is linear,
/// symmetric and positive definite when the subdomain and coarse solves are
/// exact.
#[derive(Debug)]
pub struct TwoLevelPreconditioner {
    a: Arc<CsrMatrix>,
    subdomains: Vec<SubdomainSolver>,
    coarse: CoarseSpace,
    levels: usize,
    next_level: Option<Box<TwoLevelPreconditioner>>,
    coarse_nanos: AtomicU64,
}

impl TwoLevelPreconditioner {
    /// Build the two-level preconditioner: overlapping subdomain solvers from
    /// the partition expanded by `delta` graph layers, plus the coarse space.
    pub fn build_two_level(
        a: Arc<CsrMatrix>,
        f: &GeneratingBasis,
        part: &Partition,
        opts: &SchwarzOptions,
    ) -> Result<Self> {
        if a.nrows() != part.len() {
            return Err(Error::dim(
                "build_two_level",
                format!("matrix has {} rows, partition {}", a.nrows(), part.len()),
            ));
        }
        let t_coarse = Instant::now();
        let coarse = CoarseSpace::build(&a, f, part, opts.rank_tol)?;
        let coarse_setup = t_coarse.elapsed().as_nanos() as u64;
        let overlap = expand_overlap(&a, part, opts.delta);
        let mut subdomains = Vec::with_capacity(overlap.subdomains.len());
        for indices in overlap.subdomains {
            subdomains.push(SubdomainSolver::build(&a, indices, opts.subdomain_solve)?);
        }
        Ok(TwoLevelPreconditioner {
            a,
            subdomains,
            coarse,
            levels: 2,
            next_level: None,
            coarse_nanos: AtomicU64::new(coarse_setup),
        })
    }

    /// Build the three-level V-cycle variant.
    ///
    /// The second level re-coarsens A0 with the coarsened generators
    /// F0 = R0 F, a fresh partition of A0's block graph at the same
    /// coarsening factor and the same overlap. Rejected when the second-level
    /// partition would have fewer than two parts.
    pub fn build_three_level(
        a: Arc<CsrMatrix>,
        f: &GeneratingBasis,
        part: &Partition,
        coarsening_factor: f64,
        dim: usize,
        seed: u64,
        opts: &SchwarzOptions,
    ) -> Result<Self> {
        let num_parts2 = (part.num_parts() as f64 / coarsening_factor.powi(dim as i32)).round()
            as usize;
        if num_parts2 < 2 {
            return Err(Error::TooSmallForThreeLevels(format!(
                "{} level-1 parts at coarsening factor {} in {}d leave {} second-level parts; \
                 need at least 2",
                part.num_parts(),
                coarsening_factor,
                dim,
                num_parts2
            )));
        }
        let mut base = Self::build_two_level(a.clone(), f, part, opts)?;

        // partition A0 at block granularity so level-2 subdomains are unions
        // of level-1 aggregates, then expand to coarse unknowns
        let block_graph = subdomain_adjacency(part, &a)?;
        let block_part = graph_partition(&block_graph, num_parts2, seed)?;
        let mut assignment2 = Vec::with_capacity(base.coarse.coarse_rank());
        for (block, &rank) in base.coarse.block_ranks.iter().enumerate() {
            let p2 = block_part.part_of(block);
            for _ in 0..rank {
                assignment2.push(p2);
            }
        }
        let part2 = Partition::new(assignment2, num_parts2)?;
        let t_nested = Instant::now();
        let f0 = coarsen_generators(&base.coarse, f)?;
        let a0 = Arc::new(base.coarse.coarse_matrix.clone());
        let nested = Self::build_two_level(a0, &f0, &part2, opts)?;
        base.coarse_nanos.fetch_add(
            t_nested.elapsed().as_nanos() as u64,
            Ordering::Relaxed,
        );
        base.levels = 3;
        base.next_level = Some(Box::new(nested));
        Ok(base)
    }

    /// Assemble a preconditioner from prebuilt parts. The subdomain solvers
    /// must be built against the same matrix and the coarse space against the
    /// same partition; intended for experiments that substitute components.
    pub fn from_parts(
        a: Arc<CsrMatrix>,
        subdomains: Vec<SubdomainSolver>,
        coarse: CoarseSpace,
        next_level: Option<Box<TwoLevelPreconditioner>>,
    ) -> Self {
        let levels = if next_level.is_some() { 3 } else { 2 };
        TwoLevelPreconditioner {
            a,
            subdomains,
            coarse,
            levels,
            next_level,
            coarse_nanos: AtomicU64::new(0),
        }
    }

    pub fn matrix(&self) -> &Arc<CsrMatrix> {
        &self.a
    }

    pub fn coarse(&self) -> &CoarseSpace {
        &self.coarse
    }

    pub fn subdomains(&self) -> &[SubdomainSolver] {
        &self.subdomains
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn next_level(&self) -> Option<&TwoLevelPreconditioner> {
        self.next_level.as_deref()
    }

    /// Wall-clock seconds spent in coarse corrections (and nested cycles)
    /// since construction or the last reset.
    pub fn coarse_seconds(&self) -> f64 {
        self.coarse_nanos.load(Ordering::Relaxed) as f64 * 1e-9
    }

    pub fn reset_coarse_time(&self) {
        self.coarse_nanos.store(0, Ordering::Relaxed);
    }

    /// One multiplicative pass over the subdomains, strictly sequential in
    /// the given order. Each update solves
    /// u += R_i^T A_i^{-1} R_i (f - A u)
    /// with the residual restriction recomputed from the current iterate
    /// (only the rows of subdomain i are evaluated).
    pub fn smooth_sweep(&self, u: &mut [f64], f: &[f64], order: SweepOrder) {
        debug_assert_eq!(u.len(), self.a.nrows());
        debug_assert_eq!(f.len(), self.a.nrows());
        let count = self.subdomains.len();
        let run = |slf: &Self, si: usize, u: &mut [f64]| {
            let sd = &slf.subdomains[si];
            let mut rloc = Vec::with_capacity(sd.indices.len());
            for &row in &sd.indices {
                rloc.push(f[row] - slf.a.row_dot(row, u));
            }
            let d = sd.solve_local(&rloc);
            for (&row, &dv) in sd.indices.iter().zip(&d) {
                u[row] += dv;
            }
        };
        match order {
            SweepOrder::Forward => {
                for si in 0..count {
                    run(self, si, u);
                }
            }
            SweepOrder::Reverse => {
                for si in (0..count).rev() {
                    run(self, si, u);
                }
            }
        }
    }

    /// Apply the preconditioner to a residual with zero initial guess:
    /// forward sweep, coarse correction of the current residual, reverse
    /// sweep. For a three-level preconditioner the coarse correction runs one
    /// nested V-cycle on A0 instead of the exact solve.
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        assert_eq!(r.len(), self.a.nrows(), "apply: residual length mismatch");
        let n = self.a.nrows();
        let mut u = vec![0.0f64; n];
        self.smooth_sweep(&mut u, r, SweepOrder::Forward);

        let au = self.a.spmv(&u).expect("dimensions fixed at build");
        let resid: Vec<f64> = r.iter().zip(&au).map(|(ri, ai)| ri - ai).collect();

        let t0 = Instant::now();
        let correction = match &self.next_level {
            None => self
                .coarse
                .coarse_correct(&resid)
                .expect("dimensions fixed at build"),
            Some(nested) => {
                let rc = self
                    .coarse
                    .restriction
                    .spmv(&resid)
                    .expect("dimensions fixed at build");
                let zc = nested.apply(&rc);
                self.coarse
                    .restriction
                    .spmv_transpose(&zc)
                    .expect("dimensions fixed at build")
            }
        };
        self.coarse_nanos
            .fetch_add(t0.elapsed().as_nanos() as u64, Ordering::Relaxed);

        for (ui, ci) in u.iter_mut().zip(&correction) {
            *ui += ci;
        }
        self.smooth_sweep(&mut u, r, SweepOrder::Reverse);
        u
    }
}

impl Preconditioner for TwoLevelPreconditioner {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        TwoLevelPreconditioner::apply(self, r)
    }
}
