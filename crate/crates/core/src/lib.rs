//! Solver toolkit for sparse symmetric positive definite systems built
//! around an algebraic coarse grid: generating vectors spanning a degree-p
//! polynomial space are restricted to each subdomain of a partition and
//! orthonormalized into a block restriction, and Galerkin projection yields
//! the coarse operator. Used inside a symmetric multiplicative overlapping
//! Schwarz preconditioner, the resulting CG solver converges in a number of
//! iterations essentially independent of the fine problem size.
//!
//! Modules follow the pipeline: [`sparse`]/[`dense`]/[`chol`] kernels,
//! [`partition`]ing, the [`coarse`] space, the [`schwarz`] preconditioner,
//! the [`krylov`] solver, and [`problems`] generators for benchmark PDEs.
//!
//! ```
//! use std::sync::Arc;
//! use ddg_core::{
//!     build_generating_basis, gaussian_rhs, inertial_partition, pcg,
//!     problems::poisson3d_7pt, PcgOptions, SchwarzOptions, TwoLevelPreconditioner,
//! };
//!
//! let problem = poisson3d_7pt(8, 1)?; // 512 unknowns, one Dirichlet face
//! let part = inertial_partition(&problem.coords, 3, 8, 1, true)?;
//! let basis = build_generating_basis(&problem.coords, 3, 2, 1, None)?;
//! let pre = TwoLevelPreconditioner::build_two_level(
//!     Arc::new(problem.a.clone()),
//!     &basis,
//!     &part,
//!     &SchwarzOptions::default(),
//! )?;
//! let rhs = gaussian_rhs(problem.a.nrows(), 1);
//! let report = pcg(&problem.a, &pre, &rhs, &PcgOptions::default())?;
//! assert!(report.converged && report.iterations < 20);
//! # Ok::<(), ddg_core::Error>(())
//! ```

pub mod chol;
pub mod coarse;
pub mod dense;
pub mod error;
pub mod io;
pub mod krylov;
pub mod partition;
pub mod problems;
pub mod schwarz;
pub mod sparse;

pub use chol::{cholesky_factorize, cholesky_factorize_dense, CholeskyFactor};
pub use coarse::{
    build_generating_basis, build_restriction, coarse_solution_error, coarsen_generators,
    CoarseSpace, GeneratingBasis, RANK_TOL_DEFAULT,
};
pub use dense::{qr_orthonormalize, DenseMatrix};
pub use error::{Error, Result};
pub use krylov::{
    condition_estimate, fractional_iterations, pcg, ConvergenceReference, PcgOptions,
    Preconditioner, SolveReport,
};
pub use partition::{
    expand_overlap, graph_partition, inertial_partition, node_graph, subdomain_adjacency,
    OverlapSet, Partition,
};
pub use problems::{gaussian_rhs, ProblemInstance};
pub use schwarz::{SchwarzOptions, SubdomainSolve, SweepOrder, TwoLevelPreconditioner};
pub use sparse::{extract_principal_submatrix, triple_product, CsrMatrix};
