//! Coarse space construction from generating vectors.
//!
//! The generating basis F spans a degree-p polynomial space evaluated at the
//! nodal coordinates (per solution component, optionally masked per
//! material). Restricting each column of F to each partition part and
//! orthonormalizing part-by-part yields the block-orthonormal restriction
//! R0; Galerkin projection A0 = R0*A*R0^T gives the coarse operator. With
//! p = 0 and a single material this reduces to classical non-smoothed
//! aggregation (normalized part indicator rows).

use crate::chol::{cholesky_factorize, CholeskyFactor};
use crate::dense::{qr_orthonormalize, DenseMatrix};
use crate::error::{Error, Result};
use crate::partition::{subdomain_adjacency, Partition};
use crate::sparse::{triple_product, CsrMatrix};

/// Default relative tolerance for dropping numerically rank-deficient
/// columns during per-part orthonormalization.
pub const RANK_TOL_DEFAULT: f64 = 1e-8;

/// Provenance of one generating-basis column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnLabel {
    pub component: usize,
    pub material: usize,
    /// Monomial exponents, one per spatial dimension.
    pub exponents: Vec<u32>,
}

/// Dense column set spanning the degree-p polynomials per component and per
/// material, evaluated at (rescaled) nodal coordinates.
#[derive(Debug, Clone)]
pub struct GeneratingBasis {
    pub columns: DenseMatrix,
    pub degree: usize,
    pub num_components: usize,
    pub num_materials: usize,
    pub column_labels: Vec<ColumnLabel>,
}

impl GeneratingBasis {
    pub fn num_columns(&self) -> usize {
        self.columns.ncols()
    }
}

/// Monomial exponent tuples with total degree at most `degree`, in graded
/// lexicographic order.
pub fn monomial_exponents(dim: usize, degree: usize) -> Vec<Vec<u32>> {
    fn fill(dim: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if dim == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=remaining).rev() {
            prefix.push(e);
            fill(dim - 1, remaining - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=degree as u32 {
        let mut prefix = Vec::new();
        fill(dim, total, &mut prefix, &mut out);
    }
    out
}

/// Affine map of each coordinate axis onto [-1, 1] (degenerate axes map to 0),
/// which keeps high-degree monomials well scaled regardless of the domain.
fn rescale_coords(coords: &[f64], dim: usize) -> Vec<f64> {
    let n = coords.len() / dim;
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for i in 0..n {
        for k in 0..dim {
            let x = coords[i * dim + k];
            lo[k] = lo[k].min(x);
            hi[k] = hi[k].max(x);
        }
    }
    let mut out = vec![0.0f64; coords.len()];
    for i in 0..n {
        for k in 0..dim {
            if hi[k] > lo[k] {
                out[i * dim + k] = 2.0 * (coords[i * dim + k] - lo[k]) / (hi[k] - lo[k]) - 1.0;
            }
        }
    }
    out
}

/// Build the generating basis from nodal coordinates.
///
/// Column order is component-major, then material, then monomials in graded
/// lexicographic order. Material index 0 carries no mask; material m >= 1 is
/// masked by the nodewise indicator of that material, so two materials double
/// the column count.
pub fn build_generating_basis(
    coords: &[f64],
    dim: usize,
    degree: usize,
    num_components: usize,
    material_of_node: Option<&[usize]>,
) -> Result<GeneratingBasis> {
    if dim == 0 || coords.len() % dim != 0 {
        return Err(Error::InvalidArgument(format!(
            "coords length {} is not a multiple of dim {dim}",
            coords.len()
        )));
    }
    if num_components == 0 {
        return Err(Error::InvalidArgument("num_components must be >= 1".into()));
    }
    let n_nodes = coords.len() / dim;
    if coords.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("coords must be finite".into()));
    }
    if let Some(mat) = material_of_node {
        if mat.len() != n_nodes {
            return Err(Error::dim(
                "build_generating_basis",
                format!("{} material ids for {} nodes", mat.len(), n_nodes),
            ));
        }
    }
    let num_materials = material_of_node
        .map(|m| m.iter().copied().max().map_or(1, |mx| mx + 1))
        .unwrap_or(1);

    let rescaled = rescale_coords(coords, dim);
    let exponents = monomial_exponents(dim, degree);
    let k = num_components * num_materials * exponents.len();
    let nrows = n_nodes * num_components;

    let mut columns = DenseMatrix::zeros(nrows, k);
    let mut column_labels = Vec::with_capacity(k);
    let mut col = 0usize;
    for component in 0..num_components {
        for material in 0..num_materials {
            for exps in &exponents {
                let out = columns.column_mut(col);
                for node in 0..n_nodes {
                    let mask = match (material, material_of_node) {
                        (0, _) => 1.0,
                        (m, Some(mat)) => {
                            if mat[node] == m {
                                1.0
                            } else {
                                0.0
                            }
                        }
                        _ => unreachable!("num_materials > 1 implies material ids"),
                    };
                    if mask == 0.0 {
                        continue;
                    }
                    let mut v = mask;
                    for (kdim, &e) in exps.iter().enumerate() {
                        if e > 0 {
                            v *= rescaled[node * dim + kdim].powi(e as i32);
                        }
                    }
                    out[node * num_components + component] = v;
                }
                column_labels.push(ColumnLabel {
                    component,
                    material,
                    exponents: exps.clone(),
                });
                col += 1;
            }
        }
    }
    Ok(GeneratingBasis {
        columns,
        degree,
        num_components,
        num_materials,
        column_labels,
    })
}

/// Orthonormalize F part-by-part into the block restriction R0.
///
/// Row block i holds the orthonormalized columns of F restricted to part i;
/// `block_ranks[i]` records how many columns survived rank pruning.
pub fn build_restriction(
    f: &GeneratingBasis,
    part: &Partition,
    rank_tol: f64,
) -> Result<(CsrMatrix, Vec<usize>)> {
    let n = part.len();
    if f.columns.nrows() != n {
        return Err(Error::dim(
            "build_restriction",
            format!(
                "generating basis has {} rows, partition {}",
                f.columns.nrows(),
                n
            ),
        ));
    }
    let k = f.num_columns();
    let parts = part.parts();

    let mut offsets = vec![0usize];
    let mut cols_out = Vec::new();
    let mut vals_out = Vec::new();
    let mut block_ranks = Vec::with_capacity(parts.len());
    for (pi, idx) in parts.iter().enumerate() {
        let block = DenseMatrix::from_fn(idx.len(), k, |r, c| f.columns.get(idx[r], c));
        if block.max_abs() == 0.0 {
            return Err(Error::ZeroBasisBlock { part: pi });
        }
        let (q, _kept) = qr_orthonormalize(&block, rank_tol);
        if q.ncols() == 0 {
            return Err(Error::ZeroBasisBlock { part: pi });
        }
        block_ranks.push(q.ncols());
        for j in 0..q.ncols() {
            let qcol = q.column(j);
            for (r, &node) in idx.iter().enumerate() {
                if qcol[r] != 0.0 {
                    cols_out.push(node);
                    vals_out.push(qcol[r]);
                }
            }
            offsets.push(cols_out.len());
        }
    }
    let nrows = offsets.len() - 1;
    let r0 = CsrMatrix::from_csr(nrows, n, offsets, cols_out, vals_out, false)?;
    Ok((r0, block_ranks))
}

/// Orthonormal restriction, Galerkin coarse matrix and its factorization.
#[derive(Debug, Clone)]
pub struct CoarseSpace {
    pub restriction: CsrMatrix,
    pub coarse_matrix: CsrMatrix,
    coarse_factor: CholeskyFactor,
    pub block_ranks: Vec<usize>,
    pub partition: Partition,
}

impl CoarseSpace {
    /// Build the coarse space: per-part orthonormalization, Galerkin triple
    /// product, block-sparsity verification against the subdomain adjacency,
    /// and factorization of A0.
    pub fn build(
        a: &CsrMatrix,
        f: &GeneratingBasis,
        part: &Partition,
        rank_tol: f64,
    ) -> Result<Self> {
        if a.nrows() != part.len() {
            return Err(Error::dim(
                "CoarseSpace::build",
                format!("matrix has {} rows, partition {}", a.nrows(), part.len()),
            ));
        }
        let (restriction, block_ranks) = build_restriction(f, part, rank_tol)?;
        let coarse_matrix = triple_product(&restriction, a)?;

        let row_block = block_row_map(&block_ranks);
        let adjacency = subdomain_adjacency(part, a)?;
        for i in 0..coarse_matrix.nrows() {
            let bi = row_block[i];
            for &j in coarse_matrix.row(i).0 {
                let bj = row_block[j];
                if adjacency.get(bi, bj) == 0.0 {
                    return Err(Error::InvalidMatrix(format!(
                        "coarse entry ({i},{j}) couples parts {bi} and {bj} \
                         outside the subdomain adjacency pattern"
                    )));
                }
            }
        }

        let coarse_factor = match cholesky_factorize(&coarse_matrix) {
            Ok(fac) => fac,
            Err(Error::NotPositiveDefinite { index, pivot }) => {
                return Err(Error::CoarseNotPositiveDefinite {
                    block: row_block[index],
                    pivot,
                })
            }
            Err(e) => return Err(e),
        };
        Ok(CoarseSpace {
            restriction,
            coarse_matrix,
            coarse_factor,
            block_ranks,
            partition: part.clone(),
        })
    }

    pub fn coarse_rank(&self) -> usize {
        self.restriction.nrows()
    }

    pub fn coarse_factor(&self) -> &CholeskyFactor {
        &self.coarse_factor
    }

    /// Part id owning coarse row `row`.
    pub fn block_of_coarse_row(&self, row: usize) -> usize {
        block_row_map(&self.block_ranks)[row]
    }

    /// R0^T A0^{-1} R0 r: the coarse-grid correction of a residual.
    pub fn coarse_correct(&self, r: &[f64]) -> Result<Vec<f64>> {
        let rc = self.restriction.spmv(r)?;
        let yc = self.coarse_factor.solve(&rc)?;
        self.restriction.spmv_transpose(&yc)
    }
}

fn block_row_map(block_ranks: &[usize]) -> Vec<usize> {
    let total: usize = block_ranks.iter().sum();
    let mut map = Vec::with_capacity(total);
    for (b, &r) in block_ranks.iter().enumerate() {
        for _ in 0..r {
            map.push(b);
        }
    }
    map
}

/// Coarsened generating vectors F0 = R0 F, carrying the same column labels.
pub fn coarsen_generators(cs: &CoarseSpace, f: &GeneratingBasis) -> Result<GeneratingBasis> {
    if f.columns.nrows() != cs.restriction.ncols() {
        return Err(Error::dim(
            "coarsen_generators",
            format!(
                "generating basis has {} rows, restriction has {} columns",
                f.columns.nrows(),
                cs.restriction.ncols()
            ),
        ));
    }
    let k = f.num_columns();
    let m = cs.coarse_rank();
    let mut columns = DenseMatrix::zeros(m, k);
    for j in 0..k {
        let col = cs.restriction.spmv(f.columns.column(j))?;
        columns.column_mut(j).copy_from_slice(&col);
    }
    Ok(GeneratingBasis {
        columns,
        degree: f.degree,
        num_components: f.num_components,
        num_materials: f.num_materials,
        column_labels: f.column_labels.clone(),
    })
}

/// A-norm of the coarse-solution error against a reference fine solution:
/// || R0^T A0^{-1} R0 f  -  reference ||_A.
pub fn coarse_solution_error(
    a: &CsrMatrix,
    f_rhs: &[f64],
    cs: &CoarseSpace,
    reference: &[f64],
) -> Result<f64> {
    let uc = cs.coarse_correct(f_rhs)?;
    let e: Vec<f64> = uc.iter().zip(reference).map(|(u, r)| u - r).collect();
    let ae = a.spmv(&e)?;
    let sq: f64 = e.iter().zip(&ae).map(|(x, y)| x * y).sum();
    Ok(sq.max(0.0).sqrt())
}
