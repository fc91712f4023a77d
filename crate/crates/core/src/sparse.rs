//! Compressed sparse row matrices in canonical form (sorted, deduplicated
//! column indices per row) plus the products the coarse-grid construction is
//! built from: mat-vec, sparse-sparse products, the Galerkin triple product
//! R*A*R^T and principal submatrix extraction.

use crate::error::{Error, Result};
use crate::DenseMatrix;

/// Symmetry check tolerance used when a matrix is flagged symmetric,
/// relative to the largest stored magnitude.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Relative drop tolerance for the Galerkin triple product.
pub const TRIPLE_PRODUCT_DROP_TOL: f64 = 1e-14;

/// Sparse matrix in canonical CSR form.
///
/// Within each row, column indices are strictly increasing and duplicates
/// have been summed. A matrix flagged symmetric stores the full pattern;
/// the flag asserts value symmetry to [`SYMMETRY_TOL`] relative.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl CsrMatrix {
    /// Build from raw CSR arrays, validating canonical form.
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
        symmetric: bool,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::InvalidMatrix(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                nrows + 1
            )));
        }
        if row_offsets[0] != 0 || *row_offsets.last().unwrap() != col_indices.len() {
            return Err(Error::InvalidMatrix(
                "row_offsets must start at 0 and end at nnz".into(),
            ));
        }
        if col_indices.len() != values.len() {
            return Err(Error::InvalidMatrix(
                "col_indices and values length mismatch".into(),
            ));
        }
        for i in 0..nrows {
            if row_offsets[i] > row_offsets[i + 1] {
                return Err(Error::InvalidMatrix(format!(
                    "row_offsets decreases at row {i}"
                )));
            }
            let row = &col_indices[row_offsets[i]..row_offsets[i + 1]];
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidMatrix(format!(
                        "row {i} columns not strictly increasing"
                    )));
                }
            }
            if let Some(&last) = row.last() {
                if last >= ncols {
                    return Err(Error::InvalidMatrix(format!(
                        "row {i} has column {last} >= ncols {ncols}"
                    )));
                }
            }
        }
        let m = CsrMatrix {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
            symmetric,
        };
        if symmetric {
            m.check_symmetric()?;
        }
        Ok(m)
    }

    /// Build from (row, col, value) triplets; duplicate entries are summed
    /// and exact zeros arising from cancellation are kept.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut counts = vec![0usize; nrows];
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::InvalidMatrix(format!(
                    "triplet ({r},{c}) out of bounds for {nrows}x{ncols}"
                )));
            }
            counts[r] += 1;
        }
        let mut offsets = vec![0usize; nrows + 1];
        for i in 0..nrows {
            offsets[i + 1] = offsets[i] + counts[i];
        }
        let nnz_raw = offsets[nrows];
        let mut cols = vec![0usize; nnz_raw];
        let mut vals = vec![0.0f64; nnz_raw];
        let mut cursor = offsets[..nrows].to_vec();
        for &(r, c, v) in triplets {
            cols[cursor[r]] = c;
            vals[cursor[r]] = v;
            cursor[r] += 1;
        }
        // sort and sum duplicates row by row
        let mut out_offsets = vec![0usize; nrows + 1];
        let mut write = 0usize;
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..nrows {
            scratch.clear();
            scratch.extend(
                cols[offsets[i]..offsets[i + 1]]
                    .iter()
                    .copied()
                    .zip(vals[offsets[i]..offsets[i + 1]].iter().copied()),
            );
            scratch.sort_unstable_by_key(|e| e.0);
            let mut k = 0;
            while k < scratch.len() {
                let c = scratch[k].0;
                let mut v = scratch[k].1;
                let mut k2 = k + 1;
                while k2 < scratch.len() && scratch[k2].0 == c {
                    v += scratch[k2].1;
                    k2 += 1;
                }
                cols[write] = c;
                vals[write] = v;
                write += 1;
                k = k2;
            }
            out_offsets[i + 1] = write;
        }
        cols.truncate(write);
        vals.truncate(write);
        cols.shrink_to_fit();
        vals.shrink_to_fit();
        Ok(CsrMatrix {
            nrows,
            ncols,
            row_offsets: out_offsets,
            col_indices: cols,
            values: vals,
            symmetric: false,
        })
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
            symmetric: true,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_symmetric_flagged(&self) -> bool {
        self.symmetric
    }

    /// Columns and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Flag the matrix symmetric after verifying pattern and value symmetry.
    pub fn into_symmetric(mut self) -> Result<Self> {
        self.symmetric = true;
        self.check_symmetric()?;
        Ok(self)
    }

    fn check_symmetric(&self) -> Result<()> {
        if self.nrows != self.ncols {
            return Err(Error::InvalidMatrix(format!(
                "symmetric flag on a {}x{} matrix",
                self.nrows, self.ncols
            )));
        }
        let t = self.transpose_impl(false);
        if t.row_offsets != self.row_offsets || t.col_indices != self.col_indices {
            return Err(Error::InvalidMatrix(
                "symmetric flag set but sparsity pattern is not symmetric".into(),
            ));
        }
        let tol = SYMMETRY_TOL * self.max_abs();
        for (a, b) in self.values.iter().zip(&t.values) {
            if (a - b).abs() > tol {
                return Err(Error::InvalidMatrix(format!(
                    "symmetric flag set but |a_ij - a_ji| = {:e} exceeds {:e}",
                    (a - b).abs(),
                    tol
                )));
            }
        }
        Ok(())
    }

    /// y = A x.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::dim(
                "spmv",
                format!("matrix is {}x{}, vector has {}", self.nrows, self.ncols, x.len()),
            ));
        }
        let mut y = vec![0.0; self.nrows];
        for i in 0..self.nrows {
            y[i] = self.row_dot(i, x);
        }
        Ok(y)
    }

    /// Dot product of row `i` with `x`; `x` must have `ncols` entries.
    #[inline]
    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (cols, vals) = self.row(i);
        let mut s = 0.0;
        for (&c, &v) in cols.iter().zip(vals) {
            s += v * x[c];
        }
        s
    }

    /// y = A^T x, accumulated column-wise.
    pub fn spmv_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.nrows {
            return Err(Error::dim(
                "spmv_transpose",
                format!("matrix is {}x{}, vector has {}", self.nrows, self.ncols, x.len()),
            ));
        }
        let mut y = vec![0.0; self.ncols];
        for i in 0..self.nrows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                y[c] += v * xi;
            }
        }
        Ok(y)
    }

    pub fn transpose(&self) -> CsrMatrix {
        self.transpose_impl(self.symmetric)
    }

    fn transpose_impl(&self, symmetric: bool) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols];
        for &c in &self.col_indices {
            counts[c] += 1;
        }
        let mut offsets = vec![0usize; self.ncols + 1];
        for j in 0..self.ncols {
            offsets[j + 1] = offsets[j] + counts[j];
        }
        let mut cols = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        let mut cursor = offsets[..self.ncols].to_vec();
        for i in 0..self.nrows {
            let (rc, rv) = self.row(i);
            for (&c, &v) in rc.iter().zip(rv) {
                cols[cursor[c]] = i;
                vals[cursor[c]] = v;
                cursor[c] += 1;
            }
        }
        // rows are visited in increasing order, so each output row is sorted
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets: offsets,
            col_indices: cols,
            values: vals,
            symmetric,
        }
    }

    /// Sparse-sparse product A*B (Gustavson row merge).
    pub fn matmul(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::dim(
                "CsrMatrix::matmul",
                format!(
                    "{}x{} * {}x{}",
                    self.nrows, self.ncols, other.nrows, other.ncols
                ),
            ));
        }
        let n_out_cols = other.ncols;
        let mut acc = vec![0.0f64; n_out_cols];
        let mut stamp = vec![usize::MAX; n_out_cols];
        let mut touched: Vec<usize> = Vec::new();

        let mut offsets = Vec::with_capacity(self.nrows + 1);
        offsets.push(0usize);
        let mut cols_out: Vec<usize> = Vec::new();
        let mut vals_out: Vec<f64> = Vec::new();

        for i in 0..self.nrows {
            touched.clear();
            let (ac, av) = self.row(i);
            for (&k, &aik) in ac.iter().zip(av) {
                let (bc, bv) = other.row(k);
                for (&j, &bkj) in bc.iter().zip(bv) {
                    if stamp[j] != i {
                        stamp[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += aik * bkj;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                cols_out.push(j);
                vals_out.push(acc[j]);
            }
            offsets.push(cols_out.len());
        }
        Ok(CsrMatrix {
            nrows: self.nrows,
            ncols: n_out_cols,
            row_offsets: offsets,
            col_indices: cols_out,
            values: vals_out,
            symmetric: false,
        })
    }

    /// Remove stored entries with magnitude below `threshold` (absolute).
    pub fn drop_below(&mut self, threshold: f64) {
        if threshold <= 0.0 {
            return;
        }
        let mut write = 0usize;
        let mut offsets = vec![0usize; self.nrows + 1];
        for i in 0..self.nrows {
            let lo = self.row_offsets[i];
            let hi = self.row_offsets[i + 1];
            for k in lo..hi {
                if self.values[k].abs() >= threshold {
                    self.col_indices[write] = self.col_indices[k];
                    self.values[write] = self.values[k];
                    write += 1;
                }
            }
            offsets[i + 1] = write;
        }
        self.col_indices.truncate(write);
        self.values.truncate(write);
        self.row_offsets = offsets;
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                d.set(i, c, v);
            }
        }
        d
    }

    /// Diagonal entries (zero where not stored).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }
}

/// Galerkin triple product R*A*R^T in canonical CSR.
///
/// `A` must be flagged symmetric. The result is exactly symmetric in pattern
/// and values (the product is averaged with its transpose) and entries below
/// [`TRIPLE_PRODUCT_DROP_TOL`] times the largest magnitude are dropped.
pub fn triple_product(r: &CsrMatrix, a: &CsrMatrix) -> Result<CsrMatrix> {
    if r.ncols() != a.nrows() {
        return Err(Error::dim(
            "triple_product",
            format!(
                "R is {}x{}, A is {}x{}",
                r.nrows(),
                r.ncols(),
                a.nrows(),
                a.ncols()
            ),
        ));
    }
    if !a.is_symmetric_flagged() {
        return Err(Error::InvalidArgument(
            "triple_product requires a symmetric A".into(),
        ));
    }
    let ra = r.matmul(a)?;
    let rt = r.transpose();
    let mut b = ra.matmul(&rt)?;
    b.drop_below(TRIPLE_PRODUCT_DROP_TOL * b.max_abs());
    // enforce exact symmetry of pattern and values
    let bt = b.transpose();
    let mut sym = add_halves(&b, &bt);
    sym.symmetric = true;
    Ok(sym)
}

/// (X + Y)/2 with the union pattern. Exact when X == Y bitwise.
fn add_halves(x: &CsrMatrix, y: &CsrMatrix) -> CsrMatrix {
    debug_assert_eq!(x.nrows, y.nrows);
    debug_assert_eq!(x.ncols, y.ncols);
    let mut offsets = Vec::with_capacity(x.nrows + 1);
    offsets.push(0usize);
    let mut cols = Vec::with_capacity(x.nnz());
    let mut vals = Vec::with_capacity(x.nnz());
    for i in 0..x.nrows {
        let (xc, xv) = x.row(i);
        let (yc, yv) = y.row(i);
        let (mut p, mut q) = (0usize, 0usize);
        while p < xc.len() || q < yc.len() {
            let cx = if p < xc.len() { xc[p] } else { usize::MAX };
            let cy = if q < yc.len() { yc[q] } else { usize::MAX };
            if cx == cy {
                cols.push(cx);
                vals.push(0.5 * (xv[p] + yv[q]));
                p += 1;
                q += 1;
            } else if cx < cy {
                cols.push(cx);
                vals.push(0.5 * xv[p]);
                p += 1;
            } else {
                cols.push(cy);
                vals.push(0.5 * yv[q]);
                q += 1;
            }
        }
        offsets.push(cols.len());
    }
    CsrMatrix {
        nrows: x.nrows,
        ncols: x.ncols,
        row_offsets: offsets,
        col_indices: cols,
        values: vals,
        symmetric: false,
    }
}

/// Principal submatrix A[idx, idx] for a strictly increasing index set.
pub fn extract_principal_submatrix(a: &CsrMatrix, idx: &[usize]) -> Result<CsrMatrix> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidArgument(format!(
            "principal submatrix of a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    for w in idx.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidArgument(
                "index set must be strictly increasing".into(),
            ));
        }
    }
    if let Some(&last) = idx.last() {
        if last >= a.nrows() {
            return Err(Error::InvalidArgument(format!(
                "index {} out of range for {} rows",
                last,
                a.nrows()
            )));
        }
    }
    let mut local = vec![usize::MAX; a.nrows()];
    for (li, &gi) in idx.iter().enumerate() {
        local[gi] = li;
    }
    let mut offsets = Vec::with_capacity(idx.len() + 1);
    offsets.push(0usize);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for &gi in idx {
        let (rc, rv) = a.row(gi);
        for (&c, &v) in rc.iter().zip(rv) {
            let lc = local[c];
            if lc != usize::MAX {
                cols.push(lc);
                vals.push(v);
            }
        }
        offsets.push(cols.len());
    }
    Ok(CsrMatrix {
        nrows: idx.len(),
        ncols: idx.len(),
        row_offsets: offsets,
        col_indices: cols,
        values: vals,
        symmetric: a.is_symmetric_flagged(),
    })
}
