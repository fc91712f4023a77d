//! Exact symmetric positive definite solves.
//!
//! Small matrices use a dense left-looking Cholesky; larger ones use a sparse
//! up-looking Cholesky over the elimination tree with a reverse Cuthill-McKee
//! ordering to limit fill. Subdomain and coarse solves both go through
//! [`CholeskyFactor::solve`].

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::DenseMatrix;

/// Matrices up to this dimension are factorized densely.
pub const DENSE_CHOLESKY_MAX_DIM: usize = 800;

/// Pivot threshold relative to the largest diagonal entry; anything at or
/// below it is reported as not positive definite.
const REL_PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct DenseCholesky {
    n: usize,
    /// Lower factor, column-major, full storage.
    l: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SparseCholesky {
    n: usize,
    /// perm[new] = old index (reverse Cuthill-McKee).
    perm: Vec<usize>,
    /// L in compressed sparse column form, diagonal entry first in each column.
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
}

/// A Cholesky factorization of a symmetric positive definite matrix,
/// either dense or fill-reduced sparse depending on the dimension.
#[derive(Debug, Clone)]
pub enum CholeskyFactor {
    Dense(DenseCholesky),
    Sparse(SparseCholesky),
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        match self {
            CholeskyFactor::Dense(f) => f.n,
            CholeskyFactor::Sparse(f) => f.n,
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.dim() {
            return Err(Error::dim(
                "CholeskyFactor::solve",
                format!("factor dimension {}, rhs length {}", self.dim(), b.len()),
            ));
        }
        match self {
            CholeskyFactor::Dense(f) => Ok(f.solve(b)),
            CholeskyFactor::Sparse(f) => Ok(f.solve(b)),
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, CholeskyFactor::Dense(_))
    }
}

/// Factorize a symmetric CSR matrix, choosing dense or sparse storage by
/// dimension. The matrix must carry the symmetric flag.
pub fn cholesky_factorize(a: &CsrMatrix) -> Result<CholeskyFactor> {
    if a.nrows() != a.ncols() {
        return Err(Error::dim(
            "cholesky_factorize",
            format!("matrix is {}x{}", a.nrows(), a.ncols()),
        ));
    }
    if !a.is_symmetric_flagged() {
        return Err(Error::InvalidArgument(
            "cholesky_factorize requires the symmetric flag".into(),
        ));
    }
    if a.nrows() <= DENSE_CHOLESKY_MAX_DIM {
        Ok(CholeskyFactor::Dense(DenseCholesky::factorize_csr(a)?))
    } else {
        Ok(CholeskyFactor::Sparse(SparseCholesky::factorize(a)?))
    }
}

/// Dense-input variant of [`cholesky_factorize`].
pub fn cholesky_factorize_dense(a: &DenseMatrix) -> Result<CholeskyFactor> {
    if a.nrows() != a.ncols() {
        return Err(Error::dim(
            "cholesky_factorize_dense",
            format!("matrix is {}x{}", a.nrows(), a.ncols()),
        ));
    }
    let n = a.nrows();
    let mut max_asym = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            max_asym = max_asym.max((a.get(i, j) - a.get(j, i)).abs());
        }
    }
    if max_asym > 1e-12 * a.max_abs() {
        return Err(Error::InvalidArgument(
            "cholesky_factorize_dense requires a symmetric matrix".into(),
        ));
    }
    Ok(CholeskyFactor::Dense(DenseCholesky::factorize_with(
        n,
        |i, j| a.get(i, j),
    )?))
}

impl DenseCholesky {
    fn factorize_csr(a: &CsrMatrix) -> Result<Self> {
        Self::factorize_with(a.nrows(), |i, j| a.get(i, j))
    }

    fn factorize_with(n: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut l = vec![0.0f64; n * n];
        let mut max_diag = 0.0f64;
        for k in 0..n {
            max_diag = max_diag.max(entry(k, k).abs());
            for i in k..n {
                l[k * n + i] = entry(i, k);
            }
        }
        let pivot_tol = REL_PIVOT_TOL * max_diag;
        for k in 0..n {
            for j in 0..k {
                let c = l[j * n + k];
                if c == 0.0 {
                    continue;
                }
                let (head, tail) = l.split_at_mut(k * n);
                let colj = &head[j * n..j * n + n];
                let colk = &mut tail[..n];
                for i in k..n {
                    colk[i] -= c * colj[i];
                }
            }
            let pivot = l[k * n + k];
            if pivot <= pivot_tol {
                return Err(Error::NotPositiveDefinite { index: k, pivot });
            }
            let s = pivot.sqrt();
            l[k * n + k] = s;
            let inv = 1.0 / s;
            for i in (k + 1)..n {
                l[k * n + i] *= inv;
            }
        }
        Ok(DenseCholesky { n, l })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for j in 0..n {
            x[j] /= self.l[j * n + j];
            let xj = x[j];
            for i in (j + 1)..n {
                x[i] -= self.l[j * n + i] * xj;
            }
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for i in (j + 1)..n {
                s -= self.l[j * n + i] * x[i];
            }
            x[j] = s / self.l[j * n + j];
        }
        x
    }
}

/// Reverse Cuthill-McKee ordering of a symmetric pattern.
/// Returns perm with `perm[new] = old`. Deterministic: ties break on index.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree = |i: usize| a.row(i).0.len();
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    let mut neigh: Vec<usize> = Vec::new();

    let mut start_candidates: Vec<usize> = (0..n).collect();
    start_candidates.sort_by_key(|&i| (degree(i), i));

    for &cand in &start_candidates {
        if visited[cand] {
            continue;
        }
        // pseudo-peripheral start: two BFS passes from the candidate
        let start = {
            let far = bfs_farthest(a, cand);
            bfs_farthest(a, far)
        };
        visited[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            neigh.clear();
            neigh.extend(a.row(u).0.iter().copied().filter(|&v| v != u && !visited[v]));
            neigh.sort_by_key(|&v| (degree(v), v));
            for &v in &neigh {
                if !visited[v] {
                    visited[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    order.reverse();
    order
}

fn bfs_farthest(a: &CsrMatrix, start: usize) -> usize {
    let n = a.nrows();
    let mut dist = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    dist[start] = 0;
    queue.push_back(start);
    let mut far = start;
    while let Some(u) = queue.pop_front() {
        for &v in a.row(u).0 {
            if v != u && dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                // prefer larger distance, then smaller degree, then index
                if dist[v] > dist[far]
                    || (dist[v] == dist[far]
                        && (a.row(v).0.len(), v) < (a.row(far).0.len(), far))
                {
                    far = v;
                }
                queue.push_back(v);
            }
        }
    }
    far
}

const NONE: usize = usize::MAX;

impl SparseCholesky {
    fn factorize(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        let perm = rcm_ordering(a);
        let mut inv_perm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv_perm[old] = new;
        }
        // permuted copy B = P A P^T
        let mut trip: Vec<(usize, usize, f64)> = Vec::with_capacity(a.nnz());
        for i in 0..n {
            let (cols, vals) = a.row(i);
            let pi = inv_perm[i];
            for (&c, &v) in cols.iter().zip(vals) {
                trip.push((pi, inv_perm[c], v));
            }
        }
        let b = CsrMatrix::from_triplets(n, n, &trip)?;
        drop(trip);

        let parent = etree(&b);

        // symbolic: column counts of L
        let mut count = vec![1usize; n]; // diagonal
        {
            let mut flag = vec![NONE; n];
            let mut stack = vec![0usize; n];
            for k in 0..n {
                let top = ereach(&b, k, &parent, &mut flag, &mut stack);
                for &j in &stack[top..n] {
                    count[j] += 1;
                }
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for j in 0..n {
            col_ptr[j + 1] = col_ptr[j] + count[j];
        }
        let nnz = col_ptr[n];
        let mut row_idx = vec![0usize; nnz];
        let mut vals = vec![0.0f64; nnz];
        let mut cursor = col_ptr[..n].to_vec();

        let max_diag = (0..n).fold(0.0f64, |m, i| m.max(b.get(i, i).abs()));
        let pivot_tol = REL_PIVOT_TOL * max_diag;

        let mut x = vec![0.0f64; n];
        let mut flag = vec![NONE; n];
        let mut stack = vec![0usize; n];
        for k in 0..n {
            let top = ereach(&b, k, &parent, &mut flag, &mut stack);
            let mut d = 0.0f64;
            {
                let (cols, v) = b.row(k);
                for (&c, &bv) in cols.iter().zip(v) {
                    if c < k {
                        x[c] = bv;
                    } else if c == k {
                        d = bv;
                    }
                }
            }
            for t in top..n {
                let i = stack[t];
                let lki = x[i] / vals[col_ptr[i]];
                x[i] = 0.0;
                for p in (col_ptr[i] + 1)..cursor[i] {
                    x[row_idx[p]] -= vals[p] * lki;
                }
                d -= lki * lki;
                row_idx[cursor[i]] = k;
                vals[cursor[i]] = lki;
                cursor[i] += 1;
            }
            if d <= pivot_tol {
                return Err(Error::NotPositiveDefinite {
                    index: perm[k],
                    pivot: d,
                });
            }
            row_idx[cursor[k]] = k;
            vals[cursor[k]] = d.sqrt();
            cursor[k] += 1;
        }
        Ok(SparseCholesky {
            n,
            perm,
            col_ptr,
            row_idx,
            vals,
        })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0f64; n];
        for new in 0..n {
            y[new] = b[self.perm[new]];
        }
        // L z = y, column-oriented
        for j in 0..n {
            let p0 = self.col_ptr[j];
            y[j] /= self.vals[p0];
            let zj = y[j];
            for p in (p0 + 1)..self.col_ptr[j + 1] {
                y[self.row_idx[p]] -= self.vals[p] * zj;
            }
        }
        // L^T x = z
        for j in (0..n).rev() {
            let p0 = self.col_ptr[j];
            let mut s = y[j];
            for p in (p0 + 1)..self.col_ptr[j + 1] {
                s -= self.vals[p] * y[self.row_idx[p]];
            }
            y[j] = s / self.vals[p0];
        }
        let mut x = vec![0.0f64; n];
        for new in 0..n {
            x[self.perm[new]] = y[new];
        }
        x
    }
}

/// Elimination tree of a symmetric CSR matrix (lower-triangle pattern).
fn etree(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for i in 0..n {
        for &j in a.row(i).0 {
            if j >= i {
                continue;
            }
            let mut jj = j;
            loop {
                if ancestor[jj] == i {
                    break;
                }
                let next = ancestor[jj];
                ancestor[jj] = i;
                if next == NONE {
                    parent[jj] = i;
                    break;
                }
                jj = next;
            }
        }
    }
    parent
}

/// Nonzero pattern of row `k` of L: reach of row k's lower entries in the
/// elimination tree. Returns `top`; the pattern is `stack[top..n]` in
/// topological order.
fn ereach(
    a: &CsrMatrix,
    k: usize,
    parent: &[usize],
    flag: &mut [usize],
    stack: &mut [usize],
) -> usize {
    let n = a.nrows();
    let mut top = n;
    flag[k] = k;
    for &j in a.row(k).0 {
        if j >= k {
            continue;
        }
        let mut i = j;
        let mut len = 0usize;
        while flag[i] != k {
            stack[len] = i;
            len += 1;
            flag[i] = k;
            i = parent[i];
            if i == NONE {
                break;
            }
        }
        while len > 0 {
            len -= 1;
            top -= 1;
            stack[top] = stack[len];
        }
    }
    top
}
