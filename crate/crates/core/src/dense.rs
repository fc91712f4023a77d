//! Dense column-major matrices and the small dense kernels the coarse-grid
//! construction needs: orthonormalization with rank detection and a Jacobi
//! eigensolver used for inertial axes and test oracles.

use crate::error::{Error, Result};

/// Dense matrix, column-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix {
            nrows,
            ncols,
            values: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_column_major(nrows: usize, ncols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != nrows * ncols {
            return Err(Error::dim(
                "DenseMatrix::from_column_major",
                format!("{}x{} needs {} values, got {}", nrows, ncols, nrows * ncols, values.len()),
            ));
        }
        Ok(DenseMatrix { nrows, ncols, values })
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DenseMatrix::zeros(nrows, ncols);
        for j in 0..ncols {
            for i in 0..nrows {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.values[j * self.nrows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.values[j * self.nrows + i] = v;
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.values[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.ncols, self.nrows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::dim(
                "DenseMatrix::matmul",
                format!("{}x{} * {}x{}", self.nrows, self.ncols, other.nrows, other.ncols),
            ));
        }
        let mut out = DenseMatrix::zeros(self.nrows, other.ncols);
        for j in 0..other.ncols {
            let bcol = other.column(j);
            let ocol = out.column_mut(j);
            for (k, &bkj) in bcol.iter().enumerate() {
                if bkj == 0.0 {
                    continue;
                }
                let acol = &self.values[k * self.nrows..(k + 1) * self.nrows];
                for i in 0..self.nrows {
                    ocol[i] += acol[i] * bkj;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::dim(
                "DenseMatrix::matvec",
                format!("matrix is {}x{}, vector has {}", self.nrows, self.ncols, x.len()),
            ));
        }
        let mut y = vec![0.0; self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (i, &a) in self.column(j).iter().enumerate() {
                y[i] += a * xj;
            }
        }
        Ok(y)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormalize the columns of `m`, dropping numerically dependent columns.
///
/// Modified Gram-Schmidt with one re-orthogonalization pass. A column is kept
/// when its residual norm after projection is at least `rank_tol` times the
/// largest column norm of the input; kept column indices are returned in
/// original order. A zero input yields an empty `Q`.
pub fn qr_orthonormalize(m: &DenseMatrix, rank_tol: f64) -> (DenseMatrix, Vec<usize>) {
    let n = m.nrows();
    let scale = (0..m.ncols())
        .map(|j| norm2(m.column(j)))
        .fold(0.0_f64, f64::max);
    let threshold = rank_tol * scale;

    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    for j in 0..m.ncols() {
        let mut v = m.column(j).to_vec();
        for _ in 0..2 {
            for qi in &q {
                let c = dot(qi, &v);
                for (vk, qk) in v.iter_mut().zip(qi) {
                    *vk -= c * qk;
                }
            }
        }
        let r = norm2(&v);
        if r <= threshold || r == 0.0 {
            continue;
        }
        let inv = 1.0 / r;
        for vk in v.iter_mut() {
            *vk *= inv;
        }
        q.push(v);
        kept.push(j);
    }

    let mut out = DenseMatrix::zeros(n, q.len());
    for (jj, col) in q.iter().enumerate() {
        out.column_mut(jj).copy_from_slice(col);
    }
    (out, kept)
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order with matching eigenvector columns.
/// Intended for small matrices (inertial axes, coarse oracles).
pub fn symmetric_eigen(m: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    if m.nrows() != m.ncols() {
        return Err(Error::dim(
            "symmetric_eigen",
            format!("matrix is {}x{}", m.nrows(), m.ncols()),
        ));
    }
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = DenseMatrix::identity(n);

    let off = |a: &DenseMatrix| -> f64 {
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..j {
                s += a.get(i, j) * a.get(i, j);
            }
        }
        s.sqrt()
    };
    let fro = (a.values().iter().map(|x| x * x).sum::<f64>()).sqrt();
    let tol = 1e-14 * fro.max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        if off(&a) <= tol {
            break;
        }
        for p in 0..n {
            for qi in (p + 1)..n {
                let apq = a.get(p, qi);
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(qi, qi);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, qi);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, qi, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(qi, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(qi, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, qi);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, qi, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).partial_cmp(&a.get(j, j)).unwrap());
    let eigvals: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut eigvecs = DenseMatrix::zeros(n, n);
    for (jj, &i) in order.iter().enumerate() {
        for k in 0..n {
            eigvecs.set(k, jj, v.get(k, i));
        }
    }
    Ok((eigvals, eigvecs))
}

/// Eigenvalues only; convenience wrapper around [`symmetric_eigen`].
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(symmetric_eigen(m)?.0)
}
