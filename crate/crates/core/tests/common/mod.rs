//! Shared test oracles, independent of the implementation paths they check:
//! naive dense linear algebra over `Vec<Vec<f64>>` built straight from the
//! raw CSR arrays, Gaussian elimination with partial pivoting, and seeded
//! random instance generators.
#![allow(dead_code)]

use ddg_core::sparse::CsrMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense copy straight from the raw CSR arrays.
pub fn csr_to_dense(a: &CsrMatrix) -> Dense {
    let mut d = vec![vec![0.0f64; a.ncols()]; a.nrows()];
    let offsets = a.row_offsets();
    let cols = a.col_indices();
    let vals = a.values();
    for i in 0..a.nrows() {
        for p in offsets[i]..offsets[i + 1] {
            d[i][cols[p]] += vals[p];
        }
    }
    d
}

pub fn dense_matvec(m: &Dense, x: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn dense_matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0f64; m]; n];
    for i in 0..n {
        for l in 0..k {
            let ail = a[i][l];
            if ail == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += ail * b[l][j];
            }
        }
    }
    out
}

pub fn dense_transpose(a: &Dense) -> Dense {
    let (n, m) = (a.len(), a[0].len());
    let mut out = vec![vec![0.0f64; n]; m];
    for i in 0..n {
        for j in 0..m {
            out[j][i] = a[i][j];
        }
    }
    out
}

/// Gaussian elimination with partial pivoting; panics on singular input.
pub fn dense_solve_gepp(a: &Dense, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Dense = a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[i][k].abs().partial_cmp(&m[j][k].abs()).unwrap())
            .unwrap();
        m.swap(k, piv);
        x.swap(k, piv);
        assert!(m[k][k] != 0.0, "singular matrix in oracle solve");
        for i in (k + 1)..n {
            let f = m[i][k] / m[k][k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in (k + 1)..n {
            s -= m[k][j] * x[j];
        }
        x[k] = s / m[k][k];
    }
    x
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Random sparse matrix with a fixed density, entries in [-1, 1).
pub fn random_sparse(nrows: usize, ncols: usize, density: f64, seed: u64) -> CsrMatrix {
    let mut r = rng(seed);
    let mut triplets = Vec::new();
    for i in 0..nrows {
        for j in 0..ncols {
            if r.random::<f64>() < density {
                triplets.push((i, j, r.random_range(-1.0f64..1.0)));
            }
        }
    }
    if triplets.is_empty() {
        triplets.push((0, 0, 1.0));
    }
    CsrMatrix::from_triplets(nrows, ncols, &triplets).unwrap()
}

/// Random sparse SPD matrix: symmetrized random pattern plus a diagonal
/// shift that guarantees strict diagonal dominance.
pub fn random_spd(n: usize, density: f64, seed: u64) -> CsrMatrix {
    let mut r = rng(seed);
    let mut triplets = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if r.random::<f64>() < density {
                let v = r.random_range(-1.0f64..1.0);
                triplets.push((i, j, v));
                triplets.push((j, i, v));
            }
        }
    }
    let mut rowsum = vec![0.0f64; n];
    for &(i, _, v) in &triplets {
        rowsum[i] += v.abs();
    }
    for (i, s) in rowsum.iter().enumerate() {
        triplets.push((i, i, s + 1.0 + r.random::<f64>()));
    }
    CsrMatrix::from_triplets(n, n, &triplets)
        .unwrap()
        .into_symmetric()
        .unwrap()
}

/// Five-point Laplacian on an nx-by-ny grid with Dirichlet boundary
/// (eliminated), plus matching node coordinates on the unit square.
pub fn grid_laplacian_2d(nx: usize, ny: usize) -> (CsrMatrix, Vec<f64>) {
    let n = nx * ny;
    let index = |i: usize, j: usize| i + nx * j;
    let mut triplets = Vec::with_capacity(5 * n);
    for j in 0..ny {
        for i in 0..nx {
            let row = index(i, j);
            triplets.push((row, row, 4.0));
            if i > 0 {
                triplets.push((row, index(i - 1, j), -1.0));
            }
            if i + 1 < nx {
                triplets.push((row, index(i + 1, j), -1.0));
            }
            if j > 0 {
                triplets.push((row, index(i, j - 1), -1.0));
            }
            if j + 1 < ny {
                triplets.push((row, index(i, j + 1), -1.0));
            }
        }
    }
    let a = CsrMatrix::from_triplets(n, n, &triplets)
        .unwrap()
        .into_symmetric()
        .unwrap();
    let mut coords = Vec::with_capacity(2 * n);
    for j in 0..ny {
        for i in 0..nx {
            coords.push((i + 1) as f64 / (nx + 1) as f64);
            coords.push((j + 1) as f64 / (ny + 1) as f64);
        }
    }
    (a, coords)
}

/// 1D Dirichlet Laplacian tridiag(-1, 2, -1) with unit-interval coordinates.
pub fn laplacian_1d(n: usize) -> (CsrMatrix, Vec<f64>) {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 2.0));
        if i > 0 {
            t.push((i, i - 1, -1.0));
        }
        if i + 1 < n {
            t.push((i, i + 1, -1.0));
        }
    }
    let a = CsrMatrix::from_triplets(n, n, &t)
        .unwrap()
        .into_symmetric()
        .unwrap();
    let coords: Vec<f64> = (0..n).map(|i| (i + 1) as f64 / (n + 1) as f64).collect();
    (a, coords)
}

pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| r.random_range(-1.0f64..1.0)).collect()
}
