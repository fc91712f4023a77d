//! Finite difference generators: the 3D 7-point Poisson operator with one
//! Dirichlet face, and the 2D 13-point biharmonic (clamped plate) operator.

use super::{gaussian_rhs, ProblemInstance};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// 7-point Poisson operator on an m x m x m grid, h = 1/m.
///
/// The x = 0 face is Dirichlet: its missing neighbor is eliminated and the
/// row keeps the full 6/h^2 diagonal. All other faces are Neumann: the
/// diagonal drops by 1/h^2 per missing neighbor. Node order is x-fastest;
/// the right-hand side is a seeded Gaussian vector.
pub fn poisson3d_7pt(m: usize, seed: u64) -> Result<ProblemInstance> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("m must be >= 2, got {m}")));
    }
    let n = m * m * m;
    let h = 1.0 / m as f64;
    let ih2 = (m * m) as f64;
    let index = |i: usize, j: usize, k: usize| i + m * (j + m * k);

    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0usize);
    let mut cols: Vec<usize> = Vec::with_capacity(7 * n);
    let mut vals: Vec<f64> = Vec::with_capacity(7 * n);
    let mut row_entries: Vec<(usize, f64)> = Vec::with_capacity(7);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                row_entries.clear();
                let mut diag = 0.0f64;
                // (delta_i, delta_j, delta_k, is the -x direction)
                let neighbors: [(isize, isize, isize, bool); 6] = [
                    (-1, 0, 0, true),
                    (1, 0, 0, false),
                    (0, -1, 0, false),
                    (0, 1, 0, false),
                    (0, 0, -1, false),
                    (0, 0, 1, false),
                ];
                for (di, dj, dk, dirichlet_side) in neighbors {
                    let (ni, nj, nk) = (i as isize + di, j as isize + dj, k as isize + dk);
                    let in_range = |t: isize| t >= 0 && t < m as isize;
                    if in_range(ni) && in_range(nj) && in_range(nk) {
                        diag += ih2;
                        row_entries.push((index(ni as usize, nj as usize, nk as usize), -ih2));
                    } else if dirichlet_side {
                        // eliminated Dirichlet neighbor: keep full diagonal
                        diag += ih2;
                    }
                    // Neumann faces: no contribution
                }
                row_entries.push((index(i, j, k), diag));
                row_entries.sort_unstable_by_key(|e| e.0);
                for &(c, v) in &row_entries {
                    cols.push(c);
                    vals.push(v);
                }
                offsets.push(cols.len());
            }
        }
    }
    let a = CsrMatrix::from_csr(n, n, offsets, cols, vals, true)?;

    let mut coords = Vec::with_capacity(3 * n);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                coords.push((i + 1) as f64 * h);
                coords.push((j + 1) as f64 * h);
                coords.push((k + 1) as f64 * h);
            }
        }
    }
    Ok(ProblemInstance {
        a,
        coords,
        dim: 3,
        half_order: 1,
        num_components: 1,
        material_of_node: None,
        rhs: gaussian_rhs(n, seed),
        mesh_h: h,
        label: "poisson3d".into(),
    })
}

/// 13-point biharmonic operator on an m x m grid, h = 1/m, with clamped
/// plate boundaries (u = 0 and zero normal derivative).
///
/// Boundary values are eliminated; ghost nodes one layer outside reflect the
/// first interior layer (u_ghost = u_mirror), which adds 1/h^4 to the
/// diagonal of each node adjacent to a boundary.
pub fn biharmonic_13pt(m: usize) -> Result<ProblemInstance> {
    if m < 4 {
        return Err(Error::InvalidArgument(format!("m must be >= 4, got {m}")));
    }
    let n = m * m;
    let h = 1.0 / m as f64;
    let scale = (m as f64).powi(4);
    // offsets and weights of the 13-point bilaplacian stencil
    const STENCIL: [(isize, isize, f64); 13] = [
        (0, 0, 20.0),
        (-1, 0, -8.0),
        (1, 0, -8.0),
        (0, -1, -8.0),
        (0, 1, -8.0),
        (-1, -1, 2.0),
        (-1, 1, 2.0),
        (1, -1, 2.0),
        (1, 1, 2.0),
        (-2, 0, 1.0),
        (2, 0, 1.0),
        (0, -2, 1.0),
        (0, 2, 1.0),
    ];
    // grid coordinates run 1..=m inside an extended grid with boundary at 0
    // and m+1 and ghosts at -1 and m+2
    let reflect = |t: isize| -> isize {
        if t == -1 {
            1
        } else if t == m as isize + 2 {
            m as isize
        } else {
            t
        }
    };
    let index = |i: isize, j: isize| (i - 1) as usize + m * (j - 1) as usize;

    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(13 * n);
    for j in 1..=m as isize {
        for i in 1..=m as isize {
            let row = index(i, j);
            for (di, dj, w) in STENCIL {
                let ti = reflect(i + di);
                let tj = reflect(j + dj);
                if ti == 0 || ti == m as isize + 1 || tj == 0 || tj == m as isize + 1 {
                    continue; // eliminated boundary value
                }
                triplets.push((row, index(ti, tj), w * scale));
            }
        }
    }
    let a = CsrMatrix::from_triplets(n, n, &triplets)?.into_symmetric()?;
    drop(triplets);

    let mut coords = Vec::with_capacity(2 * n);
    for j in 1..=m {
        for i in 1..=m {
            coords.push(i as f64 * h);
            coords.push(j as f64 * h);
        }
    }
    Ok(ProblemInstance {
        a,
        coords,
        dim: 2,
        half_order: 2,
        num_components: 1,
        material_of_node: None,
        rhs: vec![0.0; n],
        mesh_h: h,
        label: "biharmonic".into(),
    })
}
