//! Piecewise linear finite element assembly on triangle meshes: scalar
//! diffusion with a per-triangle midpoint-evaluated coefficient, and the
//! vector form a(u,v) = integral of (grad u : grad v + div u div v).

use super::mesh::TriangleMesh;
use super::ProblemInstance;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Gradients of the three barycentric shape functions and the (unsigned)
/// triangle area, so assembly is invariant to vertex ordering.
fn p1_gradients(pa: [f64; 2], pb: [f64; 2], pc: [f64; 2]) -> ([[f64; 2]; 3], f64) {
    let det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
    let area = 0.5 * det.abs();
    let g = [
        [(pb[1] - pc[1]) / det, (pc[0] - pb[0]) / det],
        [(pc[1] - pa[1]) / det, (pa[0] - pc[0]) / det],
        [(pa[1] - pb[1]) / det, (pb[0] - pa[0]) / det],
    ];
    (g, area)
}

fn free_index_map(mesh: &TriangleMesh) -> (Vec<usize>, usize) {
    let mut map = vec![usize::MAX; mesh.num_nodes()];
    let mut next = 0usize;
    for (i, &d) in mesh.dirichlet.iter().enumerate() {
        if !d {
            map[i] = next;
            next += 1;
        }
    }
    (map, next)
}

/// Assemble the P1 stiffness matrix for -div(c grad u) with homogeneous
/// Dirichlet rows and columns eliminated. The coefficient is sampled at each
/// triangle centroid and must be positive there.
pub fn fem_poisson_p1(
    mesh: &TriangleMesh,
    coefficient: &dyn Fn(f64, f64) -> f64,
    material: Option<&dyn Fn(f64, f64) -> usize>,
) -> Result<ProblemInstance> {
    let (free, n_free) = free_index_map(mesh);
    if n_free == 0 {
        return Err(Error::InvalidArgument(
            "mesh has no free nodes after Dirichlet elimination".into(),
        ));
    }
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(9 * mesh.triangles.len());
    for tri in &mesh.triangles {
        let [a, b, c] = *tri;
        let (pa, pb, pc) = (mesh.coords[a], mesh.coords[b], mesh.coords[c]);
        let (g, area) = p1_gradients(pa, pb, pc);
        let cx = (pa[0] + pb[0] + pc[0]) / 3.0;
        let cy = (pa[1] + pb[1] + pc[1]) / 3.0;
        let coef = coefficient(cx, cy);
        if coef <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "coefficient is nonpositive ({coef:e}) at ({cx}, {cy})"
            )));
        }
        let nodes = [a, b, c];
        for r in 0..3 {
            let fr = free[nodes[r]];
            if fr == usize::MAX {
                continue;
            }
            for s in 0..3 {
                let fs = free[nodes[s]];
                if fs == usize::MAX {
                    continue;
                }
                let k = coef * area * (g[r][0] * g[s][0] + g[r][1] * g[s][1]);
                triplets.push((fr, fs, k));
            }
        }
    }
    let a = CsrMatrix::from_triplets(n_free, n_free, &triplets)?.into_symmetric()?;
    drop(triplets);

    let mut coords = Vec::with_capacity(2 * n_free);
    for (i, &d) in mesh.dirichlet.iter().enumerate() {
        if !d {
            coords.push(mesh.coords[i][0]);
            coords.push(mesh.coords[i][1]);
        }
    }
    let material_of_node = material.map(|mf| {
        coords
            .chunks(2)
            .map(|xy| mf(xy[0], xy[1]))
            .collect::<Vec<usize>>()
    });
    Ok(ProblemInstance {
        a,
        coords,
        dim: 2,
        half_order: 1,
        num_components: 1,
        material_of_node,
        rhs: vec![0.0; n_free],
        mesh_h: mesh.mesh_h(),
        label: "fem-poisson-p1".into(),
    })
}

/// Element matrix for the vector form on one triangle, (node, component)
/// interleaved: k[(r,i),(s,j)] = area * (delta_ij g_r.g_s + g_r[i] g_s[j]).
fn elasticity_element(g: &[[f64; 2]; 3], area: f64) -> [[f64; 6]; 6] {
    let mut ke = [[0.0f64; 6]; 6];
    for r in 0..3 {
        for s in 0..3 {
            let gg = g[r][0] * g[s][0] + g[r][1] * g[s][1];
            for i in 0..2 {
                for j in 0..2 {
                    let mut v = g[r][i] * g[s][j];
                    if i == j {
                        v += gg;
                    }
                    ke[2 * r + i][2 * s + j] = area * v;
                }
            }
        }
    }
    ke
}

/// P1 vector assembly of a(u,v) = integral(grad u : grad v + div u div v)
/// with Dirichlet nodes eliminated; unknowns are interleaved node-major.
pub fn fem_elasticity_p1(mesh: &TriangleMesh) -> Result<ProblemInstance> {
    let (free, n_free) = free_index_map(mesh);
    if n_free == 0 {
        return Err(Error::InvalidArgument(
            "mesh has no free nodes after Dirichlet elimination".into(),
        ));
    }
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(36 * mesh.triangles.len());
    for tri in &mesh.triangles {
        let [a, b, c] = *tri;
        let (g, area) = p1_gradients(mesh.coords[a], mesh.coords[b], mesh.coords[c]);
        let ke = elasticity_element(&g, area);
        let nodes = [a, b, c];
        for r in 0..3 {
            let fr = free[nodes[r]];
            if fr == usize::MAX {
                continue;
            }
            for s in 0..3 {
                let fs = free[nodes[s]];
                if fs == usize::MAX {
                    continue;
                }
                for i in 0..2 {
                    for j in 0..2 {
                        triplets.push((2 * fr + i, 2 * fs + j, ke[2 * r + i][2 * s + j]));
                    }
                }
            }
        }
    }
    let a = CsrMatrix::from_triplets(2 * n_free, 2 * n_free, &triplets)?.into_symmetric()?;
    drop(triplets);

    let mut coords = Vec::with_capacity(2 * n_free);
    for (i, &d) in mesh.dirichlet.iter().enumerate() {
        if !d {
            coords.push(mesh.coords[i][0]);
            coords.push(mesh.coords[i][1]);
        }
    }
    Ok(ProblemInstance {
        a,
        coords,
        dim: 2,
        half_order: 1,
        num_components: 2,
        material_of_node: None,
        rhs: vec![0.0; 2 * n_free],
        mesh_h: mesh.mesh_h(),
        label: "fem-elasticity-p1".into(),
    })
}

/// Vector assembly over all nodes with no boundary elimination; rigid
/// translations lie in its nullspace. Used to verify the element matrices.
pub fn assemble_elasticity_unreduced(mesh: &TriangleMesh) -> Result<CsrMatrix> {
    let n = mesh.num_nodes();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(36 * mesh.triangles.len());
    for tri in &mesh.triangles {
        let [a, b, c] = *tri;
        let (g, area) = p1_gradients(mesh.coords[a], mesh.coords[b], mesh.coords[c]);
        let ke = elasticity_element(&g, area);
        let nodes = [a, b, c];
        for r in 0..3 {
            for s in 0..3 {
                for i in 0..2 {
                    for j in 0..2 {
                        triplets.push((
                            2 * nodes[r] + i,
                            2 * nodes[s] + j,
                            ke[2 * r + i][2 * s + j],
                        ));
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(2 * n, 2 * n, &triplets)?.into_symmetric()
}
