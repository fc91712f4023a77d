//! Structured triangle mesh of a circular annulus (outer radius five times
//! the inner), used by the 2D FEM problems.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub coords: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub dirichlet: Vec<bool>,
}

impl TriangleMesh {
    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn num_free_nodes(&self) -> usize {
        self.dirichlet.iter().filter(|d| !**d).count()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.coords[a], self.coords[b], self.coords[c]);
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Typical element size: the leg of a right triangle with the mean area.
    pub fn mesh_h(&self) -> f64 {
        (2.0 * self.total_area() / self.triangles.len() as f64).sqrt()
    }
}

/// Structured polar mesh of the annulus 1 <= r <= 5: `nr` rings at linearly
/// spaced radii, `ntheta` uniform angles, each quad split into two
/// counterclockwise triangles. The inner and outer rings are flagged
/// Dirichlet.
pub fn annulus_mesh(nr: usize, ntheta: usize) -> Result<TriangleMesh> {
    if nr < 2 {
        return Err(Error::InvalidArgument(format!("nr must be >= 2, got {nr}")));
    }
    if ntheta < 3 {
        return Err(Error::InvalidArgument(format!(
            "ntheta must be >= 3, got {ntheta}"
        )));
    }
    let mut coords = Vec::with_capacity(nr * ntheta);
    let mut dirichlet = Vec::with_capacity(nr * ntheta);
    for ring in 0..nr {
        let r = 1.0 + 4.0 * ring as f64 / (nr - 1) as f64;
        for t in 0..ntheta {
            let theta = 2.0 * std::f64::consts::PI * t as f64 / ntheta as f64;
            coords.push([r * theta.cos(), r * theta.sin()]);
            dirichlet.push(ring == 0 || ring == nr - 1);
        }
    }
    let node = |ring: usize, t: usize| ring * ntheta + (t % ntheta);
    let mut triangles = Vec::with_capacity(2 * (nr - 1) * ntheta);
    for ring in 0..nr - 1 {
        for t in 0..ntheta {
            let n00 = node(ring, t);
            let n10 = node(ring + 1, t);
            let n11 = node(ring + 1, t + 1);
            let n01 = node(ring, t + 1);
            triangles.push([n00, n10, n11]);
            triangles.push([n00, n11, n01]);
        }
    }
    Ok(TriangleMesh {
        coords,
        triangles,
        dirichlet,
    })
}

/// Pick (nr, ntheta) so the annulus has roughly `target` free (non-Dirichlet)
/// nodes with near-isotropic elements.
pub fn annulus_mesh_for_unknowns(target: usize) -> (usize, usize) {
    // circumference at mean radius over radial extent: 2*pi*3 / 4
    let aspect = std::f64::consts::PI * 1.5;
    let nr = (((target as f64 / aspect).sqrt()).round() as usize + 1).max(3);
    let ntheta = ((target as f64 / (nr - 2) as f64).round() as usize).max(3);
    (nr, ntheta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_mesh_counts() {
        let m = annulus_mesh(2, 3).unwrap();
        assert_eq!(m.num_nodes(), 6);
        assert_eq!(m.triangles.len(), 6);
        assert!(m.dirichlet.iter().all(|&d| d));
    }

    #[test]
    fn consistent_orientation() {
        let m = annulus_mesh(6, 24).unwrap();
        for t in 0..m.triangles.len() {
            assert!(m.triangle_area(t) > 0.0, "triangle {t} has nonpositive area");
        }
    }

    #[test]
    fn area_approaches_annulus_area() {
        let m = annulus_mesh(17, 64).unwrap();
        let exact = std::f64::consts::PI * (25.0 - 1.0);
        let rel = (m.total_area() - exact).abs() / exact;
        assert!(rel < 0.01, "relative area error {rel}");
    }

    #[test]
    fn sizing_helper_hits_target() {
        let (nr, ntheta) = annulus_mesh_for_unknowns(10_000);
        let free = (nr - 2) * ntheta;
        let rel = (free as f64 - 10_000.0).abs() / 10_000.0;
        assert!(rel < 0.1, "free {free}");
    }
}
