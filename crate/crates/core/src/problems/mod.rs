//! Benchmark problem generators: sparse SPD systems with nodal coordinates,
//! PDE metadata and seeded Gaussian right-hand sides.

mod fem;
mod mesh;
mod stencil;

pub use fem::{assemble_elasticity_unreduced, fem_elasticity_p1, fem_poisson_p1};
pub use mesh::{annulus_mesh, annulus_mesh_for_unknowns, TriangleMesh};
pub use stencil::{biharmonic_13pt, poisson3d_7pt};

use std::f64::consts::PI;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::io;
use crate::sparse::CsrMatrix;

/// A generated (or imported) benchmark linear system.
///
/// `coords` is node-major with `dim` entries per node; vector problems have
/// `num_components` matrix rows per node, interleaved node-major, so
/// `a.nrows() == coords.len() / dim * num_components`.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub a: CsrMatrix,
    pub coords: Vec<f64>,
    pub dim: usize,
    /// PDE half-order q (1 for Poisson and elasticity, 2 for biharmonic).
    pub half_order: usize,
    pub num_components: usize,
    pub material_of_node: Option<Vec<usize>>,
    pub rhs: Vec<f64>,
    pub mesh_h: f64,
    pub label: String,
}

impl ProblemInstance {
    pub fn num_nodes(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }
}

/// Seeded standard-normal vector; bitwise reproducible for a fixed seed.
pub fn gaussian_rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Smooth diffusion coefficient S = exp(1 + sin(pi (x + y))).
pub fn smooth_coefficient(x: f64, y: f64) -> f64 {
    (1.0 + (PI * (x + y)).sin()).exp()
}

/// Two-material indicator J = H(0.25 + cos(pi x) cos(2 pi y)), with H(0) = 1.
pub fn material_indicator(x: f64, y: f64) -> usize {
    if 0.25 + (PI * x).cos() * (2.0 * PI * y).cos() >= 0.0 {
        1
    } else {
        0
    }
}

/// Discontinuous coefficient D = S + 100 J.
pub fn discontinuous_coefficient(x: f64, y: f64) -> f64 {
    smooth_coefficient(x, y) + 100.0 * material_indicator(x, y) as f64
}

/// Export a problem as `{prefix}_matrix.mtx`, `{prefix}_coords.csv`,
/// `{prefix}_rhs.mtx` and, when materials are present,
/// `{prefix}_material.csv`.
pub fn write_problem_files(p: &ProblemInstance, prefix: &Path) -> Result<()> {
    let stem = prefix.to_string_lossy();
    io::write_matrix_market_csr_path(format!("{stem}_matrix.mtx"), &p.a)?;
    io::write_vector_path(format!("{stem}_rhs.mtx"), &p.rhs)?;
    write_coords_csv(format!("{stem}_coords.csv"), &p.coords, p.dim)?;
    if let Some(mat) = &p.material_of_node {
        write_material_csv(format!("{stem}_material.csv"), mat)?;
    }
    Ok(())
}

pub fn write_coords_csv<P: AsRef<Path>>(path: P, coords: &[f64], dim: usize) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header = match dim {
        1 => "node,x",
        2 => "node,x,y",
        3 => "node,x,y,z",
        _ => return Err(Error::InvalidArgument(format!("unsupported dim {dim}"))),
    };
    writeln!(w, "{header}")?;
    for i in 0..coords.len() / dim {
        write!(w, "{i}")?;
        for k in 0..dim {
            write!(w, ",{}", coords[i * dim + k])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Read a coordinate CSV, returning flattened coords and the dimension.
pub fn read_coords_csv<P: AsRef<Path>>(path: P) -> Result<(Vec<f64>, usize)> {
    let display = path.as_ref().display().to_string();
    let r = BufReader::new(std::fs::File::open(path.as_ref())?);
    let mut lines = r.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::Parse {
            path: display.clone(),
            line: 1,
            msg: "empty file".into(),
        })?;
    let dim = header.split(',').count() - 1;
    if !(1..=3).contains(&dim) {
        return Err(Error::Parse {
            path: display,
            line: 1,
            msg: format!("expected header node,x[,y[,z]], got '{header}'"),
        });
    }
    let mut coords = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(Error::Parse {
                path: display,
                line: lineno + 2,
                msg: format!("expected {} fields, got {}", dim + 1, fields.len()),
            });
        }
        for f in &fields[1..] {
            let v: f64 = f.trim().parse().map_err(|e| Error::Parse {
                path: display.clone(),
                line: lineno + 2,
                msg: format!("bad coordinate: {e}"),
            })?;
            coords.push(v);
        }
    }
    Ok((coords, dim))
}

pub fn write_material_csv<P: AsRef<Path>>(path: P, material: &[usize]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "node,material")?;
    for (i, m) in material.iter().enumerate() {
        writeln!(w, "{i},{m}")?;
    }
    Ok(())
}

pub fn read_material_csv<P: AsRef<Path>>(path: P) -> Result<Vec<usize>> {
    let display = path.as_ref().display().to_string();
    let r = BufReader::new(std::fs::File::open(path.as_ref())?);
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let m: usize = line
            .split(',')
            .nth(1)
            .ok_or_else(|| Error::Parse {
                path: display.clone(),
                line: lineno + 1,
                msg: "expected node,material".into(),
            })?
            .trim()
            .parse()
            .map_err(|e| Error::Parse {
                path: display.clone(),
                line: lineno + 1,
                msg: format!("bad material id: {e}"),
            })?;
        out.push(m);
    }
    Ok(out)
}
