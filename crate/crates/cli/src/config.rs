//! Experiment configuration: problem selection plus preconditioner and
//! solver parameters, loadable from a flat key=value file with command-line
//! overrides on top.

use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// 7-point finite difference Poisson on an m^3 grid, one Dirichlet face.
    Poisson3d,
    /// P1 FEM Poisson on the annulus with the smooth coefficient.
    Poisson2dSmooth,
    /// P1 FEM Poisson on the annulus with the two-material coefficient.
    Poisson2dDiscontinuous,
    /// P1 vector FEM on the annulus.
    Elasticity,
    /// 13-point biharmonic plate on an m^2 grid.
    Biharmonic,
}

impl ProblemKind {
    pub fn label(self) -> &'static str {
        match self {
            ProblemKind::Poisson3d => "poisson3d",
            ProblemKind::Poisson2dSmooth => "poisson2d-smooth",
            ProblemKind::Poisson2dDiscontinuous => "poisson2d-discontinuous",
            ProblemKind::Elasticity => "elasticity",
            ProblemKind::Biharmonic => "biharmonic",
        }
    }
}

impl FromStr for ProblemKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "poisson3d" => ProblemKind::Poisson3d,
            "poisson2d-smooth" => ProblemKind::Poisson2dSmooth,
            "poisson2d-discontinuous" => ProblemKind::Poisson2dDiscontinuous,
            "elasticity" => ProblemKind::Elasticity,
            "biharmonic" => ProblemKind::Biharmonic,
            other => bail!(
                "unknown problem '{other}' (expected poisson3d, poisson2d-smooth, \
                 poisson2d-discontinuous, elasticity or biharmonic)"
            ),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionerKind {
    Graph,
    Inertial,
}

impl FromStr for PartitionerKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "graph" => PartitionerKind::Graph,
            "inertial" => PartitionerKind::Inertial,
            other => bail!("unknown partitioner '{other}' (expected graph or inertial)"),
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    /// Problem size parameter: grid edge m for the stencil problems,
    /// target n^(1/2) free nodes for the 2D FEM problems.
    pub size: usize,
    /// Coarsening factor H/h; each part holds about (H/h)^d nodes.
    pub coarsening: f64,
    /// Polynomial degree p of the generating basis.
    pub degree: usize,
    /// Algebraic overlap; defaults to 1 for the biharmonic problem, else 0.
    pub delta: Option<usize>,
    pub levels: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Defaults to inertial for poisson3d, graph otherwise.
    pub partitioner: Option<PartitionerKind>,
    pub rank_tol: f64,
    /// Piecewise-material generating vectors on the discontinuous problem.
    pub material_aware: bool,
    /// Replace exact subdomain solves with fixed-sweep symmetric SOR.
    pub ssor: Option<(usize, f64)>,
    /// Measure the tolerance against the initial residual instead of the
    /// residual after the first preconditioner application.
    pub reference_initial: bool,
    /// Node partition file (one part id per line) from an external
    /// partitioner, used instead of the built-in ones.
    pub partition_file: Option<std::path::PathBuf>,
    /// Generating basis in Matrix Market array format, used instead of the
    /// coordinate-built one.
    pub basis_file: Option<std::path::PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem: ProblemKind::Poisson2dSmooth,
            size: 100,
            coarsening: 10.0,
            degree: 1,
            delta: None,
            levels: 2,
            tol: 1e-9,
            max_iter: 1000,
            seed: 1,
            partitioner: None,
            rank_tol: 1e-8,
            material_aware: true,
            ssor: None,
            reference_initial: false,
            partition_file: None,
            basis_file: None,
        }
    }
}

impl ExperimentConfig {
    pub fn effective_delta(&self) -> usize {
        self.delta.unwrap_or(match self.problem {
            ProblemKind::Biharmonic => 1,
            _ => 0,
        })
    }

    pub fn effective_partitioner(&self) -> PartitionerKind {
        self.partitioner.unwrap_or(match self.problem {
            ProblemKind::Poisson3d => PartitionerKind::Inertial,
            _ => PartitionerKind::Graph,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol <= 1.0) {
            bail!("tol must lie in (0, 1], got {}", self.tol);
        }
        if self.coarsening < 1.0 {
            bail!("coarsening factor must be >= 1, got {}", self.coarsening);
        }
        if self.levels != 2 && self.levels != 3 {
            bail!("levels must be 2 or 3, got {}", self.levels);
        }
        if self.size < 2 {
            bail!("size must be >= 2, got {}", self.size);
        }
        Ok(())
    }

    /// Apply one key=value assignment (config file line or override).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "problem" => self.problem = value.parse()?,
            "size" => self.size = value.parse().context("size")?,
            "coarsening" => self.coarsening = value.parse().context("coarsening")?,
            "degree" => self.degree = value.parse().context("degree")?,
            "delta" => self.delta = Some(value.parse().context("delta")?),
            "levels" => self.levels = value.parse().context("levels")?,
            "tol" => self.tol = value.parse().context("tol")?,
            "max_iter" => self.max_iter = value.parse().context("max_iter")?,
            "seed" => self.seed = value.parse().context("seed")?,
            "partitioner" => self.partitioner = Some(value.parse()?),
            "rank_tol" => self.rank_tol = value.parse().context("rank_tol")?,
            "material_aware" => self.material_aware = value.parse().context("material_aware")?,
            "ssor" => {
                let (sweeps, omega) = value
                    .split_once(',')
                    .context("ssor expects 'sweeps,omega'")?;
                self.ssor = Some((
                    sweeps.trim().parse().context("ssor sweeps")?,
                    omega.trim().parse().context("ssor omega")?,
                ));
            }
            "reference" => {
                self.reference_initial = match value {
                    "first" => false,
                    "initial" => true,
                    other => bail!("reference must be 'first' or 'initial', got '{other}'"),
                }
            }
            "partition_file" => self.partition_file = Some(value.into()),
            "basis_file" => self.basis_file = Some(value.into()),
            other => bail!("unknown config key '{other}'"),
        }
        Ok(())
    }

    /// Load key=value lines ('#' comments allowed) over the defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.merge_file(path)?;
        Ok(cfg)
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("{}:{}: expected key=value", path.display(), lineno + 1))?;
            self.set(key.trim(), value.trim())
                .with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
        }
        Ok(())
    }
}
