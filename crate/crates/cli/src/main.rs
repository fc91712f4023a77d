//! Command-line experiment driver. Subcommands: generate, solve, sweep,
//! coarse-study and export. Every failure exits nonzero with a stage-labeled
//! message.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use ddg_cli::{
    append_rows, build_problem, coarse_accuracy_study, export_artifacts, run_experiment,
    run_sweep, ExperimentConfig, ImportSpec, SweepAxis,
};

#[derive(Parser)]
#[command(
    name = "ddg",
    about = "Two-level overlapping Schwarz + polynomial coarse grid experiment driver",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags mirroring ExperimentConfig; unset flags fall back to the config
/// file, then to defaults.
#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// Flat key=value config file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// poisson3d | poisson2d-smooth | poisson2d-discontinuous | elasticity | biharmonic
    #[arg(long)]
    problem: Option<String>,
    /// Grid edge m (stencil problems) or target sqrt(n) (2D FEM problems).
    #[arg(long)]
    size: Option<usize>,
    /// Coarsening factor H/h.
    #[arg(long)]
    coarsening: Option<f64>,
    /// Polynomial degree p of the coarse basis.
    #[arg(long, short = 'p')]
    degree: Option<usize>,
    /// Algebraic overlap (graph layers).
    #[arg(long)]
    delta: Option<usize>,
    /// 2 or 3.
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// graph | inertial
    #[arg(long)]
    partitioner: Option<String>,
    #[arg(long)]
    rank_tol: Option<f64>,
    /// Piecewise-material generating vectors (discontinuous problem).
    #[arg(long)]
    material_aware: Option<bool>,
    /// Fixed-sweep symmetric SOR subdomain solves as 'sweeps,omega'.
    #[arg(long)]
    ssor: Option<String>,
    /// Convergence reference: 'first' (after the first preconditioner
    /// application) or 'initial'.
    #[arg(long)]
    reference: Option<String>,
    /// External node partition file (one part id per line).
    #[arg(long)]
    partition: Option<PathBuf>,
    /// External generating basis (Matrix Market array, optional _labels.csv sidecar).
    #[arg(long)]
    basis: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.merge_file(path)?;
        }
        if let Some(v) = &self.problem {
            cfg.set("problem", v)?;
        }
        if let Some(v) = self.size {
            cfg.size = v;
        }
        if let Some(v) = self.coarsening {
            cfg.coarsening = v;
        }
        if let Some(v) = self.degree {
            cfg.degree = v;
        }
        if let Some(v) = self.delta {
            cfg.delta = Some(v);
        }
        if let Some(v) = self.levels {
            cfg.levels = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.partitioner {
            cfg.set("partitioner", v)?;
        }
        if let Some(v) = self.rank_tol {
            cfg.rank_tol = v;
        }
        if let Some(v) = self.material_aware {
            cfg.material_aware = v;
        }
        if let Some(v) = &self.ssor {
            cfg.set("ssor", v)?;
        }
        if let Some(v) = &self.reference {
            cfg.set("reference", v)?;
        }
        if let Some(v) = &self.partition {
            cfg.partition_file = Some(v.clone());
        }
        if let Some(v) = &self.basis {
            cfg.basis_file = Some(v.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Clone, Default)]
struct ImportArgs {
    /// Matrix Market file with the system matrix (skips generation).
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Coordinate CSV `node,x,y[,z]` matching the matrix.
    #[arg(long)]
    coords: Option<PathBuf>,
    /// Right-hand side as a Matrix Market array (defaults to Gaussian).
    #[arg(long)]
    rhs: Option<PathBuf>,
    /// Material CSV (node,material).
    #[arg(long)]
    material: Option<PathBuf>,
    /// PDE half-order q of the imported problem.
    #[arg(long, default_value_t = 1)]
    q: usize,
    /// Solution components per node of the imported problem.
    #[arg(long, default_value_t = 1)]
    components: usize,
}

impl ImportArgs {
    fn resolve(&self) -> Result<Option<ImportSpec>> {
        match (&self.matrix, &self.coords) {
            (None, None) => Ok(None),
            (Some(matrix), Some(coords)) => Ok(Some(ImportSpec {
                matrix: matrix.clone(),
                coords: coords.clone(),
                rhs: self.rhs.clone(),
                material: self.material.clone(),
                half_order: self.q,
                num_components: self.components,
            })),
            _ => anyhow::bail!("importing requires both --matrix and --coords"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark problem and write its files.
    Generate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output path prefix for _matrix.mtx, _coords.csv, _rhs.mtx, _material.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one experiment and append a CSV row.
    Solve {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        import: ImportArgs,
        /// CSV file to append the result row to.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the residual history to this CSV.
        #[arg(long)]
        history: Option<PathBuf>,
        /// Zero the timing columns for reproducible output.
        #[arg(long)]
        no_timing: bool,
    },
    /// Run one experiment per value along an axis.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// p | size | coarsening
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Couple H/h = sqrt(size) and delta = floor(H/(4h)) along a size sweep.
        #[arg(long)]
        h_squared: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        no_timing: bool,
    },
    /// Measure coarse-solution A-norm errors against direct solves over a
    /// series of sizes at fixed H/h and fit the convergence order.
    CoarseStudy {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated size parameters (one problem per size).
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build the configured experiment and export problem, partition,
    /// generating basis and coarse operators.
    Export {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { config, out } => {
            let cfg = config.resolve()?;
            let prob = build_problem(&cfg).context("stage generate")?;
            ddg_core::problems::write_problem_files(&prob, &out).context("stage export")?;
            println!(
                "generated {} with n = {} into {}_*",
                prob.label,
                prob.n(),
                out.display()
            );
        }
        Command::Solve {
            config,
            import,
            csv,
            history,
            no_timing,
        } => {
            let cfg = config.resolve()?;
            let spec = import.resolve()?;
            let outcome = run_experiment(&cfg, spec.as_ref())?;
            let line = outcome.row.to_csv_line(!no_timing);
            println!("{}", ddg_cli::CSV_HEADER);
            println!("{line}");
            if !outcome.report.converged {
                if let Some(b) = &outcome.report.breakdown {
                    eprintln!("warning: solve did not converge ({b})");
                } else {
                    eprintln!("warning: solve did not converge within max_iter");
                }
            }
            if let Some(path) = csv {
                append_rows(&path, &[outcome.row], !no_timing)?;
            }
            if let Some(path) = history {
                ddg_cli::pipeline::write_history_csv(&path, &outcome.report)?;
            }
        }
        Command::Sweep {
            config,
            axis,
            values,
            h_squared,
            csv,
            no_timing,
        } => {
            let cfg = config.resolve()?;
            let axis: SweepAxis = axis.parse()?;
            let rows = run_sweep(&cfg, axis, &values, h_squared)?;
            println!("{}", ddg_cli::CSV_HEADER);
            for row in &rows {
                println!("{}", row.to_csv_line(!no_timing));
            }
            if let Some(path) = csv {
                append_rows(&path, &rows, !no_timing)?;
            }
        }
        Command::CoarseStudy { config, sizes, csv } => {
            let cfg = config.resolve()?;
            let (rows, slope) = coarse_accuracy_study(&cfg, &sizes)?;
            println!("size,n,p,H,anorm_error,fitted_order");
            for r in &rows {
                println!(
                    "{},{},{},{},{},{}",
                    r.size, r.n, r.degree, r.big_h, r.anorm_error, slope
                );
            }
            if let Some(path) = csv {
                ddg_cli::csv::write_study_csv(&path, &rows, slope)?;
            }
        }
        Command::Export { config, out_dir } => {
            let cfg = config.resolve()?;
            export_artifacts(&cfg, &out_dir)?;
            println!("exported experiment artifacts to {}", out_dir.display());
        }
    }
    Ok(())
}
