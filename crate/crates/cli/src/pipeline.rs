//! The experiment pipeline: generate or import a problem, partition it,
//! build the generating basis and preconditioner, run PCG, and reduce the
//! outcome to a CSV row. Also the parameter sweep and the coarse-grid
//! accuracy study.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};

use ddg_core::coarse::{build_generating_basis, coarse_solution_error, CoarseSpace};
use ddg_core::io;
use ddg_core::krylov::{pcg, PcgOptions, SolveReport};
use ddg_core::partition::{graph_partition, inertial_partition, node_graph, Partition};
use ddg_core::problems::{
    annulus_mesh, annulus_mesh_for_unknowns, biharmonic_13pt, discontinuous_coefficient,
    fem_elasticity_p1, fem_poisson_p1, gaussian_rhs, material_indicator, poisson3d_7pt,
    read_coords_csv, read_material_csv, smooth_coefficient, write_problem_files, ProblemInstance,
};
use ddg_core::schwarz::{SchwarzOptions, SubdomainSolve, TwoLevelPreconditioner};
use ddg_core::{cholesky_factorize, GeneratingBasis};

use crate::config::{ExperimentConfig, PartitionerKind, ProblemKind};
use crate::csv::ExperimentRow;

/// Externally supplied problem files instead of a generator.
#[derive(Debug, Clone, Default)]
pub struct ImportSpec {
    pub matrix: std::path::PathBuf,
    pub coords: std::path::PathBuf,
    pub rhs: Option<std::path::PathBuf>,
    pub material: Option<std::path::PathBuf>,
    pub half_order: usize,
    pub num_components: usize,
}

pub struct ExperimentOutcome {
    pub report: SolveReport,
    pub row: ExperimentRow,
    pub coarse_rank: usize,
}

/// Generate the configured benchmark problem.
pub fn build_problem(cfg: &ExperimentConfig) -> Result<ProblemInstance> {
    cfg.validate()?;
    let p = match cfg.problem {
        ProblemKind::Poisson3d => poisson3d_7pt(cfg.size, cfg.seed)?,
        ProblemKind::Poisson2dSmooth => {
            let (nr, ntheta) = annulus_mesh_for_unknowns(cfg.size * cfg.size);
            let mesh = annulus_mesh(nr, ntheta)?;
            let mut p = fem_poisson_p1(&mesh, &smooth_coefficient, None)?;
            p.label = ProblemKind::Poisson2dSmooth.label().into();
            p
        }
        ProblemKind::Poisson2dDiscontinuous => {
            let (nr, ntheta) = annulus_mesh_for_unknowns(cfg.size * cfg.size);
            let mesh = annulus_mesh(nr, ntheta)?;
            let mut p = fem_poisson_p1(
                &mesh,
                &discontinuous_coefficient,
                Some(&material_indicator),
            )?;
            p.label = ProblemKind::Poisson2dDiscontinuous.label().into();
            p
        }
        ProblemKind::Elasticity => {
            let (nr, ntheta) = annulus_mesh_for_unknowns(cfg.size * cfg.size);
            let mesh = annulus_mesh(nr, ntheta)?;
            let mut p = fem_elasticity_p1(&mesh)?;
            p.label = ProblemKind::Elasticity.label().into();
            p
        }
        ProblemKind::Biharmonic => biharmonic_13pt(cfg.size)?,
    };
    Ok(p)
}

pub fn import_problem(spec: &ImportSpec) -> Result<ProblemInstance> {
    let a = io::read_matrix_market_csr_path(&spec.matrix)
        .with_context(|| format!("stage import: matrix {}", spec.matrix.display()))?;
    let a = if a.is_symmetric_flagged() {
        a
    } else {
        a.into_symmetric().context("stage import: matrix symmetry")?
    };
    let (coords, dim) = read_coords_csv(&spec.coords)
        .with_context(|| format!("stage import: coords {}", spec.coords.display()))?;
    let num_components = spec.num_components.max(1);
    let n_nodes = coords.len() / dim;
    if n_nodes * num_components != a.nrows() {
        bail!(
            "stage import: {} nodes x {} components != {} matrix rows",
            n_nodes,
            num_components,
            a.nrows()
        );
    }
    let rhs = match &spec.rhs {
        Some(p) => io::read_vector_path(p).context("stage import: rhs")?,
        None => vec![0.0; a.nrows()],
    };
    if rhs.len() != a.nrows() {
        bail!("stage import: rhs has {} entries for n = {}", rhs.len(), a.nrows());
    }
    let material_of_node = match &spec.material {
        Some(p) => Some(read_material_csv(p).context("stage import: material")?),
        None => None,
    };
    Ok(ProblemInstance {
        a,
        coords,
        dim,
        half_order: spec.half_order.max(1),
        num_components,
        material_of_node,
        rhs,
        mesh_h: 1.0 / (n_nodes as f64).powf(1.0 / dim as f64),
        label: "imported".into(),
    })
}

/// Node partition per the configured partitioner; parts sized to hold about
/// coarsening^dim nodes each.
pub fn partition_problem(
    cfg: &ExperimentConfig,
    prob: &ProblemInstance,
) -> Result<(Partition, usize)> {
    let n_nodes = prob.num_nodes();
    let num_parts = ((n_nodes as f64 / cfg.coarsening.powi(prob.dim as i32)).round() as usize)
        .clamp(1, n_nodes);
    let part = match cfg.effective_partitioner() {
        PartitionerKind::Graph => {
            let graph;
            let node_level = if prob.num_components == 1 {
                &prob.a
            } else {
                graph = node_graph(&prob.a, prob.num_components)?;
                &graph
            };
            graph_partition(node_level, num_parts, cfg.seed)
                .context("stage partition (graph)")?
        }
        PartitionerKind::Inertial => {
            inertial_partition(&prob.coords, prob.dim, num_parts, cfg.seed, true)
                .context("stage partition (inertial)")?
        }
    };
    Ok((part, num_parts))
}

fn generating_basis(cfg: &ExperimentConfig, prob: &ProblemInstance) -> Result<GeneratingBasis> {
    let material = if cfg.material_aware {
        prob.material_of_node.as_deref()
    } else {
        None
    };
    build_generating_basis(
        &prob.coords,
        prob.dim,
        cfg.degree,
        prob.num_components,
        material,
    )
    .context("stage generating-basis")
}

/// Generating basis from a Matrix Market array file. Column labels come from
/// a `<stem>_labels.csv` sidecar when present (the format `export` writes);
/// without one the columns get anonymous labels.
fn import_basis(path: &std::path::Path, prob: &ProblemInstance) -> Result<GeneratingBasis> {
    let columns =
        io::read_matrix_market_dense_path(path).context("stage import generating-basis")?;
    if columns.nrows() != prob.n() {
        bail!(
            "stage import: generating basis has {} rows for n = {}",
            columns.nrows(),
            prob.n()
        );
    }
    let sidecar = path.with_file_name(format!(
        "{}_labels.csv",
        path.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default()
    ));
    let labels = if sidecar.exists() {
        let text = std::fs::read_to_string(&sidecar)?;
        let mut labels = Vec::new();
        for line in text.lines().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                bail!("stage import: bad label line '{line}' in {}", sidecar.display());
            }
            let exponents = fields[3]
                .split_whitespace()
                .map(|t| t.parse::<u32>())
                .collect::<std::result::Result<Vec<u32>, _>>()
                .with_context(|| format!("stage import: label exponents in '{line}'"))?;
            labels.push(ddg_core::coarse::ColumnLabel {
                component: fields[1].trim().parse().context("label component")?,
                material: fields[2].trim().parse().context("label material")?,
                exponents,
            });
        }
        if labels.len() != columns.ncols() {
            bail!(
                "stage import: {} labels for {} basis columns",
                labels.len(),
                columns.ncols()
            );
        }
        labels
    } else {
        (0..columns.ncols())
            .map(|_| ddg_core::coarse::ColumnLabel {
                component: 0,
                material: 0,
                exponents: Vec::new(),
            })
            .collect()
    };
    let degree = labels
        .iter()
        .map(|l| l.exponents.iter().sum::<u32>() as usize)
        .max()
        .unwrap_or(0);
    let num_materials = labels.iter().map(|l| l.material + 1).max().unwrap_or(1);
    Ok(GeneratingBasis {
        columns,
        degree,
        num_components: prob.num_components,
        num_materials,
        column_labels: labels,
    })
}

fn build_preconditioner(
    cfg: &ExperimentConfig,
    prob: &ProblemInstance,
    part: &Partition,
    f: &GeneratingBasis,
) -> Result<TwoLevelPreconditioner> {
    let a = Arc::new(prob.a.clone());
    let dof_part = part.expand_to_components(prob.num_components);
    let opts = SchwarzOptions {
        delta: cfg.effective_delta(),
        rank_tol: cfg.rank_tol,
        ..SchwarzOptions::default()
    };
    let pre = if let Some((sweeps, omega)) = cfg.ssor {
        let opts = SchwarzOptions {
            subdomain_solve: SubdomainSolve::FixedSsor { sweeps, omega },
            ..opts
        };
        if cfg.levels == 3 {
            TwoLevelPreconditioner::build_three_level(
                a,
                f,
                &dof_part,
                cfg.coarsening,
                prob.dim,
                cfg.seed,
                &opts,
            )
            .context("stage preconditioner (three-level)")?
        } else {
            TwoLevelPreconditioner::build_two_level(a, f, &dof_part, &opts)
                .context("stage preconditioner (two-level)")?
        }
    } else if cfg.levels == 3 {
        TwoLevelPreconditioner::build_three_level(
            a,
            f,
            &dof_part,
            cfg.coarsening,
            prob.dim,
            cfg.seed,
            &opts,
        )
        .context("stage preconditioner (three-level)")?
    } else {
        TwoLevelPreconditioner::build_two_level(a, f, &dof_part, &opts)
            .context("stage preconditioner (two-level)")?
    };
    Ok(pre)
}

/// Full pipeline: generate or import, partition, build F and the
/// preconditioner, solve with PCG, and assemble the CSV row.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    import: Option<&ImportSpec>,
) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let t_setup = Instant::now();
    let prob = match import {
        Some(spec) => import_problem(spec)?,
        None => build_problem(cfg).context("stage generate")?,
    };
    let part = match &cfg.partition_file {
        Some(path) => {
            let p = io::read_partition_path(path).context("stage import partition")?;
            if p.len() != prob.num_nodes() {
                bail!(
                    "stage import: partition covers {} nodes, problem has {}",
                    p.len(),
                    prob.num_nodes()
                );
            }
            p
        }
        None => partition_problem(cfg, &prob)?.0,
    };
    let f = match &cfg.basis_file {
        Some(path) => import_basis(path, &prob)?,
        None => generating_basis(cfg, &prob)?,
    };
    let pre = build_preconditioner(cfg, &prob, &part, &f)?;
    let setup_seconds = t_setup.elapsed().as_secs_f64();

    let rhs = if import.is_some() && prob.rhs.iter().any(|&v| v != 0.0) {
        prob.rhs.clone()
    } else {
        gaussian_rhs(prob.n(), cfg.seed)
    };
    let opts = PcgOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        reference: if cfg.reference_initial {
            ddg_core::ConvergenceReference::InitialResidual
        } else {
            ddg_core::ConvergenceReference::FirstPreconditionedResidual
        },
    };
    let t_solve = Instant::now();
    let report = pcg(&prob.a, &pre, &rhs, &opts).context("stage pcg")?;
    let solve_seconds = t_solve.elapsed().as_secs_f64();

    let total = (setup_seconds + solve_seconds).max(f64::MIN_POSITIVE);
    let coarse_rank = pre.coarse().coarse_rank();
    let row = ExperimentRow {
        problem: prob.label.clone(),
        n: prob.n(),
        dim: prob.dim,
        degree: cfg.degree,
        coarsening: cfg.coarsening,
        delta: cfg.effective_delta(),
        levels: cfg.levels,
        iterations: report.iterations,
        fractional_iterations: report.fractional_iterations,
        condition_estimate: report.condition_estimate,
        iteration_bound: report.iteration_bound,
        coarse_rank,
        setup_seconds,
        solve_seconds,
        coarse_fraction_of_time: pre.coarse_seconds() / total,
    };
    Ok(ExperimentOutcome {
        report,
        row,
        coarse_rank,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Degree,
    Size,
    Coarsening,
}

impl std::str::FromStr for SweepAxis {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "p" | "degree" => SweepAxis::Degree,
            "size" => SweepAxis::Size,
            "coarsening" => SweepAxis::Coarsening,
            other => bail!("unknown sweep axis '{other}' (expected p, size or coarsening)"),
        })
    }
}

/// One experiment per axis value with a shared seed. In `h_squared` mode the
/// size sweep couples the coarsening factor to the size (H/h = sqrt(size),
/// i.e. h = H^2) and sets delta = floor((H/h)/4) to keep H/delta roughly
/// constant.
pub fn run_sweep(
    base: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
    h_squared: bool,
) -> Result<Vec<ExperimentRow>> {
    if h_squared && axis != SweepAxis::Size {
        bail!("h-squared mode applies to the size axis");
    }
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let mut cfg = base.clone();
        match axis {
            SweepAxis::Degree => cfg.degree = v as usize,
            SweepAxis::Size => cfg.size = v as usize,
            SweepAxis::Coarsening => cfg.coarsening = v,
        }
        if h_squared {
            cfg.coarsening = (cfg.size as f64).sqrt();
            cfg.delta = Some((cfg.coarsening / 4.0).floor() as usize);
        }
        let outcome = run_experiment(&cfg, None)
            .with_context(|| format!("sweep value {v}"))?;
        rows.push(outcome.row);
    }
    Ok(rows)
}

/// One row of the coarse-grid accuracy study.
#[derive(Debug, Clone)]
pub struct StudyRow {
    pub size: usize,
    pub n: usize,
    pub big_h: f64,
    pub degree: usize,
    pub anorm_error: f64,
}

/// Smooth manufactured field evaluated at the problem's unknowns.
fn smooth_field(prob: &ProblemInstance) -> Vec<f64> {
    let mut u = Vec::with_capacity(prob.n());
    for node in 0..prob.num_nodes() {
        let mut v = 1.0;
        for k in 0..prob.dim {
            v *= (0.3 * prob.coords[node * prob.dim + k] + 0.4).sin();
        }
        for _ in 0..prob.num_components {
            u.push(v);
        }
    }
    u
}

/// Coarse-solution A-norm errors against direct fine solves for a series of
/// mesh sizes at fixed H/h, plus the fitted log-log slope of error vs H.
///
/// Partitioning uses recursive inertial bisection with the part count
/// rounded down to a power of two; H is measured from the realized per-part
/// node count.
pub fn coarse_accuracy_study(
    base: &ExperimentConfig,
    sizes: &[usize],
) -> Result<(Vec<StudyRow>, f64)> {
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let mut cfg = base.clone();
        cfg.size = size;
        cfg.validate()?;
        let prob = build_problem(&cfg).context("stage generate")?;
        let n_nodes = prob.num_nodes();
        let ideal_parts =
            ((n_nodes as f64 / cfg.coarsening.powi(prob.dim as i32)).round() as usize).max(2);
        let num_parts = {
            let mut p = ideal_parts.next_power_of_two();
            if p > ideal_parts {
                p /= 2;
            }
            p.max(2)
        };
        let part = inertial_partition(&prob.coords, prob.dim, num_parts, cfg.seed, false)
            .context("stage partition (inertial)")?;
        let f = generating_basis(&cfg, &prob)?;
        let dof_part = part.expand_to_components(prob.num_components);
        let cs = CoarseSpace::build(&prob.a, &f, &dof_part, cfg.rank_tol)
            .context("stage coarse-space")?;

        let u_star = smooth_field(&prob);
        let rhs = prob.a.spmv(&u_star).context("stage manufactured rhs")?;
        let fac = cholesky_factorize(&prob.a).context("stage direct solve")?;
        let reference = fac.solve(&rhs).context("stage direct solve")?;
        let err = coarse_solution_error(&prob.a, &rhs, &cs, &reference)
            .context("stage coarse error")?;

        let big_h = prob.mesh_h * (n_nodes as f64 / num_parts as f64).powf(1.0 / prob.dim as f64);
        rows.push(StudyRow {
            size,
            n: prob.n(),
            big_h,
            degree: cfg.degree,
            anorm_error: err,
        });
    }
    let slope = fit_loglog_slope(
        &rows.iter().map(|r| r.big_h).collect::<Vec<f64>>(),
        &rows.iter().map(|r| r.anorm_error).collect::<Vec<f64>>(),
    )?;
    Ok((rows, slope))
}

/// Least-squares slope of ln(y) against ln(x).
pub fn fit_loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        bail!("slope fit needs at least two points");
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.max(1e-300).ln()).collect();
    let xm = lx.iter().sum::<f64>() / lx.len() as f64;
    let ym = ly.iter().sum::<f64>() / ly.len() as f64;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let den: f64 = lx.iter().map(|a| (a - xm) * (a - xm)).sum();
    if den == 0.0 {
        bail!("slope fit needs distinct x values");
    }
    Ok(num / den)
}

/// Export all artifacts of a configured experiment: the problem files, the
/// partition, the generating basis with its column labels, and the coarse
/// operators R0 and A0.
pub fn export_artifacts(cfg: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let prob = build_problem(cfg).context("stage generate")?;
    let (part, _) = partition_problem(cfg, &prob)?;
    let f = generating_basis(cfg, &prob)?;
    let dof_part = part.expand_to_components(prob.num_components);
    let cs = CoarseSpace::build(&prob.a, &f, &dof_part, cfg.rank_tol)
        .context("stage coarse-space")?;

    let prefix = out_dir.join(cfg.problem.label());
    write_problem_files(&prob, &prefix).context("stage export problem")?;
    io::write_partition_path(out_dir.join("partition.txt"), &part)
        .context("stage export partition")?;
    io::write_matrix_market_dense_path(out_dir.join("generating_basis.mtx"), &f.columns)
        .context("stage export F")?;
    let mut labels = String::from("column,component,material,exponents\n");
    for (i, l) in f.column_labels.iter().enumerate() {
        let exps: Vec<String> = l.exponents.iter().map(|e| e.to_string()).collect();
        labels.push_str(&format!(
            "{i},{},{},{}\n",
            l.component,
            l.material,
            exps.join(" ")
        ));
    }
    std::fs::write(out_dir.join("generating_basis_labels.csv"), labels)
        .context("stage export F labels")?;
    io::write_matrix_market_csr_path(out_dir.join("restriction.mtx"), &cs.restriction)
        .context("stage export R0")?;
    io::write_matrix_market_csr_path(out_dir.join("coarse_matrix.mtx"), &cs.coarse_matrix)
        .context("stage export A0")?;
    Ok(())
}

/// Write the PCG residual history as a two-column CSV.
pub fn write_history_csv(path: &Path, report: &SolveReport) -> Result<()> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    writeln!(w, "iteration,residual").map_err(|e| anyhow!(e))?;
    for (k, r) in report.residual_history.iter().enumerate() {
        writeln!(w, "{k},{r}").map_err(|e| anyhow!(e))?;
    }
    Ok(())
}
