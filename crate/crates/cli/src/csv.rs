//! CSV emission for experiment rows: append-safe, header-stable, and
//! bitwise deterministic for a fixed config and seed when timing columns
//! are suppressed.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub const CSV_HEADER: &str = "problem,n,d,p,coarsening,delta,levels,iterations,\
fractional_iterations,condition_estimate,iteration_bound,coarse_rank,\
setup_seconds,solve_seconds,coarse_fraction_of_time";

#[derive(Debug, Clone)]
pub struct ExperimentRow {
    pub problem: String,
    pub n: usize,
    pub dim: usize,
    pub degree: usize,
    pub coarsening: f64,
    pub delta: usize,
    pub levels: usize,
    pub iterations: usize,
    pub fractional_iterations: f64,
    pub condition_estimate: f64,
    pub iteration_bound: f64,
    pub coarse_rank: usize,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    pub coarse_fraction_of_time: f64,
}

fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

impl ExperimentRow {
    /// One CSV line; timing columns are zeroed when `include_timing` is
    /// false so output is reproducible bit for bit.
    pub fn to_csv_line(&self, include_timing: bool) -> String {
        let (setup, solve, frac) = if include_timing {
            (
                self.setup_seconds,
                self.solve_seconds,
                self.coarse_fraction_of_time,
            )
        } else {
            (0.0, 0.0, 0.0)
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.problem,
            self.n,
            self.dim,
            self.degree,
            fmt_f64(self.coarsening),
            self.delta,
            self.levels,
            self.iterations,
            fmt_f64(self.fractional_iterations),
            fmt_f64(self.condition_estimate),
            fmt_f64(self.iteration_bound),
            self.coarse_rank,
            fmt_f64(setup),
            fmt_f64(solve),
            fmt_f64(frac),
        )
    }
}

/// Append rows to a CSV file, writing the header when the file is new or
/// empty and validating it otherwise.
pub fn append_rows(path: &Path, rows: &[ExperimentRow], include_timing: bool) -> Result<()> {
    let existing = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(e).with_context(|| format!("reading {}", path.display())),
    };
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    if existing.trim().is_empty() {
        writeln!(file, "{CSV_HEADER}")?;
    } else {
        let first = existing.lines().next().unwrap_or("");
        if first != CSV_HEADER {
            bail!(
                "{} exists with a different header; refusing to append",
                path.display()
            );
        }
    }
    for row in rows {
        writeln!(file, "{}", row.to_csv_line(include_timing))?;
    }
    Ok(())
}

/// Write the coarse accuracy study as CSV with the fitted order on each row.
pub fn write_study_csv(
    path: &Path,
    rows: &[crate::pipeline::StudyRow],
    fitted_order: f64,
) -> Result<()> {
    let mut w = std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    writeln!(w, "size,n,p,H,anorm_error,fitted_order")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.size,
            r.n,
            r.degree,
            fmt_f64(r.big_h),
            fmt_f64(r.anorm_error),
            fmt_f64(fitted_order)
        )?;
    }
    Ok(())
}
