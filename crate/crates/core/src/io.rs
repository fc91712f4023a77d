//! Matrix Market readers and writers (coordinate format for sparse matrices,
//! array format for dense matrices and vectors) and the one-column partition
//! text format. Values round-trip bit-exactly: writing uses Rust's shortest
//! representation that parses back to the same float.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::sparse::CsrMatrix;
use crate::DenseMatrix;

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

struct Lines<R: BufRead> {
    reader: R,
    path: String,
    lineno: usize,
}

impl<R: BufRead> Lines<R> {
    fn new(reader: R, path: &str) -> Self {
        Lines {
            reader,
            path: path.to_string(),
            lineno: 0,
        }
    }

    /// Next non-comment, non-blank line.
    fn next_data(&mut self) -> Result<Option<(usize, String)>> {
        let mut buf = String::new();
        loop {
            buf.clear();
            let read = self.reader.read_line(&mut buf)?;
            if read == 0 {
                return Ok(None);
            }
            self.lineno += 1;
            let t = buf.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            return Ok(Some((self.lineno, t.to_string())));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MmFormat {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MmSymmetry {
    General,
    Symmetric,
}

fn read_header<R: BufRead>(lines: &mut Lines<R>) -> Result<(MmFormat, MmSymmetry)> {
    // the banner is a comment line, so read it directly
    let mut banner = String::new();
    lines.reader.read_line(&mut banner)?;
    lines.lineno += 1;
    let toks: Vec<String> = banner
        .trim()
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if toks.len() < 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(parse_err(
            &lines.path,
            lines.lineno,
            "expected '%%MatrixMarket matrix <format> <field> <symmetry>' banner",
        ));
    }
    let format = match toks[2].as_str() {
        "coordinate" => MmFormat::Coordinate,
        "array" => MmFormat::Array,
        other => {
            return Err(parse_err(
                &lines.path,
                lines.lineno,
                format!("unsupported format '{other}'"),
            ))
        }
    };
    match toks[3].as_str() {
        "real" | "integer" => {}
        other => {
            return Err(parse_err(
                &lines.path,
                lines.lineno,
                format!("unsupported field '{other}'"),
            ))
        }
    }
    let symmetry = match toks[4].as_str() {
        "general" => MmSymmetry::General,
        "symmetric" => MmSymmetry::Symmetric,
        other => {
            return Err(parse_err(
                &lines.path,
                lines.lineno,
                format!("unsupported symmetry '{other}'"),
            ))
        }
    };
    Ok((format, symmetry))
}

/// Write a sparse matrix in Matrix Market coordinate format. Matrices flagged
/// symmetric are written in symmetric storage (lower triangle only).
pub fn write_matrix_market_csr<W: Write>(w: &mut W, a: &CsrMatrix) -> Result<()> {
    let symmetric = a.is_symmetric_flagged();
    writeln!(
        w,
        "%%MatrixMarket matrix coordinate real {}",
        if symmetric { "symmetric" } else { "general" }
    )?;
    let nnz = if symmetric {
        (0..a.nrows())
            .map(|i| a.row(i).0.iter().filter(|&&j| j <= i).count())
            .sum::<usize>()
    } else {
        a.nnz()
    };
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), nnz)?;
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if symmetric && j > i {
                continue;
            }
            writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}

pub fn write_matrix_market_csr_path<P: AsRef<Path>>(path: P, a: &CsrMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market_csr(&mut w, a)
}

/// Read a sparse matrix in Matrix Market coordinate format. Symmetric storage
/// is expanded to the full pattern and the symmetric flag is set.
pub fn read_matrix_market_csr<R: BufRead>(r: R, path: &str) -> Result<CsrMatrix> {
    let mut lines = Lines::new(r, path);
    let (format, symmetry) = read_header(&mut lines)?;
    if format != MmFormat::Coordinate {
        return Err(parse_err(path, lines.lineno, "expected coordinate format"));
    }
    let (ln, size_line) = lines
        .next_data()?
        .ok_or_else(|| parse_err(path, lines.lineno, "missing size line"))?;
    let sizes: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(path, ln, format!("bad size line: {e}")))?;
    if sizes.len() != 3 {
        return Err(parse_err(path, ln, "size line needs 'nrows ncols nnz'"));
    }
    let (nrows, ncols, nnz) = (sizes[0], sizes[1], sizes[2]);
    let mut triplets = Vec::with_capacity(if symmetry == MmSymmetry::Symmetric {
        2 * nnz
    } else {
        nnz
    });
    for _ in 0..nnz {
        let (ln, line) = lines
            .next_data()?
            .ok_or_else(|| parse_err(path, lines.lineno, "unexpected end of entries"))?;
        let mut toks = line.split_whitespace();
        let i: usize = toks
            .next()
            .ok_or_else(|| parse_err(path, ln, "missing row index"))?
            .parse()
            .map_err(|e| parse_err(path, ln, format!("bad row index: {e}")))?;
        let j: usize = toks
            .next()
            .ok_or_else(|| parse_err(path, ln, "missing column index"))?
            .parse()
            .map_err(|e| parse_err(path, ln, format!("bad column index: {e}")))?;
        let v: f64 = toks
            .next()
            .ok_or_else(|| parse_err(path, ln, "missing value"))?
            .parse()
            .map_err(|e| parse_err(path, ln, format!("bad value: {e}")))?;
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(parse_err(path, ln, format!("entry ({i},{j}) out of range")));
        }
        triplets.push((i - 1, j - 1, v));
        if symmetry == MmSymmetry::Symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
    }
    let m = CsrMatrix::from_triplets(nrows, ncols, &triplets)?;
    if symmetry == MmSymmetry::Symmetric {
        m.into_symmetric()
    } else {
        Ok(m)
    }
}

pub fn read_matrix_market_csr_path<P: AsRef<Path>>(path: P) -> Result<CsrMatrix> {
    let p = path.as_ref();
    let r = BufReader::new(File::open(p)?);
    read_matrix_market_csr(r, &p.display().to_string())
}

/// Write a dense matrix in Matrix Market array format (column-major).
pub fn write_matrix_market_dense<W: Write>(w: &mut W, m: &DenseMatrix) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} {}", m.nrows(), m.ncols())?;
    for j in 0..m.ncols() {
        for &v in m.column(j) {
            writeln!(w, "{}", v)?;
        }
    }
    Ok(())
}

pub fn write_matrix_market_dense_path<P: AsRef<Path>>(path: P, m: &DenseMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market_dense(&mut w, m)
}

/// Read a dense matrix in Matrix Market array format.
pub fn read_matrix_market_dense<R: BufRead>(r: R, path: &str) -> Result<DenseMatrix> {
    let mut lines = Lines::new(r, path);
    let (format, symmetry) = read_header(&mut lines)?;
    if format != MmFormat::Array || symmetry != MmSymmetry::General {
        return Err(parse_err(
            path,
            lines.lineno,
            "expected 'array real general'",
        ));
    }
    let (ln, size_line) = lines
        .next_data()?
        .ok_or_else(|| parse_err(path, lines.lineno, "missing size line"))?;
    let sizes: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(path, ln, format!("bad size line: {e}")))?;
    if sizes.len() != 2 {
        return Err(parse_err(path, ln, "size line needs 'nrows ncols'"));
    }
    let (nrows, ncols) = (sizes[0], sizes[1]);
    let mut values = Vec::with_capacity(nrows * ncols);
    while values.len() < nrows * ncols {
        let (ln, line) = lines
            .next_data()?
            .ok_or_else(|| parse_err(path, lines.lineno, "unexpected end of values"))?;
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|e| parse_err(path, ln, format!("bad value: {e}")))?;
            values.push(v);
        }
    }
    if values.len() != nrows * ncols {
        return Err(parse_err(path, lines.lineno, "too many values"));
    }
    DenseMatrix::from_column_major(nrows, ncols, values)
}

pub fn read_matrix_market_dense_path<P: AsRef<Path>>(path: P) -> Result<DenseMatrix> {
    let p = path.as_ref();
    let r = BufReader::new(File::open(p)?);
    read_matrix_market_dense(r, &p.display().to_string())
}

/// Write a vector as an n-by-1 array.
pub fn write_vector_path<P: AsRef<Path>>(path: P, v: &[f64]) -> Result<()> {
    let m = DenseMatrix::from_column_major(v.len(), 1, v.to_vec())?;
    write_matrix_market_dense_path(path, &m)
}

pub fn read_vector_path<P: AsRef<Path>>(path: P) -> Result<Vec<f64>> {
    let m = read_matrix_market_dense_path(path)?;
    if m.ncols() != 1 {
        return Err(Error::InvalidArgument(format!(
            "expected an n-by-1 array, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.values().to_vec())
}

/// Write a partition as one part id per line, node order = matrix row order.
pub fn write_partition_path<P: AsRef<Path>>(path: P, part: &Partition) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for &p in part.assignment() {
        writeln!(w, "{}", p)?;
    }
    Ok(())
}

pub fn read_partition_path<P: AsRef<Path>>(path: P) -> Result<Partition> {
    let p = path.as_ref();
    let display = p.display().to_string();
    let r = BufReader::new(File::open(p)?);
    let mut assignment = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let id: usize = t
            .parse()
            .map_err(|e| parse_err(&display, lineno + 1, format!("bad part id: {e}")))?;
        assignment.push(id);
    }
    let num_parts = assignment.iter().copied().max().map_or(0, |m| m + 1);
    Partition::new(assignment, num_parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_matrix() -> CsrMatrix {
        CsrMatrix::from_triplets(
            3,
            3,
            &[
                (0, 0, 2.0),
                (0, 1, -0.125),
                (1, 0, -0.125),
                (1, 1, 2.5e-3),
                (2, 2, 1.0 / 3.0),
            ],
        )
        .unwrap()
        .into_symmetric()
        .unwrap()
    }

    #[test]
    fn csr_roundtrip_symmetric_storage() {
        let a = sample_matrix();
        let mut buf = Vec::new();
        write_matrix_market_csr(&mut buf, &a).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("symmetric"));
        // lower triangle only: 4 entries
        assert!(text.lines().skip(1).next().unwrap().starts_with("3 3 4"));
        let b = read_matrix_market_csr(&buf[..], "mem").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dense_roundtrip() {
        let m = DenseMatrix::from_column_major(2, 2, vec![1.0, 0.1 + 0.2, -7.25, 1e-300]).unwrap();
        let mut buf = Vec::new();
        write_matrix_market_dense(&mut buf, &m).unwrap();
        let b = read_matrix_market_dense(&buf[..], "mem").unwrap();
        assert_eq!(m, b);
    }

    #[test]
    fn bad_header_is_rejected() {
        let text = b"%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1.0\n";
        assert!(read_matrix_market_csr(&text[..], "mem").is_err());
    }
}
