//! Matrix Market coordinate format (real, general or symmetric).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::csr::SparseMatrix;
use crate::error::{MatrixMarketError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| MatrixMarketError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix_market(BufReader::new(file)).map_err(|e| match e {
        crate::Error::MatrixMarket(MatrixMarketError::Io { source, .. }) => MatrixMarketError::Io {
            path: path.to_path_buf(),
            source,
        }
        .into(),
        other => other,
    })
}

pub fn parse_matrix_market(reader: impl BufRead) -> Result<SparseMatrix> {
    let mut lines = reader.lines().enumerate();
    let io_err = |source| MatrixMarketError::Io {
        path: Default::default(),
        source,
    };

    let header = match lines.next() {
        Some((_, line)) => line.map_err(io_err)?,
        None => return Err(MatrixMarketError::MalformedHeader("empty file".into()).into()),
    };
    let symmetry = parse_header(&header)?;

    // size line: first non-comment, non-blank line
    let mut size = None;
    for (no, line) in lines.by_ref() {
        let line = line.map_err(io_err)?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        let parsed: Option<Vec<usize>> = (parts.len() == 3)
            .then(|| parts.iter().map(|p| p.parse().ok()).collect())
            .flatten();
        match parsed {
            Some(v) => size = Some((v[0], v[1], v[2])),
            None => {
                return Err(MatrixMarketError::MalformedSize {
                    line: no + 1,
                    text: line.clone(),
                }
                .into())
            }
        }
        break;
    }
    let (nrows, ncols, declared) = size.ok_or_else(|| MatrixMarketError::MalformedSize {
        line: 0,
        text: "missing size line".into(),
    })?;

    let mut triplets = Vec::with_capacity(if symmetry == Symmetry::Symmetric { 2 * declared } else { declared });
    let mut found = 0;
    for (no, line) in lines {
        let line = line.map_err(io_err)?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let invalid = || MatrixMarketError::InvalidEntry {
            line: no + 1,
            text: line.clone(),
        };
        let mut parts = t.split_whitespace();
        let row: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(invalid)?;
        let col: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(invalid)?;
        let val: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(invalid)?;
        if parts.next().is_some() {
            return Err(invalid().into());
        }
        if row == 0 || col == 0 || row > nrows || col > ncols {
            return Err(MatrixMarketError::IndexOutOfBounds {
                line: no + 1,
                row,
                col,
                nrows,
                ncols,
            }
            .into());
        }
        found += 1;
        triplets.push((row - 1, col - 1, val));
        if symmetry == Symmetry::Symmetric && row != col {
            triplets.push((col - 1, row - 1, val));
        }
    }
    if found != declared {
        return Err(MatrixMarketError::EntryCount { declared, found }.into());
    }
    SparseMatrix::from_triplets(nrows, ncols, &triplets)
}

fn parse_header(line: &str) -> Result<Symmetry> {
    let malformed = || MatrixMarketError::MalformedHeader(line.to_string());
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(malformed().into());
    }
    if tokens[2] != "coordinate" {
        return Err(MatrixMarketError::Unsupported(format!("format {}", tokens[2])).into());
    }
    match tokens[3].as_str() {
        "real" | "integer" => {}
        "complex" | "pattern" => {
            return Err(MatrixMarketError::Unsupported(format!("field {}", tokens[3])).into())
        }
        _ => return Err(malformed().into()),
    }
    match tokens[4].as_str() {
        "general" => Ok(Symmetry::General),
        "symmetric" => Ok(Symmetry::Symmetric),
        "skew-symmetric" | "hermitian" => {
            Err(MatrixMarketError::Unsupported(format!("symmetry {}", tokens[4])).into())
        }
        _ => Err(malformed().into()),
    }
}

/// Writes `a` as a general real coordinate file.
pub fn write_matrix_market(path: impl AsRef<Path>, a: &SparseMatrix) -> Result<()> {
    let path = path.as_ref();
    let io = |source| MatrixMarketError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "%%MatrixMarket matrix coordinate real general").map_err(io)?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz()).map_err(io)?;
    for (i, j, v) in a.to_triplets() {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v).map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}
