//! Matrix Market coordinate files.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use feec_core::linalg::{SparseMatrix, TripletBuilder};

use crate::error::{CliError, Result};

/// `%%MatrixMarket matrix coordinate real general` text with 1-based indices.
pub fn to_string(m: &SparseMatrix) -> String {
    let mut s = String::with_capacity(32 * m.nnz() + 64);
    s.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", m.nrows(), m.ncols(), m.nnz());
    for (i, j, v) in m.triplets() {
        let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, v);
    }
    s
}

pub fn write(path: &Path, m: &SparseMatrix) -> Result<()> {
    std::fs::write(path, to_string(m)).map_err(|e| CliError::io(path, e))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

fn bad(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("Matrix Market line {line}: {msg}"))
}

/// Reads real, integer or pattern coordinate matrices with general, symmetric or
/// skew-symmetric storage.
pub fn parse<R: Read>(reader: R) -> Result<SparseMatrix> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => l.map_err(|e| bad(1, e))?,
        None => return Err(bad(1, "empty input")),
    };
    let h: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if h.len() != 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" || h[2] != "coordinate" {
        return Err(bad(1, "expected `%%MatrixMarket matrix coordinate <field> <symmetry>`"));
    }
    let pattern = match h[3].as_str() {
        "real" | "integer" | "double" => false,
        "pattern" => true,
        f => return Err(bad(1, format!("unsupported field `{f}`"))),
    };
    let sym = match h[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        s => return Err(bad(1, format!("unsupported symmetry `{s}`"))),
    };
    let mut data = lines.filter_map(|(n, l)| match l {
        Ok(l) if l.trim().is_empty() || l.starts_with('%') => None,
        other => Some((n + 1, other)),
    });
    let (n, size) = data.next().ok_or_else(|| bad(2, "missing size line"))?;
    let size = size.map_err(|e| bad(n, e))?;
    let dims: Vec<usize> =
        size.split_whitespace().map(str::parse).collect::<std::result::Result<_, _>>().map_err(|e| bad(n, e))?;
    let [rows, cols, nnz] = dims[..] else {
        return Err(bad(n, "size line needs rows, columns and entry count"));
    };
    let mut b = TripletBuilder::with_capacity(rows, cols, nnz);
    let mut count = 0;
    for (n, line) in data {
        let line = line.map_err(|e| bad(n, e))?;
        let mut it = line.split_whitespace();
        let mut index = |limit: usize| -> Result<usize> {
            let v: usize = it.next().ok_or_else(|| bad(n, "missing index"))?.parse().map_err(|e| bad(n, e))?;
            if v == 0 || v > limit {
                return Err(bad(n, format!("index {v} outside 1..={limit}")));
            }
            Ok(v - 1)
        };
        let (i, j) = (index(rows)?, index(cols)?);
        let v: f64 = if pattern {
            1.0
        } else {
            it.next().ok_or_else(|| bad(n, "missing value"))?.parse().map_err(|e| bad(n, e))?
        };
        b.push(i, j, v);
        if i != j {
            match sym {
                Symmetry::General => {}
                Symmetry::Symmetric => b.push(j, i, v),
                Symmetry::SkewSymmetric => b.push(j, i, -v),
            }
        }
        count += 1;
    }
    if count != nnz {
        return Err(bad(0, format!("header declares {nnz} entries but {count} were read")));
    }
    Ok(b.build())
}

pub fn read(path: &Path) -> Result<SparseMatrix> {
    let f = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    parse(f).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}
