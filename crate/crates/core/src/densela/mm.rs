//! Matrix Market *array* format reader/writer.
//!
//! Only the dense variant `%%MatrixMarket matrix array real general` is
//! supported: a header line, optional `%` comment lines, a `rows cols` size
//! line, then one entry per line in column-major order. Values are written
//! with 17 significant decimal digits so that write-then-read round-trips
//! bit-exactly.

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

const HEADER: &str = "%%MatrixMarket matrix array real general";

pub fn write_matrix_market(path: &Path, m: &DenseMatrix) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_to(&mut w, m)?;
    w.flush()?;
    Ok(())
}

pub fn write_to<W: Write>(w: &mut W, m: &DenseMatrix) -> Result<()> {
    writeln!(w, "{HEADER}")?;
    writeln!(w, "{} {}", m.n_rows(), m.n_cols())?;
    for j in 0..m.n_cols() {
        for i in 0..m.n_rows() {
            writeln!(w, "{:.16e}", m.get(i, j))?;
        }
    }
    Ok(())
}

pub fn read_matrix_market(path: &Path) -> Result<DenseMatrix> {
    let file = File::open(path)?;
    read_from(BufReader::new(file))
        .map_err(|e| annotate(e, &path.display().to_string()))
}

fn annotate(e: Error, path: &str) -> Error {
    match e {
        Error::Parse(msg) => Error::Parse(format!("{path}: {msg}")),
        other => other,
    }
}

pub fn read_from<R: Read>(r: R) -> Result<DenseMatrix> {
    let mut lines = BufReader::new(r).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 5
        || !toks[0].eq_ignore_ascii_case("%%MatrixMarket")
        || !toks[1].eq_ignore_ascii_case("matrix")
        || !toks[2].eq_ignore_ascii_case("array")
        || !toks[3].eq_ignore_ascii_case("real")
        || !toks[4].eq_ignore_ascii_case("general")
    {
        return Err(Error::Parse(format!(
            "unsupported header {header:?}; expected {HEADER:?}"
        )));
    }
    let mut size_line = None;
    for line in lines.by_ref() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        size_line = Some(line);
        break;
    }
    let size_line = size_line.ok_or_else(|| Error::Parse("missing size line".into()))?;
    let mut it = size_line.split_whitespace();
    let n_rows: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad size line {size_line:?}")))?;
    let n_cols: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad size line {size_line:?}")))?;
    if it.next().is_some() {
        return Err(Error::Parse(format!("bad size line {size_line:?}")));
    }
    let mut m = DenseMatrix::zeros(n_rows, n_cols);
    let mut count = 0usize;
    let total = n_rows * n_cols;
    for line in lines {
        let line = line?;
        for tok in line.split_whitespace() {
            if tok.starts_with('%') {
                break;
            }
            if count >= total {
                return Err(Error::Parse("more entries than rows*cols".into()));
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad entry {tok:?}")))?;
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("matrix entry {count}")));
            }
            // column-major body
            let i = count % n_rows;
            let j = count / n_rows;
            m.set(i, j, v);
            count += 1;
        }
    }
    if count != total {
        return Err(Error::Parse(format!(
            "expected {total} entries, found {count}"
        )));
    }
    Ok(m)
}
