//! Dataset and graph file formats.
//!
//! Datasets are CSV with header `x1,...,xd` and one sample per row, floats
//! printed with 17 significant digits so a round trip is bit-exact.
//! Adjacency matrices are CSV of 0/1 rows. Structured sidecars (ground
//! truth, diagnostics, reports) are JSON and handled by serde at the call
//! sites.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::dag::Dag;
use crate::datagen::DataMatrix;
use crate::error::{Error, Result};

/// Writes a sample matrix as CSV with an `x1,...,xd` header.
pub fn write_data_csv(path: &Path, data: &DataMatrix) -> Result<()> {
    let (n, d) = (data.nrows(), data.ncols());
    let mut out = String::with_capacity(n * d * 26);
    for j in 0..d {
        if j > 0 {
            out.push(',');
        }
        out.push_str(&format!("x{}", j + 1));
    }
    out.push('\n');
    for i in 0..n {
        for j in 0..d {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{:.16e}", data[(i, j)]));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a dataset written by [`write_data_csv`] (any numeric CSV with a
/// header row works).
pub fn read_data_csv(path: &Path) -> Result<DataMatrix> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Data(format!("{}: empty file", path.display())))?;
    let d = header.split(',').count();
    let mut values = Vec::new();
    let mut n = 0usize;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d {
            return Err(Error::Data(format!(
                "{}: row {} has {} fields, expected {d}",
                path.display(),
                lineno + 2,
                fields.len()
            )));
        }
        for f in fields {
            values.push(f.trim().parse::<f64>().map_err(|e| {
                Error::Data(format!("{}: row {}: {e}", path.display(), lineno + 2))
            })?);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    Ok(DMatrix::from_fn(n, d, |i, j| values[i * d + j]))
}

/// Writes an adjacency matrix as 0/1 CSV rows.
pub fn write_adjacency_csv(path: &Path, dag: &Dag) -> Result<()> {
    let d = dag.node_count();
    let mut out = String::with_capacity(d * (2 * d + 1));
    for i in 0..d {
        for j in 0..d {
            if j > 0 {
                out.push(',');
            }
            out.push(if dag.has_edge(i, j) { '1' } else { '0' });
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads an adjacency matrix written by [`write_adjacency_csv`].
pub fn read_adjacency_csv(path: &Path) -> Result<Dag> {
    let text = fs::read_to_string(path)?;
    let rows: Vec<Vec<u8>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            line.split(',')
                .map(|f| match f.trim() {
                    "0" => Ok(0u8),
                    "1" => Ok(1u8),
                    other => Err(Error::Data(format!(
                        "{}: adjacency entry {other:?} is not 0/1",
                        path.display()
                    ))),
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let d = rows.len();
    let mut flat = Vec::with_capacity(d * d);
    for row in &rows {
        if row.len() != d {
            return Err(Error::Data(format!(
                "{}: adjacency is not square ({d} rows, {} columns)",
                path.display(),
                row.len()
            )));
        }
        flat.extend_from_slice(row);
    }
    Dag::from_adjacency(d, flat)
}
