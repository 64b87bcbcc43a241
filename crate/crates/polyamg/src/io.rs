//! File formats: Matrix Market coordinate files, edge lists, and partition
//! files.
//!
//! All indices are 0-based in memory. Matrix Market files are 1-based on
//! disk per the format specification. Values are written with Rust's
//! shortest-roundtrip float formatting, so exactly representable values
//! round-trip bit-identically.

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Writes a matrix in Matrix Market coordinate format.
///
/// With `symmetric` set, only the lower triangle (including the diagonal)
/// is stored and the header declares the symmetric kind; the matrix must
/// actually be symmetric. Otherwise the general kind with all entries is
/// written.
pub fn write_matrix_market(path: &Path, a: &SparseMatrix, symmetric: bool) -> Result<()> {
    if symmetric && !a.is_symmetric(0.0) {
        return Err(Error::InvalidArgument(
            "cannot write an asymmetric matrix as symmetric kind".to_string(),
        ));
    }
    let mut w = BufWriter::new(File::create(path)?);
    let kind = if symmetric { "symmetric" } else { "general" };
    writeln!(w, "%%MatrixMarket matrix coordinate real {kind}")?;
    let entries: Vec<(usize, usize, f64)> = a
        .iter()
        .filter(|&(i, j, _)| !symmetric || j <= i)
        .collect();
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Reads a Matrix Market coordinate file (real, general or symmetric kind).
pub fn read_matrix_market(path: &Path) -> Result<SparseMatrix> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();

    let (first_no, first) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, "empty file"))?;
    let header = first?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() < 5
        || !tokens[0].eq_ignore_ascii_case("%%MatrixMarket")
        || !tokens[1].eq_ignore_ascii_case("matrix")
        || !tokens[2].eq_ignore_ascii_case("coordinate")
        || !tokens[3].eq_ignore_ascii_case("real")
    {
        return Err(parse_error(
            path,
            first_no + 1,
            "expected header '%%MatrixMarket matrix coordinate real <kind>'",
        ));
    }
    let symmetric = match tokens[4].to_ascii_lowercase().as_str() {
        "symmetric" => true,
        "general" => false,
        other => {
            return Err(parse_error(
                path,
                first_no + 1,
                format!("unsupported kind '{other}'"),
            ))
        }
    };

    let mut shape: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut entries_read = 0usize;
    for (no, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match shape {
            None => {
                if fields.len() != 3 {
                    return Err(parse_error(path, no + 1, "expected 'nrows ncols nnz'"));
                }
                let nums: Vec<usize> = fields
                    .iter()
                    .map(|f| f.parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| parse_error(path, no + 1, format!("bad size line: {e}")))?;
                shape = Some((nums[0], nums[1], nums[2]));
                triplets.reserve(nums[2]);
            }
            Some((nrows, ncols, _)) => {
                if fields.len() != 3 {
                    return Err(parse_error(path, no + 1, "expected 'i j value'"));
                }
                let i: usize = fields[0]
                    .parse()
                    .map_err(|e| parse_error(path, no + 1, format!("bad row index: {e}")))?;
                let j: usize = fields[1]
                    .parse()
                    .map_err(|e| parse_error(path, no + 1, format!("bad column index: {e}")))?;
                let v: f64 = fields[2]
                    .parse()
                    .map_err(|e| parse_error(path, no + 1, format!("bad value: {e}")))?;
                if i == 0 || j == 0 || i > nrows || j > ncols {
                    return Err(parse_error(
                        path,
                        no + 1,
                        format!("1-based entry ({i}, {j}) outside {nrows}x{ncols}"),
                    ));
                }
                if symmetric && j > i {
                    return Err(parse_error(
                        path,
                        no + 1,
                        format!("symmetric kind stores the lower triangle only, got ({i}, {j})"),
                    ));
                }
                entries_read += 1;
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (nrows, ncols, declared) = shape.ok_or_else(|| parse_error(path, 2, "missing size line"))?;
    if entries_read != declared {
        return Err(parse_error(
            path,
            2,
            format!("size line declares {declared} entries, file has {entries_read}"),
        ));
    }
    SparseMatrix::assemble(nrows, ncols, &triplets)
}

/// Reads an edge-list file: one `i j [w]` per line, 0-based indices,
/// `#`-prefixed comment lines, blank lines ignored.
///
/// Returns the vertex count (max index + 1), the edges, and weights when
/// any line carries one (lines without a weight then default to 1).
#[allow(clippy::type_complexity)]
pub fn read_edge_list(path: &Path) -> Result<(usize, Vec<(usize, usize)>, Option<Vec<f64>>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    let mut any_weight = false;
    let mut max_vertex = 0usize;
    for (no, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(parse_error(path, no + 1, "expected 'i j' or 'i j w'"));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|e| parse_error(path, no + 1, format!("bad vertex index: {e}")))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|e| parse_error(path, no + 1, format!("bad vertex index: {e}")))?;
        let w = if fields.len() == 3 {
            any_weight = true;
            fields[2]
                .parse()
                .map_err(|e| parse_error(path, no + 1, format!("bad weight: {e}")))?
        } else {
            1.0
        };
        if i == j {
            return Err(parse_error(path, no + 1, format!("self-loop at vertex {i}")));
        }
        if w <= 0.0 {
            return Err(parse_error(
                path,
                no + 1,
                format!("edge weight must be positive, got {w}"),
            ));
        }
        max_vertex = max_vertex.max(i).max(j);
        edges.push((i, j));
        weights.push(w);
    }
    if edges.is_empty() {
        return Err(parse_error(path, 1, "no edges in file"));
    }
    Ok((max_vertex + 1, edges, any_weight.then_some(weights)))
}

/// Writes an edge list with unit weights omitted.
pub fn write_edge_list(path: &Path, num_vertices: usize, edges: &[(usize, usize)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# {num_vertices} vertices, {} edges", edges.len())?;
    for &(a, b) in edges {
        writeln!(w, "{a} {b}")?;
    }
    Ok(())
}

/// Writes a partition file: line `v` holds the aggregate index of vertex `v`,
/// preceded by a comment header.
pub fn write_partition(path: &Path, aggregate_of: &[usize], num_aggregates: usize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "# partition: {} vertices into {} aggregates; line v = aggregate of vertex v",
        aggregate_of.len(),
        num_aggregates
    )?;
    for &a in aggregate_of {
        writeln!(w, "{a}")?;
    }
    Ok(())
}

/// Reads a partition file written by [`write_partition`].
pub fn read_partition(path: &Path) -> Result<Vec<usize>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (no, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push(
            trimmed
                .parse()
                .map_err(|e| parse_error(path, no + 1, format!("bad aggregate index: {e}")))?,
        );
    }
    Ok(out)
}
