//! Matrix Market exchange format: real coordinate matrices and right-hand
//! side vectors (array or coordinate).

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::dense::DenseVector;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

#[derive(Debug)]
struct Header {
    layout: Layout,
    symmetry: Symmetry,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_banner(line: &str) -> Result<Header> {
    let tokens: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(parse_error(1, "missing %%MatrixMarket banner"));
    }
    if tokens[1] != "matrix" {
        return Err(Error::UnsupportedFormat(format!("object '{}'", tokens[1])));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(Error::UnsupportedFormat(format!("format '{other}'"))),
    };
    if tokens[3] != "real" && tokens[3] != "double" {
        return Err(Error::UnsupportedFormat(format!("field '{}'", tokens[3])));
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(Error::UnsupportedFormat(format!("symmetry '{other}'"))),
    };
    Ok(Header { layout, symmetry })
}

/// Line iterator that skips comments and blank lines and keeps 1-based line
/// numbers for error messages.
struct DataLines<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> DataLines<R> {
    fn next_data(&mut self) -> Result<Option<(usize, String)>> {
        for line in self.lines.by_ref() {
            self.line_no += 1;
            let line = line.map_err(|e| parse_error(self.line_no, e.to_string()))?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('%') {
                continue;
            }
            return Ok(Some((self.line_no, trimmed.to_string())));
        }
        Ok(None)
    }
}

fn open<R: BufRead>(reader: R) -> Result<(Header, DataLines<R>)> {
    let mut lines = reader.lines();
    let banner = match lines.next() {
        Some(l) => l.map_err(|e| parse_error(1, e.to_string()))?,
        None => return Err(parse_error(1, "empty input")),
    };
    let header = parse_banner(&banner)?;
    Ok((header, DataLines { lines, line_no: 1 }))
}

fn fields<T: std::str::FromStr>(line_no: usize, line: &str, expected: usize) -> Result<Vec<T>> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != expected {
        return Err(parse_error(
            line_no,
            format!("expected {expected} fields, found {}", parts.len()),
        ));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<T>()
                .map_err(|_| parse_error(line_no, format!("cannot parse '{p}'")))
        })
        .collect()
}

fn parse_value(line_no: usize, token: &str) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| parse_error(line_no, format!("cannot parse value '{token}'")))?;
    if !v.is_finite() {
        return Err(parse_error(line_no, format!("non-finite value '{token}'")));
    }
    Ok(v)
}

/// Parses one coordinate entry line `i j value` into 0-based indices.
fn coordinate_entry(
    line_no: usize,
    line: &str,
    n_rows: usize,
    n_cols: usize,
) -> Result<(usize, usize, f64)> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(parse_error(
            line_no,
            format!("expected 'row col value', found {} fields", parts.len()),
        ));
    }
    let idx = |t: &str| -> Result<usize> {
        t.parse::<usize>()
            .map_err(|_| parse_error(line_no, format!("cannot parse index '{t}'")))
    };
    let (i, j) = (idx(parts[0])?, idx(parts[1])?);
    if i == 0 || j == 0 || i > n_rows || j > n_cols {
        return Err(parse_error(
            line_no,
            format!("index ({i}, {j}) outside {n_rows}x{n_cols}"),
        ));
    }
    Ok((i - 1, j - 1, parse_value(line_no, parts[2])?))
}

/// Reads a real coordinate matrix. Symmetric files are expanded to full
/// storage and duplicate entries are summed.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<CsrMatrix> {
    let (header, mut lines) = open(reader)?;
    if header.layout != Layout::Coordinate {
        return Err(Error::UnsupportedFormat(
            "array layout is only supported for right-hand side vectors".into(),
        ));
    }
    let (size_line_no, size_line) = lines
        .next_data()?
        .ok_or_else(|| parse_error(lines.line_no, "missing size line"))?;
    let size: Vec<usize> = fields(size_line_no, &size_line, 3)?;
    let (n_rows, n_cols, nnz) = (size[0], size[1], size[2]);
    if header.symmetry == Symmetry::Symmetric && n_rows != n_cols {
        return Err(parse_error(size_line_no, "symmetric matrix must be square"));
    }

    let mut triples = Vec::with_capacity(nnz * 2);
    let mut seen = 0;
    while let Some((line_no, line)) = lines.next_data()? {
        if seen == nnz {
            return Err(parse_error(
                line_no,
                format!("more entries than the declared {nnz}"),
            ));
        }
        let (i, j, v) = coordinate_entry(line_no, &line, n_rows, n_cols)?;
        triples.push((i, j, v));
        if header.symmetry == Symmetry::Symmetric && i != j {
            triples.push((j, i, v));
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(parse_error(
            lines.line_no,
            format!("declared {nnz} entries but found {seen}"),
        ));
    }
    CsrMatrix::from_coo(&triples, n_rows, n_cols)
}

/// Reads a right-hand side vector stored as an `n x 1` array or coordinate
/// file.
pub fn read_matrix_market_rhs<R: BufRead>(reader: R) -> Result<DenseVector> {
    let (header, mut lines) = open(reader)?;
    let (size_line_no, size_line) = lines
        .next_data()?
        .ok_or_else(|| parse_error(lines.line_no, "missing size line"))?;
    match header.layout {
        Layout::Array => {
            let size: Vec<usize> = fields(size_line_no, &size_line, 2)?;
            let (n, cols) = (size[0], size[1]);
            if cols != 1 && n != 0 {
                return Err(parse_error(
                    size_line_no,
                    format!("expected a single column, found {cols}"),
                ));
            }
            let mut out = Vec::with_capacity(n);
            while let Some((line_no, line)) = lines.next_data()? {
                for tok in line.split_whitespace() {
                    if out.len() == n {
                        return Err(parse_error(
                            line_no,
                            format!("more values than the declared {n}"),
                        ));
                    }
                    out.push(parse_value(line_no, tok)?);
                }
            }
            if out.len() != n {
                return Err(parse_error(
                    lines.line_no,
                    format!("declared {n} values but found {}", out.len()),
                ));
            }
            Ok(out)
        }
        Layout::Coordinate => {
            let size: Vec<usize> = fields(size_line_no, &size_line, 3)?;
            let (n, cols, nnz) = (size[0], size[1], size[2]);
            if cols != 1 && n != 0 {
                return Err(parse_error(
                    size_line_no,
                    format!("expected a single column, found {cols}"),
                ));
            }
            let mut out = vec![0.0; n];
            let mut seen = 0;
            while let Some((line_no, line)) = lines.next_data()? {
                if seen == nnz {
                    return Err(parse_error(
                        line_no,
                        format!("more entries than the declared {nnz}"),
                    ));
                }
                let (i, _, v) = coordinate_entry(line_no, &line, n, cols.max(1))?;
                out[i] += v;
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_error(
                    lines.line_no,
                    format!("declared {nnz} entries but found {seen}"),
                ));
            }
            Ok(out)
        }
    }
}

fn open_file(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
}

pub fn read_matrix_market_file(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    read_matrix_market(open_file(path.as_ref())?)
}

pub fn read_matrix_market_rhs_file(path: impl AsRef<Path>) -> Result<DenseVector> {
    read_matrix_market_rhs(open_file(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(s: &str) -> Result<CsrMatrix> {
        read_matrix_market(s.as_bytes())
    }

    fn rhs(s: &str) -> Result<DenseVector> {
        read_matrix_market_rhs(s.as_bytes())
    }

    #[test]
    fn general_diagonal() {
        let a =
            mat("%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 4\n2 2 5\n")
                .unwrap();
        assert_eq!(a.to_dense().as_slice(), &[4.0, 0.0, 0.0, 5.0]);
    }

    #[test]
    fn symmetric_is_expanded() {
        let a =
            mat("%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 1\n2 1 3\n2 2 1\n")
                .unwrap();
        assert_eq!(a.get(1, 0), 3.0);
        assert_eq!(a.get(0, 1), 3.0);
        assert_eq!(a.nnz(), 4);
    }

    #[test]
    fn unsupported_qualifiers() {
        for banner in [
            "%%MatrixMarket matrix coordinate complex general",
            "%%MatrixMarket matrix coordinate pattern general",
            "%%MatrixMarket matrix array real general",
            "%%MatrixMarket matrix coordinate real skew-symmetric",
            "%%MatrixMarket matrix coordinate integer general",
        ] {
            let err = mat(&format!("{banner}\n1 1 1\n1 1 1\n")).unwrap_err();
            assert!(
                matches!(err, Error::UnsupportedFormat(_)),
                "{banner}: {err}"
            );
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = mat("%%MatrixMarket matrix coordinate real general\n% c\n2 2 2\n1 1 4\n2 x 5\n")
            .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            mat("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            mat("2 2 1\n1 1 1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            mat("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn rhs_array_and_coordinate() {
        assert_eq!(
            rhs("%%MatrixMarket matrix array real general\n3 1\n1\n2\n3\n").unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        assert_eq!(
            rhs("%%MatrixMarket matrix array real general\n0 1\n").unwrap(),
            Vec::<f64>::new()
        );
        assert_eq!(
            rhs("%%MatrixMarket matrix coordinate real general\n3 1 1\n2 1 7.5\n").unwrap(),
            vec![0.0, 7.5, 0.0]
        );
        assert!(matches!(
            rhs("%%MatrixMarket matrix array real general\n3 1\n1\n2\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            rhs("%%MatrixMarket matrix array real general\n1 1\n1\n2\n"),
            Err(Error::Parse { line: 4, .. })
        ));
        assert!(matches!(
            rhs("%%MatrixMarket matrix array complex general\n1 1\n1 0\n"),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn missing_file_names_path() {
        let err = read_matrix_market_file("/nonexistent/sherman4.mtx").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/sherman4.mtx"));
    }
}
