//! Dense matrix I/O: Matrix Market (array and coordinate) and headerless CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use randnla::DenseMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("{path}: {msg}")]
    Dimension { path: String, msg: String },
    #[error("cannot infer the format of {0}; pass --format")]
    UnknownFormat(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Matrix Market; dense matrices are written in array form.
    MatrixMarket,
    /// Matrix Market coordinate form (nonzeros only) when writing.
    Coordinate,
    Csv,
}

impl Format {
    /// `.mtx`/`.mm` are Matrix Market, `.csv` is CSV.
    pub fn infer(path: &Path) -> Result<Self, IoError> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("mtx" | "mm") => Ok(Format::MatrixMarket),
            Some("csv") => Ok(Format::Csv),
            _ => Err(IoError::UnknownFormat(path.display().to_string())),
        }
    }
}

pub fn load_matrix(path: &Path, format: Option<Format>) -> Result<DenseMatrix, IoError> {
    let format = match format {
        Some(f) => f,
        None => Format::infer(path)?,
    };
    let text = fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path.display().to_string();
    match format {
        Format::MatrixMarket | Format::Coordinate => parse_matrix_market(&text, &name),
        Format::Csv => parse_csv(&text, &name),
    }
}

pub fn save_matrix(m: &DenseMatrix, path: &Path, format: Option<Format>) -> Result<(), IoError> {
    let format = match format {
        Some(f) => f,
        None => Format::infer(path)?,
    };
    let text = match format {
        Format::MatrixMarket => write_array(m),
        Format::Coordinate => write_coordinate(m),
        Format::Csv => write_csv(m),
    };
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A matrix with a single row or column, as a vector.
pub fn load_vector(path: &Path, format: Option<Format>) -> Result<Vec<f64>, IoError> {
    let m = load_matrix(path, format)?;
    match m.shape() {
        (_, 1) => Ok(m.column(0).to_vec()),
        (1, _) => Ok(m.row(0)),
        (r, c) => Err(IoError::Dimension {
            path: path.display().to_string(),
            msg: format!("expected a vector, found a {r}x{c} matrix"),
        }),
    }
}

pub fn save_vector(v: &[f64], path: &Path, format: Option<Format>) -> Result<(), IoError> {
    save_matrix(&DenseMatrix::column_vector(v), path, format)
}

/// 17 significant digits: enough for any `f64` to survive a round trip.
fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_array(m: &DenseMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for &v in m.as_column_major() {
        out.push_str(&real(v));
        out.push('\n');
    }
    out
}

fn write_coordinate(m: &DenseMatrix) -> String {
    let mut body = String::new();
    let mut nnz = 0;
    for j in 0..m.cols() {
        for (i, &v) in m.column(j).iter().enumerate() {
            if v != 0.0 {
                nnz += 1;
                let _ = writeln!(body, "{} {} {}", i + 1, j + 1, real(v));
            }
        }
    }
    format!(
        "%%MatrixMarket matrix coordinate real general\n{} {} {nnz}\n{body}",
        m.rows(),
        m.cols()
    )
}

fn write_csv(m: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).into_iter().map(real).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Layout {
    Array,
    Coordinate,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

fn parse_matrix_market(text: &str, path: &str) -> Result<DenseMatrix, IoError> {
    let err = |line: usize, msg: String| IoError::Parse {
        path: path.to_string(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, banner) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let words: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(err(1, format!("expected a `%%MatrixMarket matrix` banner, found `{banner}`")));
    }
    let layout = match words[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(err(1, format!("unsupported layout `{other}`"))),
    };
    if !matches!(words[3].as_str(), "real" | "integer" | "double") {
        return Err(err(1, format!("unsupported field `{}`", words[3])));
    }
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(err(1, format!("unsupported symmetry `{other}`"))),
    };

    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (size_line, size) = body.next().ok_or_else(|| err(2, "missing size line".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| parse_token(t, size_line, path))
        .collect::<Result<_, _>>()?;
    let expected = if layout == Layout::Array { 2 } else { 3 };
    if dims.len() != expected {
        return Err(err(size_line, format!("size line needs {expected} integers, found {}", dims.len())));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if symmetry != Symmetry::General && rows != cols {
        return Err(IoError::Dimension {
            path: path.to_string(),
            msg: format!("symmetric storage declared for a {rows}x{cols} matrix"),
        });
    }
    let mut data = vec![0.0; rows * cols];
    let mirror = |data: &mut [f64], i: usize, j: usize, v: f64| {
        data[j * rows + i] = v;
        match symmetry {
            Symmetry::Symmetric if i != j => data[i * rows + j] = v,
            Symmetry::SkewSymmetric if i != j => data[i * rows + j] = -v,
            _ => {}
        }
    };

    match layout {
        Layout::Array => {
            // Column-major; symmetric storage lists the lower triangle only.
            let slots: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| (0..rows).map(move |i| (i, j)))
                .filter(|&(i, j)| match symmetry {
                    Symmetry::General => true,
                    Symmetry::Symmetric => i >= j,
                    Symmetry::SkewSymmetric => i > j,
                })
                .collect();
            let mut seen = 0;
            let mut last_line = size_line;
            for (line, content) in body {
                for tok in content.split_whitespace() {
                    let v: f64 = parse_token(tok, line, path)?;
                    if seen == slots.len() {
                        return Err(IoError::Dimension {
                            path: path.to_string(),
                            msg: format!("line {line}: more than the {} values the header declares", slots.len()),
                        });
                    }
                    let (i, j) = slots[seen];
                    mirror(&mut data, i, j, v);
                    seen += 1;
                }
                last_line = line;
            }
            if seen != slots.len() {
                return Err(IoError::Dimension {
                    path: path.to_string(),
                    msg: format!(
                        "line {last_line}: header declares {} values, found {seen}",
                        slots.len()
                    ),
                });
            }
        }
        Layout::Coordinate => {
            let nnz = dims[2];
            let mut seen = 0;
            for (line, content) in body {
                let toks: Vec<&str> = content.split_whitespace().collect();
                if toks.len() != 3 {
                    return Err(err(line, format!("expected `row col value`, found `{content}`")));
                }
                let i: usize = parse_token(toks[0], line, path)?;
                let j: usize = parse_token(toks[1], line, path)?;
                let v: f64 = parse_token(toks[2], line, path)?;
                if i == 0 || i > rows || j == 0 || j > cols {
                    return Err(IoError::Dimension {
                        path: path.to_string(),
                        msg: format!("line {line}: entry ({i}, {j}) outside the declared {rows}x{cols}"),
                    });
                }
                if seen == nnz {
                    return Err(IoError::Dimension {
                        path: path.to_string(),
                        msg: format!("line {line}: more than the {nnz} entries the header declares"),
                    });
                }
                mirror(&mut data, i - 1, j - 1, v);
                seen += 1;
            }
            if seen != nnz {
                return Err(IoError::Dimension {
                    path: path.to_string(),
                    msg: format!("header declares {nnz} entries, found {seen}"),
                });
            }
        }
    }
    DenseMatrix::from_column_major(rows, cols, data).map_err(|e| IoError::Dimension {
        path: path.to_string(),
        msg: e.to_string(),
    })
}

fn parse_token<T: FromStr>(tok: &str, line: usize, path: &str) -> Result<T, IoError> {
    tok.parse().map_err(|_| IoError::Parse {
        path: path.to_string(),
        line,
        msg: format!("cannot parse `{tok}`"),
    })
}

fn parse_csv(text: &str, path: &str) -> Result<DenseMatrix, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            IoError::Parse {
                path: path.to_string(),
                line,
                msg: e.to_string(),
            }
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row = record
            .iter()
            .map(|t| parse_token(t, line, path))
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(IoError::Dimension {
            path: path.to_string(),
            msg: "no rows".into(),
        });
    }
    DenseMatrix::from_rows(&rows).map_err(|e| IoError::Dimension {
        path: path.to_string(),
        msg: e.to_string(),
    })
}
