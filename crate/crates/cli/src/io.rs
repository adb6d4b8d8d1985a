//! JSON file formats.
//!
//! A matrix is a row-major array of `[re, im]` pairs. Operators are
//! `{"n", "l", "a": [matrix…], "b": [matrix…]}`, single square matrices are
//! `{"dim", "entries"}` and vector families are `{"dim", "vectors": [vector…]}`.

use std::fmt;
use std::path::Path;

use elemnorm_core::hermitian::{c, CMat, CVec};
use elemnorm_core::ElementaryOperator;
use serde::{Deserialize, Serialize};

pub type Entry = [f64; 2];

#[derive(Debug)]
pub enum InputError {
    Io {
        path: String,
        source: std::io::Error,
    },
    Json {
        path: String,
        source: serde_json::Error,
    },
    Shape {
        path: String,
        message: String,
    },
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::Io { path, source } => write!(f, "{path}: {source}"),
            InputError::Json { path, source } => {
                write!(f, "{path}:{}:{}: {source}", source.line(), source.column())
            }
            InputError::Shape { path, message } => write!(f, "{path}: {message}"),
        }
    }
}

impl std::error::Error for InputError {}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorFile {
    pub n: usize,
    pub l: usize,
    pub a: Vec<Vec<Entry>>,
    pub b: Vec<Vec<Entry>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorsFile {
    pub dim: usize,
    pub vectors: Vec<Vec<Entry>>,
}

fn read<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, InputError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| InputError::Io {
        path: name.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| InputError::Json { path: name, source })
}

fn shape(path: &Path, message: impl Into<String>) -> InputError {
    InputError::Shape {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn square_from_entries(
    path: &Path,
    n: usize,
    entries: &[Entry],
    what: &str,
) -> Result<CMat, InputError> {
    if entries.len() != n * n {
        return Err(shape(
            path,
            format!("{what} has {} entries, expected {}", entries.len(), n * n),
        ));
    }
    Ok(CMat::from_row_iterator(
        n,
        n,
        entries.iter().map(|[re, im]| c(*re, *im)),
    ))
}

pub fn entries_of(m: &CMat) -> Vec<Entry> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            out.push([z.re, z.im]);
        }
    }
    out
}

pub fn vector_entries(v: &CVec) -> Vec<Entry> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn read_operator(path: &Path) -> Result<ElementaryOperator, InputError> {
    let file: OperatorFile = read(path)?;
    operator_from_file(path, &file)
}

pub fn operator_from_file(
    path: &Path,
    file: &OperatorFile,
) -> Result<ElementaryOperator, InputError> {
    if file.n == 0 || file.l == 0 {
        return Err(shape(path, "n and l must be positive"));
    }
    if file.a.len() != file.l || file.b.len() != file.l {
        return Err(shape(
            path,
            format!(
                "expected l = {} matrices in a and b, found {} and {}",
                file.l,
                file.a.len(),
                file.b.len()
            ),
        ));
    }
    let parse = |side: &str, list: &[Vec<Entry>]| {
        list.iter()
            .enumerate()
            .map(|(j, e)| square_from_entries(path, file.n, e, &format!("{side}[{j}]")))
            .collect::<Result<Vec<_>, _>>()
    };
    let a = parse("a", &file.a)?;
    let b = parse("b", &file.b)?;
    ElementaryOperator::new(a, b).map_err(|e| shape(path, e.to_string()))
}

pub fn operator_to_file(t: &ElementaryOperator) -> OperatorFile {
    OperatorFile {
        n: t.dim(),
        l: t.len(),
        a: t.a().matrices().iter().map(entries_of).collect(),
        b: t.b().matrices().iter().map(entries_of).collect(),
    }
}

pub fn read_matrix(path: &Path) -> Result<CMat, InputError> {
    let file: MatrixFile = read(path)?;
    if file.dim == 0 {
        return Err(shape(path, "dim must be positive"));
    }
    square_from_entries(path, file.dim, &file.entries, "entries")
}

pub fn matrix_to_file(m: &CMat) -> MatrixFile {
    MatrixFile {
        dim: m.nrows(),
        entries: entries_of(m),
    }
}

/// Vectors as the columns of a `dim × count` matrix.
pub fn read_vectors(path: &Path) -> Result<CMat, InputError> {
    let file: VectorsFile = read(path)?;
    if file.dim == 0 || file.vectors.is_empty() {
        return Err(shape(
            path,
            "dim and the number of vectors must be positive",
        ));
    }
    let mut m = CMat::zeros(file.dim, file.vectors.len());
    for (j, v) in file.vectors.iter().enumerate() {
        if v.len() != file.dim {
            return Err(shape(
                path,
                format!(
                    "vectors[{j}] has {} entries, expected {}",
                    v.len(),
                    file.dim
                ),
            ));
        }
        for (i, [re, im]) in v.iter().enumerate() {
            m[(i, j)] = c(*re, *im);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn operator_round_trip() {
        let t = ElementaryOperator::transpose(2);
        let text = serde_json::to_string(&operator_to_file(&t)).unwrap();
        let f = temp(&text);
        let back = read_operator(f.path()).unwrap();
        assert_eq!(back.a().matrices(), t.a().matrices());
        assert_eq!(back.b().matrices(), t.b().matrices());
    }

    #[test]
    fn matrix_is_row_major() {
        let f = temp(r#"{"dim": 2, "entries": [[1,0],[2,0],[3,0],[4,1]]}"#);
        let m = read_matrix(f.path()).unwrap();
        assert_eq!(m[(0, 1)], c(2.0, 0.0));
        assert_eq!(m[(1, 0)], c(3.0, 0.0));
        assert_eq!(m[(1, 1)], c(4.0, 1.0));
    }

    #[test]
    fn json_errors_carry_position() {
        let f = temp("{\"dim\": 2,\n \"entries\": [[1,0],]\n}");
        let err = read_matrix(f.path()).unwrap_err().to_string();
        assert!(err.contains(":2:"), "{err}");
    }

    #[test]
    fn shape_errors() {
        let f = temp(r#"{"dim": 2, "entries": [[1,0]]}"#);
        assert!(matches!(
            read_matrix(f.path()),
            Err(InputError::Shape { .. })
        ));
        let f = temp(r#"{"n": 1, "l": 2, "a": [[[1,0]]], "b": [[[1,0]]]}"#);
        assert!(matches!(
            read_operator(f.path()),
            Err(InputError::Shape { .. })
        ));
        let f = temp(r#"{"dim": 2, "vectors": [[[1,0]]]}"#);
        assert!(matches!(
            read_vectors(f.path()),
            Err(InputError::Shape { .. })
        ));
    }
}
