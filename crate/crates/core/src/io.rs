//! JSON state files.
//!
//! ```json
//! {"dims": [2, 2], "matrix": [[[0.25, 0.0], ...], ...]}
//! {"dims": [2, 2], "vector": [[0.7071067811865476, 0.0], ...]}
//! ```
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major. `dims`
//! is `[dA, dB]` for a bipartite state or `[d]` for a single system.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decomposition::eigen_ensemble;
use crate::error::Error;
use crate::linalg::{CMatrix, CVector};
use crate::state::{density_from_pure, BipartiteSplit, PureState, QuantumState};
use crate::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: parse error: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{}: invalid state: {source}", path.display())]
    Validation {
        path: PathBuf,
        #[source]
        source: Error,
    },
}

impl FileError {
    fn parse(path: &Path, message: impl Into<String>) -> Self {
        FileError::Parse {
            path: path.to_owned(),
            message: message.into(),
        }
    }

    fn validation(path: &Path, source: Error) -> Self {
        FileError::Validation {
            path: path.to_owned(),
            source,
        }
    }
}

/// On-disk representation; exactly one of `matrix` or `vector` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<[f64; 2]>>,
}

fn pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(p: &[f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn dims_of(split: Option<BipartiteSplit>, d: usize) -> Vec<usize> {
    match split {
        Some(s) => vec![s.dim_a(), s.dim_b()],
        None => vec![d],
    }
}

impl StateFile {
    pub fn from_state(state: &QuantumState) -> Self {
        let m = state.matrix();
        let matrix = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| pair(&m[(i, j)])).collect())
            .collect();
        Self {
            dims: dims_of(state.split(), state.dim()),
            matrix: Some(matrix),
            vector: None,
        }
    }

    pub fn from_pure(psi: &PureState, split: Option<BipartiteSplit>) -> Self {
        let vector = psi.amplitudes().iter().map(pair).collect();
        Self {
            dims: dims_of(split, psi.dim()),
            matrix: None,
            vector: Some(vector),
        }
    }

    fn split(&self) -> Result<Option<BipartiteSplit>, String> {
        match self.dims.as_slice() {
            [d] if *d > 0 => Ok(None),
            [a, b] => BipartiteSplit::new(*a, *b)
                .map(Some)
                .map_err(|e| e.to_string()),
            other => Err(format!("dims must be [d] or [dA, dB], got {other:?}")),
        }
    }

    fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    fn matrix_entries(&self, rows: &[Vec<[f64; 2]>]) -> Result<CMatrix, String> {
        let d = rows.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != d) {
            return Err(format!(
                "row {bad} has {} entries, expected {d}",
                rows[bad].len()
            ));
        }
        Ok(CMatrix::from_fn(d, d, |i, j| complex(&rows[i][j])))
    }
}

/// Reads a state file. Vector files yield the corresponding pure density.
pub fn load_state(path: impl AsRef<Path>) -> Result<QuantumState, FileError> {
    let path = path.as_ref();
    let file = read(path)?;
    let split = file.split().map_err(|m| FileError::parse(path, m))?;
    let state = match (&file.matrix, &file.vector) {
        (Some(rows), None) => {
            let m = file
                .matrix_entries(rows)
                .map_err(|e| FileError::parse(path, e))?;
            QuantumState::new(m).map_err(|e| FileError::validation(path, e))?
        }
        (None, Some(_)) => density_from_pure(&pure_from_file(path, &file)?),
        _ => {
            return Err(FileError::parse(
                path,
                "exactly one of \"matrix\" or \"vector\" is required",
            ))
        }
    };
    if state.dim() != file.total_dim() {
        return Err(FileError::validation(
            path,
            Error::DimensionMismatch {
                expected: file.total_dim(),
                found: state.dim(),
            },
        ));
    }
    match split {
        Some(s) => state
            .with_split(s)
            .map_err(|e| FileError::validation(path, e)),
        None => Ok(state),
    }
}

/// Reads a pure state: a `vector` file, or a `matrix` file of rank one.
pub fn load_pure(path: impl AsRef<Path>) -> Result<(PureState, Option<BipartiteSplit>), FileError> {
    let path = path.as_ref();
    let file = read(path)?;
    let split = file.split().map_err(|m| FileError::parse(path, m))?;
    let psi = if file.vector.is_some() && file.matrix.is_none() {
        pure_from_file(path, &file)?
    } else {
        let state = load_state(path)?;
        let rank = state.rank().map_err(|e| FileError::validation(path, e))?;
        if rank != 1 {
            return Err(FileError::parse(
                path,
                format!("expected a pure state, matrix has rank {rank}"),
            ));
        }
        let dec = eigen_ensemble(&state).map_err(|e| FileError::validation(path, e))?;
        dec.states()[0].clone()
    };
    if psi.dim() != file.total_dim() {
        return Err(FileError::validation(
            path,
            Error::DimensionMismatch {
                expected: file.total_dim(),
                found: psi.dim(),
            },
        ));
    }
    Ok((psi, split))
}

fn pure_from_file(path: &Path, file: &StateFile) -> Result<PureState, FileError> {
    let v = file.vector.as_ref().expect("vector present");
    PureState::new(CVector::from_iterator(v.len(), v.iter().map(complex)))
        .map_err(|e| FileError::validation(path, e))
}

fn read(path: &Path) -> Result<StateFile, FileError> {
    let text = fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| FileError::parse(path, e.to_string()))
}

fn write(path: &Path, file: &StateFile) -> Result<(), FileError> {
    let text = serde_json::to_string(file).map_err(|e| FileError::parse(path, e.to_string()))?;
    fs::write(path, text).map_err(|source| FileError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn save_state(state: &QuantumState, path: impl AsRef<Path>) -> Result<(), FileError> {
    write(path.as_ref(), &StateFile::from_state(state))
}

pub fn save_pure(
    psi: &PureState,
    split: Option<BipartiteSplit>,
    path: impl AsRef<Path>,
) -> Result<(), FileError> {
    write(path.as_ref(), &StateFile::from_pure(psi, split))
}
