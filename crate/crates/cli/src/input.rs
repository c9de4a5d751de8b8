//! Reading channel and covariance files.

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use tin_core::channel::{matrix_from_rows, MatrixChannelSpec, VectorChannelSpec};
use tin_core::{ChannelInput, ChannelSpec, CovariancePair, SymMatrix};

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or inconsistent input; exit status 2.
    #[error("{0}")]
    Input(String),
    /// The computation itself failed; exit status 1.
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

impl From<tin_core::Error> for CliError {
    fn from(e: tin_core::Error) -> Self {
        match e {
            tin_core::Error::InvalidInput(_) => CliError::Input(e.to_string()),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Input(format!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn field_error(path: &Path, e: serde_json::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

/// Matrix form when `H11` is present, vector form otherwise.
pub fn load_channel(path: &Path) -> Result<ChannelInput, CliError> {
    let v = read_json(path)?;
    let spec = if v.get("H11").is_some() {
        ChannelSpec::Matrices(MatrixChannelSpec::deserialize(&v).map_err(|e| field_error(path, e))?)
    } else {
        ChannelSpec::Vector(VectorChannelSpec::deserialize(&v).map_err(|e| field_error(path, e))?)
    };
    Ok(spec.into_input()?)
}

#[derive(Deserialize)]
struct CovSpec {
    #[serde(rename = "Q1")]
    q1: Vec<Vec<f64>>,
    #[serde(rename = "Q2")]
    q2: Vec<Vec<f64>>,
}

/// `{Q1, Q2}` at the top level or under `q_star`.
pub fn load_covariances(path: &Path) -> Result<CovariancePair, CliError> {
    let v = read_json(path)?;
    let inner = v.get("q_star").unwrap_or(&v);
    let spec = CovSpec::deserialize(inner).map_err(|e| field_error(path, e))?;
    let sym = |name: &str, rows: &[Vec<f64>]| -> Result<SymMatrix, CliError> {
        let m = matrix_from_rows(name, rows)?;
        if m.nrows() != m.ncols() {
            return Err(CliError::Input(format!("{name} must be square, got {}x{}", m.nrows(), m.ncols())));
        }
        if (&m - m.transpose()).amax() > 1e-9 * m.amax().max(1.0) {
            return Err(CliError::Input(format!("{name} is not symmetric")));
        }
        Ok(SymMatrix::from_upper(m)?)
    };
    Ok(CovariancePair::new(sym("Q1", &spec.q1)?, sym("Q2", &spec.q2)?))
}
