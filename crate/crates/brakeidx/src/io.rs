//! JSON input formats for paths and matrices.
//!
//! A path is given by its coefficient samples
//! `{"n": 1, "grid": [0, 1], "B": [[[1,0],[0,1]], [[1,0],[0,1]]]}`, by a constant
//! coefficient `{"n": 1, "tau": 2, "B": [[1,0],[0,1]]}`, or directly by
//! symplectic samples `{"n": 1, "grid": [...], "samples": [...]}`.

use crate::error::{Error, Result};
use crate::path::{fundamental_solution_auto, CoefficientPath, SymplecticPath};
use crate::symplectic::{Mat, MatrixLiteral};
use serde::{Deserialize, Serialize};

type Rows = Vec<Vec<f64>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PathInput {
    Coefficient {
        n: usize,
        grid: Vec<f64>,
        #[serde(rename = "B")]
        b: Vec<Rows>,
    },
    Constant {
        n: usize,
        tau: f64,
        #[serde(rename = "B")]
        b: Rows,
    },
    Samples {
        n: usize,
        grid: Vec<f64>,
        samples: Vec<Rows>,
    },
}

fn to_matrix(n: usize, rows: &Rows) -> Result<Mat> {
    MatrixLiteral { n, rows: rows.clone() }.to_matrix()
}

fn to_rows(m: &Mat) -> Rows {
    MatrixLiteral::from_matrix(m).rows
}

/// A parsed path together with its generator when one was given.
#[derive(Clone, Debug)]
pub struct LoadedPath {
    pub coefficient: Option<CoefficientPath>,
    pub path: SymplecticPath,
}

impl LoadedPath {
    pub fn coefficient(&self) -> Result<&CoefficientPath> {
        self.coefficient
            .as_ref()
            .ok_or_else(|| Error::Validation("this operation needs a coefficient path, not bare samples".into()))
    }
}

impl PathInput {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("path JSON: {e}")))
    }

    pub fn coefficient_path(&self) -> Result<Option<CoefficientPath>> {
        match self {
            PathInput::Coefficient { n, grid, b } => {
                let values = b.iter().map(|r| to_matrix(*n, r)).collect::<Result<Vec<_>>>()?;
                Ok(Some(CoefficientPath::new(grid.clone(), values)?))
            }
            PathInput::Constant { n, tau, b } => Ok(Some(CoefficientPath::constant(to_matrix(*n, b)?, *tau)?)),
            PathInput::Samples { .. } => Ok(None),
        }
    }

    pub fn load(&self) -> Result<LoadedPath> {
        match self {
            PathInput::Samples { n, grid, samples } => {
                let s = samples.iter().map(|r| to_matrix(*n, r)).collect::<Result<Vec<_>>>()?;
                Ok(LoadedPath { coefficient: None, path: SymplecticPath::from_samples(grid.clone(), s, None)? })
            }
            _ => {
                let b = self.coefficient_path()?.expect("coefficient input");
                let path = fundamental_solution_auto(&b)?;
                Ok(LoadedPath { coefficient: Some(b), path })
            }
        }
    }

    pub fn from_coefficient(b: &CoefficientPath) -> Self {
        PathInput::Coefficient { n: b.n(), grid: b.grid().to_vec(), b: b.values().iter().map(to_rows).collect() }
    }

    pub fn from_samples(p: &SymplecticPath) -> Self {
        PathInput::Samples { n: p.n(), grid: p.grid().to_vec(), samples: p.samples().iter().map(to_rows).collect() }
    }
}

/// A 2n×2n matrix as `{"n": .., "rows": [[..]]}` or a bare array of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixInput {
    Literal(MatrixLiteral),
    Rows(Rows),
}

impl MatrixInput {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("matrix JSON: {e}")))
    }

    pub fn to_matrix(&self) -> Result<Mat> {
        match self {
            MatrixInput::Literal(l) => l.to_matrix(),
            MatrixInput::Rows(rows) => {
                if rows.len() % 2 == 1 || rows.is_empty() {
                    return Err(Error::Dimension("matrix must have an even, nonzero size".into()));
                }
                to_matrix(rows.len() / 2, rows)
            }
        }
    }
}
