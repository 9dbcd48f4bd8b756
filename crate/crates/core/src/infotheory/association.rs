use rayon::prelude::*;

use super::contingency::{contingency, rescaled_ce, Direction};
use super::discretize::CategoricalMatrix;
use crate::error::{Error, Result};

/// Pairwise re-scaled conditional entropies between feature columns.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMatrices {
    pub names: Vec<String>,
    /// `directed[i][j] = H(X_j | X_i) / H(X_j)`; zero diagonal.
    pub directed: Vec<Vec<f64>>,
    /// `(directed[i][j] + directed[j][i]) / 2`.
    pub mutual: Vec<Vec<f64>>,
}

pub fn association_matrices(m: &CategoricalMatrix) -> Result<AssociationMatrices> {
    let k = m.columns.len();
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 feature columns, got {k}"
        )));
    }
    // Report a degenerate column by name before doing the pairwise work.
    for (name, col) in m.feature_names.iter().zip(&m.columns) {
        if col.iter().all(|&c| c == col[0]) {
            return Err(Error::DegenerateTarget(name.clone()));
        }
    }
    let directed: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        return Ok(0.0);
                    }
                    let t = contingency(&m.columns[i], &m.columns[j])?;
                    rescaled_ce(&t, Direction::ColumnsGivenRows)
                        .map_err(|_| Error::DegenerateTarget(m.feature_names[j].clone()))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mutual = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| (directed[i][j] + directed[j][i]) / 2.0)
                .collect()
        })
        .collect();
    Ok(AssociationMatrices {
        names: m.feature_names.clone(),
        directed,
        mutual,
    })
}

/// Square matrix as CSV with feature-name headers, 6 decimals.
pub fn matrix_csv(names: &[String], matrix: &[Vec<f64>]) -> String {
    let mut out = String::from("feature");
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for (name, row) in names.iter().zip(matrix) {
        out.push_str(name);
        for v in row {
            out.push_str(&format!(",{v:.6}"));
        }
        out.push('\n');
    }
    out
}
