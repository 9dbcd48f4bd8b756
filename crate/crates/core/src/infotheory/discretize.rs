use std::fmt;

use crate::error::{Error, Result};
use crate::stats::percentile_sorted;
use crate::table::FeatureTable;

/// Category code for missing values.
pub const NA_CATEGORY: u8 = 0;

#[derive(Debug, Clone, PartialEq)]
pub enum BinWarning {
    /// Fewer distinct values than bins; one bin per distinct value was used.
    FewDistinct { distinct: usize, n_bins: usize },
    /// A single distinct value.
    Degenerate,
}

impl fmt::Display for BinWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BinWarning::FewDistinct { distinct, n_bins } => {
                write!(
                    f,
                    "only {distinct} distinct values for {n_bins} bins; using distinct-value bins"
                )
            }
            BinWarning::Degenerate => f.write_str("degenerate column (single distinct value)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Binned {
    pub categories: Vec<u8>,
    /// Interior cut points; a value `v` falls in category `1 + #{e : e <= v}`.
    pub edges: Vec<f64>,
    pub warning: Option<BinWarning>,
}

/// Maps values onto categories using left-closed bins between `edges`;
/// NA becomes [`NA_CATEGORY`].
pub fn apply_edges(values: &[Option<f64>], edges: &[f64]) -> Vec<u8> {
    values
        .iter()
        .map(|v| match v {
            None => NA_CATEGORY,
            Some(x) => 1 + edges.iter().filter(|&&e| e <= *x).count() as u8,
        })
        .collect()
}

/// Sample-quantile binning: with `n_bins = 4` the edges are the 25th, 50th
/// and 75th percentiles (linear interpolation) of the non-NA values.
pub fn discretize(values: &[Option<f64>], n_bins: usize) -> Result<Binned> {
    if !(1..=254).contains(&n_bins) {
        return Err(Error::InvalidArgument(format!(
            "n_bins {n_bins} outside 1..=254"
        )));
    }
    let mut present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(Error::EmptyColumn);
    }
    if present.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in column".into()));
    }
    present.sort_by(f64::total_cmp);
    let mut distinct = present.clone();
    distinct.dedup();

    let (edges, warning) = if distinct.len() < n_bins {
        let warning = if distinct.len() == 1 {
            BinWarning::Degenerate
        } else {
            BinWarning::FewDistinct {
                distinct: distinct.len(),
                n_bins,
            }
        };
        (distinct[1..].to_vec(), Some(warning))
    } else {
        let edges = (1..n_bins)
            .map(|i| percentile_sorted(&present, i as f64 / n_bins as f64))
            .collect();
        (edges, None)
    };
    Ok(Binned {
        categories: apply_edges(values, &edges),
        edges,
        warning,
    })
}

/// Categorical version of a feature table. Column `edges` are empty for
/// columns that were categorical already.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalMatrix {
    pub unit_ids: Vec<String>,
    pub feature_names: Vec<String>,
    pub columns: Vec<Vec<u8>>,
    pub edges: Vec<Vec<f64>>,
}

impl CategoricalMatrix {
    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.feature_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&[u8]> {
        Ok(&self.columns[self.index_of(name)?])
    }

    /// Adds an already-categorical column (no bin edges).
    pub fn push_categorical(&mut self, name: &str, categories: Vec<u8>) -> Result<()> {
        if categories.len() != self.unit_ids.len() {
            return Err(Error::LengthMismatch(categories.len(), self.unit_ids.len()));
        }
        self.feature_names.push(name.to_string());
        self.columns.push(categories);
        self.edges.push(Vec::new());
        Ok(())
    }
}

/// Discretizes every column of `table`. Warnings are returned per column name.
pub fn discretize_table(
    table: &FeatureTable,
    n_bins: usize,
) -> Result<(CategoricalMatrix, Vec<(String, BinWarning)>)> {
    let mut columns = Vec::with_capacity(table.names.len());
    let mut edges = Vec::with_capacity(table.names.len());
    let mut warnings = Vec::new();
    for (name, col) in table.names.iter().zip(&table.columns) {
        let binned = discretize(col, n_bins).map_err(|e| e.in_stage("discretize", name.clone()))?;
        if let Some(w) = binned.warning {
            warnings.push((name.clone(), w));
        }
        columns.push(binned.categories);
        edges.push(binned.edges);
    }
    Ok((
        CategoricalMatrix {
            unit_ids: table.unit_ids.clone(),
            feature_names: table.names.clone(),
            columns,
            edges,
        },
        warnings,
    ))
}
