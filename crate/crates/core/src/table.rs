//! Units × features table with optional (NA) cells, plus the feature CSV
//! format.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};

use crate::curve::{AlphaGrid, CurveFeatures};
use crate::error::{Error, Result};

/// Column-major numeric table. `None` marks NA.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub unit_ids: Vec<String>,
    pub names: Vec<String>,
    pub columns: Vec<Vec<Option<f64>>>,
}

impl FeatureTable {
    pub fn from_features(features: &[CurveFeatures], grid: &AlphaGrid) -> Self {
        let names = grid.feature_names();
        let mut columns = vec![Vec::with_capacity(features.len()); names.len()];
        for f in features {
            for (col, v) in columns.iter_mut().zip(f.numeric_values()) {
                col.push(v);
            }
        }
        FeatureTable {
            unit_ids: features.iter().map(|f| f.unit_id.clone()).collect(),
            names,
            columns,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.unit_ids.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&[Option<f64>]> {
        Ok(&self.columns[self.index_of(name)?])
    }

    /// Row-major values of the selected columns.
    pub fn rows(&self, names: &[String]) -> Result<Vec<Vec<Option<f64>>>> {
        let idx = names
            .iter()
            .map(|n| self.index_of(n))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..self.n_rows())
            .map(|r| idx.iter().map(|&c| self.columns[c][r]).collect())
            .collect())
    }

    /// Rows with no NA in the selected columns, as (row index, values).
    pub fn complete_rows(&self, names: &[String]) -> Result<Vec<(usize, Vec<f64>)>> {
        Ok(self
            .rows(names)?
            .into_iter()
            .enumerate()
            .filter_map(|(i, row)| {
                row.into_iter()
                    .collect::<Option<Vec<f64>>>()
                    .map(|v| (i, v))
            })
            .collect())
    }
}

const DATE_FMT: &str = "%Y-%m-%d";

fn fmt_opt_int(v: Option<i64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes one row per unit:
/// `unit_id,peakdate,peakvalue,peak,curvature,left..,right..`, NA as empty.
pub fn write_features_csv<W: Write>(
    writer: W,
    features: &[CurveFeatures],
    grid: &AlphaGrid,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["unit_id".to_string()];
    header.extend(grid.feature_names());
    w.write_record(&header)?;
    for f in features {
        let mut rec = vec![
            f.unit_id.clone(),
            f.peakdate.format(DATE_FMT).to_string(),
            f.peakvalue.to_string(),
            fmt_opt_int(f.peak_offset),
            fmt_opt_int(f.curvature),
        ];
        rec.extend(f.left.iter().map(|&v| fmt_opt_int(v)));
        rec.extend(f.right.iter().map(|&v| fmt_opt_int(v)));
        w.write_record(&rec)?;
    }
    w.flush()
}

/// Reads a feature CSV written by [`write_features_csv`], possibly with
/// extra appended columns. `peakdate` is read as its day number from
/// 0001-01-01, the same encoding used by [`FeatureTable::from_features`].
pub fn read_features_csv<R: Read>(reader: R, origin: &Path) -> Result<FeatureTable> {
    let perr = |row: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        row,
        message,
    };
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(|e| perr(1, e.to_string()))?.clone();
    if headers.get(0) != Some("unit_id") {
        return Err(perr(1, "first column must be unit_id".into()));
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut table = FeatureTable {
        unit_ids: Vec::new(),
        columns: vec![Vec::new(); names.len()],
        names,
    };
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| perr(row, e.to_string()))?;
        table.unit_ids.push(rec[0].to_string());
        for (c, name) in table.names.iter().enumerate() {
            let cell = rec[c + 1].trim();
            let v = if cell.is_empty() {
                None
            } else if name == "peakdate" {
                let d = NaiveDate::parse_from_str(cell, DATE_FMT)
                    .map_err(|e| perr(row, format!("peakdate \"{cell}\": {e}")))?;
                Some(d.num_days_from_ce() as f64)
            } else {
                Some(
                    cell.parse::<f64>()
                        .map_err(|e| perr(row, format!("{name} \"{cell}\": {e}")))?,
                )
            };
            table.columns[c].push(v);
        }
    }
    Ok(table)
}

pub fn read_features_file(path: &Path) -> Result<FeatureTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_features_csv(file, path)
}
