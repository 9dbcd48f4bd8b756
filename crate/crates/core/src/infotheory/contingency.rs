use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// r × c table of non-negative counts with at least one observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    counts: Vec<Vec<u64>>,
    total: u64,
}

/// Which variable is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// H(column variable | row variable).
    ColumnsGivenRows,
    /// H(row variable | column variable).
    RowsGivenColumns,
}

impl ContingencyTable {
    /// Table with labels `1..=r` and `1..=c`.
    pub fn new(counts: Vec<Vec<u64>>) -> Result<Self> {
        let r = counts.len();
        let c = counts.first().map_or(0, Vec::len);
        Self::with_labels(
            (1..=r).map(|i| i.to_string()).collect(),
            (1..=c).map(|i| i.to_string()).collect(),
            counts,
        )
    }

    pub fn with_labels(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        counts: Vec<Vec<u64>>,
    ) -> Result<Self> {
        if counts.len() != row_labels.len() {
            return Err(Error::LengthMismatch(counts.len(), row_labels.len()));
        }
        for row in &counts {
            if row.len() != col_labels.len() {
                return Err(Error::LengthMismatch(row.len(), col_labels.len()));
            }
        }
        let total = counts.iter().flatten().sum();
        if total == 0 {
            return Err(Error::ZeroCounts);
        }
        Ok(ContingencyTable {
            row_labels,
            col_labels,
            counts,
            total,
        })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn n_rows(&self) -> usize {
        self.counts.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.n_cols())
            .map(|c| self.counts.iter().map(|r| r[c]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let counts = (0..self.n_cols())
            .map(|c| self.counts.iter().map(|r| r[c]).collect())
            .collect();
        ContingencyTable {
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
            counts,
            total: self.total,
        }
    }
}

/// Cross-tabulates two categorical columns. Labels are the categories that
/// occur, ascending; the NA category 0 is kept as an ordinary label.
pub fn contingency(x: &[u8], y: &[u8]) -> Result<ContingencyTable> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(Error::ZeroCounts);
    }
    let xs: Vec<u8> = x
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let ys: Vec<u8> = y
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut counts = vec![vec![0u64; ys.len()]; xs.len()];
    for (a, b) in x.iter().zip(y) {
        let r = xs.binary_search(a).expect("label collected above");
        let c = ys.binary_search(b).expect("label collected above");
        counts[r][c] += 1;
    }
    ContingencyTable::with_labels(
        xs.iter().map(u8::to_string).collect(),
        ys.iter().map(u8::to_string).collect(),
        counts,
    )
}

/// Shannon entropy in bits of the empirical distribution; `0 log 0 = 0`.
pub fn entropy(counts: &[u64]) -> Result<f64> {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::ZeroCounts);
    }
    Ok(entropy_nonzero(counts.iter().copied(), n))
}

/// Entropy in bits of counts summing to `n > 0`, summed in slice order.
pub fn entropy_of_counts(counts: &[u64], n: u64) -> f64 {
    entropy_nonzero(counts.iter().copied(), n)
}

fn entropy_nonzero(counts: impl Iterator<Item = u64>, n: u64) -> f64 {
    let n = n as f64;
    let h: f64 = counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    // -0.0 for a single category
    h.max(0.0)
}

pub fn joint_entropy(t: &ContingencyTable) -> f64 {
    entropy_nonzero(t.counts.iter().flatten().copied(), t.total)
}

fn ce_columns_given_rows(counts: &[Vec<u64>], total: u64) -> f64 {
    counts
        .iter()
        .map(|row| {
            let nr: u64 = row.iter().sum();
            if nr == 0 {
                0.0
            } else {
                nr as f64 / total as f64 * entropy_nonzero(row.iter().copied(), nr)
            }
        })
        .sum()
}

/// Conditional entropy in bits: `sum_r (n_r / N) H(row r)` for
/// [`Direction::ColumnsGivenRows`], the transposed sum otherwise.
pub fn conditional_entropy(t: &ContingencyTable, direction: Direction) -> f64 {
    match direction {
        Direction::ColumnsGivenRows => ce_columns_given_rows(&t.counts, t.total),
        Direction::RowsGivenColumns => ce_columns_given_rows(&t.transpose().counts, t.total),
    }
}

fn target_entropy(t: &ContingencyTable, direction: Direction) -> f64 {
    match direction {
        Direction::ColumnsGivenRows => entropy_nonzero(t.col_sums().into_iter(), t.total),
        Direction::RowsGivenColumns => entropy_nonzero(t.row_sums().into_iter(), t.total),
    }
}

/// `H(target | condition) / H(target)`, in `[0, 1]`.
pub fn rescaled_ce(t: &ContingencyTable, direction: Direction) -> Result<f64> {
    let h = target_entropy(t, direction);
    if h <= 0.0 {
        let which = match direction {
            Direction::ColumnsGivenRows => "column margin",
            Direction::RowsGivenColumns => "row margin",
        };
        return Err(Error::DegenerateTarget(which.into()));
    }
    Ok(conditional_entropy(t, direction) / h)
}

/// Mean of the two directional re-scaled conditional entropies.
pub fn mutual_ce(t: &ContingencyTable) -> Result<f64> {
    let a = rescaled_ce(t, Direction::ColumnsGivenRows)?;
    let b = rescaled_ce(t, Direction::RowsGivenColumns)?;
    Ok((a + b) / 2.0)
}

/// `H(col) - H(col | row)` in bits.
pub fn mutual_information(t: &ContingencyTable) -> f64 {
    target_entropy(t, Direction::ColumnsGivenRows)
        - conditional_entropy(t, Direction::ColumnsGivenRows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OddsRatio {
    pub odds_row1: f64,
    pub odds_row2: f64,
    pub ratio: f64,
}

/// Odds `counts[i][1] / counts[i][0]` for both rows of a 2 × 2 table and
/// their ratio.
pub fn odds_ratio(t: &ContingencyTable) -> Result<OddsRatio> {
    if t.n_rows() != 2 || t.n_cols() != 2 {
        return Err(Error::InvalidArgument(format!(
            "odds ratio needs a 2x2 table, got {}x{}",
            t.n_rows(),
            t.n_cols()
        )));
    }
    let c = &t.counts;
    for (row, counts) in c.iter().enumerate() {
        if counts[0] == 0 {
            return Err(Error::ZeroDenominator { row });
        }
    }
    let odds_row1 = c[0][1] as f64 / c[0][0] as f64;
    let odds_row2 = c[1][1] as f64 / c[1][0] as f64;
    if odds_row2 == 0.0 {
        return Err(Error::ZeroDenominator { row: 1 });
    }
    Ok(OddsRatio {
        odds_row1,
        odds_row2,
        ratio: odds_row1 / odds_row2,
    })
}
