//! Major-factor selection for a categorical response.
//!
//! Feature sets are ranked by the conditional entropy `H(Y|F)` they leave in
//! the response. The successive drop
//! `SCE-drop(F) = min_{X in F} H(Y | F \ X) - H(Y | F)` measures what the
//! weakest member adds on top of the others, and is judged against a
//! permutation null of the same quantity. A pair whose SCE-drop beats both
//! its members' individual drops and the null is an order-2 interaction.

mod null;
mod report;

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infotheory::entropy_of_counts;
use crate::stats::derive_seed;

pub use null::{noise_threshold, NullDropStats, DEFAULT_REPLICATES};
pub use report::{
    factor_report, read_scan_csv, write_scan_csv, FactorReport, ReportRow, ScanRecord,
};

/// Largest feature-set size a scan will enumerate.
pub const MAX_SCAN_ORDER: usize = 3;
/// Most columns `joint_conditional_entropy` can key on at once.
pub const MAX_JOINT_COLUMNS: usize = 7;
/// Slack when comparing entropy drops that are equal in exact arithmetic.
const DROP_TOLERANCE: f64 = 1e-9;

/// `H(Y | F)` in bits, where the conditioning rows are the distinct observed
/// category tuples of the columns in `features`. An empty `features` list
/// gives `H(Y)`.
///
/// Group contributions are summed in sorted order, so the value is
/// bit-for-bit invariant under relabeling or reordering of categories.
pub fn joint_conditional_entropy(y: &[u8], features: &[&[u8]]) -> Result<f64> {
    let n = y.len();
    if n == 0 {
        return Err(Error::EmptyColumn);
    }
    if features.len() > MAX_JOINT_COLUMNS {
        return Err(Error::InvalidArgument(format!(
            "at most {MAX_JOINT_COLUMNS} conditioning columns, got {}",
            features.len()
        )));
    }
    for f in features {
        if f.len() != n {
            return Err(Error::LengthMismatch(f.len(), n));
        }
    }
    let mut keyed: Vec<(u64, u8)> = (0..n)
        .map(|r| {
            let key = features
                .iter()
                .fold(0u64, |k, f| (k << 8) | u64::from(f[r]));
            (key, y[r])
        })
        .collect();
    keyed.sort_unstable();

    let mut terms = Vec::new();
    let mut counts = Vec::new();
    let mut i = 0;
    while i < n {
        let key = keyed[i].0;
        counts.clear();
        let mut group = 0u64;
        while i < n && keyed[i].0 == key {
            let label = keyed[i].1;
            let mut c = 0u64;
            while i < n && keyed[i] == (key, label) {
                c += 1;
                i += 1;
            }
            counts.push(c);
            group += c;
        }
        counts.sort_unstable();
        terms.push(group as f64 / n as f64 * entropy_of_counts(&counts, group));
    }
    terms.sort_by(f64::total_cmp);
    Ok(terms.iter().sum())
}

/// A named categorical covariate.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a> {
    pub name: &'a str,
    pub values: &'a [u8],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanOptions {
    pub replicates: usize,
    pub seed: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            replicates: DEFAULT_REPLICATES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    /// A single feature whose drop beats the noise threshold.
    Order1,
    /// Two features that are each significant on their own and whose joint
    /// drop is at most additive.
    Order1Pair,
    /// Pair whose successive drop beats both members' own drops and the null.
    Order2Interaction,
    /// Three-feature set whose successive drop beats every sub-pair's and the null.
    HigherOrder,
    /// The weakest member adds no more than noise.
    Redundant,
    Insignificant,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Order1 => "order1",
            Classification::Order1Pair => "order1-pair",
            Classification::Order2Interaction => "order2-interaction",
            Classification::HigherOrder => "higher-order",
            Classification::Redundant => "redundant",
            Classification::Insignificant => "insignificant",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Classification {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [
            Classification::Order1,
            Classification::Order1Pair,
            Classification::Order2Interaction,
            Classification::HigherOrder,
            Classification::Redundant,
            Classification::Insignificant,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
        .ok_or_else(|| format!("unknown classification \"{s}\""))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSetResult {
    /// Member names, ascending.
    pub features: Vec<String>,
    /// `H(Y|F)` in bits.
    pub ce: f64,
    /// `H(Y|F) / H(Y)`.
    pub rescaled_ce: f64,
    /// `H(Y) - H(Y|F)`.
    pub ce_drop: f64,
    pub sce_drop: f64,
    /// Null of the weakest member's increment.
    pub null: NullDropStats,
    pub significant: bool,
    pub classification: Classification,
}

impl FeatureSetResult {
    pub fn label(&self) -> String {
        self.features.join("_")
    }

    pub fn response_entropy(&self) -> f64 {
        self.ce + self.ce_drop
    }
}

/// Increment of each member over the rest of the set, with its null.
struct MemberIncrement {
    increment: f64,
    null: NullDropStats,
}

struct SetEvaluation {
    names: Vec<String>,
    ce: f64,
    members: Vec<MemberIncrement>,
    weakest: usize,
}

fn evaluate_set(y: &[u8], members: &[Candidate<'_>], opts: ScanOptions) -> Result<SetEvaluation> {
    let cols: Vec<&[u8]> = members.iter().map(|c| c.values).collect();
    let names: Vec<String> = members.iter().map(|c| c.name.to_string()).collect();
    let ce = joint_conditional_entropy(y, &cols)?;
    let mut incs = Vec::with_capacity(members.len());
    for i in 0..members.len() {
        let rest: Vec<&[u8]> = cols
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, c)| *c)
            .collect();
        let mut labels: Vec<&str> = names
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, n)| n.as_str())
            .collect();
        labels.push("+");
        labels.push(&names[i]);
        let without = joint_conditional_entropy(y, &rest)?;
        let null = noise_threshold(
            y,
            &rest,
            cols[i],
            opts.replicates,
            derive_seed(opts.seed, &labels),
        )?;
        incs.push(MemberIncrement {
            increment: without - ce,
            null,
        });
    }
    // first member (by name) wins ties
    let weakest = (0..incs.len())
        .min_by(|&a, &b| incs[a].increment.total_cmp(&incs[b].increment))
        .expect("non-empty set");
    Ok(SetEvaluation {
        names,
        ce,
        members: incs,
        weakest,
    })
}

fn to_result(
    eval: SetEvaluation,
    h_y: f64,
    classification: impl FnOnce(&FeatureSetResult) -> Classification,
) -> FeatureSetResult {
    let weakest = &eval.members[eval.weakest];
    let sce_drop = weakest.increment;
    let mut r = FeatureSetResult {
        features: eval.names,
        ce: eval.ce,
        rescaled_ce: eval.ce / h_y,
        ce_drop: h_y - eval.ce,
        sce_drop,
        null: weakest.null.clone(),
        significant: sce_drop > weakest.null.q95,
        classification: Classification::Insignificant,
    };
    r.classification = classification(&r);
    r
}

fn sorted_candidates<'a>(y: &[u8], candidates: &[Candidate<'a>]) -> Result<Vec<Candidate<'a>>> {
    let mut sorted = candidates.to_vec();
    sorted.sort_by(|a, b| a.name.cmp(b.name));
    for w in sorted.windows(2) {
        if w[0].name == w[1].name {
            return Err(Error::InvalidArgument(format!(
                "duplicate candidate \"{}\"",
                w[0].name
            )));
        }
    }
    for c in &sorted {
        if c.values.len() != y.len() {
            return Err(Error::LengthMismatch(c.values.len(), y.len()));
        }
    }
    Ok(sorted)
}

fn response_entropy(y: &[u8]) -> Result<f64> {
    let h = joint_conditional_entropy(y, &[])?;
    if h <= 0.0 {
        return Err(Error::DegenerateTarget("response".into()));
    }
    Ok(h)
}

fn rank(results: &mut [FeatureSetResult]) {
    results.sort_by(|a, b| {
        a.ce.total_cmp(&b.ce)
            .then_with(|| a.features.cmp(&b.features))
    });
}

/// One result per candidate, ascending by CE (ties by name).
pub fn scan_order1(
    y: &[u8],
    candidates: &[Candidate<'_>],
    opts: ScanOptions,
) -> Result<Vec<FeatureSetResult>> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidates".into()));
    }
    let h_y = response_entropy(y)?;
    let sorted = sorted_candidates(y, candidates)?;
    let mut results = sorted
        .par_iter()
        .map(|c| {
            let eval = evaluate_set(y, std::slice::from_ref(c), opts)?;
            Ok(to_result(eval, h_y, |r| {
                if r.significant {
                    Classification::Order1
                } else {
                    Classification::Insignificant
                }
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    rank(&mut results);
    Ok(results)
}

/// Decides the kind of effect a pair shows.
///
/// `null_i` is the null for adding `X_i` to `{X_j}` and `null_j` the null
/// for adding `X_j` to `{X_i}`. The member with the smaller increment sets
/// the SCE-drop, and its null is the threshold.
pub fn classify_pair(
    pair: &FeatureSetResult,
    single_i: &FeatureSetResult,
    single_j: &FeatureSetResult,
    null_i: &NullDropStats,
    null_j: &NullDropStats,
) -> Classification {
    let increment_i = single_j.ce - pair.ce;
    let increment_j = single_i.ce - pair.ce;
    let threshold = if increment_i <= increment_j {
        null_i.q95
    } else {
        null_j.q95
    };
    let rival = single_i.sce_drop.min(single_j.sce_drop);
    if pair.sce_drop > rival + DROP_TOLERANCE && pair.sce_drop > threshold {
        Classification::Order2Interaction
    } else if pair.sce_drop <= threshold {
        Classification::Redundant
    } else if single_i.significant && single_j.significant {
        Classification::Order1Pair
    } else {
        Classification::Insignificant
    }
}

/// One result per unordered pair, ascending by CE (ties by names).
pub fn scan_order2(
    y: &[u8],
    candidates: &[Candidate<'_>],
    opts: ScanOptions,
) -> Result<Vec<FeatureSetResult>> {
    if candidates.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 candidates".into()));
    }
    let singles = scan_order1(y, candidates, opts)?;
    let single = |name: &str| {
        singles
            .iter()
            .find(|r| r.features[0] == name)
            .expect("scanned above")
    };
    let h_y = response_entropy(y)?;
    let sorted = sorted_candidates(y, candidates)?;
    let pairs: Vec<Vec<usize>> = (0..sorted.len()).combinations(2).collect();
    let mut results = pairs
        .par_iter()
        .map(|idx| {
            let members = [sorted[idx[0]], sorted[idx[1]]];
            let eval = evaluate_set(y, &members, opts)?;
            let (null_i, null_j) = (eval.members[0].null.clone(), eval.members[1].null.clone());
            let (si, sj) = (single(members[0].name), single(members[1].name));
            Ok(to_result(eval, h_y, |r| {
                classify_pair(r, si, sj, &null_i, &null_j)
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    rank(&mut results);
    Ok(results)
}

/// One result per unordered triple, ascending by CE (ties by names).
pub fn scan_order3(
    y: &[u8],
    candidates: &[Candidate<'_>],
    opts: ScanOptions,
) -> Result<Vec<FeatureSetResult>> {
    if candidates.len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 candidates".into()));
    }
    let pairs = scan_order2(y, candidates, opts)?;
    let pair_sce = |a: &str, b: &str| {
        pairs
            .iter()
            .find(|r| r.features[0] == a && r.features[1] == b)
            .expect("scanned above")
            .sce_drop
    };
    let h_y = response_entropy(y)?;
    let sorted = sorted_candidates(y, candidates)?;
    let triples: Vec<Vec<usize>> = (0..sorted.len()).combinations(3).collect();
    let mut results = triples
        .par_iter()
        .map(|idx| {
            let members = [sorted[idx[0]], sorted[idx[1]], sorted[idx[2]]];
            let (a, b, c) = (members[0].name, members[1].name, members[2].name);
            let rival = pair_sce(a, b).min(pair_sce(a, c)).min(pair_sce(b, c));
            let eval = evaluate_set(y, &members, opts)?;
            Ok(to_result(eval, h_y, |r| {
                if !r.significant {
                    Classification::Redundant
                } else if r.sce_drop > rival + DROP_TOLERANCE {
                    Classification::HigherOrder
                } else {
                    Classification::Insignificant
                }
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    rank(&mut results);
    Ok(results)
}

/// Scan of the given order (1 to [`MAX_SCAN_ORDER`]).
pub fn scan(
    y: &[u8],
    candidates: &[Candidate<'_>],
    order: usize,
    opts: ScanOptions,
) -> Result<Vec<FeatureSetResult>> {
    match order {
        1 => scan_order1(y, candidates, opts),
        2 => scan_order2(y, candidates, opts),
        3 => scan_order3(y, candidates, opts),
        _ => Err(Error::InvalidArgument(format!(
            "scan order {order} refused; supported orders are 1..={MAX_SCAN_ORDER}"
        ))),
    }
}

#[cfg(test)]
mod tests;
