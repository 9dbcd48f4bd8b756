//! Curve smoothing and shape-feature extraction.
//!
//! A rate series is smoothed with a 13-day triangular kernel (two passes of a
//! centered 7-day moving average). On the smoothed curve we locate the peak,
//! the growth-side crossings `t(-a)` (first day the curve reaches
//! `(1 - a) * peak`) and the decline-side crossings `t(a)` (first day after
//! which the curve stays strictly below `(1 - a) * peak` until the end of the
//! window). Spans are measured from the robust peak, the floored midpoint of
//! the two 90%-of-peak crossings.

use std::fmt;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::RateSeries;

/// Days trimmed from each side by the smoother.
pub const KERNEL_HALF_WIDTH: usize = 6;
pub const KERNEL_LEN: usize = 2 * KERNEL_HALF_WIDTH + 1;

/// Weights `(7 - |d|) / 49` for `d = -6..=6`.
pub fn kernel_weights() -> [f64; KERNEL_LEN] {
    let mut w = [0.0; KERNEL_LEN];
    for (i, wi) in w.iter_mut().enumerate() {
        let d = i as i64 - KERNEL_HALF_WIDTH as i64;
        *wi = (7 - d.abs()) as f64 / 49.0;
    }
    w
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedSeries {
    pub unit_id: String,
    /// Input start date shifted forward by [`KERNEL_HALF_WIDTH`] days.
    pub start_date: NaiveDate,
    pub values: Vec<f64>,
}

impl SmoothedSeries {
    pub fn date_of(&self, day: usize) -> NaiveDate {
        self.start_date + Days::new(day as u64)
    }
}

pub fn smooth(series: &RateSeries) -> Result<SmoothedSeries> {
    let x = &series.rates;
    if x.len() < KERNEL_LEN {
        return Err(Error::SeriesTooShort {
            len: x.len(),
            need: KERNEL_LEN,
        });
    }
    let w = kernel_weights();
    let values = x
        .windows(KERNEL_LEN)
        .map(|win| win.iter().zip(&w).map(|(v, wi)| v * wi).sum())
        .collect();
    Ok(SmoothedSeries {
        unit_id: series.unit_id.clone(),
        start_date: series.start_date + Days::new(KERNEL_HALF_WIDTH as u64),
        values,
    })
}

/// Crossing level in percent: level `p` means `a = p / 100` and a threshold
/// of `(100 - p) / 100` of the peak value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct AlphaLevel(u8);

impl AlphaLevel {
    /// The level that defines the robust peak and curvature.
    pub const CENTER: AlphaLevel = AlphaLevel(10);

    pub fn new(percent: u8) -> Result<Self> {
        if (1..=99).contains(&percent) {
            Ok(AlphaLevel(percent))
        } else {
            Err(Error::InvalidArgument(format!(
                "alpha level {percent}% outside 1..=99"
            )))
        }
    }

    pub fn percent(self) -> u8 {
        self.0
    }

    pub fn threshold(self, peak: f64) -> f64 {
        peak * f64::from(100 - self.0) / 100.0
    }
}

impl TryFrom<u8> for AlphaLevel {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        AlphaLevel::new(v).map_err(|e| e.to_string())
    }
}

impl From<AlphaLevel> for u8 {
    fn from(a: AlphaLevel) -> u8 {
        a.0
    }
}

impl fmt::Display for AlphaLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Ordered set of crossing levels. Always contains the 10% centering level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct AlphaGrid(Vec<AlphaLevel>);

impl AlphaGrid {
    pub fn new(percents: &[u8]) -> Result<Self> {
        let mut levels = percents
            .iter()
            .map(|&p| AlphaLevel::new(p))
            .collect::<Result<Vec<_>>>()?;
        levels.sort();
        levels.dedup();
        if !levels.contains(&AlphaLevel::CENTER) {
            return Err(Error::InvalidArgument(
                "alpha grid must contain the 10% level".into(),
            ));
        }
        Ok(AlphaGrid(levels))
    }

    pub fn levels(&self) -> &[AlphaLevel] {
        &self.0
    }

    /// Span levels in output order (descending), excluding the centering level.
    pub fn span_levels(&self) -> Vec<AlphaLevel> {
        self.0
            .iter()
            .rev()
            .copied()
            .filter(|&l| l != AlphaLevel::CENTER)
            .collect()
    }

    pub fn left_names(&self) -> Vec<String> {
        self.span_levels()
            .iter()
            .map(|l| format!("left{l}"))
            .collect()
    }

    pub fn right_names(&self) -> Vec<String> {
        self.span_levels()
            .iter()
            .map(|l| format!("right{l}"))
            .collect()
    }

    /// All numeric feature columns, in output order.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names: Vec<String> = ["peakdate", "peakvalue", "peak", "curvature"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        names.extend(self.left_names());
        names.extend(self.right_names());
        names
    }

    /// The shape features: peakvalue, peak offset and every left/right span.
    pub fn shape_feature_names(&self) -> Vec<String> {
        let mut names = vec!["peakvalue".to_string(), "peak".to_string()];
        names.extend(self.left_names());
        names.extend(self.right_names());
        names
    }
}

impl Default for AlphaGrid {
    fn default() -> Self {
        AlphaGrid((1..=9).map(|k| AlphaLevel(k * 10)).collect())
    }
}

impl TryFrom<Vec<u8>> for AlphaGrid {
    type Error = String;
    fn try_from(v: Vec<u8>) -> std::result::Result<Self, String> {
        AlphaGrid::new(&v).map_err(|e| e.to_string())
    }
}

impl From<AlphaGrid> for Vec<u8> {
    fn from(g: AlphaGrid) -> Vec<u8> {
        g.0.into_iter().map(u8::from).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Index into the smoothed series; earliest argmax.
    pub day: usize,
    pub value: f64,
    /// Peak lies within [`KERNEL_HALF_WIDTH`] days of either edge of the smoothed window.
    pub boundary: bool,
}

pub fn find_peak(s: &SmoothedSeries) -> Result<Peak> {
    let v = &s.values;
    if v.is_empty() {
        return Err(Error::SeriesTooShort { len: 0, need: 1 });
    }
    let mut day = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[day] {
            day = i;
        }
    }
    let value = v[day];
    if value <= 0.0 {
        return Err(Error::NoSignal);
    }
    let boundary = day < KERNEL_HALF_WIDTH || day + KERNEL_HALF_WIDTH >= v.len();
    Ok(Peak {
        day,
        value,
        boundary,
    })
}

fn left_crossing_at(values: &[f64], peak: &Peak, level: AlphaLevel) -> Option<usize> {
    let thr = level.threshold(peak.value);
    let t = values[..=peak.day].iter().position(|&x| x >= thr)?;
    // Already above threshold on the first smoothed day: left-censored.
    (t > 0).then_some(t)
}

fn right_crossing_at(values: &[f64], peak: &Peak, level: AlphaLevel) -> Option<usize> {
    let thr = level.threshold(peak.value);
    let last_at_or_above = peak.day
        + values[peak.day..]
            .iter()
            .rposition(|&x| x >= thr)
            .expect("peak itself is above every threshold");
    let t = last_at_or_above + 1;
    (t < values.len()).then_some(t)
}

/// First day at or before the peak where the curve reaches `(1 - a)` of the
/// peak value. `None` when that already holds on the first day.
pub fn left_crossing(s: &SmoothedSeries, level: AlphaLevel) -> Result<Option<usize>> {
    let peak = find_peak(s)?;
    Ok(left_crossing_at(&s.values, &peak, level))
}

/// First day after the peak from which the curve stays strictly below
/// `(1 - a)` of the peak through the end of the window. `None` when the
/// window ends at or above the threshold.
pub fn right_crossing(s: &SmoothedSeries, level: AlphaLevel) -> Result<Option<usize>> {
    let peak = find_peak(s)?;
    Ok(right_crossing_at(&s.values, &peak, level))
}

/// Per-level crossing days; `None` marks a censored crossing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingTimes {
    pub levels: Vec<AlphaLevel>,
    pub left: Vec<Option<usize>>,
    pub right: Vec<Option<usize>>,
}

impl CrossingTimes {
    fn get(&self, side: &[Option<usize>], level: AlphaLevel) -> Option<usize> {
        self.levels
            .iter()
            .position(|&l| l == level)
            .and_then(|i| side[i])
    }

    pub fn left_at(&self, level: AlphaLevel) -> Option<usize> {
        self.get(&self.left, level)
    }

    pub fn right_at(&self, level: AlphaLevel) -> Option<usize> {
        self.get(&self.right, level)
    }
}

pub fn crossing_times(s: &SmoothedSeries, grid: &AlphaGrid) -> Result<CrossingTimes> {
    let peak = find_peak(s)?;
    Ok(crossing_times_at(&s.values, &peak, grid))
}

fn crossing_times_at(values: &[f64], peak: &Peak, grid: &AlphaGrid) -> CrossingTimes {
    let levels = grid.levels().to_vec();
    let left = levels
        .iter()
        .map(|&l| left_crossing_at(values, peak, l))
        .collect();
    let right = levels
        .iter()
        .map(|&l| right_crossing_at(values, peak, l))
        .collect();
    CrossingTimes {
        levels,
        left,
        right,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveFeatures {
    pub unit_id: String,
    pub peak_day: usize,
    pub peakdate: NaiveDate,
    pub peakvalue: f64,
    pub robust_peak: Option<usize>,
    /// `t_max - t0`.
    pub peak_offset: Option<i64>,
    /// `t(0.1) - t(-0.1)`.
    pub curvature: Option<i64>,
    /// Span levels in [`AlphaGrid::span_levels`] order.
    pub span_levels: Vec<AlphaLevel>,
    /// `t0 - t(-a)` per span level.
    pub left: Vec<Option<i64>>,
    /// `t(a) - t0` per span level.
    pub right: Vec<Option<i64>>,
    pub crossings: CrossingTimes,
    pub boundary_peak: bool,
}

impl CurveFeatures {
    /// Values in [`AlphaGrid::feature_names`] order, with `peakdate` as its
    /// day number counted from 0001-01-01.
    pub fn numeric_values(&self) -> Vec<Option<f64>> {
        use chrono::Datelike;
        let mut out = vec![
            Some(self.peakdate.num_days_from_ce() as f64),
            Some(self.peakvalue),
            self.peak_offset.map(|v| v as f64),
            self.curvature.map(|v| v as f64),
        ];
        out.extend(self.left.iter().map(|v| v.map(|x| x as f64)));
        out.extend(self.right.iter().map(|v| v.map(|x| x as f64)));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureWarning {
    BoundaryPeak { unit: String, day: usize },
}

impl fmt::Display for FeatureWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureWarning::BoundaryPeak { unit, day } => write!(
                f,
                "unit {unit}: boundary peak at smoothed day {day}; centering features set to NA"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub features: CurveFeatures,
    pub warning: Option<FeatureWarning>,
}

pub fn extract_features(s: &SmoothedSeries, grid: &AlphaGrid) -> Result<Extraction> {
    let peak = find_peak(s)?;
    let crossings = crossing_times_at(&s.values, &peak, grid);
    let span_levels = grid.span_levels();
    let n = span_levels.len();

    let mut features = CurveFeatures {
        unit_id: s.unit_id.clone(),
        peak_day: peak.day,
        peakdate: s.date_of(peak.day),
        peakvalue: peak.value,
        robust_peak: None,
        peak_offset: None,
        curvature: None,
        span_levels: span_levels.clone(),
        left: vec![None; n],
        right: vec![None; n],
        crossings,
        boundary_peak: peak.boundary,
    };

    if peak.boundary {
        let warning = FeatureWarning::BoundaryPeak {
            unit: s.unit_id.clone(),
            day: peak.day,
        };
        return Ok(Extraction {
            features,
            warning: Some(warning),
        });
    }

    let c = &features.crossings;
    let lo = c
        .left_at(AlphaLevel::CENTER)
        .ok_or(Error::CannotCenter("left 10%"))?;
    let hi = c
        .right_at(AlphaLevel::CENTER)
        .ok_or(Error::CannotCenter("right 10%"))?;
    let t0 = (lo + hi) / 2;
    let left = span_levels
        .iter()
        .map(|&l| c.left_at(l).map(|t| t0 as i64 - t as i64))
        .collect();
    let right = span_levels
        .iter()
        .map(|&l| c.right_at(l).map(|t| t as i64 - t0 as i64))
        .collect();

    features.robust_peak = Some(t0);
    features.peak_offset = Some(peak.day as i64 - t0 as i64);
    features.curvature = Some(hi as i64 - lo as i64);
    features.left = left;
    features.right = right;
    Ok(Extraction {
        features,
        warning: None,
    })
}
