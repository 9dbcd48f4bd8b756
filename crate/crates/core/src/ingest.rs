//! Case-count and unit-metadata ingestion, rate normalization and
//! study-window clipping.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cases per this many persons per day.
pub const DEFAULT_RATE_SCALE: f64 = 100_000.0;

pub const CASES_HEADER: [&str; 3] = ["unit_id", "date", "count"];
pub const META_HEADER: [&str; 7] = [
    "unit_id",
    "city_code",
    "district_letter",
    "age_group",
    "population",
    "region",
    "status",
];

/// Daily case counts for one unit on a contiguous day axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSeries {
    pub unit_id: String,
    pub start_date: NaiveDate,
    pub counts: Vec<u64>,
}

impl RawSeries {
    pub fn end_date(&self) -> NaiveDate {
        self.start_date + Days::new(self.counts.len() as u64 - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    North,
    South,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Status {
    Urban,
    Suburban,
}

impl FromStr for Region {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "North" => Ok(Region::North),
            "South" => Ok(Region::South),
            other => Err(format!("region \"{other}\" is not North or South")),
        }
    }
}

impl FromStr for Status {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "Urban" => Ok(Status::Urban),
            "Suburban" => Ok(Status::Suburban),
            other => Err(format!("status \"{other}\" is not Urban or Suburban")),
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::North => "North",
            Region::South => "South",
        })
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Urban => "Urban",
            Status::Suburban => "Suburban",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitMeta {
    pub unit_id: String,
    pub city_code: String,
    pub district_letter: char,
    /// 1 for 0-19, 2 for 20-34, 3 for 35-54, 4 for 55+.
    pub age_group: Option<u8>,
    pub population: u64,
    pub region: Region,
    pub status: Status,
}

/// Daily infection rate for one unit, same day axis as its [`RawSeries`].
#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    pub unit_id: String,
    pub start_date: NaiveDate,
    pub rates: Vec<f64>,
}

impl RateSeries {
    pub fn end_date(&self) -> NaiveDate {
        self.start_date + Days::new(self.rates.len() as u64 - 1)
    }
}

fn parse_err(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        row,
        message: message.into(),
    }
}

fn check_header(path: &Path, headers: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expected {
        return Err(parse_err(
            path,
            1,
            format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                got.join(",")
            ),
        ));
    }
    Ok(())
}

pub fn parse_case_series(path: &Path) -> Result<BTreeMap<String, RawSeries>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_case_series(file, path)
}

/// Parses case rows from any reader; `origin` names the source in errors.
/// Rows may arrive in any order; each unit's days must form a contiguous run.
pub fn read_case_series<R: Read>(reader: R, origin: &Path) -> Result<BTreeMap<String, RawSeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(origin, 1, e.to_string()))?
        .clone();
    check_header(origin, &headers, &CASES_HEADER)?;

    // unit -> date -> (count, row)
    let mut by_unit: BTreeMap<String, BTreeMap<NaiveDate, (u64, usize)>> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| parse_err(origin, row, e.to_string()))?;
        if rec.len() != 3 {
            return Err(parse_err(
                origin,
                row,
                format!("expected 3 fields, found {}", rec.len()),
            ));
        }
        let unit = rec[0].trim();
        if unit.is_empty() {
            return Err(parse_err(origin, row, "empty unit_id"));
        }
        let date = NaiveDate::parse_from_str(rec[1].trim(), "%Y-%m-%d").map_err(|e| {
            parse_err(
                origin,
                row,
                format!("unparseable date \"{}\": {e}", &rec[1]),
            )
        })?;
        let count: i64 = rec[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(origin, row, format!("unparseable count \"{}\"", &rec[2])))?;
        if count < 0 {
            return Err(parse_err(origin, row, format!("negative count {count}")));
        }
        let days = by_unit.entry(unit.to_string()).or_default();
        if let Some((_, first)) = days.insert(date, (count as u64, row)) {
            return Err(parse_err(
                origin,
                row,
                format!("duplicate row for ({unit}, {date}), first seen at row {first}"),
            ));
        }
    }

    let mut out = BTreeMap::new();
    for (unit, days) in by_unit {
        let mut iter = days.into_iter();
        let (start_date, (first, _)) = iter.next().expect("non-empty by construction");
        let mut counts = vec![first];
        let mut prev = start_date;
        for (date, (count, row)) in iter {
            if date != prev + Days::new(1) {
                return Err(Error::DayGap {
                    unit,
                    after: prev,
                    row,
                });
            }
            counts.push(count);
            prev = date;
        }
        out.insert(
            unit.clone(),
            RawSeries {
                unit_id: unit,
                start_date,
                counts,
            },
        );
    }
    Ok(out)
}

/// Writes series in the case-file format, units in key order, days ascending.
pub fn write_case_series<'a, W: Write>(
    writer: W,
    series: impl IntoIterator<Item = &'a RawSeries>,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CASES_HEADER)?;
    for s in series {
        for (i, c) in s.counts.iter().enumerate() {
            let date = s.start_date + Days::new(i as u64);
            w.write_record([
                s.unit_id.as_str(),
                &date.format("%Y-%m-%d").to_string(),
                &c.to_string(),
            ])?;
        }
    }
    w.flush()
}

pub fn parse_unit_metadata(path: &Path) -> Result<BTreeMap<String, UnitMeta>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_unit_metadata(file, path)
}

pub fn read_unit_metadata<R: Read>(reader: R, origin: &Path) -> Result<BTreeMap<String, UnitMeta>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(origin, 1, e.to_string()))?
        .clone();
    check_header(origin, &headers, &META_HEADER)?;

    let mut out = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| parse_err(origin, row, e.to_string()))?;
        if rec.len() != META_HEADER.len() {
            return Err(parse_err(
                origin,
                row,
                format!("expected 7 fields, found {}", rec.len()),
            ));
        }
        let field = |k: usize| rec[k].trim();
        let unit_id = field(0).to_string();
        if unit_id.is_empty() {
            return Err(parse_err(origin, row, "empty unit_id"));
        }
        let city_code = field(1).to_string();
        if city_code.len() != 2 || !city_code.chars().all(|c| c.is_ascii_alphabetic()) {
            return Err(parse_err(
                origin,
                row,
                format!("city_code \"{city_code}\" is not a 2-letter code"),
            ));
        }
        let district_letter = match field(2).chars().collect::<Vec<_>>().as_slice() {
            [c @ 'a'..='l'] => *c,
            _ => {
                return Err(parse_err(
                    origin,
                    row,
                    format!("district_letter \"{}\" is not a letter a-l", field(2)),
                ))
            }
        };
        let age_group = match field(3) {
            "" => None,
            s => match s.parse::<u8>() {
                Ok(g @ 1..=4) => Some(g),
                _ => {
                    return Err(parse_err(
                        origin,
                        row,
                        format!("age_group \"{s}\" is not 1-4"),
                    ))
                }
            },
        };
        let population: i64 = field(4).parse().map_err(|_| {
            parse_err(
                origin,
                row,
                format!("unparseable population \"{}\"", field(4)),
            )
        })?;
        if population <= 0 {
            return Err(parse_err(
                origin,
                row,
                format!("population must be positive, got {population}"),
            ));
        }
        let region: Region = field(5)
            .parse()
            .map_err(|m: String| parse_err(origin, row, m))?;
        let status: Status = field(6)
            .parse()
            .map_err(|m: String| parse_err(origin, row, m))?;
        if out.contains_key(&unit_id) {
            return Err(Error::DuplicateUnit(unit_id));
        }
        out.insert(
            unit_id.clone(),
            UnitMeta {
                unit_id,
                city_code,
                district_letter,
                age_group,
                population: population as u64,
                region,
                status,
            },
        );
    }
    Ok(out)
}

pub fn write_unit_metadata<'a, W: Write>(
    writer: W,
    metas: impl IntoIterator<Item = &'a UnitMeta>,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(META_HEADER)?;
    for m in metas {
        w.write_record([
            m.unit_id.clone(),
            m.city_code.clone(),
            m.district_letter.to_string(),
            m.age_group.map(|g| g.to_string()).unwrap_or_default(),
            m.population.to_string(),
            m.region.to_string(),
            m.status.to_string(),
        ])?;
    }
    w.flush()
}

/// Cases per 100,000 persons per day.
pub fn compute_daily_rates(series: &RawSeries, meta: &UnitMeta) -> Result<RateSeries> {
    compute_daily_rates_scaled(series, meta, DEFAULT_RATE_SCALE)
}

pub fn compute_daily_rates_scaled(
    series: &RawSeries,
    meta: &UnitMeta,
    scale: f64,
) -> Result<RateSeries> {
    if series.unit_id != meta.unit_id {
        return Err(Error::UnitMismatch {
            series: series.unit_id.clone(),
            meta: meta.unit_id.clone(),
        });
    }
    let pop = meta.population as f64;
    Ok(RateSeries {
        unit_id: series.unit_id.clone(),
        start_date: series.start_date,
        rates: series
            .counts
            .iter()
            .map(|&c| c as f64 / pop * scale)
            .collect(),
    })
}

/// Sub-series covering exactly `[start, end]`.
pub fn window_clip(series: &RateSeries, start: NaiveDate, end: NaiveDate) -> Result<RateSeries> {
    if start > end {
        return Err(Error::InvalidArgument(format!(
            "window start {start} after end {end}"
        )));
    }
    let data_end = series.end_date();
    if start < series.start_date || end > data_end {
        return Err(Error::WindowOutsideData {
            unit: series.unit_id.clone(),
            start,
            end,
            data_start: series.start_date,
            data_end,
        });
    }
    let from = (start - series.start_date).num_days() as usize;
    let to = (end - series.start_date).num_days() as usize;
    Ok(RateSeries {
        unit_id: series.unit_id.clone(),
        start_date: start,
        rates: series.rates[from..=to].to_vec(),
    })
}
