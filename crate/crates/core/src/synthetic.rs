//! Seeded synthetic epidemic data: North units grow steeply, South units
//! grow slowly, and both decline at matched rates. Used by the end-to-end
//! tests and the `generate_synthetic` example.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::ingest::{write_case_series, write_unit_metadata, RawSeries, Region, Status, UnitMeta};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_units: usize,
    pub start: NaiveDate,
    pub days: usize,
    /// Rise duration ranges in days, (low, high).
    pub north_rise: (f64, f64),
    pub south_rise: (f64, f64),
    pub decline: (f64, f64),
    /// Peak rate per 100,000 persons per day.
    pub peak_rate: (f64, f64),
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_units: 84,
            start: NaiveDate::from_ymd_opt(2022, 3, 1).expect("valid date"),
            days: 160,
            north_rise: (14.0, 24.0),
            south_rise: (42.0, 58.0),
            decline: (50.0, 70.0),
            peak_rate: (25.0, 60.0),
            seed: 2022,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub series: BTreeMap<String, RawSeries>,
    pub metadata: BTreeMap<String, UnitMeta>,
}

fn profile(day: f64, onset: f64, rise: f64, decline: f64, peak: f64) -> f64 {
    let t = day - onset;
    if t <= 0.0 {
        0.0
    } else if t <= rise {
        peak * t / rise
    } else {
        (peak * (1.0 - (t - rise) / decline)).max(0.0)
    }
}

/// Units alternate North/South; status alternates in pairs so it is
/// balanced within each region.
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData> {
    if spec.n_units == 0 || spec.n_units > 99 * 12 {
        return Err(Error::InvalidArgument(format!(
            "n_units {} outside 1..=1188",
            spec.n_units
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut series = BTreeMap::new();
    let mut metadata = BTreeMap::new();
    for i in 0..spec.n_units {
        let unit_id = format!("U{:03}", i + 1);
        let region = if i % 2 == 0 {
            Region::North
        } else {
            Region::South
        };
        let status = if (i / 2) % 2 == 0 {
            Status::Urban
        } else {
            Status::Suburban
        };
        let rise_range = match region {
            Region::North => spec.north_rise,
            Region::South => spec.south_rise,
        };
        let rise = rng.gen_range(rise_range.0..=rise_range.1);
        let decline = rng.gen_range(spec.decline.0..=spec.decline.1);
        let peak = rng.gen_range(spec.peak_rate.0..=spec.peak_rate.1);
        let population: u64 = rng.gen_range(80_000..=400_000);
        // peak lands near day 80 for every unit
        let onset = 80.0 - rise + rng.gen_range(-5.0..=5.0);
        let counts = (0..spec.days)
            .map(|d| {
                let mean = profile(d as f64, onset, rise, decline, peak) * population as f64 / 1e5;
                if mean > 0.0 {
                    Poisson::new(mean).expect("positive mean").sample(&mut rng) as u64
                } else {
                    0
                }
            })
            .collect();
        let city = i / 12;
        let city_code: String = [b'A' + (city / 26) as u8, b'A' + (city % 26) as u8]
            .iter()
            .map(|&b| b as char)
            .collect();
        series.insert(
            unit_id.clone(),
            RawSeries {
                unit_id: unit_id.clone(),
                start_date: spec.start,
                counts,
            },
        );
        metadata.insert(
            unit_id.clone(),
            UnitMeta {
                unit_id,
                city_code,
                district_letter: (b'a' + (i % 12) as u8) as char,
                age_group: Some((i % 4) as u8 + 1),
                population,
                region,
                status,
            },
        );
    }
    Ok(SyntheticData { series, metadata })
}

impl SyntheticData {
    pub fn end_date(&self) -> Option<NaiveDate> {
        self.series.values().next().map(RawSeries::end_date)
    }

    /// Writes `cases.csv` and `metadata.csv` into `dir`, returning their paths.
    pub fn write_to(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let cases = dir.join("cases.csv");
        let meta = dir.join("metadata.csv");
        let f = std::fs::File::create(&cases).map_err(|e| Error::io(&cases, e))?;
        write_case_series(f, self.series.values()).map_err(|e| Error::io(&cases, e))?;
        let f = std::fs::File::create(&meta).map_err(|e| Error::io(&meta, e))?;
        write_unit_metadata(f, self.metadata.values()).map_err(|e| Error::io(&meta, e))?;
        Ok((cases, meta))
    }
}

/// Default study window for data made from `spec`: all but the first and
/// last week.
pub fn default_window(spec: &SyntheticSpec) -> (NaiveDate, NaiveDate) {
    (
        spec.start + Days::new(7),
        spec.start + Days::new(spec.days as u64 - 8),
    )
}

/// A pipeline configuration for data written by [`SyntheticData::write_to`]
/// into the same directory: region and status scans, the `left30to70`
/// fusion, and trees on the left and right spans.
pub fn example_config(spec: &SyntheticSpec) -> String {
    let (start, end) = default_window(spec);
    format!(
        r#"output = "out"

[input]
cases = "cases.csv"
metadata = "metadata.csv"

[window]
start = "{start}"
end = "{end}"

[association]
thresholds = [0.5, 0.7]

[[fusion]]
name = "left30to70"
columns = ["left30", "left40", "left50", "left60", "left70"]
seed = 1

[[fusion]]
name = "right30to70"
columns = ["right30", "right40", "right50", "right60", "right70"]
seed = 1

[[response]]
name = "region"
seed = 7

[[response]]
name = "status"
seed = 7

[[cluster]]
name = "left"
columns = ["left90", "left80", "left70", "left60", "left50", "left40", "left30", "left20"]

[[cluster]]
name = "right"
columns = ["right90", "right80", "right70", "right60", "right50", "right40", "right30", "right20"]
"#
    )
}
