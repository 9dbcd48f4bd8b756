use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use super::{Classification, FeatureSetResult};
use crate::error::{Error, Result};

pub const SCAN_HEADER: [&str; 9] = [
    "features",
    "ce",
    "rescaled_ce",
    "ce_drop",
    "sce_drop",
    "null_mean",
    "null_q95",
    "significant",
    "classification",
];

/// One line of a scan CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRecord {
    /// Member names joined with `_`.
    pub features: String,
    pub ce: f64,
    pub rescaled_ce: f64,
    pub ce_drop: f64,
    pub sce_drop: f64,
    pub null_mean: f64,
    pub null_q95: f64,
    pub significant: bool,
    pub classification: Classification,
}

impl From<&FeatureSetResult> for ScanRecord {
    fn from(r: &FeatureSetResult) -> Self {
        ScanRecord {
            features: r.label(),
            ce: r.ce,
            rescaled_ce: r.rescaled_ce,
            ce_drop: r.ce_drop,
            sce_drop: r.sce_drop,
            null_mean: r.null.mean,
            null_q95: r.null.q95,
            significant: r.significant,
            classification: r.classification,
        }
    }
}

impl ScanRecord {
    /// SCE-drop as a fraction of the response entropy.
    pub fn rescaled_sce_drop(&self) -> f64 {
        self.sce_drop / (self.ce + self.ce_drop)
    }
}

pub fn write_scan_csv<W: Write>(writer: W, results: &[FeatureSetResult]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SCAN_HEADER)?;
    for r in results.iter().map(ScanRecord::from) {
        w.write_record([
            r.features,
            format!("{:.10}", r.ce),
            format!("{:.10}", r.rescaled_ce),
            format!("{:.10}", r.ce_drop),
            format!("{:.10}", r.sce_drop),
            format!("{:.10}", r.null_mean),
            format!("{:.10}", r.null_q95),
            r.significant.to_string(),
            r.classification.to_string(),
        ])?;
    }
    w.flush()
}

pub fn read_scan_csv<R: Read>(reader: R, origin: &Path) -> Result<Vec<ScanRecord>> {
    let perr = |row: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        row,
        message,
    };
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(|e| perr(1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != SCAN_HEADER {
        return Err(perr(
            1,
            format!("expected header `{}`", SCAN_HEADER.join(",")),
        ));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| perr(row, e.to_string()))?;
        let num = |k: usize| {
            rec[k]
                .parse::<f64>()
                .map_err(|e| perr(row, format!("{} \"{}\": {e}", SCAN_HEADER[k], &rec[k])))
        };
        out.push(ScanRecord {
            features: rec[0].to_string(),
            ce: num(1)?,
            rescaled_ce: num(2)?,
            ce_drop: num(3)?,
            sce_drop: num(4)?,
            null_mean: num(5)?,
            null_q95: num(6)?,
            significant: rec[7]
                .parse()
                .map_err(|_| perr(row, format!("significant \"{}\"", &rec[7])))?,
            classification: rec[8].parse().map_err(|m: String| perr(row, m))?,
        });
    }
    Ok(out)
}

/// A report cell triple: feature label, re-scaled CE, re-scaled SCE-drop.
pub type ReportCell = (String, f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub one: Option<ReportCell>,
    pub two: Option<ReportCell>,
}

/// Top/bottom-ranked 1-feature and 2-feature results side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorReport {
    pub title: String,
    pub rows: Vec<ReportRow>,
    pub warnings: Vec<String>,
}

const COLUMNS: [&str; 6] = ["1-feature", "CE", "SCE-drop", "2-feature", "CE", "SCE-drop"];

fn pick(
    records: &[ScanRecord],
    top_k: usize,
    bottom_k: usize,
    which: &str,
    warnings: &mut Vec<String>,
) -> Vec<ReportCell> {
    let cell = |r: &ScanRecord| (r.features.clone(), r.rescaled_ce, r.rescaled_sce_drop());
    if top_k + bottom_k >= records.len() {
        if top_k + bottom_k > records.len() {
            warnings.push(format!(
                "{which}: top {top_k} + bottom {bottom_k} exceeds {} rows; showing all",
                records.len()
            ));
        }
        return records.iter().map(cell).collect();
    }
    records[..top_k]
        .iter()
        .chain(&records[records.len() - bottom_k..])
        .map(cell)
        .collect()
}

/// Builds the report from ranked scans (ascending CE). CE and SCE-drop are
/// shown as fractions of the response entropy, four decimals.
pub fn factor_report(
    title: &str,
    one: &[ScanRecord],
    two: &[ScanRecord],
    top_k: usize,
    bottom_k: usize,
) -> Result<FactorReport> {
    if one.is_empty() && two.is_empty() {
        return Err(Error::InvalidArgument("no scan results to report".into()));
    }
    let mut warnings = Vec::new();
    let left = pick(one, top_k, bottom_k, "1-feature", &mut warnings);
    let right = pick(two, top_k, bottom_k, "2-feature", &mut warnings);
    let n = left.len().max(right.len());
    let rows = (0..n)
        .map(|i| ReportRow {
            one: left.get(i).cloned(),
            two: right.get(i).cloned(),
        })
        .collect();
    Ok(FactorReport {
        title: title.to_string(),
        rows,
        warnings,
    })
}

impl FactorReport {
    fn cells(&self) -> Vec<[String; 6]> {
        let split = |c: &Option<ReportCell>| match c {
            Some((name, ce, sce)) => [name.clone(), format!("{ce:.4}"), format!("{sce:.4}")],
            None => [String::new(), String::new(), String::new()],
        };
        self.rows
            .iter()
            .map(|r| {
                let [a, b, c] = split(&r.one);
                let [d, e, f] = split(&r.two);
                [a, b, c, d, e, f]
            })
            .collect()
    }

    /// Fixed-width plain-text table.
    pub fn to_text(&self) -> String {
        let cells = self.cells();
        let mut widths = COLUMNS.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let line = |fields: &[String]| {
            let mut s = String::new();
            for (i, (f, w)) in fields.iter().zip(widths).enumerate() {
                if i > 0 {
                    s.push_str("  ");
                }
                let _ = write!(s, "{f:<w$}");
            }
            s.trim_end().to_string()
        };
        let mut out = format!("{}\n", self.title);
        out.push_str(&line(&COLUMNS.map(String::from)));
        out.push('\n');
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
        out.push('\n');
        for row in &cells {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("**{}**\n\n", self.title);
        out.push_str(&format!("| {} |\n", COLUMNS.join(" | ")));
        out.push_str("|---|---|---|---|---|---|\n");
        for row in self.cells() {
            out.push_str(&format!("| {} |\n", row.join(" | ")));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(name: &str, ce: f64, sce: f64) -> ScanRecord {
        ScanRecord {
            features: name.to_string(),
            ce,
            rescaled_ce: ce / 2.0,
            ce_drop: 2.0 - ce,
            sce_drop: sce,
            null_mean: 0.01,
            null_q95: 0.05,
            significant: true,
            classification: Classification::Order1,
        }
    }

    fn ones(n: usize) -> Vec<ScanRecord> {
        (0..n)
            .map(|i| rec(&format!("f{i}"), 0.5 + 0.2 * i as f64, 1.5 - 0.2 * i as f64))
            .collect()
    }

    #[test]
    fn top_five_bottom_one() {
        let one = ones(6);
        let two: Vec<ScanRecord> = (0..15)
            .map(|i| rec(&format!("p{i:02}"), 0.1 * i as f64, 0.3))
            .collect();
        let r = factor_report("peakvalue", &one, &two, 5, 1).unwrap();
        assert_eq!(r.rows.len(), 6);
        assert!(r.warnings.is_empty());
        assert_eq!(r.rows[5].two.as_ref().unwrap().0, "p14");
        assert_eq!(r.rows[4].two.as_ref().unwrap().0, "p04");
        let text = r.to_text();
        let header = text.lines().nth(1).unwrap();
        let cols: Vec<&str> = header.split_whitespace().collect();
        assert_eq!(cols, COLUMNS);
        assert!(text.contains("f0         0.2500  0.7500"));
        assert_eq!(
            r.to_text(),
            factor_report("peakvalue", &one, &two, 5, 1)
                .unwrap()
                .to_text()
        );
        let md = r.to_markdown();
        assert!(md.contains("| 1-feature | CE | SCE-drop | 2-feature | CE | SCE-drop |"));
        assert_eq!(md.lines().filter(|l| l.starts_with("| f")).count(), 6);
    }

    #[test]
    fn clamps_with_warning() {
        let r = factor_report("y", &ones(3), &[], 5, 1).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.warnings.len(), 2);
        assert!(r.rows.iter().all(|row| row.two.is_none()));
        assert!(factor_report("y", &[], &[], 5, 1).is_err());
    }

    #[test]
    fn scan_csv_round_trip_fields() {
        use crate::major_factor::NullDropStats;
        let result = FeatureSetResult {
            features: vec!["a".into(), "b".into()],
            ce: 0.25,
            rescaled_ce: 0.125,
            ce_drop: 1.75,
            sce_drop: 0.5,
            null: NullDropStats {
                replicates: 10,
                mean: 0.1,
                sd: 0.01,
                q95: 0.2,
                seed: 1,
            },
            significant: true,
            classification: Classification::Order2Interaction,
        };
        let mut buf = Vec::new();
        write_scan_csv(&mut buf, std::slice::from_ref(&result)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("features,ce,rescaled_ce,ce_drop,sce_drop,null_mean,null_q95,significant,classification\n"));
        assert!(text.contains("a_b,0.2500000000,"));
        let back = read_scan_csv(buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back, vec![ScanRecord::from(&result)]);
    }
}
