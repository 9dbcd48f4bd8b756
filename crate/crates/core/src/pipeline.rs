//! Stage runner behind the `epicurve` binary. Every stage reads its inputs
//! from files (raw inputs or earlier artifacts) and writes plain-text
//! artifacts into the output directory, so stages compose.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use log::warn;
use sha2::{Digest, Sha256};

use crate::cluster::{
    hcluster_ward, heatmap_svg, kmeans_fuse, leaf_codes, similarity_csv, KMeansOptions,
};
use crate::config::{PipelineConfig, ResponseSpec};
use crate::curve::{extract_features, smooth, CurveFeatures};
use crate::error::{Error, Result};
use crate::infotheory::{
    association_matrices, discretize, matrix_csv, threshold_network, CategoricalMatrix, Which,
    NA_CATEGORY,
};
use crate::ingest::{
    compute_daily_rates_scaled, parse_case_series, parse_unit_metadata, window_clip, Region,
    Status, UnitMeta,
};
use crate::major_factor::{
    factor_report, read_scan_csv, scan, write_scan_csv, Candidate, ScanOptions,
};
use crate::table::{read_features_file, write_features_csv, FeatureTable};

pub const FEATURES_CSV: &str = "features.csv";
pub const FUSED_CSV: &str = "fused.csv";
pub const FEATURES_FUSED_CSV: &str = "features_fused.csv";
pub const MANIFEST: &str = "manifest.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Features,
    Associate,
    Fuse,
    Select,
    Report,
    Cluster,
}

impl Stage {
    /// Execution order of `all`.
    pub const ALL: [Stage; 6] = [
        Stage::Features,
        Stage::Associate,
        Stage::Fuse,
        Stage::Select,
        Stage::Report,
        Stage::Cluster,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Features => "features",
            Stage::Associate => "associate",
            Stage::Fuse => "fuse",
            Stage::Select => "select",
            Stage::Report => "report",
            Stage::Cluster => "cluster",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Command-line overrides applied on top of the configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub top: Option<usize>,
    pub bottom: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(seed) = self.seed {
            cfg.fusion.iter_mut().for_each(|f| f.seed = seed);
            cfg.response.iter_mut().for_each(|r| r.seed = seed);
        }
        for r in &mut cfg.response {
            if let Some(t) = self.top {
                r.top = t;
            }
            if let Some(b) = self.bottom {
                r.bottom = b;
            }
        }
    }
}

pub struct Pipeline {
    cfg: PipelineConfig,
    out: PathBuf,
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>, path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| Error::io(path, e))?;
    Ok(buf)
}

/// Binary response coding: North = 1, South = 2; Urban = 1, Suburban = 2.
fn metadata_response(field: &str, meta: &UnitMeta) -> Option<u8> {
    match field {
        "region" => Some(match meta.region {
            Region::North => 1,
            Region::South => 2,
        }),
        "status" => Some(match meta.status {
            Status::Urban => 1,
            Status::Suburban => 2,
        }),
        _ => None,
    }
}

impl Pipeline {
    pub fn new(mut cfg: PipelineConfig, overrides: Overrides) -> Result<Self> {
        overrides.apply(&mut cfg);
        cfg.validate()?;
        let out = cfg.output_dir();
        Ok(Pipeline { cfg, out })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn output_dir(&self) -> &Path {
        &self.out
    }

    fn artifact(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn require(&self, name: &str, stage: Stage) -> Result<PathBuf> {
        let p = self.artifact(name);
        if p.is_file() {
            Ok(p)
        } else {
            Err(Error::MissingArtifact {
                path: p,
                stage: stage.name(),
            })
        }
    }

    /// Runs one stage and refreshes the manifest. Returns the files written.
    pub fn run(&self, stage: Stage) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))?;
        let written = match stage {
            Stage::Features => self.features()?,
            Stage::Associate => self.associate()?,
            Stage::Fuse => self.fuse()?,
            Stage::Select => self.select()?,
            Stage::Report => self.report()?,
            Stage::Cluster => self.cluster()?,
        };
        write_manifest(&self.out)?;
        Ok(written)
    }

    pub fn run_all(&self) -> Result<PathBuf> {
        for stage in Stage::ALL {
            self.run(stage)?;
        }
        Ok(self.artifact(MANIFEST))
    }

    fn features(&self) -> Result<Vec<PathBuf>> {
        let st = "features";
        let cases_path = self.cfg.resolve(&self.cfg.input.cases);
        let meta_path = self.cfg.resolve(&self.cfg.input.metadata);
        let series = parse_case_series(&cases_path)?;
        let metas = parse_unit_metadata(&meta_path)?;
        for unit in metas.keys().filter(|u| !series.contains_key(*u)) {
            warn!("unit {unit} has metadata but no case series; skipped");
        }
        let grid = self.cfg.alpha_grid()?;
        let mut features: Vec<CurveFeatures> = Vec::with_capacity(series.len());
        for (unit, raw) in &series {
            let meta = metas
                .get(unit)
                .ok_or_else(|| Error::MissingMeta(unit.clone()).in_stage(st, unit))?;
            let run = || -> Result<_> {
                let rates = compute_daily_rates_scaled(raw, meta, self.cfg.features.rate_scale)?;
                let clipped = window_clip(&rates, self.cfg.window.start, self.cfg.window.end)?;
                extract_features(&smooth(&clipped)?, &grid)
            };
            let extraction = run().map_err(|e| e.in_stage(st, unit))?;
            if let Some(w) = extraction.warning {
                warn!("{w}");
            }
            features.push(extraction.features);
        }
        let path = self.artifact(FEATURES_CSV);
        let bytes = csv_bytes(|b| write_features_csv(b, &features, &grid), &path)?;
        Ok(vec![write_file(&path, bytes)?])
    }

    fn read_features(&self) -> Result<FeatureTable> {
        read_features_file(&self.require(FEATURES_CSV, Stage::Features)?)
    }

    /// Percentile-binned columns; all-NA and single-valued columns are
    /// dropped with a warning.
    fn categorize(
        &self,
        table: &FeatureTable,
        columns: &[String],
        stage: &str,
    ) -> Result<CategoricalMatrix> {
        let mut m = CategoricalMatrix {
            unit_ids: table.unit_ids.clone(),
            feature_names: Vec::new(),
            columns: Vec::new(),
            edges: Vec::new(),
        };
        for name in columns {
            let binned = match discretize(table.column(name)?, self.cfg.features.n_bins) {
                Ok(b) => b,
                Err(Error::EmptyColumn) => {
                    warn!("{stage}: column {name} is entirely NA; excluded");
                    continue;
                }
                Err(e) => return Err(e.in_stage("discretize", name.clone())),
            };
            if let Some(w) = &binned.warning {
                warn!("{stage}: column {name}: {w}");
            }
            if binned.categories.iter().all(|&c| c == binned.categories[0]) {
                warn!("{stage}: column {name} has a single category; excluded");
                continue;
            }
            m.feature_names.push(name.clone());
            m.columns.push(binned.categories);
            m.edges.push(binned.edges);
        }
        Ok(m)
    }

    fn associate(&self) -> Result<Vec<PathBuf>> {
        let table = self.read_features()?;
        let m = self.categorize(&table, &self.cfg.association_columns()?, "associate")?;
        if m.feature_names.len() < 2 {
            return Err(Error::NotEnoughRows {
                have: m.feature_names.len(),
                need: 2,
            }
            .in_stage("associate", "usable columns"));
        }
        let mut written = Vec::new();

        let mut cats = format!("unit_id,{}\n", m.feature_names.join(","));
        for (r, unit) in m.unit_ids.iter().enumerate() {
            cats.push_str(unit);
            for col in &m.columns {
                cats.push_str(&format!(",{}", col[r]));
            }
            cats.push('\n');
        }
        written.push(write_file(&self.artifact("categories.csv"), cats)?);

        let mut edges = String::from("feature,edges\n");
        for (name, e) in m.feature_names.iter().zip(&m.edges) {
            let joined: Vec<String> = e.iter().map(|v| v.to_string()).collect();
            edges.push_str(&format!("{name},{}\n", joined.join(";")));
        }
        written.push(write_file(&self.artifact("bin_edges.csv"), edges)?);

        let a = association_matrices(&m)
            .map_err(|e| e.in_stage("associate", "association matrices"))?;
        written.push(write_file(
            &self.artifact("association_directed.csv"),
            matrix_csv(&a.names, &a.directed),
        )?);
        written.push(write_file(
            &self.artifact("association_mutual.csv"),
            matrix_csv(&a.names, &a.mutual),
        )?);
        for &tau in &self.cfg.association.thresholds {
            for (which, label) in [(Which::Directed, "directed"), (Which::Mutual, "mutual")] {
                let net = threshold_network(&a, which, tau)?;
                let name = format!("network_{label}_{tau:.2}");
                written.push(write_file(
                    &self.artifact(&format!("{name}.dot")),
                    net.to_dot(&name),
                )?);
            }
        }
        Ok(written)
    }

    fn fuse(&self) -> Result<Vec<PathBuf>> {
        let features_path = self.require(FEATURES_CSV, Stage::Features)?;
        let table = read_features_file(&features_path)?;
        let mut fused = Vec::new();
        let mut written = Vec::new();
        for spec in &self.cfg.fusion {
            let opts = KMeansOptions {
                k: spec.k,
                seed: spec.seed,
                restarts: spec.restarts,
            };
            let f = kmeans_fuse(&table, &spec.name, &spec.columns, opts)
                .map_err(|e| e.in_stage("fuse", spec.name.clone()))?;
            let missing = f.labels.iter().filter(|&&l| l == NA_CATEGORY).count();
            if missing > 0 {
                warn!(
                    "fuse: {}: {missing} units with NA sources labeled 0",
                    spec.name
                );
            }
            let mut text = format!("label,{}\n", spec.columns.join(","));
            for (i, c) in f.centroids.iter().enumerate() {
                let vals: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                text.push_str(&format!("{},{}\n", i + 1, vals.join(",")));
            }
            written.push(write_file(
                &self.artifact(&format!("centroids_{}.csv", spec.name)),
                text,
            )?);
            fused.push(f);
        }
        let label = |l: u8| {
            if l == NA_CATEGORY {
                String::new()
            } else {
                l.to_string()
            }
        };

        let mut text = String::from("unit_id");
        for f in &fused {
            text.push(',');
            text.push_str(&f.name);
        }
        text.push('\n');
        for (r, unit) in table.unit_ids.iter().enumerate() {
            text.push_str(unit);
            for f in &fused {
                text.push(',');
                text.push_str(&label(f.labels[r]));
            }
            text.push('\n');
        }
        written.push(write_file(&self.artifact(FUSED_CSV), text)?);

        // original feature file with the fused columns appended
        let mut rdr = csv::Reader::from_path(&features_path).map_err(|e| Error::Parse {
            path: features_path.clone(),
            row: 1,
            message: e.to_string(),
        })?;
        let out_path = self.artifact(FEATURES_FUSED_CSV);
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = rdr
            .headers()
            .map_err(|e| Error::Parse {
                path: features_path.clone(),
                row: 1,
                message: e.to_string(),
            })?
            .clone();
        for f in &fused {
            header.push_field(&f.name);
        }
        let io = |e: csv::Error| Error::io(&out_path, std::io::Error::other(e));
        w.write_record(&header).map_err(io)?;
        for (r, rec) in rdr.records().enumerate() {
            let mut rec = rec.map_err(|e| Error::Parse {
                path: features_path.clone(),
                row: r + 2,
                message: e.to_string(),
            })?;
            for f in &fused {
                rec.push_field(&label(f.labels[r]));
            }
            w.write_record(&rec).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::io(&out_path, std::io::Error::other(e.to_string())))?;
        written.push(write_file(&out_path, bytes)?);
        Ok(written)
    }

    fn response_column(
        &self,
        r: &ResponseSpec,
        table: &FeatureTable,
        metas: &BTreeMap<String, UnitMeta>,
    ) -> Result<Vec<u8>> {
        let fused = self.cfg.fusion.iter().any(|f| f.name == r.name);
        if fused {
            return Ok(fused_categories(table.column(&r.name)?));
        }
        if table.index_of(&r.name).is_ok() {
            let b = discretize(table.column(&r.name)?, self.cfg.features.n_bins)
                .map_err(|e| e.in_stage("select", r.name.clone()))?;
            return Ok(b.categories);
        }
        table
            .unit_ids
            .iter()
            .map(|u| {
                let meta = metas.get(u).ok_or_else(|| Error::MissingMeta(u.clone()))?;
                metadata_response(&r.name, meta).ok_or_else(|| Error::UnknownColumn(r.name.clone()))
            })
            .collect()
    }

    fn select(&self) -> Result<Vec<PathBuf>> {
        self.require(FEATURES_CSV, Stage::Features)?;
        let table = read_features_file(&self.require(FEATURES_FUSED_CSV, Stage::Fuse)?)?;
        let metas = parse_unit_metadata(&self.cfg.resolve(&self.cfg.input.metadata))?;
        let mut written = Vec::new();
        for r in &self.cfg.response {
            let st = |e: Error| e.in_stage("select", r.name.clone());
            let y = self.response_column(r, &table, &metas).map_err(st)?;
            let names = self.cfg.candidates(r)?;
            let (fused_names, base_names): (Vec<String>, Vec<String>) = names
                .into_iter()
                .partition(|n| self.cfg.fusion.iter().any(|f| &f.name == n));
            let mut m = self.categorize(&table, &base_names, "select")?;
            for n in &fused_names {
                m.push_categorical(n, fused_categories(table.column(n)?))?;
            }
            let candidates: Vec<Candidate<'_>> = m
                .feature_names
                .iter()
                .zip(&m.columns)
                .map(|(name, values)| Candidate { name, values })
                .collect();
            let opts = ScanOptions {
                replicates: r.replicates,
                seed: r.seed,
            };
            for order in 1..=r.order.min(candidates.len()) {
                let results = scan(&y, &candidates, order, opts).map_err(st)?;
                let path = self.artifact(&format!("scan_{}_order{order}.csv", r.name));
                let bytes = csv_bytes(|b| write_scan_csv(b, &results), &path)?;
                written.push(write_file(&path, bytes)?);
            }
        }
        Ok(written)
    }

    fn report(&self) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for r in &self.cfg.response {
            let read = |order: usize| -> Result<Vec<_>> {
                let p =
                    self.require(&format!("scan_{}_order{order}.csv", r.name), Stage::Select)?;
                let f = std::fs::File::open(&p).map_err(|e| Error::io(&p, e))?;
                read_scan_csv(f, &p)
            };
            let one = read(1)?;
            let two = if r.order >= 2 && one.len() >= 2 {
                read(2)?
            } else {
                Vec::new()
            };
            let title = match r.name.as_str() {
                "region" => "Response: region (North=1, South=2)".to_string(),
                "status" => "Response: status (Urban=1, Suburban=2)".to_string(),
                other => format!("Response: {other}"),
            };
            let report = factor_report(&title, &one, &two, r.top, r.bottom)
                .map_err(|e| e.in_stage("report", r.name.clone()))?;
            for w in &report.warnings {
                warn!("report {}: {w}", r.name);
            }
            written.push(write_file(
                &self.artifact(&format!("report_{}.txt", r.name)),
                report.to_text(),
            )?);
            written.push(write_file(
                &self.artifact(&format!("report_{}.md", r.name)),
                report.to_markdown(),
            )?);
        }
        Ok(written)
    }

    fn cluster(&self) -> Result<Vec<PathBuf>> {
        let table = self.read_features()?;
        let mut written = Vec::new();
        for c in &self.cfg.cluster {
            let (tree, excluded) = hcluster_ward(&table, &c.columns)
                .map_err(|e| e.in_stage("cluster", c.name.clone()))?;
            if !excluded.is_empty() {
                warn!(
                    "cluster {}: {} units with NA excluded: {}",
                    c.name,
                    excluded.len(),
                    excluded.join(" ")
                );
            }
            if !tree.is_monotone() {
                warn!("cluster {}: merge heights are not monotone", c.name);
            }
            let codes = leaf_codes(&tree);
            let mut code_csv = String::from("leaf_id,unit_id,code\n");
            for (i, (unit, code)) in tree.leaves.iter().zip(&codes.codes).enumerate() {
                code_csv.push_str(&format!("{i},{unit},{code}\n"));
            }
            written.push(write_file(
                &self.artifact(&format!("tree_{}.csv", c.name)),
                tree.to_csv(),
            )?);
            written.push(write_file(
                &self.artifact(&format!("codes_{}.csv", c.name)),
                code_csv,
            )?);
            written.push(write_file(
                &self.artifact(&format!("similarity_{}.csv", c.name)),
                similarity_csv(&tree, &codes),
            )?);
            written.push(write_file(
                &self.artifact(&format!("heatmap_{}.svg", c.name)),
                heatmap_svg(&tree, &codes),
            )?);
        }
        Ok(written)
    }
}

/// Fused labels as stored in the feature table (NA for label 0).
fn fused_categories(column: &[Option<f64>]) -> Vec<u8> {
    column
        .iter()
        .map(|v| v.map_or(NA_CATEGORY, |x| x as u8))
        .collect()
}

/// Writes `manifest.txt`: `sha256  relative/path` for every other file in
/// `dir`, sorted by path.
pub fn write_manifest(dir: &Path) -> Result<PathBuf> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| Error::io(&d, e))? {
            let path = entry.map_err(|e| Error::io(&d, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(dir)
                    .expect("inside dir")
                    .to_string_lossy()
                    .replace('\\', "/");
                if rel != MANIFEST {
                    files.push((rel, path));
                }
            }
        }
    }
    files.sort();
    let mut text = String::new();
    for (rel, path) in files {
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        text.push_str(&format!("{}  {rel}\n", hex::encode(Sha256::digest(&bytes))));
    }
    write_file(&dir.join(MANIFEST), text)
}
