use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stats::{derive_seed_index, mean, population_sd};
use crate::table::FeatureTable;

pub const DEFAULT_K: usize = 4;
pub const DEFAULT_RESTARTS: usize = 100;
pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansOptions {
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions {
            k: DEFAULT_K,
            seed: 0,
            restarts: DEFAULT_RESTARTS,
        }
    }
}

/// A block of features fused into one categorical column.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedFeature {
    pub name: String,
    pub source_columns: Vec<String>,
    pub k: usize,
    /// One per table row: 1..=k, or 0 when any source value is NA.
    pub labels: Vec<u8>,
    /// Cluster means in the original units, indexed by label - 1.
    pub centroids: Vec<Vec<f64>>,
    pub seed: u64,
    /// Within-cluster sum of squares in standardized units.
    pub wcss: f64,
}

/// Result of one Lloyd run on standardized points.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub wcss: f64,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(p, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p, &points[chosen[0]]))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            while d2[pick] == 0.0 {
                pick -= 1;
            }
            pick
        } else {
            // fewer distinct points than k: any unused row
            let unused: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            unused[rng.gen_range(0..unused.len())]
        };
        chosen.push(next);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

/// One k-means++ seeded Lloyd run. Stops when assignments repeat or after
/// [`MAX_ITERATIONS`]; an empty cluster keeps its previous centroid.
pub fn lloyd(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> KMeansFit {
    let mut centroids = plus_plus_init(points, k, rng);
    let mut assignments: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
    let dim = points[0].len();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
        if next == assignments || iterations >= MAX_ITERATIONS {
            assignments = next;
            break;
        }
        assignments = next;
    }
    let wcss = points
        .iter()
        .zip(&assignments)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum();
    KMeansFit {
        assignments,
        centroids,
        wcss,
        iterations,
    }
}

/// Best of `restarts` runs by WCSS, ties to the lowest restart index. Each
/// restart draws from its own stream derived from `(seed, restart)`.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, restarts: usize) -> Result<KMeansFit> {
    if k == 0 || k > u8::MAX as usize {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must be in 1..=255"
        )));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    if points.len() < k {
        return Err(Error::NotEnoughRows {
            have: points.len(),
            need: k,
        });
    }
    let fits: Vec<KMeansFit> = (0..restarts as u64)
        .into_par_iter()
        .map(|r| {
            lloyd(
                points,
                k,
                &mut ChaCha8Rng::seed_from_u64(derive_seed_index(seed, r)),
            )
        })
        .collect();
    let best = fits
        .into_iter()
        .reduce(|best, f| if f.wcss < best.wcss { f } else { best })
        .expect("restarts >= 1");
    Ok(best)
}

/// Z-scores each column (population sd; a constant column is only centred).
pub fn standardize(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = points.first().map_or(0, Vec::len);
    let stats: Vec<(f64, f64)> = (0..dim)
        .map(|j| {
            let col: Vec<f64> = points.iter().map(|p| p[j]).collect();
            let sd = population_sd(&col);
            (mean(&col), if sd > 0.0 { sd } else { 1.0 })
        })
        .collect();
    points
        .iter()
        .map(|p| {
            p.iter()
                .zip(&stats)
                .map(|(v, (m, s))| (v - m) / s)
                .collect()
        })
        .collect()
}

/// Fuses `columns` of `table` into one categorical feature. Labels are
/// renumbered by first occurrence; clusters left empty are dropped.
pub fn kmeans_fuse(
    table: &FeatureTable,
    name: &str,
    columns: &[String],
    opts: KMeansOptions,
) -> Result<FusedFeature> {
    if columns.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "fusion {name}: no source columns"
        )));
    }
    let complete = table.complete_rows(columns)?;
    let raw: Vec<Vec<f64>> = complete.iter().map(|(_, v)| v.clone()).collect();
    let fit = kmeans(&standardize(&raw), opts.k, opts.seed, opts.restarts)?;

    let mut relabel = vec![0u8; opts.k];
    let mut next = 0u8;
    for &a in &fit.assignments {
        if relabel[a] == 0 {
            next += 1;
            relabel[a] = next;
        }
    }
    let mut labels = vec![0u8; table.n_rows()];
    let mut sums = vec![vec![0.0; columns.len()]; next as usize];
    let mut counts = vec![0usize; next as usize];
    for ((row, values), &a) in complete.iter().zip(&fit.assignments) {
        let label = relabel[a];
        labels[*row] = label;
        counts[label as usize - 1] += 1;
        for (s, v) in sums[label as usize - 1].iter_mut().zip(values) {
            *s += v;
        }
    }
    let centroids = sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| s.into_iter().map(|v| v / c as f64).collect())
        .collect();
    Ok(FusedFeature {
        name: name.to_string(),
        source_columns: columns.to_vec(),
        k: opts.k,
        labels,
        centroids,
        seed: opts.seed,
        wcss: fit.wcss,
    })
}
