use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::joint_conditional_entropy;
use crate::error::{Error, Result};
use crate::stats::{derive_seed_index, mean, percentile_sorted, sample_sd};

pub const DEFAULT_REPLICATES: usize = 200;

/// Permutation null distribution of the entropy drop from adding a candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDropStats {
    pub replicates: usize,
    pub mean: f64,
    pub sd: f64,
    pub q95: f64,
    pub seed: u64,
}

/// Null distribution of `H(Y|F) - H(Y|F ∪ {π(X)})` over uniformly random
/// permutations `π` of the candidate column. Replicate `r` draws its
/// permutation from a stream seeded by `(seed, r)`, so the result does not
/// depend on how replicates are scheduled.
pub fn noise_threshold(
    y: &[u8],
    existing: &[&[u8]],
    candidate: &[u8],
    replicates: usize,
    seed: u64,
) -> Result<NullDropStats> {
    if replicates == 0 {
        return Err(Error::InvalidArgument(
            "replicates must be at least 1".into(),
        ));
    }
    if candidate.len() != y.len() {
        return Err(Error::LengthMismatch(candidate.len(), y.len()));
    }
    let base = joint_conditional_entropy(y, existing)?;
    let mut drops: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed_index(seed, r as u64));
            let mut shuffled = candidate.to_vec();
            shuffled.shuffle(&mut rng);
            let mut cols: Vec<&[u8]> = existing.to_vec();
            cols.push(&shuffled);
            joint_conditional_entropy(y, &cols).map(|h| base - h)
        })
        .collect::<Result<_>>()?;
    let m = mean(&drops);
    let sd = sample_sd(&drops);
    drops.sort_by(f64::total_cmp);
    Ok(NullDropStats {
        replicates,
        mean: m,
        sd,
        q95: percentile_sorted(&drops, 0.95),
        seed,
    })
}
