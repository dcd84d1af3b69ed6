//! Learner plug-ins and the reference pool-selection learner.
//!
//! `PoolSelectLearner` is a stand-in for margin-based selection schemes: it
//! draws a large pool of random origin-crossing candidates and keeps the
//! ones that best separate differently-labelled pairs while keeping
//! same-label pairs together. It is not S-LSH. It exists so the lift can be
//! exercised on a learner that actually looks at labels.
//!
//! A minimal-loss-hashing style learner slots in the same way: implement
//! [`OriginLearner`] returning unit normals, then either call
//! [`origin_planes`] or [`crate::lift::lift_learner`].

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::bitcode::BitCode;
use crate::error::{Error, Result};
use crate::eval::SameLabel;
use crate::lift::{random_unit_normals, OriginLearner};
use crate::rng;
use crate::types::{check_dim, dot, Hyperplane};

const POOL_DOMAIN: u64 = 0x706f_6f6c;
const BATCH_DOMAIN: u64 = 0x6261_7463;
const PAIR_DOMAIN: u64 = 0x7061_6972;

/// Upper bound on pairs drawn from each label class per iteration.
pub const MAX_BATCH: usize = 1024;

pub type Pair = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LearnerConfig {
    pub pool_size: usize,
    pub iterations: usize,
    pub target_bits: usize,
    pub rng_seed: u64,
}

impl LearnerConfig {
    /// Pool of 10^4 candidates scored over 10^4 iterations.
    pub fn new(target_bits: usize, rng_seed: u64) -> Self {
        Self {
            pool_size: 10_000,
            iterations: 10_000,
            target_bits,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_bits == 0 || self.pool_size < self.target_bits {
            return Err(Error::InvalidParameter(format!(
                "need pool_size >= target_bits >= 1 (pool {}, target {})",
                self.pool_size, self.target_bits
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Output of [`learn_pool_select`].
#[derive(Clone, Debug, PartialEq)]
pub struct PoolSelection {
    /// Selected unit normals, in pool order.
    pub normals: Vec<Vec<f64>>,
    /// Pool position of each selected normal (ascending).
    pub pool_indices: Vec<usize>,
    /// Score of every pool candidate.
    pub scores: Vec<f64>,
}

/// Scores `pool_size` random origin-crossing candidates and keeps the
/// `target_bits` best.
///
/// Each iteration draws `min(1024, available)` pairs of each kind without
/// replacement. A candidate's score is the mean over iterations of
/// (fraction of diff-label pairs it splits) − (fraction of same-label pairs
/// it splits). Ties go to the lower pool index.
pub fn learn_pool_select(
    config: &LearnerConfig,
    learning_data: &[Vec<f64>],
    same_label_pairs: &[Pair],
    diff_label_pairs: &[Pair],
) -> Result<PoolSelection> {
    config.validate()?;
    if same_label_pairs.is_empty() && diff_label_pairs.is_empty() {
        return Err(Error::NoPairs);
    }
    let n = learning_data.len();
    let dim = learning_data.first().map(Vec::len).ok_or(Error::TooFewVectors {
        needed: 2,
        found: 0,
    })?;
    for (i, x) in learning_data.iter().enumerate() {
        check_dim(dim, x.len()).map_err(|e| Error::at(i, e))?;
    }
    for &(a, b) in same_label_pairs.iter().chain(diff_label_pairs) {
        if a >= n || b >= n || a == b {
            return Err(Error::InvalidParameter(format!(
                "pair ({a}, {b}) invalid for {n} vectors"
            )));
        }
    }

    let pool = random_unit_normals(dim, config.pool_size, rng::derive(config.rng_seed, POOL_DOMAIN))?;

    // How often each pair is drawn across all iterations. Scores are linear
    // in these counts, so one weighted pass equals scoring every batch.
    let mut batch_rng = rng::seeded(rng::derive(config.rng_seed, BATCH_DOMAIN));
    let same_counts = draw_counts(&mut batch_rng, same_label_pairs.len(), config.iterations);
    let diff_counts = draw_counts(&mut batch_rng, diff_label_pairs.len(), config.iterations);
    let same_weighted = weighted(same_label_pairs, &same_counts);
    let diff_weighted = weighted(diff_label_pairs, &diff_counts);
    let same_batch = same_label_pairs.len().min(MAX_BATCH) as f64;
    let diff_batch = diff_label_pairs.len().min(MAX_BATCH) as f64;
    let iterations = config.iterations as f64;

    let scores: Vec<f64> = pool
        .par_iter()
        .map(|normal| {
            let signs = BitCode::from_bits(learning_data.iter().map(|x| dot(normal, x) > 0.0));
            let split = |pairs: &[(usize, usize, u64)]| -> u64 {
                pairs
                    .iter()
                    .filter(|(a, b, _)| signs.get(*a) != signs.get(*b))
                    .map(|(_, _, c)| c)
                    .sum()
            };
            let mut score = 0.0;
            if !diff_weighted.is_empty() {
                score += split(&diff_weighted) as f64 / diff_batch;
            }
            if !same_weighted.is_empty() {
                score -= split(&same_weighted) as f64 / same_batch;
            }
            score / iterations
        })
        .collect();

    let mut ranked: Vec<usize> = (0..pool.len()).collect();
    ranked.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut pool_indices = ranked[..config.target_bits].to_vec();
    pool_indices.sort_unstable();
    let normals = pool_indices.iter().map(|&i| pool[i].clone()).collect();
    Ok(PoolSelection {
        normals,
        pool_indices,
        scores,
    })
}

fn draw_counts<R: Rng>(rng: &mut R, available: usize, iterations: usize) -> Vec<u64> {
    let mut counts = vec![0u64; available];
    if available == 0 {
        return counts;
    }
    let batch = available.min(MAX_BATCH);
    for _ in 0..iterations {
        if batch == available {
            counts.iter_mut().for_each(|c| *c += 1);
        } else {
            for i in index::sample(rng, available, batch) {
                counts[i] += 1;
            }
        }
    }
    counts
}

fn weighted(pairs: &[Pair], counts: &[u64]) -> Vec<(usize, usize, u64)> {
    pairs
        .iter()
        .zip(counts)
        .filter(|(_, &c)| c > 0)
        .map(|(&(a, b), &c)| (a, b, c))
        .collect()
}

/// [`learn_pool_select`] packaged as an [`OriginLearner`], so it can be run
/// directly or through the lift. Pair indices refer to positions in the
/// point list handed to `learn`.
#[derive(Clone, Debug)]
pub struct PoolSelectLearner {
    pub config: LearnerConfig,
    pub same_label_pairs: Vec<Pair>,
    pub diff_label_pairs: Vec<Pair>,
}

impl OriginLearner for PoolSelectLearner {
    fn learn(&self, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        Ok(learn_pool_select(&self.config, points, &self.same_label_pairs, &self.diff_label_pairs)?.normals)
    }
}

/// Runs `learner` in the data space and wraps its normals as planes
/// through the origin.
pub fn origin_planes<L: OriginLearner + ?Sized>(learner: &L, data: &[Vec<f64>]) -> Result<Vec<Hyperplane>> {
    learner
        .learn(data)?
        .into_iter()
        .enumerate()
        .map(|(i, n)| Hyperplane::through_origin(n).map_err(|e| Error::at(i, e)))
        .collect()
}

/// Mean of `|b|` over the planes.
pub fn mean_abs_offset(planes: &[Hyperplane]) -> Result<f64> {
    if planes.is_empty() {
        return Err(Error::InvalidParameter("mean_abs_offset of no planes".into()));
    }
    Ok(planes.iter().map(|h| h.offset().abs()).sum::<f64>() / planes.len() as f64)
}

/// Builds same/diff pair lists over `n` points for the pool learner.
///
/// Small problems enumerate every pair; larger ones draw random pairs until
/// each list holds `max_pairs` entries (or a draw budget runs out). Lists
/// longer than `max_pairs` are subsampled. Points `relation` marks as
/// unlabelled are left out.
pub fn sample_pairs<S: SameLabel + ?Sized>(
    relation: &S,
    n: usize,
    max_pairs: usize,
    seed: u64,
) -> (Vec<Pair>, Vec<Pair>) {
    let mut rng = rng::seeded(rng::derive(seed, PAIR_DOMAIN));
    let labelled: Vec<usize> = (0..n).filter(|&i| relation.is_labelled(i)).collect();
    let m = labelled.len();
    let total = m * m.saturating_sub(1) / 2;
    let (mut same, mut diff) = (Vec::new(), Vec::new());
    if total <= 4 * max_pairs.max(1) || total <= 1_000_000 {
        for (ai, &a) in labelled.iter().enumerate() {
            for &b in &labelled[ai + 1..] {
                if relation.same(a, b) {
                    same.push((a, b));
                } else {
                    diff.push((a, b));
                }
            }
        }
        let mut cap = |v: Vec<Pair>| -> Vec<Pair> {
            if v.len() <= max_pairs {
                v
            } else {
                let mut picked = index::sample(&mut rng, v.len(), max_pairs).into_vec();
                picked.sort_unstable();
                picked.into_iter().map(|i| v[i]).collect()
            }
        };
        same = cap(same);
        diff = cap(diff);
    } else {
        let budget = 50 * max_pairs;
        for _ in 0..budget {
            if same.len() >= max_pairs && diff.len() >= max_pairs {
                break;
            }
            let a = labelled[rng.random_range(0..m)];
            let b = labelled[rng.random_range(0..m)];
            if a == b {
                continue;
            }
            let pair = (a.min(b), a.max(b));
            if relation.same(a, b) {
                if same.len() < max_pairs {
                    same.push(pair);
                }
            } else if diff.len() < max_pairs {
                diff.push(pair);
            }
        }
    }
    (same, diff)
}
