//! Retrieval quality: distance-based pair labelling, precision, recall,
//! error rate and the L2/Hamming correlation.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;

use crate::bitcode::BitCode;
use crate::error::{Error, Result};
use crate::hashing::{encode_all, encode_projected, search};
use crate::rng;
use crate::types::{check_dim, l2, squared_l2, HashModel};

const CORRELATE_DOMAIN: u64 = 0x636f_7272;
const LABEL_DOMAIN: u64 = 0x6c61_6265;

/// Which split a dataset element belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    Learn,
    Database,
    Query,
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "learn" | "l" | "train" => Ok(Split::Learn),
            "database" | "db" | "d" => Ok(Split::Database),
            "query" | "q" => Ok(Split::Query),
            other => Err(Error::InvalidParameter(format!("unknown split '{other}'"))),
        }
    }
}

/// Decides whether two items (by index) count as relevant to each other.
pub trait SameLabel: Sync {
    fn same(&self, a: usize, b: usize) -> bool;

    /// Unlabelled items are never relevant to anything.
    fn is_labelled(&self, _i: usize) -> bool {
        true
    }
}

/// Integer class labels; `-1` marks an unlabelled item.
#[derive(Clone, Copy, Debug)]
pub struct Labels<'a>(pub &'a [i64]);

impl SameLabel for Labels<'_> {
    fn same(&self, a: usize, b: usize) -> bool {
        let (x, y) = (self.0[a], self.0[b]);
        x >= 0 && x == y
    }

    fn is_labelled(&self, i: usize) -> bool {
        self.0[i] >= 0
    }
}

/// A symmetric relation stored as unordered index pairs. It is not closed
/// under transitivity.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairRelation {
    pairs: Vec<(usize, usize)>,
    lookup: HashSet<(usize, usize)>,
}

impl PairRelation {
    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Self {
        let mut lookup = HashSet::new();
        for (a, b) in pairs {
            if a != b {
                lookup.insert((a.min(b), a.max(b)));
            }
        }
        let mut pairs: Vec<_> = lookup.iter().copied().collect();
        pairs.sort_unstable();
        Self { pairs, lookup }
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.lookup.contains(&(a.min(b), a.max(b)))
    }

    /// Pairs `(i, j)` with `i < j`, sorted.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Rewrites every index through `map`.
    pub fn remap(&self, map: &[usize]) -> Self {
        Self::from_pairs(self.pairs.iter().map(|&(a, b)| (map[a], map[b])))
    }
}

impl SameLabel for PairRelation {
    fn same(&self, a: usize, b: usize) -> bool {
        self.contains(a, b)
    }
}

/// `floor(x)` / `ceil(x)` that treat values within 1e-9 (relative) of an
/// integer as that integer, so `0.1 * 50` gives 5 either way.
fn snap(x: f64) -> Option<f64> {
    let r = x.round();
    ((x - r).abs() <= 1e-9 * x.abs().max(1.0)).then_some(r)
}

/// Number of items returned per query: `ceil(acquisition * db_len)`, at
/// least 1.
pub fn retrieval_count(acquisition: f64, db_len: usize) -> Result<usize> {
    if !(acquisition > 0.0 && acquisition <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "acquisition {acquisition} not in (0, 1]"
        )));
    }
    if db_len == 0 {
        return Err(Error::InvalidParameter("empty database".into()));
    }
    let x = acquisition * db_len as f64;
    let k = snap(x).unwrap_or_else(|| x.ceil()) as usize;
    Ok(k.clamp(1, db_len))
}

/// Marks the `floor(top_fraction * n(n-1)/2)` closest pairs (by L2, ties by
/// index) as same-label.
///
/// Works in bounded memory: a sampled distance quantile picks a threshold,
/// one exact pass collects every pair at or under it, and the threshold
/// grows until enough pairs qualify. The result does not depend on the
/// sampling.
pub fn auto_label_pairs(data: &[Vec<f64>], top_fraction: f64) -> Result<PairRelation> {
    if !(top_fraction > 0.0 && top_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "top fraction {top_fraction} not in (0, 1)"
        )));
    }
    let n = data.len();
    if n < 2 {
        return Err(Error::TooFewVectors { needed: 2, found: n });
    }
    let dim = data[0].len();
    for (i, x) in data.iter().enumerate() {
        check_dim(dim, x.len()).map_err(|e| Error::at(i, e))?;
    }
    let total = n * (n - 1) / 2;
    let x = top_fraction * total as f64;
    let wanted = snap(x).unwrap_or_else(|| x.floor()) as usize;
    if wanted == 0 {
        return Ok(PairRelation::default());
    }

    let mut rng = rng::seeded(rng::derive(n as u64, LABEL_DOMAIN));
    let sample_size = total.min(100_000);
    let mut sample: Vec<f64> = (0..sample_size)
        .map(|_| {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            squared_l2(&data[a], &data[b])
        })
        .collect();
    sample.sort_unstable_by(f64::total_cmp);

    let mut fraction = (1.5 * wanted as f64 / total as f64 + 20.0 / sample_size as f64).min(1.0);
    loop {
        let threshold = if fraction >= 1.0 {
            f64::INFINITY
        } else {
            sample[((fraction * sample_size as f64) as usize).min(sample_size - 1)]
        };
        let mut candidates: Vec<(f64, usize, usize)> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let xi = &data[i];
                (i + 1..n).filter_map(move |j| {
                    let d = squared_l2(xi, &data[j]);
                    (d <= threshold).then_some((d, i, j))
                })
            })
            .collect();
        if candidates.len() >= wanted {
            candidates.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            candidates.truncate(wanted);
            return Ok(PairRelation::from_pairs(candidates.into_iter().map(|(_, i, j)| (i, j))));
        }
        fraction = (fraction * 2.0).min(1.0);
    }
}

/// Vectors with optional labels and a split assignment per element.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    vectors: Vec<Vec<f64>>,
    labels: Option<Vec<i64>>,
    splits: Vec<Split>,
}

impl LabeledDataset {
    pub fn new(vectors: Vec<Vec<f64>>, labels: Option<Vec<i64>>, splits: Vec<Split>) -> Result<Self> {
        check_dim(vectors.len(), splits.len())?;
        if let Some(l) = &labels {
            check_dim(vectors.len(), l.len())?;
        }
        Ok(Self {
            vectors,
            labels,
            splits,
        })
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    /// Element indices in `split`, ascending.
    pub fn indices(&self, split: Split) -> Vec<usize> {
        (0..self.splits.len()).filter(|&i| self.splits[i] == split).collect()
    }

    pub fn subset(&self, split: Split) -> Vec<Vec<f64>> {
        self.indices(split).into_iter().map(|i| self.vectors[i].clone()).collect()
    }

    /// Same-label relation over database ∪ query built from the `top_fraction`
    /// closest pairs. Indices in the result are dataset indices.
    pub fn auto_label(&self, top_fraction: f64) -> Result<PairRelation> {
        let members: Vec<usize> = (0..self.splits.len())
            .filter(|&i| self.splits[i] != Split::Learn)
            .collect();
        let data: Vec<Vec<f64>> = members.iter().map(|&i| self.vectors[i].clone()).collect();
        Ok(auto_label_pairs(&data, top_fraction)?.remap(&members))
    }
}

/// Aggregate retrieval metrics for one model at one acquisition rate.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub bit_count: usize,
    pub acquisition: f64,
    /// Items retrieved per query.
    pub k: usize,
    pub precision: f64,
    /// Mean over queries that have at least one relevant database item.
    pub recall: Option<f64>,
    /// Fraction of those queries that retrieved no relevant item.
    pub error_rate: Option<f64>,
    pub pearson_l2_hamming: Option<f64>,
    pub queries: usize,
    /// Queries without any relevant database item; left out of recall and
    /// error rate.
    pub excluded_queries: usize,
}

/// Per-query retrieval counts, before averaging.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueryOutcome {
    pub retrieved_relevant: usize,
    pub relevant_in_db: usize,
}

/// Hamming top-k retrieval for every query, scored against `relation`
/// (which is indexed by dataset position).
pub fn query_outcomes<S: SameLabel + ?Sized>(
    model: &HashModel,
    dataset: &LabeledDataset,
    relation: &S,
    k: usize,
) -> Result<Vec<QueryOutcome>> {
    let db_idx = dataset.indices(Split::Database);
    let q_idx = dataset.indices(Split::Query);
    let db_codes = encode_all(model, &dataset.subset(Split::Database))?;
    let q_codes = encode_all(model, &dataset.subset(Split::Query))?;
    q_idx
        .par_iter()
        .zip(q_codes.par_iter())
        .map(|(&qi, code)| {
            let hits = search(code, &db_codes, k)?;
            let retrieved_relevant = hits.iter().filter(|h| relation.same(qi, db_idx[h.index])).count();
            let relevant_in_db = db_idx.iter().filter(|&&di| relation.same(qi, di)).count();
            Ok(QueryOutcome {
                retrieved_relevant,
                relevant_in_db,
            })
        })
        .collect()
}

/// Precision, recall and error rate of Hamming retrieval with
/// `k = ceil(acquisition * |database|)`.
pub fn evaluate<S: SameLabel + ?Sized>(
    model: &HashModel,
    dataset: &LabeledDataset,
    relation: &S,
    acquisition: f64,
) -> Result<EvalReport> {
    let db_len = dataset.indices(Split::Database).len();
    let q_len = dataset.indices(Split::Query).len();
    if db_len == 0 || q_len == 0 {
        return Err(Error::InvalidParameter("database and query splits must be non-empty".into()));
    }
    let k = retrieval_count(acquisition, db_len)?;
    let outcomes = query_outcomes(model, dataset, relation, k)?;

    let precision = outcomes.iter().map(|o| o.retrieved_relevant as f64 / k as f64).sum::<f64>() / q_len as f64;
    let eligible: Vec<&QueryOutcome> = outcomes.iter().filter(|o| o.relevant_in_db > 0).collect();
    let (recall, error_rate) = if eligible.is_empty() {
        (None, None)
    } else {
        let m = eligible.len() as f64;
        let recall = eligible
            .iter()
            .map(|o| o.retrieved_relevant as f64 / o.relevant_in_db as f64)
            .sum::<f64>()
            / m;
        let misses = eligible.iter().filter(|o| o.retrieved_relevant == 0).count();
        (Some(recall), Some(misses as f64 / m))
    };
    Ok(EvalReport {
        bit_count: model.bit_count(),
        acquisition,
        k,
        precision,
        recall,
        error_rate,
        pearson_l2_hamming: None,
        queries: q_len,
        excluded_queries: q_len - eligible.len(),
    })
}

/// Pearson coefficient plus the raw `(l2, hamming)` points behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct Correlation {
    pub pearson: f64,
    pub scatter: Vec<(f64, u32)>,
}

/// Draws `n_pairs` random pairs (with replacement, never an item with
/// itself) and correlates their L2 distance in the model's projected space
/// with the Hamming distance of their codes.
pub fn correlate(model: &HashModel, data: &[Vec<f64>], n_pairs: usize, rng_seed: u64) -> Result<Correlation> {
    if n_pairs < 2 {
        return Err(Error::InvalidParameter("need at least 2 pairs".into()));
    }
    let pairs = sample_index_pairs(data.len(), n_pairs, rng_seed)?;
    let projected = model.preprocess().transform_all(data)?;
    let codes: Vec<BitCode> = projected.par_iter().map(|y| encode_projected(model, y)).collect();
    let scatter: Vec<(f64, u32)> = pairs
        .iter()
        .map(|&(a, b)| (l2(&projected[a], &projected[b]), codes[a].distance_unchecked(&codes[b])))
        .collect();
    let xs: Vec<f64> = scatter.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = scatter.iter().map(|p| p.1 as f64).collect();
    Ok(Correlation {
        pearson: pearson(&xs, &ys)?,
        scatter,
    })
}

/// The pair sequence [`correlate`] uses for `(n, n_pairs, seed)`.
pub fn sample_index_pairs(n: usize, n_pairs: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    if n < 2 {
        return Err(Error::TooFewVectors { needed: 2, found: n });
    }
    let mut rng = rng::seeded(rng::derive(seed, CORRELATE_DOMAIN));
    Ok((0..n_pairs)
        .map(|_| {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            (a, b)
        })
        .collect())
}

/// Sample Pearson correlation. Fails when either side has zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_dim(xs.len(), ys.len())?;
    if xs.len() < 2 {
        return Err(Error::TooFewVectors {
            needed: 2,
            found: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::Degenerate("L2 distances have zero variance"));
    }
    if syy == 0.0 {
        return Err(Error::Degenerate("Hamming distances have zero variance"));
    }
    Ok(sxy / (sxx * syy).sqrt())
}
