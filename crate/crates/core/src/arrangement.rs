//! Region counts of hyperplane arrangements in low dimension.
//!
//! Exact counting walks the tree of partial sign vectors and keeps a branch
//! only while the open polyhedron `{x : s_i (n_i·x + b_i) > 0}` is nonempty.
//! Nonemptiness is decided by a small linear program: maximize the margin
//! `t` subject to `s_i (n_i·x + b_i) >= t` and `t <= 1`; the cell exists iff
//! the optimum is positive.
//!
//! For `m` planes in general position in `R^d` the counts are
//! `sum_{i<=d} C(m, i)` with offsets and `2 sum_{i<d} C(m-1, i)` when every
//! plane passes through the origin.

use std::collections::HashSet;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bitcode::BitCode;
use crate::error::{Error, Result};
use crate::lift::random_unit_normals;
use crate::rng;
use crate::types::{check_dim, Hyperplane};

pub const MAX_EXACT_DIM: usize = 3;
pub const MAX_EXACT_PLANES: usize = 20;

/// Cells with an optimal margin at or below this are treated as empty.
const MARGIN_EPS: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-12;

const NORMAL_DOMAIN: u64 = 0x6e6f_726d;
const OFFSET_DOMAIN: u64 = 0x6f66_6673;
const RETRY_DOMAIN: u64 = 0x7265_7472;
const SAMPLE_CHUNK: usize = 4096;

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Regions of `m` generic planes through the origin of `R^d`.
pub fn central_region_count(dim: usize, m: usize) -> u64 {
    if m == 0 {
        return 1;
    }
    2 * (0..dim as u64).map(|i| binomial(m as u64 - 1, i)).sum::<u64>()
}

/// Regions of `m` planes in general position in `R^d`.
pub fn generic_region_count(dim: usize, m: usize) -> u64 {
    (0..=dim as u64).map(|i| binomial(m as u64, i)).sum()
}

fn check_planes(planes: &[Hyperplane], dim: usize) -> Result<()> {
    for (i, h) in planes.iter().enumerate() {
        check_dim(dim, h.dim()).map_err(|e| Error::at(i, e))?;
    }
    Ok(())
}

/// Exact number of nonempty cells, for `dim <= 3` and at most 20 planes.
pub fn count_regions_exact(planes: &[Hyperplane], dim: usize) -> Result<u64> {
    if dim == 0 || dim > MAX_EXACT_DIM {
        return Err(Error::InvalidParameter(format!(
            "exact counting supports dimensions 1..={MAX_EXACT_DIM}, got {dim}"
        )));
    }
    if planes.len() > MAX_EXACT_PLANES {
        return Err(Error::InvalidParameter(format!(
            "exact counting supports at most {MAX_EXACT_PLANES} planes, got {}",
            planes.len()
        )));
    }
    check_planes(planes, dim)?;
    let mut signs = Vec::with_capacity(planes.len());
    Ok(count_from(planes, dim, &mut signs))
}

fn count_from(planes: &[Hyperplane], dim: usize, signs: &mut Vec<f64>) -> u64 {
    if signs.len() == planes.len() {
        return 1;
    }
    let mut total = 0;
    for s in [1.0, -1.0] {
        signs.push(s);
        if cell_margin(&planes[..signs.len()], signs, dim) > MARGIN_EPS {
            total += count_from(planes, dim, signs);
        }
        signs.pop();
    }
    total
}

/// Largest `t <= 1` such that some `x` has `s_i (n_i·x + b_i) >= t` for all
/// `i`. Positive iff the open cell with these signs is nonempty.
fn cell_margin(planes: &[Hyperplane], signs: &[f64], dim: usize) -> f64 {
    // Shift t = t0 + u with u >= 0 so the origin of (p, q, u) is feasible:
    // every right-hand side below is then non-negative.
    let t0 = planes
        .iter()
        .zip(signs)
        .map(|(h, s)| s * h.offset())
        .fold(1.0f64, f64::min);

    // Variables: p (dim), q (dim), u; x = p - q.
    let vars = 2 * dim + 1;
    let mut a = Vec::with_capacity(planes.len() + 1);
    let mut b = Vec::with_capacity(planes.len() + 1);
    for (h, &s) in planes.iter().zip(signs) {
        let mut row = vec![0.0; vars];
        for (j, &nj) in h.normal().iter().enumerate() {
            row[j] = -s * nj;
            row[dim + j] = s * nj;
        }
        row[2 * dim] = 1.0;
        a.push(row);
        b.push(s * h.offset() - t0);
    }
    let mut cap = vec![0.0; vars];
    cap[2 * dim] = 1.0;
    a.push(cap);
    b.push(1.0 - t0);

    let mut c = vec![0.0; vars];
    c[2 * dim] = 1.0;
    t0 + maximize(&a, &b, &c)
}

/// Dense primal simplex for `max c·v s.t. A v <= b, v >= 0` with `b >= 0`,
/// using Bland's rule. The problems here are always bounded.
fn maximize(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> f64 {
    let rows = a.len();
    let vars = c.len();
    let cols = vars + rows;
    // Row-major tableau with the right-hand side in the last column.
    let mut t = vec![vec![0.0; cols + 1]; rows];
    for i in 0..rows {
        t[i][..vars].copy_from_slice(&a[i]);
        t[i][vars + i] = 1.0;
        t[i][cols] = b[i].max(0.0);
    }
    let mut obj = vec![0.0; cols + 1];
    for j in 0..vars {
        obj[j] = -c[j];
    }
    let mut basis: Vec<usize> = (vars..cols).collect();

    while let Some(enter) = (0..cols).find(|&j| obj[j] < -PIVOT_EPS) {
        let mut leave = None;
        let mut best = f64::INFINITY;
        for i in 0..rows {
            if t[i][enter] > PIVOT_EPS {
                let ratio = t[i][cols] / t[i][enter];
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - PIVOT_EPS || (ratio <= best + PIVOT_EPS && basis[i] < basis[l]),
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(r) = leave else {
            // Unbounded; cannot happen with the t <= 1 row present.
            return f64::INFINITY;
        };
        let pivot = t[r][enter];
        for v in t[r].iter_mut() {
            *v /= pivot;
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r {
                let f = row[enter];
                if f != 0.0 {
                    for (v, p) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * p;
                    }
                }
            }
        }
        let f = obj[enter];
        for (v, p) in obj.iter_mut().zip(&pivot_row) {
            *v -= f * p;
        }
        basis[r] = enter;
    }
    obj[cols]
}

/// Distinct sign vectors among `n_samples` points drawn uniformly from the
/// ball of radius `sample_radius`. A lower bound on the region count.
///
/// Points come in chunks of 4096, chunk `c` from its own random stream, so
/// the first `n` points are the same for every `n_samples >= n` and the
/// count never decreases as `n_samples` grows.
pub fn count_regions_sampled(
    planes: &[Hyperplane],
    dim: usize,
    n_samples: usize,
    sample_radius: f64,
    rng_seed: u64,
) -> Result<usize> {
    if dim == 0 || n_samples == 0 || !(sample_radius > 0.0 && sample_radius.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sampled counting needs dim >= 1, n_samples >= 1 and a positive radius (got {dim}, {n_samples}, {sample_radius})"
        )));
    }
    check_planes(planes, dim)?;
    let chunks = n_samples.div_ceil(SAMPLE_CHUNK);
    let sets: Vec<HashSet<BitCode>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(rng_seed, c as u64);
            let len = SAMPLE_CHUNK.min(n_samples - c * SAMPLE_CHUNK);
            let mut seen = HashSet::new();
            let mut x = vec![0.0; dim];
            for _ in 0..len {
                sample_ball(&mut rng, dim, sample_radius, &mut x);
                seen.insert(BitCode::from_bits(planes.iter().map(|h| h.eval_unchecked(&x) > 0.0)));
            }
            seen
        })
        .collect();
    let mut all = HashSet::new();
    for s in sets {
        all.extend(s);
    }
    Ok(all.len())
}

fn sample_ball<R: Rng>(rng: &mut R, dim: usize, radius: f64, out: &mut [f64]) {
    loop {
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let n = crate::types::norm(out);
        if n > 1e-300 {
            let u: f64 = rng.random();
            let r = radius * u.powf(1.0 / dim as f64) / n;
            out.iter_mut().for_each(|v| *v *= r);
            return;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArrangementKind {
    /// Every plane passes through the origin.
    Central,
    /// Offsets drawn from the standard normal distribution.
    Offset,
}

impl ArrangementKind {
    pub fn closed_form(self, dim: usize, m: usize) -> u64 {
        match self {
            ArrangementKind::Central => central_region_count(dim, m),
            ArrangementKind::Offset => generic_region_count(dim, m),
        }
    }
}

impl std::str::FromStr for ArrangementKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "central" => Ok(ArrangementKind::Central),
            "offset" => Ok(ArrangementKind::Offset),
            other => Err(Error::InvalidParameter(format!("unknown arrangement mode '{other}'"))),
        }
    }
}

/// `m` random planes in `R^dim`: isotropic unit normals, offsets zero or
/// standard normal.
pub fn random_arrangement(dim: usize, m: usize, kind: ArrangementKind, seed: u64) -> Result<Vec<Hyperplane>> {
    let normals = random_unit_normals(dim, m, rng::derive(seed, NORMAL_DOMAIN))?;
    let mut offsets = rng::seeded(rng::derive(seed, OFFSET_DOMAIN));
    normals
        .into_iter()
        .map(|n| {
            let b = match kind {
                ArrangementKind::Central => 0.0,
                ArrangementKind::Offset => offsets.sample(StandardNormal),
            };
            Hyperplane::new(n, b)
        })
        .collect()
}

/// A random arrangement confirmed to be in general position.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericDraw {
    pub planes: Vec<Hyperplane>,
    /// Seed that produced `planes`.
    pub seed: u64,
    /// Seeds whose draws were rejected as non-generic.
    pub rejected: Vec<u64>,
}

/// Draws random arrangements until the exact region count equals the
/// closed form for `kind`, trying at most `max_attempts` seeds. The first
/// attempt uses `seed` itself. Only available where exact counting is.
pub fn generic_arrangement(
    dim: usize,
    m: usize,
    kind: ArrangementKind,
    seed: u64,
    max_attempts: usize,
) -> Result<GenericDraw> {
    let expected = kind.closed_form(dim, m);
    let mut rejected = Vec::new();
    let mut current = seed;
    for _ in 0..max_attempts.max(1) {
        let planes = random_arrangement(dim, m, kind, current)?;
        if count_regions_exact(&planes, dim)? == expected {
            return Ok(GenericDraw {
                planes,
                seed: current,
                rejected,
            });
        }
        log::warn!("arrangement seed {current} is not in general position; resampling");
        rejected.push(current);
        current = rng::derive(current, RETRY_DOMAIN);
    }
    Err(Error::Degenerate("no generic arrangement within the attempt budget"))
}
