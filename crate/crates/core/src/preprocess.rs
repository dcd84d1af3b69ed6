//! Per-component standardization followed by PCA truncation.
//!
//! Statistics are always fitted on the learning split and reused unchanged
//! for database and query vectors. The covariance uses the population (1/n)
//! convention on the standardized data, and the number of retained
//! directions is the smallest `k` whose cumulative contribution ratio
//! reaches the requested threshold (0.80 by default).

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::types::{check_dim, check_finite, dot};

pub const DEFAULT_CONTRIBUTION: f64 = 0.80;

const ORTHONORMAL_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    /// Target cumulative contribution ratio in (0, 1].
    pub contribution: f64,
    /// Keep zero-variance components with unit scale instead of failing.
    pub allow_constant: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            contribution: DEFAULT_CONTRIBUTION,
            allow_constant: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreprocessParams {
    mean: Vec<f64>,
    scale: Vec<f64>,
    /// `k` orthonormal principal directions, each of the raw dimension.
    basis: Vec<Vec<f64>>,
    /// All eigenvalues of the standardized covariance, descending.
    eigenvalues: Vec<f64>,
}

impl PreprocessParams {
    /// Zero mean, unit scale, identity basis: `transform` is the identity.
    /// The eigenvalues are all set to 1.
    pub fn identity(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                e
            })
            .collect();
        Self {
            mean: vec![0.0; dim],
            scale: vec![1.0; dim],
            basis,
            eigenvalues: vec![1.0; dim],
        }
    }

    /// Reassembles parameters from stored parts, checking every structural
    /// invariant.
    pub fn from_parts(
        mean: Vec<f64>,
        scale: Vec<f64>,
        basis: Vec<Vec<f64>>,
        eigenvalues: Vec<f64>,
    ) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("zero input dimension".into()));
        }
        check_dim(dim, scale.len())?;
        check_finite(&mean, "preprocess mean")?;
        check_finite(&scale, "preprocess scale")?;
        check_finite(&eigenvalues, "preprocess eigenvalues")?;
        if scale.iter().any(|&s| s <= 0.0) {
            return Err(Error::InvalidParameter("scale must be strictly positive".into()));
        }
        if basis.len() > dim || eigenvalues.len() < basis.len() {
            return Err(Error::InvalidParameter(format!(
                "{} basis vectors with {} eigenvalues in dimension {dim}",
                basis.len(),
                eigenvalues.len()
            )));
        }
        if eigenvalues.iter().any(|&v| v < 0.0) || eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "eigenvalues must be non-negative and descending".into(),
            ));
        }
        for (i, u) in basis.iter().enumerate() {
            check_dim(dim, u.len())?;
            check_finite(u, "preprocess basis")?;
            for (j, v) in basis.iter().enumerate().take(i + 1) {
                let expected = if i == j { 1.0 } else { 0.0 };
                if (dot(u, v) - expected).abs() > ORTHONORMAL_TOLERANCE {
                    return Err(Error::InvalidParameter(format!(
                        "basis vectors {j} and {i} are not orthonormal"
                    )));
                }
            }
        }
        Ok(Self {
            mean,
            scale,
            basis,
            eigenvalues,
        })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    /// The number of retained principal directions, `k`.
    pub fn output_dim(&self) -> usize {
        self.basis.len()
    }

    /// `(contribution, cumulative contribution)` for each eigenvalue.
    pub fn contributions(&self) -> Vec<(f64, f64)> {
        let total: f64 = self.eigenvalues.iter().sum();
        let mut cumulative = 0.0;
        self.eigenvalues
            .iter()
            .map(|&v| {
                cumulative += v;
                (v / total, cumulative / total)
            })
            .collect()
    }

    /// `(x − mean) / scale`, without the projection.
    pub fn standardize(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.input_dim(), x.len())?;
        check_finite(x, "input vector")?;
        Ok(x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect())
    }

    /// `basis · ((x − mean) / scale)`.
    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.standardize(x)?;
        Ok(self.basis.iter().map(|u| dot(u, &z)).collect())
    }

    pub fn transform_all(&self, data: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        data.par_iter()
            .enumerate()
            .map(|(i, x)| self.transform(x).map_err(|e| Error::at(i, e)))
            .collect()
    }
}

/// Fits standardization and PCA with the default options.
pub fn fit(learning_data: &[Vec<f64>]) -> Result<PreprocessParams> {
    fit_with(learning_data, FitOptions::default())
}

pub fn fit_with(learning_data: &[Vec<f64>], options: FitOptions) -> Result<PreprocessParams> {
    if !(options.contribution > 0.0 && options.contribution <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "contribution ratio {} not in (0, 1]",
            options.contribution
        )));
    }
    let n = learning_data.len();
    if n < 2 {
        return Err(Error::TooFewVectors { needed: 2, found: n });
    }
    let dim = learning_data[0].len();
    if dim == 0 {
        return Err(Error::InvalidParameter("zero-dimensional vectors".into()));
    }
    for (i, x) in learning_data.iter().enumerate() {
        check_dim(dim, x.len()).map_err(|e| Error::at(i, e))?;
        check_finite(x, "learning vector").map_err(|e| Error::at(i, e))?;
    }

    let nf = n as f64;
    let mut mean = vec![0.0; dim];
    for x in learning_data {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= nf;
    }

    let mut var = vec![0.0; dim];
    for x in learning_data {
        for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
            let d = v - m;
            *s += d * d;
        }
    }
    let mut scale = Vec::with_capacity(dim);
    for (j, (v, m)) in var.iter().zip(&mean).enumerate() {
        let sd = (v / nf).sqrt();
        if sd <= 1e-12 * m.abs().max(1.0) {
            if !options.allow_constant {
                return Err(Error::ConstantComponent { index: j });
            }
            scale.push(1.0);
        } else {
            scale.push(sd);
        }
    }

    // Standardized data, stored column-major so every covariance entry is a
    // fixed-order dot product of two columns.
    let columns: Vec<Vec<f64>> = (0..dim)
        .map(|j| {
            learning_data
                .iter()
                .map(|x| (x[j] - mean[j]) / scale[j])
                .collect()
        })
        .collect();
    let upper: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|i| (i..dim).map(|j| dot(&columns[i], &columns[j]) / nf).collect())
        .collect();
    let cov = DMatrix::from_fn(dim, dim, |i, j| {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        upper[a][b - a]
    });

    let eigen = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    // Stable: ties keep the solver's order.
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eigen.eigenvalues[i].max(0.0)).collect();

    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let k = retained_count(&eigenvalues, options.contribution);

    let basis = order[..k]
        .iter()
        .map(|&i| {
            let mut v: Vec<f64> = eigen.eigenvectors.column(i).iter().copied().collect();
            orient(&mut v);
            v
        })
        .collect();

    Ok(PreprocessParams {
        mean,
        scale,
        basis,
        eigenvalues,
    })
}

/// Smallest `k` with `sum(eigenvalues[..k]) >= contribution * total`.
fn retained_count(eigenvalues: &[f64], contribution: f64) -> usize {
    let total: f64 = eigenvalues.iter().sum();
    let target = contribution * total;
    let mut cumulative = 0.0;
    for (i, v) in eigenvalues.iter().enumerate() {
        cumulative += v;
        if cumulative >= target {
            return i + 1;
        }
    }
    eigenvalues.len()
}

/// Flips `v` so its largest-magnitude component (first one on ties) is positive.
fn orient(v: &mut [f64]) {
    let mut pivot = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[pivot].abs() {
            pivot = i;
        }
    }
    if v[pivot] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Ratio of the first to the last retained eigenvalue.
pub fn eigenvalue_ratio(params: &PreprocessParams) -> Result<f64> {
    let k = params.output_dim();
    if k == 0 {
        return Err(Error::InvalidParameter("no retained directions".into()));
    }
    let last = params.eigenvalues[k - 1];
    if last <= 0.0 {
        return Err(Error::ZeroEigenvalue { index: k });
    }
    Ok(params.eigenvalues[0] / last)
}
