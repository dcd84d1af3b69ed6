//! Hyperplanes, lifted hyperplanes and the hash model that ties them to a
//! preprocessing pipeline.

use crate::error::{Error, Result};
use crate::preprocess::PreprocessParams;

/// Tolerance on the unit-norm invariant of hyperplane normals.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Sequential dot product. The summation order is fixed so that results are
/// reproducible bit for bit.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn squared_l2(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

pub fn l2(a: &[f64], b: &[f64]) -> f64 {
    squared_l2(a, b).sqrt()
}

pub(crate) fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// The set `{x : n·x + b = 0}` with unit normal `n`. Points with
/// `n·x + b > 0` hash to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    normal: Vec<f64>,
    offset: f64,
}

impl Hyperplane {
    /// Fails unless `normal` is unit length (within [`UNIT_TOLERANCE`]) and
    /// everything is finite.
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if normal.is_empty() {
            return Err(Error::InvalidParameter("empty normal vector".into()));
        }
        check_finite(&normal, "hyperplane normal")?;
        check_finite(&[offset], "hyperplane offset")?;
        let n = norm(&normal);
        if (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NotUnitNormal { norm: n });
        }
        Ok(Self { normal, offset })
    }

    /// Scales `(normal, offset)` jointly so the normal has unit length. The
    /// positive scale leaves every side-of test unchanged.
    pub fn normalized(mut normal: Vec<f64>, mut offset: f64) -> Result<Self> {
        check_finite(&normal, "hyperplane normal")?;
        check_finite(&[offset], "hyperplane offset")?;
        let n = norm(&normal);
        if n < 1e-12 {
            return Err(Error::Degenerate("zero normal vector"));
        }
        for v in &mut normal {
            *v /= n;
        }
        offset /= n;
        Self::new(normal, offset)
    }

    /// Origin-crossing plane with the given unit normal.
    pub fn through_origin(normal: Vec<f64>) -> Result<Self> {
        Self::new(normal, 0.0)
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// `n·x + b`, without dimension checking.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) + self.offset
    }
}

/// Bit for point `x`: 1 iff `n·x + b > 0`. Points exactly on the plane get 0.
pub fn side_of(h: &Hyperplane, x: &[f64]) -> Result<bool> {
    check_dim(h.dim(), x.len())?;
    Ok(h.eval_unchecked(x) > 0.0)
}

/// An origin-crossing hyperplane in the lifted space, stored by its normal
/// `(n, w)`. The first `N` components form a unit vector.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedHyperplane {
    lifted_normal: Vec<f64>,
}

impl LiftedHyperplane {
    pub fn new(lifted_normal: Vec<f64>) -> Result<Self> {
        if lifted_normal.len() < 2 {
            return Err(Error::InvalidParameter(
                "lifted normal needs at least 2 components".into(),
            ));
        }
        check_finite(&lifted_normal, "lifted normal")?;
        let n = base_norm(&lifted_normal);
        if (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NotUnitNormal { norm: n });
        }
        Ok(Self { lifted_normal })
    }

    /// Divides every component by the norm of the first `N`, which puts an
    /// arbitrary origin-crossing normal into the canonical form.
    pub fn from_raw(mut lifted_normal: Vec<f64>) -> Result<Self> {
        if lifted_normal.len() < 2 {
            return Err(Error::InvalidParameter(
                "lifted normal needs at least 2 components".into(),
            ));
        }
        check_finite(&lifted_normal, "lifted normal")?;
        let n = base_norm(&lifted_normal);
        if n < crate::lift::MIN_BASE_NORM {
            return Err(Error::ParallelToLiftAxis);
        }
        for v in &mut lifted_normal {
            *v /= n;
        }
        Self::new(lifted_normal)
    }

    pub fn lifted_normal(&self) -> &[f64] {
        &self.lifted_normal
    }

    /// Dimension of the base space `V` (one less than the stored normal).
    pub fn base_dim(&self) -> usize {
        self.lifted_normal.len() - 1
    }

    /// The trailing component `w`.
    pub fn lift_component(&self) -> f64 {
        self.lifted_normal[self.base_dim()]
    }

    /// Sign test of a point already living in the lifted space.
    pub fn side_of_lifted(&self, lifted_point: &[f64]) -> Result<bool> {
        check_dim(self.lifted_normal.len(), lifted_point.len())?;
        Ok(dot(&self.lifted_normal, lifted_point) > 0.0)
    }
}

pub(crate) fn base_norm(lifted_normal: &[f64]) -> f64 {
    norm(&lifted_normal[..lifted_normal.len() - 1])
}

/// Ordered hyperplanes plus the preprocessing that maps raw vectors into
/// the space they live in. Together they fully determine the encoding.
#[derive(Clone, Debug, PartialEq)]
pub struct HashModel {
    hyperplanes: Vec<Hyperplane>,
    preprocess: PreprocessParams,
    seed: u64,
}

impl HashModel {
    pub fn new(hyperplanes: Vec<Hyperplane>, preprocess: PreprocessParams, seed: u64) -> Result<Self> {
        let dim = preprocess.output_dim();
        for (i, h) in hyperplanes.iter().enumerate() {
            check_dim(dim, h.dim()).map_err(|e| Error::at(i, e))?;
        }
        Ok(Self {
            hyperplanes,
            preprocess,
            seed,
        })
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    pub fn preprocess(&self) -> &PreprocessParams {
        &self.preprocess
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bit_count(&self) -> usize {
        self.hyperplanes.len()
    }

    /// Dimension of the vectors `encode` accepts.
    pub fn raw_dim(&self) -> usize {
        self.preprocess.input_dim()
    }
}
