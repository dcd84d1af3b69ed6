//! The lift map `f(x) = (x, 1)` and the correspondence between
//! origin-crossing hyperplanes one dimension up and offset hyperplanes in
//! the data space.
//!
//! A plane through the origin of the lifted space with normal `(n, w)` meets
//! the `z = 1` slice in `{x : n·x + w = 0}`, so
//! `sign((n, w)·(x, 1)) == sign(n·x + w)` for every `x`. Any learner that
//! only produces origin-crossing planes therefore yields offset planes when
//! it is run on lifted data and its output is unlifted.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng;
use crate::types::{base_norm, check_finite, Hyperplane, LiftedHyperplane};

/// Lifted normals whose first `N` components are shorter than this are
/// treated as parallel to the z axis.
pub const MIN_BASE_NORM: f64 = 1e-12;

/// Appends a trailing 1.
pub fn lift_point(x: &[f64]) -> Result<Vec<f64>> {
    check_finite(x, "vector to lift")?;
    let mut lifted = Vec::with_capacity(x.len() + 1);
    lifted.extend_from_slice(x);
    lifted.push(1.0);
    Ok(lifted)
}

/// Planes drawn by [`sample_lifted`] plus the number of degenerate draws
/// that were thrown away.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPlanes {
    pub planes: Vec<LiftedHyperplane>,
    pub redraws: usize,
}

/// Draws `count` lifted normals in dimension `dim_v + 1`.
///
/// All `N + 1` raw components are i.i.d. standard normal; the whole vector is
/// then divided by the norm of its first `N` components. Plane `i` comes from
/// ChaCha stream `i` under `seed`, so it does not depend on `count`.
///
/// The trailing component is `z / ‖g‖` for a standard normal `z` and an
/// `N`-dimensional standard normal `g`. It is symmetric about zero, with
/// variance `1 / (N - 2)` for `N > 2`; it is not standard normal.
pub fn sample_lifted(dim_v: usize, count: usize, seed: u64) -> Result<SampledPlanes> {
    if dim_v == 0 || count == 0 {
        return Err(Error::InvalidParameter(format!(
            "sample_lifted needs dim >= 1 and count >= 1 (got {dim_v}, {count})"
        )));
    }
    let mut planes = Vec::with_capacity(count);
    let mut redraws = 0;
    for i in 0..count {
        let mut rng = rng::stream(seed, i as u64);
        loop {
            let raw: Vec<f64> = (0..=dim_v).map(|_| rng.sample(StandardNormal)).collect();
            if base_norm(&raw) < MIN_BASE_NORM {
                redraws += 1;
                continue;
            }
            planes.push(LiftedHyperplane::from_raw(raw)?);
            break;
        }
    }
    if redraws > 0 {
        log::warn!("sample_lifted: {redraws} degenerate draw(s) replaced");
    }
    Ok(SampledPlanes { planes, redraws })
}

/// Converts a lifted normal `(n, w)` into the offset plane it cuts out of
/// the `z = 1` slice: normal `n / ‖n‖`, offset `w / ‖n‖`.
///
/// When `n` is already unit length (to within a few ulps) the components are
/// copied unchanged, so the sign test in the lifted space and the offset
/// plane's sign test perform the same floating-point operations.
pub fn unlift_hyperplane(lifted_normal: &[f64]) -> Result<Hyperplane> {
    if lifted_normal.len() < 2 {
        return Err(Error::InvalidParameter(
            "lifted normal needs at least 2 components".into(),
        ));
    }
    check_finite(lifted_normal, "lifted normal")?;
    let dim = lifted_normal.len() - 1;
    let n = base_norm(lifted_normal);
    if n < MIN_BASE_NORM {
        return Err(Error::ParallelToLiftAxis);
    }
    let (normal, w) = lifted_normal.split_at(dim);
    if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
        Hyperplane::new(normal.to_vec(), w[0])
    } else {
        Hyperplane::new(normal.iter().map(|v| v / n).collect(), w[0] / n)
    }
}

impl LiftedHyperplane {
    /// Offset plane in the base space. Never fails: the base part of a
    /// `LiftedHyperplane` is unit length by construction.
    pub fn unlift(&self) -> Hyperplane {
        unlift_hyperplane(self.lifted_normal()).expect("lifted hyperplane invariant")
    }
}

/// A procedure that places hyperplanes through the origin of whatever space
/// its input points live in.
///
/// Implementations return unit normals of the input dimension. Random
/// projection, pool selection or an external learner such as minimal loss
/// hashing all fit this contract; wrapping any of them with
/// [`lift_learner`] makes it produce offset planes.
pub trait OriginLearner {
    fn learn(&self, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>>;
}

impl<F> OriginLearner for F
where
    F: Fn(&[Vec<f64>]) -> Result<Vec<Vec<f64>>>,
{
    fn learn(&self, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self(points)
    }
}

/// Plain random projection: `count` isotropic unit normals. Normal `i` is
/// built from the same raw draw that [`sample_lifted`] uses for plane `i`
/// under the same seed, so in the lifted space the two agree up to a
/// positive scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomOriginPlanes {
    pub count: usize,
    pub seed: u64,
}

impl RandomOriginPlanes {
    pub fn new(count: usize, seed: u64) -> Self {
        Self { count, seed }
    }
}

impl OriginLearner for RandomOriginPlanes {
    fn learn(&self, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let dim = points.first().map(Vec::len).ok_or(Error::TooFewVectors {
            needed: 1,
            found: 0,
        })?;
        random_unit_normals(dim, self.count, self.seed)
    }
}

/// `count` unit vectors in dimension `dim`, vector `i` from stream `i`.
pub fn random_unit_normals(dim: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if dim == 0 {
        return Err(Error::InvalidParameter("zero dimension".into()));
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = rng::stream(seed, i as u64);
        loop {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let n = crate::types::norm(&v);
            if n < MIN_BASE_NORM {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= n);
            out.push(v);
            break;
        }
    }
    Ok(out)
}

/// Result of running a learner through the lift.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftOutcome {
    pub planes: Vec<Hyperplane>,
    /// Learned planes parallel to the z axis; they never cross `z = 1`.
    pub skipped: usize,
}

/// Lifts `learning_data`, runs `learner` in dimension `N + 1` and unlifts
/// every plane it returns.
pub fn lift_learner<L: OriginLearner + ?Sized>(
    learner: &L,
    learning_data: &[Vec<f64>],
) -> Result<LiftOutcome> {
    let lifted = learning_data
        .iter()
        .enumerate()
        .map(|(i, x)| lift_point(x).map_err(|e| Error::at(i, e)))
        .collect::<Result<Vec<_>>>()?;
    let normals = learner.learn(&lifted)?;
    let mut planes = Vec::with_capacity(normals.len());
    let mut skipped = 0;
    for (i, normal) in normals.iter().enumerate() {
        match unlift_hyperplane(normal) {
            Ok(h) => planes.push(h),
            Err(Error::ParallelToLiftAxis) => skipped += 1,
            Err(e) => return Err(Error::at(i, e)),
        }
    }
    if skipped > 0 {
        log::warn!("lift_learner: skipped {skipped} plane(s) parallel to the lift axis");
    }
    Ok(LiftOutcome { planes, skipped })
}
