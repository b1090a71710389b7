use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::{self, CompensatedSum};

/// Smallest norm a vector may have and still be projected onto the sphere.
const MIN_NORM: f64 = 1e-12;

/// A unit-norm feature vector.
///
/// Inputs within [`Descriptor::NORM_TOLERANCE`] of unit length are accepted
/// and stored renormalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Descriptor {
    coords: Vec<f64>,
}

impl Descriptor {
    pub const NORM_TOLERANCE: f64 = 1e-6;

    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_coords(&coords)?;
        let n = norm(&coords);
        if (n - 1.0).abs() > Self::NORM_TOLERANCE {
            return Err(Error::NotUnitNorm { norm: n });
        }
        Ok(Self::scaled(coords, n))
    }

    /// Projects an arbitrary non-zero vector onto the unit sphere.
    pub fn normalize(coords: Vec<f64>) -> Result<Self> {
        check_coords(&coords)?;
        let n = norm(&coords);
        if !(n > MIN_NORM) {
            return Err(Error::Unnormalizable);
        }
        Ok(Self::scaled(coords, n))
    }

    /// Divides by `n` unless the vector is already unit length to rounding,
    /// so that normalizing a descriptor twice leaves it bit-identical.
    fn scaled(mut coords: Vec<f64>, n: f64) -> Self {
        if (n - 1.0).abs() > 2.0 * f64::EPSILON {
            coords.iter_mut().for_each(|c| *c /= n);
        }
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn dot(&self, other: &Descriptor) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(sum::dot(&self.coords, &other.coords))
    }
}

fn check_coords(coords: &[f64]) -> Result<()> {
    if coords.len() < 2 {
        return Err(Error::DimensionTooSmall(coords.len()));
    }
    match coords.iter().position(|c| !c.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Euclidean norm, scaled by the largest magnitude so huge inputs don't overflow.
pub(crate) fn norm(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: CompensatedSum = v.iter().map(|x| (x / scale).powi(2)).collect();
    scale * s.value().sqrt()
}

/// Projects `vector` onto the unit sphere.
pub fn normalize(vector: &[f64]) -> Result<Descriptor> {
    Descriptor::normalize(vector.to_vec())
}

/// Great-circle distance in `[0, pi]`.
pub fn angular_distance(u: &Descriptor, v: &Descriptor) -> Result<f64> {
    check_dims(u.dim(), v.dim())?;
    Ok(angle_between(u.coords(), v.coords()))
}

/// Angle between unit vectors as `2 atan2(|a - b|, |a + b|)`.
///
/// Equal to `acos(a . b)` but keeps full precision near 0 and pi, and is
/// exactly 0 for identical inputs.
pub(crate) fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let mut diff = CompensatedSum::new();
    let mut plus = CompensatedSum::new();
    for (x, y) in a.iter().zip(b) {
        diff += (x - y) * (x - y);
        plus += (x + y) * (x + y);
    }
    2.0 * diff.value().sqrt().atan2(plus.value().sqrt())
}

/// Riemannian log map at `base`: the tangent vector pointing at `target` whose
/// length is the geodesic distance. Returns the vector and that distance.
pub(crate) fn log_map(base: &[f64], target: &[f64]) -> (Vec<f64>, f64) {
    let d = sum::dot(base, target);
    let mut residual: Vec<f64> = target.iter().zip(base).map(|(t, b)| t - d * b).collect();
    let r = norm(&residual);
    let theta = r.atan2(d);
    if r > 0.0 {
        let scale = theta / r;
        residual.iter_mut().for_each(|x| *x *= scale);
    }
    (residual, theta)
}

/// Riemannian exp map at `base`, renormalized against drift.
pub(crate) fn exp_map(base: &[f64], tangent: &[f64]) -> Vec<f64> {
    let t = norm(tangent);
    if t == 0.0 {
        return base.to_vec();
    }
    let (sin, cos) = t.sin_cos();
    let mut out: Vec<f64> = base
        .iter()
        .zip(tangent)
        .map(|(b, v)| cos * b + sin * v / t)
        .collect();
    let n = norm(&out);
    out.iter_mut().for_each(|x| *x /= n);
    out
}

/// K descriptors of one object sharing a dimension, with per-descriptor
/// statistical weights (all 1 unless supplied).
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorSet {
    descriptors: Vec<Descriptor>,
    epsilons: Vec<f64>,
}

impl DescriptorSet {
    pub fn new(descriptors: Vec<Descriptor>) -> Result<Self> {
        let epsilons = vec![1.0; descriptors.len()];
        Self::with_epsilons(descriptors, epsilons)
    }

    pub fn with_epsilons(descriptors: Vec<Descriptor>, epsilons: Vec<f64>) -> Result<Self> {
        if descriptors.len() < 2 {
            return Err(Error::TooFewDescriptors(descriptors.len()));
        }
        if epsilons.len() != descriptors.len() {
            return Err(Error::LengthMismatch {
                values: descriptors.len(),
                weights: epsilons.len(),
            });
        }
        let dim = descriptors[0].dim();
        for d in &descriptors[1..] {
            check_dims(dim, d.dim())?;
        }
        for (index, &value) in epsilons.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidWeight { index, value });
            }
        }
        if sum::sum(epsilons.iter().copied()) <= 0.0 {
            return Err(Error::AllWeightsZero);
        }
        Ok(Self {
            descriptors,
            epsilons,
        })
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.descriptors[0].dim()
    }

    pub fn descriptors(&self) -> &[Descriptor] {
        &self.descriptors
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn epsilon_total(&self) -> f64 {
        sum::sum(self.epsilons.iter().copied())
    }

    /// Number of descriptors with a positive weight.
    pub fn active_count(&self) -> usize {
        self.epsilons.iter().filter(|&&e| e > 0.0).count()
    }

    /// `(index, descriptor, epsilon)` for every descriptor with positive weight.
    pub fn active(&self) -> impl Iterator<Item = (usize, &Descriptor, f64)> + '_ {
        self.descriptors
            .iter()
            .zip(&self.epsilons)
            .enumerate()
            .filter(|(_, (_, &e))| e > 0.0)
            .map(|(i, (d, &e))| (i, d, e))
    }
}
