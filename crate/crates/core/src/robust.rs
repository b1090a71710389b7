//! Scalar robust location by iterative Welsch/Leclerc reweighting.
//!
//! Starting from the base-weighted mean, each iteration replaces the weights
//! with `eps_k * exp(-(x_k - m)^2 / (2 sigma^2))` (normalized), where `m` and
//! `sigma^2` are the weighted location and variance of the previous step. The
//! first location is the mean, the third is close to the median, and further
//! iterations drift monotonically towards the mode.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Relative variance floor below which reweighting stops.
const DEGENERATE_VARIANCE: f64 = 1e-24;

/// One scalar observation with its statistical importance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub value: f64,
    /// Non-negative base weight; 1 when nothing else is known.
    pub base_weight: f64,
}

impl Sample {
    pub fn new(value: f64) -> Self {
        Self {
            value,
            base_weight: 1.0,
        }
    }

    pub fn weighted(value: f64, base_weight: f64) -> Self {
        Self { value, base_weight }
    }
}

/// Number of reweighting iterations: explicit, or chosen from the sample count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Iterations {
    #[default]
    Auto,
    Fixed(usize),
}

impl Iterations {
    /// Resolves to a concrete count for `sample_count` samples.
    pub fn resolve(self, sample_count: usize) -> Result<usize> {
        match self {
            Iterations::Auto => Ok(iteration_count(sample_count)),
            Iterations::Fixed(0) => Err(Error::ZeroIterations),
            Iterations::Fixed(q) => Ok(q),
        }
    }
}

impl fmt::Display for Iterations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Iterations::Auto => f.write_str("auto"),
            Iterations::Fixed(q) => write!(f, "{q}"),
        }
    }
}

impl FromStr for Iterations {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Iterations::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) => Err(Error::ZeroIterations),
            Ok(q) => Ok(Iterations::Fixed(q)),
            Err(_) => Err(Error::InvalidConfig(format!(
                "iterations must be a positive integer or `auto`, got `{s}`"
            ))),
        }
    }
}

/// Per-iteration history of one robust location run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustLocationTrace {
    /// `m_1 ..= m_Q`; `locations[0]` is the base-weighted mean.
    pub locations: Vec<f64>,
    /// `sigma_1 ..= sigma_Q`, the weighted standard deviation around each location.
    pub spreads: Vec<f64>,
    /// Normalized weights that produced the last location.
    pub final_weights: Vec<f64>,
    /// Iterations actually computed. Smaller than `locations.len()` when the
    /// spread collapsed and the trace was padded with the last values.
    pub iterations_run: usize,
}

impl RobustLocationTrace {
    pub fn final_location(&self) -> f64 {
        *self.locations.last().expect("trace is never empty")
    }

    pub fn final_spread(&self) -> f64 {
        *self.spreads.last().expect("trace is never empty")
    }

    pub fn iterations_requested(&self) -> usize {
        self.locations.len()
    }

    pub fn stopped_early(&self) -> bool {
        self.iterations_run < self.locations.len()
    }
}

fn validate_weights(len: usize, weights: &[f64]) -> Result<f64> {
    if len == 0 {
        return Err(Error::EmptySamples);
    }
    if weights.len() != len {
        return Err(Error::LengthMismatch {
            values: len,
            weights: weights.len(),
        });
    }
    let mut total = CompensatedSum::new();
    for (index, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidWeight { index, value: w });
        }
        total += w;
    }
    let total = total.value();
    if total > 0.0 {
        Ok(total)
    } else {
        Err(Error::DegenerateWeights)
    }
}

fn validate_values(samples: &[Sample]) -> Result<()> {
    match samples.iter().position(|s| !s.value.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// `sum(w_k * x_k) / sum(w_k)`; weights need not be normalized.
pub fn weighted_mean(samples: &[Sample], weights: &[f64]) -> Result<f64> {
    let total = validate_weights(samples.len(), weights)?;
    validate_values(samples)?;
    let acc: CompensatedSum = samples.iter().zip(weights).map(|(s, w)| w * s.value).collect();
    Ok(acc.value() / total)
}

/// `sum(w_k * (x_k - center)^2) / sum(w_k)`.
pub fn weighted_variance(samples: &[Sample], weights: &[f64], center: f64) -> Result<f64> {
    let total = validate_weights(samples.len(), weights)?;
    validate_values(samples)?;
    let acc: CompensatedSum = samples
        .iter()
        .zip(weights)
        .map(|(s, w)| {
            let d = s.value - center;
            w * d * d
        })
        .collect();
    Ok(acc.value() / total)
}

/// Recommended iteration count `floor(K^(1/4) * sqrt(log2(K + 1)))`, never below 1.
pub fn iteration_count(sample_count: usize) -> usize {
    let k = sample_count as f64;
    let q = (k.powf(0.25) * (k + 1.0).log2().sqrt()).floor();
    (q as usize).max(1)
}

/// Runs `iterations` steps of Welsch-kernel reweighting over `samples`.
///
/// Samples with zero base weight never influence the result. If the weighted
/// variance collapses to (relatively) zero, iteration stops and the trace is
/// padded with the last location and spread.
pub fn robust_scalar_location(samples: &[Sample], iterations: usize) -> Result<RobustLocationTrace> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if iterations == 0 {
        return Err(Error::ZeroIterations);
    }
    validate_values(samples)?;
    let mut eps_total = CompensatedSum::new();
    for (index, s) in samples.iter().enumerate() {
        if !s.base_weight.is_finite() || s.base_weight < 0.0 {
            return Err(Error::InvalidWeight {
                index,
                value: s.base_weight,
            });
        }
        eps_total += s.base_weight;
    }
    let eps_total = eps_total.value();
    if eps_total <= 0.0 {
        return Err(Error::AllWeightsZero);
    }

    // Unnormalized weights; every moment divides by their total.
    let mut weights: Vec<f64> = samples.iter().map(|s| s.base_weight).collect();
    let mut locations = Vec::with_capacity(iterations);
    let mut spreads = Vec::with_capacity(iterations);
    let mut iterations_run = 0;

    loop {
        let (location, variance) = weighted_moments(samples, &weights);
        locations.push(location);
        spreads.push(variance.sqrt());
        iterations_run += 1;
        if iterations_run == iterations {
            break;
        }
        if variance <= DEGENERATE_VARIANCE * location.powi(2).max(1.0) {
            let spread = variance.sqrt();
            locations.resize(iterations, location);
            spreads.resize(iterations, spread);
            break;
        }
        reweight(samples, location, variance, &mut weights);
    }

    let total: CompensatedSum = weights.iter().copied().collect();
    let total = total.value();
    weights.iter_mut().for_each(|w| *w /= total);

    Ok(RobustLocationTrace {
        locations,
        spreads,
        final_weights: weights,
        iterations_run,
    })
}

fn weighted_moments(samples: &[Sample], weights: &[f64]) -> (f64, f64) {
    let mut total = CompensatedSum::new();
    let mut first = CompensatedSum::new();
    for (s, &w) in samples.iter().zip(weights) {
        total += w;
        first += w * s.value;
    }
    let total = total.value();
    let location = first.value() / total;
    let mut second = CompensatedSum::new();
    for (s, &w) in samples.iter().zip(weights) {
        let d = s.value - location;
        second += w * d * d;
    }
    (location, second.value() / total)
}

/// Gaussian-kernel weights around `location`, times the base weights. The
/// exponents are shifted so the largest active one is zero, which keeps tight
/// clusters from underflowing.
fn reweight(samples: &[Sample], location: f64, variance: f64, weights: &mut [f64]) {
    let scale = -0.5 / variance;
    let mut z_max = f64::NEG_INFINITY;
    for (s, w) in samples.iter().zip(weights.iter_mut()) {
        let d = s.value - location;
        let z = d * d * scale;
        *w = z;
        if s.base_weight > 0.0 && z > z_max {
            z_max = z;
        }
    }
    for (s, w) in samples.iter().zip(weights.iter_mut()) {
        *w = if s.base_weight > 0.0 {
            s.base_weight * (*w - z_max).exp()
        } else {
            0.0
        };
    }
}
