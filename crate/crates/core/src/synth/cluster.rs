//! Synthetic descriptor clusters with planted outliers, and the experiment
//! comparing center estimators on them.

use std::f64::consts::PI;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::Stream;
use crate::error::{Error, Result};
use crate::geometry::{
    angle_between, angular_distance, exp_map, geodesic_median_center, mean_center,
    mode_median_center, Descriptor, DescriptorSet, SolverOptions,
};
use crate::robust::{iteration_count, Iterations};
use crate::sum;

const MAX_OUTLIER_ATTEMPTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub dimension: usize,
    pub inlier_count: usize,
    pub outlier_count: usize,
    /// RMS angular distance (radians) of inliers from the true center.
    /// Tangent noise is isotropic with per-axis deviation
    /// `inlier_spread / sqrt(dimension - 1)`.
    pub inlier_spread: f64,
    /// Outliers are uniform on the sphere, at least this far (radians) from
    /// the true center.
    pub outlier_min_angle: f64,
    /// Drawn uniformly on the sphere when absent.
    pub true_center: Option<Descriptor>,
    pub seed: u64,
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidConfig(msg));
        if self.dimension < 2 {
            return invalid(format!("dimension must be at least 2, got {}", self.dimension));
        }
        if self.inlier_count < 2 {
            return invalid(format!("need at least 2 inliers, got {}", self.inlier_count));
        }
        if !(self.inlier_spread > 0.0 && self.inlier_spread.is_finite()) {
            return invalid(format!("inlier spread must be positive, got {}", self.inlier_spread));
        }
        if !(self.outlier_min_angle > self.inlier_spread && self.outlier_min_angle < PI) {
            return invalid(format!(
                "outlier minimum angle must lie in (inlier spread, pi), got {}",
                self.outlier_min_angle
            ));
        }
        if let Some(c) = &self.true_center {
            if c.dim() != self.dimension {
                return Err(Error::DimensionMismatch {
                    expected: self.dimension,
                    found: c.dim(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCluster {
    /// Inliers first, then outliers; all weights 1.
    pub set: DescriptorSet,
    pub ground_truth: Descriptor,
    pub outliers: Range<usize>,
}

fn random_direction(dim: usize, stream: &mut Stream) -> Descriptor {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| stream.normal()).collect();
        if let Ok(d) = Descriptor::normalize(v) {
            return d;
        }
    }
}

fn sample_with(config: &ClusterConfig, stream: &mut Stream) -> Result<SyntheticCluster> {
    config.validate()?;
    let n = config.dimension;
    let center = match &config.true_center {
        Some(c) => c.clone(),
        None => random_direction(n, stream),
    };
    let c = center.coords();
    let axis_std = config.inlier_spread / ((n - 1) as f64).sqrt();

    let mut descriptors = Vec::with_capacity(config.inlier_count + config.outlier_count);
    for _ in 0..config.inlier_count {
        let mut tangent: Vec<f64> = (0..n).map(|_| axis_std * stream.normal()).collect();
        let along = sum::dot(&tangent, c);
        tangent.iter_mut().zip(c).for_each(|(t, ci)| *t -= along * ci);
        descriptors.push(Descriptor::normalize(exp_map(c, &tangent))?);
    }
    for _ in 0..config.outlier_count {
        let mut attempts = 0;
        let outlier = loop {
            let candidate = random_direction(n, stream);
            if angle_between(candidate.coords(), c) >= config.outlier_min_angle {
                break candidate;
            }
            attempts += 1;
            if attempts == MAX_OUTLIER_ATTEMPTS {
                return Err(Error::InvalidConfig(format!(
                    "could not place an outlier {} rad from the center",
                    config.outlier_min_angle
                )));
            }
        };
        descriptors.push(outlier);
    }
    Ok(SyntheticCluster {
        set: DescriptorSet::new(descriptors)?,
        ground_truth: center,
        outliers: config.inlier_count..config.inlier_count + config.outlier_count,
    })
}

/// Draws one cluster from stream 0 of `config.seed`.
pub fn sample_spherical_cluster(config: &ClusterConfig) -> Result<SyntheticCluster> {
    sample_with(config, &mut Stream::new(config.seed, 0))
}

/// Angular error of each estimator to the ground truth; `None` if it failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorErrors {
    pub mean: Option<f64>,
    pub mode_median: Option<f64>,
    pub geodesic_median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessTrial {
    pub trial: usize,
    pub errors: EstimatorErrors,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub config: ClusterConfig,
    pub trials: usize,
    /// Mode-median iteration count chosen for the cluster size.
    pub iterations: usize,
    pub outcomes: Vec<RobustnessTrial>,
    /// Trials where the mode-median error is strictly below the mean's.
    pub mode_median_wins: usize,
    pub geodesic_median_wins: usize,
    pub mode_median_win_rate: f64,
    pub geodesic_median_win_rate: f64,
    /// Average error over the trials where each estimator succeeded.
    pub average_errors: EstimatorErrors,
}

fn beats(candidate: Option<f64>, baseline: Option<f64>) -> bool {
    matches!((candidate, baseline), (Some(c), Some(b)) if c < b)
}

fn average(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let ok: Vec<f64> = values.flatten().collect();
    (!ok.is_empty()).then(|| sum::sum(ok.iter().copied()) / ok.len() as f64)
}

fn run_trial(config: &ClusterConfig, trial: usize) -> Result<RobustnessTrial> {
    let mut stream = Stream::new(config.seed, trial as u64);
    let cluster = sample_with(config, &mut stream)?;
    let truth = &cluster.ground_truth;
    let mut failures = Vec::new();
    let mut error_of = |name: &str, result: Result<crate::AggregationResult>| match result
        .and_then(|r| angular_distance(&r.center, truth))
    {
        Ok(e) => Some(e),
        Err(e) => {
            failures.push(format!("{name}: {e}"));
            None
        }
    };
    let errors = EstimatorErrors {
        mean: error_of("mean", mean_center(&cluster.set)),
        mode_median: error_of("mode_median", mode_median_center(&cluster.set, Iterations::Auto)),
        geodesic_median: error_of(
            "geodesic_median",
            geodesic_median_center(&cluster.set, &SolverOptions::default()),
        ),
    };
    Ok(RobustnessTrial {
        trial,
        errors,
        failures,
    })
}

/// Samples `trials` clusters (trial `t` uses stream `t` of `config.seed`) and
/// measures each center estimator against the planted center. Estimator
/// failures are recorded per trial rather than aborting the run.
pub fn run_robustness_experiment(config: &ClusterConfig, trials: usize) -> Result<RobustnessReport> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::InsufficientTrials {
            found: 0,
            required: 1,
        });
    }
    let outcomes: Vec<RobustnessTrial> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect::<Result<_>>()?;
    let mode_median_wins = outcomes
        .iter()
        .filter(|o| beats(o.errors.mode_median, o.errors.mean))
        .count();
    let geodesic_median_wins = outcomes
        .iter()
        .filter(|o| beats(o.errors.geodesic_median, o.errors.mean))
        .count();
    let average_errors = EstimatorErrors {
        mean: average(outcomes.iter().map(|o| o.errors.mean)),
        mode_median: average(outcomes.iter().map(|o| o.errors.mode_median)),
        geodesic_median: average(outcomes.iter().map(|o| o.errors.geodesic_median)),
    };
    Ok(RobustnessReport {
        config: config.clone(),
        trials,
        iterations: iteration_count(config.inlier_count + config.outlier_count),
        outcomes,
        mode_median_wins,
        geodesic_median_wins,
        mode_median_win_rate: mode_median_wins as f64 / trials as f64,
        geodesic_median_win_rate: geodesic_median_wins as f64 / trials as f64,
        average_errors,
    })
}
