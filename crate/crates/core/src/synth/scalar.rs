//! One-dimensional experiments: how the reweighted location evolves with the
//! iteration number, and how its across-trial scatter compares to the mean's.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::Stream;
use crate::error::{Error, Result};
use crate::robust::{robust_scalar_location, Iterations, Sample};
use crate::sum::CompensatedSum;

/// Median of the density `x e^-x`: the root of `(1 + x) e^-x = 1/2`.
pub const GAMMA2_MEDIAN: f64 = 1.678_346_990_016_660_7;

/// Fewest trials for which an across-trial spread is reported.
pub const MIN_RELIABILITY_TRIALS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    /// Density `x e^-x` on `[0, inf)`: the sum of two unit exponentials.
    GammaShape2,
    /// Unit-rate exponential.
    Exponential,
    /// `exp(Z / 2)` with `Z` standard normal.
    LognormalSigmaHalf,
    /// Standard normal; symmetric, so mean, median and mode coincide.
    Normal,
}

impl Distribution {
    pub const ALL: [Distribution; 4] = [
        Distribution::GammaShape2,
        Distribution::Exponential,
        Distribution::LognormalSigmaHalf,
        Distribution::Normal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Distribution::GammaShape2 => "gamma_shape2",
            Distribution::Exponential => "exponential",
            Distribution::LognormalSigmaHalf => "lognormal_sigma_half",
            Distribution::Normal => "normal",
        }
    }

    /// Closed-form mean, median and mode.
    pub fn reference(self) -> ReferenceValues {
        match self {
            Distribution::GammaShape2 => ReferenceValues {
                mean: 2.0,
                median: GAMMA2_MEDIAN,
                mode: 1.0,
            },
            Distribution::Exponential => ReferenceValues {
                mean: 1.0,
                median: std::f64::consts::LN_2,
                mode: 0.0,
            },
            Distribution::LognormalSigmaHalf => ReferenceValues {
                mean: 0.125_f64.exp(),
                median: 1.0,
                mode: (-0.25_f64).exp(),
            },
            Distribution::Normal => ReferenceValues {
                mean: 0.0,
                median: 0.0,
                mode: 0.0,
            },
        }
    }

    pub fn draw(self, stream: &mut Stream) -> f64 {
        match self {
            Distribution::GammaShape2 => stream.exponential() + stream.exponential(),
            Distribution::Exponential => stream.exponential(),
            Distribution::LognormalSigmaHalf => (0.5 * stream.normal()).exp(),
            Distribution::Normal => stream.normal(),
        }
    }

    pub fn sample(self, count: usize, stream: &mut Stream) -> Vec<f64> {
        (0..count).map(|_| self.draw(stream)).collect()
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown distribution `{s}`")))
    }
}

/// `count` i.i.d. draws from the density `x e^-x`.
pub fn sample_gamma2(count: usize, seed: u64) -> Vec<f64> {
    Distribution::GammaShape2.sample(count, &mut Stream::new(seed, 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValues {
    pub mean: f64,
    pub median: f64,
    pub mode: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarExperimentConfig {
    pub distribution: Distribution,
    pub sample_count: usize,
    pub iterations: Iterations,
    pub trials: usize,
    pub seed: u64,
}

impl ScalarExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_count < 2 {
            return Err(Error::InvalidConfig(format!(
                "sample count must be at least 2, got {}",
                self.sample_count
            )));
        }
        if self.trials == 0 {
            return Err(Error::InsufficientTrials {
                found: 0,
                required: 1,
            });
        }
        Ok(())
    }
}

/// Location and spread history of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTrace {
    pub locations: Vec<f64>,
    pub spreads: Vec<f64>,
    pub iterations_run: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCurve {
    pub config: ScalarExperimentConfig,
    /// Resolved iteration count.
    pub iterations: usize,
    pub trials: Vec<TrialTrace>,
    /// Across-trial mean of `m_q`, indexed by `q - 1`.
    pub mean_location: Vec<f64>,
    /// Across-trial sample standard deviation of `m_q` (zero for one trial).
    pub std_location: Vec<f64>,
    pub reference: ReferenceValues,
}

fn run_trials(config: &ScalarExperimentConfig, iterations: usize) -> Result<Vec<TrialTrace>> {
    (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut stream = Stream::new(config.seed, trial);
            let samples: Vec<Sample> = config
                .distribution
                .sample(config.sample_count, &mut stream)
                .into_iter()
                .map(Sample::new)
                .collect();
            let trace = robust_scalar_location(&samples, iterations)?;
            Ok(TrialTrace {
                locations: trace.locations,
                spreads: trace.spreads,
                iterations_run: trace.iterations_run,
            })
        })
        .collect()
}

/// Mean and sample standard deviation of `m_q` across trials, for every `q`.
fn across_trials(trials: &[TrialTrace], iterations: usize) -> (Vec<f64>, Vec<f64>) {
    let n = trials.len() as f64;
    (0..iterations)
        .map(|q| {
            let mean = trials.iter().map(|t| t.locations[q]).collect::<CompensatedSum>().value() / n;
            let std = if trials.len() > 1 {
                let ss: CompensatedSum = trials.iter().map(|t| (t.locations[q] - mean).powi(2)).collect();
                (ss.value() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            (mean, std)
        })
        .unzip()
}

/// Samples `trials` independent data sets and records the full reweighting
/// trace of each.
pub fn run_convergence_experiment(config: &ScalarExperimentConfig) -> Result<ConvergenceCurve> {
    config.validate()?;
    let iterations = config.iterations.resolve(config.sample_count)?;
    let trials = run_trials(config, iterations)?;
    let (mean_location, std_location) = across_trials(&trials, iterations);
    Ok(ConvergenceCurve {
        config: *config,
        iterations,
        trials,
        mean_location,
        std_location,
        reference: config.distribution.reference(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityCheckpoint {
    pub iteration: usize,
    pub mean_location: f64,
    /// Across-trial standard deviation of `m_q`.
    pub std_location: f64,
    /// `std_location` relative to that of the plain mean (`q = 1`).
    pub ratio_to_first: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub config: ScalarExperimentConfig,
    pub iterations: usize,
    pub checkpoints: Vec<ReliabilityCheckpoint>,
    pub reference: ReferenceValues,
}

impl ReliabilityReport {
    pub fn checkpoint(&self, iteration: usize) -> Option<&ReliabilityCheckpoint> {
        self.checkpoints.iter().find(|c| c.iteration == iteration)
    }
}

/// Iterations at which reliability is reported: `1`, `3`, `floor(log2(K+1))`
/// and `floor(sqrt(K))`, each capped at `iterations`, deduplicated and sorted.
pub fn reliability_checkpoints(sample_count: usize, iterations: usize) -> Vec<usize> {
    let log = ((sample_count as f64) + 1.0).log2().floor() as usize;
    let sqrt = sample_count.isqrt();
    let mut points: Vec<usize> = [1, 3, log, sqrt]
        .into_iter()
        .map(|q| q.clamp(1, iterations))
        .collect();
    points.sort_unstable();
    points.dedup();
    points
}

/// Across-trial scatter of `m_q` at the checkpoint iterations.
///
/// With `Iterations::Auto` the run goes to `floor(sqrt(K))` iterations so
/// that every checkpoint is reached.
pub fn run_reliability_experiment(config: &ScalarExperimentConfig) -> Result<ReliabilityReport> {
    config.validate()?;
    if config.trials < MIN_RELIABILITY_TRIALS {
        return Err(Error::InsufficientTrials {
            found: config.trials,
            required: MIN_RELIABILITY_TRIALS,
        });
    }
    let iterations = match config.iterations {
        Iterations::Auto => config.sample_count.isqrt().max(1),
        fixed => fixed.resolve(config.sample_count)?,
    };
    let trials = run_trials(config, iterations)?;
    let (means, stds) = across_trials(&trials, iterations);
    let checkpoints = reliability_checkpoints(config.sample_count, iterations)
        .into_iter()
        .map(|q| ReliabilityCheckpoint {
            iteration: q,
            mean_location: means[q - 1],
            std_location: stds[q - 1],
            ratio_to_first: stds[q - 1] / stds[0],
        })
        .collect();
    Ok(ReliabilityReport {
        config: *config,
        iterations,
        checkpoints,
        reference: config.distribution.reference(),
    })
}
