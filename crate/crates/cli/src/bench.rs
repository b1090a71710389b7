use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use mrdesc_core::synth::{
    run_convergence_experiment, run_reliability_experiment, run_robustness_experiment,
    ClusterConfig, Distribution, ScalarExperimentConfig,
};
use mrdesc_core::Iterations;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Converge,
    Reliability,
    Robustness,
}

impl Experiment {
    pub const ALL: [Experiment; 3] = [Experiment::Converge, Experiment::Reliability, Experiment::Robustness];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Converge => "converge",
            Experiment::Reliability => "reliability",
            Experiment::Robustness => "robustness",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown experiment `{s}`")))
    }
}

/// Settings for `bench`. Fields left as `None` take the experiment's default.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub iterations: Iterations,
    pub distribution: Distribution,
    pub samples: Option<usize>,
    pub trials: Option<usize>,
    pub dimension: usize,
    pub inliers: usize,
    pub outliers: usize,
    pub spread: f64,
    pub min_angle: f64,
}

impl BenchConfig {
    pub fn new(experiment: Experiment) -> Self {
        BenchConfig {
            experiment,
            seed: 0,
            iterations: Iterations::Auto,
            distribution: Distribution::GammaShape2,
            samples: None,
            trials: None,
            dimension: 128,
            inliers: 40,
            outliers: 10,
            spread: 0.05,
            min_angle: 0.8,
        }
    }

    pub fn sample_count(&self) -> usize {
        self.samples.unwrap_or(match self.experiment {
            Experiment::Converge => 1_000_000,
            _ => 10_000,
        })
    }

    pub fn trial_count(&self) -> usize {
        self.trials.unwrap_or(match self.experiment {
            Experiment::Converge => 1,
            Experiment::Reliability => 200,
            Experiment::Robustness => 100,
        })
    }

    fn scalar(&self) -> ScalarExperimentConfig {
        ScalarExperimentConfig {
            distribution: self.distribution,
            sample_count: self.sample_count(),
            iterations: self.iterations,
            trials: self.trial_count(),
            seed: self.seed,
        }
    }

    fn cluster(&self) -> ClusterConfig {
        ClusterConfig {
            dimension: self.dimension,
            inlier_count: self.inliers,
            outlier_count: self.outliers,
            inlier_spread: self.spread,
            outlier_min_angle: self.min_angle,
            true_center: None,
            seed: self.seed,
        }
    }
}

/// Runs an experiment and returns its report as JSON lines: one record per
/// iteration, checkpoint or trial, then a summary record.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<String>> {
    let records = match config.experiment {
        Experiment::Converge => converge(config)?,
        Experiment::Reliability => reliability(config)?,
        Experiment::Robustness => robustness(config)?,
    };
    Ok(records.iter().map(Value::to_string).collect())
}

fn scalar_config_json(config: &ScalarExperimentConfig, resolved: usize) -> Value {
    json!({
        "distribution": config.distribution.as_str(),
        "sample_count": config.sample_count,
        "trials": config.trials,
        "iterations": config.iterations.to_string(),
        "resolved_iterations": resolved,
        "seed": config.seed,
    })
}

fn converge(config: &BenchConfig) -> Result<Vec<Value>> {
    let scalar = config.scalar();
    let curve = run_convergence_experiment(&scalar)?;
    let mut records: Vec<Value> = curve
        .mean_location
        .iter()
        .zip(&curve.std_location)
        .enumerate()
        .map(|(q, (m, s))| json!({"record": "iteration", "q": q + 1, "mean_location": m, "std_location": s}))
        .collect();
    let at = |q: usize| curve.mean_location.get(q - 1).copied();
    records.push(json!({
        "record": "summary",
        "experiment": "converge",
        "config": scalar_config_json(&scalar, curve.iterations),
        "iterations_run": curve.trials.iter().map(|t| t.iterations_run).collect::<Vec<_>>(),
        "m_1": at(1),
        "m_3": at(3),
        "m_Q": at(curve.iterations),
        "reference": curve.reference,
    }));
    Ok(records)
}

fn reliability(config: &BenchConfig) -> Result<Vec<Value>> {
    let scalar = config.scalar();
    let report = run_reliability_experiment(&scalar)?;
    let mut records: Vec<Value> = report
        .checkpoints
        .iter()
        .map(|c| {
            json!({
                "record": "checkpoint",
                "q": c.iteration,
                "mean_location": c.mean_location,
                "std_location": c.std_location,
                "ratio_to_first": c.ratio_to_first,
            })
        })
        .collect();
    let sqrt_k = scalar.sample_count.isqrt().min(report.iterations);
    records.push(json!({
        "record": "summary",
        "experiment": "reliability",
        "config": scalar_config_json(&scalar, report.iterations),
        "ratio_3": report.checkpoint(3).map(|c| c.ratio_to_first),
        "ratio_sqrt_k": report.checkpoint(sqrt_k).map(|c| c.ratio_to_first),
        "sqrt_k_iteration": sqrt_k,
        "reference": report.reference,
    }));
    Ok(records)
}

fn robustness(config: &BenchConfig) -> Result<Vec<Value>> {
    if config.iterations != Iterations::Auto {
        return Err(CliError::Usage("robustness always uses the automatic iteration count".into()));
    }
    let cluster = config.cluster();
    let report = run_robustness_experiment(&cluster, config.trial_count())?;
    let mut records: Vec<Value> = report
        .outcomes
        .iter()
        .map(|t| json!({"record": "trial", "trial": t.trial, "errors": t.errors, "failures": t.failures}))
        .collect();
    let max_of = |pick: fn(&mrdesc_core::synth::EstimatorErrors) -> Option<f64>| {
        report.outcomes.iter().filter_map(|t| pick(&t.errors)).fold(None, |acc: Option<f64>, e| {
            Some(acc.map_or(e, |a| a.max(e)))
        })
    };
    records.push(json!({
        "record": "summary",
        "experiment": "robustness",
        "config": {
            "dimension": cluster.dimension,
            "inlier_count": cluster.inlier_count,
            "outlier_count": cluster.outlier_count,
            "inlier_spread": cluster.inlier_spread,
            "outlier_min_angle": cluster.outlier_min_angle,
            "trials": report.trials,
            "resolved_iterations": report.iterations,
            "seed": cluster.seed,
        },
        "mode_median_wins": report.mode_median_wins,
        "geodesic_median_wins": report.geodesic_median_wins,
        "mode_median_win_rate": report.mode_median_win_rate,
        "geodesic_median_win_rate": report.geodesic_median_win_rate,
        "average_errors": report.average_errors,
        "max_errors": {
            "mean": max_of(|e| e.mean),
            "mode_median": max_of(|e| e.mode_median),
            "geodesic_median": max_of(|e| e.geodesic_median),
        },
        "no_outlier_error_bound": 2.0 * cluster.inlier_spread / (cluster.inlier_count as f64).sqrt(),
    }));
    Ok(records)
}
