//! Seeded synthetic data and the experiment runners built on it.
//!
//! All randomness comes from [`Stream`]: ChaCha8 keyed by a 64-bit seed, with
//! one independent stream per trial. Uniform draws take the top 53 bits of
//! each `u64` output and map them to the open interval `(0, 1)`; exponential
//! draws use the inverse CDF and normal draws use Box-Muller, so the whole
//! pipeline is reproducible from the seed alone.

mod cluster;
mod rng;
mod scalar;

pub use cluster::{
    run_robustness_experiment, sample_spherical_cluster, ClusterConfig, EstimatorErrors,
    RobustnessReport, RobustnessTrial, SyntheticCluster,
};
pub use rng::Stream;
pub use scalar::{
    reliability_checkpoints, run_convergence_experiment, run_reliability_experiment,
    sample_gamma2, ConvergenceCurve, Distribution, ReferenceValues, ReliabilityCheckpoint,
    ReliabilityReport, ScalarExperimentConfig, TrialTrace, GAMMA2_MEDIAN, MIN_RELIABILITY_TRIALS,
};
