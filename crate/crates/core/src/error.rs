use thiserror::Error;

use crate::geometry::Descriptor;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty sample set")]
    EmptySamples,
    #[error("degenerate weights")]
    DegenerateWeights,
    #[error("all weights zero")]
    AllWeightsZero,
    #[error("length mismatch: {values} values but {weights} weights")]
    LengthMismatch { values: usize, weights: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("invalid weight {value} at index {index}")]
    InvalidWeight { index: usize, value: f64 },
    #[error("iteration count must be positive")]
    ZeroIterations,
    #[error("unnormalizable vector")]
    Unnormalizable,
    #[error("descriptor norm {norm} is not unit")]
    NotUnitNorm { norm: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("descriptor dimension must be at least 2, found {0}")]
    DimensionTooSmall(usize),
    #[error("descriptor set needs at least 2 descriptors, found {0}")]
    TooFewDescriptors(usize),
    #[error("cluster too dispersed")]
    ClusterTooDispersed,
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize, last: Descriptor },
    #[error("degenerate mode-median vector")]
    DegenerateModeMedian,
    #[error("pose angle {0} outside [0, pi]")]
    InvalidPoseAngle(f64),
    #[error("pose exponent {0} must be at least 2")]
    InvalidPoseExponent(u32),
    #[error("insufficient trials: {found} given, at least {required} required")]
    InsufficientTrials { found: usize, required: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Stable snake_case identifier for machine-readable reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptySamples => "empty_samples",
            Error::DegenerateWeights => "degenerate_weights",
            Error::AllWeightsZero => "all_weights_zero",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::InvalidWeight { .. } => "invalid_weight",
            Error::ZeroIterations => "zero_iterations",
            Error::Unnormalizable => "unnormalizable",
            Error::NotUnitNorm { .. } => "not_unit_norm",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::DimensionTooSmall(_) => "dimension_too_small",
            Error::TooFewDescriptors(_) => "too_few_descriptors",
            Error::ClusterTooDispersed => "cluster_too_dispersed",
            Error::NoConvergence { .. } => "no_convergence",
            Error::DegenerateModeMedian => "degenerate_mode_median",
            Error::InvalidPoseAngle(_) => "invalid_pose_angle",
            Error::InvalidPoseExponent(_) => "invalid_pose_exponent",
            Error::InsufficientTrials { .. } => "insufficient_trials",
            Error::InvalidConfig(_) => "invalid_config",
        }
    }

    /// True for failures of the numerics (degenerate averages, solver
    /// non-convergence) as opposed to malformed input or configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Unnormalizable
                | Error::ClusterTooDispersed
                | Error::NoConvergence { .. }
                | Error::DegenerateModeMedian
                | Error::DegenerateWeights
        )
    }
}
