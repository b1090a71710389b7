//! Robust aggregation of unit-norm descriptor sets.
//!
//! A descriptor set holds several feature vectors of one object, each lying on
//! the unit hypersphere. This crate estimates a central descriptor for such a
//! set and picks the member that best represents it:
//!
//! - [`robust`] is the scalar engine: Gaussian-kernel (Welsch/Leclerc)
//!   reweighting of a weighted mean, which walks from the mean through the
//!   median towards the mode as iterations accumulate.
//! - [`geometry`] applies it coordinate-wise to descriptor sets (the
//!   mode-median center) and provides the normalized mean, the intrinsic
//!   Karcher mean and the geodesic median for comparison, plus pose weighting
//!   and representative-member selection.
//! - [`synth`] generates seeded synthetic data and runs the convergence,
//!   reliability and robustness experiments.

pub mod error;
pub mod geometry;
pub mod robust;
pub mod sum;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{
    angular_distance, geodesic_median_center, karcher_center, mean_center, mode_median_center,
    pose_weight, select_by_center, select_pairwise, AggregationResult, CenterMethod, Descriptor,
    DescriptorSet, PairwiseExponent, SelectionReport, SelectionScheme, SolverOptions,
};
pub use robust::{
    iteration_count, robust_scalar_location, weighted_mean, weighted_variance, Iterations,
    RobustLocationTrace, Sample,
};
