//! Shared fixtures for the criterion benchmarks.

use mrdesc_core::synth::{sample_spherical_cluster, ClusterConfig};
use mrdesc_core::DescriptorSet;

/// A seeded cluster of `inliers + outliers` descriptors in `dim` dimensions.
pub fn cluster(dim: usize, inliers: usize, outliers: usize, seed: u64) -> DescriptorSet {
    let config = ClusterConfig {
        dimension: dim,
        inlier_count: inliers,
        outlier_count: outliers,
        inlier_spread: 0.05,
        outlier_min_angle: 0.8,
        true_center: None,
        seed,
    };
    sample_spherical_cluster(&config)
        .expect("benchmark cluster config is valid")
        .set
}
