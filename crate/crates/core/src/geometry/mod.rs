//! Hypersphere-level computation over descriptor sets.

mod center;
mod pose;
mod select;
mod sphere;

pub use center::{
    coordinate_traces, geodesic_median_center, karcher_center, mean_center, mode_median_center,
    AggregationResult, CenterMethod, SolverOptions,
};
pub use pose::pose_weight;
pub use select::{select_by_center, select_pairwise, PairwiseExponent, SelectionReport, SelectionScheme};
pub use sphere::{angular_distance, normalize, Descriptor, DescriptorSet};
pub(crate) use sphere::{angle_between, exp_map};
