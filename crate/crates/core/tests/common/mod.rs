#![allow(dead_code)]

use mrdesc_core::synth::{sample_spherical_cluster, ClusterConfig, Stream};
use mrdesc_core::{Descriptor, DescriptorSet};

pub fn cluster_config(dim: usize, inliers: usize, outliers: usize, spread: f64, seed: u64) -> ClusterConfig {
    ClusterConfig {
        dimension: dim,
        inlier_count: inliers,
        outlier_count: outliers,
        inlier_spread: spread,
        outlier_min_angle: 0.8,
        true_center: None,
        seed,
    }
}

pub fn cluster(dim: usize, k: usize, spread: f64, seed: u64) -> DescriptorSet {
    sample_spherical_cluster(&cluster_config(dim, k, 0, spread, seed)).unwrap().set
}

pub fn min_pairwise_dot(set: &DescriptorSet) -> f64 {
    let d = set.descriptors();
    let mut min = f64::INFINITY;
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            min = min.min(d[i].dot(&d[j]).unwrap());
        }
    }
    min
}

/// Seeded clean clusters whose members all have pairwise dot above `min_dot`.
pub fn tight_clusters(
    dim: usize,
    k: usize,
    spread: f64,
    min_dot: f64,
    count: usize,
    seed: u64,
) -> Vec<DescriptorSet> {
    (0u64..)
        .map(|i| cluster(dim, k, spread, seed.wrapping_mul(1_000_003).wrapping_add(i)))
        .filter(|s| min_pairwise_dot(s) > min_dot)
        .take(count)
        .collect()
}

/// Unit vectors with i.i.d. Gaussian directions; not clustered.
pub fn scattered(dim: usize, k: usize, stream: &mut Stream) -> DescriptorSet {
    let rows = (0..k)
        .map(|_| Descriptor::normalize((0..dim).map(|_| stream.normal()).collect()).unwrap())
        .collect();
    DescriptorSet::new(rows).unwrap()
}

/// Straightforward double loop over all pairs, using `acos` of the clamped
/// dot product.
pub fn naive_pairwise_index(set: &DescriptorSet, exponent: i32) -> usize {
    let d = set.descriptors();
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for k in 0..d.len() {
        let mut score = 0.0;
        for k2 in 0..d.len() {
            let dot: f64 = d[k].coords().iter().zip(d[k2].coords()).map(|(a, b)| a * b).sum();
            let angle = if k == k2 { 0.0 } else { dot.clamp(-1.0, 1.0).acos() };
            score += angle.powi(exponent);
        }
        if score < best_score {
            best_score = score;
            best = k;
        }
    }
    best
}

/// Random orthogonal matrix by Gram-Schmidt on a Gaussian matrix, row-major.
pub fn random_rotation(dim: usize, stream: &mut Stream) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while rows.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| stream.normal()).collect();
        for r in &rows {
            let p: f64 = v.iter().zip(r).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(r).for_each(|(a, b)| *a -= p * b);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            rows.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    rows
}

pub fn rotate(m: &[Vec<f64>], d: &Descriptor) -> Descriptor {
    let v = m
        .iter()
        .map(|row| row.iter().zip(d.coords()).map(|(a, b)| a * b).sum())
        .collect();
    Descriptor::normalize(v).unwrap()
}

pub fn rotate_set(m: &[Vec<f64>], set: &DescriptorSet) -> DescriptorSet {
    let rows = set.descriptors().iter().map(|d| rotate(m, d)).collect();
    DescriptorSet::with_epsilons(rows, set.epsilons().to_vec()).unwrap()
}
