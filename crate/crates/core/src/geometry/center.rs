//! Center estimators for a descriptor set.
//!
//! [`mode_median_center`] is the production path. The normalized mean is its
//! single-iteration special case, while the intrinsic Karcher mean and
//! geodesic median solve the sphere-level problems exactly and serve as
//! references at desk scale.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::sphere::{angle_between, exp_map, log_map, norm, Descriptor, DescriptorSet};
use crate::error::{Error, Result};
use crate::robust::{robust_scalar_location, Iterations, RobustLocationTrace, Sample};
use crate::sum::{dot, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterMethod {
    Mean,
    Karcher,
    GeodesicMedian,
    ModeMedian,
}

impl CenterMethod {
    pub const ALL: [CenterMethod; 4] = [
        CenterMethod::Mean,
        CenterMethod::Karcher,
        CenterMethod::GeodesicMedian,
        CenterMethod::ModeMedian,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CenterMethod::Mean => "mean",
            CenterMethod::Karcher => "karcher",
            CenterMethod::GeodesicMedian => "geodesic_median",
            CenterMethod::ModeMedian => "mode_median",
        }
    }
}

impl fmt::Display for CenterMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CenterMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationResult {
    pub center: Descriptor,
    pub method: CenterMethod,
    /// Final per-coordinate spread for the mode-median center, empty otherwise.
    pub per_coordinate_spread: Vec<f64>,
    pub iterations_used: usize,
}

/// Stopping rule for the intrinsic solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Converged once an update step is shorter than this many radians.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 1000,
        }
    }
}

/// Base-weighted Euclidean sum of the descriptors.
fn weighted_sum(set: &DescriptorSet) -> Vec<f64> {
    let mut acc = vec![CompensatedSum::new(); set.dim()];
    for (d, &eps) in set.descriptors().iter().zip(set.epsilons()) {
        for (a, c) in acc.iter_mut().zip(d.coords()) {
            *a += eps * c;
        }
    }
    acc.iter().map(CompensatedSum::value).collect()
}

/// Normalized weighted mean of the set. The weighted sum is projected
/// directly, so with unit weights this is exactly the normalized plain sum.
pub fn mean_center(set: &DescriptorSet) -> Result<AggregationResult> {
    let total = weighted_sum(set);
    if !(norm(&total) > 1e-12 * set.epsilon_total()) {
        return Err(Error::Unnormalizable);
    }
    Ok(AggregationResult {
        center: Descriptor::normalize(total)?,
        method: CenterMethod::Mean,
        per_coordinate_spread: Vec::new(),
        iterations_used: 0,
    })
}

/// Starting point for the intrinsic solvers; fails unless every active
/// descriptor lies in the open hemisphere around the normalized mean.
fn hemisphere_start(set: &DescriptorSet) -> Result<Vec<f64>> {
    let start = mean_center(set).map_err(|_| Error::ClusterTooDispersed)?.center;
    for (_, d, _) in set.active() {
        if d.dot(&start)? <= 0.0 {
            return Err(Error::ClusterTooDispersed);
        }
    }
    Ok(start.into_coords())
}

/// Starting point for the geodesic median. Descriptors outside the hemisphere
/// around the normalized mean are tolerated as long as the ones inside carry
/// more than half of the total weight; outliers far from the cluster are what
/// the median is meant to withstand.
fn majority_start(set: &DescriptorSet) -> Result<Vec<f64>> {
    let start = mean_center(set).map_err(|_| Error::ClusterTooDispersed)?.center;
    let mut inside = CompensatedSum::new();
    for (_, d, eps) in set.active() {
        if d.dot(&start)? > 0.0 {
            inside += eps;
        }
    }
    if 2.0 * inside.value() <= set.epsilon_total() {
        return Err(Error::ClusterTooDispersed);
    }
    Ok(start.into_coords())
}

fn intrinsic_result(
    coords: Vec<f64>,
    method: CenterMethod,
    iterations_used: usize,
) -> Result<AggregationResult> {
    Ok(AggregationResult {
        center: Descriptor::normalize(coords)?,
        method,
        per_coordinate_spread: Vec::new(),
        iterations_used,
    })
}

fn no_convergence(iterations: usize, last: Vec<f64>) -> Error {
    match Descriptor::normalize(last) {
        Ok(last) => Error::NoConvergence { iterations, last },
        Err(e) => e,
    }
}

/// Weighted Karcher (Frechet) mean: minimizes `sum eps_k * angle(v_k, w)^2`
/// by unit-step intrinsic gradient descent.
pub fn karcher_center(set: &DescriptorSet, options: &SolverOptions) -> Result<AggregationResult> {
    let mut w = hemisphere_start(set)?;
    let total = set.epsilon_total();
    for iteration in 0..options.max_iterations {
        let mut acc = vec![CompensatedSum::new(); w.len()];
        for (_, d, eps) in set.active() {
            let (tangent, _) = log_map(&w, d.coords());
            for (a, t) in acc.iter_mut().zip(&tangent) {
                *a += eps * t;
            }
        }
        let step: Vec<f64> = acc.iter().map(|a| a.value() / total).collect();
        let length = norm(&step);
        w = exp_map(&w, &step);
        if length < options.tolerance {
            return intrinsic_result(w, CenterMethod::Karcher, iteration);
        }
    }
    Err(no_convergence(options.max_iterations, w))
}

/// Whether data point `v` is the weighted geodesic median to within
/// `tolerance`. The pull of the other points must not exceed the combined
/// weight of the points coinciding with `v` by more than it takes to move the
/// optimum `tolerance` away: the excess pull divided by the Weiszfeld
/// denominator is the length of the step that would leave `v`.
fn is_median_at(set: &DescriptorSet, v: &[f64], tolerance: f64) -> bool {
    let mut pull = vec![CompensatedSum::new(); v.len()];
    let mut coincident_weight = 0.0;
    let mut inverse_total = CompensatedSum::new();
    for (_, d, eps) in set.active() {
        let (tangent, theta) = log_map(v, d.coords());
        if theta < tolerance {
            coincident_weight += eps;
            continue;
        }
        inverse_total += eps / theta;
        for (p, t) in pull.iter_mut().zip(&tangent) {
            *p += eps / theta * t;
        }
    }
    let pull: Vec<f64> = pull.iter().map(|p| p.value()).collect();
    let excess = norm(&pull) - coincident_weight;
    excess <= 0.0 || excess < tolerance * inverse_total.value()
}

/// Weighted geodesic median: minimizes `sum eps_k * angle(v_k, w)` by
/// Weiszfeld reweighting in the tangent space.
///
/// Descriptors within `tolerance` of the iterate are left out of that step.
/// Each step also tests the nearest descriptor for optimality and returns it
/// when it qualifies, since Weiszfeld only creeps towards a median that sits
/// on a data point. Plain Weiszfeld also contracts very slowly when the median
/// lies close to a data point, so the step is extended along its direction
/// while the objective keeps falling, and a Newton step replaces it whenever
/// that reaches a lower objective.
pub fn geodesic_median_center(
    set: &DescriptorSet,
    options: &SolverOptions,
) -> Result<AggregationResult> {
    let mut w = majority_start(set)?;
    let dim = w.len();
    for iteration in 0..options.max_iterations {
        let mut pull = vec![CompensatedSum::new(); dim];
        let mut inverse_total = CompensatedSum::new();
        let mut nearest: Option<(&Descriptor, f64)> = None;
        for (_, d, eps) in set.active() {
            let (tangent, theta) = log_map(&w, d.coords());
            if nearest.is_none_or(|(_, best)| theta < best) {
                nearest = Some((d, theta));
            }
            if theta < options.tolerance {
                continue;
            }
            let a = eps / theta;
            inverse_total += a;
            for (p, t) in pull.iter_mut().zip(&tangent) {
                *p += a * t;
            }
        }
        let inverse_total = inverse_total.value();

        if let Some((d, _)) = nearest {
            if inverse_total == 0.0 || is_median_at(set, d.coords(), options.tolerance) {
                return intrinsic_result(
                    d.coords().to_vec(),
                    CenterMethod::GeodesicMedian,
                    iteration,
                );
            }
        }

        let step: Vec<f64> = pull.iter().map(|p| p.value() / inverse_total).collect();
        let mut next = extrapolate(set, &w, &step);
        if let Some(newton) = newton_step(set, &w, options.tolerance) {
            let candidate = exp_map(&w, &newton);
            let reference = median_objective(set, &next);
            if median_objective(set, &candidate) <= reference * (1.0 + 4.0 * f64::EPSILON) {
                next = candidate;
            }
        }
        let moved = angle_between(&w, &next);
        w = next;
        if moved < options.tolerance {
            return intrinsic_result(w, CenterMethod::GeodesicMedian, iteration);
        }
    }
    Err(no_convergence(options.max_iterations, w))
}

fn median_objective(set: &DescriptorSet, w: &[f64]) -> f64 {
    set.active()
        .map(|(_, d, eps)| eps * angle_between(w, d.coords()))
        .collect::<CompensatedSum>()
        .value()
}

/// Newton step for the median objective at `w`, or `None` where the objective
/// is not smooth and convex (an iterate on a data point, or a descriptor at
/// least a right angle away) or the system is too large or singular.
///
/// The Hessian is `c P - sum a_k u_k u_k^T` with `a_k = eps_k cot(theta_k)`,
/// `c = sum a_k`, unit directions `u_k` and `P` the tangent projector, so the
/// step lies in the span of the `u_k` and needs only a K x K solve.
fn newton_step(set: &DescriptorSet, w: &[f64], tolerance: f64) -> Option<Vec<f64>> {
    const MAX_TERMS: usize = 256;
    let mut directions = Vec::new();
    let mut weights = Vec::new();
    let mut curvatures = Vec::new();
    for (_, d, eps) in set.active() {
        let (mut tangent, theta) = log_map(w, d.coords());
        if theta < tolerance || theta >= std::f64::consts::FRAC_PI_2 {
            return None;
        }
        tangent.iter_mut().for_each(|t| *t /= theta);
        directions.push(tangent);
        weights.push(eps);
        curvatures.push(eps / theta.tan());
    }
    let k = directions.len();
    if k > MAX_TERMS {
        return None;
    }
    let c: f64 = curvatures.iter().copied().collect::<CompensatedSum>().value();
    let system = DMatrix::from_fn(k, k, |i, j| {
        let identity = if i == j { c } else { 0.0 };
        identity - curvatures[i] * dot(&directions[i], &directions[j])
    });
    let y = system.lu().solve(&DVector::from_vec(weights))?;
    let mut step = vec![0.0; w.len()];
    for (u, yi) in directions.iter().zip(y.iter()) {
        step.iter_mut().zip(u).for_each(|(s, ui)| *s += yi * ui);
    }
    let length = norm(&step);
    (length.is_finite() && length < std::f64::consts::FRAC_PI_4).then_some(step)
}

/// Derivative of the median objective at `w` along the unit tangent `velocity`.
fn median_slope(set: &DescriptorSet, w: &[f64], velocity: &[f64]) -> f64 {
    set.active()
        .filter_map(|(_, d, eps)| {
            let (tangent, theta) = log_map(w, d.coords());
            (theta > 0.0).then(|| -eps * dot(&tangent, velocity) / theta)
        })
        .collect::<CompensatedSum>()
        .value()
}

/// Takes the Weiszfeld step, then keeps doubling it while the objective is
/// still falling, and finishes with a secant step once the slope changes sign.
/// Slopes are used instead of objective values because near the optimum those
/// differ by less than their rounding error.
fn extrapolate(set: &DescriptorSet, w: &[f64], step: &[f64]) -> Vec<f64> {
    const MAX_DOUBLINGS: usize = 12;
    let length = norm(step);
    if length == 0.0 {
        return w.to_vec();
    }
    let direction: Vec<f64> = step.iter().map(|s| s / length).collect();
    let point = |t: f64| -> Vec<f64> {
        let scaled: Vec<f64> = direction.iter().map(|d| d * t).collect();
        exp_map(w, &scaled)
    };
    let slope = |t: f64, at: &[f64]| -> f64 {
        let velocity: Vec<f64> = w
            .iter()
            .zip(&direction)
            .map(|(wi, di)| -t.sin() * wi + t.cos() * di)
            .collect();
        median_slope(set, at, &velocity)
    };
    let mut t = length;
    let mut best = point(t);
    let mut best_slope = slope(t, &best);
    for _ in 0..MAX_DOUBLINGS {
        if best_slope >= 0.0 || 2.0 * t >= std::f64::consts::FRAC_PI_2 {
            break;
        }
        let candidate = point(2.0 * t);
        let candidate_slope = slope(2.0 * t, &candidate);
        if candidate_slope >= 0.0 {
            let root = t + t * (-best_slope) / (candidate_slope - best_slope);
            return point(root);
        }
        t *= 2.0;
        best = candidate;
        best_slope = candidate_slope;
    }
    best
}

/// Runs the scalar robust location engine on every coordinate of the set,
/// with the descriptor weights as base weights.
///
/// `Iterations::Auto` resolves against the number of descriptors with
/// positive weight, so zero-weight descriptors cannot change the schedule.
pub fn coordinate_traces(
    set: &DescriptorSet,
    iterations: Iterations,
) -> Result<Vec<RobustLocationTrace>> {
    let q = iterations.resolve(set.active_count())?;
    let eps = set.epsilons();
    let mut samples = vec![Sample::new(0.0); set.len()];
    (0..set.dim())
        .map(|i| {
            for ((s, d), &e) in samples.iter_mut().zip(set.descriptors()).zip(eps) {
                *s = Sample::weighted(d.coords()[i], e);
            }
            robust_scalar_location(&samples, q)
        })
        .collect()
}

/// Coordinate-wise mode-median center, projected back onto the sphere.
pub fn mode_median_center(set: &DescriptorSet, iterations: Iterations) -> Result<AggregationResult> {
    let traces = coordinate_traces(set, iterations)?;
    let location: Vec<f64> = traces.iter().map(RobustLocationTrace::final_location).collect();
    let spread = traces.iter().map(RobustLocationTrace::final_spread).collect();
    let center = Descriptor::normalize(location).map_err(|_| Error::DegenerateModeMedian)?;
    Ok(AggregationResult {
        center,
        method: CenterMethod::ModeMedian,
        per_coordinate_spread: spread,
        iterations_used: traces[0].iterations_requested(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{angular_distance, normalize};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn d(c: &[f64]) -> Descriptor {
        normalize(c).unwrap()
    }

    fn set(rows: &[&[f64]]) -> DescriptorSet {
        DescriptorSet::new(rows.iter().map(|r| d(r)).collect()).unwrap()
    }

    fn all_centers(s: &DescriptorSet) -> Vec<AggregationResult> {
        let opts = SolverOptions::default();
        vec![
            mean_center(s).unwrap(),
            karcher_center(s, &opts).unwrap(),
            geodesic_median_center(s, &opts).unwrap(),
            mode_median_center(s, Iterations::Auto).unwrap(),
        ]
    }

    #[test]
    fn identical_descriptors_are_their_own_center() {
        let u = [0.2, -0.4, 0.5, 0.7];
        let s = set(&[&u, &u, &u, &u, &u]);
        for r in all_centers(&s) {
            let err = angular_distance(&r.center, &d(&u)).unwrap();
            assert!(err < 1e-15, "{:?}: {err}", r.method);
        }
        let k = karcher_center(&s, &SolverOptions::default()).unwrap();
        assert_eq!(k.iterations_used, 0);
    }

    #[test]
    fn mean_center_examples() {
        let s = set(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let r = mean_center(&s).unwrap();
        assert_eq!(r.method, CenterMethod::Mean);
        assert_eq!(r.iterations_used, 0);
        assert!((r.center.coords()[0] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((r.center.coords()[1] - FRAC_1_SQRT_2).abs() < 1e-15);

        let weighted = DescriptorSet::with_epsilons(s.descriptors().to_vec(), vec![3.0, 1.0]).unwrap();
        let r = mean_center(&weighted).unwrap();
        let expected = d(&[0.75, 0.25]);
        assert!(angular_distance(&r.center, &expected).unwrap() < 1e-15);
    }

    #[test]
    fn antipodal_pair_is_degenerate() {
        let s = set(&[&[1.0, 0.0, 0.0], &[-1.0, 0.0, 0.0]]);
        assert_eq!(mean_center(&s), Err(Error::Unnormalizable));
        let opts = SolverOptions::default();
        assert_eq!(karcher_center(&s, &opts), Err(Error::ClusterTooDispersed));
        assert_eq!(geodesic_median_center(&s, &opts), Err(Error::ClusterTooDispersed));
        assert_eq!(mode_median_center(&s, Iterations::Fixed(1)), Err(Error::DegenerateModeMedian));
    }

    #[test]
    fn wide_cluster_outside_hemisphere() {
        // Mean is +x, but the third point has negative dot with it.
        let s = set(&[&[1.0, 1.0, 0.0], &[1.0, -1.0, 0.0], &[-0.2, 0.0, 1.0], &[1.0, 0.0, -1.0]]);
        let m = mean_center(&s).unwrap().center;
        assert!(s.descriptors()[2].dot(&m).unwrap() <= 0.0);
        assert_eq!(
            karcher_center(&s, &SolverOptions::default()),
            Err(Error::ClusterTooDispersed)
        );
        assert!(geodesic_median_center(&s, &SolverOptions::default()).is_ok());
    }

    #[test]
    fn median_needs_a_weighted_majority_near_the_mean() {
        // The mean is +y; only the light third descriptor lies above the equator.
        let s = DescriptorSet::with_epsilons(
            vec![d(&[1.0, 0.0, 0.0]), d(&[-1.0, 0.0, 0.0]), d(&[0.0, 1.0, 0.0])],
            vec![1.0, 1.0, 0.1],
        )
        .unwrap();
        assert_eq!(
            geodesic_median_center(&s, &SolverOptions::default()),
            Err(Error::ClusterTooDispersed)
        );
    }

    #[test]
    fn two_points_karcher_is_geodesic_midpoint() {
        let a = d(&[1.0, 0.1, 0.0, 0.3]);
        let b = d(&[0.2, 1.0, 0.5, 0.0]);
        let s = DescriptorSet::new(vec![a.clone(), b.clone()]).unwrap();
        let k = karcher_center(&s, &SolverOptions::default()).unwrap();
        let da = angular_distance(&k.center, &a).unwrap();
        let db = angular_distance(&k.center, &b).unwrap();
        let ab = angular_distance(&a, &b).unwrap();
        assert!((da - db).abs() < 1e-10);
        assert!((da + db - ab).abs() < 1e-10);
    }

    #[test]
    fn symmetric_triangle_median_is_pole() {
        let alpha: f64 = 0.4;
        let rows: Vec<Descriptor> = (0..3)
            .map(|j| {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / 3.0;
                d(&[alpha.sin() * phi.cos(), alpha.sin() * phi.sin(), alpha.cos()])
            })
            .collect();
        let s = DescriptorSet::new(rows).unwrap();
        let pole = d(&[0.0, 0.0, 1.0]);
        for r in all_centers(&s) {
            if r.method == CenterMethod::ModeMedian {
                continue;
            }
            assert!(angular_distance(&r.center, &pole).unwrap() < 1e-10, "{:?}", r.method);
        }
    }

    #[test]
    fn median_snaps_to_dominant_data_point() {
        // A heavy point pulls the median onto itself.
        let s = DescriptorSet::with_epsilons(
            vec![d(&[1.0, 0.0, 0.0]), d(&[1.0, 0.3, 0.0]), d(&[1.0, 0.0, 0.3])],
            vec![5.0, 1.0, 1.0],
        )
        .unwrap();
        let r = geodesic_median_center(&s, &SolverOptions::default()).unwrap();
        assert_eq!(r.center, s.descriptors()[0]);
    }

    #[test]
    fn median_starting_on_data_point() {
        // The normalized mean lands exactly on the middle point.
        let s = set(&[
            &[1.0, -0.5, 0.0],
            &[1.0, 0.0, 0.0],
            &[1.0, 0.5, 0.0],
            &[1.0, 0.0, 0.4],
            &[1.0, 0.0, -0.4],
        ]);
        let r = geodesic_median_center(&s, &SolverOptions::default()).unwrap();
        let objective = |w: &Descriptor| -> f64 {
            s.descriptors().iter().map(|v| angular_distance(v, w).unwrap()).sum()
        };
        let best = objective(&r.center);
        for v in s.descriptors() {
            assert!(best <= objective(v) + 1e-12);
        }
    }

    #[test]
    fn karcher_reports_non_convergence() {
        let s = set(&[&[1.0, 0.2, 0.0], &[1.0, -0.3, 0.4], &[0.9, 0.0, -0.5]]);
        let opts = SolverOptions {
            tolerance: 1e-300,
            max_iterations: 3,
        };
        match karcher_center(&s, &opts) {
            Err(Error::NoConvergence { iterations, last }) => {
                assert_eq!(iterations, 3);
                assert!((norm(last.coords()) - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mode_median_single_iteration_equals_mean() {
        let s = DescriptorSet::with_epsilons(
            vec![d(&[1.0, 0.2, 0.1]), d(&[0.8, -0.3, 0.4]), d(&[0.9, 0.1, -0.5])],
            vec![1.0, 0.5, 2.0],
        )
        .unwrap();
        let mm = mode_median_center(&s, Iterations::Fixed(1)).unwrap();
        let mean = mean_center(&s).unwrap();
        assert!(angular_distance(&mm.center, &mean.center).unwrap() < 1e-12);
        assert_eq!(mm.iterations_used, 1);
        assert_eq!(mm.per_coordinate_spread.len(), 3);
    }

    #[test]
    fn mode_median_ignores_outlying_coordinate_values() {
        let mut rows: Vec<Descriptor> = (0..9)
            .map(|i| {
                let t = 0.01 * (i as f64 - 4.0);
                d(&[1.0, t, -t * 0.5])
            })
            .collect();
        rows.push(d(&[0.2, 1.0, 0.8]));
        let s = DescriptorSet::new(rows).unwrap();
        let truth = d(&[1.0, 0.0, 0.0]);
        let mm = mode_median_center(&s, Iterations::Auto).unwrap();
        let mean = mean_center(&s).unwrap();
        let e_mm = angular_distance(&mm.center, &truth).unwrap();
        let e_mean = angular_distance(&mean.center, &truth).unwrap();
        assert!(e_mm < e_mean / 10.0, "{e_mm} vs {e_mean}");
    }

    #[test]
    fn method_names_round_trip() {
        for m in CenterMethod::ALL {
            assert_eq!(m.to_string().parse::<CenterMethod>().unwrap(), m);
        }
        assert!("median".parse::<CenterMethod>().is_err());
    }
}
