//! Picking the most representative member of a descriptor set.
//!
//! Scores are "lower is better". Descriptors with zero weight are not
//! candidates (their score is `+inf`) and do not vote in pairwise schemes.
//! Ties go to the lowest index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::sphere::{angle_between, check_dims, Descriptor, DescriptorSet};
use crate::error::{Error, Result};
use crate::sum::{self, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionScheme {
    /// Closest member to a given center.
    CenterSimilarity,
    /// Smallest sum of squared angles to the other members.
    PairwiseSquared,
    /// Smallest sum of angles to the other members.
    PairwiseAbsolute,
}

impl SelectionScheme {
    pub const ALL: [SelectionScheme; 3] = [
        SelectionScheme::CenterSimilarity,
        SelectionScheme::PairwiseSquared,
        SelectionScheme::PairwiseAbsolute,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SelectionScheme::CenterSimilarity => "center_similarity",
            SelectionScheme::PairwiseSquared => "pairwise_squared",
            SelectionScheme::PairwiseAbsolute => "pairwise_absolute",
        }
    }
}

impl fmt::Display for SelectionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown selection scheme `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairwiseExponent {
    Absolute,
    Squared,
}

impl PairwiseExponent {
    fn apply(self, angle: f64) -> f64 {
        match self {
            PairwiseExponent::Absolute => angle,
            PairwiseExponent::Squared => angle * angle,
        }
    }

    pub fn scheme(self) -> SelectionScheme {
        match self {
            PairwiseExponent::Absolute => SelectionScheme::PairwiseAbsolute,
            PairwiseExponent::Squared => SelectionScheme::PairwiseSquared,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub selected_index: usize,
    pub scores: Vec<f64>,
    pub scheme: SelectionScheme,
}

fn lowest_score(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s < scores[best] {
            best = i;
        }
    }
    best
}

/// Selects the member with the largest dot product with `center`.
pub fn select_by_center(set: &DescriptorSet, center: &Descriptor) -> Result<SelectionReport> {
    check_dims(set.dim(), center.dim())?;
    let scores: Vec<f64> = set
        .descriptors()
        .iter()
        .zip(set.epsilons())
        .map(|(d, &eps)| {
            if eps > 0.0 {
                -sum::dot(d.coords(), center.coords())
            } else {
                f64::INFINITY
            }
        })
        .collect();
    Ok(SelectionReport {
        selected_index: lowest_score(&scores),
        scores,
        scheme: SelectionScheme::CenterSimilarity,
    })
}

/// Selects the member minimizing the weighted sum of (squared) angles to all
/// other active members. The self term is zero by definition.
pub fn select_pairwise(set: &DescriptorSet, exponent: PairwiseExponent) -> SelectionReport {
    let k = set.len();
    let eps = set.epsilons();
    let mut acc = vec![CompensatedSum::new(); k];
    let active: Vec<usize> = set.active().map(|(i, _, _)| i).collect();
    for (a, &i) in active.iter().enumerate() {
        for &j in &active[a + 1..] {
            let cost = exponent.apply(angle_between(
                set.descriptors()[i].coords(),
                set.descriptors()[j].coords(),
            ));
            acc[i] += eps[j] * cost;
            acc[j] += eps[i] * cost;
        }
    }
    let scores: Vec<f64> = acc
        .iter()
        .zip(eps)
        .map(|(a, &e)| if e > 0.0 { a.value() } else { f64::INFINITY })
        .collect();
    SelectionReport {
        selected_index: lowest_score(&scores),
        scores,
        scheme: exponent.scheme(),
    }
}
