use serde::Serialize;

use mrdesc_core::{
    geodesic_median_center, karcher_center, mean_center, mode_median_center, select_by_center,
    select_pairwise, AggregationResult, CenterMethod, DescriptorSet, Iterations, PairwiseExponent,
    SelectionReport, SelectionScheme, SolverOptions,
};

use crate::error::{CliError, Result};
use crate::format::{self, DescriptorFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Everything that determines the outcome of an `aggregate` or `select` run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: CenterMethod,
    /// `None` skips selection.
    pub scheme: Option<SelectionScheme>,
    pub iterations: Iterations,
    pub pose_exponent: Option<u32>,
    pub renormalize: bool,
    pub output: OutputFormat,
    pub solver: SolverOptions,
    /// Where the descriptors came from, `-` for standard input.
    pub input: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            method: CenterMethod::ModeMedian,
            scheme: Some(SelectionScheme::CenterSimilarity),
            iterations: Iterations::Auto,
            pose_exponent: None,
            renormalize: false,
            output: OutputFormat::Json,
            solver: SolverOptions::default(),
            input: "-".into(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.pose_exponent {
            if p < 2 {
                return Err(CliError::Usage(format!("pose exponent must be at least 2, found {p}")));
            }
        }
        if self.iterations == Iterations::Fixed(0) {
            return Err(CliError::Usage("iterations must be positive or auto".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveConfig {
    pub method: CenterMethod,
    pub scheme: String,
    pub iterations: String,
    /// The iteration count the mode-median schedule uses for this input.
    pub resolved_iterations: usize,
    pub pose_exponent: Option<u32>,
    pub renormalize: bool,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub input: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonSummary {
    pub min: f64,
    pub max: f64,
    pub sum: f64,
    pub zero_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub count: usize,
    pub dim: usize,
    pub fields: String,
    pub active_count: usize,
    pub renormalized_rows: usize,
    pub epsilon: EpsilonSummary,
}

/// A selection with infinite scores written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionBlock {
    pub scheme: SelectionScheme,
    pub selected_index: usize,
    pub scores: Vec<Option<f64>>,
}

impl From<&SelectionReport> for SelectionBlock {
    fn from(report: &SelectionReport) -> Self {
        SelectionBlock {
            scheme: report.scheme,
            selected_index: report.selected_index,
            scores: report.scores.iter().map(|s| s.is_finite().then_some(*s)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub config: EffectiveConfig,
    pub input: InputDigest,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregation: Option<AggregationResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionBlock>,
    #[serde(skip)]
    set: DescriptorSet,
    #[serde(skip)]
    selection_only: bool,
}

impl AggregateReport {
    pub fn set(&self) -> &DescriptorSet {
        &self.set
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// The center as a descriptor file, or the selected member for `select`.
    pub fn to_csv(&self) -> String {
        match (&self.aggregation, &self.selection) {
            (_, Some(selection)) if self.selection_only => {
                format::write_descriptors([&self.set.descriptors()[selection.selected_index]])
            }
            (Some(result), _) => format::csv_vector(result),
            _ => String::new(),
        }
    }

    pub fn render(&self, output: OutputFormat) -> String {
        match output {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }
}

/// Computes the chosen center and, if a scheme is configured, the most
/// representative descriptor.
pub fn run_aggregate(config: &RunConfig, input: DescriptorFile) -> Result<AggregateReport> {
    run(config, input, true)
}

/// Like [`run_aggregate`], but computes a center only when the selection
/// scheme needs one. A scheme is required.
pub fn run_select(config: &RunConfig, input: DescriptorFile) -> Result<AggregateReport> {
    if config.scheme.is_none() {
        return Err(CliError::Usage("select needs a selection scheme".into()));
    }
    run(config, input, false)
}

fn run(config: &RunConfig, input: DescriptorFile, always_center: bool) -> Result<AggregateReport> {
    config.validate()?;
    let fields = input.fields;
    let renormalized_rows = input.renormalized_rows;
    let set = input.into_set(config.pose_exponent)?;
    let resolved_iterations = config.iterations.resolve(set.active_count())?;

    let needs_center = always_center || config.scheme == Some(SelectionScheme::CenterSimilarity);
    let aggregation = needs_center.then(|| compute_center(config, &set)).transpose()?;
    let selection = match config.scheme {
        None => None,
        Some(SelectionScheme::CenterSimilarity) => {
            let center = &aggregation.as_ref().expect("center computed for this scheme").center;
            Some(select_by_center(&set, center)?)
        }
        Some(SelectionScheme::PairwiseSquared) => Some(select_pairwise(&set, PairwiseExponent::Squared)),
        Some(SelectionScheme::PairwiseAbsolute) => Some(select_pairwise(&set, PairwiseExponent::Absolute)),
    };

    Ok(AggregateReport {
        config: EffectiveConfig {
            method: config.method,
            scheme: config.scheme.map_or("none", |s| s.as_str()).to_string(),
            iterations: config.iterations.to_string(),
            resolved_iterations,
            pose_exponent: config.pose_exponent,
            renormalize: config.renormalize,
            tolerance: config.solver.tolerance,
            max_iterations: config.solver.max_iterations,
            input: config.input.clone(),
        },
        input: digest(&set, fields.as_str(), renormalized_rows),
        aggregation,
        selection: selection.as_ref().map(SelectionBlock::from),
        set,
        selection_only: !always_center,
    })
}

fn compute_center(config: &RunConfig, set: &DescriptorSet) -> Result<AggregationResult> {
    Ok(match config.method {
        CenterMethod::Mean => mean_center(set)?,
        CenterMethod::Karcher => karcher_center(set, &config.solver)?,
        CenterMethod::GeodesicMedian => geodesic_median_center(set, &config.solver)?,
        CenterMethod::ModeMedian => mode_median_center(set, config.iterations)?,
    })
}

fn digest(set: &DescriptorSet, fields: &str, renormalized_rows: usize) -> InputDigest {
    let eps = set.epsilons();
    InputDigest {
        count: set.len(),
        dim: set.dim(),
        fields: fields.to_string(),
        active_count: set.active_count(),
        renormalized_rows,
        epsilon: EpsilonSummary {
            min: eps.iter().copied().fold(f64::INFINITY, f64::min),
            max: eps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            sum: set.epsilon_total(),
            zero_count: eps.iter().filter(|&&e| e == 0.0).count(),
        },
    }
}
