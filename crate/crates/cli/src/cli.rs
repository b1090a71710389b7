use std::ffi::OsString;
use std::fs::File;
use std::io::{Read, Write};
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use mrdesc_core::synth::Distribution;
use mrdesc_core::{CenterMethod, Iterations, SelectionScheme, SolverOptions};

use crate::aggregate::{run_aggregate, run_select, OutputFormat, RunConfig};
use crate::bench::{run_bench, BenchConfig, Experiment};
use crate::error::{CliError, Result, EXIT_OK, EXIT_USAGE};
use crate::format::{read_descriptor_file, ParseOptions};

#[derive(Debug, Parser)]
#[command(name = "mrdesc", version, about = "Robust centers and representative members of descriptor sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a cluster center and, optionally, the most representative descriptor.
    Aggregate(AggregateArgs),
    /// Report only the most representative descriptor.
    Select(AggregateArgs),
    /// Run a seeded synthetic experiment and print JSON lines.
    Bench(BenchArgs),
}

/// A selection scheme, or `none`.
#[derive(Debug, Clone, Copy)]
struct SchemeArg(Option<SelectionScheme>);

impl FromStr for SchemeArg {
    type Err = mrdesc_core::Error;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "none" {
            Ok(SchemeArg(None))
        } else {
            s.parse().map(|scheme| SchemeArg(Some(scheme)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum OutputArg {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct AggregateArgs {
    /// Descriptor file, or `-` for standard input.
    #[arg(long, default_value = "-")]
    input: String,
    /// mean, karcher, geodesic_median or mode_median.
    #[arg(long, default_value = "mode_median")]
    method: CenterMethod,
    /// center_similarity, pairwise_squared, pairwise_absolute or none.
    #[arg(long, default_value = "center_similarity")]
    scheme: SchemeArg,
    /// Mode-median iterations: a positive integer or `auto`.
    #[arg(long, default_value = "auto")]
    iterations: Iterations,
    /// Weight each descriptor by cos^p of its pose angle (needs a theta column).
    #[arg(long, value_name = "P", value_parser = clap::value_parser!(u32).range(2..))]
    pose_exponent: Option<u32>,
    /// Accept rows that are not unit length and project them onto the sphere.
    #[arg(long)]
    renormalize: bool,
    #[arg(long, value_enum, default_value = "json")]
    output: OutputArg,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// converge, reliability or robustness.
    experiment: Experiment,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reweighting iterations: a positive integer or `auto`.
    #[arg(long, default_value = "auto")]
    iterations: Iterations,
    /// Sample distribution for converge and reliability.
    #[arg(long, default_value = "gamma_shape2")]
    distribution: Distribution,
    /// Samples per trial (default 1000000 for converge, 10000 for reliability).
    #[arg(long)]
    samples: Option<usize>,
    /// Number of trials (default 1, 200 or 100 by experiment).
    #[arg(long)]
    trials: Option<usize>,
    /// Descriptor dimension for robustness.
    #[arg(long, default_value_t = 128)]
    dim: usize,
    #[arg(long, default_value_t = 40)]
    inliers: usize,
    #[arg(long, default_value_t = 10)]
    outliers: usize,
    /// RMS angle of inliers around the planted center, in radians.
    #[arg(long, default_value_t = 0.05)]
    spread: f64,
    /// Smallest angle between an outlier and the planted center, in radians.
    #[arg(long, default_value_t = 0.8)]
    min_angle: f64,
}

impl AggregateArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            method: self.method,
            scheme: self.scheme.0,
            iterations: self.iterations,
            pose_exponent: self.pose_exponent,
            renormalize: self.renormalize,
            output: match self.output {
                OutputArg::Json => OutputFormat::Json,
                OutputArg::Csv => OutputFormat::Csv,
            },
            solver: SolverOptions::default(),
            input: self.input.clone(),
        }
    }
}

impl BenchArgs {
    fn config(&self) -> BenchConfig {
        BenchConfig {
            experiment: self.experiment,
            seed: self.seed,
            iterations: self.iterations,
            distribution: self.distribution,
            samples: self.samples,
            trials: self.trials,
            dimension: self.dim,
            inliers: self.inliers,
            outliers: self.outliers,
            spread: self.spread,
            min_angle: self.min_angle,
        }
    }
}

/// Runs the command line `args` (including the program name) and returns the
/// process exit status. Errors are written to `stderr` as a one-line JSON
/// object with `code`, `kind` and `message` fields.
pub fn run<I, T>(args: I, stdin: impl Read, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command, stdin, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            e.exit_code()
        }
    }
}

fn execute(command: Command, stdin: impl Read, stdout: &mut impl Write) -> Result<()> {
    match command {
        Command::Aggregate(args) => {
            let config = args.config();
            let input = load(&config, stdin)?;
            let report = run_aggregate(&config, input)?;
            stdout.write_all(report.render(config.output).as_bytes())?;
        }
        Command::Select(args) => {
            let config = args.config();
            if config.scheme.is_none() {
                return Err(CliError::Usage("select needs a selection scheme other than none".into()));
            }
            let input = load(&config, stdin)?;
            let report = run_select(&config, input)?;
            stdout.write_all(report.render(config.output).as_bytes())?;
        }
        Command::Bench(args) => {
            for line in run_bench(&args.config())? {
                writeln!(stdout, "{line}")?;
            }
        }
    }
    Ok(())
}

fn load(config: &RunConfig, stdin: impl Read) -> Result<crate::format::DescriptorFile> {
    config.validate()?;
    let options = ParseOptions { renormalize: config.renormalize };
    if config.input == "-" {
        read_descriptor_file(stdin, options)
    } else {
        let file = File::open(&config.input)
            .map_err(|source| CliError::Read { path: config.input.clone(), source })?;
        read_descriptor_file(file, options)
    }
}
