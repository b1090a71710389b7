//! Command-line front end for `mrdesc_core`: descriptor file formats, the
//! `aggregate` and `select` reports, and the synthetic `bench` experiments.

pub mod aggregate;
pub mod bench;
mod cli;
pub mod error;
pub mod format;

pub use aggregate::{run_aggregate, run_select, AggregateReport, OutputFormat, RunConfig};
pub use bench::{run_bench, BenchConfig, Experiment};
pub use cli::run;
pub use error::{CliError, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
pub use format::{
    csv_vector, parse_descriptor_bytes, read_descriptor_file, write_binary, write_descriptors,
    DescriptorFile, ParseOptions,
};
