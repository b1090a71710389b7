//! Descriptor file formats.
//!
//! The text format is a headered CSV:
//!
//! ```text
//! # dim=4 count=2 fields=coords,eps,theta
//! 0.5,0.5,0.5,0.5,1,0.1
//! 1,0,0,0,0.5,0.7
//! ```
//!
//! `fields` is `coords` optionally followed by `eps` and then `theta` (pose
//! angle in radians). Blank lines and further `#` lines are ignored. Large
//! galleries may instead use the packed binary layout: the magic bytes
//! [`BINARY_MAGIC`], little-endian `u32` dimension and count, then the rows
//! as little-endian `f64` coordinates.

use std::fmt::Write as _;
use std::io::Read;

use mrdesc_core::{pose_weight, sum, AggregationResult, Descriptor, DescriptorSet};

use crate::error::{CliError, Result};

pub const BINARY_MAGIC: &[u8; 8] = b"MRDESC\x00\x01";

/// Rows within this distance of unit norm are renormalized silently.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Fields {
    pub eps: bool,
    pub theta: bool,
}

impl Fields {
    fn parse(spec: &str) -> Option<Self> {
        match spec {
            "coords" => Some(Fields { eps: false, theta: false }),
            "coords,eps" => Some(Fields { eps: true, theta: false }),
            "coords,theta" => Some(Fields { eps: false, theta: true }),
            "coords,eps,theta" => Some(Fields { eps: true, theta: true }),
            _ => None,
        }
    }

    fn extra(self) -> usize {
        usize::from(self.eps) + usize::from(self.theta)
    }

    pub fn as_str(self) -> &'static str {
        match (self.eps, self.theta) {
            (false, false) => "coords",
            (true, false) => "coords,eps",
            (false, true) => "coords,theta",
            (true, true) => "coords,eps,theta",
        }
    }
}

/// A parsed descriptor file before weighting is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorFile {
    pub dim: usize,
    pub fields: Fields,
    pub descriptors: Vec<Descriptor>,
    pub epsilons: Vec<f64>,
    pub thetas: Option<Vec<f64>>,
    /// Number of rows whose norm was off by more than the silent tolerance.
    pub renormalized_rows: usize,
    /// Source line (text) or record (binary) number of each row, 1-based.
    pub row_lines: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParseOptions {
    pub renormalize: bool,
}

impl DescriptorFile {
    pub fn count(&self) -> usize {
        self.descriptors.len()
    }

    /// Builds the weighted set, multiplying each weight by `cos^p` of its pose
    /// angle when a pose exponent is given.
    pub fn into_set(self, pose_exponent: Option<u32>) -> Result<DescriptorSet> {
        let mut epsilons = self.epsilons;
        if let Some(p) = pose_exponent {
            let thetas = self.thetas.ok_or_else(|| {
                CliError::Input("pose weighting needs a theta column in the input".into())
            })?;
            for ((eps, theta), line) in epsilons.iter_mut().zip(thetas).zip(&self.row_lines) {
                let weight = pose_weight(theta, p)
                    .map_err(|e| CliError::parse(*line, e.to_string()))?;
                *eps *= weight;
            }
        }
        if epsilons.iter().all(|&e| e == 0.0) {
            return Err(CliError::NoValidDescriptors);
        }
        Ok(DescriptorSet::with_epsilons(self.descriptors, epsilons)?)
    }
}

/// Reads a descriptor file in either format from any reader.
pub fn read_descriptor_file(mut reader: impl Read, options: ParseOptions) -> Result<DescriptorFile> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    parse_descriptor_bytes(&bytes, options)
}

pub fn parse_descriptor_bytes(bytes: &[u8], options: ParseOptions) -> Result<DescriptorFile> {
    if bytes.starts_with(BINARY_MAGIC) {
        return parse_binary(&bytes[BINARY_MAGIC.len()..], options);
    }
    let text = std::str::from_utf8(bytes)
        .map_err(|e| CliError::Input(format!("input is neither UTF-8 text nor binary descriptors: {e}")))?;
    parse_text(text, options)
}

struct Header {
    dim: usize,
    count: usize,
    fields: Fields,
}

fn parse_header(line: &str) -> Result<Header> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| CliError::parse(1, "expected header `# dim=N count=K fields=...`"))?;
    let (mut dim, mut count, mut fields) = (None, None, Fields::default());
    for token in body.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| CliError::parse(1, format!("malformed header entry `{token}`")))?;
        match key {
            "dim" => dim = Some(parse_count(value, "dim")?),
            "count" => count = Some(parse_count(value, "count")?),
            "fields" => {
                fields = Fields::parse(value)
                    .ok_or_else(|| CliError::parse(1, format!("unknown field list `{value}`")))?
            }
            _ => return Err(CliError::parse(1, format!("unknown header key `{key}`"))),
        }
    }
    let dim = dim.ok_or_else(|| CliError::parse(1, "header lacks dim"))?;
    let count = count.ok_or_else(|| CliError::parse(1, "header lacks count"))?;
    if dim < 2 {
        return Err(CliError::parse(1, format!("dim must be at least 2, found {dim}")));
    }
    Ok(Header { dim, count, fields })
}

fn parse_count(value: &str, key: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| CliError::parse(1, format!("{key} must be a non-negative integer, found `{value}`")))
}

fn parse_text(text: &str, options: ParseOptions) -> Result<DescriptorFile> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let header = match lines.next() {
        Some((_, line)) => parse_header(line)?,
        None => return Err(CliError::parse(1, "empty input")),
    };
    let mut builder = Builder::new(header.dim, header.fields, header.count, options);
    let mut last_line = 1;
    for (number, line) in lines {
        last_line = number;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if builder.rows() == header.count {
            return Err(CliError::parse(number, format!("more rows than the declared count {}", header.count)));
        }
        let values = line
            .split(',')
            .map(|field| {
                let field = field.trim();
                field
                    .parse::<f64>()
                    .map_err(|_| CliError::parse(number, format!("non-numeric value `{field}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        builder.push(number, values)?;
    }
    if builder.rows() != header.count {
        return Err(CliError::parse(
            last_line,
            format!("expected {} rows, found {}", header.count, builder.rows()),
        ));
    }
    Ok(builder.finish())
}

fn parse_binary(body: &[u8], options: ParseOptions) -> Result<DescriptorFile> {
    let word = |at: usize| -> Result<usize> {
        body.get(at..at + 4)
            .map(|b| u32::from_le_bytes(b.try_into().expect("slice of four bytes")) as usize)
            .ok_or_else(|| CliError::Input("binary header truncated".into()))
    };
    let (dim, count) = (word(0)?, word(4)?);
    if dim < 2 {
        return Err(CliError::Input(format!("dim must be at least 2, found {dim}")));
    }
    let rows = &body[8..];
    let row_bytes = dim * 8;
    if rows.len() != count * row_bytes {
        return Err(CliError::Input(format!(
            "binary body holds {} bytes, expected {} for {count} rows of dimension {dim}",
            rows.len(),
            count * row_bytes
        )));
    }
    let mut builder = Builder::new(dim, Fields::default(), count, options);
    for (index, row) in rows.chunks_exact(row_bytes).enumerate() {
        let values = row
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("slice of eight bytes")))
            .collect();
        builder.push(index + 1, values)?;
    }
    Ok(builder.finish())
}

struct Builder {
    dim: usize,
    fields: Fields,
    options: ParseOptions,
    descriptors: Vec<Descriptor>,
    epsilons: Vec<f64>,
    thetas: Vec<f64>,
    renormalized_rows: usize,
    row_lines: Vec<usize>,
}

impl Builder {
    fn new(dim: usize, fields: Fields, count: usize, options: ParseOptions) -> Self {
        Builder {
            dim,
            fields,
            options,
            descriptors: Vec::with_capacity(count),
            epsilons: Vec::with_capacity(count),
            thetas: Vec::new(),
            renormalized_rows: 0,
            row_lines: Vec::with_capacity(count),
        }
    }

    fn rows(&self) -> usize {
        self.descriptors.len()
    }

    fn push(&mut self, line: usize, mut values: Vec<f64>) -> Result<()> {
        let expected = self.dim + self.fields.extra();
        if values.len() != expected {
            return Err(CliError::parse(
                line,
                format!("expected {expected} fields ({}), found {}", self.fields.as_str(), values.len()),
            ));
        }
        let extras = values.split_off(self.dim);
        let mut extras = extras.into_iter();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::parse(line, "non-finite coordinate"));
        }
        let eps = if self.fields.eps { extras.next().expect("eps field present") } else { 1.0 };
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(CliError::parse(line, format!("weight {eps} must be finite and non-negative")));
        }
        if self.fields.theta {
            let theta = extras.next().expect("theta field present");
            if !(0.0..=std::f64::consts::PI).contains(&theta) {
                return Err(CliError::parse(line, format!("pose angle {theta} outside [0, pi]")));
            }
            self.thetas.push(theta);
        }

        let norm = sum::dot(&values, &values).sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
            if !self.options.renormalize {
                return Err(CliError::NonUnit { line, norm });
            }
            self.renormalized_rows += 1;
        }
        let descriptor =
            Descriptor::normalize(values).map_err(|_| CliError::parse(line, "zero-length descriptor"))?;
        self.descriptors.push(descriptor);
        self.epsilons.push(eps);
        self.row_lines.push(line);
        Ok(())
    }

    fn finish(self) -> DescriptorFile {
        DescriptorFile {
            dim: self.dim,
            fields: self.fields,
            descriptors: self.descriptors,
            epsilons: self.epsilons,
            thetas: self.fields.theta.then_some(self.thetas),
            renormalized_rows: self.renormalized_rows,
            row_lines: self.row_lines,
        }
    }
}

/// Writes descriptors in the text format. Numbers use the shortest decimal
/// form that reads back to the same `f64`.
pub fn write_descriptors<'a>(descriptors: impl IntoIterator<Item = &'a Descriptor>) -> String {
    let descriptors: Vec<&Descriptor> = descriptors.into_iter().collect();
    let dim = descriptors.first().map_or(0, |d| d.dim());
    let mut out = format!("# dim={dim} count={} fields=coords\n", descriptors.len());
    for d in descriptors {
        let mut first = true;
        for c in d.coords() {
            if !first {
                out.push(',');
            }
            first = false;
            write!(out, "{c}").expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

/// An aggregation center as a single-row descriptor file.
pub fn csv_vector(result: &AggregationResult) -> String {
    write_descriptors([&result.center])
}

/// Packs descriptors into the binary layout.
pub fn write_binary<'a>(descriptors: impl IntoIterator<Item = &'a Descriptor>) -> Vec<u8> {
    let descriptors: Vec<&Descriptor> = descriptors.into_iter().collect();
    let dim = descriptors.first().map_or(0, |d| d.dim());
    let mut out = BINARY_MAGIC.to_vec();
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    out.extend_from_slice(&(descriptors.len() as u32).to_le_bytes());
    for d in descriptors {
        for c in d.coords() {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    out
}
