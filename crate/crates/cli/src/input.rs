//! Histogram files: JSON `{"points": [{"x": .., "m": ..}], "denominator": M}`
//! or two-column CSV `x,m` with an optional header line.

use std::path::Path;

use circot_core::{CircularHistogram, MeasureError};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: invalid JSON: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{path}: invalid CSV: {detail}")]
    Csv { path: String, detail: String },
    #[error("{path}: {source}")]
    Invalid { path: String, source: MeasureError },
}

impl InputError {
    pub fn code(&self) -> &'static str {
        match self {
            InputError::Io { .. } => "io",
            InputError::Json { .. } | InputError::Csv { .. } => "parse",
            InputError::Invalid { .. } => "invalid_histogram",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonPoint {
    x: f64,
    m: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonHistogram {
    points: Vec<JsonPoint>,
    #[serde(default)]
    denominator: Option<u64>,
}

/// Raw atoms as read from a file, before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramFile {
    pub positions: Vec<f64>,
    pub masses: Vec<f64>,
    pub denominator: Option<u64>,
}

impl HistogramFile {
    /// Parses either format. Anything whose first non-blank byte is `{` is JSON.
    pub fn parse(text: &str, origin: &str) -> Result<Self, InputError> {
        if text.trim_start().starts_with('{') {
            let raw: JsonHistogram = serde_json::from_str(text).map_err(|source| InputError::Json {
                path: origin.to_string(),
                source,
            })?;
            Ok(Self {
                positions: raw.points.iter().map(|p| p.x).collect(),
                masses: raw.points.iter().map(|p| p.m).collect(),
                denominator: raw.denominator,
            })
        } else {
            parse_csv(text, origin)
        }
    }

    pub fn read(path: &Path) -> Result<Self, InputError> {
        let origin = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| InputError::Io {
            path: origin.clone(),
            source,
        })?;
        Self::parse(&text, &origin)
    }

    /// Validates into a histogram. `denominator` overrides the one in the file.
    pub fn into_histogram(self, denominator: Option<u64>, origin: &str) -> Result<CircularHistogram, InputError> {
        CircularHistogram::new(&self.positions, &self.masses, denominator.or(self.denominator)).map_err(|source| {
            InputError::Invalid {
                path: origin.to_string(),
                source,
            }
        })
    }
}

fn parse_csv(text: &str, origin: &str) -> Result<HistogramFile, InputError> {
    let csv_err = |detail: String| InputError::Csv {
        path: origin.to_string(),
        detail,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = HistogramFile {
        positions: Vec::new(),
        masses: Vec::new(),
        denominator: None,
    };
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 2 {
            return Err(csv_err(format!("line {}: expected 2 columns, found {}", row + 1, record.len())));
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(x), Ok(m)) => {
                out.positions.push(x);
                out.masses.push(m);
            }
            // A header is only allowed as the first line.
            _ if row == 0 => {}
            _ => return Err(csv_err(format!("line {}: not a number pair", row + 1))),
        }
    }
    Ok(out)
}

/// Reads and validates one histogram file.
pub fn load_histogram(path: &Path, denominator: Option<u64>) -> Result<CircularHistogram, InputError> {
    HistogramFile::read(path)?.into_histogram(denominator, &path.display().to_string())
}
