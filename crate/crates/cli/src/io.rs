//! Artifact formats: JSON for structured reports and stored objects, CSV for
//! vectors and sequences. CSV floats carry 17 significant digits; JSON floats
//! round-trip bit-exactly through the parser.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use prolate_core::operator::ToeplitzOperator;
use prolate_core::spectral::EigenDecomposition;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.to_owned(),
                source,
            })?;
        }
    }
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

/// 17 significant digits: enough for a lossless f64 round trip.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn offset_of(text: &str, line: usize, column: usize) -> usize {
    let mut consumed = 0;
    for (i, l) in text.split_inclusive('\n').enumerate() {
        if i + 1 == line {
            return consumed + column.saturating_sub(1);
        }
        consumed += l.len();
    }
    text.len()
}

/// Artifact parse: any malformed content is a corrupt-file error carrying the
/// byte offset of the failure.
pub fn parse_artifact<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        detail: format!(
            "parse error at byte {}: {e}",
            offset_of(text, e.line(), e.column())
        ),
    })
}

/// Config parse: shape errors are usage errors (serde names the offending
/// field); only broken JSON counts as a corrupt file.
pub fn parse_config(text: &str, path: &Path) -> Result<ExperimentConfig> {
    match serde_json::from_str(text) {
        Ok(cfg) => Ok(cfg),
        Err(e) if e.classify() == serde_json::error::Category::Data => Err(CliError::Usage(
            format!("config {}: {e}", path.display()),
        )),
        Err(e) => Err(CliError::Parse {
            path: path.to_owned(),
            detail: format!(
                "parse error at byte {}: {e}",
                offset_of(text, e.line(), e.column())
            ),
        }),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        detail: format!("serialization failed: {e}"),
    })?;
    text.push('\n');
    write_text(path, &text)
}

/// Write a CSV artifact: header line plus preformatted rows.
pub fn write_csv(path: &Path, header: &str, rows: impl IntoIterator<Item = String>) -> Result<()> {
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    write_text(path, &text)
}

/// Read a complex signal from CSV. Accepted row shapes: `re`, `re,im`, or
/// `index,re,im`; one optional header line.
pub fn read_signal(path: &Path) -> Result<Vec<Complex64>> {
    let text = read_text(path)?;
    let mut samples = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|f| f.parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            // the first line may be a header
            Err(_) if i == 0 => continue,
            Err(e) => {
                return Err(CliError::Parse {
                    path: path.to_owned(),
                    detail: format!("line {}: {e}", i + 1),
                })
            }
        };
        let z = match values.len() {
            1 => Complex64::new(values[0], 0.0),
            2 => Complex64::new(values[0], values[1]),
            3 => Complex64::new(values[1], values[2]),
            other => {
                return Err(CliError::Parse {
                    path: path.to_owned(),
                    detail: format!("line {}: expected 1..=3 numeric fields, got {other}", i + 1),
                })
            }
        };
        samples.push(z);
    }
    if samples.is_empty() {
        return Err(CliError::Parse {
            path: path.to_owned(),
            detail: "no numeric rows".into(),
        });
    }
    Ok(samples)
}

pub fn save_operator(op: &ToeplitzOperator, path: &Path) -> Result<()> {
    write_json(path, op)
}

pub fn load_operator(path: &Path) -> Result<ToeplitzOperator> {
    let text = read_text(path)?;
    parse_artifact(&text, path)
}

/// On-disk eigendecomposition: eigenvalues bit-exact, eigenvector columns as
/// `[re, im]` pairs in canonical phase.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub source: String,
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<Vec<[f64; 2]>>,
}

impl DecompositionFile {
    pub fn from_decomposition(dec: &EigenDecomposition) -> Self {
        let vectors = dec
            .vectors()
            .column_iter()
            .map(|col| col.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        DecompositionFile {
            source: dec.source().to_string(),
            dim: dec.dim(),
            eigenvalues: dec.eigenvalues().to_vec(),
            vectors,
        }
    }
}

pub fn persist_decomposition(dec: &EigenDecomposition, path: &Path) -> Result<()> {
    write_json(path, &DecompositionFile::from_decomposition(dec))
}

pub fn load_decomposition(path: &Path) -> Result<EigenDecomposition> {
    let text = read_text(path)?;
    let file: DecompositionFile = parse_artifact(&text, path)?;
    let corrupt = |detail: String| CliError::Parse {
        path: path.to_owned(),
        detail,
    };
    if file.eigenvalues.len() != file.vectors.len() {
        return Err(corrupt(format!(
            "{} eigenvalues vs {} eigenvector columns",
            file.eigenvalues.len(),
            file.vectors.len()
        )));
    }
    if file.vectors.iter().any(|c| c.len() != file.dim) {
        return Err(corrupt(format!(
            "eigenvector length disagrees with dim = {}",
            file.dim
        )));
    }
    let mat = DMatrix::from_fn(file.dim, file.vectors.len(), |r, c| {
        Complex64::new(file.vectors[c][r][0], file.vectors[c][r][1])
    });
    EigenDecomposition::from_parts(file.eigenvalues, mat, file.source).map_err(CliError::from)
}
