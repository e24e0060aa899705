//! Label schema: the ordered list of diseases and the feature dimension.
//!
//! Schema file format (UTF-8, one entry per line, `#` starts a comment):
//!
//! ```text
//! d=16
//! Enlarged Cardiomediastinum
//! Cardiomegaly
//! ...
//! ```
//!
//! Disease indices follow line order.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Feature dimension used when a schema does not say otherwise.
pub const DEFAULT_DIM: usize = 16;

pub const CHEXBERT_LABELS: [&str; 14] = [
    "Enlarged Cardiomediastinum",
    "Cardiomegaly",
    "Lung Opacity",
    "Lung Lesion",
    "Edema",
    "Consolidation",
    "Pneumonia",
    "Atelectasis",
    "Pneumothorax",
    "Pleural Effusion",
    "Pleural Other",
    "Fracture",
    "Support Devices",
    "No Finding",
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("schema file {path}: {kind}")]
    Io { path: String, kind: IoErrorKind },
    #[error("schema line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("duplicate disease name {0:?}")]
    DuplicateName(String),
    #[error("schema has no diseases")]
    Empty,
    #[error("feature dimension must be at least 1")]
    ZeroDimension,
}

/// Comparable wrapper so [`SchemaError`] can derive `PartialEq`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IoErrorKind(pub std::io::ErrorKind);

impl fmt::Display for IoErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiseaseId {
    pub index: usize,
    pub name: String,
}

/// Per-disease status of a report or sentence.
///
/// The derived order is the aggregation precedence:
/// `Unmentioned < Negative < Uncertain < Positive`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiseaseStatus {
    Unmentioned,
    Negative,
    Uncertain,
    Positive,
}

impl DiseaseStatus {
    pub const ALL: [DiseaseStatus; 4] = [
        DiseaseStatus::Positive,
        DiseaseStatus::Negative,
        DiseaseStatus::Uncertain,
        DiseaseStatus::Unmentioned,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DiseaseStatus::Positive => "positive",
            DiseaseStatus::Negative => "negative",
            DiseaseStatus::Uncertain => "uncertain",
            DiseaseStatus::Unmentioned => "unmentioned",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "positive" => Some(DiseaseStatus::Positive),
            "negative" => Some(DiseaseStatus::Negative),
            "uncertain" => Some(DiseaseStatus::Uncertain),
            "unmentioned" => Some(DiseaseStatus::Unmentioned),
            _ => None,
        }
    }

    pub fn is_mentioned(self) -> bool {
        self != DiseaseStatus::Unmentioned
    }
}

impl fmt::Display for DiseaseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSchema {
    diseases: Vec<DiseaseId>,
    dim: usize,
}

fn fold_name(name: &str) -> String {
    name.chars()
        .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
        .flat_map(char::to_lowercase)
        .collect()
}

impl LabelSchema {
    pub fn new<S: AsRef<str>>(names: &[S], dim: usize) -> Result<Self, SchemaError> {
        if names.is_empty() {
            return Err(SchemaError::Empty);
        }
        if dim == 0 {
            return Err(SchemaError::ZeroDimension);
        }
        let mut diseases: Vec<DiseaseId> = Vec::with_capacity(names.len());
        for (index, raw) in names.iter().enumerate() {
            let name = raw.as_ref().trim();
            if name.is_empty() {
                return Err(SchemaError::Malformed {
                    line: index + 1,
                    reason: "empty disease name".into(),
                });
            }
            let folded = fold_name(name);
            if diseases.iter().any(|d| fold_name(&d.name) == folded) {
                return Err(SchemaError::DuplicateName(name.to_string()));
            }
            diseases.push(DiseaseId { index, name: name.to_string() });
        }
        Ok(Self { diseases, dim })
    }

    /// The 14-label CheXbert-convention schema.
    pub fn chexbert(dim: usize) -> Self {
        Self::new(&CHEXBERT_LABELS, dim).expect("builtin schema is valid")
    }

    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        let mut dim = None;
        let mut names = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(v) = line.strip_prefix("d=").or_else(|| line.strip_prefix("d =")) {
                let d: usize = v.trim().parse().map_err(|_| SchemaError::Malformed {
                    line: i + 1,
                    reason: format!("bad dimension {v:?}"),
                })?;
                if dim.replace(d).is_some() {
                    return Err(SchemaError::Malformed {
                        line: i + 1,
                        reason: "dimension given twice".into(),
                    });
                }
            } else {
                names.push(line.to_string());
            }
        }
        Self::new(&names, dim.unwrap_or(DEFAULT_DIM))
    }

    pub fn load(path: &Path) -> Result<Self, SchemaError> {
        let text = std::fs::read_to_string(path).map_err(|e| SchemaError::Io {
            path: path.display().to_string(),
            kind: IoErrorKind(e.kind()),
        })?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("d={}\n", self.dim);
        for d in &self.diseases {
            out.push_str(&d.name);
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.diseases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diseases.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn with_dim(mut self, dim: usize) -> Result<Self, SchemaError> {
        if dim == 0 {
            return Err(SchemaError::ZeroDimension);
        }
        self.dim = dim;
        Ok(self)
    }

    pub fn diseases(&self) -> &[DiseaseId] {
        &self.diseases
    }

    pub fn name(&self, index: usize) -> &str {
        &self.diseases[index].name
    }

    /// Resolves a disease name: exact match first, then a case-, space- and
    /// underscore-insensitive match ("PleuralEffusion" finds "Pleural Effusion").
    pub fn resolve(&self, name: &str) -> Option<usize> {
        let name = name.trim();
        if let Some(d) = self.diseases.iter().find(|d| d.name == name) {
            return Some(d.index);
        }
        let folded = fold_name(name);
        self.diseases.iter().find(|d| fold_name(&d.name) == folded).map(|d| d.index)
    }
}

impl Default for LabelSchema {
    fn default() -> Self {
        Self::chexbert(DEFAULT_DIM)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schema_has_fourteen_labels() {
        let s = LabelSchema::default();
        assert_eq!(s.len(), 14);
        assert_eq!(s.dim(), 16);
        assert_eq!(s.resolve("Pneumothorax"), Some(8));
        assert_eq!(s.resolve("PleuralEffusion"), Some(9));
        assert_eq!(s.resolve("pleural effusion"), Some(9));
        assert_eq!(s.resolve("Effusion"), None);
    }

    #[test]
    fn parse_round_trips_text() {
        let s = LabelSchema::chexbert(2048);
        let back = LabelSchema::parse(&s.to_text()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn rejects_duplicates_and_empty() {
        assert_eq!(
            LabelSchema::parse("d=4\nA\nB\na\n"),
            Err(SchemaError::DuplicateName("a".into()))
        );
        assert_eq!(LabelSchema::parse("d=4\n# nothing\n"), Err(SchemaError::Empty));
        assert_eq!(LabelSchema::parse("d=0\nA\n"), Err(SchemaError::ZeroDimension));
    }

    #[test]
    fn status_precedence_order() {
        use DiseaseStatus::*;
        assert!(Positive > Uncertain && Uncertain > Negative && Negative > Unmentioned);
        for s in DiseaseStatus::ALL {
            assert_eq!(DiseaseStatus::parse(s.as_str()), Some(s));
        }
    }
}
