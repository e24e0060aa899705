//! Corpus data model: records pairing a multi-sentence report with an
//! optional per-disease feature bundle and report-level labels.

mod codec;

use std::fmt;

use thiserror::Error;

pub use codec::{decode_corpus, encode_corpus, encode_record, quantize_sig9, read_corpus, write_corpus};

use crate::labeler::ReportLabelVector;
use crate::schema::LabelSchema;

/// One report sentence. Whitespace is normalised on construction: leading
/// and trailing whitespace is trimmed and internal runs collapse to a single
/// space, so `token_count` is the number of space-separated tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sentence {
    text: String,
    token_count: usize,
}

impl Sentence {
    pub fn new(text: &str) -> Option<Self> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.is_empty() {
            return None;
        }
        Some(Self { token_count: tokens.len(), text: tokens.join(" ") })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn token_count(&self) -> usize {
        self.token_count
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Report {
    pub sentences: Vec<Sentence>,
}

impl Report {
    pub fn new(sentences: Vec<Sentence>) -> Self {
        Self { sentences }
    }

    /// Builds a report from sentence strings, skipping blank ones.
    pub fn from_texts<S: AsRef<str>>(texts: &[S]) -> Self {
        Self { sentences: texts.iter().filter_map(|t| Sentence::new(t.as_ref())).collect() }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Sentences joined by single spaces.
    pub fn text(&self) -> String {
        self.sentences.iter().map(Sentence::text).collect::<Vec<_>>().join(" ")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub masked: bool,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values, masked: false }
    }

    pub fn masked(dim: usize) -> Self {
        Self { values: vec![0.0; dim], masked: true }
    }

    /// Zero-fills the vector and sets the masked flag.
    pub fn mask(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
        self.masked = true;
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// One feature vector per schema disease, in schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBundle {
    pub per_disease: Vec<FeatureVector>,
}

impl FeatureBundle {
    pub fn new(per_disease: Vec<FeatureVector>) -> Self {
        Self { per_disease }
    }

    pub fn masked_indices(&self) -> Vec<usize> {
        self.per_disease.iter().enumerate().filter(|(_, f)| f.masked).map(|(i, _)| i).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Original,
    Counterfactual,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Original => "original",
            Provenance::Counterfactual => "counterfactual",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: String,
    pub report: Report,
    pub features: Option<FeatureBundle>,
    pub labels: Option<ReportLabelVector>,
    pub provenance: Provenance,
    pub source_id: Option<String>,
}

impl Record {
    pub fn original(id: impl Into<String>, report: Report) -> Self {
        Self {
            id: id.into(),
            report,
            features: None,
            labels: None,
            provenance: Provenance::Original,
            source_id: None,
        }
    }

    pub fn with_features(mut self, features: FeatureBundle) -> Self {
        self.features = Some(features);
        self
    }

    pub fn with_labels(mut self, labels: ReportLabelVector) -> Self {
        self.labels = Some(labels);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub schema: LabelSchema,
    pub records: Vec<Record>,
}

impl Corpus {
    pub fn new(schema: LabelSchema) -> Self {
        Self { schema, records: Vec::new() }
    }

    pub fn with_records(schema: LabelSchema, records: Vec<Record>) -> Self {
        Self { schema, records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.schema.dim()
    }

    /// Validates every record and checks id uniqueness.
    pub fn validate(&self) -> Result<(), (usize, Violation)> {
        let mut seen = std::collections::HashSet::with_capacity(self.records.len());
        for (i, r) in self.records.iter().enumerate() {
            validate_record(r, &self.schema).map_err(|v| (i, v))?;
            if !seen.insert(r.id.as_str()) {
                return Err((i, Violation::DuplicateId(r.id.clone())));
            }
        }
        Ok(())
    }

    /// Records with a given provenance, in corpus order.
    pub fn by_provenance(&self, p: Provenance) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(move |r| r.provenance == p)
    }
}

/// A record invariant violation. [`Violation::code`] gives a stable
/// machine-readable name.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("record id is empty")]
    EmptyId,
    #[error("original record has no sentences")]
    EmptyReport,
    #[error("expected {expected} feature vectors, found {found}")]
    FeatureCount { expected: usize, found: usize },
    #[error("feature vector {disease} has dimension {found}, expected {expected}")]
    FeatureDim { disease: usize, expected: usize, found: usize },
    #[error("masked feature vector {disease} has a nonzero value")]
    MaskNonZero { disease: usize },
    #[error("feature vector {disease} has a non-finite value")]
    NonFinite { disease: usize },
    #[error("expected {expected} labels, found {found}")]
    LabelCount { expected: usize, found: usize },
    #[error("counterfactual record without source_id")]
    OrphanCounterfactual,
    #[error("original record carries a source_id")]
    UnexpectedSource,
    #[error("duplicate record id {0:?}")]
    DuplicateId(String),
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::EmptyId => "EmptyId",
            Violation::EmptyReport => "EmptyReport",
            Violation::FeatureCount { .. } => "FeatureCount",
            Violation::FeatureDim { .. } => "FeatureDim",
            Violation::MaskNonZero { .. } => "MaskNonZero",
            Violation::NonFinite { .. } => "NonFinite",
            Violation::LabelCount { .. } => "LabelCount",
            Violation::OrphanCounterfactual => "OrphanCounterfactual",
            Violation::UnexpectedSource => "UnexpectedSource",
            Violation::DuplicateId(_) => "DuplicateId",
        }
    }

    /// Violations that mean the record does not fit the schema (as opposed to
    /// being internally inconsistent).
    pub fn is_schema_mismatch(&self) -> bool {
        matches!(
            self,
            Violation::FeatureCount { .. } | Violation::FeatureDim { .. } | Violation::LabelCount { .. }
        )
    }
}

/// Returns the first violated record invariant, if any.
pub fn validate_record(record: &Record, schema: &LabelSchema) -> Result<(), Violation> {
    if record.id.is_empty() {
        return Err(Violation::EmptyId);
    }
    match (record.provenance, &record.source_id) {
        (Provenance::Counterfactual, None) => return Err(Violation::OrphanCounterfactual),
        (Provenance::Original, Some(_)) => return Err(Violation::UnexpectedSource),
        _ => {}
    }
    if record.provenance == Provenance::Original && record.report.is_empty() {
        return Err(Violation::EmptyReport);
    }
    if let Some(bundle) = &record.features {
        if bundle.per_disease.len() != schema.len() {
            return Err(Violation::FeatureCount {
                expected: schema.len(),
                found: bundle.per_disease.len(),
            });
        }
        for (disease, f) in bundle.per_disease.iter().enumerate() {
            if f.values.len() != schema.dim() {
                return Err(Violation::FeatureDim {
                    disease,
                    expected: schema.dim(),
                    found: f.values.len(),
                });
            }
            if f.values.iter().any(|v| !v.is_finite()) {
                return Err(Violation::NonFinite { disease });
            }
            if f.masked && f.values.iter().any(|&v| v != 0.0) {
                return Err(Violation::MaskNonZero { disease });
            }
        }
    }
    if let Some(labels) = &record.labels {
        if labels.len() != schema.len() {
            return Err(Violation::LabelCount { expected: schema.len(), found: labels.len() });
        }
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus file not found: {0}")]
    MissingFile(String),
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("line {line}: schema mismatch: {reason}")]
    SchemaMismatch { line: usize, reason: String },
    #[error("i/o failure on {path}: {source}")]
    IoFailure { path: String, source: std::io::Error },
}
