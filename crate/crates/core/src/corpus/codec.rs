// Line-delimited JSON corpus format.
//
// One record object per line with fields in fixed order:
//   id, report, features?, labels?, provenance, source_id?
// Feature values are written with 9 significant digits (`{:.8e}`), labels in
// schema order, so output bytes are a pure function of the corpus value.

use std::io::{BufRead, BufReader};
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use super::{
    validate_record, Corpus, CorpusError, FeatureBundle, FeatureVector, Provenance, Record,
    Report, Sentence, Violation,
};
use crate::labeler::ReportLabelVector;
use crate::schema::{DiseaseStatus, LabelSchema};

/// Formats a float with 9 significant digits.
pub(crate) fn fmt_sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Rounds a float to the value that survives a write/read cycle unchanged.
pub fn quantize_sig9(x: f64) -> f64 {
    fmt_sig9(x).parse().expect("formatted float parses")
}

#[derive(Serialize)]
struct FeatureOut {
    vec: Vec<Box<RawValue>>,
    masked: bool,
}

#[derive(Serialize)]
struct LineOut<'a> {
    id: &'a str,
    report: Vec<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    features: Option<Vec<FeatureOut>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<IndexMap<&'a str, DiseaseStatus>>,
    provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    source_id: Option<&'a str>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FeatureIn {
    vec: Vec<f64>,
    masked: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LineIn {
    id: String,
    report: Vec<String>,
    #[serde(default)]
    features: Option<Vec<FeatureIn>>,
    #[serde(default)]
    labels: Option<IndexMap<String, String>>,
    provenance: Provenance,
    #[serde(default)]
    source_id: Option<String>,
}

/// Serialises one record as a single JSON line (no trailing newline).
pub fn encode_record(record: &Record, schema: &LabelSchema) -> String {
    let features = record.features.as_ref().map(|b| {
        b.per_disease
            .iter()
            .map(|f| FeatureOut {
                vec: f
                    .values
                    .iter()
                    .map(|&v| RawValue::from_string(fmt_sig9(v)).expect("valid JSON number"))
                    .collect(),
                masked: f.masked,
            })
            .collect()
    });
    let labels = record.labels.as_ref().map(|l| {
        l.iter().map(|(i, s)| (schema.name(i), s)).collect::<IndexMap<_, _>>()
    });
    let line = LineOut {
        id: &record.id,
        report: record.report.sentences.iter().map(Sentence::text).collect(),
        features,
        labels,
        provenance: record.provenance,
        source_id: record.source_id.as_deref(),
    };
    serde_json::to_string(&line).expect("record serialises")
}

pub fn encode_corpus(corpus: &Corpus) -> String {
    let mut out = String::new();
    for r in &corpus.records {
        out.push_str(&encode_record(r, &corpus.schema));
        out.push('\n');
    }
    out
}

fn decode_line(line: &str, lineno: usize, schema: &LabelSchema) -> Result<Record, CorpusError> {
    let malformed = |reason: String| CorpusError::MalformedRecord { line: lineno, reason };
    let mismatch = |reason: String| CorpusError::SchemaMismatch { line: lineno, reason };

    let raw: LineIn = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
    let sentences = raw
        .report
        .iter()
        .map(|t| Sentence::new(t).ok_or_else(|| malformed("blank sentence".into())))
        .collect::<Result<Vec<_>, _>>()?;
    let features = raw.features.map(|fs| {
        FeatureBundle::new(
            fs.into_iter().map(|f| FeatureVector { values: f.vec, masked: f.masked }).collect(),
        )
    });
    let labels = match raw.labels {
        None => None,
        Some(map) => {
            let mut statuses = vec![DiseaseStatus::Unmentioned; schema.len()];
            for (name, status) in map {
                let idx = schema
                    .resolve(&name)
                    .ok_or_else(|| mismatch(format!("unknown disease {name:?} in labels")))?;
                statuses[idx] = DiseaseStatus::parse(&status)
                    .ok_or_else(|| malformed(format!("unknown status {status:?}")))?;
            }
            Some(ReportLabelVector::new(statuses))
        }
    };
    let record = Record {
        id: raw.id,
        report: Report::new(sentences),
        features,
        labels,
        provenance: raw.provenance,
        source_id: raw.source_id,
    };
    validate_record(&record, schema).map_err(|v| {
        if v.is_schema_mismatch() {
            mismatch(v.to_string())
        } else {
            malformed(format!("{} ({})", v, v.code()))
        }
    })?;
    Ok(record)
}

fn check_unique(
    seen: &mut std::collections::HashSet<String>,
    record: &Record,
    lineno: usize,
) -> Result<(), CorpusError> {
    if !seen.insert(record.id.clone()) {
        let v = Violation::DuplicateId(record.id.clone());
        return Err(CorpusError::MalformedRecord {
            line: lineno,
            reason: format!("{} ({})", v, v.code()),
        });
    }
    Ok(())
}

/// Parses corpus text. Blank lines are ignored; line numbers are 1-based.
pub fn decode_corpus(text: &str, schema: &LabelSchema) -> Result<Corpus, CorpusError> {
    let mut records = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r = decode_line(line, i + 1, schema)?;
        check_unique(&mut seen, &r, i + 1)?;
        records.push(r);
    }
    Ok(Corpus::with_records(schema.clone(), records))
}

/// Streams and validates a corpus file.
pub fn read_corpus(path: &Path, schema: &LabelSchema) -> Result<Corpus, CorpusError> {
    let io_err = |source| CorpusError::IoFailure { path: path.display().to_string(), source };
    let file = std::fs::File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CorpusError::MissingFile(path.display().to_string())
        } else {
            io_err(e)
        }
    })?;
    let mut records = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let r = decode_line(&line, i + 1, schema)?;
        check_unique(&mut seen, &r, i + 1)?;
        records.push(r);
    }
    Ok(Corpus::with_records(schema.clone(), records))
}

/// Writes a corpus atomically.
pub fn write_corpus(corpus: &Corpus, path: &Path) -> Result<(), CorpusError> {
    crate::fsio::write_atomic(path, encode_corpus(corpus).as_bytes())
        .map_err(|source| CorpusError::IoFailure { path: path.display().to_string(), source })
}
