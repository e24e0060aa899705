//! Counterfactual augmentation.
//!
//! Counterfactual sample synthesis (CSS) pops one sentence from a report and
//! masks the features of every disease that sentence mentions, so the
//! retained report and the retained features describe the same findings.
//! Counterfactual report reconstruction (CRR) then shuffles the retained
//! sentences. Each counterfactual record is derived from exactly one source
//! record and drawn from that record's own random stream, keyed by
//! `(seed, record id)`.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{Corpus, Provenance, Record, Report};
use crate::labeler::{label_report, label_sentence, Matcher, SentenceLabelSet};
use crate::rng::RngStream;

/// Key of the stream that fixes the order in which sources are tried.
pub const SELECTION_KEY: &str = "coa:select";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AugmentationConfig {
    pub rate: f64,
    pub seed: u64,
    pub enable_css: bool,
    pub enable_crr: bool,
    pub max_resample: usize,
    pub min_sentences: usize,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        Self { rate: 1.0, seed: 0, enable_css: true, enable_crr: true, max_resample: 5, min_sentences: 2 }
    }
}

impl AugmentationConfig {
    pub fn validate(&self) -> Result<(), AugmentError> {
        let bad = |m: &str| Err(AugmentError::InvalidConfig(m.to_string()));
        if !(0.0..=1.0).contains(&self.rate) {
            return bad("rate must be in [0, 1]");
        }
        if !self.enable_css && !self.enable_crr {
            return bad("at least one of CSS and CRR must be enabled");
        }
        if self.max_resample < 1 {
            return bad("max_resample must be at least 1");
        }
        if self.min_sentences < 2 {
            return bad("min_sentences must be at least 2");
        }
        Ok(())
    }

    /// Number of counterfactual records requested for `n` originals.
    pub fn target(&self, n: usize) -> usize {
        // The epsilon keeps e.g. 0.29 * 100 from flooring to 28.
        ((self.rate * n as f64) + 1e-9).floor() as usize
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AugmentError {
    #[error("record {0:?} has no feature bundle")]
    MissingFeatures(String),
    #[error("record {0:?} is not an original record")]
    NonOriginalInput(String),
    #[error("invalid augmentation config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentFlag {
    /// A masked disease is still mentioned by a retained sentence.
    OrphanMention,
    /// CSS could not run on the source record.
    CssSkipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    TooFewSentences,
    NoLabelableSentence,
}

impl SkipReason {
    pub fn flag(self) -> AugmentFlag {
        AugmentFlag::CssSkipped
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationOutcome {
    pub record: Record,
    /// Index of the popped sentence in the source report; `None` without CSS.
    pub popped_sentence_index: Option<usize>,
    pub popped_labels: SentenceLabelSet,
    pub masked_indices: BTreeSet<usize>,
    /// `record.report.sentences[i]` is retained sentence `permutation[i]`.
    pub permutation: Vec<usize>,
    pub flags: BTreeSet<AugmentFlag>,
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum AugmentResult {
    Augmented(AugmentationOutcome),
    Skipped(SkipReason),
}

impl AugmentResult {
    pub fn outcome(self) -> Option<AugmentationOutcome> {
        match self {
            AugmentResult::Augmented(o) => Some(o),
            AugmentResult::Skipped(_) => None,
        }
    }
}

fn counterfactual_shell(record: &Record) -> Record {
    Record {
        id: format!("{}#cf", record.id),
        report: record.report.clone(),
        features: record.features.clone(),
        labels: None,
        provenance: Provenance::Counterfactual,
        source_id: Some(record.id.clone()),
    }
}

fn relabel(out: &mut Record, source: &Record, matcher: &Matcher) {
    if source.labels.is_some() {
        out.labels = Some(label_report(&out.report, matcher));
    }
}

/// Sentence pop plus feature masking.
pub fn css_augment(
    record: &Record,
    matcher: &Matcher,
    stream: &mut RngStream,
    cfg: &AugmentationConfig,
) -> Result<AugmentResult, AugmentError> {
    if record.provenance != Provenance::Original {
        return Err(AugmentError::NonOriginalInput(record.id.clone()));
    }
    let features = record.features.as_ref().ok_or_else(|| AugmentError::MissingFeatures(record.id.clone()))?;
    let n = record.report.len();
    if n < cfg.min_sentences {
        return Ok(AugmentResult::Skipped(SkipReason::TooFewSentences));
    }
    let mut popped = None;
    for _ in 0..cfg.max_resample {
        let i = stream.index(n);
        let labels = label_sentence(&record.report.sentences[i], matcher);
        if !labels.is_empty() {
            popped = Some((i, labels));
            break;
        }
    }
    let Some((index, labels)) = popped else {
        return Ok(AugmentResult::Skipped(SkipReason::NoLabelableSentence));
    };

    let mut sentences = record.report.sentences.clone();
    sentences.remove(index);
    let report = Report::new(sentences);
    let mut features = features.clone();
    let masked: BTreeSet<usize> = labels.diseases().collect();
    for &d in &masked {
        features.per_disease[d].mask();
    }
    let retained = label_report(&report, matcher);
    let mut flags = BTreeSet::new();
    if masked.iter().any(|&d| retained.get(d).is_mentioned()) {
        flags.insert(AugmentFlag::OrphanMention);
    }

    let mut out = counterfactual_shell(record);
    out.report = report;
    out.features = Some(features);
    if record.labels.is_some() {
        out.labels = Some(retained);
    }
    let permutation = (0..out.report.len()).collect();
    Ok(AugmentResult::Augmented(AugmentationOutcome {
        record: out,
        popped_sentence_index: Some(index),
        popped_labels: labels,
        masked_indices: masked,
        permutation,
        flags,
    }))
}

/// Reorders sentences by a uniform permutation, redrawn until it is not the
/// identity when there are at least two sentences. `out[i] = report[perm[i]]`.
pub fn crr_augment(report: &Report, stream: &mut RngStream) -> (Report, Vec<usize>) {
    let n = report.len();
    let perm = loop {
        let p = stream.permutation(n);
        if n < 2 || p.iter().enumerate().any(|(i, &v)| i != v) {
            break p;
        }
    };
    let sentences = perm.iter().map(|&i| report.sentences[i].clone()).collect();
    (Report::new(sentences), perm)
}

/// CSS (when enabled) followed by CRR (when enabled) on one record.
pub fn augment_record(
    record: &Record,
    matcher: &Matcher,
    stream: &mut RngStream,
    cfg: &AugmentationConfig,
) -> Result<AugmentResult, AugmentError> {
    if record.provenance != Provenance::Original {
        return Err(AugmentError::NonOriginalInput(record.id.clone()));
    }
    let mut outcome = if cfg.enable_css {
        match css_augment(record, matcher, stream, cfg)? {
            AugmentResult::Augmented(o) => o,
            skipped => return Ok(skipped),
        }
    } else {
        AugmentationOutcome {
            record: counterfactual_shell(record),
            popped_sentence_index: None,
            popped_labels: SentenceLabelSet::default(),
            masked_indices: BTreeSet::new(),
            permutation: (0..record.report.len()).collect(),
            flags: BTreeSet::new(),
        }
    };
    if cfg.enable_crr {
        let (report, perm) = crr_augment(&outcome.record.report, stream);
        outcome.record.report = report;
        outcome.permutation = perm;
    }
    if !cfg.enable_css {
        relabel(&mut outcome.record, record, matcher);
    }
    Ok(AugmentResult::Augmented(outcome))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AugmentSummary {
    pub originals: usize,
    pub target: usize,
    pub eligible: usize,
    pub augmented: usize,
    /// Eligible sources tried but skipped (no labelable sentence drawn).
    pub skipped: usize,
    pub orphan_flagged: usize,
    /// `target − augmented`, non-zero when too few sources were usable.
    pub shortfall: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Augmentation {
    /// `D_o` in input order followed by `D_c` ordered by source index.
    pub corpus: Corpus,
    pub summary: AugmentSummary,
    /// Outcomes in the same order as the counterfactual records.
    pub outcomes: Vec<AugmentationOutcome>,
}

fn css_eligible(record: &Record, matcher: &Matcher, cfg: &AugmentationConfig) -> bool {
    record.features.is_some()
        && record.report.len() >= cfg.min_sentences
        && record.report.sentences.iter().any(|s| !label_sentence(s, matcher).is_empty())
}

/// Builds `D = D_o ∪ D_c` with `|D_c| = floor(rate · |D_o|)` where possible.
///
/// Eligible sources are tried in an order shuffled by the selection stream;
/// a source whose CSS draw is skipped is replaced by the next one in that
/// order. Each source yields at most one counterfactual.
pub fn augment_dataset(
    corpus: &Corpus,
    matcher: &Matcher,
    cfg: &AugmentationConfig,
) -> Result<Augmentation, AugmentError> {
    cfg.validate()?;
    if let Some(r) = corpus.records.iter().find(|r| r.provenance != Provenance::Original) {
        return Err(AugmentError::NonOriginalInput(r.id.clone()));
    }
    let n = corpus.len();
    let target = cfg.target(n);
    let mut summary = AugmentSummary { originals: n, target, ..Default::default() };
    if target == 0 {
        return Ok(Augmentation { corpus: corpus.clone(), summary, outcomes: Vec::new() });
    }

    let flags = crate::parallel::map(&corpus.records, |r| !cfg.enable_css || css_eligible(r, matcher, cfg));
    let mut order: Vec<usize> = (0..n).filter(|&i| flags[i]).collect();
    summary.eligible = order.len();
    RngStream::for_id(cfg.seed, SELECTION_KEY).shuffle(&mut order);

    let mut accepted: Vec<(usize, AugmentationOutcome)> = Vec::with_capacity(target);
    let mut cursor = 0;
    while accepted.len() < target && cursor < order.len() {
        let need = target - accepted.len();
        let batch = &order[cursor..(cursor + need).min(order.len())];
        cursor += batch.len();
        let results = crate::parallel::map(batch, |&i| {
            let r = &corpus.records[i];
            augment_record(r, matcher, &mut RngStream::for_id(cfg.seed, &r.id), cfg).map(|res| (i, res))
        });
        for res in results {
            match res? {
                (i, AugmentResult::Augmented(o)) => accepted.push((i, o)),
                (_, AugmentResult::Skipped(_)) => summary.skipped += 1,
            }
        }
    }
    accepted.sort_by_key(|(i, _)| *i);
    summary.augmented = accepted.len();
    summary.shortfall = target - accepted.len();
    summary.orphan_flagged =
        accepted.iter().filter(|(_, o)| o.flags.contains(&AugmentFlag::OrphanMention)).count();

    let mut records = corpus.records.clone();
    records.extend(accepted.iter().map(|(_, o)| o.record.clone()));
    let outcomes = accepted.into_iter().map(|(_, o)| o).collect();
    Ok(Augmentation { corpus: Corpus::with_records(corpus.schema.clone(), records), summary, outcomes })
}
