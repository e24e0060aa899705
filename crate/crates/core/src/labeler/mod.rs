//! Deterministic rule-based report labeler.
//!
//! A lexicon maps lowercase phrases to diseases; a cue list supplies
//! negation and uncertainty triggers that are looked for within a fixed
//! token window before each mention. Sentence labels aggregate to a report
//! label vector by status precedence, which makes report labels independent
//! of sentence order.
//!
//! Lexicon file: `disease<TAB>pattern` per line. Cue file: a `window=<int>`
//! line plus `neg<TAB>phrase` / `unc<TAB>phrase` lines. `#` lines are
//! comments in both.

mod lexicon;
mod segment;

use std::collections::BTreeMap;

use thiserror::Error;

pub use lexicon::{
    match_tokens, parse_cues, parse_lexicon, CueList, LexiconRule, Matcher, DEFAULT_CUES,
    DEFAULT_LEXICON, MAX_PATTERN_TOKENS,
};
pub use segment::segment;

use crate::corpus::{Corpus, Report, Sentence};
use crate::schema::{DiseaseStatus, LabelSchema};

#[derive(Debug, Error)]
pub enum LabelerError {
    #[error("lexicon line {line}: unknown disease {name:?}")]
    UnknownDisease { line: usize, name: String },
    #[error("lexicon line {line}: duplicate rule ({disease}, {pattern:?})")]
    DuplicateRule { line: usize, disease: String, pattern: String },
    #[error("{file} line {line}: {reason}")]
    Malformed { file: &'static str, line: usize, reason: String },
    #[error("cue file has no window=<int> line")]
    MissingWindow,
    #[error("cue window must be at least 1")]
    InvalidWindow,
    #[error("cue {0:?} is listed as both negation and uncertainty")]
    CueOverlap(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Labels found in one sentence; at most one status per disease and never
/// `Unmentioned`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SentenceLabelSet {
    pub entries: BTreeMap<usize, DiseaseStatus>,
}

impl SentenceLabelSet {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, disease: usize) -> Option<DiseaseStatus> {
        self.entries.get(&disease).copied()
    }

    pub fn diseases(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }
}

/// Report-level status for every schema disease, indexed by disease index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReportLabelVector {
    statuses: Vec<DiseaseStatus>,
}

impl ReportLabelVector {
    pub fn new(statuses: Vec<DiseaseStatus>) -> Self {
        Self { statuses }
    }

    pub fn unmentioned(n: usize) -> Self {
        Self { statuses: vec![DiseaseStatus::Unmentioned; n] }
    }

    pub fn len(&self) -> usize {
        self.statuses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statuses.is_empty()
    }

    pub fn get(&self, disease: usize) -> DiseaseStatus {
        self.statuses[disease]
    }

    pub fn set(&mut self, disease: usize, status: DiseaseStatus) {
        self.statuses[disease] = status;
    }

    pub fn statuses(&self) -> &[DiseaseStatus] {
        &self.statuses
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, DiseaseStatus)> + '_ {
        self.statuses.iter().copied().enumerate()
    }

    /// Raises each disease to the sentence status when it has higher precedence.
    pub fn absorb(&mut self, sentence: &SentenceLabelSet) {
        for (&d, &s) in &sentence.entries {
            if s > self.statuses[d] {
                self.statuses[d] = s;
            }
        }
    }
}

/// Compiles lexicon and cue text against a schema.
pub fn compile_lexicon(rules: &str, cues: &str, schema: &LabelSchema) -> Result<Matcher, LabelerError> {
    let rules = parse_lexicon(rules, schema)?;
    let cues = parse_cues(cues)?;
    Ok(Matcher::new(rules, cues, schema))
}

pub fn label_sentence(sentence: &Sentence, matcher: &Matcher) -> SentenceLabelSet {
    matcher.label_tokens(&match_tokens(sentence.text()))
}

pub fn label_report(report: &Report, matcher: &Matcher) -> ReportLabelVector {
    let mut out = ReportLabelVector::unmentioned(matcher.n_diseases());
    for s in &report.sentences {
        out.absorb(&label_sentence(s, matcher));
    }
    out
}

/// Segments raw text and labels the result.
pub fn label_text(text: &str, matcher: &Matcher) -> (Report, ReportLabelVector) {
    let report = segment(text);
    let labels = label_report(&report, matcher);
    (report, labels)
}

/// Overwrites the labels of every record with labeler output.
pub fn label_corpus(corpus: &mut Corpus, matcher: &Matcher) {
    crate::parallel::map_mut(&mut corpus.records, |r| {
        r.labels = Some(label_report(&r.report, matcher));
    });
}
