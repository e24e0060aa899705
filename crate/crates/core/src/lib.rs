//! Counterfactual augmentation tooling for corpora of per-disease feature
//! bundles paired with multi-sentence reports.
//!
//! The crate is organised bottom-up:
//!
//! - [`schema`] and [`corpus`]: the label schema, record types and the
//!   line-delimited corpus format.
//! - [`labeler`]: a deterministic lexicon/negation-window report labeler.
//! - [`confound`]: contingency tables, independence gaps, Simpson reversal
//!   detection, co-mention lift and sentence-order asymmetry.
//! - [`augment`]: counterfactual sample synthesis (sentence pop + feature
//!   masking), counterfactual report reconstruction (sentence reordering) and
//!   dataset-level orchestration.
//! - [`synth`]: a seeded synthetic corpus generator with plantable
//!   co-occurrence.
//! - [`metrics`]: clinical-efficacy scores and corpus BLEU-4 / ROUGE-L.
//! - [`pipeline`]: the end-to-end before/after demonstration.
//!
//! Per-record work is data parallel. With the default `parallel` feature the
//! hot loops run on rayon; without it they run sequentially with identical
//! results, because every record draws from its own keyed random stream.

pub mod augment;
pub mod confound;
pub mod corpus;
pub mod fsio;
pub mod labeler;
pub mod metrics;
mod parallel;
pub mod pipeline;
pub mod rng;
pub mod schema;
pub mod synth;

pub use augment::{
    augment_dataset, augment_record, crr_augment, css_augment, AugmentError, AugmentFlag,
    AugmentResult, Augmentation, AugmentationConfig, AugmentationOutcome, AugmentSummary,
    SkipReason,
};
pub use confound::{
    association_stats, build_contingency, co_mention_lift, conditional_probability,
    detect_simpson_reversal, order_asymmetry, AssociationStats, ConditionalProbabilities,
    ConfoundError, ContingencyTable, OrderAsymmetry, SimpsonReport, StratifiedTables, Stratifier,
};
pub use corpus::{
    read_corpus, validate_record, write_corpus, Corpus, CorpusError, FeatureBundle,
    FeatureVector, Provenance, Record, Report, Sentence, Violation,
};
pub use labeler::{
    compile_lexicon, label_report, label_sentence, segment, LabelerError, Matcher,
    ReportLabelVector, SentenceLabelSet,
};
pub use metrics::{
    bleu4, ce_confusion, ce_scores, rouge_l, CeScores, ConfusionCounts, MetricsError, NlgScores,
};
pub use rng::RngStream;
pub use schema::{DiseaseId, DiseaseStatus, LabelSchema, SchemaError};
pub use synth::{synth_generate, OrderPolicy, SynthConfig, SynthError};

/// Returns true when the crate was built with the rayon-backed `parallel` feature.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
