//! End-to-end demonstration: synthesise a confounded corpus, label it,
//! measure the target pair, augment at rate 1.0 and measure again.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::augment::{augment_dataset, AugmentError, AugmentSummary, AugmentationConfig};
use crate::confound::{
    association_stats, build_contingency, co_mention_lift, conditional_probability, order_asymmetry,
    ConfoundError, Stratifier,
};
use crate::corpus::{Corpus, Provenance};
use crate::labeler::{label_corpus, Matcher};
use crate::synth::{synth_generate, SynthConfig, SynthError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Confound(#[from] ConfoundError),
}

/// Pair statistics on one corpus. Undefined quantities are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairStats {
    pub records: usize,
    pub cells: [u64; 4],
    pub p_b_pos_given_a_pos: Option<f64>,
    pub p_b_pos_given_a_neg: Option<f64>,
    pub odds_ratio: Option<f64>,
    pub independence_gap: Option<f64>,
    pub lift: Option<f64>,
    pub order_asymmetry: Option<f64>,
    pub co_occurrences: u64,
}

pub fn pair_stats(corpus: &Corpus, matcher: &Matcher, a: usize, b: usize) -> Result<PairStats, ConfoundError> {
    let table = build_contingency(corpus, a, b, Stratifier::None)?.aggregate;
    let cond = conditional_probability(&table).ok();
    let assoc = association_stats(&table).ok();
    let order = order_asymmetry(corpus, matcher, a, b).ok();
    Ok(PairStats {
        records: corpus.len(),
        cells: table.cells(),
        p_b_pos_given_a_pos: cond.map(|c| c.b_pos_given_a_pos),
        p_b_pos_given_a_neg: cond.map(|c| c.b_pos_given_a_neg),
        odds_ratio: assoc.map(|s| s.odds_ratio),
        independence_gap: assoc.map(|s| s.independence_gap),
        lift: co_mention_lift(corpus, a, b).ok(),
        order_asymmetry: order.as_ref().map(|o| o.asym),
        co_occurrences: order.map_or(0, |o| o.co_occur_count),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineSummary {
    pub seed: u64,
    pub pair: [String; 2],
    pub before: PairStats,
    /// Measured on `D = D_o ∪ D_c`.
    pub after: PairStats,
    /// Measured on `D_c` alone.
    pub counterfactual_only: PairStats,
    pub augmentation: AugmentSummary,
}

impl PipelineSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes") + "\n"
    }

    /// Before/after table as plain text.
    pub fn to_table(&self) -> String {
        fn cell(x: Option<f64>) -> String {
            x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
        }
        let mut s = String::new();
        let _ = writeln!(s, "pair: {} / {}  (seed {})", self.pair[0], self.pair[1], self.seed);
        let _ = writeln!(s, "{:<18}{:>12}{:>12}{:>12}", "metric", "before", "after", "cf only");
        type Row = (&'static str, fn(&PairStats) -> Option<f64>);
        let rows: [Row; 4] = [
            ("lift", |p| p.lift),
            ("independence gap", |p| p.independence_gap),
            ("odds ratio", |p| p.odds_ratio),
            ("order asymmetry", |p| p.order_asymmetry),
        ];
        for (name, f) in rows {
            let _ = writeln!(
                s,
                "{:<18}{:>12}{:>12}{:>12}",
                name,
                cell(f(&self.before)),
                cell(f(&self.after)),
                cell(f(&self.counterfactual_only))
            );
        }
        let _ = writeln!(
            s,
            "{:<18}{:>12}{:>12}{:>12}",
            "records", self.before.records, self.after.records, self.counterfactual_only.records
        );
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub original: Corpus,
    pub augmented: Corpus,
    pub summary: PipelineSummary,
}

/// The first planted pair, or the first two diseases when nothing is planted.
pub fn target_pair(cfg: &SynthConfig) -> (usize, usize) {
    cfg.planted.first().map_or((0, 1), |p| (p.a, p.b))
}

/// Runs the pipeline with `cfg.seed` replaced by `seed` for both generation
/// and augmentation.
pub fn run_pipeline(cfg: &SynthConfig, seed: u64, matcher: &Matcher) -> Result<PipelineOutput, PipelineError> {
    let cfg = SynthConfig { seed, ..cfg.clone() };
    let (a, b) = target_pair(&cfg);
    let mut original = synth_generate(&cfg)?;
    label_corpus(&mut original, matcher);
    let before = pair_stats(&original, matcher, a, b)?;

    let aug_cfg = AugmentationConfig { rate: 1.0, seed, ..Default::default() };
    let aug = augment_dataset(&original, matcher, &aug_cfg)?;
    let after = pair_stats(&aug.corpus, matcher, a, b)?;
    let cf = Corpus::with_records(
        aug.corpus.schema.clone(),
        aug.corpus.by_provenance(Provenance::Counterfactual).cloned().collect(),
    );
    let counterfactual_only = pair_stats(&cf, matcher, a, b)?;
    let summary = PipelineSummary {
        seed,
        pair: [cfg.schema.name(a).to_string(), cfg.schema.name(b).to_string()],
        before,
        after,
        counterfactual_only,
        augmentation: aug.summary,
    };
    Ok(PipelineOutput { original, augmented: aug.corpus, summary })
}
