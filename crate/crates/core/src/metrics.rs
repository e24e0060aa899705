//! Clinical-efficacy scores over labeler output, and corpus BLEU-4 /
//! ROUGE-L over report text.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::Report;
use crate::labeler::ReportLabelVector;
use crate::schema::DiseaseStatus;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("gold has {gold} items but generated has {generated}")]
    LengthMismatch { gold: usize, generated: usize },
    #[error("record {index}: label vectors have {gold} and {generated} diseases")]
    SchemaMismatch { index: usize, gold: usize, generated: usize },
    #[error("no observations to score")]
    EmptyInput,
}

/// How statuses map to the binary positive-vs-rest label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Binarize {
    /// Count Uncertain as positive. Off by default.
    pub uncertain_positive: bool,
}

impl Binarize {
    pub fn apply(self, s: DiseaseStatus) -> bool {
        match s {
            DiseaseStatus::Positive => true,
            DiseaseStatus::Uncertain => self.uncertain_positive,
            DiseaseStatus::Negative | DiseaseStatus::Unmentioned => false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    fn push(&mut self, gold: bool, gen: bool) {
        match (gold, gen) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    fn merge(mut self, o: Self) -> Self {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.tn += o.tn;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CeScores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn check_pairs<T>(gold: &[T], gen: &[T]) -> Result<(), MetricsError> {
    if gold.len() != gen.len() {
        return Err(MetricsError::LengthMismatch { gold: gold.len(), generated: gen.len() });
    }
    Ok(())
}

fn check_labels(gold: &[ReportLabelVector], gen: &[ReportLabelVector]) -> Result<(), MetricsError> {
    check_pairs(gold, gen)?;
    if let Some((index, (g, h))) = gold.iter().zip(gen).enumerate().find(|(_, (g, h))| g.len() != h.len()) {
        return Err(MetricsError::SchemaMismatch { index, gold: g.len(), generated: h.len() });
    }
    Ok(())
}

/// Micro-pooled confusion counts with Uncertain treated as negative.
pub fn ce_confusion(gold: &[ReportLabelVector], gen: &[ReportLabelVector]) -> Result<ConfusionCounts, MetricsError> {
    ce_confusion_with(gold, gen, Binarize::default())
}

pub fn ce_confusion_with(
    gold: &[ReportLabelVector],
    gen: &[ReportLabelVector],
    policy: Binarize,
) -> Result<ConfusionCounts, MetricsError> {
    Ok(per_disease_confusion(gold, gen, policy)?.into_iter().fold(ConfusionCounts::default(), ConfusionCounts::merge))
}

/// One confusion table per disease, indexed by disease.
pub fn per_disease_confusion(
    gold: &[ReportLabelVector],
    gen: &[ReportLabelVector],
    policy: Binarize,
) -> Result<Vec<ConfusionCounts>, MetricsError> {
    check_labels(gold, gen)?;
    let n = gold.first().map_or(0, ReportLabelVector::len);
    let mut out = vec![ConfusionCounts::default(); n];
    for (g, h) in gold.iter().zip(gen) {
        for (d, c) in out.iter_mut().enumerate() {
            c.push(policy.apply(g.get(d)), policy.apply(h.get(d)));
        }
    }
    Ok(out)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn ce_scores(c: &ConfusionCounts) -> Result<CeScores, MetricsError> {
    if c.total() == 0 {
        return Err(MetricsError::EmptyInput);
    }
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    Ok(CeScores { accuracy: ratio(c.tp + c.tn, c.total()), precision, recall, f1 })
}

/// Unweighted mean of per-disease scores.
pub fn ce_scores_macro(per_disease: &[ConfusionCounts]) -> Result<CeScores, MetricsError> {
    let scored: Vec<CeScores> = per_disease.iter().map(ce_scores).collect::<Result<_, _>>()?;
    if scored.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let n = scored.len() as f64;
    let mean = |f: fn(&CeScores) -> f64| scored.iter().map(f).sum::<f64>() / n;
    Ok(CeScores {
        accuracy: mean(|s| s.accuracy),
        precision: mean(|s| s.precision),
        recall: mean(|s| s.recall),
        f1: mean(|s| s.f1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NlgScores {
    pub bleu4: f64,
    pub rouge_l: f64,
}

/// Lowercased tokens; each punctuation character is its own token.
pub fn nlg_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            word.extend(c.to_lowercase());
            continue;
        }
        if !word.is_empty() {
            out.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() {
            out.push(c.to_string());
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

fn report_tokens(r: &Report) -> Vec<String> {
    nlg_tokens(&r.text())
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut m = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

/// Pooled clipped n-gram matches and candidate n-gram totals for n = 1..=4,
/// plus total reference and candidate lengths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [u64; 4],
    pub totals: [u64; 4],
    pub ref_len: u64,
    pub cand_len: u64,
}

impl BleuStats {
    pub fn precisions(&self) -> [f64; 4] {
        std::array::from_fn(|i| ratio(self.matches[i], self.totals[i]))
    }

    pub fn score(&self) -> f64 {
        if self.matches.contains(&0) {
            return 0.0;
        }
        let log_mean = self.precisions().iter().map(|p| p.ln()).sum::<f64>() / 4.0;
        let bp = if self.cand_len < self.ref_len {
            (1.0 - self.ref_len as f64 / self.cand_len as f64).exp()
        } else {
            1.0
        };
        bp * log_mean.exp()
    }

    fn merge(mut self, o: Self) -> Self {
        for i in 0..4 {
            self.matches[i] += o.matches[i];
            self.totals[i] += o.totals[i];
        }
        self.ref_len += o.ref_len;
        self.cand_len += o.cand_len;
        self
    }
}

fn pair_bleu_stats(reference: &[String], candidate: &[String]) -> BleuStats {
    let mut s = BleuStats { ref_len: reference.len() as u64, cand_len: candidate.len() as u64, ..Default::default() };
    for n in 1..=4 {
        let r = ngram_counts(reference, n);
        let c = ngram_counts(candidate, n);
        s.matches[n - 1] = c.iter().map(|(g, &k)| k.min(r.get(g).copied().unwrap_or(0))).sum();
        s.totals[n - 1] = candidate.len().saturating_sub(n - 1) as u64;
    }
    s
}

pub fn bleu4_stats(gold: &[Report], gen: &[Report]) -> Result<BleuStats, MetricsError> {
    check_pairs(gold, gen)?;
    let pairs: Vec<(&Report, &Report)> = gold.iter().zip(gen).collect();
    let parts = crate::parallel::map(&pairs, |(g, h)| pair_bleu_stats(&report_tokens(g), &report_tokens(h)));
    Ok(parts.into_iter().fold(BleuStats::default(), BleuStats::merge))
}

/// Corpus-level BLEU-4 with one reference per candidate and no smoothing.
pub fn bleu4(gold: &[Report], gen: &[Report]) -> Result<f64, MetricsError> {
    Ok(bleu4_stats(gold, gen)?.score())
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

const ROUGE_BETA: f64 = 1.2;

/// ROUGE-L F-measure of a single token pair.
pub fn rouge_l_tokens(reference: &[String], candidate: &[String]) -> f64 {
    let lcs = lcs_len(reference, candidate);
    if lcs == 0 {
        return 0.0;
    }
    let r = lcs as f64 / reference.len() as f64;
    let p = lcs as f64 / candidate.len() as f64;
    let b2 = ROUGE_BETA * ROUGE_BETA;
    (1.0 + b2) * r * p / (r + b2 * p)
}

/// Mean per-pair ROUGE-L F-measure; 0 for an empty corpus.
pub fn rouge_l(gold: &[Report], gen: &[Report]) -> Result<f64, MetricsError> {
    check_pairs(gold, gen)?;
    if gold.is_empty() {
        return Ok(0.0);
    }
    let pairs: Vec<(&Report, &Report)> = gold.iter().zip(gen).collect();
    let f = crate::parallel::map(&pairs, |(g, h)| rouge_l_tokens(&report_tokens(g), &report_tokens(h)));
    Ok(f.iter().sum::<f64>() / f.len() as f64)
}

pub fn nlg_scores(gold: &[Report], gen: &[Report]) -> Result<NlgScores, MetricsError> {
    Ok(NlgScores { bleu4: bleu4(gold, gen)?, rouge_l: rouge_l(gold, gen)? })
}
