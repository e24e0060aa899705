//! Seeded synthetic corpora with a plantable co-occurrence.
//!
//! Each disease gets a true status (Positive or Negative). Unplanted
//! diseases are drawn independently from their marginals; for a planted pair
//! `(a, b)` the status of `b` is drawn conditionally on `a`. A disease is then
//! mentioned with probability `mention_positive` or `mention_negative`, and
//! every mentioned disease contributes one templated sentence. Features come
//! from the true status: the matching prototype plus isotropic Gaussian noise.
//!
//! Candidate `i` draws from the stream keyed by `(seed, i)`; candidates whose
//! report would be empty are dropped, and the first `n_records` survivors are
//! kept, so output is independent of how the work is scheduled.

mod scenario;

use serde::Serialize;
use thiserror::Error;

pub use scenario::{load_scenario, parse_scenario, DEFAULT_SCENARIO};

use crate::corpus::{quantize_sig9, Corpus, FeatureBundle, FeatureVector, Record, Report, Sentence};
use crate::labeler::ReportLabelVector;
use crate::rng::RngStream;
use crate::schema::{DiseaseStatus, LabelSchema};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("invalid scenario at {path}: {reason}")]
    ConfigInvalid { path: String, reason: String },
    #[error("no {status} template for {disease}")]
    MissingTemplate { disease: String, status: DiseaseStatus },
    #[error("scenario line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("cannot read scenario {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrderPolicy {
    /// Sentences sorted by disease index.
    SchemaOrder,
    /// Sentences uniformly permuted.
    RandomOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedPair {
    pub a: usize,
    pub b: usize,
    pub p_b_given_a_pos: f64,
    pub p_b_given_a_neg: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Templates {
    pub positive: Option<String>,
    pub negative: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub schema: LabelSchema,
    pub n_records: usize,
    pub seed: u64,
    /// P(Positive) per disease index. Ignored for the `b` side of a planted pair.
    pub marginals: Vec<f64>,
    pub planted: Vec<PlantedPair>,
    pub templates: Vec<Templates>,
    pub order_policy: OrderPolicy,
    pub mention_positive: f64,
    pub mention_negative: f64,
    /// (positive, negative) prototype per disease, each of length `dim`.
    pub prototypes: Vec<(Vec<f64>, Vec<f64>)>,
    pub noise_sigma: f64,
}

/// `±0.5` on axis `i mod dim`: the two prototypes of every disease sit at
/// distance 1 from each other.
pub fn auto_prototypes(n: usize, dim: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    (0..n)
        .map(|i| {
            let mut pos = vec![0.0; dim];
            let mut neg = vec![0.0; dim];
            pos[i % dim] = 0.5;
            neg[i % dim] = -0.5;
            (pos, neg)
        })
        .collect()
}

impl SynthConfig {
    /// No marginals, no templates, auto prototypes, default mention policy.
    pub fn empty(schema: LabelSchema) -> Self {
        let n = schema.len();
        let prototypes = auto_prototypes(n, schema.dim());
        Self {
            n_records: 0,
            seed: 0,
            marginals: vec![0.0; n],
            planted: Vec::new(),
            templates: vec![Templates::default(); n],
            order_policy: OrderPolicy::SchemaOrder,
            mention_positive: 1.0,
            mention_negative: 0.6,
            prototypes,
            noise_sigma: 0.1,
            schema,
        }
    }

    /// The built-in scenario.
    pub fn default_scenario(schema: &LabelSchema) -> Result<Self, SynthError> {
        parse_scenario(DEFAULT_SCENARIO, schema)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |path: String, reason: &str| Err(SynthError::ConfigInvalid { path, reason: reason.into() });
        let prob = |x: f64| (0.0..=1.0).contains(&x);
        let name = |d: usize| self.schema.name(d).to_string();
        for (d, &p) in self.marginals.iter().enumerate() {
            if !prob(p) {
                return bad(format!("marginals.{}", name(d)), "probability outside [0, 1]");
            }
        }
        for (k, v) in [("mention_positive", self.mention_positive), ("mention_negative", self.mention_negative)] {
            if !prob(v) {
                return bad(format!("general.{k}"), "probability outside [0, 1]");
            }
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad("general.noise_sigma".into(), "must be finite and non-negative");
        }
        let mut used = vec![false; self.schema.len()];
        for p in &self.planted {
            let path = format!("planted.{} -> {}", name(p.a), name(p.b));
            if p.a == p.b {
                return bad(path, "a pair needs two distinct diseases");
            }
            if !prob(p.p_b_given_a_pos) || !prob(p.p_b_given_a_neg) {
                return bad(path, "probability outside [0, 1]");
            }
            for d in [p.a, p.b] {
                if std::mem::replace(&mut used[d], true) {
                    return bad(path, "a disease may appear in at most one planted pair");
                }
            }
        }
        for (d, (pos, neg)) in self.prototypes.iter().enumerate() {
            if pos.len() != self.schema.dim() || neg.len() != self.schema.dim() {
                return bad(format!("prototypes.{}", name(d)), "length differs from the feature dimension");
            }
            if pos.iter().chain(neg).any(|x| !x.is_finite()) {
                return bad(format!("prototypes.{}", name(d)), "non-finite value");
            }
        }
        Ok(())
    }

    /// P(Positive) implied for each disease, with planted outcomes replaced
    /// by `P(a+)·P(b+|a+) + P(a−)·P(b+|a−)`.
    pub fn induced_marginals(&self) -> Vec<f64> {
        let mut m = self.marginals.clone();
        for p in &self.planted {
            let pa = self.marginals[p.a];
            m[p.b] = pa * p.p_b_given_a_pos + (1.0 - pa) * p.p_b_given_a_neg;
        }
        m
    }
}

/// True statuses for one candidate. Consumes one uniform per disease.
pub fn sample_statuses(cfg: &SynthConfig, stream: &mut RngStream) -> Vec<DiseaseStatus> {
    let n = cfg.schema.len();
    let mut outcome_of = vec![None; n];
    for (k, p) in cfg.planted.iter().enumerate() {
        outcome_of[p.b] = Some(k);
    }
    let draw = |p: f64, s: &mut RngStream| {
        if s.bernoulli(p) {
            DiseaseStatus::Positive
        } else {
            DiseaseStatus::Negative
        }
    };
    let mut statuses = vec![DiseaseStatus::Negative; n];
    for d in (0..n).filter(|&d| outcome_of[d].is_none()) {
        statuses[d] = draw(cfg.marginals[d], stream);
    }
    for d in 0..n {
        if let Some(k) = outcome_of[d] {
            let p = &cfg.planted[k];
            let q = if statuses[p.a] == DiseaseStatus::Positive { p.p_b_given_a_pos } else { p.p_b_given_a_neg };
            statuses[d] = draw(q, stream);
        }
    }
    statuses
}

/// Applies the mention policy. Consumes one uniform per disease.
pub fn sample_mentions(cfg: &SynthConfig, truth: &[DiseaseStatus], stream: &mut RngStream) -> Vec<DiseaseStatus> {
    truth
        .iter()
        .map(|&s| {
            let p = if s == DiseaseStatus::Positive { cfg.mention_positive } else { cfg.mention_negative };
            if stream.bernoulli(p) {
                s
            } else {
                DiseaseStatus::Unmentioned
            }
        })
        .collect()
}

/// One sentence per mentioned disease, ordered by `policy`.
pub fn render_report(
    statuses: &[DiseaseStatus],
    schema: &LabelSchema,
    templates: &[Templates],
    policy: OrderPolicy,
    stream: &mut RngStream,
) -> Result<Report, SynthError> {
    let mut sentences = Vec::new();
    for (d, &s) in statuses.iter().enumerate() {
        let positive = match s {
            DiseaseStatus::Positive => true,
            DiseaseStatus::Negative => false,
            DiseaseStatus::Unmentioned => continue,
            DiseaseStatus::Uncertain => {
                return Err(SynthError::MissingTemplate { disease: schema.name(d).into(), status: s })
            }
        };
        let text = templates
            .get(d)
            .and_then(|t| t.get(positive))
            .ok_or_else(|| SynthError::MissingTemplate { disease: schema.name(d).into(), status: s })?;
        sentences.push(
            Sentence::new(text).ok_or_else(|| SynthError::MissingTemplate { disease: schema.name(d).into(), status: s })?,
        );
    }
    if policy == OrderPolicy::RandomOrder {
        stream.shuffle(&mut sentences);
    }
    Ok(Report::new(sentences))
}

/// Prototype of each status plus N(0, sigma²) noise per component;
/// Unmentioned and Uncertain use the negative prototype. Values are rounded
/// to what the corpus format stores.
pub fn sample_features(
    statuses: &[DiseaseStatus],
    prototypes: &[(Vec<f64>, Vec<f64>)],
    noise_sigma: f64,
    stream: &mut RngStream,
) -> FeatureBundle {
    let per_disease = statuses
        .iter()
        .zip(prototypes)
        .map(|(&s, (pos, neg))| {
            let base = if s == DiseaseStatus::Positive { pos } else { neg };
            let values = base
                .iter()
                .map(|&x| {
                    let noise = if noise_sigma > 0.0 { noise_sigma * stream.gaussian() } else { 0.0 };
                    quantize_sig9(x + noise)
                })
                .collect();
            FeatureVector::new(values)
        })
        .collect();
    FeatureBundle::new(per_disease)
}

/// A generated candidate: its true statuses and, when non-empty, the record.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub truth: Vec<DiseaseStatus>,
    pub mentions: Vec<DiseaseStatus>,
    pub report: Report,
    pub features: FeatureBundle,
}

pub fn generate_candidate(cfg: &SynthConfig, attempt: u64) -> Result<Candidate, SynthError> {
    let mut stream = RngStream::for_index(cfg.seed, attempt);
    let truth = sample_statuses(cfg, &mut stream);
    let mentions = sample_mentions(cfg, &truth, &mut stream);
    let report = render_report(&mentions, &cfg.schema, &cfg.templates, cfg.order_policy, &mut stream)?;
    let features = sample_features(&truth, &cfg.prototypes, cfg.noise_sigma, &mut stream);
    Ok(Candidate { truth, mentions, report, features })
}

/// Generates `n_records` records with ids `syn0000000`, `syn0000001`, ...
/// Labels are the mention statuses, which is what a faithful labeler
/// recovers from the rendered text.
pub fn synth_generate(cfg: &SynthConfig) -> Result<Corpus, SynthError> {
    cfg.validate()?;
    let mut kept: Vec<Candidate> = Vec::with_capacity(cfg.n_records);
    let mut next = 0u64;
    while kept.len() < cfg.n_records {
        let need = cfg.n_records - kept.len();
        // Over-provision a little so sparse scenarios converge in few rounds.
        let batch = need + need / 4 + 16;
        let start = next;
        let results =
            crate::parallel::map_range(0..batch, |k| generate_candidate(cfg, start + k as u64));
        next += batch as u64;
        for c in results {
            let c = c?;
            if !c.report.is_empty() && kept.len() < cfg.n_records {
                kept.push(c);
            }
        }
        if next > 1_000 && kept.is_empty() {
            return Err(SynthError::ConfigInvalid {
                path: "general".into(),
                reason: "no disease is ever mentioned, so every report is empty".into(),
            });
        }
    }
    let records = kept
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            Record::original(format!("syn{i:07}"), c.report)
                .with_features(c.features)
                .with_labels(ReportLabelVector::new(c.mentions))
        })
        .collect();
    Ok(Corpus::with_records(cfg.schema.clone(), records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{encode_corpus, validate_record};
    use crate::labeler::{label_sentence, Matcher};
    use DiseaseStatus::*;

    fn schema() -> LabelSchema {
        LabelSchema::default()
    }

    fn default_cfg() -> SynthConfig {
        SynthConfig::default_scenario(&schema()).unwrap()
    }

    #[test]
    fn default_scenario_shape() {
        let c = default_cfg();
        assert_eq!(c.n_records, 20000);
        assert_eq!(c.order_policy, OrderPolicy::SchemaOrder);
        assert_eq!(c.planted.len(), 1);
        assert_eq!((c.planted[0].a, c.planted[0].b), (8, 9));
        assert_eq!(c.marginals[8], 0.038);
        let induced = c.induced_marginals()[9];
        assert!((induced - (0.038 * 0.463 + 0.962 * 0.159)).abs() < 1e-15);
    }

    #[test]
    fn templates_agree_with_default_lexicon() {
        let c = default_cfg();
        let m = Matcher::default_for(&c.schema).unwrap();
        for (d, t) in c.templates.iter().enumerate() {
            for (positive, want) in [(true, Positive), (false, Negative)] {
                let text = t.get(positive).unwrap_or_else(|| panic!("missing template for {d}"));
                let l = label_sentence(&Sentence::new(text).unwrap(), &m);
                assert_eq!(l.entries.len(), 1, "{text:?} labels {:?}", l.entries);
                assert_eq!(l.get(d), Some(want), "{text:?}");
            }
        }
    }

    #[test]
    fn render_schema_order_and_empty() {
        let c = default_cfg();
        let mut st = vec![Unmentioned; 14];
        st[9] = Positive;
        st[8] = Negative;
        let r = render_report(&st, &c.schema, &c.templates, OrderPolicy::SchemaOrder, &mut RngStream::from_state(0)).unwrap();
        assert_eq!(r.sentences[0].text(), "No pneumothorax.");
        assert_eq!(r.sentences[1].text(), "Small right pleural effusion.");
        let none = vec![Unmentioned; 14];
        assert!(render_report(&none, &c.schema, &c.templates, OrderPolicy::SchemaOrder, &mut RngStream::from_state(0))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn missing_template_error() {
        let c = SynthConfig::empty(schema());
        let mut st = vec![Unmentioned; 14];
        st[3] = Positive;
        assert!(matches!(
            render_report(&st, &c.schema, &c.templates, OrderPolicy::SchemaOrder, &mut RngStream::from_state(0)),
            Err(SynthError::MissingTemplate { status: Positive, .. })
        ));
    }

    #[test]
    fn features_without_noise_equal_prototypes() {
        let protos = auto_prototypes(14, 16);
        let mut st = vec![Negative; 14];
        st[2] = Positive;
        st[5] = Unmentioned;
        let f = sample_features(&st, &protos, 0.0, &mut RngStream::from_state(1));
        assert_eq!(f.per_disease[2].values, protos[2].0);
        assert_eq!(f.per_disease[5].values, protos[5].1);
        assert!(f.per_disease.iter().all(|v| !v.masked && v.dim() == 16));
    }

    #[test]
    fn features_differ_across_streams() {
        let protos = auto_prototypes(14, 16);
        let st = vec![Negative; 14];
        let a = sample_features(&st, &protos, 0.1, &mut RngStream::for_index(3, 0));
        let b = sample_features(&st, &protos, 0.1, &mut RngStream::for_index(3, 1));
        assert_ne!(a, b);
    }

    #[test]
    fn generation_is_deterministic_and_valid() {
        let cfg = SynthConfig { n_records: 500, ..default_cfg() };
        let a = synth_generate(&cfg).unwrap();
        let b = synth_generate(&cfg).unwrap();
        assert_eq!(encode_corpus(&a), encode_corpus(&b));
        assert_eq!(a.len(), 500);
        assert_eq!(a.records[0].id, "syn0000000");
        for r in &a.records {
            validate_record(r, &a.schema).unwrap();
            assert!(!r.report.is_empty());
        }
    }

    #[test]
    fn config_errors_name_the_field() {
        let bad = DEFAULT_SCENARIO.replace("Edema = 0.10", "Edema = 1.5");
        assert_eq!(
            parse_scenario(&bad, &schema()),
            Err(SynthError::ConfigInvalid { path: "marginals.Edema".into(), reason: "probability outside [0, 1]".into() })
        );
        let twice = format!("{DEFAULT_SCENARIO}\n[planted]\nPleural Effusion -> Edema = 0.5, 0.5\n");
        assert!(matches!(parse_scenario(&twice, &schema()), Err(SynthError::ConfigInvalid { .. })));
        let unknown = "[marginals]\nGout = 0.1\n";
        assert!(matches!(parse_scenario(unknown, &schema()), Err(SynthError::ConfigInvalid { .. })));
        assert!(matches!(parse_scenario("Edema = 0.1\n", &schema()), Err(SynthError::Parse { line: 1, .. })));
    }

    #[test]
    fn explicit_prototypes_override_auto() {
        let text = format!("{DEFAULT_SCENARIO}\n[prototypes]\nEdema.positive = {}\n", vec!["1"; 16].join(", "));
        let c = parse_scenario(&text, &schema()).unwrap();
        assert_eq!(c.prototypes[4].0, vec![1.0; 16]);
        assert_eq!(c.prototypes[4].1, auto_prototypes(14, 16)[4].1);
        let short = format!("{DEFAULT_SCENARIO}\n[prototypes]\nEdema.positive = 1, 2\n");
        assert!(matches!(parse_scenario(&short, &schema()), Err(SynthError::ConfigInvalid { .. })));
    }
}
