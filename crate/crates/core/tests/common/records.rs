// Random record generators for property tests.

use coa_core::corpus::{quantize_sig9, FeatureBundle, FeatureVector, Record, Report};
use coa_core::labeler::Matcher;
use coa_core::schema::LabelSchema;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sentences mixing single-disease, multi-disease, uncertain and unlabeled
/// text, with repeats so orphan mentions occur.
pub const POOL: &[&str] = &[
    "No pneumothorax.",
    "Small right pleural effusion.",
    "Heart size is normal.",
    "The lungs are clear without effusion or pneumothorax.",
    "Possible small left pneumothorax.",
    "Effusion is unchanged.",
    "Moderate cardiomegaly is present.",
    "No cardiomegaly.",
    "Patchy opacity in the left lung base.",
    "Mild pulmonary edema.",
    "No focal consolidation.",
    "Findings may represent pneumonia.",
    "Mild bibasilar atelectasis.",
    "A right internal jugular catheter is in place.",
    "No acute cardiopulmonary process.",
    "Patient is comfortable.",
    "Stable appearance of the chest.",
    "No pleural effusion or pulmonary edema.",
    "Healed left rib fracture.",
    "There is a small right pneumothorax.",
];

pub fn schema() -> LabelSchema {
    LabelSchema::default()
}

pub fn matcher() -> Matcher {
    Matcher::default_for(&schema()).unwrap()
}

pub fn bundle_from(values: &[f64], n: usize, dim: usize) -> FeatureBundle {
    FeatureBundle::new(
        (0..n).map(|d| FeatureVector::new((0..dim).map(|k| quantize_sig9(values[(d * dim + k) % values.len()])).collect())).collect(),
    )
}

pub fn record_from(id: String, sentence_ids: &[usize], values: &[f64]) -> Record {
    let texts: Vec<&str> = sentence_ids.iter().map(|&i| POOL[i % POOL.len()]).collect();
    Record::original(id, Report::from_texts(&texts)).with_features(bundle_from(values, 14, 16))
}

pub fn arb_record() -> impl Strategy<Value = Record> {
    (
        "[a-z0-9]{1,12}",
        prop::collection::vec(0..POOL.len(), 1..8),
        prop::collection::vec(-1.0f64..1.0, 1..32),
    )
        .prop_map(|(id, s, v)| record_from(id, &s, &v))
}

/// `n` records with ids `rand0000000`..., 1 to 7 sentences each.
pub fn random_records(n: usize, seed: u64) -> Vec<Record> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let k = rng.random_range(1..8);
            let s: Vec<usize> = (0..k).map(|_| rng.random_range(0..POOL.len())).collect();
            let v: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
            record_from(format!("rand{i:07}"), &s, &v)
        })
        .collect()
}
