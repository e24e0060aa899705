mod common;

use std::collections::BTreeSet;

use coa_core::augment::{augment_dataset, augment_record, crr_augment, css_augment, AugmentFlag, AugmentationConfig};
use coa_core::confound::{
    association_stats, detect_simpson_reversal, ContingencyTable, StratifiedTables,
};
use coa_core::corpus::{decode_corpus, encode_corpus, Corpus, Report};
use coa_core::labeler::{label_report, ReportLabelVector};
use coa_core::metrics::{bleu4, ce_confusion, ce_scores, rouge_l, ConfusionCounts};
use coa_core::rng::RngStream;
use coa_core::schema::DiseaseStatus;
use common::records::*;
use proptest::prelude::*;

fn sorted_texts(r: &Report) -> Vec<String> {
    let mut v: Vec<String> = r.sentences.iter().map(|s| s.text().to_string()).collect();
    v.sort();
    v
}

fn arb_status() -> impl Strategy<Value = DiseaseStatus> {
    prop::sample::select(DiseaseStatus::ALL.to_vec())
}

fn arb_labels() -> impl Strategy<Value = ReportLabelVector> {
    prop::collection::vec(arb_status(), 14).prop_map(ReportLabelVector::new)
}

fn arb_table() -> impl Strategy<Value = ContingencyTable> {
    (0u64..500, 0u64..500, 0u64..500, 0u64..500).prop_map(|(a, b, c, d)| ContingencyTable::from_cells(a, b, c, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn corpus_round_trip(records in prop::collection::vec(arb_record(), 0..6)) {
        let m = matcher();
        let mut seen = BTreeSet::new();
        let mut records: Vec<_> = records.into_iter().filter(|r| seen.insert(r.id.clone())).collect();
        for (i, r) in records.iter_mut().enumerate() {
            if i % 2 == 0 {
                r.labels = Some(label_report(&r.report, &m));
            }
        }
        let c = Corpus::with_records(schema(), records);
        let text = encode_corpus(&c);
        let back = decode_corpus(&text, &schema()).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(encode_corpus(&back), text);
    }

    #[test]
    fn stratum_additivity(tables in prop::collection::vec(arb_table(), 1..6)) {
        let strata: Vec<_> = tables.iter().enumerate().map(|(i, t)| (format!("s{i}"), *t)).collect();
        let st = StratifiedTables::from_strata(strata);
        for k in 0..4 {
            prop_assert_eq!(st.aggregate.cells()[k], tables.iter().map(|t| t.cells()[k]).sum::<u64>());
        }
    }

    #[test]
    fn margin_product_tables_are_independent(r1 in 1u64..40, r2 in 1u64..40, c1 in 1u64..40, c2 in 1u64..40) {
        let t = ContingencyTable::from_cells(r1 * c1, r1 * c2, r2 * c1, r2 * c2);
        let s = association_stats(&t).unwrap();
        prop_assert!(s.independence_gap.abs() < 1e-12);
        prop_assert!((s.odds_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn association_bounds(t in arb_table()) {
        prop_assume!(t.observed() > 0);
        let s = association_stats(&t).unwrap();
        prop_assert!(s.odds_ratio > 0.0);
        prop_assert!((-0.25..=0.25).contains(&s.independence_gap));
        for p in [s.p_b_given_a_pos, s.p_b_given_a_neg].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn simpson_scale_invariance(tables in prop::collection::vec(arb_table(), 2..5), k in 1u64..1000) {
        let st = StratifiedTables::from_strata(tables.iter().enumerate().map(|(i, t)| (format!("s{i}"), *t)).collect());
        let scaled = StratifiedTables::from_strata(
            tables.iter().enumerate().map(|(i, t)| (format!("s{i}"), t.scaled(k))).collect(),
        );
        prop_assert_eq!(detect_simpson_reversal(&st).unwrap(), detect_simpson_reversal(&scaled).unwrap());
    }

    #[test]
    fn crr_preserves_multiset_and_breaks_order(r in arb_record(), seed in any::<u64>()) {
        let (out, perm) = crr_augment(&r.report, &mut RngStream::for_id(seed, &r.id));
        prop_assert_eq!(sorted_texts(&out), sorted_texts(&r.report));
        let mut p = perm.clone();
        p.sort_unstable();
        prop_assert_eq!(p, (0..r.report.len()).collect::<Vec<_>>());
        if r.report.len() >= 2 {
            prop_assert!(perm.iter().enumerate().any(|(i, &v)| i != v));
        }
    }

    #[test]
    fn css_mask_pairing_and_label_conservation(r in arb_record(), seed in any::<u64>()) {
        let m = matcher();
        let cfg = AugmentationConfig::default();
        if let Some(o) = css_augment(&r, &m, &mut RngStream::for_id(seed, &r.id), &cfg).unwrap().outcome() {
            let popped: BTreeSet<usize> = o.popped_labels.diseases().collect();
            prop_assert_eq!(&o.masked_indices, &popped);
            let masked: BTreeSet<usize> = o.record.features.as_ref().unwrap().masked_indices().into_iter().collect();
            prop_assert_eq!(&masked, &popped);
            prop_assert_eq!(o.record.report.len() + 1, r.report.len());
            if !o.flags.contains(&AugmentFlag::OrphanMention) {
                let before = label_report(&r.report, &m);
                let after = label_report(&o.record.report, &m);
                for d in (0..14).filter(|d| !popped.contains(d)) {
                    prop_assert_eq!(before.get(d), after.get(d));
                }
                for &d in &popped {
                    prop_assert_eq!(after.get(d), DiseaseStatus::Unmentioned);
                }
            }
        }
    }

    #[test]
    fn labeler_is_order_invariant(r in arb_record(), seed in any::<u64>()) {
        let m = matcher();
        let (perm, _) = crr_augment(&r.report, &mut RngStream::for_index(seed, 0));
        prop_assert_eq!(label_report(&perm, &m), label_report(&r.report, &m));
    }

    #[test]
    fn ce_is_invariant_under_sentence_permutation(
        gold in prop::collection::vec(arb_record(), 1..6),
        gen in prop::collection::vec(arb_record(), 6),
        seed in any::<u64>(),
    ) {
        let m = matcher();
        let gen = &gen[..gold.len()];
        let g: Vec<_> = gold.iter().map(|r| label_report(&r.report, &m)).collect();
        let h: Vec<_> = gen.iter().map(|r| label_report(&r.report, &m)).collect();
        let h_perm: Vec<_> = gen
            .iter()
            .enumerate()
            .map(|(i, r)| label_report(&crr_augment(&r.report, &mut RngStream::for_index(seed, i as u64)).0, &m))
            .collect();
        let a = ce_scores(&ce_confusion(&g, &h).unwrap()).unwrap();
        let b = ce_scores(&ce_confusion(&g, &h_perm).unwrap()).unwrap();
        prop_assert_eq!(a.f1.to_bits(), b.f1.to_bits());
        prop_assert_eq!(a.precision.to_bits(), b.precision.to_bits());
        prop_assert_eq!(a.recall.to_bits(), b.recall.to_bits());
        prop_assert_eq!(a.accuracy.to_bits(), b.accuracy.to_bits());
    }

    #[test]
    fn ce_identity_has_no_errors(gold in prop::collection::vec(arb_labels(), 1..20)) {
        let c = ce_confusion(&gold, &gold).unwrap();
        prop_assert_eq!((c.fp, c.fn_), (0, 0));
        prop_assert_eq!(c.total(), 14 * gold.len() as u64);
    }

    #[test]
    fn ce_score_bounds(tp in 0u64..100, fp in 0u64..100, fn_ in 0u64..100, tn in 0u64..100) {
        let c = ConfusionCounts { tp, fp, fn_, tn };
        prop_assume!(c.total() > 0);
        let s = ce_scores(&c).unwrap();
        for x in [s.accuracy, s.precision, s.recall, s.f1] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        let lo = s.precision.min(s.recall);
        prop_assert!(s.f1 <= 2.0 * lo / (1.0 + lo) + 1e-12);
    }

    #[test]
    fn nlg_scores_are_bounded(
        gold in prop::collection::vec(arb_record(), 1..5),
        gen in prop::collection::vec(arb_record(), 5),
    ) {
        let g: Vec<_> = gold.iter().map(|r| r.report.clone()).collect();
        let h: Vec<_> = gen[..g.len()].iter().map(|r| r.report.clone()).collect();
        let b = bleu4(&g, &h).unwrap();
        let r = rouge_l(&g, &h).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&b));
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r));
    }

    #[test]
    fn augment_record_provenance(r in arb_record(), seed in any::<u64>(), css in any::<bool>(), crr in any::<bool>()) {
        prop_assume!(css || crr);
        let cfg = AugmentationConfig { enable_css: css, enable_crr: crr, ..Default::default() };
        if let Some(o) = augment_record(&r, &matcher(), &mut RngStream::for_id(seed, &r.id), &cfg).unwrap().outcome() {
            prop_assert_eq!(o.record.id, format!("{}#cf", r.id));
            prop_assert_eq!(o.record.source_id.as_deref(), Some(r.id.as_str()));
            let expected_len = r.report.len() - usize::from(css);
            prop_assert_eq!(o.record.report.len(), expected_len);
        }
    }

    #[test]
    fn dataset_size_follows_rate(n in 0usize..60, rate_q in 0usize..=4, seed in any::<u64>()) {
        let rate = rate_q as f64 * 0.25;
        let records = random_records(n, seed);
        let c = Corpus::with_records(schema(), records);
        let cfg = AugmentationConfig { rate, seed, enable_css: false, ..Default::default() };
        let a = augment_dataset(&c, &matcher(), &cfg).unwrap();
        prop_assert_eq!(a.corpus.len(), n + (rate * n as f64 + 1e-9).floor() as usize);
        prop_assert_eq!(&a.corpus.records[..n], &c.records[..]);
        let sources: BTreeSet<_> = a.corpus.records[n..].iter().map(|r| r.source_id.clone()).collect();
        prop_assert_eq!(sources.len(), a.corpus.len() - n);
    }

    #[test]
    fn streams_are_keyed(seed in any::<u64>(), id in "[a-z]{1,8}") {
        let mut a = RngStream::for_id(seed, &id);
        let mut b = RngStream::for_id(seed, &id);
        for _ in 0..8 {
            prop_assert_eq!(a.next_u64(), b.next_u64());
        }
    }
}

#[test]
fn nlg_witness_pair_is_order_sensitive() {
    let gold = [Report::from_texts(&["No pneumothorax.", "Small right pleural effusion.", "Heart size is normal."])];
    let gen = [Report::from_texts(&["Heart size is normal.", "No pneumothorax.", "Small right pleural effusion."])];
    assert!(bleu4(&gold, &gen).unwrap() < bleu4(&gold, &gold).unwrap());
    assert!(rouge_l(&gold, &gen).unwrap() < 1.0);
}

#[cfg(feature = "parallel")]
#[test]
fn augment_output_is_independent_of_worker_count() {
    let c = Corpus::with_records(schema(), random_records(2000, 5));
    let cfg = AugmentationConfig { rate: 0.75, seed: 99, ..Default::default() };
    let m = matcher();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| encode_corpus(&augment_dataset(&c, &m, &cfg).unwrap().corpus))
    };
    assert_eq!(run(1), run(4));
}
