//! Co-occurrence statistics for disease pairs.
//!
//! For an exposure disease A and an outcome disease B, records whose labels
//! are Positive/Negative for both fall into the four cells of a 2×2 table.
//! Records where A is Positive or Negative but B is Uncertain/Unmentioned
//! count toward A's exposure totals only; every record counts toward the
//! total population. Conditionals are therefore taken over the exposure
//! totals: with pneumothorax / pleural-effusion counts of 3552 (A+B+) out of
//! 7667 A+ reports, P(B+|A+) = 0.463 even though the four cells only cover
//! 189707 of 203092 reports.

use thiserror::Error;

use crate::corpus::{Corpus, Provenance};
use crate::labeler::{label_sentence, Matcher};
use crate::schema::DiseaseStatus;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfoundError {
    #[error("record {0:?} has no labels; run the labeler first")]
    MissingLabels(String),
    #[error("conditional probability undefined: exposure total is zero")]
    UndefinedConditional,
    #[error("contingency table has no observations")]
    EmptyTable,
    #[error("simpson analysis needs at least two strata, got {0}")]
    InsufficientStrata(usize),
    #[error("lift undefined: a disease is never mentioned")]
    UndefinedLift,
    #[error("no report mentions both diseases in distinct sentences")]
    NoCooccurrence,
    #[error("inconsistent table: {0}")]
    Inconsistent(&'static str),
}

/// 2×2 table for exposure A (first index) and outcome B (second index).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ContingencyTable {
    /// A+ B+
    pub n_pp: u64,
    /// A+ B−
    pub n_pm: u64,
    /// A− B+
    pub n_mp: u64,
    /// A− B−
    pub n_mm: u64,
    /// Records with A positive, whatever B is.
    pub a_pos_total: u64,
    /// Records with A negative, whatever B is.
    pub a_neg_total: u64,
    /// All records considered.
    pub total_population: u64,
}

impl ContingencyTable {
    /// A table with no residual rows: exposure totals equal the cell rows.
    pub fn from_cells(n_pp: u64, n_pm: u64, n_mp: u64, n_mm: u64) -> Self {
        Self {
            n_pp,
            n_pm,
            n_mp,
            n_mm,
            a_pos_total: n_pp + n_pm,
            a_neg_total: n_mp + n_mm,
            total_population: n_pp + n_pm + n_mp + n_mm,
        }
    }

    pub fn with_totals(
        cells: [u64; 4],
        a_pos_total: u64,
        a_neg_total: u64,
        total_population: u64,
    ) -> Result<Self, ConfoundError> {
        let [n_pp, n_pm, n_mp, n_mm] = cells;
        let t = Self { n_pp, n_pm, n_mp, n_mm, a_pos_total, a_neg_total, total_population };
        t.check()?;
        Ok(t)
    }

    fn check(&self) -> Result<(), ConfoundError> {
        if self.a_pos_total < self.n_pp + self.n_pm {
            return Err(ConfoundError::Inconsistent("A+ total below its cells"));
        }
        if self.a_neg_total < self.n_mp + self.n_mm {
            return Err(ConfoundError::Inconsistent("A- total below its cells"));
        }
        if self.total_population < self.a_pos_total + self.a_neg_total {
            return Err(ConfoundError::Inconsistent("population below exposure totals"));
        }
        Ok(())
    }

    pub fn cells(&self) -> [u64; 4] {
        [self.n_pp, self.n_pm, self.n_mp, self.n_mm]
    }

    /// Sum of the four cells.
    pub fn observed(&self) -> u64 {
        self.n_pp + self.n_pm + self.n_mp + self.n_mm
    }

    pub fn scaled(&self, k: u64) -> Self {
        Self {
            n_pp: self.n_pp * k,
            n_pm: self.n_pm * k,
            n_mp: self.n_mp * k,
            n_mm: self.n_mm * k,
            a_pos_total: self.a_pos_total * k,
            a_neg_total: self.a_neg_total * k,
            total_population: self.total_population * k,
        }
    }

    fn add(&mut self, other: &Self) {
        self.n_pp += other.n_pp;
        self.n_pm += other.n_pm;
        self.n_mp += other.n_mp;
        self.n_mm += other.n_mm;
        self.a_pos_total += other.a_pos_total;
        self.a_neg_total += other.a_neg_total;
        self.total_population += other.total_population;
    }

    fn count(&mut self, a: DiseaseStatus, b: DiseaseStatus) {
        use DiseaseStatus::{Negative, Positive};
        self.total_population += 1;
        match a {
            Positive => self.a_pos_total += 1,
            Negative => self.a_neg_total += 1,
            _ => return,
        }
        match (a, b) {
            (Positive, Positive) => self.n_pp += 1,
            (Positive, Negative) => self.n_pm += 1,
            (Negative, Positive) => self.n_mp += 1,
            (Negative, Negative) => self.n_mm += 1,
            _ => {}
        }
    }

    /// Sign of the log odds ratio from exact cross-products:
    /// +1 positive association, −1 negative, 0 when a four-cell margin is
    /// zero or the cross-products tie.
    pub fn association_sign(&self) -> i8 {
        let rows = [self.n_pp + self.n_pm, self.n_mp + self.n_mm];
        let cols = [self.n_pp + self.n_mp, self.n_pm + self.n_mm];
        if rows.contains(&0) || cols.contains(&0) {
            return 0;
        }
        let diag = u128::from(self.n_pp) * u128::from(self.n_mm);
        let off = u128::from(self.n_pm) * u128::from(self.n_mp);
        match diag.cmp(&off) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
        }
    }
}

/// `P(B*|A*)` over the exposure totals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalProbabilities {
    pub b_pos_given_a_pos: f64,
    pub b_pos_given_a_neg: f64,
    pub b_neg_given_a_pos: f64,
    pub b_neg_given_a_neg: f64,
    /// Fraction of the population that lands in the four cells.
    pub observed_fraction: f64,
}

pub fn conditional_probability(t: &ContingencyTable) -> Result<ConditionalProbabilities, ConfoundError> {
    if t.a_pos_total == 0 || t.a_neg_total == 0 {
        return Err(ConfoundError::UndefinedConditional);
    }
    let pos = t.a_pos_total as f64;
    let neg = t.a_neg_total as f64;
    Ok(ConditionalProbabilities {
        b_pos_given_a_pos: t.n_pp as f64 / pos,
        b_pos_given_a_neg: t.n_mp as f64 / neg,
        b_neg_given_a_pos: t.n_pm as f64 / pos,
        b_neg_given_a_neg: t.n_mm as f64 / neg,
        observed_fraction: t.observed() as f64 / t.total_population as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationStats {
    /// P(B+|A+) within the four cells; `None` when the A+ row is empty.
    pub p_b_given_a_pos: Option<f64>,
    /// P(B+|A−) within the four cells; `None` when the A− row is empty.
    pub p_b_given_a_neg: Option<f64>,
    /// Odds ratio, with +0.5 added to every cell when any cell is zero.
    pub odds_ratio: f64,
    pub corrected: bool,
    /// P(A+ ∧ B+) − P(A+)·P(B+) over the four cells.
    pub independence_gap: f64,
}

pub fn association_stats(t: &ContingencyTable) -> Result<AssociationStats, ConfoundError> {
    let n = t.observed();
    if n == 0 {
        return Err(ConfoundError::EmptyTable);
    }
    let [pp, pm, mp, mm] = t.cells();
    let corrected = t.cells().contains(&0);
    let c = if corrected { 0.5 } else { 0.0 };
    let odds_ratio =
        ((pp as f64 + c) * (mm as f64 + c)) / ((pm as f64 + c) * (mp as f64 + c));
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    let nf = n as f64;
    let independence_gap = pp as f64 / nf - ((pp + pm) as f64 / nf) * ((pp + mp) as f64 / nf);
    Ok(AssociationStats {
        p_b_given_a_pos: ratio(pp, pp + pm),
        p_b_given_a_neg: ratio(mp, mp + mm),
        odds_ratio,
        corrected,
        independence_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stratifier {
    None,
    /// Strata are the four statuses of a third disease.
    Disease(usize),
    Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratifiedTables {
    pub strata: Vec<(String, ContingencyTable)>,
    pub aggregate: ContingencyTable,
}

impl StratifiedTables {
    /// Builds the aggregate as the cell-wise sum of the strata.
    pub fn from_strata(strata: Vec<(String, ContingencyTable)>) -> Self {
        let mut aggregate = ContingencyTable::default();
        for (_, t) in &strata {
            aggregate.add(t);
        }
        Self { strata, aggregate }
    }
}

pub fn build_contingency(
    corpus: &Corpus,
    a: usize,
    b: usize,
    stratify_by: Stratifier,
) -> Result<StratifiedTables, ConfoundError> {
    let labels: Vec<_> = corpus
        .records
        .iter()
        .map(|r| r.labels.as_ref().ok_or_else(|| ConfoundError::MissingLabels(r.id.clone())))
        .collect::<Result<_, _>>()?;
    let mut strata: Vec<(String, ContingencyTable)> = match stratify_by {
        Stratifier::None => vec![("all".to_string(), ContingencyTable::default())],
        Stratifier::Disease(c) => DiseaseStatus::ALL
            .iter()
            .map(|s| (format!("{}={}", corpus.schema.name(c), s), ContingencyTable::default()))
            .collect(),
        Stratifier::Provenance => [Provenance::Original, Provenance::Counterfactual]
            .iter()
            .map(|p| (p.as_str().to_string(), ContingencyTable::default()))
            .collect(),
    };
    for (record, l) in corpus.records.iter().zip(labels) {
        let slot = match stratify_by {
            Stratifier::None => 0,
            Stratifier::Disease(c) => {
                DiseaseStatus::ALL.iter().position(|&s| s == l.get(c)).expect("status listed")
            }
            Stratifier::Provenance => match record.provenance {
                Provenance::Original => 0,
                Provenance::Counterfactual => 1,
            },
        };
        strata[slot].1.count(l.get(a), l.get(b));
    }
    Ok(StratifiedTables::from_strata(strata))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpsonReport {
    pub aggregate_direction: i8,
    pub strata_directions: Vec<i8>,
    pub reversal: bool,
}

/// Reversal: the aggregate association has a direction, at least one
/// stratum has a direction, and every stratum with a direction opposes the
/// aggregate. Strata with a zero margin have no direction.
pub fn detect_simpson_reversal(st: &StratifiedTables) -> Result<SimpsonReport, ConfoundError> {
    if st.strata.len() < 2 {
        return Err(ConfoundError::InsufficientStrata(st.strata.len()));
    }
    let aggregate_direction = st.aggregate.association_sign();
    let strata_directions: Vec<i8> = st.strata.iter().map(|(_, t)| t.association_sign()).collect();
    let nonzero: Vec<i8> = strata_directions.iter().copied().filter(|&s| s != 0).collect();
    let reversal = aggregate_direction != 0
        && !nonzero.is_empty()
        && nonzero.iter().all(|&s| s == -aggregate_direction);
    Ok(SimpsonReport { aggregate_direction, strata_directions, reversal })
}

/// `P(a and b mentioned) / (P(a mentioned) · P(b mentioned))`, where
/// "mentioned" is any status other than Unmentioned.
pub fn co_mention_lift(corpus: &Corpus, a: usize, b: usize) -> Result<f64, ConfoundError> {
    let (mut na, mut nb, mut nab) = (0u64, 0u64, 0u64);
    for r in &corpus.records {
        let l = r.labels.as_ref().ok_or_else(|| ConfoundError::MissingLabels(r.id.clone()))?;
        let (ma, mb) = (l.get(a).is_mentioned(), l.get(b).is_mentioned());
        na += u64::from(ma);
        nb += u64::from(mb);
        nab += u64::from(ma && mb);
    }
    if na == 0 || nb == 0 {
        return Err(ConfoundError::UndefinedLift);
    }
    let n = corpus.len() as f64;
    Ok(nab as f64 * n / (na as f64 * nb as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderAsymmetry {
    pub pair: (usize, usize),
    pub a_first: u64,
    pub b_first: u64,
    pub co_occur_count: u64,
    /// `|a_first − b_first| / co_occur_count`.
    pub asym: f64,
}

/// Measures how consistently the first a-sentence precedes (or follows) the
/// first b-sentence, over reports mentioning both in distinct sentences.
pub fn order_asymmetry(
    corpus: &Corpus,
    matcher: &Matcher,
    a: usize,
    b: usize,
) -> Result<OrderAsymmetry, ConfoundError> {
    order_asymmetry_of(corpus.records.iter().map(|r| &r.report), matcher, a, b)
}

pub fn order_asymmetry_of<'a>(
    reports: impl Iterator<Item = &'a crate::corpus::Report>,
    matcher: &Matcher,
    a: usize,
    b: usize,
) -> Result<OrderAsymmetry, ConfoundError> {
    let reports: Vec<_> = reports.collect();
    let firsts = crate::parallel::map(&reports, |report| {
        let (mut fa, mut fb) = (None, None);
        for (i, s) in report.sentences.iter().enumerate() {
            let l = label_sentence(s, matcher);
            if fa.is_none() && l.get(a).is_some() {
                fa = Some(i);
            }
            if fb.is_none() && l.get(b).is_some() {
                fb = Some(i);
            }
            if fa.is_some() && fb.is_some() {
                break;
            }
        }
        (fa, fb)
    });
    tally_order((a, b), firsts)
}

fn tally_order(
    pair: (usize, usize),
    firsts: impl IntoIterator<Item = (Option<usize>, Option<usize>)>,
) -> Result<OrderAsymmetry, ConfoundError> {
    let (mut a_first, mut b_first) = (0u64, 0u64);
    for (fa, fb) in firsts {
        if let (Some(ia), Some(ib)) = (fa, fb) {
            if ia < ib {
                a_first += 1;
            } else if ib < ia {
                b_first += 1;
            }
        }
    }
    let co_occur_count = a_first + b_first;
    if co_occur_count == 0 {
        return Err(ConfoundError::NoCooccurrence);
    }
    Ok(OrderAsymmetry {
        pair,
        a_first,
        b_first,
        co_occur_count,
        asym: a_first.abs_diff(b_first) as f64 / co_occur_count as f64,
    })
}

/// Index of the first sentence mentioning each disease, per report.
fn first_mention_index(corpus: &Corpus, matcher: &Matcher) -> Vec<Vec<Option<usize>>> {
    crate::parallel::map(&corpus.records, |r| {
        let mut first = vec![None; matcher.n_diseases()];
        for (i, s) in r.report.sentences.iter().enumerate() {
            for d in label_sentence(s, matcher).diseases() {
                first[d].get_or_insert(i);
            }
        }
        first
    })
}

/// Everything `analyze` reports for one disease pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairAnalysis {
    pub a: usize,
    pub b: usize,
    pub tables: StratifiedTables,
    pub conditional: Option<ConditionalProbabilities>,
    pub stats: Option<AssociationStats>,
    pub simpson: Option<SimpsonReport>,
    pub lift: Option<f64>,
    pub order: Option<OrderAsymmetry>,
}

/// Analyses each pair (in parallel) and returns results ordered by
/// `(a, b)` index.
pub fn analyze_pairs(
    corpus: &Corpus,
    matcher: &Matcher,
    pairs: &[(usize, usize)],
    stratify_by: Stratifier,
) -> Result<Vec<PairAnalysis>, ConfoundError> {
    let mut pairs = pairs.to_vec();
    pairs.sort_unstable();
    pairs.dedup();
    let firsts = first_mention_index(corpus, matcher);
    let results = crate::parallel::map(&pairs, |&(a, b)| {
        let tables = build_contingency(corpus, a, b, stratify_by)?;
        let simpson = if tables.strata.len() >= 2 { detect_simpson_reversal(&tables).ok() } else { None };
        Ok(PairAnalysis {
            a,
            b,
            conditional: conditional_probability(&tables.aggregate).ok(),
            stats: association_stats(&tables.aggregate).ok(),
            simpson,
            lift: co_mention_lift(corpus, a, b).ok(),
            order: tally_order((a, b), firsts.iter().map(|f| (f[a], f[b]))).ok(),
            tables,
        })
    });
    results.into_iter().collect()
}

/// All unordered pairs `(a, b)` with `a < b`.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Record, Report};
    use crate::labeler::ReportLabelVector;
    use crate::schema::LabelSchema;
    use DiseaseStatus::*;

    fn effusion_counts() -> ContingencyTable {
        ContingencyTable::with_totals([3552, 1345, 30988, 153822], 7667, 195425, 203092).unwrap()
    }

    fn round3(x: f64) -> f64 {
        (x * 1000.0).round() / 1000.0
    }

    #[test]
    fn effusion_conditionals() {
        let p = conditional_probability(&effusion_counts()).unwrap();
        assert_eq!(round3(p.b_pos_given_a_pos), 0.463);
        assert_eq!(round3(p.b_pos_given_a_neg), 0.159);
        assert_eq!(round3(p.b_neg_given_a_pos), 0.175);
        assert_eq!(round3(p.b_neg_given_a_neg), 0.787);
        assert_eq!(round3(p.observed_fraction), 0.934);
    }

    #[test]
    fn uniform_and_degenerate_conditionals() {
        let p = conditional_probability(&ContingencyTable::from_cells(10, 10, 10, 10)).unwrap();
        for x in [p.b_pos_given_a_pos, p.b_pos_given_a_neg, p.b_neg_given_a_pos, p.b_neg_given_a_neg] {
            assert_eq!(x, 0.5);
        }
        assert_eq!(
            conditional_probability(&ContingencyTable::from_cells(0, 0, 3, 4)),
            Err(ConfoundError::UndefinedConditional)
        );
    }

    #[test]
    fn effusion_independence_gap() {
        let s = association_stats(&effusion_counts()).unwrap();
        // Independent hand arithmetic on the 189707-row subtotal.
        let n = 189_707.0;
        let expected = 3552.0 / n - (4897.0 / n) * (34540.0 / n);
        assert!((s.independence_gap - expected).abs() < 1e-12);
        assert!((s.independence_gap - 0.01402).abs() < 1e-5);
        assert!(!s.corrected);
        assert!(s.odds_ratio > 1.0);
    }

    #[test]
    fn independent_table_stats() {
        let s = association_stats(&ContingencyTable::from_cells(25, 25, 25, 25)).unwrap();
        assert_eq!(s.independence_gap, 0.0);
        assert_eq!(s.odds_ratio, 1.0);
    }

    #[test]
    fn haldane_correction() {
        let s = association_stats(&ContingencyTable::from_cells(1, 0, 0, 1)).unwrap();
        assert!(s.corrected);
        assert!((s.odds_ratio - 9.0).abs() < 1e-12);
        assert_eq!(association_stats(&ContingencyTable::default()), Err(ConfoundError::EmptyTable));
    }

    fn classic_reversal() -> StratifiedTables {
        StratifiedTables::from_strata(vec![
            ("s1".into(), ContingencyTable::from_cells(90, 10, 800, 200)),
            ("s2".into(), ContingencyTable::from_cells(200, 800, 10, 90)),
        ])
    }

    #[test]
    fn classic_reversal_odds_ratios() {
        let st = classic_reversal();
        for (_, t) in &st.strata {
            assert!((association_stats(t).unwrap().odds_ratio - 2.25).abs() < 1e-12);
        }
        let agg = association_stats(&st.aggregate).unwrap().odds_ratio;
        assert!((agg - 84100.0 / 656100.0).abs() < 1e-12);
        assert_eq!(format!("{agg:.3}"), "0.128");
        let r = detect_simpson_reversal(&st).unwrap();
        assert_eq!(r.aggregate_direction, -1);
        assert_eq!(r.strata_directions, vec![1, 1]);
        assert!(r.reversal);
    }

    #[test]
    fn identical_independent_strata_do_not_reverse() {
        let t = ContingencyTable::from_cells(5, 5, 5, 5);
        let st = StratifiedTables::from_strata(vec![("x".into(), t), ("y".into(), t)]);
        assert!(!detect_simpson_reversal(&st).unwrap().reversal);
    }

    #[test]
    fn zero_margin_stratum_is_ignored() {
        // Stratum 1 has an empty A+ row, so no direction. Aggregate
        // (10,5,7,42): 420 > 35, positive. Stratum 2: 20 < 25, negative.
        let st = StratifiedTables::from_strata(vec![
            ("empty-row".into(), ContingencyTable::from_cells(0, 0, 2, 40)),
            ("opposing".into(), ContingencyTable::from_cells(10, 5, 5, 2)),
        ]);
        let r = detect_simpson_reversal(&st).unwrap();
        assert_eq!(r.strata_directions, vec![0, -1]);
        assert_eq!(r.aggregate_direction, 1);
        assert!(r.reversal);
    }

    #[test]
    fn single_stratum_is_insufficient() {
        let st = StratifiedTables::from_strata(vec![("all".into(), ContingencyTable::from_cells(1, 2, 3, 4))]);
        assert_eq!(detect_simpson_reversal(&st), Err(ConfoundError::InsufficientStrata(1)));
    }

    fn labeled(statuses: &[(usize, DiseaseStatus)], id: &str) -> Record {
        let mut l = ReportLabelVector::unmentioned(14);
        for &(d, s) in statuses {
            l.set(d, s);
        }
        Record::original(id, Report::from_texts(&["x."])).with_labels(l)
    }

    #[test]
    fn build_contingency_counts_cells_and_residuals() {
        let schema = LabelSchema::default();
        let records = vec![
            labeled(&[(8, Positive), (9, Positive)], "1"),
            labeled(&[(8, Positive), (9, Negative)], "2"),
            labeled(&[(8, Positive), (9, Uncertain)], "3"),
            labeled(&[(8, Negative), (9, Negative)], "4"),
            labeled(&[(8, Unmentioned), (9, Positive)], "5"),
        ];
        let c = Corpus::with_records(schema, records);
        let t = build_contingency(&c, 8, 9, Stratifier::None).unwrap().aggregate;
        assert_eq!(t.cells(), [1, 1, 0, 1]);
        assert_eq!((t.a_pos_total, t.a_neg_total, t.total_population), (3, 1, 5));
    }

    #[test]
    fn empty_corpus_gives_zero_table() {
        let c = Corpus::new(LabelSchema::default());
        let st = build_contingency(&c, 0, 1, Stratifier::None).unwrap();
        assert_eq!(st.aggregate, ContingencyTable::default());
    }

    #[test]
    fn missing_labels_error() {
        let c = Corpus::with_records(LabelSchema::default(), vec![Record::original("r", Report::from_texts(&["x."]))]);
        assert_eq!(
            build_contingency(&c, 0, 1, Stratifier::None),
            Err(ConfoundError::MissingLabels("r".into()))
        );
    }

    #[test]
    fn lift_extremes() {
        let schema = LabelSchema::default();
        let both = Corpus::with_records(
            schema.clone(),
            (0..10).map(|i| labeled(&[(0, Negative), (1, Positive)], &i.to_string())).collect(),
        );
        assert_eq!(co_mention_lift(&both, 0, 1).unwrap(), 1.0);
        let apart = Corpus::with_records(
            schema.clone(),
            (0..10)
                .map(|i| labeled(&[(if i % 2 == 0 { 0 } else { 1 }, Positive)], &i.to_string()))
                .collect(),
        );
        assert_eq!(co_mention_lift(&apart, 0, 1).unwrap(), 0.0);
        let none = Corpus::with_records(schema, vec![labeled(&[], "z")]);
        assert_eq!(co_mention_lift(&none, 0, 1), Err(ConfoundError::UndefinedLift));
    }

    #[test]
    fn order_asymmetry_cases() {
        let schema = LabelSchema::default();
        let m = Matcher::default_for(&schema).unwrap();
        let ordered = Corpus::with_records(
            schema.clone(),
            (0..20)
                .map(|i| {
                    Record::original(
                        i.to_string(),
                        Report::from_texts(&["No pneumothorax.", "Heart size is normal.", "Small pleural effusion."]),
                    )
                })
                .collect(),
        );
        let o = order_asymmetry(&ordered, &m, 8, 9).unwrap();
        assert_eq!((o.a_first, o.b_first, o.co_occur_count), (20, 0, 20));
        assert_eq!(o.asym, 1.0);

        let shared = Corpus::with_records(
            schema,
            vec![Record::original("s", Report::from_texts(&["No pneumothorax or pleural effusion."]))],
        );
        assert_eq!(order_asymmetry(&shared, &m, 8, 9), Err(ConfoundError::NoCooccurrence));
    }

    #[test]
    fn stratify_by_third_disease_is_additive() {
        let schema = LabelSchema::default();
        let records = vec![
            labeled(&[(8, Positive), (9, Positive), (0, Positive)], "1"),
            labeled(&[(8, Positive), (9, Negative), (0, Negative)], "2"),
            labeled(&[(8, Negative), (9, Negative)], "3"),
        ];
        let c = Corpus::with_records(schema, records);
        let st = build_contingency(&c, 8, 9, Stratifier::Disease(0)).unwrap();
        assert_eq!(st.strata.len(), 4);
        assert_eq!(st.strata[0].0, "Enlarged Cardiomediastinum=positive");
        let flat = build_contingency(&c, 8, 9, Stratifier::None).unwrap();
        assert_eq!(st.aggregate, flat.aggregate);
    }

    #[test]
    fn analyze_pairs_matches_single_pair_ops() {
        let schema = LabelSchema::default();
        let m = Matcher::default_for(&schema).unwrap();
        let texts: [&[&str]; 3] = [
            &["No pneumothorax.", "Small pleural effusion.", "Mild edema."],
            &["Mild edema.", "Possible pneumothorax."],
            &["Pleural effusion.", "No pneumothorax."],
        ];
        let mut c = Corpus::with_records(
            schema,
            texts.iter().enumerate().map(|(i, t)| Record::original(i.to_string(), Report::from_texts(t))).collect(),
        );
        crate::labeler::label_corpus(&mut c, &m);
        let pairs = all_pairs(14);
        let got = analyze_pairs(&c, &m, &pairs, Stratifier::None).unwrap();
        assert_eq!(got.len(), 91);
        for p in &got {
            assert_eq!(p.order, order_asymmetry(&c, &m, p.a, p.b).ok());
            assert_eq!(p.lift, co_mention_lift(&c, p.a, p.b).ok());
        }
        let ptx_eff = got.iter().find(|p| (p.a, p.b) == (8, 9)).unwrap();
        assert_eq!(ptx_eff.order.as_ref().unwrap().asym, 0.0);
    }

    #[test]
    fn all_pairs_count() {
        assert_eq!(all_pairs(14).len(), 91);
        assert_eq!(all_pairs(3), vec![(0, 1), (0, 2), (1, 2)]);
    }
}
