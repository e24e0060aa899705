use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use coa_core::augment::{augment_dataset, AugmentError, AugmentationConfig};
use coa_core::confound::{all_pairs, analyze_pairs, PairAnalysis, Stratifier};
use coa_core::corpus::{encode_corpus, read_corpus, Corpus, Record};
use coa_core::fsio::write_atomic;
use coa_core::labeler::{compile_lexicon, label_corpus, label_report, label_text, Matcher, DEFAULT_CUES, DEFAULT_LEXICON};
use coa_core::metrics::{self, Binarize};
use coa_core::pipeline::{run_pipeline, PipelineError};
use coa_core::schema::LabelSchema;
use coa_core::synth::{load_scenario, synth_generate};

use crate::{Cli, Command, ExitStatus, LexiconArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Usage(_) => ExitStatus::Usage,
            CliError::Data(_) => ExitStatus::Data,
            CliError::Internal(_) => ExitStatus::Internal,
        }
    }
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn augment_error(e: AugmentError) -> CliError {
    match e {
        AugmentError::InvalidConfig(m) => CliError::Usage(m),
        other => data(other),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(path, bytes).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

#[derive(Serialize)]
struct RunSidecar<'a> {
    command: &'a str,
    inputs: BTreeMap<&'a str, String>,
    seed: Option<u64>,
    threads: Option<u64>,
    parallel: bool,
    counts: Value,
    wall_time_ms: f64,
}

struct Ctx<'a> {
    cli: &'a Cli,
    started: Instant,
}

impl Ctx<'_> {
    fn schema(&self) -> Result<LabelSchema, CliError> {
        match &self.cli.global.schema {
            Some(p) => LabelSchema::load(p).map_err(data),
            None => Ok(LabelSchema::default()),
        }
    }

    fn matcher(&self, args: &LexiconArgs, schema: &LabelSchema) -> Result<Matcher, CliError> {
        let read = |name: &str, builtin: &'static str| -> Result<String, CliError> {
            if name == "default" {
                Ok(builtin.to_string())
            } else {
                std::fs::read_to_string(name).map_err(|e| CliError::Data(format!("cannot read {name}: {e}")))
            }
        };
        compile_lexicon(&read(&args.lexicon, DEFAULT_LEXICON)?, &read(&args.cues, DEFAULT_CUES)?, schema).map_err(data)
    }

    fn read(&self, path: &Path, schema: &LabelSchema) -> Result<Corpus, CliError> {
        read_corpus(path, schema).map_err(data)
    }

    fn info(&self, msg: impl AsRef<str>) {
        if !self.cli.global.quiet {
            println!("{}", msg.as_ref());
        }
    }

    fn sidecar(&self, out: &Path, command: &str, inputs: BTreeMap<&str, String>, counts: Value) -> Result<(), CliError> {
        let mut path = out.as_os_str().to_owned();
        path.push(".run.json");
        let s = RunSidecar {
            command,
            inputs,
            seed: self.cli.global.seed,
            threads: self.cli.global.threads,
            parallel: coa_core::is_parallel(),
            counts,
            wall_time_ms: (self.started.elapsed().as_secs_f64() * 1e6).round() / 1e3,
        };
        write_file(&PathBuf::from(path), &to_json(&s))
    }
}

fn lexicon_inputs(l: &LexiconArgs) -> [(&'static str, String); 2] {
    [("lexicon", l.lexicon.clone()), ("cues", l.cues.clone())]
}

pub(crate) fn dispatch(cli: &Cli, started: Instant) -> Result<(), CliError> {
    let ctx = Ctx { cli, started };
    match &cli.command {
        Command::Label { corpus, text, lexicon, out } => label(&ctx, corpus.as_deref(), text.as_deref(), lexicon, out),
        Command::Analyze { corpus, lexicon, pairs, stratify, relabel, out } => {
            analyze(&ctx, corpus, lexicon, pairs, stratify, *relabel, out)
        }
        Command::Augment { corpus, lexicon, rate, no_css, no_crr, max_resample, min_sentences, out, summary } => {
            let cfg = AugmentationConfig {
                rate: *rate,
                seed: cli.global.seed.unwrap_or(0),
                enable_css: !no_css,
                enable_crr: !no_crr,
                max_resample: *max_resample,
                min_sentences: *min_sentences,
            };
            augment(&ctx, corpus, lexicon, &cfg, out, summary.as_deref())
        }
        Command::Synth { scenario, n, out } => synth(&ctx, scenario, *n, out),
        Command::Evaluate { gold, generated, lexicon, metrics, macro_ce, uncertain_positive, out } => {
            evaluate(&ctx, gold, generated, lexicon, metrics, *macro_ce, *uncertain_positive, out)
        }
        Command::Pipeline { scenario, n, lexicon, out_dir } => pipeline(&ctx, scenario, *n, lexicon, out_dir),
    }
}

fn label(ctx: &Ctx, corpus: Option<&Path>, text: Option<&Path>, lex: &LexiconArgs, out: &Path) -> Result<(), CliError> {
    let schema = ctx.schema()?;
    let matcher = ctx.matcher(lex, &schema)?;
    let mut inputs = BTreeMap::from(lexicon_inputs(lex));
    let corpus = match (corpus, text) {
        (Some(p), _) => {
            inputs.insert("corpus", p.display().to_string());
            let mut c = ctx.read(p, &schema)?;
            label_corpus(&mut c, &matcher);
            c
        }
        (None, Some(p)) => {
            inputs.insert("text", p.display().to_string());
            let raw = std::fs::read_to_string(p).map_err(|e| CliError::Data(format!("cannot read {}: {e}", p.display())))?;
            let records = raw
                .lines()
                .filter(|l| !l.trim().is_empty())
                .enumerate()
                .map(|(i, line)| {
                    let (report, labels) = label_text(line, &matcher);
                    Record::original(format!("r{i:07}"), report).with_labels(labels)
                })
                .collect();
            Corpus::with_records(schema, records)
        }
        (None, None) => return Err(CliError::Usage("one of --corpus or --text is required".into())),
    };
    write_file(out, encode_corpus(&corpus).as_bytes())?;
    ctx.info(format!("labeled {} records -> {}", corpus.len(), out.display()));
    ctx.sidecar(out, "label", inputs, json!({ "records": corpus.len() }))
}

fn parse_stratifier(s: &str, schema: &LabelSchema) -> Result<Stratifier, CliError> {
    match s {
        "none" => Ok(Stratifier::None),
        "provenance" => Ok(Stratifier::Provenance),
        _ => {
            let name = s
                .strip_prefix("disease:")
                .ok_or_else(|| CliError::Usage(format!("bad --stratify {s:?}: expected none, provenance or disease:<name>")))?;
            schema
                .resolve(name)
                .map(Stratifier::Disease)
                .ok_or_else(|| CliError::Usage(format!("unknown disease {name:?}")))
        }
    }
}

fn parse_pair(s: &str, schema: &LabelSchema) -> Result<(usize, usize), CliError> {
    let (a, b) = s.split_once(',').ok_or_else(|| CliError::Usage(format!("bad --pair {s:?}: expected A,B")))?;
    let r = |n: &str| schema.resolve(n).ok_or_else(|| CliError::Usage(format!("unknown disease {:?}", n.trim())));
    let (a, b) = (r(a)?, r(b)?);
    if a == b {
        return Err(CliError::Usage(format!("--pair {s:?} names the same disease twice")));
    }
    Ok((a, b))
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn table_json(t: &coa_core::ContingencyTable) -> Value {
    json!({
        "n_pp": t.n_pp, "n_pm": t.n_pm, "n_mp": t.n_mp, "n_mm": t.n_mm,
        "a_pos_total": t.a_pos_total, "a_neg_total": t.a_neg_total,
        "total_population": t.total_population,
    })
}

fn pair_json(p: &PairAnalysis, schema: &LabelSchema) -> Value {
    json!({
        "a": { "index": p.a, "name": schema.name(p.a) },
        "b": { "index": p.b, "name": schema.name(p.b) },
        "counts": table_json(&p.tables.aggregate),
        "conditional": p.conditional.map(|c| json!({
            "b_pos_given_a_pos": round3(c.b_pos_given_a_pos),
            "b_pos_given_a_neg": round3(c.b_pos_given_a_neg),
            "b_neg_given_a_pos": round3(c.b_neg_given_a_pos),
            "b_neg_given_a_neg": round3(c.b_neg_given_a_neg),
            "observed_fraction": round3(c.observed_fraction),
        })),
        "odds_ratio": p.stats.map(|s| s.odds_ratio),
        "odds_ratio_corrected": p.stats.map(|s| s.corrected),
        "independence_gap": p.stats.map(|s| s.independence_gap),
        "strata": p.tables.strata.iter().map(|(k, t)| json!({ "label": k, "counts": table_json(t) })).collect::<Vec<_>>(),
        "simpson": p.simpson.as_ref().map(|s| json!({
            "aggregate_direction": s.aggregate_direction,
            "strata_directions": s.strata_directions,
            "reversal": s.reversal,
        })),
        "co_mention_lift": p.lift,
        "order_asymmetry": p.order.as_ref().map(|o| json!({
            "a_first": o.a_first, "b_first": o.b_first,
            "co_occur_count": o.co_occur_count, "asym": o.asym,
        })),
    })
}

fn analyze(
    ctx: &Ctx,
    corpus_path: &Path,
    lex: &LexiconArgs,
    pairs: &[String],
    stratify: &str,
    relabel: bool,
    out: &Path,
) -> Result<(), CliError> {
    let schema = ctx.schema()?;
    let stratifier = parse_stratifier(stratify, &schema)?;
    let pairs = if pairs.is_empty() {
        all_pairs(schema.len())
    } else {
        pairs.iter().map(|p| parse_pair(p, &schema)).collect::<Result<_, _>>()?
    };
    let matcher = ctx.matcher(lex, &schema)?;
    let mut corpus = ctx.read(corpus_path, &schema)?;
    if relabel || corpus.records.iter().any(|r| r.labels.is_none()) {
        label_corpus(&mut corpus, &matcher);
    }
    let results = analyze_pairs(&corpus, &matcher, &pairs, stratifier).map_err(data)?;
    let reversals = results.iter().filter(|p| p.simpson.as_ref().is_some_and(|s| s.reversal)).count();
    let report = json!({
        "records": corpus.len(),
        "stratify": stratify,
        "pairs": results.iter().map(|p| pair_json(p, &schema)).collect::<Vec<_>>(),
    });
    write_file(out, &to_json(&report))?;
    ctx.info(format!("analyzed {} pairs over {} records -> {}", results.len(), corpus.len(), out.display()));
    let mut inputs = BTreeMap::from(lexicon_inputs(lex));
    inputs.insert("corpus", corpus_path.display().to_string());
    ctx.sidecar(out, "analyze", inputs, json!({ "records": corpus.len(), "pairs": results.len(), "reversals": reversals }))
}

fn augment(
    ctx: &Ctx,
    corpus_path: &Path,
    lex: &LexiconArgs,
    cfg: &AugmentationConfig,
    out: &Path,
    summary_path: Option<&Path>,
) -> Result<(), CliError> {
    cfg.validate().map_err(augment_error)?;
    let schema = ctx.schema()?;
    let matcher = ctx.matcher(lex, &schema)?;
    let corpus = ctx.read(corpus_path, &schema)?;
    let aug = augment_dataset(&corpus, &matcher, cfg).map_err(augment_error)?;
    write_file(out, encode_corpus(&aug.corpus).as_bytes())?;
    let summary = json!({ "config": cfg, "summary": aug.summary });
    if let Some(p) = summary_path {
        write_file(p, &to_json(&summary))?;
    }
    if aug.summary.shortfall > 0 {
        eprintln!(
            "coa: warning: only {} of {} requested counterfactuals could be built",
            aug.summary.augmented, aug.summary.target
        );
    }
    ctx.info(format!(
        "augmented {} records ({} skipped, {} orphan-flagged) -> {}",
        aug.summary.augmented,
        aug.summary.skipped,
        aug.summary.orphan_flagged,
        out.display()
    ));
    let mut inputs = BTreeMap::from(lexicon_inputs(lex));
    inputs.insert("corpus", corpus_path.display().to_string());
    ctx.sidecar(out, "augment", inputs, serde_json::to_value(&aug.summary).expect("serializable"))
}

fn synth(ctx: &Ctx, scenario: &str, n: Option<usize>, out: &Path) -> Result<(), CliError> {
    let schema = ctx.schema()?;
    let mut cfg = load_scenario(scenario, &schema).map_err(data)?;
    if let Some(n) = n {
        cfg.n_records = n;
    }
    if let Some(s) = ctx.cli.global.seed {
        cfg.seed = s;
    }
    let corpus = synth_generate(&cfg).map_err(data)?;
    write_file(out, encode_corpus(&corpus).as_bytes())?;
    ctx.info(format!("generated {} records -> {}", corpus.len(), out.display()));
    ctx.sidecar(
        out,
        "synth",
        BTreeMap::from([("scenario", scenario.to_string())]),
        json!({ "records": corpus.len(), "seed": cfg.seed }),
    )
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    ctx: &Ctx,
    gold_path: &Path,
    gen_path: &Path,
    lex: &LexiconArgs,
    metric_list: &str,
    macro_ce: bool,
    uncertain_positive: bool,
    out: &Path,
) -> Result<(), CliError> {
    let wanted: Vec<&str> = metric_list.split(',').map(str::trim).filter(|m| !m.is_empty()).collect();
    if let Some(bad) = wanted.iter().find(|m| !matches!(**m, "ce" | "bleu4" | "rougel")) {
        return Err(CliError::Usage(format!("unknown metric {bad:?}; expected ce, bleu4 or rougel")));
    }
    let schema = ctx.schema()?;
    let matcher = ctx.matcher(lex, &schema)?;
    let gold = ctx.read(gold_path, &schema)?;
    let gen = ctx.read(gen_path, &schema)?;
    if gold.len() != gen.len() {
        return Err(data(metrics::MetricsError::LengthMismatch { gold: gold.len(), generated: gen.len() }));
    }
    let gold_reports: Vec<_> = gold.records.iter().map(|r| r.report.clone()).collect();
    let gen_reports: Vec<_> = gen.records.iter().map(|r| r.report.clone()).collect();
    let mut scores = serde_json::Map::new();
    scores.insert("records".into(), json!(gold.len()));
    if wanted.contains(&"ce") {
        let label = |rs: &[coa_core::Report]| rs.iter().map(|r| label_report(r, &matcher)).collect::<Vec<_>>();
        let (g, h) = (label(&gold_reports), label(&gen_reports));
        let policy = Binarize { uncertain_positive };
        let per = metrics::per_disease_confusion(&g, &h, policy).map_err(data)?;
        let counts = metrics::ce_confusion_with(&g, &h, policy).map_err(data)?;
        let micro = metrics::ce_scores(&counts).map_err(data)?;
        let mut ce = json!({ "binarize": policy, "confusion": counts, "micro": micro });
        if macro_ce {
            ce["macro"] = json!(metrics::ce_scores_macro(&per).map_err(data)?);
            ce["per_disease"] = per
                .iter()
                .enumerate()
                .map(|(d, c)| json!({ "disease": schema.name(d), "confusion": c }))
                .collect::<Vec<_>>()
                .into();
        }
        scores.insert("ce".into(), ce);
    }
    if wanted.contains(&"bleu4") {
        let s = metrics::bleu4_stats(&gold_reports, &gen_reports).map_err(data)?;
        scores.insert(
            "bleu4".into(),
            json!({
                "score": s.score(),
                "precisions": s.precisions(),
                "matches": s.matches,
                "totals": s.totals,
                "ref_len": s.ref_len,
                "cand_len": s.cand_len,
            }),
        );
    }
    if wanted.contains(&"rougel") {
        scores.insert("rougel".into(), json!(metrics::rouge_l(&gold_reports, &gen_reports).map_err(data)?));
    }
    write_file(out, &to_json(&Value::Object(scores)))?;
    ctx.info(format!("scored {} report pairs -> {}", gold.len(), out.display()));
    let mut inputs = BTreeMap::from(lexicon_inputs(lex));
    inputs.insert("gold", gold_path.display().to_string());
    inputs.insert("generated", gen_path.display().to_string());
    ctx.sidecar(out, "evaluate", inputs, json!({ "records": gold.len(), "metrics": wanted }))
}

fn pipeline(ctx: &Ctx, scenario: &str, n: Option<usize>, lex: &LexiconArgs, out_dir: &Path) -> Result<(), CliError> {
    let schema = ctx.schema()?;
    let matcher = ctx.matcher(lex, &schema)?;
    let mut cfg = load_scenario(scenario, &schema).map_err(data)?;
    if let Some(n) = n {
        cfg.n_records = n;
    }
    let seed = ctx.cli.global.seed.unwrap_or(cfg.seed);
    let out = run_pipeline(&cfg, seed, &matcher).map_err(|e| match e {
        PipelineError::Augment(a) => augment_error(a),
        other => data(other),
    })?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", out_dir.display())))?;
    write_file(&out_dir.join("original.jsonl"), encode_corpus(&out.original).as_bytes())?;
    write_file(&out_dir.join("augmented.jsonl"), encode_corpus(&out.augmented).as_bytes())?;
    write_file(&out_dir.join("summary.json"), out.summary.to_json().as_bytes())?;
    let table = out.summary.to_table();
    write_file(&out_dir.join("summary.txt"), table.as_bytes())?;
    ctx.info(table.trim_end());
    let mut inputs = BTreeMap::from(lexicon_inputs(lex));
    inputs.insert("scenario", scenario.to_string());
    ctx.sidecar(
        &out_dir.join("summary.json"),
        "pipeline",
        inputs,
        json!({
            "original": out.original.len(),
            "augmented": out.augmented.len(),
            "seed": seed,
        }),
    )
}
