// Lexicon and cue-list parsing, and the compiled matcher.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use super::{LabelerError, SentenceLabelSet};
use crate::schema::{DiseaseStatus, LabelSchema};

pub const DEFAULT_LEXICON: &str = include_str!("../../data/default_lexicon.tsv");
pub const DEFAULT_CUES: &str = include_str!("../../data/default_cues.tsv");

pub const MAX_PATTERN_TOKENS: usize = 5;

/// Lowercased alphanumeric word tokens. Punctuation separates tokens and is
/// dropped, so "effusion," and "effusion" match alike.
pub fn match_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconRule {
    pub disease: usize,
    pub pattern: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CueList {
    pub negation: Vec<Vec<String>>,
    pub uncertainty: Vec<Vec<String>>,
    pub window: usize,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

pub fn parse_lexicon(text: &str, schema: &LabelSchema) -> Result<Vec<LexiconRule>, LabelerError> {
    let mut rules = Vec::new();
    let mut seen = HashSet::new();
    for (line, raw) in content_lines(text) {
        let (name, pattern) = raw.split_once('\t').ok_or_else(|| LabelerError::Malformed {
            file: "lexicon",
            line,
            reason: "expected disease<TAB>pattern".into(),
        })?;
        let disease = schema
            .resolve(name)
            .ok_or_else(|| LabelerError::UnknownDisease { line, name: name.trim().to_string() })?;
        let tokens = match_tokens(pattern);
        if tokens.is_empty() || tokens.len() > MAX_PATTERN_TOKENS {
            return Err(LabelerError::Malformed {
                file: "lexicon",
                line,
                reason: format!("pattern must have 1-{MAX_PATTERN_TOKENS} tokens"),
            });
        }
        if !seen.insert((disease, tokens.clone())) {
            return Err(LabelerError::DuplicateRule {
                line,
                disease: schema.name(disease).to_string(),
                pattern: tokens.join(" "),
            });
        }
        rules.push(LexiconRule { disease, pattern: tokens });
    }
    Ok(rules)
}

pub fn parse_cues(text: &str) -> Result<CueList, LabelerError> {
    let mut window = None;
    let mut negation = Vec::new();
    let mut uncertainty = Vec::new();
    for (line, raw) in content_lines(text) {
        let trimmed = raw.trim();
        if let Some(v) = trimmed.strip_prefix("window=") {
            let w: usize = v.trim().parse().map_err(|_| LabelerError::Malformed {
                file: "cues",
                line,
                reason: format!("bad window {v:?}"),
            })?;
            if w == 0 {
                return Err(LabelerError::InvalidWindow);
            }
            window = Some(w);
            continue;
        }
        let (kind, phrase) = raw.split_once('\t').ok_or_else(|| LabelerError::Malformed {
            file: "cues",
            line,
            reason: "expected neg|unc<TAB>phrase".into(),
        })?;
        let tokens = match_tokens(phrase);
        if tokens.is_empty() {
            return Err(LabelerError::Malformed { file: "cues", line, reason: "empty cue".into() });
        }
        let list = match kind.trim() {
            "neg" => &mut negation,
            "unc" => &mut uncertainty,
            other => {
                return Err(LabelerError::Malformed {
                    file: "cues",
                    line,
                    reason: format!("unknown cue kind {other:?}"),
                })
            }
        };
        if !list.contains(&tokens) {
            list.push(tokens);
        }
    }
    let window = window.ok_or(LabelerError::MissingWindow)?;
    if let Some(shared) = negation.iter().find(|c| uncertainty.contains(c)) {
        return Err(LabelerError::CueOverlap(shared.join(" ")));
    }
    negation.sort();
    uncertainty.sort();
    Ok(CueList { negation, uncertainty, window })
}

/// Compiled lexicon + cues.
///
/// Rules are kept sorted by (pattern length descending, pattern, disease), so
/// matching does not depend on the order of lines in the lexicon file.
#[derive(Debug, Clone)]
pub struct Matcher {
    n_diseases: usize,
    rules: Vec<LexiconRule>,
    by_first_token: HashMap<String, Vec<usize>>,
    cues: CueList,
}

struct Candidate {
    len: usize,
    start: usize,
    disease: usize,
}

impl Matcher {
    pub fn new(mut rules: Vec<LexiconRule>, cues: CueList, schema: &LabelSchema) -> Self {
        rules.sort_by(|a, b| {
            b.pattern.len().cmp(&a.pattern.len()).then_with(|| a.pattern.cmp(&b.pattern)).then(a.disease.cmp(&b.disease))
        });
        let mut by_first_token: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            by_first_token.entry(r.pattern[0].clone()).or_default().push(i);
        }
        Self { n_diseases: schema.len(), rules, by_first_token, cues }
    }

    /// Default lexicon and cues shipped with the crate.
    pub fn default_for(schema: &LabelSchema) -> Result<Self, LabelerError> {
        super::compile_lexicon(DEFAULT_LEXICON, DEFAULT_CUES, schema)
    }

    pub fn from_files(rules: &Path, cues: &Path, schema: &LabelSchema) -> Result<Self, LabelerError> {
        let read = |p: &Path| {
            std::fs::read_to_string(p)
                .map_err(|e| LabelerError::Io { path: p.display().to_string(), source: e })
        };
        super::compile_lexicon(&read(rules)?, &read(cues)?, schema)
    }

    pub fn n_diseases(&self) -> usize {
        self.n_diseases
    }

    pub fn rules(&self) -> &[LexiconRule] {
        &self.rules
    }

    pub fn cues(&self) -> &CueList {
        &self.cues
    }

    pub fn window(&self) -> usize {
        self.cues.window
    }

    fn cue_in_window(&self, tokens: &[String], start: usize, cues: &[Vec<String>]) -> bool {
        let lo = start.saturating_sub(self.cues.window);
        cues.iter().any(|cue| {
            (lo..start).any(|q| q + cue.len() <= start && tokens[q..q + cue.len()] == cue[..])
        })
    }

    /// Labels a pre-tokenised sentence.
    pub fn label_tokens(&self, tokens: &[String]) -> SentenceLabelSet {
        let mut candidates = Vec::new();
        for start in 0..tokens.len() {
            let Some(rule_ids) = self.by_first_token.get(&tokens[start]) else { continue };
            for &ri in rule_ids {
                let p = &self.rules[ri].pattern;
                if tokens.len() - start >= p.len() && tokens[start..start + p.len()] == p[..] {
                    candidates.push(Candidate { len: p.len(), start, disease: self.rules[ri].disease });
                }
            }
        }
        candidates.sort_by(|a, b| {
            b.len.cmp(&a.len).then(a.start.cmp(&b.start)).then(a.disease.cmp(&b.disease))
        });
        let mut claimed = vec![false; tokens.len()];
        let mut entries = BTreeMap::new();
        for c in candidates {
            let span = c.start..c.start + c.len;
            if claimed[span.clone()].iter().any(|&x| x) {
                continue;
            }
            claimed[span].iter_mut().for_each(|x| *x = true);
            entries.entry(c.disease).or_insert_with(|| {
                if self.cue_in_window(tokens, c.start, &self.cues.negation) {
                    DiseaseStatus::Negative
                } else if self.cue_in_window(tokens, c.start, &self.cues.uncertainty) {
                    DiseaseStatus::Uncertain
                } else {
                    DiseaseStatus::Positive
                }
            });
        }
        SentenceLabelSet { entries }
    }
}
