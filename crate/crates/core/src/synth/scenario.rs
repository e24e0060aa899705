// Scenario file parser.
//
// Line-based `key = value` pairs grouped under `[general]`, `[marginals]`,
// `[planted]`, `[templates]` and `[prototypes]`. Planted pairs are written
// `A -> B = p_given_a_pos, p_given_a_neg`; template and prototype keys are
// `Disease.positive` / `Disease.negative`.

use super::{OrderPolicy, PlantedPair, SynthConfig, SynthError, Templates};
use crate::schema::LabelSchema;

pub const DEFAULT_SCENARIO: &str = include_str!("../../data/default_scenario.txt");

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    General,
    Marginals,
    Planted,
    Templates,
    Prototypes,
}

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> SynthError {
    SynthError::ConfigInvalid { path: path.into(), reason: reason.into() }
}

fn parse_f64(path: &str, v: &str) -> Result<f64, SynthError> {
    v.trim().parse::<f64>().map_err(|_| invalid(path, format!("not a number: {v:?}")))
}

fn status_key(path: &str, key: &str) -> Result<(String, bool), SynthError> {
    let (name, status) = key.rsplit_once('.').ok_or_else(|| invalid(path, "expected Disease.positive or Disease.negative"))?;
    match status.trim() {
        "positive" => Ok((name.trim().to_string(), true)),
        "negative" => Ok((name.trim().to_string(), false)),
        other => Err(invalid(path, format!("unknown status {other:?}"))),
    }
}

/// Parses a scenario against a schema. Diseases absent from `[marginals]`
/// get marginal 0; diseases absent from `[prototypes]` get the auto
/// pattern.
pub fn parse_scenario(text: &str, schema: &LabelSchema) -> Result<SynthConfig, SynthError> {
    let mut cfg = SynthConfig::empty(schema.clone());
    let mut section = None;
    let mut explicit: Vec<(usize, bool, Vec<f64>)> = Vec::new();
    let resolve = |path: &str, name: &str| {
        schema.resolve(name).ok_or_else(|| invalid(path, format!("unknown disease {:?}", name.trim())))
    };

    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = Some(match name.trim() {
                "general" => Section::General,
                "marginals" => Section::Marginals,
                "planted" => Section::Planted,
                "templates" => Section::Templates,
                "prototypes" => Section::Prototypes,
                other => return Err(SynthError::Parse { line: i + 1, reason: format!("unknown section [{other}]") }),
            });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| SynthError::Parse { line: i + 1, reason: "expected key = value".into() })?;
        let Some(sec) = section else {
            return Err(SynthError::Parse { line: i + 1, reason: "entry before any section".into() });
        };
        match sec {
            Section::General => {
                let path = format!("general.{key}");
                match key {
                    "n_records" => {
                        cfg.n_records = value.parse().map_err(|_| invalid(&path, "expected a non-negative integer"))?
                    }
                    "seed" => cfg.seed = value.parse().map_err(|_| invalid(&path, "expected a 64-bit integer"))?,
                    "order_policy" => {
                        cfg.order_policy = match value {
                            "schema" => OrderPolicy::SchemaOrder,
                            "random" => OrderPolicy::RandomOrder,
                            _ => return Err(invalid(path, "expected schema or random")),
                        }
                    }
                    "mention_positive" => cfg.mention_positive = parse_f64(&path, value)?,
                    "mention_negative" => cfg.mention_negative = parse_f64(&path, value)?,
                    "noise_sigma" => cfg.noise_sigma = parse_f64(&path, value)?,
                    // Explicit `[prototypes]` entries override the auto pattern
                    // disease by disease.
                    "prototypes" if value == "auto" => {}
                    "prototypes" => return Err(invalid(path, "only auto is supported here")),
                    _ => return Err(invalid(path, "unknown key")),
                }
            }
            Section::Marginals => {
                let path = format!("marginals.{key}");
                let d = resolve(&path, key)?;
                cfg.marginals[d] = parse_f64(&path, value)?;
            }
            Section::Planted => {
                let path = format!("planted.{key}");
                let (a, b) = key.split_once("->").ok_or_else(|| invalid(&path, "expected A -> B"))?;
                let (p1, p0) = value.split_once(',').ok_or_else(|| invalid(&path, "expected p_pos, p_neg"))?;
                cfg.planted.push(PlantedPair {
                    a: resolve(&path, a)?,
                    b: resolve(&path, b)?,
                    p_b_given_a_pos: parse_f64(&path, p1)?,
                    p_b_given_a_neg: parse_f64(&path, p0)?,
                });
            }
            Section::Templates => {
                let path = format!("templates.{key}");
                let (name, positive) = status_key(&path, key)?;
                let d = resolve(&path, &name)?;
                let slot = &mut cfg.templates[d];
                let text = Some(value.to_string());
                if positive {
                    slot.positive = text;
                } else {
                    slot.negative = text;
                }
            }
            Section::Prototypes => {
                let path = format!("prototypes.{key}");
                let (name, positive) = status_key(&path, key)?;
                let d = resolve(&path, &name)?;
                let v = value.split(',').map(|x| parse_f64(&path, x)).collect::<Result<Vec<_>, _>>()?;
                explicit.push((d, positive, v));
            }
        }
    }

    for (d, positive, v) in explicit {
        let slot = &mut cfg.prototypes[d];
        if positive {
            slot.0 = v;
        } else {
            slot.1 = v;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Loads a scenario file; the name `default` selects the built-in scenario.
pub fn load_scenario(name_or_path: &str, schema: &LabelSchema) -> Result<SynthConfig, SynthError> {
    if name_or_path == "default" {
        return parse_scenario(DEFAULT_SCENARIO, schema);
    }
    let text = std::fs::read_to_string(name_or_path)
        .map_err(|e| SynthError::Io { path: name_or_path.to_string(), reason: e.to_string() })?;
    parse_scenario(&text, schema)
}

impl Templates {
    pub fn get(&self, positive: bool) -> Option<&str> {
        if positive {
            self.positive.as_deref()
        } else {
            self.negative.as_deref()
        }
    }
}
