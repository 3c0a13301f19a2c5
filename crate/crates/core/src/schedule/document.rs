//! Schedule files: one JSON document per file.
//!
//! ```json
//! { "k_rule": "paper", "role": "F" }
//! { "k_rule": ["10", "100", "10000"], "role": "G" }
//! { "k_rule": "paper", "role": "custom",
//!   "runs": [ { "from": "1", "to": "40", "generator": "G3" },
//!             { "from": "41", "to": null, "generator": "G5" } ] }
//! ```
//!
//! Run bounds are inclusive stage numbers written as canonical decimal
//! strings; `to: null` (or omitted, or `"inf"`) marks the unbounded final run.

use std::path::Path;

use rug::Integer;
use serde::{Deserialize, Serialize};

use super::{GeneratorKind, GeneratorSchedule, KRule, KSequence, Role, Run};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KRuleDoc {
    Named(String),
    Explicit(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunDoc {
    pub from: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<String>,
    pub generator: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDocument {
    pub k_rule: KRuleDoc,
    pub role: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<Vec<RunDoc>>,
}

/// Parses a non-negative decimal integer, rejecting anything that would not
/// print back identically.
pub(crate) fn parse_decimal(s: &str) -> Result<Integer> {
    let ok = !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && (s == "0" || !s.starts_with('0'));
    if !ok {
        return Err(Error::Parse(format!(
            "{s:?} is not a canonical non-negative decimal integer"
        )));
    }
    s.parse::<Integer>().map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

impl ScheduleDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_schedule(&self) -> Result<GeneratorSchedule> {
        let k = match &self.k_rule {
            KRuleDoc::Named(n) if n == "paper" => KSequence::paper(),
            KRuleDoc::Named(n) if n == "desk" => KSequence::desk(),
            KRuleDoc::Named(n) => return Err(Error::Parse(format!("unknown k_rule {n:?}"))),
            KRuleDoc::Explicit(values) => {
                KSequence::explicit(values.iter().map(|v| parse_decimal(v)).collect::<Result<_>>()?)
            }
        };
        let role = match (self.role.as_str(), &self.runs) {
            ("F", None) => Role::F,
            ("G", None) => Role::G,
            ("F" | "G", Some(_)) => {
                return Err(Error::Parse("runs are only allowed with role \"custom\"".into()));
            }
            ("custom", Some(runs)) => Role::Custom(runs.iter().map(run_from_doc).collect::<Result<_>>()?),
            ("custom", None) => return Err(Error::Parse("role \"custom\" needs a runs array".into())),
            (other, _) => return Err(Error::Parse(format!("unknown role {other:?}"))),
        };
        GeneratorSchedule::new(k, role)
    }

    pub fn from_schedule(s: &GeneratorSchedule) -> Self {
        let k_rule = match s.k().rule() {
            KRule::Paper => KRuleDoc::Named("paper".into()),
            KRule::Desk => KRuleDoc::Named("desk".into()),
            KRule::Explicit(v) => KRuleDoc::Explicit(v.iter().map(|k| k.to_string()).collect()),
        };
        let runs = match s.role() {
            Role::Custom(runs) => Some(
                runs.iter()
                    .map(|r| RunDoc {
                        from: Integer::from(&r.start + 1).to_string(),
                        to: r.end.as_ref().map(|e| e.to_string()),
                        generator: r.kind.label().to_string(),
                    })
                    .collect(),
            ),
            _ => None,
        };
        ScheduleDocument {
            k_rule,
            role: s.role().tag().to_string(),
            runs,
        }
    }
}

fn run_from_doc(doc: &RunDoc) -> Result<Run> {
    let from = parse_decimal(&doc.from)?;
    if from < 1 {
        return Err(Error::Parse("run bounds start at stage 1".into()));
    }
    let end = match doc.to.as_deref() {
        None | Some("inf") => None,
        Some(t) => Some(parse_decimal(t)?),
    };
    Ok(Run {
        start: from - 1u32,
        end,
        kind: doc.generator.parse::<GeneratorKind>()?,
    })
}
