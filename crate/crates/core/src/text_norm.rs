//! Canonical plain-text form for transcripts and hypotheses.
//!
//! A [`NormRuleSet`] is plain data (one JSON document per language). It is
//! compiled into a [`Normalizer`] that applies, in order:
//!
//! 1. Unicode canonical composition (NFC);
//! 2. the rule descriptors, in their serialized order;
//! 3. whitespace collapse (always on) and a final NFC pass.
//!
//! The pipeline is iterated to a fixed point, so `normalize` is idempotent.

use std::collections::BTreeSet;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

pub const RULES_FORMAT_VERSION: u32 = 1;

const MAX_PASSES: usize = 8;

#[derive(Debug, Error)]
pub enum NormError {
    #[error("malformed rule `{rule}`: {reason}")]
    MalformedRule { rule: String, reason: String },
    #[error("unsupported rule-set version {0} (expected {RULES_FORMAT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("rule set did not converge on input after {MAX_PASSES} passes")]
    NonConvergent,
    #[error("cannot read rule set {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse rule set: {0}")]
    Parse(#[from] serde_json::Error),
}

/// One normalization step as it appears in a rule-set file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RuleDescriptor {
    /// Remove every codepoint in the listed ranges (`"U+064B..U+065F"` or `"U+0670"`).
    RemoveClass { name: String, ranges: Vec<String> },
    /// Replace each `from` sequence with its `to` sequence, pairs applied in order.
    Map { name: String, pairs: Vec<(String, String)> },
    CaseFold { enabled: bool },
    StripPunctuation { enabled: bool },
}

impl RuleDescriptor {
    fn label(&self, index: usize) -> String {
        match self {
            RuleDescriptor::RemoveClass { name, .. } | RuleDescriptor::Map { name, .. } => {
                format!("#{index} {name}")
            }
            RuleDescriptor::CaseFold { .. } => format!("#{index} case_fold"),
            RuleDescriptor::StripPunctuation { .. } => format!("#{index} strip_punctuation"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormRuleSet {
    pub version: u32,
    pub language_code: String,
    pub rules: Vec<RuleDescriptor>,
}

impl NormRuleSet {
    /// Whitespace collapse and NFC only.
    pub fn empty(language_code: impl Into<String>) -> Self {
        Self { version: RULES_FORMAT_VERSION, language_code: language_code.into(), rules: Vec::new() }
    }

    /// Language-neutral defaults: punctuation stripped, case preserved.
    pub fn generic(language_code: impl Into<String>) -> Self {
        Self {
            version: RULES_FORMAT_VERSION,
            language_code: language_code.into(),
            rules: vec![
                RuleDescriptor::CaseFold { enabled: false },
                RuleDescriptor::StripPunctuation { enabled: true },
            ],
        }
    }

    pub fn from_json(s: &str) -> Result<Self, NormError> {
        let set: NormRuleSet = serde_json::from_str(s)?;
        set.compile()?;
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NormError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| NormError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule sets always serialize")
    }

    pub fn compile(&self) -> Result<Normalizer, NormError> {
        Normalizer::new(self)
    }
}

#[derive(Debug, Clone)]
enum Step {
    Remove(Vec<(u32, u32)>),
    Map(Vec<(String, String)>),
    CaseFold,
    StripPunctuation,
}

/// A validated, ready-to-apply rule set.
#[derive(Debug, Clone)]
pub struct Normalizer {
    steps: Vec<Step>,
    punctuation: Regex,
}

fn parse_codepoint(s: &str) -> Option<u32> {
    let hex = s.trim().strip_prefix("U+").or_else(|| s.trim().strip_prefix("u+"))?;
    let cp = u32::from_str_radix(hex, 16).ok()?;
    char::from_u32(cp).map(|_| cp)
}

fn parse_range(s: &str) -> Option<(u32, u32)> {
    match s.split_once("..") {
        Some((lo, hi)) => {
            let (lo, hi) = (parse_codepoint(lo)?, parse_codepoint(hi)?);
            (lo <= hi).then_some((lo, hi))
        }
        None => parse_codepoint(s).map(|cp| (cp, cp)),
    }
}

impl Normalizer {
    pub fn new(set: &NormRuleSet) -> Result<Self, NormError> {
        if set.version != RULES_FORMAT_VERSION {
            return Err(NormError::UnsupportedVersion(set.version));
        }
        let malformed = |rule: String, reason: &str| NormError::MalformedRule { rule, reason: reason.to_string() };
        let folds = set.rules.iter().any(|r| matches!(r, RuleDescriptor::CaseFold { enabled: true }));
        let mut map_sources = BTreeSet::new();
        for rule in &set.rules {
            if let RuleDescriptor::Map { pairs, .. } = rule {
                for (from, _) in pairs {
                    map_sources.insert(from.nfc().collect::<String>());
                    if folds {
                        map_sources.insert(from.nfc().collect::<String>().to_lowercase());
                    }
                }
            }
        }

        let mut steps = Vec::with_capacity(set.rules.len());
        for (index, rule) in set.rules.iter().enumerate() {
            let label = rule.label(index);
            match rule {
                RuleDescriptor::RemoveClass { ranges, .. } => {
                    if ranges.is_empty() {
                        return Err(malformed(label, "no codepoint ranges"));
                    }
                    let mut parsed = Vec::with_capacity(ranges.len());
                    for r in ranges {
                        let range = parse_range(r)
                            .ok_or_else(|| malformed(label.clone(), &format!("bad codepoint range `{r}`")))?;
                        parsed.push(range);
                    }
                    steps.push(Step::Remove(parsed));
                }
                RuleDescriptor::Map { pairs, .. } => {
                    let mut composed = Vec::with_capacity(pairs.len());
                    for (from, to) in pairs {
                        if from.is_empty() {
                            return Err(malformed(label, "empty `from` sequence"));
                        }
                        let to_nfc: String = to.nfc().collect();
                        let probe = if folds { to_nfc.to_lowercase() } else { to_nfc.clone() };
                        if let Some(src) = map_sources.iter().find(|src| probe.contains(src.as_str())) {
                            return Err(malformed(
                                label,
                                &format!("output `{to}` re-introduces mapped sequence `{src}`"),
                            ));
                        }
                        composed.push((from.nfc().collect(), to_nfc));
                    }
                    steps.push(Step::Map(composed));
                }
                RuleDescriptor::CaseFold { enabled } => {
                    if *enabled {
                        steps.push(Step::CaseFold);
                    }
                }
                RuleDescriptor::StripPunctuation { enabled } => {
                    if *enabled {
                        steps.push(Step::StripPunctuation);
                    }
                }
            }
        }
        Ok(Self { steps, punctuation: Regex::new(r"\p{P}").expect("static pattern") })
    }

    /// Codepoints removed by this normalizer's removal classes.
    pub fn removes(&self, c: char) -> bool {
        let cp = c as u32;
        self.steps.iter().any(|s| match s {
            Step::Remove(ranges) => ranges.iter().any(|&(lo, hi)| (lo..=hi).contains(&cp)),
            _ => false,
        })
    }

    fn apply_once(&self, text: &str) -> String {
        let mut s: String = text.nfc().collect();
        for step in &self.steps {
            s = match step {
                Step::Remove(ranges) => s
                    .chars()
                    .filter(|&c| !ranges.iter().any(|&(lo, hi)| (lo..=hi).contains(&(c as u32))))
                    .collect(),
                Step::Map(pairs) => {
                    let mut out = s;
                    for (from, to) in pairs {
                        if out.contains(from.as_str()) {
                            out = out.replace(from.as_str(), to);
                        }
                    }
                    out
                }
                Step::CaseFold => s.to_lowercase(),
                Step::StripPunctuation => self.punctuation.replace_all(&s, "").into_owned(),
            };
        }
        let collapsed = s.split_whitespace().collect::<Vec<_>>().join(" ");
        collapsed.nfc().collect()
    }

    pub fn normalize(&self, text: &str) -> Result<String, NormError> {
        let mut current = self.apply_once(text);
        for _ in 1..MAX_PASSES {
            let next = self.apply_once(&current);
            if next == current {
                return Ok(current);
            }
            current = next;
        }
        Err(NormError::NonConvergent)
    }
}

/// Normalize `text` under `rules`.
pub fn normalize(text: &str, rules: &NormRuleSet) -> Result<String, NormError> {
    rules.compile()?.normalize(text)
}
