//! Audio/transcript session pairing.
//!
//! Metadata is compared field by field: exact session date, exact document
//! number, and title similarity (`1 - lev / max_len` on case-folded,
//! punctuation-free titles). Only fields present on both sides count, and the
//! weights are renormalized over them. Candidate pairs are confirmed by the
//! vocabulary overlap of a short ASR sample with the transcript.

use std::collections::HashSet;
use std::sync::OnceLock;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aligner::TranscriptDoc;
use crate::metrics::levenshtein;
use crate::text_norm::{NormRuleSet, Normalizer, RuleDescriptor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PairError {
    #[error("sessions `{0}` and `{1}` share no comparable metadata field")]
    Incomparable(String, String),
    #[error("session `{0}` has none of date, title or document number")]
    NoKey(String),
    #[error("sample hypotheses contain no tokens; vocabulary check is inconclusive")]
    Inconclusive,
    #[error("invalid pairing weights: {0}")]
    Weights(String),
}

pub const DEFAULT_DATE_FORMATS: &[&str] =
    &["%Y-%m-%d", "%d/%m/%Y", "%d.%m.%Y", "%Y%m%d", "%B %d, %Y", "%d %B %Y", "%b %d, %Y", "%d %b %Y"];

/// One line of a metadata file. Dates stay raw until parsed per source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaRecord {
    pub id: String,
    pub source_id: String,
    #[serde(default)]
    pub date: Option<String>,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub doc_number: Option<String>,
    #[serde(default)]
    pub url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub id: String,
    pub source_id: String,
    pub session_date: Option<NaiveDate>,
    pub title: Option<String>,
    pub doc_number: Option<String>,
    pub url: Option<String>,
}

/// Try each format in order; unparseable dates become `None`.
pub fn parse_date(raw: &str, formats: &[impl AsRef<str>]) -> Option<NaiveDate> {
    let raw = raw.trim();
    formats.iter().find_map(|f| NaiveDate::parse_from_str(raw, f.as_ref()).ok())
}

impl SessionMeta {
    pub fn from_record(rec: &MetaRecord, date_formats: &[impl AsRef<str>]) -> Result<Self, PairError> {
        let meta = SessionMeta {
            id: rec.id.clone(),
            source_id: rec.source_id.clone(),
            session_date: rec.date.as_deref().and_then(|d| parse_date(d, date_formats)),
            title: rec.title.clone().filter(|t| !t.trim().is_empty()),
            doc_number: rec.doc_number.clone().filter(|t| !t.trim().is_empty()),
            url: rec.url.clone(),
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn validate(&self) -> Result<(), PairError> {
        if self.session_date.is_none() && self.title.is_none() && self.doc_number.is_none() {
            return Err(PairError::NoKey(self.id.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairWeights {
    pub date: f64,
    pub doc_number: f64,
    pub title: f64,
}

impl Default for PairWeights {
    fn default() -> Self {
        Self { date: 0.5, doc_number: 0.3, title: 0.2 }
    }
}

fn title_normalizer() -> &'static Normalizer {
    static N: OnceLock<Normalizer> = OnceLock::new();
    N.get_or_init(|| {
        let set = NormRuleSet {
            rules: vec![
                RuleDescriptor::CaseFold { enabled: true },
                RuleDescriptor::StripPunctuation { enabled: true },
            ],
            ..NormRuleSet::empty("und")
        };
        set.compile().expect("static rule set")
    })
}

fn normalized_title(t: &str) -> String {
    title_normalizer().normalize(t).unwrap_or_default()
}

/// `1 - lev(a, b) / max(|a|, |b|)` on normalized titles; `None` if both are empty.
pub fn title_similarity(a: &str, b: &str) -> Option<f64> {
    let (a, b) = (normalized_title(a), normalized_title(b));
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return None;
    }
    Some(1.0 - levenshtein(&a, &b) as f64 / longest as f64)
}

fn same_doc_number(a: &str, b: &str) -> bool {
    a.trim().eq_ignore_ascii_case(b.trim())
}

pub fn pair_score(a: &SessionMeta, b: &SessionMeta, w: &PairWeights) -> Result<f64, PairError> {
    if [w.date, w.doc_number, w.title].iter().any(|x| !(*x >= 0.0)) {
        return Err(PairError::Weights(format!("{w:?}")));
    }
    let mut parts: Vec<(f64, f64)> = Vec::with_capacity(3);
    if let (Some(x), Some(y)) = (a.session_date, b.session_date) {
        parts.push((w.date, f64::from(u8::from(x == y))));
    }
    if let (Some(x), Some(y)) = (&a.doc_number, &b.doc_number) {
        parts.push((w.doc_number, f64::from(u8::from(same_doc_number(x, y)))));
    }
    if let (Some(x), Some(y)) = (&a.title, &b.title) {
        if let Some(sim) = title_similarity(x, y) {
            parts.push((w.title, sim));
        }
    }
    let weight: f64 = parts.iter().map(|(wt, _)| wt).sum();
    if parts.is_empty() || weight <= 0.0 {
        return Err(PairError::Incomparable(a.id.clone(), b.id.clone()));
    }
    let score = parts.iter().map(|(wt, s)| wt * s).sum::<f64>() / weight;
    Ok(score.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VocabOverlap {
    pub overlap: f64,
    pub pass: bool,
}

/// Share of distinct sample tokens that also occur in the transcript.
pub fn validate_pair(sample_hyps: &[impl AsRef<str>], doc: &TranscriptDoc, min_overlap: f64) -> Result<VocabOverlap, PairError> {
    let sample: HashSet<&str> = sample_hyps.iter().flat_map(|h| h.as_ref().split_whitespace()).collect();
    if sample.is_empty() {
        return Err(PairError::Inconclusive);
    }
    let vocab: HashSet<&str> = doc.text().split_whitespace().collect();
    let shared = sample.iter().filter(|t| vocab.contains(*t)).count();
    let overlap = shared as f64 / sample.len() as f64;
    Ok(VocabOverlap { overlap, pass: overlap >= min_overlap })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCandidate {
    pub audio_meta: SessionMeta,
    pub transcript_meta: SessionMeta,
    pub score: f64,
    pub validated: bool,
    pub overlap: Option<f64>,
}

impl PairCandidate {
    /// Record a vocabulary check; `validated` requires both the score and the check to pass.
    pub fn apply_validation(&mut self, check: VocabOverlap, accept_threshold: f64) {
        self.overlap = Some(check.overlap);
        self.validated = check.pass && self.score >= accept_threshold;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unpaired {
    pub id: String,
    pub best_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingResult {
    pub pairs: Vec<PairCandidate>,
    pub unpaired_audio: Vec<Unpaired>,
    pub unpaired_transcripts: Vec<Unpaired>,
}

/// Greedy one-to-one assignment by descending score, never below `accept_threshold`.
pub fn pair_sessions(
    audio: &[SessionMeta],
    transcripts: &[SessionMeta],
    weights: &PairWeights,
    accept_threshold: f64,
) -> PairingResult {
    let mut scored: Vec<(f64, usize, usize)> = Vec::new();
    let mut best_audio = vec![None::<f64>; audio.len()];
    let mut best_transcript = vec![None::<f64>; transcripts.len()];
    for (i, a) in audio.iter().enumerate() {
        for (j, t) in transcripts.iter().enumerate() {
            if let Ok(s) = pair_score(a, t, weights) {
                best_audio[i] = Some(best_audio[i].map_or(s, |b: f64| b.max(s)));
                best_transcript[j] = Some(best_transcript[j].map_or(s, |b: f64| b.max(s)));
                if s >= accept_threshold {
                    scored.push((s, i, j));
                }
            }
        }
    }
    scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut audio_used = vec![false; audio.len()];
    let mut transcript_used = vec![false; transcripts.len()];
    let mut pairs = Vec::new();
    for (score, i, j) in scored {
        if audio_used[i] || transcript_used[j] {
            continue;
        }
        audio_used[i] = true;
        transcript_used[j] = true;
        pairs.push(PairCandidate {
            audio_meta: audio[i].clone(),
            transcript_meta: transcripts[j].clone(),
            score,
            validated: false,
            overlap: None,
        });
    }
    let unpaired = |metas: &[SessionMeta], used: &[bool], best: &[Option<f64>]| {
        metas
            .iter()
            .zip(used)
            .zip(best)
            .filter(|((_, u), _)| !**u)
            .map(|((m, _), b)| Unpaired { id: m.id.clone(), best_score: *b })
            .collect()
    };
    PairingResult {
        unpaired_audio: unpaired(audio, &audio_used, &best_audio),
        unpaired_transcripts: unpaired(transcripts, &transcript_used, &best_transcript),
        pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(id: &str, date: Option<&str>, title: Option<&str>, num: Option<&str>) -> SessionMeta {
        SessionMeta {
            id: id.into(),
            source_id: "src".into(),
            session_date: date.map(|d| NaiveDate::parse_from_str(d, "%Y-%m-%d").unwrap()),
            title: title.map(Into::into),
            doc_number: num.map(Into::into),
            url: None,
        }
    }

    #[test]
    fn exact_date_and_number() {
        let a = meta("a", Some("2021-03-04"), None, Some("HS-114"));
        let b = meta("b", Some("2021-03-04"), None, Some("hs-114 "));
        assert_eq!(pair_score(&a, &b, &PairWeights::default()).unwrap(), 1.0);
    }

    #[test]
    fn differing_dates_only() {
        let a = meta("a", Some("2021-03-04"), None, None);
        let b = meta("b", Some("2021-03-05"), None, None);
        assert_eq!(pair_score(&a, &b, &PairWeights::default()).unwrap(), 0.0);
    }

    #[test]
    fn no_common_field_is_incomparable() {
        let a = meta("a", Some("2021-03-04"), None, None);
        let b = meta("b", None, Some("Budget"), None);
        assert!(matches!(pair_score(&a, &b, &PairWeights::default()), Err(PairError::Incomparable(..))));
    }

    #[test]
    fn date_formats_degrade_gracefully() {
        let rec = MetaRecord {
            id: "x".into(),
            source_id: "s".into(),
            date: Some("4 March 2021".into()),
            title: Some("Sitting".into()),
            doc_number: None,
            url: None,
        };
        let m = SessionMeta::from_record(&rec, DEFAULT_DATE_FORMATS).unwrap();
        assert_eq!(m.session_date, NaiveDate::from_ymd_opt(2021, 3, 4));
        let junk = MetaRecord { date: Some("the fourth".into()), ..rec };
        let m = SessionMeta::from_record(&junk, DEFAULT_DATE_FORMATS).unwrap();
        assert_eq!(m.session_date, None);
        let keyless = MetaRecord { title: None, ..junk };
        assert!(SessionMeta::from_record(&keyless, DEFAULT_DATE_FORMATS).is_err());
    }

    #[test]
    fn vocabulary_overlap() {
        let doc = TranscriptDoc::new("d", "the budget debate resumed today", None).unwrap();
        let all = validate_pair(&["budget debate", "the debate"], &doc, 0.3).unwrap();
        assert_eq!(all, VocabOverlap { overlap: 1.0, pass: true });
        let none = validate_pair(&["lorem ipsum"], &doc, 0.3).unwrap();
        assert_eq!(none, VocabOverlap { overlap: 0.0, pass: false });
        let half = validate_pair(&["budget lorem today ipsum"], &doc, 0.3).unwrap();
        assert_eq!(half.overlap, 0.5);
        assert!(matches!(validate_pair(&["  "], &doc, 0.3), Err(PairError::Inconclusive)));
    }

    #[test]
    fn validation_requires_score_and_vocabulary() {
        let a = meta("a", Some("2021-03-04"), None, None);
        let mut c = PairCandidate { audio_meta: a.clone(), transcript_meta: a, score: 0.5, validated: false, overlap: None };
        c.apply_validation(VocabOverlap { overlap: 0.9, pass: true }, 0.6);
        assert!(!c.validated);
        c.score = 0.8;
        c.apply_validation(VocabOverlap { overlap: 0.9, pass: true }, 0.6);
        assert!(c.validated);
    }
}
