//! Iterative alignment refinement.
//!
//! Pass 1 aligns the whole pool with the initial transcriber. Each later pass
//! asks the [`TranscriberSource`] for a transcriber adapted to the hours
//! retained so far and re-aligns only the residual pool; matches retained by
//! earlier passes are frozen. Transcripts never change between passes.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aligner::{align_in, AlignError, AlignParams, SearchMode, SpanMatch, TranscriptDoc};
use crate::metrics::CerValue;
use crate::parallel::map_ordered;
use crate::segmenter::Segment;
use crate::sim_transcriber::{AudioClip, Transcriber, TranscriberSource};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefineError {
    #[error("invalid refinement config: {0}")]
    Config(String),
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error("transcripts changed between passes")]
    TranscriptChanged,
}

/// One unit of the audio pool: a segment, what it sounds like, and the
/// transcript it was paired with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSegment {
    pub segment: Segment,
    pub doc_id: String,
    pub clip: AudioClip,
    /// Noise stream key; stable across passes.
    pub stream_pos: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineConfig {
    pub max_passes: usize,
    pub min_relative_gain: f64,
    pub align_params: AlignParams,
    pub mode: SearchMode,
    pub workers: usize,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self { max_passes: 3, min_relative_gain: 0.02, align_params: AlignParams::default(), mode: SearchMode::FullDoc, workers: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassReport {
    pub pass_index: usize,
    /// Cumulative retained hours after this pass.
    pub retained_hours: f64,
    pub new_hours: f64,
    pub residual_hours: f64,
    /// `new_hours / retained hours before this pass`; absent for pass 1 or
    /// when nothing had been retained yet.
    pub relative_gain: Option<f64>,
    pub aligned: usize,
    pub retained_segments: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetainedSegment {
    pub pool_index: usize,
    pub pass_index: usize,
    pub segment: Segment,
    pub doc_id: String,
    pub span_offset: usize,
    pub span_len: usize,
    pub cer: CerValue,
    pub ground_truth: String,
    pub hypothesis: String,
}

/// Result of aligning one pool segment in one pass.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentOutcome {
    Aligned { hypothesis: String, span: SpanMatch },
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassOutput {
    /// `(pool index, outcome)` in the order the indices were given.
    pub outcomes: Vec<(usize, SegmentOutcome)>,
}

fn hours(segments: impl Iterator<Item = f64>) -> f64 {
    segments.fold(0.0, |acc, s| acc + s) / 3600.0
}

/// Transcribe and align the listed pool segments with one transcriber.
pub fn run_pass(
    pool: &[PoolSegment],
    indices: &[usize],
    docs: &HashMap<String, TranscriptDoc>,
    transcriber: &dyn Transcriber,
    params: &AlignParams,
    mode: SearchMode,
    workers: usize,
) -> Result<PassOutput, RefineError> {
    params.validate()?;
    let outcomes = map_ordered(workers, indices, |&i| {
        let item = &pool[i];
        let Some(doc) = docs.get(&item.doc_id) else {
            return (i, SegmentOutcome::Skipped { reason: format!("no transcript paired as `{}`", item.doc_id) });
        };
        let hypothesis = match transcriber.transcribe(&item.clip, item.stream_pos) {
            Ok(h) => h,
            Err(e) => return (i, SegmentOutcome::Skipped { reason: e.to_string() }),
        };
        match align_in(&hypothesis, doc, params, params.method, mode, 0) {
            Ok(r) => (i, SegmentOutcome::Aligned { hypothesis, span: r.best }),
            Err(e) => (i, SegmentOutcome::Skipped { reason: e.to_string() }),
        }
    });
    Ok(PassOutput { outcomes })
}

fn fingerprint(docs: &HashMap<String, TranscriptDoc>) -> u64 {
    let mut keys: Vec<&String> = docs.keys().collect();
    keys.sort();
    let mut h = DefaultHasher::new();
    for k in keys {
        k.hash(&mut h);
        docs[k].text().hash(&mut h);
    }
    h.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineOutcome {
    pub reports: Vec<PassReport>,
    pub retained: Vec<RetainedSegment>,
}

pub fn refine(
    pool: &[PoolSegment],
    docs: &HashMap<String, TranscriptDoc>,
    source: &dyn TranscriberSource,
    config: &RefineConfig,
) -> Result<RefineOutcome, RefineError> {
    if config.max_passes < 1 {
        return Err(RefineError::Config("max_passes must be at least 1".into()));
    }
    let pool_hours = hours(pool.iter().map(|p| p.segment.duration));
    let before = fingerprint(docs);

    let mut residual: Vec<usize> = (0..pool.len()).collect();
    let mut cumulative = 0.0;
    let mut reports = Vec::new();
    let mut retained = Vec::new();

    for pass_index in 1..=config.max_passes {
        let transcriber = source.transcriber_after(cumulative);
        let out = run_pass(pool, &residual, docs, transcriber.as_ref(), &config.align_params, config.mode, config.workers)?;
        if fingerprint(docs) != before {
            return Err(RefineError::TranscriptChanged);
        }

        let mut next_residual = Vec::with_capacity(residual.len());
        let mut new_seconds = Vec::new();
        let (mut aligned, mut skipped) = (0, 0);
        for (i, outcome) in out.outcomes {
            match outcome {
                SegmentOutcome::Aligned { hypothesis, span } => {
                    aligned += 1;
                    if span.retained {
                        let item = &pool[i];
                        new_seconds.push(item.segment.duration);
                        retained.push(RetainedSegment {
                            pool_index: i,
                            pass_index,
                            segment: item.segment.clone(),
                            doc_id: item.doc_id.clone(),
                            span_offset: span.span_offset,
                            span_len: span.span_len,
                            cer: span.cer,
                            ground_truth: docs[&item.doc_id].span_text(span.span_offset, span.span_len),
                            hypothesis,
                        });
                    } else {
                        next_residual.push(i);
                    }
                }
                SegmentOutcome::Skipped { .. } => {
                    skipped += 1;
                    next_residual.push(i);
                }
            }
        }
        let new_hours = hours(new_seconds.iter().copied());
        let prior = cumulative;
        cumulative += new_hours;
        let relative_gain = (prior > 0.0).then(|| new_hours / prior);
        reports.push(PassReport {
            pass_index,
            retained_hours: cumulative,
            new_hours,
            residual_hours: (pool_hours - cumulative).max(0.0),
            relative_gain,
            aligned,
            retained_segments: new_seconds.len(),
            skipped,
        });
        residual = next_residual;

        let stop = pass_index >= 2
            && match relative_gain {
                Some(g) => g < config.min_relative_gain,
                None => new_hours == 0.0,
            };
        if stop {
            break;
        }
    }
    Ok(RefineOutcome { reports, retained })
}

/// Table-style summary: cumulative hours per pass, pass-over-pass gains, and
/// hours added by the last pass.
pub fn summary_table(label: &str, reports: &[PassReport]) -> String {
    let mut header = vec!["Language".to_string()];
    let mut row = vec![label.to_string()];
    for r in reports {
        header.push(format!("Pass {}", r.pass_index));
        row.push(format!("{:.3}", r.retained_hours));
        if r.pass_index >= 2 {
            header.push(format!("P{}→P{}", r.pass_index - 1, r.pass_index));
            row.push(r.relative_gain.map_or("n/a".to_string(), |g| format!("{:+.1}%", g * 100.0)));
        }
    }
    header.push("abs. added".into());
    row.push(format!("{:+.3}", reports.last().map_or(0.0, |r| r.new_hours)));
    let mut out = String::new();
    let _ = writeln!(out, "{}", header.join("\t"));
    let _ = writeln!(out, "{}", row.join("\t"));
    out
}
