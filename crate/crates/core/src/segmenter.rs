//! Utterance segmentation over voice-activity speech regions.
//!
//! Regions separated by at most `merge_gap` seconds form a group; a segment
//! never bridges a longer silence. Inside a group the window runs over
//! wall-clock time (so short pauses count towards duration) and a cut is
//! placed:
//!
//! 1. at the longest silence `>= min_silence_gap` whose start falls between
//!    `target_low` and `target_high` seconds into the segment (latest wins ties);
//! 2. otherwise at the first such silence after `target_high` and no later
//!    than `max_dur`;
//! 3. otherwise exactly `max_dur` seconds after the segment start.
//!
//! A trailing piece shorter than `min_dur` is merged into the previous
//! segment when the result stays within `max_dur`, and dropped otherwise.
//! Groups shorter than `min_dur` are dropped.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SegmentError {
    #[error("region {index} is invalid: start {start} end {end}")]
    InvalidRegion { index: usize, start: f64, end: f64 },
    #[error("regions {first} [{first_start}, {first_end}] and {second} [{second_start}, {second_end}] are unsorted or overlap")]
    Disorder {
        first: usize,
        first_start: f64,
        first_end: f64,
        second: usize,
        second_start: f64,
        second_end: f64,
    },
    #[error("invalid segmenter parameters: {0}")]
    Params(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeechRegion {
    pub start: f64,
    pub end: f64,
}

impl SpeechRegion {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmenterParams {
    pub min_dur: f64,
    pub max_dur: f64,
    pub target_low: f64,
    pub target_high: f64,
    pub min_silence_gap: f64,
    pub merge_gap: f64,
}

impl Default for SegmenterParams {
    fn default() -> Self {
        Self { min_dur: 3.0, max_dur: 30.0, target_low: 10.0, target_high: 20.0, min_silence_gap: 0.3, merge_gap: 1.0 }
    }
}

impl SegmenterParams {
    pub fn validate(&self) -> Result<(), SegmentError> {
        let ordered = 0.0 < self.min_dur
            && self.min_dur <= self.target_low
            && self.target_low <= self.target_high
            && self.target_high <= self.max_dur;
        if !ordered {
            return Err(SegmentError::Params(format!(
                "need 0 < min_dur <= target_low <= target_high <= max_dur, got {} {} {} {}",
                self.min_dur, self.target_low, self.target_high, self.max_dur
            )));
        }
        if !(self.min_silence_gap >= 0.0 && self.merge_gap >= 0.0) {
            return Err(SegmentError::Params("silence thresholds must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub session_id: String,
    pub index: usize,
    pub start: f64,
    pub end: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// A group of regions shorter than `min_dur` with no neighbor within `merge_gap`.
    ShortRegion,
    /// A sub-`min_dur` tail that could not merge into the previous segment.
    Residue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedSpan {
    pub start: f64,
    pub end: f64,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    pub session_id: String,
    pub segments: Vec<Segment>,
    pub dropped: Vec<DroppedSpan>,
}

impl Segmentation {
    pub fn dropped_count(&self) -> usize {
        self.dropped.len()
    }
}

pub fn validate_regions(regions: &[SpeechRegion]) -> Result<(), SegmentError> {
    for (i, r) in regions.iter().enumerate() {
        if !(r.start.is_finite() && r.end.is_finite() && r.start >= 0.0 && r.end > r.start) {
            return Err(SegmentError::InvalidRegion { index: i, start: r.start, end: r.end });
        }
    }
    for (i, w) in regions.windows(2).enumerate() {
        if w[1].start < w[0].end {
            return Err(SegmentError::Disorder {
                first: i,
                first_start: w[0].start,
                first_end: w[0].end,
                second: i + 1,
                second_start: w[1].start,
                second_end: w[1].end,
            });
        }
    }
    Ok(())
}

/// Split one session's speech regions into bounded utterance segments.
pub fn segment_session(
    session_id: &str,
    regions: &[SpeechRegion],
    params: &SegmenterParams,
) -> Result<Segmentation, SegmentError> {
    params.validate()?;
    validate_regions(regions)?;

    let mut segments: Vec<(f64, f64)> = Vec::new();
    let mut dropped = Vec::new();

    let mut group_start = 0;
    for i in 0..regions.len() {
        let closes = i + 1 == regions.len() || regions[i + 1].start - regions[i].end > params.merge_gap;
        if closes {
            cut_group(&regions[group_start..=i], params, &mut segments, &mut dropped);
            group_start = i + 1;
        }
    }

    let segments = segments
        .into_iter()
        .enumerate()
        .map(|(index, (start, end))| Segment {
            session_id: session_id.to_string(),
            index,
            start,
            end,
            duration: end - start,
        })
        .collect();
    Ok(Segmentation { session_id: session_id.to_string(), segments, dropped })
}

/// A silence inside a group: `[start, end)` between two regions.
#[derive(Debug, Clone, Copy)]
struct Gap {
    start: f64,
    end: f64,
}

impl Gap {
    fn len(&self) -> f64 {
        self.end - self.start
    }
}

fn cut_group(group: &[SpeechRegion], p: &SegmenterParams, out: &mut Vec<(f64, f64)>, dropped: &mut Vec<DroppedSpan>) {
    let g_start = group[0].start;
    let g_end = group[group.len() - 1].end;
    if g_end - g_start < p.min_dur {
        dropped.push(DroppedSpan { start: g_start, end: g_end, reason: DropReason::ShortRegion });
        return;
    }
    let gaps: Vec<Gap> = group
        .windows(2)
        .map(|w| Gap { start: w[0].end, end: w[1].start })
        .filter(|g| g.len() >= p.min_silence_gap)
        .collect();
    let region_starts: Vec<f64> = group.iter().map(|r| r.start).collect();

    let first_in_group = out.len();
    let mut cursor = g_start;
    loop {
        let remaining = g_end - cursor;
        if remaining <= p.target_high {
            push_tail(cursor, g_end, first_in_group, p, out, dropped);
            return;
        }
        // a cut is due: look for a silence in the target window first
        let offset = |g: &Gap| g.start - cursor;
        let in_target = gaps
            .iter()
            .filter(|g| g.start > cursor && offset(g) >= p.target_low && offset(g) <= p.target_high)
            .fold(None::<Gap>, |best, g| match best {
                Some(b) if b.len() > g.len() => Some(b),
                _ => Some(*g),
            });
        let chosen = in_target.or_else(|| {
            gaps.iter().find(|g| offset(g) > p.target_high && offset(g) <= p.max_dur).copied()
        });
        match chosen {
            Some(gap) => {
                out.push((cursor, gap.start));
                cursor = gap.end;
            }
            None if remaining > p.max_dur => {
                let cut = cursor + p.max_dur;
                out.push((cursor, cut));
                // a forced cut landing in a short pause resumes at the next speech onset
                cursor = region_starts
                    .iter()
                    .zip(group.iter())
                    .find(|(_, r)| r.end > cut)
                    .map(|(&s, _)| s.max(cut))
                    .unwrap_or(g_end);
            }
            None => {
                push_tail(cursor, g_end, first_in_group, p, out, dropped);
                return;
            }
        }
    }
}

fn push_tail(
    start: f64,
    end: f64,
    first_in_group: usize,
    p: &SegmenterParams,
    out: &mut Vec<(f64, f64)>,
    dropped: &mut Vec<DroppedSpan>,
) {
    if end <= start {
        return;
    }
    if end - start >= p.min_dur {
        out.push((start, end));
        return;
    }
    if out.len() > first_in_group {
        let prev = out.last_mut().expect("non-empty");
        if end - prev.0 <= p.max_dur {
            prev.1 = end;
            return;
        }
    }
    dropped.push(DroppedSpan { start, end, reason: DropReason::Residue });
}
