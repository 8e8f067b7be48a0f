//! Dataset manifests: per-segment records, filtering, session-atomic
//! train/test splits and corpus statistics.

use std::collections::HashMap;
use std::fmt::Write as _;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::CerValue;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ManifestError {
    #[error("split needs at least 2 distinct sessions, found {0}")]
    SplitInfeasible(usize),
    #[error("train_fraction must lie strictly between 0 and 1, got {0}")]
    Fraction(f64),
    #[error("record has ref_len 0")]
    EmptyReference,
}

/// One released segment.
///
/// On disk the CER is written as `edit_distance`, `ref_len` and the derived
/// `cer` rate; only the first two are read back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "RecordWire", try_from = "RecordWire")]
pub struct ManifestRecord {
    pub audio_ref: String,
    pub session_id: String,
    pub segment_index: usize,
    pub ground_truth: String,
    pub asr_hypothesis: String,
    pub cer: CerValue,
    pub retained: bool,
    pub span_offset: usize,
    pub span_len: usize,
    pub language_code: String,
    pub duration: f64,
    pub source_id: String,
    pub session_date: Option<NaiveDate>,
    pub quality_score: Option<f64>,
    pub snr_db: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RecordWire {
    audio_ref: String,
    session_id: String,
    segment_index: usize,
    ground_truth: String,
    asr_hypothesis: String,
    cer: f64,
    edit_distance: usize,
    ref_len: usize,
    retained: bool,
    span_offset: usize,
    span_len: usize,
    language_code: String,
    duration: f64,
    source_id: String,
    session_date: Option<NaiveDate>,
    quality_score: Option<f64>,
    snr_db: Option<f64>,
}

impl From<ManifestRecord> for RecordWire {
    fn from(r: ManifestRecord) -> Self {
        RecordWire {
            cer: r.cer.value(),
            edit_distance: r.cer.edit_distance,
            ref_len: r.cer.ref_len,
            audio_ref: r.audio_ref,
            session_id: r.session_id,
            segment_index: r.segment_index,
            ground_truth: r.ground_truth,
            asr_hypothesis: r.asr_hypothesis,
            retained: r.retained,
            span_offset: r.span_offset,
            span_len: r.span_len,
            language_code: r.language_code,
            duration: r.duration,
            source_id: r.source_id,
            session_date: r.session_date,
            quality_score: r.quality_score,
            snr_db: r.snr_db,
        }
    }
}

impl TryFrom<RecordWire> for ManifestRecord {
    type Error = ManifestError;

    fn try_from(w: RecordWire) -> Result<Self, Self::Error> {
        let cer = CerValue::new(w.edit_distance, w.ref_len).map_err(|_| ManifestError::EmptyReference)?;
        Ok(ManifestRecord {
            audio_ref: w.audio_ref,
            session_id: w.session_id,
            segment_index: w.segment_index,
            ground_truth: w.ground_truth,
            asr_hypothesis: w.asr_hypothesis,
            cer,
            retained: w.retained,
            span_offset: w.span_offset,
            span_len: w.span_len,
            language_code: w.language_code,
            duration: w.duration,
            source_id: w.source_id,
            session_date: w.session_date,
            quality_score: w.quality_score,
            snr_db: w.snr_db,
        })
    }
}

/// Conjunction of optional conditions. `max_cer` uses the strict retention
/// predicate; records lacking a field a condition needs are excluded.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Predicate {
    pub max_cer: Option<f64>,
    pub min_duration: Option<f64>,
    pub max_duration: Option<f64>,
    pub min_quality: Option<f64>,
    pub language: Option<String>,
    pub source: Option<String>,
    pub date_from: Option<NaiveDate>,
    pub date_to: Option<NaiveDate>,
}

impl Predicate {
    pub fn matches(&self, r: &ManifestRecord) -> bool {
        if let Some(t) = self.max_cer {
            if !r.cer.passes(t) {
                return false;
            }
        }
        if self.min_duration.is_some_and(|d| r.duration < d) || self.max_duration.is_some_and(|d| r.duration > d) {
            return false;
        }
        if let Some(q) = self.min_quality {
            if !r.quality_score.is_some_and(|s| s >= q) {
                return false;
            }
        }
        if self.language.as_ref().is_some_and(|l| *l != r.language_code) {
            return false;
        }
        if self.source.as_ref().is_some_and(|s| *s != r.source_id) {
            return false;
        }
        if self.date_from.is_some() || self.date_to.is_some() {
            let Some(d) = r.session_date else { return false };
            if self.date_from.is_some_and(|f| d < f) || self.date_to.is_some_and(|t| d > t) {
                return false;
            }
        }
        true
    }
}

pub fn filter(records: &[ManifestRecord], predicate: &Predicate) -> Vec<ManifestRecord> {
    records.iter().filter(|r| predicate.matches(r)).cloned().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitParams {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitParams {
    fn default() -> Self {
        Self { train_fraction: 0.95, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<ManifestRecord>,
    pub test: Vec<ManifestRecord>,
    pub test_sessions: Vec<String>,
    /// Whether the test side hit `N - round(N * fraction)` exactly. When no
    /// set of whole sessions sums to that size, the nearest achievable size
    /// is used instead.
    pub exact: bool,
}

/// Session-atomic split with `|train| = round(N * train_fraction)` whenever
/// whole sessions can make up that count.
pub fn split(records: &[ManifestRecord], params: &SplitParams) -> Result<Split, ManifestError> {
    if !(params.train_fraction > 0.0 && params.train_fraction < 1.0) {
        return Err(ManifestError::Fraction(params.train_fraction));
    }
    let mut order: Vec<&str> = Vec::new();
    let mut sizes: HashMap<&str, usize> = HashMap::new();
    for r in records {
        let e = sizes.entry(r.session_id.as_str()).or_insert_with(|| {
            order.push(r.session_id.as_str());
            0
        });
        *e += 1;
    }
    if order.len() < 2 {
        return Err(ManifestError::SplitInfeasible(order.len()));
    }
    let n = records.len();
    let train_target = (n as f64 * params.train_fraction).round() as usize;
    let test_target = n - train_target;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    order.shuffle(&mut rng);
    let session_sizes: Vec<usize> = order.iter().map(|s| sizes[s]).collect();

    let (chosen, exact) = if test_target == 0 { (Vec::new(), true) } else { choose_sessions(&session_sizes, test_target, n) };
    let test_sessions: Vec<String> = chosen.iter().map(|&i| order[i].to_string()).collect();
    let is_test: std::collections::HashSet<&str> = chosen.iter().map(|&i| order[i]).collect();
    let (test, train): (Vec<_>, Vec<_>) = records.iter().cloned().partition(|r| is_test.contains(r.session_id.as_str()));
    Ok(Split { train, test, test_sessions, exact })
}

/// Subset of session indices whose sizes sum to `target`, or the nearest
/// reachable total in `[1, total - 1]`. Earlier sessions are preferred.
fn choose_sessions(sizes: &[usize], target: usize, total: usize) -> (Vec<usize>, bool) {
    let cap = (target + sizes.iter().copied().max().unwrap_or(0)).min(total - 1);
    let mut from = vec![usize::MAX; cap + 1];
    let mut reach = vec![false; cap + 1];
    reach[0] = true;
    for (i, &s) in sizes.iter().enumerate() {
        for t in (s..=cap).rev() {
            if !reach[t] && reach[t - s] {
                reach[t] = true;
                from[t] = i;
            }
        }
    }
    let pick = if target <= cap && reach[target] {
        target
    } else {
        (1..=cap).filter(|&t| reach[t]).min_by_key(|&t| (t.abs_diff(target), t)).unwrap_or(0)
    };
    let mut chosen = Vec::new();
    let mut t = pick;
    while t > 0 {
        let i = from[t];
        chosen.push(i);
        t -= sizes[i];
    }
    chosen.sort_unstable();
    (chosen, pick == target)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
    /// Values at or above the last edge (the last edge itself is included in the final bin
    /// for duration and quality).
    pub overflow: u64,
    pub underflow: u64,
}

impl Histogram {
    fn new(lo: f64, bin_width: f64, bins: usize) -> Self {
        Self { lo, bin_width, counts: vec![0; bins], overflow: 0, underflow: 0 }
    }

    fn add_index(&mut self, idx: Option<usize>, below: bool) {
        match idx {
            _ if below => self.underflow += 1,
            Some(i) if i < self.counts.len() => self.counts[i] += 1,
            _ => self.overflow += 1,
        }
    }

    /// Plain-text bars, one line per bin.
    pub fn render(&self, label: &str, width: usize) -> String {
        let max = self.counts.iter().copied().max().unwrap_or(0).max(1);
        let mut out = String::new();
        let _ = writeln!(out, "{label}");
        for (i, &c) in self.counts.iter().enumerate() {
            let a = self.lo + i as f64 * self.bin_width;
            let bar = "#".repeat((c as usize * width).div_ceil(max as usize));
            let _ = writeln!(out, "[{a:>6.2}, {:>6.2}) {bar:<width$} {c}", a + self.bin_width);
        }
        if self.overflow > 0 {
            let _ = writeln!(out, "overflow {}", self.overflow);
        }
        if self.underflow > 0 {
            let _ = writeln!(out, "underflow {}", self.underflow);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub records: usize,
    pub total_hours: f64,
    pub duration_hist: Histogram,
    pub cer_hist: Histogram,
    pub quality_hist: Histogram,
    pub median_duration: Option<f64>,
    pub median_cer: Option<f64>,
    pub median_quality: Option<f64>,
    pub zero_cer_fraction: f64,
}

impl CorpusStats {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "records {}  total hours {:.3}  zero-CER fraction {:.4}", self.records, self.total_hours, self.zero_cer_fraction);
        let fmt = |m: Option<f64>| m.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(
            out,
            "median duration {}  median CER {}  median quality {}\n",
            fmt(self.median_duration),
            fmt(self.median_cer),
            fmt(self.median_quality)
        );
        out.push_str(&self.duration_hist.render("duration (s)", 40));
        out.push('\n');
        out.push_str(&self.cer_hist.render("CER", 40));
        if self.median_quality.is_some() {
            out.push('\n');
            out.push_str(&self.quality_hist.render("quality", 40));
        }
        out
    }
}

fn lower_median<T: Copy>(sorted: &[T]) -> Option<T> {
    (!sorted.is_empty()).then(|| sorted[(sorted.len() - 1) / 2])
}

/// Duration bins are 1 s over [0, 30], CER bins 0.01 over [0, 0.30), quality
/// bins 0.1 over [1, 5]. Medians are lower medians.
pub fn stats(records: &[ManifestRecord]) -> CorpusStats {
    let mut duration_hist = Histogram::new(0.0, 1.0, 30);
    let mut cer_hist = Histogram::new(0.0, 0.01, 30);
    let mut quality_hist = Histogram::new(1.0, 0.1, 40);

    for r in records {
        let d = r.duration;
        let d_idx = if d == 30.0 { Some(29) } else { Some(d.floor().max(0.0) as usize) };
        duration_hist.add_index(d_idx, d < 0.0);
        // exact integer binning: floor(100 * d / n)
        cer_hist.add_index(Some(r.cer.edit_distance * 100 / r.cer.ref_len), false);
        if let Some(q) = r.quality_score {
            let idx = if q == 5.0 { 39 } else { ((q - 1.0) * 10.0 + 1e-9).floor().max(0.0) as usize };
            quality_hist.add_index(Some(idx), q < 1.0);
        }
    }

    let mut durations: Vec<f64> = records.iter().map(|r| r.duration).collect();
    durations.sort_by(f64::total_cmp);
    let mut cers: Vec<CerValue> = records.iter().map(|r| r.cer).collect();
    cers.sort_by(|a, b| a.cmp_rate(b));
    let mut qualities: Vec<f64> = records.iter().filter_map(|r| r.quality_score).collect();
    qualities.sort_by(f64::total_cmp);

    let zero = records.iter().filter(|r| r.cer.edit_distance == 0).count();
    CorpusStats {
        records: records.len(),
        total_hours: records.iter().map(|r| r.duration).sum::<f64>() / 3600.0,
        duration_hist,
        cer_hist,
        quality_hist,
        median_duration: lower_median(&durations),
        median_cer: lower_median(&cers).map(|c| c.value()),
        median_quality: lower_median(&qualities),
        zero_cer_fraction: if records.is_empty() { 0.0 } else { zero as f64 / records.len() as f64 },
    }
}
