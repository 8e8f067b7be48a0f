//! Sliding-window CER alignment of hypotheses against long transcripts.
//!
//! A hypothesis of `m` characters is compared against every candidate span
//! of the transcript whose length lies in `[ceil(m * min_ratio),
//! floor(m * max_ratio)]`; the span with the lowest CER wins, ties broken by
//! smaller offset and then shorter span. Two searches are provided:
//!
//! * [`align_exhaustive`] scores every candidate span. It is the reference.
//! * [`align_coarse_to_fine`] first streams the hypothesis over the whole
//!   search region in approximate-search mode, which yields for every end
//!   position a lower bound on the distance of any span ending there. Ends are
//!   bucketed into windows of `coarse_stride_ratio * m` characters; the two
//!   best-scoring windows (at least `fine_radius` apart) become anchors, and
//!   every offset within `fine_radius` of an anchor is then scored exactly.
//!   A second anchor whose bound already exceeds `threshold * max_span_len`
//!   cannot retain and is skipped once the first anchor has retained.
//!
//! The hypothesis is used only to choose a span; labels always come from
//! [`TranscriptDoc::span_text`].

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitpar::Pattern;
use crate::metrics::{CerValue, DEFAULT_CER_THRESHOLD};
use crate::parallel::map_ordered;
use crate::segmenter::Segment;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlignError {
    #[error("hypothesis is empty")]
    EmptyHypothesis,
    #[error("transcript `{0}` is empty")]
    EmptyDocument(String),
    #[error("no candidate span: hypothesis of {hyp_len} chars needs spans of at least {min_span} chars, longest search region has {longest_region}")]
    NoCandidate { hyp_len: usize, min_span: usize, longest_region: usize },
    #[error("fragment {index} ({offset}, {len}) is out of order, overlapping, empty or out of bounds")]
    InvalidFragment { index: usize, offset: usize, len: usize },
    #[error("per-fragment search requested but transcript `{0}` has no fragments")]
    MissingFragments(String),
    #[error("invalid alignment parameters: {0}")]
    Params(String),
    #[error("segment {index} belongs to session `{found}`, expected `{expected}`")]
    SessionMismatch { index: usize, expected: String, found: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    pub offset: usize,
    pub len: usize,
}

/// A normalized full-session transcript: the search space for alignment.
#[derive(Debug, Clone)]
pub struct TranscriptDoc {
    session_id: String,
    text: String,
    chars: Vec<char>,
    symbols: Vec<u32>,
    alphabet: HashMap<char, u32>,
    fragments: Option<Vec<Fragment>>,
}

impl TranscriptDoc {
    /// `text` must already be canonical (see [`crate::text_norm`]).
    pub fn new(
        session_id: impl Into<String>,
        text: impl Into<String>,
        fragments: Option<Vec<Fragment>>,
    ) -> Result<Self, AlignError> {
        let session_id = session_id.into();
        let text = text.into();
        let chars: Vec<char> = text.chars().collect();
        if chars.is_empty() {
            return Err(AlignError::EmptyDocument(session_id));
        }
        if let Some(frags) = &fragments {
            let mut prev_end = 0;
            for (index, f) in frags.iter().enumerate() {
                let bad = f.len == 0 || f.offset < prev_end || f.offset + f.len > chars.len();
                if bad {
                    return Err(AlignError::InvalidFragment { index, offset: f.offset, len: f.len });
                }
                prev_end = f.offset + f.len;
            }
        }
        let mut alphabet = HashMap::new();
        let symbols = chars
            .iter()
            .map(|c| {
                let next = alphabet.len() as u32;
                *alphabet.entry(*c).or_insert(next)
            })
            .collect();
        Ok(Self { session_id, text, chars, symbols, alphabet, fragments })
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn char_count(&self) -> usize {
        self.chars.len()
    }

    pub fn fragments(&self) -> Option<&[Fragment]> {
        self.fragments.as_deref()
    }

    /// The transcript text of a span, in characters. This is the only source
    /// of ground-truth labels.
    pub fn span_text(&self, offset: usize, len: usize) -> String {
        self.chars[offset..offset + len].iter().collect()
    }

    fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    /// Characters absent from the transcript map to an id that matches nothing.
    fn encode(&self, s: &str) -> Vec<u32> {
        let unknown = self.alphabet.len() as u32;
        s.chars().map(|c| self.alphabet.get(&c).copied().unwrap_or(unknown)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    #[default]
    CoarseToFine,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    #[default]
    FullDoc,
    PerFragment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignParams {
    pub cer_threshold: f64,
    pub span_len_min_ratio: f64,
    pub span_len_max_ratio: f64,
    pub coarse_stride_ratio: f64,
    /// Characters either side of a coarse anchor; `None` means the hypothesis length.
    pub fine_radius: Option<usize>,
    pub method: SearchMethod,
    /// Restrict each segment's search to after the previous retained match.
    pub monotone: bool,
}

impl Default for AlignParams {
    fn default() -> Self {
        Self {
            cer_threshold: DEFAULT_CER_THRESHOLD,
            span_len_min_ratio: 0.7,
            span_len_max_ratio: 1.3,
            coarse_stride_ratio: 0.5,
            fine_radius: None,
            method: SearchMethod::CoarseToFine,
            monotone: false,
        }
    }
}

impl AlignParams {
    pub fn validate(&self) -> Result<(), AlignError> {
        let ok = self.span_len_min_ratio > 0.0
            && self.span_len_min_ratio <= 1.0
            && self.span_len_max_ratio >= 1.0
            && self.coarse_stride_ratio > 0.0
            && self.coarse_stride_ratio <= 1.0
            && self.cer_threshold > 0.0;
        if ok {
            Ok(())
        } else {
            Err(AlignError::Params(format!("{self:?}")))
        }
    }

    /// Inclusive span-length range for a hypothesis of `m` characters.
    pub fn span_len_range(&self, m: usize) -> (usize, usize) {
        const EPS: f64 = 1e-9;
        let lo = ((m as f64 * self.span_len_min_ratio) - EPS).ceil().max(1.0) as usize;
        let hi = ((m as f64 * self.span_len_max_ratio) + EPS).floor() as usize;
        (lo, hi.max(lo))
    }

    fn radius(&self, m: usize) -> usize {
        self.fine_radius.unwrap_or(m)
    }

    fn stride(&self, m: usize) -> usize {
        ((m as f64 * self.coarse_stride_ratio).round() as usize).max(1)
    }
}

/// The best span found for one hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanMatch {
    pub span_offset: usize,
    pub span_len: usize,
    pub cer: CerValue,
    pub retained: bool,
}

impl SpanMatch {
    fn better_than(&self, other: &SpanMatch) -> bool {
        match self.cer.cmp_rate(&other.cer) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => (self.span_offset, self.span_len) < (other.span_offset, other.span_len),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchResult {
    pub best: SpanMatch,
    /// Span scores computed, counting every streamed column of the coarse pass.
    pub candidates_evaluated: u64,
}

/// A retained-or-not alignment of one segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentMatch {
    pub session_id: String,
    pub index: usize,
    pub span_offset: usize,
    pub span_len: usize,
    pub edit_distance: usize,
    pub ref_len: usize,
    pub retained: bool,
}

impl AlignmentMatch {
    pub fn from_span(session_id: &str, index: usize, m: &SpanMatch) -> Self {
        Self {
            session_id: session_id.to_string(),
            index,
            span_offset: m.span_offset,
            span_len: m.span_len,
            edit_distance: m.cer.edit_distance,
            ref_len: m.cer.ref_len,
            retained: m.retained,
        }
    }

    pub fn cer(&self) -> CerValue {
        CerValue { edit_distance: self.edit_distance, ref_len: self.ref_len }
    }
}

/// Number of `(offset, span_len)` candidates the exhaustive search scores.
pub fn exhaustive_candidate_count(hyp_len: usize, doc: &TranscriptDoc, params: &AlignParams, mode: SearchMode) -> u64 {
    let (lo, hi) = params.span_len_range(hyp_len);
    let regions = match search_regions(doc, mode, 0) {
        Ok(r) => r,
        Err(_) => return 0,
    };
    regions
        .iter()
        .map(|&(a, b)| {
            let n = b - a;
            (lo..=hi.min(n)).map(|l| (n - l + 1) as u64).sum::<u64>()
        })
        .sum()
}

fn search_regions(doc: &TranscriptDoc, mode: SearchMode, floor: usize) -> Result<Vec<(usize, usize)>, AlignError> {
    let regions: Vec<(usize, usize)> = match mode {
        SearchMode::FullDoc => vec![(0, doc.char_count())],
        SearchMode::PerFragment => doc
            .fragments()
            .ok_or_else(|| AlignError::MissingFragments(doc.session_id.clone()))?
            .iter()
            .map(|f| (f.offset, f.offset + f.len))
            .collect(),
    };
    Ok(regions
        .into_iter()
        .filter_map(|(a, b)| {
            let a = a.max(floor);
            (a < b).then_some((a, b))
        })
        .collect())
}

struct Query<'a> {
    doc: &'a TranscriptDoc,
    pattern: Pattern,
    hyp_len: usize,
    min_len: usize,
    max_len: usize,
    threshold: f64,
}

impl<'a> Query<'a> {
    fn new(hyp: &str, doc: &'a TranscriptDoc, params: &AlignParams) -> Result<Self, AlignError> {
        params.validate()?;
        let symbols = doc.encode(hyp);
        if symbols.is_empty() {
            return Err(AlignError::EmptyHypothesis);
        }
        let hyp_len = symbols.len();
        let (min_len, max_len) = params.span_len_range(hyp_len);
        Ok(Self {
            doc,
            pattern: Pattern::new(&symbols, doc.alphabet_size()),
            hyp_len,
            min_len,
            max_len,
            threshold: params.cer_threshold,
        })
    }

    fn check_regions(&self, regions: &[(usize, usize)]) -> Result<(), AlignError> {
        let longest = regions.iter().map(|&(a, b)| b - a).max().unwrap_or(0);
        if longest < self.min_len {
            return Err(AlignError::NoCandidate { hyp_len: self.hyp_len, min_span: self.min_len, longest_region: longest });
        }
        Ok(())
    }

    /// Score every span length at one offset; returns spans scored.
    fn score_offset(&self, offset: usize, region_end: usize, best: &mut Option<SpanMatch>) -> u64 {
        let end = region_end.min(offset + self.max_len);
        if end < offset + self.min_len {
            return 0;
        }
        let text = &self.doc.symbols[offset..end];
        let min_len = self.min_len;
        let threshold = self.threshold;
        let mut scored = 0;
        self.pattern.prefix_scores(text, |len, d| {
            if len >= min_len {
                scored += 1;
                let cer = CerValue { edit_distance: d, ref_len: len };
                let cand = SpanMatch { span_offset: offset, span_len: len, cer, retained: cer.passes(threshold) };
                if best.as_ref().map_or(true, |b| cand.better_than(b)) {
                    *best = Some(cand);
                }
            }
            true
        });
        scored
    }
}

pub fn align_exhaustive(hyp: &str, doc: &TranscriptDoc, params: &AlignParams) -> Result<SearchResult, AlignError> {
    align_in(hyp, doc, params, SearchMethod::Exhaustive, SearchMode::FullDoc, 0)
}

pub fn align_coarse_to_fine(hyp: &str, doc: &TranscriptDoc, params: &AlignParams) -> Result<SearchResult, AlignError> {
    align_in(hyp, doc, params, SearchMethod::CoarseToFine, SearchMode::FullDoc, 0)
}

/// Align one hypothesis with an explicit method, search mode and offset floor.
pub fn align_in(
    hyp: &str,
    doc: &TranscriptDoc,
    params: &AlignParams,
    method: SearchMethod,
    mode: SearchMode,
    floor: usize,
) -> Result<SearchResult, AlignError> {
    let query = Query::new(hyp, doc, params)?;
    let regions = search_regions(doc, mode, floor)?;
    query.check_regions(&regions)?;
    match method {
        SearchMethod::Exhaustive => Ok(exhaustive(&query, &regions)),
        SearchMethod::CoarseToFine => Ok(coarse_to_fine(&query, &regions, params)),
    }
}

fn exhaustive(q: &Query, regions: &[(usize, usize)]) -> SearchResult {
    let mut best = None;
    let mut candidates = 0;
    for &(a, b) in regions {
        if b - a < q.min_len {
            continue;
        }
        for offset in a..=b - q.min_len {
            candidates += q.score_offset(offset, b, &mut best);
        }
    }
    SearchResult { best: best.expect("regions checked non-empty"), candidates_evaluated: candidates }
}

#[derive(Debug, Clone, Copy)]
struct Anchor {
    bound: usize,
    region: usize,
    start: usize,
}

fn coarse_to_fine(q: &Query, regions: &[(usize, usize)], params: &AlignParams) -> SearchResult {
    let m = q.hyp_len;
    let stride = params.stride(m);
    let radius = params.radius(m);
    let mut candidates = 0u64;

    // stage 1: lower bounds per end position, best per stride window
    let mut windows: Vec<Anchor> = Vec::new();
    let mut bounds: Vec<Vec<u32>> = vec![Vec::new(); regions.len()];
    for (ri, &(a, b)) in regions.iter().enumerate() {
        if b - a < q.min_len {
            continue;
        }
        let mut current: Option<(usize, Anchor)> = None;
        let min_len = q.min_len;
        let region_bounds = &mut bounds[ri];
        region_bounds.reserve(b - a + 1);
        region_bounds.push(m as u32);
        q.pattern.search_scores(&q.doc.symbols[a..b], |j, d| {
            candidates += 1;
            debug_assert_eq!(j, region_bounds.len());
            region_bounds.push(d as u32);
            if j < min_len {
                return true;
            }
            let start = a + j.saturating_sub(m);
            let key = (start - a) / stride;
            match &mut current {
                Some((k, anchor)) if *k == key => {
                    if d < anchor.bound {
                        *anchor = Anchor { bound: d, region: ri, start };
                    }
                }
                _ => {
                    if let Some((_, done)) = current.take() {
                        windows.push(done);
                    }
                    current = Some((key, Anchor { bound: d, region: ri, start }));
                }
            }
            true
        });
        if let Some((_, done)) = current {
            windows.push(done);
        }
    }

    let by_bound = |x: &&Anchor, y: &&Anchor| x.bound.cmp(&y.bound).then(x.region.cmp(&y.region)).then(x.start.cmp(&y.start));
    let first = *windows.iter().min_by(by_bound).expect("at least one window");
    let second = windows
        .iter()
        .filter(|w| w.region != first.region || w.start.abs_diff(first.start) > radius)
        .min_by(by_bound)
        .copied();

    // stage 2: exact scores around the anchors
    let mut best = None;
    candidates += fine_search(q, regions, &bounds, &first, radius, &mut best);
    if let Some(second) = second {
        let cutoff = q.threshold * q.max_len as f64;
        let first_retained = best.as_ref().is_some_and(|b: &SpanMatch| b.retained);
        if !(first_retained && second.bound as f64 >= cutoff) {
            candidates += fine_search(q, regions, &bounds, &second, radius, &mut best);
        }
    }
    SearchResult { best: best.expect("anchor region admits a span"), candidates_evaluated: candidates }
}

/// Exact search of every offset within `radius` of the anchor. Offsets are
/// visited in order of their stage-1 lower bound; once that bound cannot
/// reach the best CER found so far, the remaining offsets are skipped, which
/// leaves the result identical to scoring all of them.
fn fine_search(
    q: &Query,
    regions: &[(usize, usize)],
    bounds: &[Vec<u32>],
    anchor: &Anchor,
    radius: usize,
    best: &mut Option<SpanMatch>,
) -> u64 {
    let (a, b) = regions[anchor.region];
    let lo = anchor.start.saturating_sub(radius).max(a);
    let hi = (anchor.start + radius).min(b - q.min_len);
    let bound = &bounds[anchor.region];
    // lowest possible edit distance of any span starting at each offset
    let mut order: Vec<(u32, usize)> = (lo..=hi)
        .map(|offset| {
            let first = offset + q.min_len - a;
            let last = (offset + q.max_len).min(b) - a;
            (*bound[first..=last].iter().min().expect("non-empty range"), offset)
        })
        .collect();
    order.sort_unstable();
    let mut scored = 0;
    for (lower, offset) in order {
        // every span here has CER >= lower / max_len
        if let Some(b) = best.as_ref() {
            if lower as u128 * b.cer.ref_len as u128 > b.cer.edit_distance as u128 * q.max_len as u128 {
                break;
            }
        }
        scored += q.score_offset(offset, b, best);
    }
    scored
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SessionYield {
    pub segments: usize,
    pub retained: usize,
    pub retained_seconds: f64,
    pub total_seconds: f64,
    /// Retained segments over all segments; 0 for an empty session.
    pub retention_rate: f64,
}

impl SessionYield {
    pub fn from_matches<'a>(items: impl IntoIterator<Item = (&'a Segment, bool)>) -> Self {
        let mut y = SessionYield::default();
        for (seg, retained) in items {
            y.segments += 1;
            y.total_seconds += seg.duration;
            if retained {
                y.retained += 1;
                y.retained_seconds += seg.duration;
            }
        }
        if y.segments > 0 {
            y.retention_rate = y.retained as f64 / y.segments as f64;
        }
        y
    }
}

/// A segment that could not be aligned at all (e.g. empty hypothesis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unaligned {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionAlignment {
    pub matches: Vec<AlignmentMatch>,
    pub unaligned: Vec<Unaligned>,
    pub yield_: SessionYield,
    pub candidates_evaluated: u64,
}

/// Align every hypothesis of one session independently.
///
/// Results are ordered by segment index and identical for any `workers`.
pub fn align_session(
    hyps: &[(Segment, String)],
    doc: &TranscriptDoc,
    params: &AlignParams,
    mode: SearchMode,
    workers: usize,
) -> Result<SessionAlignment, AlignError> {
    params.validate()?;
    search_regions(doc, mode, 0)?;
    for (seg, _) in hyps {
        if seg.session_id != doc.session_id {
            return Err(AlignError::SessionMismatch {
                index: seg.index,
                expected: doc.session_id.clone(),
                found: seg.session_id.clone(),
            });
        }
    }
    let mut order: Vec<usize> = (0..hyps.len()).collect();
    order.sort_by_key(|&i| hyps[i].0.index);

    let results: Vec<Result<SearchResult, AlignError>> = if params.monotone {
        let mut floor = 0;
        order
            .iter()
            .map(|&i| {
                let r = align_in(&hyps[i].1, doc, params, params.method, mode, floor);
                if let Ok(res) = &r {
                    if res.best.retained {
                        floor = res.best.span_offset + res.best.span_len;
                    }
                }
                r
            })
            .collect()
    } else {
        map_ordered(workers, &order, |&i| align_in(&hyps[i].1, doc, params, params.method, mode, 0))
    };

    let mut matches = Vec::with_capacity(hyps.len());
    let mut unaligned = Vec::new();
    let mut candidates = 0;
    let mut flags = Vec::with_capacity(hyps.len());
    for (&i, r) in order.iter().zip(results) {
        let seg = &hyps[i].0;
        match r {
            Ok(res) => {
                candidates += res.candidates_evaluated;
                matches.push(AlignmentMatch::from_span(&doc.session_id, seg.index, &res.best));
                flags.push((seg, res.best.retained));
            }
            Err(AlignError::Params(p)) => return Err(AlignError::Params(p)),
            Err(e) => {
                unaligned.push(Unaligned { index: seg.index, reason: e.to_string() });
                flags.push((seg, false));
            }
        }
    }
    let yield_ = SessionYield::from_matches(flags);
    Ok(SessionAlignment { matches, unaligned, yield_, candidates_evaluated: candidates })
}
