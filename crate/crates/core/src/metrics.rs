//! Edit distance and character error rate.
//!
//! Characters are Unicode scalar values (`char`), never bytes and never
//! grapheme clusters. CER is normalized by the reference length.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Retention threshold used throughout the pipeline.
pub const DEFAULT_CER_THRESHOLD: f64 = 0.3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("reference is empty; a zero-length span is never a valid candidate")]
    EmptyReference,
}

/// A character error rate stored as its exact numerator and denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CerValue {
    pub edit_distance: usize,
    pub ref_len: usize,
}

impl CerValue {
    pub fn new(edit_distance: usize, ref_len: usize) -> Result<Self, MetricsError> {
        if ref_len == 0 {
            return Err(MetricsError::EmptyReference);
        }
        Ok(Self { edit_distance, ref_len })
    }

    pub fn value(&self) -> f64 {
        self.edit_distance as f64 / self.ref_len as f64
    }

    /// The retention predicate: `value < threshold`, strictly.
    ///
    /// Every module that decides retention goes through this method.
    pub fn passes(&self, threshold: f64) -> bool {
        self.value() < threshold
    }

    pub fn is_exact(&self) -> bool {
        self.edit_distance == 0
    }

    /// Exact rational comparison of two rates (no float rounding).
    pub fn cmp_rate(&self, other: &CerValue) -> Ordering {
        let lhs = self.edit_distance as u128 * other.ref_len as u128;
        let rhs = other.edit_distance as u128 * self.ref_len as u128;
        lhs.cmp(&rhs)
    }
}

/// Levenshtein distance between two strings, counted in Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_slices(&a, &b)
}

/// Two-row dynamic program over arbitrary symbol slices.
pub fn levenshtein_slices<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    // keep the shorter sequence along the row
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Banded Levenshtein distance with early abandon.
///
/// Returns `Some(d)` when the true distance `d <= band`, otherwise `None`
/// ("exceeds band"). Only cells within `band` of the main diagonal are
/// evaluated, and the computation stops as soon as every cell of a row
/// exceeds the band.
pub fn banded_levenshtein(a: &str, b: &str, band: usize) -> Option<usize> {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    banded_levenshtein_slices(&a, &b, band)
}

pub fn banded_levenshtein_slices<T: PartialEq>(a: &[T], b: &[T], band: usize) -> Option<usize> {
    assert!(band >= 1, "band must be at least 1");
    let n = a.len();
    let m = b.len();
    if n.abs_diff(m) > band {
        return None;
    }
    let inf = band + 1;
    let mut prev = vec![inf; m + 1];
    let mut curr = vec![inf; m + 1];
    for (j, cell) in prev.iter_mut().enumerate().take(band.min(m) + 1) {
        *cell = j;
    }
    for i in 1..=n {
        let lo = i.saturating_sub(band);
        let hi = (i + band).min(m);
        // cell left of the band is out of reach
        if lo > 0 {
            curr[lo - 1] = inf;
        }
        let mut row_min = inf;
        for j in lo..=hi {
            let v = if j == 0 {
                i
            } else {
                let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
                let del = prev[j] + 1;
                let ins = curr[j - 1] + 1;
                sub.min(del).min(ins)
            };
            let v = v.min(inf);
            curr[j] = v;
            row_min = row_min.min(v);
        }
        if hi < m {
            curr[hi + 1] = inf;
        }
        if row_min > band {
            return None;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    let d = prev[m];
    (d <= band).then_some(d)
}

/// Character error rate of `hyp` against the reference `reference`.
pub fn cer(hyp: &str, reference: &str) -> Result<CerValue, MetricsError> {
    let ref_len = reference.chars().count();
    if ref_len == 0 {
        return Err(MetricsError::EmptyReference);
    }
    CerValue::new(levenshtein(hyp, reference), ref_len)
}
