//! The transcriber seam and a noisy-channel simulation of ASR.
//!
//! Real ASR plugs in behind [`Transcriber`]; retraining on retained data plugs
//! in behind [`TranscriberSource`]. The simulation applies per-character
//! substitutions, insertions and deletions to the spoken text, with a
//! generator keyed by `(seed, stream_pos)` so each segment's hypothesis is
//! independent of evaluation order.
//!
//! Every character consumes the same number of random draws, and whether a
//! character is edited depends only on `u < total_rate`. Lowering all rates
//! proportionally therefore edits a subset of the same positions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TranscriberError {
    #[error("invalid noise parameters: {0}")]
    Config(String),
    #[error("nothing to transcribe: input text is empty")]
    EmptyInput,
    #[error("clip `{0}` carries no spoken text; the simulated transcriber cannot hear audio")]
    NoSpokenText(String),
}

pub const DEFAULT_ALPHABET: &str = "abcdefghijklmnopqrstuvwxyz ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub sub_rate: f64,
    pub ins_rate: f64,
    pub del_rate: f64,
    pub alphabet: String,
    pub seed: u64,
}

impl NoiseParams {
    pub fn new(sub_rate: f64, ins_rate: f64, del_rate: f64, seed: u64) -> Self {
        Self { sub_rate, ins_rate, del_rate, alphabet: DEFAULT_ALPHABET.to_string(), seed }
    }

    pub fn noiseless(seed: u64) -> Self {
        Self::new(0.0, 0.0, 0.0, seed)
    }

    /// Split a total rate 50/25/25 across substitution, insertion and deletion.
    pub fn with_total(total: f64, seed: u64) -> Self {
        Self::new(total * 0.5, total * 0.25, total * 0.25, seed)
    }

    pub fn total(&self) -> f64 {
        self.sub_rate + self.ins_rate + self.del_rate
    }

    pub fn validate(&self) -> Result<(), TranscriberError> {
        for (name, r) in [("sub_rate", self.sub_rate), ("ins_rate", self.ins_rate), ("del_rate", self.del_rate)] {
            if !(0.0..1.0).contains(&r) {
                return Err(TranscriberError::Config(format!("{name} = {r} is outside [0, 1)")));
            }
        }
        if self.total() >= 1.0 {
            return Err(TranscriberError::Config(format!("rate sum {} must be below 1", self.total())));
        }
        if self.alphabet.is_empty() && (self.sub_rate > 0.0 || self.ins_rate > 0.0) {
            return Err(TranscriberError::Config("substitutions and insertions need a non-empty alphabet".into()));
        }
        Ok(())
    }

    /// All rates multiplied by `factor`, capped so the sum stays below 1.
    pub fn scaled(&self, factor: f64) -> Self {
        let total = self.total() * factor;
        let factor = if total > 0.99 { factor * 0.99 / total } else { factor };
        Self {
            sub_rate: self.sub_rate * factor,
            ins_rate: self.ins_rate * factor,
            del_rate: self.del_rate * factor,
            alphabet: self.alphabet.clone(),
            seed: self.seed,
        }
    }
}

/// Pass `true_text` through the noisy channel.
pub fn transcribe(true_text: &str, params: &NoiseParams, stream_pos: u64) -> Result<String, TranscriberError> {
    params.validate()?;
    if true_text.is_empty() {
        return Err(TranscriberError::EmptyInput);
    }
    let alphabet: Vec<char> = params.alphabet.chars().collect();
    let total = params.total();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(stream_pos);

    let mut out = String::with_capacity(true_text.len() + 8);
    for c in true_text.chars() {
        let edit: f64 = rng.gen();
        let kind: f64 = rng.gen();
        let pick: u64 = rng.gen();
        if edit >= total {
            out.push(c);
            continue;
        }
        let kind = kind * total;
        if kind < params.del_rate {
            continue;
        }
        if kind < params.del_rate + params.sub_rate {
            out.push(substitute(c, &alphabet, pick));
        } else {
            out.push(c);
            out.push(alphabet[(pick % alphabet.len() as u64) as usize]);
        }
    }
    Ok(out)
}

fn substitute(c: char, alphabet: &[char], pick: u64) -> char {
    let others: Vec<char> = alphabet.iter().copied().filter(|&a| a != c).collect();
    if others.is_empty() {
        c
    } else {
        others[(pick % others.len() as u64) as usize]
    }
}

/// Exponential-decay stand-in for fine-tuning on retained data.
///
/// `rate(h) = floor + (initial - floor) * 2^(-h / halving_hours)`, applied per
/// error type with the floor split in proportion to the initial rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub initial_rates: NoiseParams,
    pub floor_rate: f64,
    pub halving_hours: f64,
}

impl LearningCurve {
    pub fn validate(&self) -> Result<(), TranscriberError> {
        self.initial_rates.validate()?;
        if !(self.halving_hours > 0.0) {
            return Err(TranscriberError::Config("halving_hours must be positive".into()));
        }
        if !(self.floor_rate >= 0.0 && self.floor_rate <= self.initial_rates.total()) {
            return Err(TranscriberError::Config(format!(
                "floor_rate {} must lie in [0, initial total {}]",
                self.floor_rate,
                self.initial_rates.total()
            )));
        }
        Ok(())
    }
}

pub fn improved_params(curve: &LearningCurve, retained_hours: f64) -> NoiseParams {
    let init = &curve.initial_rates;
    if retained_hours <= 0.0 {
        return init.clone();
    }
    let total = init.total();
    let decay = (-retained_hours / curve.halving_hours).exp2();
    let rate = |r: f64| {
        let floor = if total > 0.0 { curve.floor_rate * r / total } else { 0.0 };
        floor + (r - floor) * decay
    };
    NoiseParams {
        sub_rate: rate(init.sub_rate),
        ins_rate: rate(init.ins_rate),
        del_rate: rate(init.del_rate),
        alphabet: init.alphabet.clone(),
        seed: init.seed,
    }
}

/// What a transcriber listens to. `spoken_text` and `difficulty` exist for
/// simulation; a real recognizer reads the audio behind `locator`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioClip {
    pub locator: String,
    #[serde(default)]
    pub spoken_text: Option<String>,
    /// Multiplier on the channel's error rates for this clip (1 = nominal).
    #[serde(default = "unit")]
    pub difficulty: f64,
}

fn unit() -> f64 {
    1.0
}

pub trait Transcriber: Send + Sync {
    fn transcribe(&self, clip: &AudioClip, stream_pos: u64) -> Result<String, TranscriberError>;
}

/// Produces the transcriber for the next refinement pass given the hours
/// retained so far.
pub trait TranscriberSource: Sync {
    fn transcriber_after(&self, retained_hours: f64) -> Box<dyn Transcriber>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyChannel {
    pub params: NoiseParams,
}

impl Transcriber for NoisyChannel {
    fn transcribe(&self, clip: &AudioClip, stream_pos: u64) -> Result<String, TranscriberError> {
        let text = clip.spoken_text.as_deref().ok_or_else(|| TranscriberError::NoSpokenText(clip.locator.clone()))?;
        transcribe(text, &self.params.scaled(clip.difficulty), stream_pos)
    }
}

impl TranscriberSource for LearningCurve {
    fn transcriber_after(&self, retained_hours: f64) -> Box<dyn Transcriber> {
        Box::new(NoisyChannel { params: improved_params(self, retained_hours) })
    }
}

/// A fixed transcriber that never improves.
impl TranscriberSource for NoiseParams {
    fn transcriber_after(&self, _retained_hours: f64) -> Box<dyn Transcriber> {
        Box::new(NoisyChannel { params: self.clone() })
    }
}
