//! Seeded synthetic corpora for tests, fixtures and simulation runs.
//!
//! A synthetic session is a timeline of speech regions, each carrying the
//! text spoken in it, plus a human transcript that renders those words with
//! per-utterance editorial divergence and some unspoken material (headers,
//! speaker labels). Everything is a pure function of the seed.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aligner::TranscriptDoc;
use crate::refinement::PoolSegment;
use crate::segmenter::{segment_session, Segment, SegmenterParams, SpeechRegion};
use crate::sim_transcriber::{transcribe, AudioClip, NoiseParams};

const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";

/// A fixed list of pseudo-words drawn with Zipf-like frequencies, shorter
/// words being the more frequent ones.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    words: Vec<String>,
}

impl Vocabulary {
    pub fn generate(seed: u64, size: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut words: Vec<String> = (0..size.max(1))
            .map(|_| {
                let len = rng.gen_range(2..=9);
                (0..len).map(|_| LETTERS[rng.gen_range(0..LETTERS.len())] as char).collect()
            })
            .collect();
        words.sort_by_key(|w| w.len());
        Self { words }
    }

    /// Words joined by spaces until at least `chars` characters.
    pub fn text(&self, rng: &mut impl Rng, chars: usize) -> String {
        let mut out = String::with_capacity(chars + 10);
        while out.len() < chars.max(1) {
            if !out.is_empty() {
                out.push(' ');
            }
            // log-uniform rank: P(rank r) roughly proportional to 1 / r
            let n = self.words.len() as f64;
            let rank = ((n + 1.0).powf(rng.gen::<f64>()) - 1.0) as usize;
            out.push_str(&self.words[rank.min(self.words.len() - 1)]);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedCase {
    pub doc: String,
    pub hyp: String,
    /// Character offset and length of the passage the hypothesis was made from.
    pub offset: usize,
    pub len: usize,
}

/// A random transcript with one passage re-transcribed through the noisy channel.
pub fn planted_case(seed: u64, doc_chars: usize, span_chars: usize, noise: f64) -> PlantedCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = Vocabulary::generate(seed ^ 0x9e37_79b9_7f4a_7c15, 800);
    let doc: Vec<char> = vocab.text(&mut rng, doc_chars).chars().take(doc_chars).collect();
    let len = span_chars.min(doc.len());
    let offset = rng.gen_range(0..=doc.len() - len);
    let passage: String = doc[offset..offset + len].iter().collect();
    let mut hyp = transcribe(&passage, &NoiseParams::with_total(noise, seed), 0).expect("valid channel");
    if hyp.is_empty() {
        hyp = passage.chars().take(1).collect();
    }
    PlantedCase { doc: doc.into_iter().collect(), hyp, offset, len }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpokenRegion {
    pub region: SpeechRegion,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionSpec {
    pub minutes: f64,
    pub chars_per_second: f64,
    /// Per-utterance human-transcript divergence, drawn uniformly from this range.
    pub divergence: (f64, f64),
    /// Per-utterance acoustic difficulty multiplier range.
    pub difficulty: (f64, f64),
    /// Probability of a long (> merge gap) pause between utterances.
    pub long_pause_prob: f64,
}

impl Default for SessionSpec {
    fn default() -> Self {
        Self { minutes: 10.0, chars_per_second: 12.0, divergence: (0.0, 0.0), difficulty: (1.0, 1.0), long_pause_prob: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSession {
    pub session_id: String,
    pub regions: Vec<SpokenRegion>,
    /// Difficulty per region, aligned with `regions`.
    pub difficulty: Vec<f64>,
    pub transcript: String,
}

impl SynthSession {
    pub fn generate(session_id: &str, seed: u64, spec: &SessionSpec, vocab: &Vocabulary) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = spec.minutes * 60.0;
        let mut regions = Vec::new();
        let mut difficulty = Vec::new();
        let mut transcript_parts = vec![format!("sitting {}", vocab.text(&mut rng, 20))];
        let mut t = rng.gen_range(0.2..1.5);
        let mut utterance = 0u64;
        while t < total {
            let dur: f64 = if rng.gen_bool(0.08) { rng.gen_range(0.8..2.8) } else { rng.gen_range(3.0..24.0) };
            let pieces = rng.gen_range(1..=3);
            let diff = rng.gen_range(spec.difficulty.0..=spec.difficulty.1);
            let delta = rng.gen_range(spec.divergence.0..=spec.divergence.1);
            let mut spoken = Vec::new();
            for p in 0..pieces {
                let d = dur / pieces as f64;
                let start = round_ms(t);
                let end = round_ms(t + d);
                let text = vocab.text(&mut rng, ((end - start) * spec.chars_per_second).round().max(2.0) as usize);
                spoken.push(text.clone());
                regions.push(SpokenRegion { region: SpeechRegion::new(start, end), text });
                difficulty.push(diff);
                t = end;
                if p + 1 < pieces {
                    t += rng.gen_range(0.05..0.25);
                }
            }
            let human = spoken.join(" ");
            let human = if delta > 0.0 {
                transcribe(&human, &NoiseParams::with_total(delta, seed ^ 0xd1f), utterance).expect("valid channel")
            } else {
                human
            };
            if rng.gen_bool(0.2) {
                transcript_parts.push(format!("speaker {}", vocab.text(&mut rng, 6)));
            }
            transcript_parts.push(human);
            utterance += 1;
            t += if rng.gen_bool(spec.long_pause_prob) { rng.gen_range(1.5..4.0) } else { rng.gen_range(0.35..0.95) };
        }
        let transcript = transcript_parts.join(" ").split_whitespace().collect::<Vec<_>>().join(" ");
        Self { session_id: session_id.to_string(), regions, difficulty, transcript }
    }

    pub fn speech_regions(&self) -> Vec<SpeechRegion> {
        self.regions.iter().map(|r| r.region).collect()
    }

    /// Words spoken within `[start, end]`; regions cut by a boundary contribute
    /// the proportional share of their characters.
    pub fn spoken_text(&self, start: f64, end: f64) -> String {
        let mut parts = Vec::new();
        for r in &self.regions {
            let (a, b) = (r.region.start.max(start), r.region.end.min(end));
            if b <= a {
                continue;
            }
            let chars: Vec<char> = r.text.chars().collect();
            let dur = r.region.duration();
            let lo = ((a - r.region.start) / dur * chars.len() as f64).round() as usize;
            let hi = ((b - r.region.start) / dur * chars.len() as f64).round() as usize;
            let piece: String = chars[lo.min(chars.len())..hi.min(chars.len())].iter().collect();
            if !piece.trim().is_empty() {
                parts.push(piece.trim().to_string());
            }
        }
        parts.join(" ")
    }

    /// Mean difficulty of the regions overlapping `[start, end]`.
    pub fn difficulty_of(&self, start: f64, end: f64) -> f64 {
        let (mut sum, mut n) = (0.0, 0);
        for (r, d) in self.regions.iter().zip(&self.difficulty) {
            if r.region.end > start && r.region.start < end {
                sum += d;
                n += 1;
            }
        }
        if n == 0 {
            1.0
        } else {
            sum / n as f64
        }
    }

    pub fn doc(&self) -> TranscriptDoc {
        TranscriptDoc::new(self.session_id.clone(), self.transcript.clone(), None).expect("non-empty transcript")
    }

    /// Segment with `params` and wrap each segment as a pool entry whose
    /// transcript is this session's.
    pub fn pool(&self, params: &SegmenterParams, stream_base: u64) -> Vec<PoolSegment> {
        let seg = segment_session(&self.session_id, &self.speech_regions(), params).expect("generated regions are valid");
        seg.segments
            .into_iter()
            .filter_map(|s: Segment| {
                let text = self.spoken_text(s.start, s.end);
                (!text.is_empty()).then(|| PoolSegment {
                    doc_id: self.session_id.clone(),
                    clip: AudioClip {
                        locator: format!("{}#{}", self.session_id, s.index),
                        spoken_text: Some(text),
                        difficulty: self.difficulty_of(s.start, s.end),
                    },
                    stream_pos: stream_base + s.index as u64,
                    segment: s,
                })
            })
            .collect()
    }
}

fn round_ms(t: f64) -> f64 {
    (t * 1000.0).round() / 1000.0
}

/// A multi-session pool with at least `hours` of segmented audio.
pub struct SynthPool {
    pub sessions: Vec<SynthSession>,
    pub pool: Vec<PoolSegment>,
}

impl SynthPool {
    pub fn generate(seed: u64, hours: f64, spec: &SessionSpec, params: &SegmenterParams) -> Self {
        let vocab = Vocabulary::generate(seed, 2000);
        let mut sessions = Vec::new();
        let mut pool = Vec::new();
        let mut seconds = 0.0;
        while seconds < hours * 3600.0 || sessions.is_empty() {
            let i = sessions.len();
            let s = SynthSession::generate(&format!("sess{i:04}"), seed.wrapping_add(1 + i as u64), spec, &vocab);
            let segs = s.pool(params, (i as u64) << 20);
            seconds += segs.iter().map(|p| p.segment.duration).sum::<f64>();
            pool.extend(segs);
            sessions.push(s);
        }
        Self { sessions, pool }
    }

    pub fn docs(&self) -> HashMap<String, TranscriptDoc> {
        self.sessions.iter().map(|s| (s.session_id.clone(), s.doc())).collect()
    }

    pub fn hours(&self) -> f64 {
        self.pool.iter().map(|p| p.segment.duration).sum::<f64>() / 3600.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_case_is_deterministic_and_consistent() {
        let a = planted_case(3, 2000, 150, 0.0);
        assert_eq!(a, planted_case(3, 2000, 150, 0.0));
        assert_eq!(a.doc.chars().count(), 2000);
        let passage: String = a.doc.chars().skip(a.offset).take(a.len).collect();
        assert_eq!(a.hyp, passage);
    }

    #[test]
    fn session_text_follows_timeline() {
        let vocab = Vocabulary::generate(1, 300);
        let s = SynthSession::generate("s", 5, &SessionSpec { minutes: 3.0, ..Default::default() }, &vocab);
        crate::segmenter::validate_regions(&s.speech_regions()).unwrap();
        let first = &s.regions[0];
        assert_eq!(s.spoken_text(first.region.start, first.region.end), first.text);
        // without divergence every spoken region appears verbatim in the transcript
        for r in &s.regions {
            assert!(s.transcript.contains(&r.text));
        }
    }
}
