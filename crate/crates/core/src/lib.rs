//! Corpus construction for long-form speech: segmentation of voice-activity
//! regions, CER-driven alignment of ASR hypotheses against long human
//! transcripts, audio/transcript pairing, iterative alignment refinement and
//! dataset manifests.

pub mod aligner;
pub mod bitpar;
pub mod io;
pub mod manifest;
pub mod metrics;
pub mod pairing;
pub mod parallel;
pub mod refinement;
pub mod segmenter;
pub mod sim_transcriber;
pub mod synth;
pub mod text_norm;

pub use aligner::{
    align_coarse_to_fine, align_exhaustive, align_session, AlignError, AlignParams, AlignmentMatch, SearchMethod,
    SearchMode, SessionYield, SpanMatch, TranscriptDoc,
};
pub use manifest::{filter, split, stats, ManifestRecord, Predicate, SplitParams};
pub use metrics::{banded_levenshtein, cer, levenshtein, CerValue};
pub use pairing::{pair_score, pair_sessions, validate_pair, PairCandidate, PairWeights, SessionMeta};
pub use refinement::{refine, run_pass, PassReport, PoolSegment, RefineConfig};
pub use segmenter::{segment_session, Segment, SegmenterParams, SpeechRegion};
pub use sim_transcriber::{improved_params, transcribe, LearningCurve, NoiseParams, Transcriber, TranscriberSource};
pub use text_norm::{normalize, NormRuleSet, Normalizer};
