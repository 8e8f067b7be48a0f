use std::cmp::Ordering;

use corpusalign_core::aligner::{align_session, SpanMatch};
use corpusalign_core::segmenter::SegmenterParams;
use corpusalign_core::sim_transcriber::{transcribe, NoiseParams};
use corpusalign_core::synth::{planted_case, SessionSpec, SynthSession, Vocabulary};
use corpusalign_core::{align_coarse_to_fine, align_exhaustive, AlignParams, SearchMode, TranscriptDoc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dp(a: &[char], b: &[char]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = (prev[j] + usize::from(x != y)).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Every (offset, length) candidate scored from scratch; lowest rate wins,
/// then earliest offset, then shortest span.
fn brute_force(hyp: &str, doc: &str, params: &AlignParams) -> Option<(usize, usize, usize)> {
    let h: Vec<char> = hyp.chars().collect();
    let d: Vec<char> = doc.chars().collect();
    let (lo, hi) = params.span_len_range(h.len());
    let mut best: Option<(usize, usize, usize)> = None;
    for off in 0..d.len() {
        for len in lo..=hi.min(d.len() - off) {
            let ed = dp(&h, &d[off..off + len]);
            let better = match best {
                None => true,
                Some((_, blen, bed)) => (ed * blen).cmp(&(bed * len)) == Ordering::Less,
            };
            if better {
                best = Some((off, len, ed));
            }
        }
    }
    best
}

fn random_text(rng: &mut impl Rng, alphabet: &[char], len: std::ops::Range<usize>) -> String {
    let len = rng.gen_range(len);
    (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
}

#[test]
fn exhaustive_matches_brute_force() {
    let params = AlignParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let alphabet = ['a', 'b', 'c', ' '];
    for case in 0..300 {
        let doc = random_text(&mut rng, &alphabet, 1..80);
        let hyp = random_text(&mut rng, &alphabet, 1..20);
        let oracle = brute_force(&hyp, &doc, &params);
        let d = TranscriptDoc::new("d", doc.clone(), None).unwrap();
        match (oracle, align_exhaustive(&hyp, &d, &params)) {
            (Some((off, len, ed)), Ok(r)) => {
                assert_eq!((r.best.span_offset, r.best.span_len, r.best.cer.edit_distance), (off, len, ed), "case {case}: {hyp:?} in {doc:?}");
                assert_eq!(r.best.retained, (ed as f64 / len as f64) < 0.3);
            }
            (None, Err(_)) => {}
            (o, r) => panic!("case {case}: oracle {o:?} vs {r:?}"),
        }
    }
}

#[test]
fn coarse_never_beats_the_oracle() {
    let params = AlignParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for case in 0..100 {
        let doc = random_text(&mut rng, &['a', 'b', 'c', 'd', ' '], 40..300);
        let hyp = random_text(&mut rng, &['a', 'b', 'c', 'd', ' '], 5..25);
        let d = TranscriptDoc::new("d", doc, None).unwrap();
        let (Ok(ex), Ok(cf)) = (align_exhaustive(&hyp, &d, &params), align_coarse_to_fine(&hyp, &d, &params)) else {
            continue;
        };
        assert_ne!(cf.best.cer.cmp_rate(&ex.best.cer), Ordering::Less, "case {case}");
    }
}

fn both(hyp: &str, doc: &TranscriptDoc) -> (SpanMatch, SpanMatch) {
    let p = AlignParams::default();
    (align_exhaustive(hyp, doc, &p).unwrap().best, align_coarse_to_fine(hyp, doc, &p).unwrap().best)
}

#[test]
fn exact_substring_at_offset_100() {
    let vocab = Vocabulary::generate(3, 400);
    let text = vocab.text(&mut ChaCha8Rng::seed_from_u64(3), 2000);
    let doc = TranscriptDoc::new("d", text.clone(), None).unwrap();
    let hyp: String = text.chars().skip(100).take(120).collect();
    let (ex, cf) = both(&hyp, &doc);
    assert_eq!(ex, cf);
    assert_eq!((ex.span_offset, ex.cer.edit_distance, ex.retained), (100, 0, true));
}

#[test]
fn disjoint_alphabet_never_retained() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let doc = TranscriptDoc::new("d", random_text(&mut rng, &['a', 'b', 'c', ' '], 3000..3001), None).unwrap();
    let hyp = random_text(&mut rng, &['x', 'y', 'z'], 50..51);
    let (ex, cf) = both(&hyp, &doc);
    assert_eq!(ex, cf);
    assert!(ex.cer.value() >= 1.0 && !ex.retained);
}

#[test]
fn planted_passage_recovered() {
    for seed in 0..20 {
        let case = planted_case(seed, 5000, 200, 0.1);
        let doc = TranscriptDoc::new("d", case.doc, None).unwrap();
        let (ex, cf) = both(&case.hyp, &doc);
        for m in [ex, cf] {
            let lo = m.span_offset.max(case.offset);
            let hi = (m.span_offset + m.span_len).min(case.offset + case.len);
            assert!(m.retained, "seed {seed}");
            assert!(hi.saturating_sub(lo) as f64 >= 0.9 * case.len as f64, "seed {seed}: {m:?} vs {}+{}", case.offset, case.len);
        }
    }
}

#[test]
fn duplicated_passages_resolve_to_either_copy() {
    let vocab = Vocabulary::generate(5, 600);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let passage = vocab.text(&mut rng, 150);
    let mut variant: Vec<char> = passage.chars().collect();
    variant[40] = 'q';
    let variant: String = variant.into_iter().collect();
    let doc_text = format!("{} {} {} {} {}", vocab.text(&mut rng, 3000), passage, vocab.text(&mut rng, 2500), variant, vocab.text(&mut rng, 1000));
    let doc = TranscriptDoc::new("d", doc_text.clone(), None).unwrap();
    let first = doc_text.find(&passage).unwrap();
    let second = doc_text.find(&variant).unwrap();
    for seed in 0..10 {
        let hyp = transcribe(&passage, &NoiseParams::with_total(0.1, seed), 0).unwrap();
        let (ex, cf) = both(&hyp, &doc);
        assert!((cf.cer.value() - ex.cer.value()).abs() <= 0.01, "seed {seed}");
        let near = |o: usize, at: usize| o.abs_diff(at) <= 20;
        assert!(near(cf.span_offset, first) || near(cf.span_offset, second), "seed {seed}: {cf:?}");
    }
}

fn session_retention(noise: f64) -> (usize, f64) {
    let vocab = Vocabulary::generate(8, 2000);
    let session = SynthSession::generate("s", 8, &SessionSpec { minutes: 45.0, ..SessionSpec::default() }, &vocab);
    let pool = session.pool(&SegmenterParams::default(), 0);
    assert!(pool.len() >= 100);
    let hyps: Vec<_> = pool
        .iter()
        .take(100)
        .map(|p| {
            let text = p.clip.spoken_text.as_deref().unwrap();
            (p.segment.clone(), transcribe(text, &NoiseParams::with_total(noise, 8), p.stream_pos).unwrap())
        })
        .collect();
    let out = align_session(&hyps, &session.doc(), &AlignParams::default(), SearchMode::FullDoc, 1).unwrap();
    (out.yield_.retained, out.yield_.retention_rate)
}

#[test]
fn retention_falls_with_noise() {
    let sweep: Vec<(usize, f64)> = [0.0, 0.1, 0.2, 0.3, 0.5].iter().map(|&n| session_retention(n)).collect();
    assert!(sweep[4].1 < sweep[1].1, "{sweep:?}");
    assert!(sweep.windows(2).all(|w| w[0].0 >= w[1].0), "{sweep:?}");
}

#[test]
fn labels_come_from_transcript_spans() {
    let vocab = Vocabulary::generate(9, 500);
    let session = SynthSession::generate("s", 9, &SessionSpec { minutes: 4.0, ..SessionSpec::default() }, &vocab);
    let doc = session.doc();
    let hyps: Vec<_> = session
        .pool(&SegmenterParams::default(), 0)
        .into_iter()
        .map(|p| (p.segment, transcribe(p.clip.spoken_text.as_deref().unwrap(), &NoiseParams::with_total(0.2, 9), p.stream_pos).unwrap()))
        .collect();
    let out = align_session(&hyps, &doc, &AlignParams::default(), SearchMode::FullDoc, 2).unwrap();
    for m in &out.matches {
        let label = doc.span_text(m.span_offset, m.span_len);
        assert_eq!(label.chars().count(), m.ref_len);
        let hyp = &hyps.iter().find(|h| h.0.index == m.index).unwrap().1;
        assert_eq!(corpusalign_core::levenshtein(hyp, &label), m.edit_distance);
    }
}
