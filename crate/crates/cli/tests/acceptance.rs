//! Acceptance suite. Runs every criterion in sequence (so runtime budgets are
//! measured without other tests competing for the CPU), prints one PASS/FAIL
//! line per criterion and exits non-zero if any fails.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use corpusalign_core::aligner::{exhaustive_candidate_count, SearchMode};
use corpusalign_core::manifest::{filter, split, ManifestRecord, Predicate, SplitParams};
use corpusalign_core::metrics::{banded_levenshtein, levenshtein};
use corpusalign_core::segmenter::{segment_session, DropReason, SegmenterParams, SpeechRegion};
use corpusalign_core::sim_transcriber::{transcribe, LearningCurve, NoiseParams};
use corpusalign_core::synth::{planted_case, SessionSpec, SynthPool, Vocabulary};
use corpusalign_core::{align_coarse_to_fine, align_exhaustive, refine, AlignParams, CerValue, RefineConfig, TranscriptDoc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// criterion 1
const C1_PAIRS: usize = 1_000;
const C1_BUDGET: Duration = Duration::from_secs(5);
// criterion 2
const C2_CASES: u64 = 500;
const C2_MIN_AGREEMENT: f64 = 0.99;
const C2_MAX_CER_GAP: f64 = 0.01;
const C2_BUDGET: Duration = Duration::from_secs(120);
// criterion 3
const C3_CASES: u64 = 1_000;
const C3_NOISE: f64 = 0.10;
const C3_MIN_RETAINED: f64 = 0.99;
const C3_MIN_OVERLAP: f64 = 0.90;
// criterion 4
const C4_SESSIONS: u64 = 10_000;
const C4_EPS: f64 = 1e-9;
// criterion 5
const C5_POOL_HOURS: f64 = 200.0;
const C5_SWEEP: [f64; 3] = [0.10, 0.25, 0.45];
const C5_BUDGET: Duration = Duration::from_secs(300);
// criterion 6
const C6_RATE: f64 = 0.10;
const C6_TOLERANCE: f64 = 0.02;
const C6_MIN_CHARS: usize = 100_000;
// criterion 7
const C7_THRESHOLD: f64 = 0.3;
// criterion 9
const C9_DOC_CHARS: usize = 1_000_000;
const C9_HYPOTHESES: usize = 200;
const C9_MAX_CANDIDATE_SHARE: f64 = 0.10;
const C9_BUDGET: Duration = Duration::from_secs(60);

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Full dynamic-programming table, no shortcuts.
fn dp_levenshtein(a: &[char], b: &[char]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in t.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        t[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = t[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            t[i][j] = sub.min(t[i - 1][j] + 1).min(t[i][j - 1] + 1);
        }
    }
    t[a.len()][b.len()]
}

fn random_string(rng: &mut impl Rng, alphabet: &[char], max_len: usize) -> String {
    let n = rng.gen_range(0..=max_len);
    (0..n).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let alphabet = ['a', 'c', 'g', 't'];
    let mut mismatches = 0;
    for _ in 0..C1_PAIRS {
        let a = random_string(&mut rng, &alphabet, 20);
        let b = random_string(&mut rng, &alphabet, 20);
        let (ac, bc): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        let d = dp_levenshtein(&ac, &bc);
        if levenshtein(&a, &b) != d {
            mismatches += 1;
        }
        for band in 1..=21 {
            let expect = (d <= band).then_some(d);
            if banded_levenshtein(&a, &b, band) != expect {
                mismatches += 1;
            }
        }
    }
    let named = [
        levenshtein("", "") == 0,
        levenshtein("abc", "abc") == 0,
        levenshtein("kitten", "sitting") == 3,
        banded_levenshtein("abc", "abc", 1) == Some(0),
        banded_levenshtein("kitten", "sitting", 3) == Some(3),
        banded_levenshtein("kitten", "sitting", 2).is_none(),
    ];
    let elapsed = start.elapsed();
    check(
        mismatches == 0 && named.iter().all(|&x| x) && elapsed < C1_BUDGET,
        format!("{mismatches} mismatches over {C1_PAIRS} pairs x 22 checks, named examples ok={}, {elapsed:.2?}", named.iter().all(|&x| x)),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let params = AlignParams::default();
    let (mut agree, mut both, mut max_gap) = (0u64, 0u64, 0.0f64);
    for i in 0..C2_CASES {
        let noise = [0.0, 0.1, 0.25][(i % 3) as usize];
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
        let doc_len = rng.gen_range(500..=20_000);
        let hyp_len = rng.gen_range(20..=200);
        let case = planted_case(2000 + i, doc_len, hyp_len, noise);
        let doc = TranscriptDoc::new("c2", case.doc, None).expect("non-empty");
        let ex = align_exhaustive(&case.hyp, &doc, &params).expect("aligns");
        let cf = align_coarse_to_fine(&case.hyp, &doc, &params).expect("aligns");
        if ex.best.retained == cf.best.retained {
            agree += 1;
        }
        if ex.best.retained && cf.best.retained {
            both += 1;
            max_gap = max_gap.max((ex.best.cer.value() - cf.best.cer.value()).abs());
        }
    }
    let elapsed = start.elapsed();
    let rate = agree as f64 / C2_CASES as f64;
    check(
        rate >= C2_MIN_AGREEMENT && max_gap <= C2_MAX_CER_GAP && elapsed < C2_BUDGET,
        format!("agreement {agree}/{C2_CASES} ({rate:.3}), max CER gap {max_gap:.4} over {both} co-retained, {elapsed:.2?}"),
    )
}

fn criterion_3() -> Outcome {
    let params = AlignParams::default();
    let (mut retained, mut covered, mut planted) = (0u64, 0usize, 0usize);
    for i in 0..C3_CASES {
        let mut rng = ChaCha8Rng::seed_from_u64(30_000 + i);
        let span = rng.gen_range(60..=250);
        let case = planted_case(31_000 + i, 5_000, span, C3_NOISE);
        let doc = TranscriptDoc::new("c3", case.doc, None).expect("non-empty");
        let r = align_coarse_to_fine(&case.hyp, &doc, &params).expect("aligns").best;
        if r.retained {
            retained += 1;
        }
        let lo = r.span_offset.max(case.offset);
        let hi = (r.span_offset + r.span_len).min(case.offset + case.len);
        covered += hi.saturating_sub(lo);
        planted += case.len;
    }
    let rate = retained as f64 / C3_CASES as f64;
    let overlap = covered as f64 / planted as f64;
    check(
        rate >= C3_MIN_RETAINED && overlap >= C3_MIN_OVERLAP,
        format!("retained {retained}/{C3_CASES} ({rate:.3}), planted-character overlap {overlap:.4}"),
    )
}

fn random_layout(rng: &mut impl Rng) -> Vec<SpeechRegion> {
    let n = rng.gen_range(1..=40);
    let mut t = rng.gen_range(0.0..5.0);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let dur = match rng.gen_range(0..4) {
            0 => rng.gen_range(0.05..3.0),
            1 => rng.gen_range(3.0..12.0),
            2 => rng.gen_range(12.0..35.0),
            _ => rng.gen_range(35.0..90.0),
        };
        let start = (t * 1000.0_f64).round() / 1000.0;
        let end = ((t + dur) * 1000.0_f64).round() / 1000.0;
        out.push(SpeechRegion::new(start, end.max(start + 0.001)));
        let gap = match rng.gen_range(0..3) {
            0 => rng.gen_range(0.01..0.3),
            1 => rng.gen_range(0.3..1.0),
            _ => rng.gen_range(1.0..6.0),
        };
        t = end + gap;
    }
    out
}

/// Length of `[a, b]` covered by the union of `spans`.
fn covered(a: f64, b: f64, spans: &[(f64, f64)]) -> f64 {
    spans.iter().map(|&(s, e)| (e.min(b) - s.max(a)).max(0.0)).sum()
}

fn criterion_4() -> Outcome {
    let p = SegmenterParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut problems: Vec<String> = Vec::new();
    let (mut segments, mut forced, mut drops) = (0usize, 0usize, 0usize);
    for s in 0..C4_SESSIONS {
        // every fourth session has no usable silence at all
        let silence_free = s % 4 == 0;
        let regions = if silence_free {
            let len = rng.gen_range(3.0..200.0_f64);
            let pieces = rng.gen_range(1..=5);
            let mut v = Vec::new();
            let mut t = 0.0;
            for _ in 0..pieces {
                let end = t + len / pieces as f64;
                v.push(SpeechRegion::new(t, end));
                t = end + rng.gen_range(0.0..0.29);
            }
            v
        } else {
            random_layout(&mut rng)
        };
        let seg = segment_session("s", &regions, &p).expect("valid layout");
        segments += seg.segments.len();
        drops += seg.dropped.len();
        for x in &seg.segments {
            if !(x.duration >= p.min_dur - C4_EPS && x.duration <= p.max_dur + C4_EPS) {
                problems.push(format!("session {s}: segment duration {}", x.duration));
            }
        }
        if silence_free {
            let total = regions.last().unwrap().end - regions[0].start;
            let n = seg.segments.len();
            for (i, x) in seg.segments.iter().enumerate() {
                let last = i + 1 == n;
                if !last && (x.duration - p.max_dur).abs() > C4_EPS {
                    problems.push(format!("session {s}: forced cut of {} s", x.duration));
                }
                if !last || (total > p.max_dur && (x.duration - p.max_dur).abs() <= C4_EPS) {
                    forced += 1;
                }
            }
        }

        // drops versus independently computed unmergeable short spans
        let mut groups: Vec<(f64, f64)> = Vec::new();
        for r in &regions {
            match groups.last_mut() {
                Some(g) if r.start - g.1 <= p.merge_gap => g.1 = r.end,
                _ => groups.push((r.start, r.end)),
            }
        }
        let short: Vec<(f64, f64)> = groups.iter().copied().filter(|g| g.1 - g.0 < p.min_dur).collect();
        let short_drops: Vec<(f64, f64)> =
            seg.dropped.iter().filter(|d| d.reason == DropReason::ShortRegion).map(|d| (d.start, d.end)).collect();
        if short != short_drops {
            problems.push(format!("session {s}: short groups {short:?} vs drops {short_drops:?}"));
        }
        let spans: Vec<(f64, f64)> = seg.segments.iter().map(|x| (x.start, x.end)).collect();
        for d in seg.dropped.iter().filter(|d| d.reason == DropReason::Residue) {
            let prev = spans.iter().rev().find(|x| x.1 <= d.start + C4_EPS);
            let mergeable = prev.is_some_and(|pv| d.end - pv.0 <= p.max_dur && d.start - pv.1 <= p.merge_gap);
            if d.end - d.start >= p.min_dur || mergeable {
                problems.push(format!("session {s}: residue [{}, {}] is not an unmergeable sub-{} s span", d.start, d.end, p.min_dur));
            }
        }
        // nothing else is lost: every speech second is in a segment or a drop
        let dropped: Vec<(f64, f64)> = seg.dropped.iter().map(|d| (d.start, d.end)).collect();
        for r in &regions {
            let kept = covered(r.start, r.end, &spans) + covered(r.start, r.end, &dropped);
            if kept + 1e-6 < r.duration() {
                problems.push(format!("session {s}: region [{}, {}] only {kept} s accounted", r.start, r.end));
            }
        }
    }
    let first = problems.first().cloned().unwrap_or_default();
    check(
        problems.is_empty(),
        format!("{C4_SESSIONS} sessions, {segments} segments, {forced} forced 30 s cuts, {drops} drops, {} violations {first}", problems.len()),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let spec = SessionSpec { minutes: 10.0, chars_per_second: 8.0, divergence: (0.0, 0.15), difficulty: (0.5, 1.5), long_pause_prob: 0.1 };
    let pool = SynthPool::generate(55, C5_POOL_HOURS, &spec, &SegmenterParams::default());
    let docs = pool.docs();
    let config = RefineConfig { max_passes: 3, min_relative_gain: f64::NEG_INFINITY, ..RefineConfig::default() };
    let mut rows = Vec::new();
    for noise in C5_SWEEP {
        let curve = LearningCurve { initial_rates: NoiseParams::with_total(noise, 5), floor_rate: 0.05, halving_hours: 20.0 };
        let out = refine(&pool.pool, &docs, &curve, &config).map_err(|e| e.to_string())?;
        let r = &out.reports;
        if r.len() != 3 {
            return Err(format!("noise {noise}: {} passes run", r.len()));
        }
        rows.push((noise, r[0].retained_hours, r[1].retained_hours, r[1].relative_gain, r[2].relative_gain));
    }
    let elapsed = start.elapsed();
    let a = rows.iter().filter(|r| r.0 >= 0.25).all(|r| r.2 > r.1);
    let g2: Vec<f64> = rows.iter().map(|r| r.3.unwrap_or(f64::INFINITY)).collect();
    let b = g2.windows(2).all(|w| w[0] <= w[1]);
    let c = rows.iter().all(|r| matches!((r.3, r.4), (Some(g2), Some(g3)) if g3 < g2));
    let table: Vec<String> = rows
        .iter()
        .map(|r| format!("noise {:.2}: {:.1} h -> {:.1} h, gain2 {:+.3}, gain3 {:+.3}", r.0, r.1, r.2, r.3.unwrap_or(f64::NAN), r.4.unwrap_or(f64::NAN)))
        .collect();
    check(
        pool.hours() >= C5_POOL_HOURS && a && b && c && elapsed < C5_BUDGET,
        format!("pool {:.1} h; (a) {a} (b) {b} (c) {c}; {}; {elapsed:.2?}", pool.hours(), table.join("; ")),
    )
}

fn criterion_6() -> Outcome {
    let vocab = Vocabulary::generate(6, 2000);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let params = NoiseParams::with_total(C6_RATE, 6);
    let (mut edits, mut chars, mut pos) = (0usize, 0usize, 0u64);
    while chars < C6_MIN_CHARS {
        let text = vocab.text(&mut rng, 1_000);
        let hyp = transcribe(&text, &params, pos).map_err(|e| e.to_string())?;
        edits += levenshtein(&hyp, &text);
        chars += text.chars().count();
        pos += 1;
    }
    let cer = edits as f64 / chars as f64;
    check((cer - C6_RATE).abs() <= C6_TOLERANCE, format!("empirical CER {cer:.4} over {chars} chars (target {C6_RATE} +/- {C6_TOLERANCE})"))
}

fn record(session: &str, index: usize, edit_distance: usize, ref_len: usize) -> ManifestRecord {
    ManifestRecord {
        audio_ref: format!("{session}#{index}"),
        session_id: session.into(),
        segment_index: index,
        ground_truth: "x".repeat(ref_len),
        asr_hypothesis: String::new(),
        cer: CerValue { edit_distance, ref_len },
        retained: false,
        span_offset: 0,
        span_len: ref_len,
        language_code: "und".into(),
        duration: 5.0 + index as f64,
        source_id: "src".into(),
        session_date: None,
        quality_score: None,
        snr_db: None,
    }
}

fn criterion_7() -> Outcome {
    // (edit_distance, ref_len, expected to pass cer < 0.3)
    let cases = [
        (0, 5, true),
        (3, 10, false),
        (2, 7, true),
        (1, 3, false),
        (29, 100, true),
        (30, 100, false),
        (299_999, 1_000_000, true),
        (300_001, 1_000_000, false),
        (6, 20, false),
        (7, 10, false),
        (15, 10, false),
    ];
    let set: Vec<ManifestRecord> = cases.iter().enumerate().map(|(i, &(d, n, _))| record("s", i, d, n)).collect();
    let p = Predicate { max_cer: Some(C7_THRESHOLD), ..Predicate::default() };
    let kept: Vec<usize> = filter(&set, &p).iter().map(|r| r.segment_index).collect();
    let expected: Vec<usize> = cases.iter().enumerate().filter(|c| c.1 .2).map(|c| c.0).collect();
    let threshold_ok = kept == expected;

    let predicates = [
        p.clone(),
        Predicate { min_duration: Some(8.0), max_duration: Some(12.0), ..Predicate::default() },
        Predicate { language: Some("und".into()), max_cer: Some(0.1), ..Predicate::default() },
    ];
    let idempotent = predicates.iter().all(|q| {
        let once = filter(&set, q);
        filter(&once, q) == once
    });

    // 40 sessions of 1-5 segments each
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut records = Vec::new();
    for s in 0..40 {
        for i in 0..rng.gen_range(1..=5) {
            records.push(record(&format!("sess{s:02}"), i, 1, 10));
        }
    }
    let n = records.len();
    let sp = SplitParams { train_fraction: 0.95, seed: 11 };
    let a = split(&records, &sp).map_err(|e| e.to_string())?;
    let b = split(&records, &sp).map_err(|e| e.to_string())?;
    let deterministic = a == b;
    let train_refs: BTreeSet<&str> = a.train.iter().map(|r| r.audio_ref.as_str()).collect();
    let disjoint = a.test.iter().all(|r| !train_refs.contains(r.audio_ref.as_str())) && a.train.len() + a.test.len() == n;
    let train_sessions: BTreeSet<&str> = a.train.iter().map(|r| r.session_id.as_str()).collect();
    let atomic = a.test.iter().all(|r| !train_sessions.contains(r.session_id.as_str()));
    let want_train = (n as f64 * 0.95).round() as usize;
    let sizes = a.exact && a.train.len() == want_train && a.test.len() == n - want_train;
    check(
        threshold_ok && idempotent && deterministic && disjoint && atomic && sizes,
        format!(
            "threshold filter {threshold_ok}, idempotent {idempotent}, split of {n}: train {} test {} (want {want_train}/{}), deterministic {deterministic}, disjoint {disjoint}, session-atomic {atomic}",
            a.train.len(),
            a.test.len(),
            n - want_train
        ),
    )
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).ancestors().nth(2).expect("workspace root").to_path_buf()
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_corpusalign"))
        .args(args)
        .current_dir(workspace_root())
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(())
}

/// Stage outputs by file name; the recorded config is compared without the
/// fields that legitimately differ between runs.
fn stage_files(dir: &Path) -> Result<HashMap<String, Vec<u8>>, String> {
    let mut out = HashMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let mut bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
        if name == "config.json" {
            let mut v: serde_json::Value = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
            v["workers"] = serde_json::Value::Null;
            v["paths"]["output_dir"] = serde_json::Value::Null;
            bytes = v.to_string().into_bytes();
        }
        out.insert(name, bytes);
    }
    Ok(out)
}

fn criterion_8() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fx = "fixtures/synth30";
    let mut runs = Vec::new();
    for workers in ["1", "4", "8"] {
        let out = tmp.path().join(format!("w{workers}"));
        let out_s = out.to_str().unwrap();
        run_cli(&[
            "align",
            "--seed", "42",
            "--workers", workers,
            "--segments", &format!("{fx}/golden/segments.jsonl"),
            "--hypotheses", &format!("{fx}/hypotheses.jsonl"),
            "--transcripts", &format!("{fx}/transcripts"),
            "--pairs", &format!("{fx}/golden/pairs.jsonl"),
            "--audio-meta", &format!("{fx}/audio_meta.jsonl"),
            "--out", out_s,
        ])?;
        run_cli(&[
            "refine",
            "--seed", "42",
            "--workers", workers,
            "--pool", &format!("{fx}/pool.jsonl"),
            "--transcripts", &format!("{fx}/transcripts"),
            "--out", out_s,
        ])?;
        runs.push((stage_files(&out.join("align"))?, stage_files(&out.join("refine"))?));
    }
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    let golden = std::fs::read(workspace_root().join(fx).join("golden/matches.jsonl")).map_err(|e| e.to_string())?;
    let matches_golden = runs[0].0.get("matches.jsonl") == Some(&golden);
    let files = runs[0].0.len() + runs[0].1.len();
    check(
        identical && matches_golden,
        format!("align+refine outputs ({files} files) identical across workers 1/4/8: {identical}; matches equal exhaustive golden file: {matches_golden}"),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let vocab = Vocabulary::generate(9, 3000);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let text: Vec<char> = vocab.text(&mut rng, C9_DOC_CHARS).chars().take(C9_DOC_CHARS).collect();
    let doc = TranscriptDoc::new("c9", text.iter().collect::<String>(), None).expect("non-empty");
    let params = AlignParams::default();
    let (mut evaluated, mut exhaustive, mut retained) = (0u64, 0u64, 0usize);
    for i in 0..C9_HYPOTHESES {
        // roughly 15 s of speech
        let len = rng.gen_range(150..=210);
        let offset = rng.gen_range(0..text.len() - len);
        let passage: String = text[offset..offset + len].iter().collect();
        let hyp = transcribe(&passage, &NoiseParams::with_total(0.1, i as u64), 0).map_err(|e| e.to_string())?;
        let r = align_coarse_to_fine(&hyp, &doc, &params).map_err(|e| e.to_string())?;
        retained += usize::from(r.best.retained);
        evaluated += r.candidates_evaluated;
        exhaustive += exhaustive_candidate_count(hyp.chars().count(), &doc, &params, SearchMode::FullDoc);
    }
    let elapsed = start.elapsed();
    let share = evaluated as f64 / exhaustive as f64;
    check(
        share <= C9_MAX_CANDIDATE_SHARE && elapsed < C9_BUDGET,
        format!("{C9_HYPOTHESES} hypotheses on {C9_DOC_CHARS} chars: {share:.4} of exhaustive candidates ({evaluated} / {exhaustive}), {retained} retained, {elapsed:.2?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("metric oracle", criterion_1),
        ("alignment oracle equivalence", criterion_2),
        ("planted-span recovery", criterion_3),
        ("segmentation invariants", criterion_4),
        ("refinement dynamics", criterion_5),
        ("channel calibration", criterion_6),
        ("manifest laws", criterion_7),
        ("determinism", criterion_8),
        ("performance smoke", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
