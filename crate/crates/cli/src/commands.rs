use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use anyhow::{Context, Result};
use corpusalign_core::aligner::{align_session, Fragment, SessionYield, TranscriptDoc};
use corpusalign_core::io::read_jsonl;
use corpusalign_core::manifest::{filter, split, stats, ManifestRecord};
use corpusalign_core::pairing::{pair_sessions, validate_pair, MetaRecord, PairCandidate, PairError, SessionMeta};
use corpusalign_core::refinement::{refine, summary_table, PoolSegment, RefineConfig};
use corpusalign_core::segmenter::{segment_session, DropReason, Segment};
use corpusalign_core::sim_transcriber::{NoiseParams, NoisyChannel, Transcriber};
use corpusalign_core::synth::{SessionSpec, SynthSession, Vocabulary};
use corpusalign_core::text_norm::{NormRuleSet, Normalizer};
use corpusalign_core::CerValue;
use serde::Serialize;

use crate::config::{config, RunConfig};
use crate::inputs::{load_json_many, load_jsonl_many, load_transcripts, HypothesisRecord, RegionsFile, TranscriptFile};
use crate::stage::Stage;

fn rules(cfg: &RunConfig) -> Result<Option<Normalizer>> {
    let Some(path) = &cfg.paths.rules else { return Ok(None) };
    let set = NormRuleSet::load(path).map_err(config)?;
    Ok(Some(set.compile().map_err(config)?))
}

pub fn normalize(cfg: &RunConfig) -> Result<PathBuf> {
    let normalizer = match rules(cfg)? {
        Some(n) => n,
        None => NormRuleSet::empty(cfg.language_code.clone()).compile()?,
    };
    let input = cfg.require(&cfg.paths.input, "input")?;
    let text = std::fs::read_to_string(input).with_context(|| format!("cannot read {}", input.display()))?;
    let mut out = String::with_capacity(text.len());
    for (i, line) in text.lines().enumerate() {
        let norm = normalizer.normalize(line).with_context(|| format!("{}:{}", input.display(), i + 1))?;
        out.push_str(&norm);
        out.push('\n');
    }
    let name = input.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "normalized.txt".into());
    let stage = Stage::begin("normalize", cfg)?;
    stage.text(&name, &out)?;
    println!("normalize: {} lines -> {}", text.lines().count(), cfg.paths.output_dir.join("normalize").join(&name).display());
    stage.commit()
}

#[derive(Serialize)]
struct DroppedRecord<'a> {
    session_id: &'a str,
    start: f64,
    end: f64,
    reason: DropReason,
}

#[derive(Serialize)]
struct SegmentSummary {
    sessions: usize,
    segments: usize,
    dropped: usize,
    segment_seconds: f64,
}

pub fn segment(cfg: &RunConfig) -> Result<PathBuf> {
    let mut files: Vec<RegionsFile> = load_json_many(cfg.require(&cfg.paths.regions, "regions")?)?;
    files.sort_by(|a, b| a.session_id.cmp(&b.session_id));
    let mut segments = Vec::new();
    let mut dropped = Vec::new();
    for f in &files {
        let s = segment_session(&f.session_id, &f.regions, &cfg.segmenter)
            .with_context(|| format!("session `{}`", f.session_id))?;
        segments.extend(s.segments);
        dropped.extend(s.dropped.iter().map(|d| (f.session_id.as_str(), d.clone())));
    }
    let summary = SegmentSummary {
        sessions: files.len(),
        segments: segments.len(),
        dropped: dropped.len(),
        segment_seconds: segments.iter().map(|s| s.duration).sum(),
    };
    let dropped: Vec<DroppedRecord> = dropped
        .iter()
        .map(|(sid, d)| DroppedRecord { session_id: sid, start: d.start, end: d.end, reason: d.reason })
        .collect();
    let stage = Stage::begin("segment", cfg)?;
    stage.jsonl("segments.jsonl", &segments)?;
    stage.jsonl("dropped.jsonl", &dropped)?;
    stage.json("summary.json", &summary)?;
    println!(
        "segment: {} sessions, {} segments ({:.2} h), {} dropped",
        summary.sessions,
        summary.segments,
        summary.segment_seconds / 3600.0,
        summary.dropped
    );
    stage.commit()
}

fn metas(path: &std::path::Path, cfg: &RunConfig) -> Result<Vec<SessionMeta>> {
    let records: Vec<MetaRecord> = load_jsonl_many(path)?;
    records
        .iter()
        .map(|r| SessionMeta::from_record(r, &cfg.pairing.date_formats).with_context(|| format!("{}: `{}`", path.display(), r.id)))
        .collect()
}

fn hypotheses_by_session(cfg: &RunConfig) -> Result<BTreeMap<String, Vec<HypothesisRecord>>> {
    let mut out: BTreeMap<String, Vec<HypothesisRecord>> = BTreeMap::new();
    if let Some(path) = &cfg.paths.hypotheses {
        for h in load_jsonl_many::<HypothesisRecord>(path)? {
            out.entry(h.session_id.clone()).or_default().push(h);
        }
    }
    for hyps in out.values_mut() {
        hyps.sort_by_key(|h| h.index);
    }
    Ok(out)
}

pub fn pair(cfg: &RunConfig) -> Result<PathBuf> {
    let audio = metas(cfg.require(&cfg.paths.audio_meta, "audio_meta")?, cfg)?;
    let transcripts = metas(cfg.require(&cfg.paths.transcript_meta, "transcript_meta")?, cfg)?;
    let mut result = pair_sessions(&audio, &transcripts, &cfg.pairing.weights, cfg.pairing.accept_threshold);

    // vocabulary check when hypotheses and transcript texts are available
    if let (Some(_), Some(tpath)) = (&cfg.paths.hypotheses, &cfg.paths.transcripts) {
        let hyps = hypotheses_by_session(cfg)?;
        let texts = load_transcripts(tpath)?;
        for p in &mut result.pairs {
            let (Some(h), Some(t)) = (hyps.get(&p.audio_meta.id), texts.get(&p.transcript_meta.id)) else { continue };
            let sample: Vec<&str> = h.iter().take(cfg.pairing.sample_size).map(|h| h.text.as_str()).collect();
            let doc = TranscriptDoc::new(t.session_id.clone(), t.text.clone(), None)?;
            match validate_pair(&sample, &doc, cfg.pairing.min_overlap) {
                Ok(check) => p.apply_validation(check, cfg.pairing.accept_threshold),
                Err(PairError::Inconclusive) => p.validated = false,
                Err(e) => return Err(e.into()),
            }
        }
    }
    let stage = Stage::begin("pair", cfg)?;
    stage.jsonl("pairs.jsonl", &result.pairs)?;
    stage.json("unpaired.json", &serde_json::json!({
        "audio": result.unpaired_audio,
        "transcripts": result.unpaired_transcripts,
    }))?;
    println!(
        "pair: {} pairs, {} audio and {} transcripts unpaired",
        result.pairs.len(),
        result.unpaired_audio.len(),
        result.unpaired_transcripts.len()
    );
    stage.commit()
}

/// Audio session id to transcript id. Pairs that failed the vocabulary
/// check are left out; without a pairs file ids must coincide.
fn pairing_map(cfg: &RunConfig) -> Result<Option<HashMap<String, String>>> {
    let Some(path) = &cfg.paths.pairs else { return Ok(None) };
    let pairs: Vec<PairCandidate> = read_jsonl(path)?;
    Ok(Some(
        pairs
            .into_iter()
            .filter(|p| p.validated || p.overlap.is_none())
            .map(|p| (p.audio_meta.id, p.transcript_meta.id))
            .collect(),
    ))
}

/// Build the searchable document, normalizing fragment by fragment so that
/// fragment boundaries survive.
fn transcript_doc(session_id: &str, t: &TranscriptFile, norm: Option<&Normalizer>) -> Result<TranscriptDoc> {
    let Some(n) = norm else {
        return Ok(TranscriptDoc::new(session_id.to_string(), t.text.clone(), t.fragments.clone())?);
    };
    match &t.fragments {
        None => Ok(TranscriptDoc::new(session_id.to_string(), n.normalize(&t.text)?, None)?),
        Some(frags) => {
            let chars: Vec<char> = t.text.chars().collect();
            let mut text = String::new();
            let mut out = Vec::new();
            let mut offset = 0;
            for f in frags {
                let raw: String = chars.get(f.offset..f.offset + f.len).context("fragment out of bounds")?.iter().collect();
                let piece = n.normalize(&raw)?;
                if piece.is_empty() {
                    continue;
                }
                if !text.is_empty() {
                    text.push(' ');
                    offset += 1;
                }
                let len = piece.chars().count();
                text.push_str(&piece);
                out.push(Fragment { offset, len });
                offset += len;
            }
            Ok(TranscriptDoc::new(session_id.to_string(), text, Some(out))?)
        }
    }
}

#[derive(Serialize)]
struct UnalignedRecord {
    session_id: String,
    index: usize,
    reason: String,
}

#[derive(Serialize)]
struct SessionYieldRecord {
    session_id: String,
    transcript_id: Option<String>,
    #[serde(flatten)]
    yield_: SessionYield,
    candidates_evaluated: u64,
}

pub fn align(cfg: &RunConfig) -> Result<PathBuf> {
    let segments: Vec<Segment> = load_jsonl_many(cfg.require(&cfg.paths.segments, "segments")?)?;
    let hyps = hypotheses_by_session(cfg)?;
    cfg.require(&cfg.paths.hypotheses, "hypotheses")?;
    let transcripts = load_transcripts(cfg.require(&cfg.paths.transcripts, "transcripts")?)?;
    let norm = rules(cfg)?;
    let pairs = pairing_map(cfg)?;
    let audio_meta: HashMap<String, SessionMeta> = match &cfg.paths.audio_meta {
        Some(p) => metas(p, cfg)?.into_iter().map(|m| (m.id.clone(), m)).collect(),
        None => HashMap::new(),
    };

    let mut sessions: BTreeMap<&str, Vec<&Segment>> = BTreeMap::new();
    for s in &segments {
        sessions.entry(&s.session_id).or_default().push(s);
    }

    let mut matches = Vec::new();
    let mut unaligned = Vec::new();
    let mut yields = Vec::new();
    let mut manifest = Vec::new();
    for (sid, mut segs) in sessions {
        segs.sort_by_key(|s| s.index);
        let texts: HashMap<usize, &str> =
            hyps.get(sid).map(|v| v.iter().map(|h| (h.index, h.text.as_str())).collect()).unwrap_or_default();
        let tid = match &pairs {
            Some(p) => p.get(sid).cloned(),
            None => Some(sid.to_string()),
        };
        let Some((tid, transcript)) = tid.and_then(|t| transcripts.get(&t).map(|tr| (t, tr))) else {
            for s in &segs {
                unaligned.push(UnalignedRecord { session_id: sid.into(), index: s.index, reason: "no paired transcript".into() });
            }
            yields.push(SessionYieldRecord {
                session_id: sid.into(),
                transcript_id: None,
                yield_: SessionYield::from_matches(segs.iter().map(|s| (*s, false))),
                candidates_evaluated: 0,
            });
            continue;
        };
        let doc = transcript_doc(sid, transcript, norm.as_ref()).with_context(|| format!("transcript `{tid}`"))?;

        let mut items = Vec::with_capacity(segs.len());
        for s in &segs {
            match texts.get(&s.index) {
                Some(t) => {
                    let text = match &norm {
                        Some(n) => n.normalize(t)?,
                        None => t.to_string(),
                    };
                    items.push(((*s).clone(), text));
                }
                None => unaligned.push(UnalignedRecord { session_id: sid.into(), index: s.index, reason: "no hypothesis".into() }),
            }
        }
        let result = align_session(&items, &doc, &cfg.align, cfg.search_mode, cfg.workers)
            .with_context(|| format!("session `{sid}`"))?;
        let by_index: HashMap<usize, &Segment> = segs.iter().map(|s| (s.index, *s)).collect();
        let meta = audio_meta.get(sid);
        for m in &result.matches {
            let seg = by_index[&m.index];
            manifest.push(ManifestRecord {
                audio_ref: format!("{sid}#{}", m.index),
                session_id: sid.into(),
                segment_index: m.index,
                ground_truth: doc.span_text(m.span_offset, m.span_len),
                asr_hypothesis: items.iter().find(|(s, _)| s.index == m.index).map(|(_, t)| t.clone()).unwrap_or_default(),
                cer: CerValue { edit_distance: m.edit_distance, ref_len: m.ref_len },
                retained: m.retained,
                span_offset: m.span_offset,
                span_len: m.span_len,
                language_code: transcript.language_code.clone().unwrap_or_else(|| cfg.language_code.clone()),
                duration: seg.duration,
                source_id: meta.map(|m| m.source_id.clone()).unwrap_or_default(),
                session_date: meta.and_then(|m| m.session_date),
                quality_score: None,
                snr_db: None,
            });
        }
        unaligned.extend(
            result.unaligned.iter().map(|u| UnalignedRecord { session_id: sid.into(), index: u.index, reason: u.reason.clone() }),
        );
        yields.push(SessionYieldRecord {
            session_id: sid.into(),
            transcript_id: Some(tid),
            yield_: result.yield_,
            candidates_evaluated: result.candidates_evaluated,
        });
        matches.extend(result.matches);
    }

    let total = SessionYield::from_matches(
        segments.iter().map(|s| (s, matches.iter().any(|m| m.session_id == s.session_id && m.index == s.index && m.retained))),
    );
    let stage = Stage::begin("align", cfg)?;
    stage.jsonl("matches.jsonl", &matches)?;
    stage.jsonl("unaligned.jsonl", &unaligned)?;
    stage.jsonl("manifest.jsonl", &manifest)?;
    stage.json("yield.json", &serde_json::json!({ "sessions": yields, "total": total }))?;
    println!(
        "align: {} segments, {} retained ({:.3} h of {:.3} h), {} unaligned",
        total.segments,
        total.retained,
        total.retained_seconds / 3600.0,
        total.total_seconds / 3600.0,
        unaligned.len()
    );
    stage.commit()
}

pub fn refine_cmd(cfg: &RunConfig) -> Result<PathBuf> {
    let pool: Vec<PoolSegment> = load_jsonl_many(cfg.require(&cfg.paths.pool, "pool")?)?;
    let transcripts = load_transcripts(cfg.require(&cfg.paths.transcripts, "transcripts")?)?;
    let docs: HashMap<String, TranscriptDoc> = transcripts
        .iter()
        .map(|(id, t)| Ok((id.clone(), transcript_doc(id, t, None)?)))
        .collect::<Result<_>>()?;
    let rc = RefineConfig {
        max_passes: cfg.refine.max_passes,
        min_relative_gain: cfg.refine.min_relative_gain,
        align_params: cfg.align,
        mode: cfg.search_mode,
        workers: cfg.workers,
    };
    let outcome = refine(&pool, &docs, &cfg.refine.curve, &rc)?;
    let table = summary_table(&cfg.language_code, &outcome.reports);
    let stage = Stage::begin("refine", cfg)?;
    stage.jsonl("reports.jsonl", &outcome.reports)?;
    stage.jsonl("retained.jsonl", &outcome.retained)?;
    stage.text("summary.txt", &table)?;
    print!("{table}");
    stage.commit()
}

fn manifest(cfg: &RunConfig) -> Result<Vec<ManifestRecord>> {
    load_jsonl_many(cfg.require(&cfg.paths.manifest, "manifest")?)
}

pub fn stats_cmd(cfg: &RunConfig) -> Result<PathBuf> {
    let records = manifest(cfg)?;
    let s = stats(&records);
    let stage = Stage::begin("stats", cfg)?;
    stage.json("stats.json", &s)?;
    stage.text("stats.txt", &s.render())?;
    print!("{}", s.render());
    stage.commit()
}

pub fn filter_cmd(cfg: &RunConfig) -> Result<PathBuf> {
    let records = manifest(cfg)?;
    let kept = filter(&records, &cfg.filter);
    let stage = Stage::begin("filter", cfg)?;
    stage.jsonl("manifest.jsonl", &kept)?;
    println!("filter: kept {} of {} records", kept.len(), records.len());
    stage.commit()
}

pub fn split_cmd(cfg: &RunConfig) -> Result<PathBuf> {
    let records = manifest(cfg)?;
    let s = split(&records, &cfg.split)?;
    let stage = Stage::begin("split", cfg)?;
    stage.jsonl("train.jsonl", &s.train)?;
    stage.jsonl("test.jsonl", &s.test)?;
    stage.json("split.json", &serde_json::json!({
        "train_records": s.train.len(),
        "test_records": s.test.len(),
        "test_sessions": s.test_sessions,
        "exact": s.exact,
    }))?;
    println!("split: {} train, {} test ({} test sessions)", s.train.len(), s.test.len(), s.test_sessions.len());
    stage.commit()
}

/// Write a self-consistent synthetic corpus: regions, transcripts, metadata,
/// noisy hypotheses for the configured segmentation, and a refinement pool.
pub fn synth(cfg: &RunConfig) -> Result<PathBuf> {
    let sc = &cfg.synth;
    let spec = SessionSpec {
        minutes: sc.minutes,
        chars_per_second: sc.chars_per_second,
        divergence: sc.divergence,
        difficulty: sc.difficulty,
        ..SessionSpec::default()
    };
    let channel = NoisyChannel { params: NoiseParams::with_total(sc.noise, cfg.seed) };
    channel.params.validate().map_err(config)?;
    let vocab = Vocabulary::generate(cfg.seed, 2000);
    let stage = Stage::begin("synth", cfg)?;
    let (mut hyps, mut pool, mut audio_meta, mut transcript_meta) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..sc.sessions {
        let sid = format!("s{i:02}");
        let tid = format!("doc-{i:02}");
        let s = SynthSession::generate(&sid, cfg.seed.wrapping_add(1 + i as u64), &spec, &vocab);
        stage.json(&format!("regions/{sid}.json"), &RegionsFile { session_id: sid.clone(), regions: s.speech_regions() })?;
        stage.json(
            &format!("transcripts/{tid}.json"),
            &TranscriptFile { session_id: tid.clone(), text: s.transcript.clone(), fragments: None, language_code: None },
        )?;
        let base = (i as u64) << 20;
        for mut p in s.pool(&cfg.segmenter, base) {
            hyps.push(HypothesisRecord {
                session_id: sid.clone(),
                index: p.segment.index,
                text: channel.transcribe(&p.clip, p.stream_pos)?,
            });
            p.doc_id = tid.clone();
            pool.push(p);
        }
        let day = i % 28 + 1;
        audio_meta.push(MetaRecord {
            id: sid.clone(),
            source_id: "synthetic".into(),
            date: Some(format!("2024-03-{day:02}")),
            title: Some(format!("Plenary sitting {}", i + 1)),
            doc_number: Some(format!("{}", 100 + i)),
            url: None,
        });
        transcript_meta.push(MetaRecord {
            id: tid,
            source_id: "synthetic".into(),
            date: Some(format!("{day:02}/03/2024")),
            title: Some(format!("PLENARY SITTING {}.", i + 1)),
            doc_number: Some(format!("{}", 100 + i)),
            url: None,
        });
    }
    stage.jsonl("hypotheses.jsonl", &hyps)?;
    stage.jsonl("pool.jsonl", &pool)?;
    stage.jsonl("audio_meta.jsonl", &audio_meta)?;
    stage.jsonl("transcript_meta.jsonl", &transcript_meta)?;
    let seconds: f64 = pool.iter().map(|p| p.segment.duration).sum();
    println!("synth: {} sessions, {} segments, {:.2} h", sc.sessions, pool.len(), seconds / 3600.0);
    stage.commit()
}
