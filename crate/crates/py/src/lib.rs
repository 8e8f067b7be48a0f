//! Python bindings. Structured values cross the boundary as plain dicts and
//! lists (round-tripped through the JSON field names used on disk).

use corpusalign_core::aligner::{align_in, AlignParams, SearchMethod, SearchMode};
use corpusalign_core::manifest::{self, ManifestRecord, Predicate, SplitParams};
use corpusalign_core::pairing::{self, MetaRecord, PairWeights, SessionMeta, DEFAULT_DATE_FORMATS};
use corpusalign_core::segmenter::{self, SegmenterParams, SpeechRegion};
use corpusalign_core::sim_transcriber::{self, LearningCurve, NoiseParams};
use corpusalign_core::text_norm::NormRuleSet;
use corpusalign_core::{metrics, TranscriptDoc};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (s,))
}

fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let s: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&s).map_err(err)
}

fn rule_set(rules_json: Option<&str>) -> PyResult<NormRuleSet> {
    match rules_json {
        Some(s) => NormRuleSet::from_json(s).map_err(err),
        None => Ok(NormRuleSet::empty("und")),
    }
}

/// Normalize `text` with a rule set given as JSON (whitespace and NFC only when omitted).
#[pyfunction]
#[pyo3(signature = (text, rules_json=None))]
fn normalize(text: &str, rules_json: Option<&str>) -> PyResult<String> {
    corpusalign_core::normalize(text, &rule_set(rules_json)?).map_err(err)
}

#[pyfunction]
fn levenshtein(a: &str, b: &str) -> usize {
    metrics::levenshtein(a, b)
}

#[pyfunction]
fn banded_levenshtein(a: &str, b: &str, band: usize) -> PyResult<Option<usize>> {
    if band == 0 {
        return Err(PyValueError::new_err("band must be at least 1"));
    }
    Ok(metrics::banded_levenshtein(a, b, band))
}

/// `(edit_distance, ref_len, rate)`.
#[pyfunction]
fn cer(hyp: &str, reference: &str) -> PyResult<(usize, usize, f64)> {
    let c = metrics::cer(hyp, reference).map_err(err)?;
    Ok((c.edit_distance, c.ref_len, c.value()))
}

/// Segment `[(start, end), ...]`; returns `{"segments": [...], "dropped": [...]}`.
#[pyfunction]
#[pyo3(signature = (session_id, regions, params=None))]
fn segment_session<'py>(
    py: Python<'py>,
    session_id: &str,
    regions: Vec<(f64, f64)>,
    params: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyAny>> {
    let params: SegmenterParams = params.map(from_py).transpose()?.unwrap_or_default();
    let regions: Vec<SpeechRegion> = regions.into_iter().map(|(s, e)| SpeechRegion::new(s, e)).collect();
    let out = segmenter::segment_session(session_id, &regions, &params).map_err(err)?;
    to_py(py, &out)
}

/// A human transcript prepared for span search.
#[pyclass(name = "TranscriptDoc", module = "corpusalign")]
struct PyTranscriptDoc {
    inner: TranscriptDoc,
}

#[pymethods]
impl PyTranscriptDoc {
    #[new]
    fn new(session_id: String, text: String) -> PyResult<Self> {
        Ok(Self { inner: TranscriptDoc::new(session_id, text, None).map_err(err)? })
    }

    #[getter]
    fn session_id(&self) -> &str {
        self.inner.session_id()
    }

    fn __len__(&self) -> usize {
        self.inner.char_count()
    }

    fn span_text(&self, offset: usize, length: usize) -> String {
        self.inner.span_text(offset, length)
    }

    /// Best span for `hyp`: dict with span_offset, span_len, cer, retained
    /// and candidates_evaluated.
    #[pyo3(signature = (hyp, cer_threshold=0.3, exhaustive=false))]
    fn align<'py>(&self, py: Python<'py>, hyp: &str, cer_threshold: f64, exhaustive: bool) -> PyResult<Bound<'py, PyAny>> {
        let params = AlignParams { cer_threshold, ..AlignParams::default() };
        let method = if exhaustive { SearchMethod::Exhaustive } else { SearchMethod::CoarseToFine };
        let r = align_in(hyp, &self.inner, &params, method, SearchMode::FullDoc, 0).map_err(err)?;
        let value = serde_json::json!({
            "span_offset": r.best.span_offset,
            "span_len": r.best.span_len,
            "edit_distance": r.best.cer.edit_distance,
            "ref_len": r.best.cer.ref_len,
            "cer": r.best.cer.value(),
            "retained": r.best.retained,
            "candidates_evaluated": r.candidates_evaluated,
        });
        to_py(py, &value)
    }
}

fn meta(obj: &Bound<'_, PyAny>) -> PyResult<SessionMeta> {
    let rec: MetaRecord = from_py(obj)?;
    SessionMeta::from_record(&rec, DEFAULT_DATE_FORMATS).map_err(err)
}

/// Metadata agreement of two records (`id`, `source_id`, optional `date`,
/// `title`, `doc_number`, `url`).
#[pyfunction]
fn pair_score(a: &Bound<'_, PyAny>, b: &Bound<'_, PyAny>) -> PyResult<f64> {
    pairing::pair_score(&meta(a)?, &meta(b)?, &PairWeights::default()).map_err(err)
}

/// `(overlap, pass)` for sample hypotheses against a transcript.
#[pyfunction]
#[pyo3(signature = (samples, doc, min_overlap=0.3))]
fn validate_pair(samples: Vec<String>, doc: PyRef<'_, PyTranscriptDoc>, min_overlap: f64) -> PyResult<(f64, bool)> {
    let v = pairing::validate_pair(&samples, &doc.inner, min_overlap).map_err(err)?;
    Ok((v.overlap, v.pass))
}

#[pyfunction]
#[pyo3(signature = (text, sub_rate, ins_rate, del_rate, seed, stream_pos=0))]
fn transcribe(text: &str, sub_rate: f64, ins_rate: f64, del_rate: f64, seed: u64, stream_pos: u64) -> PyResult<String> {
    sim_transcriber::transcribe(text, &NoiseParams::new(sub_rate, ins_rate, del_rate, seed), stream_pos).map_err(err)
}

/// `(sub, ins, del)` rates after `hours` of retained data.
#[pyfunction]
#[pyo3(signature = (initial_total, floor_rate, halving_hours, hours, seed=0))]
fn improved_params(initial_total: f64, floor_rate: f64, halving_hours: f64, hours: f64, seed: u64) -> PyResult<(f64, f64, f64)> {
    let curve = LearningCurve { initial_rates: NoiseParams::with_total(initial_total, seed), floor_rate, halving_hours };
    curve.validate().map_err(err)?;
    let p = sim_transcriber::improved_params(&curve, hours);
    Ok((p.sub_rate, p.ins_rate, p.del_rate))
}

/// Manifest records (dicts) matching a predicate dict.
#[pyfunction]
fn filter_manifest<'py>(py: Python<'py>, records: &Bound<'py, PyAny>, predicate: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let records: Vec<ManifestRecord> = from_py(records)?;
    let predicate: Predicate = from_py(predicate)?;
    to_py(py, &manifest::filter(&records, &predicate))
}

/// `(train, test)` session-atomic split.
#[pyfunction]
#[pyo3(signature = (records, train_fraction=0.95, seed=0))]
fn split_manifest<'py>(
    py: Python<'py>,
    records: &Bound<'py, PyAny>,
    train_fraction: f64,
    seed: u64,
) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>)> {
    let records: Vec<ManifestRecord> = from_py(records)?;
    let s = manifest::split(&records, &SplitParams { train_fraction, seed }).map_err(err)?;
    Ok((to_py(py, &s.train)?, to_py(py, &s.test)?))
}

#[pyfunction]
fn manifest_stats<'py>(py: Python<'py>, records: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let records: Vec<ManifestRecord> = from_py(records)?;
    to_py(py, &manifest::stats(&records))
}

#[pymodule]
fn corpusalign(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTranscriptDoc>()?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(levenshtein, m)?)?;
    m.add_function(wrap_pyfunction!(banded_levenshtein, m)?)?;
    m.add_function(wrap_pyfunction!(cer, m)?)?;
    m.add_function(wrap_pyfunction!(segment_session, m)?)?;
    m.add_function(wrap_pyfunction!(pair_score, m)?)?;
    m.add_function(wrap_pyfunction!(validate_pair, m)?)?;
    m.add_function(wrap_pyfunction!(transcribe, m)?)?;
    m.add_function(wrap_pyfunction!(improved_params, m)?)?;
    m.add_function(wrap_pyfunction!(filter_manifest, m)?)?;
    m.add_function(wrap_pyfunction!(split_manifest, m)?)?;
    m.add_function(wrap_pyfunction!(manifest_stats, m)?)?;
    Ok(())
}
