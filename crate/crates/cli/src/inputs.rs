//! Input file formats. Every loader accepts either a single file or a
//! directory, in which case files with the matching extension are read in
//! name order.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use corpusalign_core::aligner::Fragment;
use corpusalign_core::io::{read_json, read_jsonl};
use corpusalign_core::SpeechRegion;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionsFile {
    pub session_id: String,
    pub regions: Vec<SpeechRegion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptFile {
    pub session_id: String,
    pub text: String,
    #[serde(default)]
    pub fragments: Option<Vec<Fragment>>,
    #[serde(default)]
    pub language_code: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisRecord {
    pub session_id: String,
    pub index: usize,
    pub text: String,
}

fn files(path: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut out: Vec<PathBuf> = fs::read_dir(path)
        .with_context(|| format!("cannot list {}", path.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    out.retain(|p| p.extension().is_some_and(|e| e == ext));
    out.sort();
    Ok(out)
}

pub fn load_json_many<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    files(path, "json")?.iter().map(|p| Ok(read_json(p)?)).collect()
}

pub fn load_jsonl_many<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for p in files(path, "jsonl")? {
        out.extend(read_jsonl(&p)?);
    }
    Ok(out)
}

/// Transcripts keyed by session id; duplicate ids are an error.
pub fn load_transcripts(path: &Path) -> Result<BTreeMap<String, TranscriptFile>> {
    let mut out = BTreeMap::new();
    for t in load_json_many::<TranscriptFile>(path)? {
        if out.contains_key(&t.session_id) {
            bail!("duplicate transcript for session `{}` under {}", t.session_id, path.display());
        }
        out.insert(t.session_id.clone(), t);
    }
    Ok(out)
}
