//! Atomic stage directories: outputs are assembled in a hidden temporary
//! directory and renamed to `<output_dir>/<stage>` only once complete.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use corpusalign_core::io::{to_jsonl, write_atomic};
use serde::Serialize;
use tempfile::TempDir;

use crate::config::RunConfig;

pub struct Stage {
    target: PathBuf,
    tmp: TempDir,
}

impl Stage {
    /// Create the staging directory and record the resolved config in it.
    pub fn begin(name: &str, config: &RunConfig) -> Result<Self> {
        let out = &config.paths.output_dir;
        fs::create_dir_all(out).with_context(|| format!("cannot create output dir {}", out.display()))?;
        let tmp = tempfile::Builder::new()
            .prefix(&format!(".{name}."))
            .tempdir_in(out)
            .with_context(|| format!("cannot create staging dir in {}", out.display()))?;
        let stage = Self { target: out.join(name), tmp };
        stage.json("config.json", config)?;
        Ok(stage)
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.tmp.path().join(file)
    }

    pub fn text(&self, file: &str, text: &str) -> Result<()> {
        let path = self.path(file);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        write_atomic(&path, text.as_bytes())?;
        Ok(())
    }

    pub fn json<T: Serialize>(&self, file: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.text(file, &s)
    }

    pub fn jsonl<T: Serialize>(&self, file: &str, items: &[T]) -> Result<()> {
        self.text(file, &to_jsonl(items))
    }

    /// Replace any previous output of this stage.
    pub fn commit(self) -> Result<PathBuf> {
        if self.target.exists() {
            fs::remove_dir_all(&self.target).with_context(|| format!("cannot replace {}", self.target.display()))?;
        }
        let staged = self.tmp.keep();
        fs::rename(&staged, &self.target).with_context(|| format!("cannot move outputs into {}", self.target.display()))?;
        Ok(self.target)
    }
}
