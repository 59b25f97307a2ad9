//! JSON-lines corpus files: one document object per line.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::types::Document;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    #[default]
    Strict,
    /// Invalid lines are skipped and reported instead of failing the load.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadWarning {
    pub line: usize,
    pub message: String,
}

pub fn parse_corpus(text: &str, mode: LoadMode) -> Result<(Vec<Document>, Vec<LoadWarning>)> {
    let mut docs = Vec::new();
    let mut warnings = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<Document>(raw)
            .map_err(|e| e.to_string())
            .and_then(|d| d.validate().map(|_| d));
        match (parsed, mode) {
            (Ok(doc), _) => docs.push(doc),
            (Err(message), LoadMode::Strict) => return Err(Error::Corpus { line, message }),
            (Err(message), LoadMode::Lenient) => {
                log::warn!("skipping corpus line {line}: {message}");
                warnings.push(LoadWarning { line, message });
            }
        }
    }
    Ok((docs, warnings))
}

pub fn load_corpus(path: impl AsRef<Path>, mode: LoadMode) -> Result<Vec<Document>> {
    let text = fs::read_to_string(path)?;
    Ok(parse_corpus(&text, mode)?.0)
}

pub fn to_jsonl(docs: &[Document]) -> Result<String> {
    let mut out = String::new();
    for d in docs {
        out.push_str(&serde_json::to_string(d)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn save_corpus(docs: &[Document], path: impl AsRef<Path>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(to_jsonl(docs)?.as_bytes())?;
    Ok(())
}
