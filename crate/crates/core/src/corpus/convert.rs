//! Converts a token-per-line TSV dump into canonical documents.
//!
//! Dump rows: `doc_id \t domain \t sentence_no \t token \t sentence_label \t word_label`.
//! Lines starting with `#` and blank lines are ignored. Raw labels are mapped through a
//! [`LabelMapping`]; a sentence label mapped to `SKIP` drops the sentence.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;

use super::types::{Document, Sentence, SentenceSemantic, SentenceType, WordTag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SentenceTarget {
    Action,
    Statement(SentenceSemantic),
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelMapping {
    pub sentence: HashMap<String, SentenceTarget>,
    pub word: HashMap<String, WordTag>,
}

fn parse_sentence_target(s: &str) -> Option<SentenceTarget> {
    if s == "ACTION" {
        return Some(SentenceTarget::Action);
    }
    if s == "SKIP" {
        return Some(SentenceTarget::Skip);
    }
    let mut chars = s.chars();
    if let (Some(c), None) = (chars.next(), chars.next()) {
        if let Some(sem) = SentenceSemantic::from_symbol(c) {
            return Some(SentenceTarget::Statement(sem));
        }
    }
    SentenceSemantic::ALL
        .into_iter()
        .find(|sem| sem.as_str() == s)
        .map(SentenceTarget::Statement)
}

fn parse_word_target(s: &str) -> Option<WordTag> {
    WordTag::ALL.into_iter().find(|t| t.as_str() == s)
}

impl Default for LabelMapping {
    fn default() -> Self {
        let mut sentence = HashMap::new();
        for (raw, t) in [
            ("action", SentenceTarget::Action),
            ("Action", SentenceTarget::Action),
            ("ACTION", SentenceTarget::Action),
        ] {
            sentence.insert(raw.to_string(), t);
        }
        for sem in SentenceSemantic::ALL {
            sentence.insert(sem.symbol().to_string(), SentenceTarget::Statement(sem));
            sentence.insert(sem.as_str().to_string(), SentenceTarget::Statement(sem));
        }
        let mut word = HashMap::new();
        for (raw, t) in [
            ("aRole", WordTag::Role),
            ("role", WordTag::Role),
            ("aName", WordTag::ActionName),
            ("name", WordTag::ActionName),
            ("aObject", WordTag::Object),
            ("object", WordTag::Object),
            ("O", WordTag::Other),
            ("∅", WordTag::Other),
            ("-", WordTag::Other),
        ] {
            word.insert(raw.to_string(), t);
        }
        for t in WordTag::ALL {
            word.insert(t.as_str().to_string(), t);
        }
        Self { sentence, word }
    }
}

impl LabelMapping {
    /// Adds entries from a mapping table on top of the defaults.
    /// Lines: `sentence \t raw \t target` or `word \t raw \t target`.
    pub fn with_table(mut self, table: &str) -> Result<Self> {
        for (i, line) in table.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
            let bad = |message: String| Error::Corpus { line: line_no, message };
            let [kind, raw, target] = fields[..] else {
                return Err(bad(format!("expected 3 tab-separated fields, found {}", fields.len())));
            };
            match kind {
                "sentence" => {
                    let t = parse_sentence_target(target)
                        .ok_or_else(|| bad(format!("unknown sentence target `{target}`")))?;
                    self.sentence.insert(raw.to_string(), t);
                }
                "word" => {
                    let t = parse_word_target(target).ok_or_else(|| bad(format!("unknown word target `{target}`")))?;
                    self.word.insert(raw.to_string(), t);
                }
                other => return Err(bad(format!("mapping kind must be `sentence` or `word`, found `{other}`"))),
            }
        }
        Ok(self)
    }
}

struct RawSentence {
    label: String,
    first_line: usize,
    tokens: Vec<String>,
    word_labels: Vec<(usize, String)>,
}

pub fn convert_dump(dump: &str, mapping: &LabelMapping) -> Result<Vec<Document>> {
    let mut docs: IndexMap<String, (String, IndexMap<String, RawSentence>)> = IndexMap::new();
    for (i, line) in dump.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [doc_id, domain, sent_no, token, s_label, w_label] = fields[..] else {
            return Err(Error::Corpus {
                line: line_no,
                message: format!("expected 6 tab-separated fields, found {}", fields.len()),
            });
        };
        let (_, sentences) = docs
            .entry(doc_id.to_string())
            .or_insert_with(|| (domain.to_string(), IndexMap::new()));
        let raw = sentences.entry(sent_no.to_string()).or_insert_with(|| RawSentence {
            label: s_label.to_string(),
            first_line: line_no,
            tokens: Vec::new(),
            word_labels: Vec::new(),
        });
        if raw.label != s_label {
            return Err(Error::Corpus {
                line: line_no,
                message: format!("sentence label `{s_label}` disagrees with `{}` given earlier", raw.label),
            });
        }
        raw.tokens.push(token.to_string());
        raw.word_labels.push((line_no, w_label.to_string()));
    }

    let mut out = Vec::with_capacity(docs.len());
    for (id, (domain, raw_sentences)) in docs {
        let mut sentences = Vec::new();
        for raw in raw_sentences.into_values() {
            let target = mapping.sentence.get(&raw.label).copied().ok_or_else(|| Error::Corpus {
                line: raw.first_line,
                message: format!("no mapping for sentence label `{}`", raw.label),
            })?;
            let text = raw.tokens.join(" ");
            let sentence = match target {
                SentenceTarget::Skip => continue,
                SentenceTarget::Statement(sem) => Sentence {
                    text,
                    tokens: raw.tokens,
                    s_type: SentenceType::Statement,
                    s_semantic: Some(sem),
                    word_tags: Vec::new(),
                },
                SentenceTarget::Action => {
                    let word_tags = raw
                        .word_labels
                        .iter()
                        .map(|(line, w)| {
                            mapping.word.get(w).copied().ok_or_else(|| Error::Corpus {
                                line: *line,
                                message: format!("no mapping for word label `{w}`"),
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Sentence {
                        text,
                        tokens: raw.tokens,
                        s_type: SentenceType::Action,
                        s_semantic: None,
                        word_tags,
                    }
                }
            };
            sentences.push(sentence);
        }
        if sentences.is_empty() {
            log::warn!("document `{id}` has no sentences after mapping; dropped");
            continue;
        }
        out.push(Document {
            id,
            domain: domain.into(),
            sentences,
        });
    }
    Ok(out)
}

pub fn convert_file(dump: impl AsRef<Path>, mapping_table: Option<&Path>) -> Result<Vec<Document>> {
    let mut mapping = LabelMapping::default();
    if let Some(p) = mapping_table {
        mapping = mapping.with_table(&fs::read_to_string(p)?)?;
    }
    convert_dump(&fs::read_to_string(dump)?, &mapping)
}
