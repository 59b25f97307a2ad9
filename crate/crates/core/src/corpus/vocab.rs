use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::types::Document;
use crate::error::{Error, Result};
use crate::layers::{OOV_INDEX, PAD_INDEX};

pub const PAD_TOKEN: &str = "<pad>";
pub const OOV_TOKEN: &str = "<unk>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabRepr", into = "VocabRepr")]
pub struct Vocab {
    tokens: Vec<String>,
    lowercase: bool,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    lowercase: bool,
    tokens: Vec<String>,
}

impl TryFrom<VocabRepr> for Vocab {
    type Error = Error;
    fn try_from(r: VocabRepr) -> Result<Self> {
        Vocab::from_tokens(r.tokens, r.lowercase)
    }
}

impl From<Vocab> for VocabRepr {
    fn from(v: Vocab) -> Self {
        VocabRepr {
            lowercase: v.lowercase,
            tokens: v.tokens,
        }
    }
}

impl Vocab {
    /// Index order: pad, oov, then frequency descending with lexicographic tie-break.
    /// Tokens seen fewer than `min_freq` times are left to the oov row.
    pub fn build(docs: &[Document], min_freq: usize, lowercase: bool) -> Self {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for s in docs.iter().flat_map(|d| &d.sentences) {
            for t in &s.tokens {
                *counts.entry(normalize(t, lowercase)).or_default() += 1;
            }
        }
        let mut ranked: Vec<(String, usize)> = counts
            .into_iter()
            .filter(|(t, c)| *c >= min_freq.max(1) && t != PAD_TOKEN && t != OOV_TOKEN)
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let tokens = [PAD_TOKEN.to_string(), OOV_TOKEN.to_string()]
            .into_iter()
            .chain(ranked.into_iter().map(|(t, _)| t))
            .collect();
        Self::from_tokens(tokens, lowercase).expect("built vocabulary is well-formed")
    }

    pub fn from_tokens(tokens: Vec<String>, lowercase: bool) -> Result<Self> {
        if tokens.get(PAD_INDEX).map(String::as_str) != Some(PAD_TOKEN)
            || tokens.get(OOV_INDEX).map(String::as_str) != Some(OOV_TOKEN)
        {
            return Err(Error::Config("vocabulary must start with <pad>, <unk>".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate vocabulary token `{t}`")));
            }
        }
        Ok(Self {
            tokens,
            lowercase,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn lowercase(&self) -> bool {
        self.lowercase
    }

    pub fn index_of(&self, token: &str) -> usize {
        self.index
            .get(normalize(token, self.lowercase).as_ref() as &str)
            .copied()
            .unwrap_or(OOV_INDEX)
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().map(|t| self.index_of(t.as_ref())).collect()
    }

    pub fn as_map(&self) -> &HashMap<String, usize> {
        &self.index
    }

    /// Hex SHA-256 over the ordered token list and casing flag.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update([u8::from(self.lowercase)]);
        for t in &self.tokens {
            h.update(t.as_bytes());
            h.update([0u8]);
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn normalize(token: &str, lowercase: bool) -> String {
    if lowercase {
        token.to_lowercase()
    } else {
        token.to_string()
    }
}

pub fn build_vocab(docs: &[Document], min_freq: usize) -> Vocab {
    Vocab::build(docs, min_freq, true)
}
