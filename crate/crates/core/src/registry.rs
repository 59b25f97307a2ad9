//! Runtime-selectable model variants, looked up by name.

use std::sync::{Arc, OnceLock};

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::layers::BiLstmOutput;
use crate::nn::{Graph, Var};

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: IndexMap<&'static str, Arc<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: IndexMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, item: Arc<T>) -> &mut Self {
        self.entries.insert(name, item);
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries.get(name).cloned().ok_or_else(|| {
            Error::Unknown(format!(
                "{} `{name}` (available: {})",
                self.kind,
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

/// How the encoder states of a sentence collapse into one vector.
pub trait SentenceSummary: Send + Sync {
    fn summarize(&self, g: &mut Graph<'_>, encoded: &BiLstmOutput) -> Result<Var>;
}

/// Per-word representation `z_w` handed to the word-level head.
pub trait WordFeatureSource: Send + Sync {
    fn dim(&self, embed_dim: usize, encoder_dim: usize) -> usize;
    fn features(&self, g: &mut Graph<'_>, embedded: Var, encoded: &BiLstmOutput) -> Result<Var>;
}

struct FinalStates;

impl SentenceSummary for FinalStates {
    fn summarize(&self, g: &mut Graph<'_>, encoded: &BiLstmOutput) -> Result<Var> {
        encoded.final_states(g)
    }
}

struct MeanStates;

impl SentenceSummary for MeanStates {
    fn summarize(&self, g: &mut Graph<'_>, encoded: &BiLstmOutput) -> Result<Var> {
        g.mean_rows(encoded.states)
    }
}

struct EmbeddingRows;

impl WordFeatureSource for EmbeddingRows {
    fn dim(&self, embed_dim: usize, _: usize) -> usize {
        embed_dim
    }

    fn features(&self, _: &mut Graph<'_>, embedded: Var, _: &BiLstmOutput) -> Result<Var> {
        Ok(embedded)
    }
}

struct EncoderStates;

impl WordFeatureSource for EncoderStates {
    fn dim(&self, _: usize, encoder_dim: usize) -> usize {
        encoder_dim
    }

    fn features(&self, _: &mut Graph<'_>, _: Var, encoded: &BiLstmOutput) -> Result<Var> {
        Ok(encoded.states)
    }
}

pub fn summaries() -> &'static Registry<dyn SentenceSummary> {
    static REG: OnceLock<Registry<dyn SentenceSummary>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn SentenceSummary> = Registry::new("summary");
        r.register("final", Arc::new(FinalStates)).register("mean", Arc::new(MeanStates));
        r
    })
}

pub fn word_features() -> &'static Registry<dyn WordFeatureSource> {
    static REG: OnceLock<Registry<dyn WordFeatureSource>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn WordFeatureSource> = Registry::new("word feature source");
        r.register("embedding", Arc::new(EmbeddingRows))
            .register("bilstm", Arc::new(EncoderStates));
        r
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_names_and_unknown_lookup() {
        assert_eq!(summaries().names().collect::<Vec<_>>(), ["final", "mean"]);
        assert_eq!(word_features().names().collect::<Vec<_>>(), ["embedding", "bilstm"]);
        match summaries().get("attention") {
            Err(Error::Unknown(msg)) => assert!(msg.contains("final, mean")),
            _ => panic!("expected unknown-variant error"),
        }
        assert_eq!(word_features().get("bilstm").unwrap().dim(100, 128), 128);
    }
}
