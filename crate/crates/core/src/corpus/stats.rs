use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use super::types::{Document, SentenceType};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub sentences: usize,
    pub action_sentences: usize,
    pub statement_sentences: usize,
    /// All tokens in all sentences.
    pub words: usize,
    /// Tokens that carry a word-level tag (tokens of ACTION sentences).
    pub labeled_words: usize,
    pub sentence_categories_used: usize,
    pub word_categories_used: usize,
}

pub fn corpus_stats(docs: &[Document]) -> CorpusStats {
    let mut st = CorpusStats {
        documents: docs.len(),
        ..Default::default()
    };
    let mut semantics = BTreeSet::new();
    let mut tags = BTreeSet::new();
    for s in docs.iter().flat_map(|d| &d.sentences) {
        st.sentences += 1;
        st.words += s.tokens.len();
        match s.s_type {
            SentenceType::Action => {
                st.action_sentences += 1;
                st.labeled_words += s.word_tags.len();
                tags.extend(s.word_tags.iter().copied());
            }
            SentenceType::Statement => {
                st.statement_sentences += 1;
                semantics.extend(s.s_semantic);
            }
        }
    }
    st.sentence_categories_used = semantics.len();
    st.word_categories_used = tags.len();
    st
}

type Row = (&'static str, fn(&CorpusStats) -> usize);

/// Aligned text table, one column per named corpus.
pub fn stats_table(columns: &[(String, CorpusStats)]) -> String {
    let rows: [Row; 8] = [
        ("# Documents", |s| s.documents),
        ("# Labeled Sentences", |s| s.sentences),
        ("# Action Sentences", |s| s.action_sentences),
        ("# Statement Sentences", |s| s.statement_sentences),
        ("# Words", |s| s.words),
        ("# Labeled Words", |s| s.labeled_words),
        ("# Sentence-Level Categories", |s| s.sentence_categories_used),
        ("# Word-Level Categories", |s| s.word_categories_used),
    ];
    let label_w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let widths: Vec<usize> = columns
        .iter()
        .map(|(name, st)| {
            rows.iter()
                .map(|r| group_thousands(r.1(st)).len())
                .chain([name.chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = format!("{:<label_w$}", "Statistic");
    for ((name, _), w) in columns.iter().zip(&widths) {
        let _ = write!(out, "  {name:>w$}");
    }
    out.push('\n');
    for (label, get) in rows {
        let _ = write!(out, "{label:<label_w$}");
        for ((_, st), w) in columns.iter().zip(&widths) {
            let _ = write!(out, "  {:>w$}", group_thousands(get(st)));
        }
        out.push('\n');
    }
    out
}

fn group_thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}
