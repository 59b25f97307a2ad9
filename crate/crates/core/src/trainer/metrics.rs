use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{Document, Sentence, SentenceSemantic, SentenceType, WordTag};
use crate::error::Result;
use crate::model::{predict_tags, CoarseModel, FineModel};
use crate::nn::Graph;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub correct: usize,
    pub total: usize,
}

impl Tally {
    pub fn add(&mut self, hit: bool) {
        self.correct += usize::from(hit);
        self.total += 1;
    }

    pub fn merge(self, other: Tally) -> Tally {
        Tally {
            correct: self.correct + other.correct,
            total: self.total + other.total,
        }
    }

    /// Fraction correct; `None` when nothing was scored.
    pub fn rate(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }
}

/// ST1 over all sentences, ST2 over gold statements, ST3 over words of gold actions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Accuracy {
    pub st1: Tally,
    pub st2: Tally,
    pub st3: Tally,
}

impl Accuracy {
    fn merge(self, o: Accuracy) -> Accuracy {
        Accuracy {
            st1: self.st1.merge(o.st1),
            st2: self.st2.merge(o.st2),
            st3: self.st3.merge(o.st3),
        }
    }
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn score_sentence(coarse: Option<&CoarseModel>, fine: Option<&FineModel>, s: &Sentence) -> Result<Accuracy> {
    let mut acc = Accuracy::default();
    if let Some(coarse) = coarse {
        let ids = coarse.vocab.encode(&s.tokens);
        let mut g = Graph::new(&coarse.store);
        let feats = coarse.shared.features(&mut g, &ids)?;
        let st1 = coarse.forward_st1(&mut g, feats.v)?;
        acc.st1.add(argmax(g.value(st1.logits)) == s.s_type.index());
        if let (SentenceType::Statement, Some(gold)) = (s.s_type, s.s_semantic) {
            let logits = coarse.forward_st2(&mut g, feats.v, st1.z_s)?;
            acc.st2.add(argmax(g.value(logits)) == gold.index());
        }
    }
    if let Some(fine) = fine {
        if s.s_type == SentenceType::Action {
            for (p, gold) in predict_tags(fine, &s.tokens)?.iter().zip(&s.word_tags) {
                acc.st3.add(p == gold);
            }
        }
    }
    Ok(acc)
}

/// Scores every sentence in parallel; either model may be absent.
pub fn evaluate(docs: &[Document], coarse: Option<&CoarseModel>, fine: Option<&FineModel>) -> Result<Accuracy> {
    let sentences: Vec<&Sentence> = docs.iter().flat_map(|d| &d.sentences).collect();
    sentences
        .par_iter()
        .map(|s| score_sentence(coarse, fine, s))
        .try_reduce(Accuracy::default, |a, b| Ok(a.merge(b)))
}

fn most_frequent<T: Copy + Ord>(items: impl Iterator<Item = T>) -> Option<T> {
    let mut counts = std::collections::BTreeMap::new();
    for x in items {
        *counts.entry(x).or_insert(0usize) += 1;
    }
    // ties go to the smallest class
    counts.into_iter().rev().max_by_key(|&(_, c)| c).map(|(k, _)| k)
}

/// Predicts the most frequent training class of each task for every test item.
pub fn majority_baseline(train: &[Document], test: &[Document]) -> Accuracy {
    let train_s: Vec<&Sentence> = train.iter().flat_map(|d| &d.sentences).collect();
    let t1 = most_frequent(train_s.iter().map(|s| s.s_type));
    let t2: Option<SentenceSemantic> = most_frequent(train_s.iter().filter_map(|s| s.s_semantic));
    let t3: Option<WordTag> = most_frequent(train_s.iter().flat_map(|s| s.word_tags.iter().copied()));
    let mut acc = Accuracy::default();
    for s in test.iter().flat_map(|d| &d.sentences) {
        acc.st1.add(Some(s.s_type) == t1);
        if let Some(gold) = s.s_semantic {
            acc.st2.add(Some(gold) == t2);
        }
        for &w in &s.word_tags {
            acc.st3.add(Some(w) == t3);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::toy_corpus;

    #[test]
    fn tally_rates() {
        let mut t = Tally::default();
        assert_eq!(t.rate(), None);
        for hit in [true, false, true, false] {
            t.add(hit);
        }
        assert_eq!(t.rate(), Some(0.5));
    }

    #[test]
    fn majority_counts_match_naive_oracle() {
        let docs = toy_corpus();
        let acc = majority_baseline(&docs, &docs);
        let all: Vec<&Sentence> = docs.iter().flat_map(|d| &d.sentences).collect();
        let statements = all.iter().filter(|s| !s.is_action()).count();
        assert_eq!(acc.st1.correct, statements.max(all.len() - statements));
        assert_eq!(acc.st1.total, all.len());
        let other = all.iter().flat_map(|s| &s.word_tags).filter(|&&t| t == WordTag::Other).count();
        assert_eq!(acc.st3.correct, other);
    }
}
