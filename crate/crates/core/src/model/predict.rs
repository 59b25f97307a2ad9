use crate::corpus::{Document, Sentence, SentenceSemantic, SentenceType, WordTag};
use crate::error::Result;
use crate::nn::Graph;

use super::network::{CoarseModel, FineModel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePrediction {
    pub s_type: SentenceType,
    pub semantic: Option<SentenceSemantic>,
    pub tags: Vec<WordTag>,
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

/// Type and semantic from the coarse model; word tags from the fine model
/// when it is given and the sentence is predicted to be an action.
pub fn predict_sentence(coarse: &CoarseModel, fine: Option<&FineModel>, tokens: &[String]) -> Result<SentencePrediction> {
    let ids = coarse.vocab.encode(tokens);
    let mut g = Graph::new(&coarse.store);
    let feats = coarse.shared.features(&mut g, &ids)?;
    let st1 = coarse.forward_st1(&mut g, feats.v)?;
    let s_type = SentenceType::from_index(argmax(g.value(st1.logits))).unwrap_or(SentenceType::Action);
    let mut pred = SentencePrediction {
        s_type,
        semantic: None,
        tags: Vec::new(),
    };
    match s_type {
        SentenceType::Statement => {
            let logits = coarse.forward_st2(&mut g, feats.v, st1.z_s)?;
            pred.semantic = SentenceSemantic::from_index(argmax(g.value(logits)));
        }
        SentenceType::Action => {
            if let Some(fine) = fine {
                pred.tags = predict_tags(fine, tokens)?;
            }
        }
    }
    Ok(pred)
}

pub fn predict_tags(fine: &FineModel, tokens: &[String]) -> Result<Vec<WordTag>> {
    let ids = fine.coarse.vocab.encode(tokens);
    let mut g = Graph::new(fine.store());
    let feats = fine.coarse.shared.features(&mut g, &ids)?;
    let st1 = fine.coarse.forward_st1(&mut g, feats.v)?;
    let logits = fine.forward_st3(&mut g, &feats, st1.z_s)?;
    Ok(g.value(logits)
        .chunks(4)
        .map(|row| WordTag::from_index(argmax(row)).unwrap_or(WordTag::Other))
        .collect())
}

/// The document with every label replaced by the models' predictions.
/// Without a fine model, predicted actions get all-OTHER tags.
pub fn predict_document(coarse: &CoarseModel, fine: Option<&FineModel>, doc: &Document) -> Result<Document> {
    let sentences = doc
        .sentences
        .iter()
        .map(|s| {
            let p = predict_sentence(coarse, fine, &s.tokens)?;
            let word_tags = match p.s_type {
                SentenceType::Action if p.tags.is_empty() => vec![WordTag::Other; s.tokens.len()],
                SentenceType::Action => p.tags,
                SentenceType::Statement => Vec::new(),
            };
            Ok(Sentence {
                text: s.text.clone(),
                tokens: s.tokens.clone(),
                s_type: p.s_type,
                s_semantic: p.semantic,
                word_tags,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Document {
        id: doc.id.clone(),
        domain: doc.domain.clone(),
        sentences,
    })
}
