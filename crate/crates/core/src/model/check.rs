//! Finite-difference verification of the full coarse and fine losses.

use crate::corpus::{build_vocab, toy_corpus, Document, SentenceType};
use crate::error::{Error, Result};
use crate::nn::{finite_diff_check, GradCheckConfig, GradCheckReport};

use super::hyper::HyperParams;
use super::network::{CoarseModel, EncodedSentence, FineModel};

pub struct ModelGradCheck {
    pub coarse: GradCheckReport,
    pub fine: GradCheckReport,
}

impl ModelGradCheck {
    pub fn max_rel_err(&self) -> f64 {
        self.coarse.max_rel_err().max(self.fine.max_rel_err())
    }

    pub fn passed(&self) -> bool {
        self.coarse.passed() && self.fine.passed()
    }

    pub fn to_tsv(&self) -> String {
        let fine_rows = self.fine.to_tsv();
        let fine_rows = fine_rows.split_once('\n').map_or("", |(_, rest)| rest);
        format!("{}{}", self.coarse.to_tsv(), fine_rows)
    }
}

/// Checks the coarse loss on one statement plus one action, and the fine loss
/// on two actions, taken from `docs` (the built-in toy corpus when empty).
/// The fine report only covers word-level parameters, as the coarse report
/// already covers the shared ones.
pub fn model_gradcheck(hp: HyperParams, docs: &[Document], cfg: GradCheckConfig) -> Result<ModelGradCheck> {
    let toy;
    let docs = if docs.is_empty() {
        toy = toy_corpus();
        &toy[..]
    } else {
        docs
    };
    let mut model = CoarseModel::new(hp, build_vocab(docs, 1), None)?;
    let sentences: Vec<EncodedSentence> = docs.iter().flat_map(|d| &d.sentences).map(|s| model.encode(s)).collect();
    let pick = |ty: SentenceType, n: usize| -> Result<Vec<EncodedSentence>> {
        let chosen: Vec<EncodedSentence> = sentences.iter().filter(|s| s.s_type == ty).take(n).cloned().collect();
        if chosen.len() < n {
            return Err(Error::Config(format!("gradient check needs {n} {ty:?} sentence(s)")));
        }
        Ok(chosen)
    };
    let mut coarse_batch = pick(SentenceType::Statement, 1)?;
    coarse_batch.extend(pick(SentenceType::Action, 1)?);
    let fine_batch = pick(SentenceType::Action, 2)?;

    let coarse = {
        let m = model.clone();
        finite_diff_check(&mut model.store, |g| m.coarse_loss(g, &coarse_batch), cfg)?
    };

    let mut fine = FineModel::attach(model)?;
    let word_level: Vec<String> = fine
        .store()
        .names()
        .filter(|n| n.starts_with("word_gate.") || n.starts_with("st3."))
        .map(str::to_string)
        .collect();
    let saved: Vec<(String, bool)> = fine.store().iter().map(|p| (p.name.clone(), p.trainable)).collect();
    for p in fine.store_mut().iter_mut() {
        p.trainable = word_level.contains(&p.name);
    }
    let fine_report = {
        let m = fine.clone();
        finite_diff_check(fine.store_mut(), |g| m.fine_loss(g, &fine_batch), cfg)?
    };
    for (name, t) in saved {
        fine.store_mut().get_mut(&name)?.trainable = t;
    }
    let fine_report = GradCheckReport {
        tolerance: fine_report.tolerance,
        params: fine_report
            .params
            .into_iter()
            .filter(|p| word_level.contains(&p.name))
            .collect(),
    };
    Ok(ModelGradCheck {
        coarse,
        fine: fine_report,
    })
}
