use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::profile::behavior_similarity;
use crate::assembler::{parse_labels, ParseMode};
use crate::corpus::{split_kfold, Document, Split};
use crate::error::{Error, Result};
use crate::model::{predict_document, CoarseModel, FineModel};
use crate::trainer::{evaluate, train_coarse, train_fine, Accuracy, TrainConfig};

/// Per-task results as fractions; `None` where nothing was scored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Scores {
    pub st1: Option<f64>,
    pub st2: Option<f64>,
    pub st3: Option<f64>,
    pub pme: Option<f64>,
}

impl Scores {
    pub fn from_accuracy(acc: &Accuracy, pme: Option<f64>) -> Self {
        Self {
            st1: acc.st1.rate(),
            st2: acc.st2.rate(),
            st3: acc.st3.rate(),
            pme,
        }
    }

    pub fn columns(&self) -> [Option<f64>; 4] {
        [self.st1, self.st2, self.st3, self.pme]
    }
}

pub const COLUMNS: [&str; 4] = ["ST1", "ST2", "ST3", "PME"];

/// Mean behaviour similarity between models assembled from predicted and gold labels.
pub fn process_similarity(docs: &[Document], coarse: &CoarseModel, fine: Option<&FineModel>) -> Result<Option<f64>> {
    if docs.is_empty() {
        return Ok(None);
    }
    let values = docs
        .par_iter()
        .map(|doc| {
            let predicted = predict_document(coarse, fine, doc)?;
            let (gold, _) = parse_labels(&doc.sentences, ParseMode::Lenient)?;
            let (extracted, _) = parse_labels(&predicted.sentences, ParseMode::Lenient)?;
            Ok(behavior_similarity(&extracted, &gold).value)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Some(values.iter().sum::<f64>() / values.len() as f64))
}

/// Trains both phases on `split.train` and scores them on `split.test`.
pub fn train_and_score(split: &Split, cfg: &TrainConfig) -> Result<Scores> {
    let coarse = train_coarse(&split.train, cfg)?.model;
    let fine = train_fine(&split.train, coarse, cfg)?.model;
    let acc = evaluate(&split.test, Some(&fine.coarse), Some(&fine))?;
    let pme = process_similarity(&split.test, &fine.coarse, Some(&fine))?;
    Ok(Scores::from_accuracy(&acc, pme))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
    pub n: usize,
}

pub fn mean_std(values: &[f64]) -> Option<MeanStd> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Some(MeanStd { mean, std, n })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_docs: usize,
    pub test_docs: usize,
    pub scores: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KFoldReport {
    pub seed: u64,
    pub folds: Vec<FoldResult>,
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{:.2}", 100.0 * x))
}

impl KFoldReport {
    pub fn summary(&self) -> [Option<MeanStd>; 4] {
        std::array::from_fn(|c| {
            let vals: Vec<f64> = self.folds.iter().filter_map(|f| f.scores.columns()[c]).collect();
            mean_std(&vals)
        })
    }

    /// Per-fold rows in percent, then mean ± std.
    pub fn to_text(&self) -> String {
        let mut out = format!("{:<8}{:>8}", "fold", "test");
        for c in COLUMNS {
            let _ = write!(out, "{c:>16}");
        }
        out.push('\n');
        for f in &self.folds {
            let _ = write!(out, "{:<8}{:>8}", f.fold, f.test_docs);
            for v in f.scores.columns() {
                let _ = write!(out, "{:>16}", pct(v));
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<8}{:>8}", "mean", "");
        for m in self.summary() {
            let cell = m.map_or_else(|| "-".to_string(), |m| format!("{:.2}±{:.2}", 100.0 * m.mean, 100.0 * m.std));
            let _ = write!(out, "{cell:>16}");
        }
        out.push('\n');
        out
    }

    /// `fold,train_docs,test_docs,st1,st2,st3,pme` with fractions; empty cells for missing values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fold,train_docs,test_docs,st1,st2,st3,pme\n");
        for f in &self.folds {
            let cells: Vec<String> = f
                .scores
                .columns()
                .iter()
                .map(|v| v.map_or_else(String::new, |x| format!("{x:.6}")))
                .collect();
            let _ = writeln!(out, "{},{},{},{}", f.fold, f.train_docs, f.test_docs, cells.join(","));
        }
        out
    }
}

/// Runs `run` once per fold with a fresh model each time. Folds execute on a
/// pool of `jobs` threads (0 picks the default); results keep fold order.
pub fn kfold_evaluate<F>(docs: &[Document], folds: usize, seed: u64, jobs: usize, run: F) -> Result<KFoldReport>
where
    F: Fn(&Split) -> Result<Scores> + Sync,
{
    let splits = split_kfold(docs, folds, seed)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results = pool.install(|| {
        splits
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                Ok(FoldResult {
                    fold: i + 1,
                    train_docs: s.train.len(),
                    test_docs: s.test.len(),
                    scores: run(s)?,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(KFoldReport { seed, folds: results })
}

/// Text table for a single train/test evaluation.
pub fn scores_table(scores: &Scores) -> String {
    let mut head = String::new();
    let mut row = String::new();
    for (c, v) in COLUMNS.iter().zip(scores.columns()) {
        let _ = write!(head, "{c:>10}");
        let _ = write!(row, "{:>10}", pct(v));
    }
    format!("{head}\n{row}\n")
}
