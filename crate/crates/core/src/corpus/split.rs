use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::types::Document;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitMode {
    /// 80% train, 20% test.
    Ratio82,
    KFold(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<Document>,
    pub test: Vec<Document>,
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

fn partition(docs: &[Document], test: &[usize]) -> Split {
    let mut split = Split {
        train: Vec::new(),
        test: Vec::new(),
    };
    for (i, d) in docs.iter().enumerate() {
        if test.contains(&i) {
            split.test.push(d.clone());
        } else {
            split.train.push(d.clone());
        }
    }
    split
}

/// Test-set document indices for the 8:2 split. Both sides are nonempty.
pub fn ratio_test_indices(n_docs: usize, seed: u64) -> Result<Vec<usize>> {
    if n_docs < 2 {
        return Err(Error::Config(format!("splitting needs at least 2 documents, got {n_docs}")));
    }
    let n_test = ((n_docs as f64) * 0.2).round().clamp(1.0, (n_docs - 1) as f64) as usize;
    let mut test = shuffled(n_docs, seed)[..n_test].to_vec();
    test.sort_unstable();
    Ok(test)
}

/// Disjoint, exhaustive test folds of contiguous chunks of a seeded shuffle.
/// Fold sizes differ by at most one.
pub fn kfold_indices(n_docs: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 || folds > n_docs {
        return Err(Error::Config(format!(
            "fold count must lie in 2..={n_docs} for {n_docs} documents, got {folds}"
        )));
    }
    let order = shuffled(n_docs, seed);
    let (base, extra) = (n_docs / folds, n_docs % folds);
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        let mut fold = order[start..start + len].to_vec();
        fold.sort_unstable();
        out.push(fold);
        start += len;
    }
    Ok(out)
}

pub fn split_ratio(docs: &[Document], seed: u64) -> Result<Split> {
    Ok(partition(docs, &ratio_test_indices(docs.len(), seed)?))
}

pub fn split_kfold(docs: &[Document], folds: usize, seed: u64) -> Result<Vec<Split>> {
    Ok(kfold_indices(docs.len(), folds, seed)?
        .iter()
        .map(|test| partition(docs, test))
        .collect())
}

pub fn split(docs: &[Document], spec: SplitSpec) -> Result<Vec<Split>> {
    match spec.mode {
        SplitMode::Ratio82 => Ok(vec![split_ratio(docs, spec.seed)?]),
        SplitMode::KFold(n) => split_kfold(docs, n, spec.seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Domain, Sentence, SentenceSemantic};

    fn docs(n: usize) -> Vec<Document> {
        (0..n)
            .map(|i| Document {
                id: format!("d{i}"),
                domain: Domain::Mam,
                sentences: vec![Sentence::statement("x", &["x"], SentenceSemantic::Successive)],
            })
            .collect()
    }

    #[test]
    fn ratio_split_of_ten_is_eight_two_and_seeded() {
        let d = docs(10);
        let s = split_ratio(&d, 3).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (8, 2));
        assert_eq!(split_ratio(&d, 3).unwrap(), s);
        assert!(s.test.iter().all(|t| !s.train.contains(t)));
    }

    #[test]
    fn kfold_five_on_ten() {
        let folds = kfold_indices(10, 5, 9).unwrap();
        assert!(folds.iter().all(|f| f.len() == 2));
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn too_few_documents_or_folds_error() {
        assert!(split_ratio(&docs(1), 0).is_err());
        assert!(kfold_indices(4, 5, 0).is_err());
        assert!(kfold_indices(4, 1, 0).is_err());
    }
}
