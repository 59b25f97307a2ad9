use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::{init, Graph, ParamId, ParamStore, Tensor, Var};

pub const PAD_INDEX: usize = 0;
pub const OOV_INDEX: usize = 1;

/// Word-vector lookup table. Row `OOV_INDEX` absorbs unknown tokens.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    pub vocab_size: usize,
    pub dim: usize,
    pub oov_index: usize,
    matrix: ParamId,
}

impl EmbeddingTable {
    /// Random rows drawn from `U(±√(3/dim))` (unit variance per row).
    pub fn new<R: Rng>(store: &mut ParamStore, name: &str, vocab_size: usize, dim: usize, trainable: bool, rng: &mut R) -> Result<Self> {
        if vocab_size <= OOV_INDEX || dim == 0 {
            return Err(Error::Config(format!("embedding needs vocab > {OOV_INDEX} and dim > 0")));
        }
        let limit = (3.0 / dim as f64).sqrt();
        let mut matrix = init::uniform(rng, limit, &[vocab_size, dim]);
        matrix.data_mut()[..dim].iter_mut().for_each(|v| *v = 0.0);
        Self::from_matrix(store, name, matrix, trainable)
    }

    pub fn from_matrix(store: &mut ParamStore, name: &str, matrix: Tensor, trainable: bool) -> Result<Self> {
        let (vocab_size, dim) = match matrix.shape() {
            [v, d] if *v > OOV_INDEX => (*v, *d),
            other => return Err(Error::shape("embedding", format!("bad table shape {other:?}"))),
        };
        let matrix = store.add(name, matrix, trainable)?;
        Ok(Self {
            vocab_size,
            dim,
            oov_index: OOV_INDEX,
            matrix,
        })
    }

    pub fn param(&self) -> ParamId {
        self.matrix
    }

    pub fn trainable(&self, store: &ParamStore) -> bool {
        store.by_id(self.matrix).trainable
    }

    /// `[n × dim]`; out-of-range indices map to the OOV row.
    pub fn embed(&self, g: &mut Graph<'_>, tokens: &[usize]) -> Result<Var> {
        let ids: Vec<usize> = tokens
            .iter()
            .map(|&t| if t < self.vocab_size { t } else { self.oov_index })
            .collect();
        g.gather(self.matrix, &ids)
    }
}

/// Reads whitespace-delimited vectors (`token v1 .. vdim` per line, optional
/// `count dim` header) and places them into rows of a table indexed by
/// `vocab`. Tokens absent from the file keep the rows of `fallback`.
/// Returns the filled table and how many vocabulary entries were found.
pub fn load_pretrained(path: impl AsRef<Path>, vocab: &HashMap<String, usize>, fallback: Tensor) -> Result<(Tensor, usize)> {
    let text = fs::read_to_string(path)?;
    let (rows, dim) = match fallback.shape() {
        [r, d] => (*r, *d),
        _ => return Err(Error::shape("load_pretrained", "fallback must be 2-D")),
    };
    let mut table = fallback;
    let mut found = 0;
    for (lineno, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if lineno == 0 && fields.len() == 2 && fields.iter().all(|f| f.parse::<usize>().is_ok()) {
            let header_dim: usize = fields[1].parse().unwrap_or(0);
            if header_dim != dim {
                return Err(Error::Config(format!("pretrained vectors have dim {header_dim}, model expects {dim}")));
            }
            continue;
        }
        if fields.len() != dim + 1 {
            return Err(Error::Corpus {
                line: lineno + 1,
                message: format!("expected token plus {dim} values, found {} fields", fields.len()),
            });
        }
        let Some(&row) = vocab.get(fields[0]) else { continue };
        if row >= rows {
            continue;
        }
        for (j, f) in fields[1..].iter().enumerate() {
            let v: f32 = f.parse().map_err(|_| Error::Corpus {
                line: lineno + 1,
                message: format!("bad float `{f}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite("load_pretrained"));
            }
            table.data_mut()[row * dim + j] = v;
        }
        found += 1;
    }
    Ok((table, found))
}
