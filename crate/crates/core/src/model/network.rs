use std::sync::Arc;

use crate::corpus::{Sentence, SentenceType, Vocab};
use crate::error::{Error, Result};
use crate::layers::{BiLstm, BiLstmOutput, ConvFilterBank, EmbeddingTable, GateFusion, MlpHead};
use crate::nn::{Graph, ParamStore, Tensor, Var};
use crate::registry::{self, SentenceSummary, WordFeatureSource};

use super::hyper::HyperParams;

/// Parameter name prefixes of the heads that only serve the sentence-semantic task.
pub const ST2_PREFIXES: [&str; 2] = ["st2.", "st2_gate."];
pub const SHARED_PREFIXES: [&str; 5] = ["embedding", "encoder.", "conv.", "conv_gate.", "st1."];

mod stream {
    pub const EMBEDDING: u64 = 1;
    pub const ENCODER: u64 = 2;
    pub const CONV: u64 = 3;
    pub const CONV_GATE: u64 = 4;
    pub const ST1: u64 = 5;
    pub const ST2: u64 = 6;
    pub const ST2_GATE: u64 = 7;
    pub const WORD_GATE: u64 = 8;
    pub const ST3: u64 = 9;
}

/// A sentence mapped to vocabulary indices and class indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSentence {
    pub ids: Vec<usize>,
    pub s_type: SentenceType,
    pub semantic: Option<usize>,
    pub tags: Vec<usize>,
}

impl EncodedSentence {
    pub fn new(s: &Sentence, vocab: &Vocab) -> Self {
        Self {
            ids: vocab.encode(&s.tokens),
            s_type: s.s_type,
            semantic: s.s_semantic.map(|x| x.index()),
            tags: s.word_tags.iter().map(|t| t.index()).collect(),
        }
    }
}

pub struct SentenceFeatures {
    pub embedded: Var,
    pub encoded: BiLstmOutput,
    /// `V = z_T ⊕ (g_h ⊗ v̂_h)…`
    pub v: Var,
}

#[derive(Clone)]
pub struct SharedEncoder {
    pub embedding: EmbeddingTable,
    pub encoder: BiLstm,
    pub conv: ConvFilterBank,
    pub conv_gates: Vec<GateFusion>,
    summary: Arc<dyn SentenceSummary>,
}

impl SharedEncoder {
    fn new(store: &mut ParamStore, hp: &HyperParams, vocab_size: usize, embeddings: Option<Tensor>) -> Result<Self> {
        let trainable = !hp.freeze_embeddings;
        let embedding = match embeddings {
            Some(m) => {
                if m.shape() != [vocab_size, hp.embed_dim] {
                    return Err(Error::Config(format!(
                        "pretrained table has shape {:?}, expected [{vocab_size}, {}]",
                        m.shape(),
                        hp.embed_dim
                    )));
                }
                EmbeddingTable::from_matrix(store, "embedding", m, trainable)?
            }
            None => {
                let mut rng = store.rng_for(stream::EMBEDDING);
                EmbeddingTable::new(store, "embedding", vocab_size, hp.embed_dim, trainable, &mut rng)?
            }
        };
        let mut rng = store.rng_for(stream::ENCODER);
        let encoder = BiLstm::new(store, "encoder", hp.embed_dim, hp.hid, &mut rng)?;
        let mut rng = store.rng_for(stream::CONV);
        let conv = ConvFilterBank::new(store, "conv", hp.embed_dim, &hp.window_sizes, hp.filters_per_size, &mut rng)?;
        let mut rng = store.rng_for(stream::CONV_GATE);
        let conv_gates = hp
            .window_sizes
            .iter()
            .map(|h| GateFusion::new(store, &format!("conv_gate.h{h}"), hp.filters_per_size, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            embedding,
            encoder,
            conv,
            conv_gates,
            summary: registry::summaries().get(&hp.summary)?,
        })
    }

    pub fn output_dim(&self) -> usize {
        self.encoder.output_dim() + self.conv.output_dim()
    }

    pub fn features(&self, g: &mut Graph<'_>, ids: &[usize]) -> Result<SentenceFeatures> {
        if ids.is_empty() {
            return Err(Error::Empty("sentence"));
        }
        let embedded = self.embedding.embed(g, ids)?;
        let encoded = self.encoder.encode(g, embedded)?;
        let z_t = self.summary.summarize(g, &encoded)?;
        let mut parts = vec![z_t];
        for (pooled, gate) in self.conv.pooled(g, embedded)?.into_iter().zip(&self.conv_gates) {
            parts.push(gate.apply(g, pooled)?);
        }
        let v = g.concat_cols(&parts)?;
        Ok(SentenceFeatures { embedded, encoded, v })
    }
}

/// Sentence-level network: shared features, the type head and the semantic head.
#[derive(Clone)]
pub struct CoarseModel {
    pub hp: HyperParams,
    pub vocab: Vocab,
    pub store: ParamStore,
    pub shared: SharedEncoder,
    pub st1: MlpHead,
    pub st2: MlpHead,
    pub st1_to_st2_gate: GateFusion,
    /// Optimizer steps taken on the coarse loss.
    pub coarse_steps: u64,
}

pub struct St1Output {
    pub logits: Var,
    /// Input to the type head's output layer.
    pub z_s: Var,
}

impl CoarseModel {
    pub fn new(hp: HyperParams, vocab: Vocab, embeddings: Option<Tensor>) -> Result<Self> {
        hp.validate()?;
        let mut store = ParamStore::new(hp.seed);
        let shared = SharedEncoder::new(&mut store, &hp, vocab.len(), embeddings)?;
        let v_dim = shared.output_dim();
        let mut rng = store.rng_for(stream::ST1);
        let st1 = MlpHead::new(&mut store, "st1", v_dim, hp.head_hidden, hp.mlp_layers, 2, &mut rng)?;
        let zs_dim = st1.last_hidden_dim();
        let mut rng = store.rng_for(stream::ST2);
        let st2 = MlpHead::new(&mut store, "st2", v_dim + zs_dim, hp.head_hidden, hp.mlp_layers, 5, &mut rng)?;
        let mut rng = store.rng_for(stream::ST2_GATE);
        let st1_to_st2_gate = GateFusion::new(&mut store, "st2_gate", zs_dim, &mut rng)?;
        Ok(Self {
            hp,
            vocab,
            store,
            shared,
            st1,
            st2,
            st1_to_st2_gate,
            coarse_steps: 0,
        })
    }

    pub fn encode(&self, s: &Sentence) -> EncodedSentence {
        EncodedSentence::new(s, &self.vocab)
    }

    /// Rows of `v` are sentences.
    pub fn forward_st1(&self, g: &mut Graph<'_>, v: Var) -> Result<St1Output> {
        let out = self.st1.forward(g, v)?;
        Ok(St1Output {
            logits: out.logits,
            z_s: out.last_hidden,
        })
    }

    pub fn forward_st2(&self, g: &mut Graph<'_>, v: Var, z_s: Var) -> Result<Var> {
        if g.shape(v).0 != g.shape(z_s).0 {
            return Err(Error::shape("forward_st2", "sentence features and ST1 hidden rows differ"));
        }
        let gated = self.st1_to_st2_gate.apply(g, z_s)?;
        let input = g.concat_cols(&[v, gated])?;
        Ok(self.st2.forward(g, input)?.logits)
    }

    /// Stacks `V` for every sentence into one matrix.
    pub fn batch_features(&self, g: &mut Graph<'_>, batch: &[EncodedSentence]) -> Result<(Vec<SentenceFeatures>, Var)> {
        let feats = batch
            .iter()
            .map(|s| self.shared.features(g, &s.ids))
            .collect::<Result<Vec<_>>>()?;
        let rows: Vec<Var> = feats.iter().map(|f| f.v).collect();
        let v = g.concat_rows(&rows)?;
        Ok((feats, v))
    }

    /// `λ1·Σ CE(type) + λ2·Σ CE(semantic)`, the second sum over gold statements only.
    pub fn coarse_loss(&self, g: &mut Graph<'_>, batch: &[EncodedSentence]) -> Result<Var> {
        self.coarse_loss_with(g, batch, self.hp.lambda1, self.hp.lambda2)
    }

    pub fn coarse_loss_with(&self, g: &mut Graph<'_>, batch: &[EncodedSentence], lambda1: f64, lambda2: f64) -> Result<Var> {
        if batch.is_empty() {
            return Err(Error::Empty("coarse_loss"));
        }
        let (_, v) = self.batch_features(g, batch)?;
        let st1 = self.forward_st1(g, v)?;
        let mut terms = Vec::with_capacity(2);
        if lambda1 != 0.0 {
            let targets: Vec<usize> = batch.iter().map(|s| s.s_type.index()).collect();
            let ce = g.softmax_xent(st1.logits, &targets)?;
            terms.push(g.scale(ce, lambda1)?);
        }
        let statements: Vec<usize> = (0..batch.len())
            .filter(|&i| batch[i].s_type == SentenceType::Statement)
            .collect();
        if lambda2 != 0.0 && !statements.is_empty() {
            let mut vs = Vec::with_capacity(statements.len());
            let mut zs = Vec::with_capacity(statements.len());
            let mut targets = Vec::with_capacity(statements.len());
            for &i in &statements {
                vs.push(g.row(v, i)?);
                zs.push(g.row(st1.z_s, i)?);
                targets.push(batch[i].semantic.ok_or_else(|| {
                    Error::Config("STATEMENT sentence without a semantic label in coarse_loss".into())
                })?);
            }
            let v2 = g.concat_rows(&vs)?;
            let z2 = g.concat_rows(&zs)?;
            let logits = self.forward_st2(g, v2, z2)?;
            let ce = g.softmax_xent(logits, &targets)?;
            terms.push(g.scale(ce, lambda2)?);
        }
        if terms.is_empty() {
            return g.zeros(1, 1);
        }
        g.sum(&terms)
    }
}

/// Word-level network on top of a transferred coarse model.
#[derive(Clone)]
pub struct FineModel {
    pub coarse: CoarseModel,
    pub word_gate: GateFusion,
    pub st3: MlpHead,
    pub fine_steps: u64,
    word_source: Arc<dyn WordFeatureSource>,
}

impl FineModel {
    /// Adds freshly initialized word-level parameters without checking that
    /// the coarse phase ran. [`transfer_and_freeze`] is the checked entry point.
    pub fn attach(mut coarse: CoarseModel) -> Result<Self> {
        let word_source = registry::word_features().get(&coarse.hp.word_features)?;
        let zw_dim = word_source.dim(coarse.hp.embed_dim, coarse.shared.encoder.output_dim());
        let zs_dim = coarse.st1.last_hidden_dim();
        let store = &mut coarse.store;
        let mut rng = store.rng_for(stream::WORD_GATE);
        let word_gate = GateFusion::new(store, "word_gate", zw_dim, &mut rng)?;
        let mut rng = store.rng_for(stream::ST3);
        let st3 = MlpHead::new(store, "st3", zs_dim + zw_dim, coarse.hp.head_hidden, coarse.hp.mlp_layers, 4, &mut rng)?;
        for prefix in ST2_PREFIXES {
            store.set_trainable_prefix(prefix, false);
        }
        if coarse.hp.freeze_shared {
            for prefix in SHARED_PREFIXES {
                store.set_trainable_prefix(prefix, false);
            }
        }
        Ok(Self {
            coarse,
            word_gate,
            st3,
            fine_steps: 0,
            word_source,
        })
    }

    pub fn store(&self) -> &ParamStore {
        &self.coarse.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.coarse.store
    }

    /// Per-word logits `[n × 4]` from `[z_s, g(z_w) ⊙ z_w]`.
    pub fn forward_st3(&self, g: &mut Graph<'_>, feats: &SentenceFeatures, z_s: Var) -> Result<Var> {
        let z_w = self.word_source.features(g, feats.embedded, &feats.encoded)?;
        let n = g.shape(z_w).0;
        if g.shape(z_s).0 != 1 {
            return Err(Error::shape("forward_st3", "z_s must be a single row"));
        }
        let zs_rows = g.concat_rows(&vec![z_s; n])?;
        let gated = self.word_gate.apply(g, z_w)?;
        let input = g.concat_cols(&[zs_rows, gated])?;
        Ok(self.st3.forward(g, input)?.logits)
    }

    /// `Σ CE` over every word of every sentence in the batch.
    pub fn fine_loss(&self, g: &mut Graph<'_>, batch: &[EncodedSentence]) -> Result<Var> {
        if batch.is_empty() {
            return Err(Error::Empty("fine_loss"));
        }
        if let Some(s) = batch.iter().find(|s| s.s_type != SentenceType::Action || s.tags.len() != s.ids.len()) {
            return Err(Error::Config(format!(
                "fine_loss needs tagged ACTION sentences (got {:?} with {} tags for {} tokens)",
                s.s_type,
                s.tags.len(),
                s.ids.len()
            )));
        }
        let (feats, v) = self.coarse.batch_features(g, batch)?;
        let st1 = self.coarse.forward_st1(g, v)?;
        let mut terms = Vec::with_capacity(batch.len());
        for (i, (s, f)) in batch.iter().zip(&feats).enumerate() {
            let z_s = g.row(st1.z_s, i)?;
            let logits = self.forward_st3(g, f, z_s)?;
            terms.push(g.softmax_xent(logits, &s.tags)?);
        }
        g.sum(&terms)
    }
}

/// Carries the trained coarse parameters over, freezes the semantic head and
/// initializes the word-level gate and head.
pub fn transfer_and_freeze(coarse: CoarseModel) -> Result<FineModel> {
    if coarse.coarse_steps == 0 {
        return Err(Error::Config("coarse model has not been trained; run the coarse phase first".into()));
    }
    FineModel::attach(coarse)
}
