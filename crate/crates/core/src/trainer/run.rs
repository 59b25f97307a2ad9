use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::log::{LogRow, TrainLog};
use super::metrics::{evaluate, Accuracy};
use crate::corpus::{build_vocab, Document, SentenceType};
use crate::error::{Error, Result};
use crate::layers::load_pretrained;
use crate::model::{
    save_coarse, save_fine, transfer_and_freeze, CoarseModel, EncodedSentence, FineModel, HyperParams, Phase,
};
use crate::nn::{AdamConfig, AdamState, Graph, ParamStore};

#[derive(Debug, Clone)]
pub struct TrainConfig {
    /// Architecture (coarse phase only) and optimization settings.
    pub hp: HyperParams,
    /// Accuracy is computed every `eval_every` iterations and at the last one; 0 disables.
    pub eval_every: usize,
    pub dev_fraction: f64,
    pub min_freq: usize,
    pub pretrained: Option<PathBuf>,
    pub best_checkpoint: Option<PathBuf>,
    pub final_checkpoint: Option<PathBuf>,
    /// Record wall-clock milliseconds in the log; off keeps logs reproducible.
    pub timing: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hp: HyperParams::default(),
            eval_every: 100,
            dev_fraction: 0.1,
            min_freq: 1,
            pretrained: None,
            best_checkpoint: None,
            final_checkpoint: None,
            timing: false,
        }
    }
}

pub struct TrainOutcome<M> {
    pub model: M,
    pub log: TrainLog,
    /// Selection score of the best checkpoint and the iteration that produced it.
    pub best: Option<(f64, usize)>,
}

const SHUFFLE_STREAM: u64 = 0x5348;
const DEV_STREAM: u64 = 0x4445;

/// Splits off `fraction` of the documents as a dev slice. With fewer than
/// one document's worth, the training documents double as the dev set.
pub fn dev_slice(docs: &[Document], fraction: f64, seed: u64) -> (Vec<Document>, Vec<Document>) {
    let n_dev = ((docs.len() as f64) * fraction).floor() as usize;
    if n_dev == 0 || n_dev >= docs.len() {
        return (docs.to_vec(), docs.to_vec());
    }
    let mut order: Vec<usize> = (0..docs.len()).collect();
    let mut rng = ParamStore::new(seed).rng_for(DEV_STREAM);
    order.shuffle(&mut rng);
    let dev: Vec<usize> = order[..n_dev].to_vec();
    let (mut train, mut held) = (Vec::new(), Vec::new());
    for (i, d) in docs.iter().enumerate() {
        if dev.contains(&i) {
            held.push(d.clone());
        } else {
            train.push(d.clone());
        }
    }
    (train, held)
}

/// Yields mini-batches, reshuffling whenever the remaining items cannot fill one.
struct Batcher {
    order: Vec<usize>,
    pos: usize,
    size: usize,
    rng: ChaCha8Rng,
}

impl Batcher {
    fn new(n: usize, size: usize, seed: u64, stream: u64) -> Self {
        let mut rng = ParamStore::new(seed).rng_for(stream);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        Self {
            order,
            pos: 0,
            size: size.min(n),
            rng,
        }
    }

    fn next(&mut self) -> &[usize] {
        if self.pos + self.size > self.order.len() {
            self.order.shuffle(&mut self.rng);
            self.pos = 0;
        }
        let b = &self.order[self.pos..self.pos + self.size];
        self.pos += self.size;
        b
    }
}

fn optimize<F>(
    store: &mut ParamStore,
    adam: &mut AdamState,
    examples: &[EncodedSentence],
    batcher: &mut Batcher,
    loss_fn: F,
) -> Result<f64>
where
    F: Fn(&mut Graph<'_>, &[EncodedSentence]) -> Result<crate::nn::Var>,
{
    let batch: Vec<EncodedSentence> = batcher.next().iter().map(|&i| examples[i].clone()).collect();
    let (loss, grads) = {
        let mut g = Graph::new(store);
        let l = loss_fn(&mut g, &batch)?;
        (g.scalar(l), g.backward(l)?)
    };
    store.set_grads(&grads)?;
    adam.step(store)?;
    Ok(loss)
}

fn score(phase: Phase, acc: &Accuracy) -> f64 {
    match phase {
        Phase::Coarse => {
            let rates: Vec<f64> = [acc.st1.rate(), acc.st2.rate()].into_iter().flatten().collect();
            rates.iter().sum::<f64>() / rates.len().max(1) as f64
        }
        Phase::Fine => acc.st3.rate().unwrap_or(0.0),
    }
}

/// Builds a fresh coarse model for `docs`, with optional pretrained vectors.
pub fn init_coarse(docs: &[Document], cfg: &TrainConfig) -> Result<CoarseModel> {
    let vocab = build_vocab(docs, cfg.min_freq);
    let mut model = CoarseModel::new(cfg.hp.clone(), vocab, None)?;
    if let Some(path) = &cfg.pretrained {
        let id = model.shared.embedding.param();
        let fallback = model.store.by_id(id).value.clone();
        let (table, found) = load_pretrained(path, model.vocab.as_map(), fallback)?;
        log::info!("pretrained vectors found for {found} of {} vocabulary entries", model.vocab.len());
        model.store.by_id_mut(id).value = table;
    }
    Ok(model)
}

pub fn train_coarse(docs: &[Document], cfg: &TrainConfig) -> Result<TrainOutcome<CoarseModel>> {
    train_coarse_observed(docs, cfg, |_, _| Ok(()))
}

/// As [`train_coarse`], calling `observe(iteration, model)` after every step.
pub fn train_coarse_observed<O>(docs: &[Document], cfg: &TrainConfig, mut observe: O) -> Result<TrainOutcome<CoarseModel>>
where
    O: FnMut(usize, &CoarseModel) -> Result<()>,
{
    if docs.iter().all(|d| d.sentences.is_empty()) {
        return Err(Error::Empty("train_coarse"));
    }
    let (train, dev) = dev_slice(docs, cfg.dev_fraction, cfg.hp.seed);
    let mut model = init_coarse(&train, cfg)?;
    let examples: Vec<EncodedSentence> = train.iter().flat_map(|d| &d.sentences).map(|s| model.encode(s)).collect();
    let mut batcher = Batcher::new(examples.len(), cfg.hp.batch, cfg.hp.seed, SHUFFLE_STREAM);
    let mut adam = AdamState::new(AdamConfig {
        lr: cfg.hp.lr,
        ..Default::default()
    });
    let start = Instant::now();
    let mut log = TrainLog::default();
    let mut best: Option<(f64, usize)> = None;
    for it in 1..=cfg.hp.iterations {
        let loss = {
            // layers hold parameter ids only, so the store can be lent out during the step
            let mut store = std::mem::replace(&mut model.store, ParamStore::new(0));
            let m = &model;
            let l = optimize(&mut store, &mut adam, &examples, &mut batcher, |g, b| m.coarse_loss(g, b));
            model.store = store;
            l?
        };
        model.coarse_steps += 1;
        let mut row = LogRow {
            iteration: it,
            phase: Phase::Coarse,
            loss,
            st1_acc: None,
            st2_acc: None,
            st3_acc: None,
            millis: if cfg.timing { start.elapsed().as_millis() } else { 0 },
        };
        if (cfg.eval_every > 0 && it % cfg.eval_every == 0) || it == cfg.hp.iterations {
            let acc = evaluate(&dev, Some(&model), None)?;
            row.st1_acc = acc.st1.rate();
            row.st2_acc = acc.st2.rate();
            let s = score(Phase::Coarse, &acc);
            if best.is_none_or(|(b, _)| s > b) {
                best = Some((s, it));
                if let Some(p) = &cfg.best_checkpoint {
                    save_coarse(&model, p)?;
                }
            }
        }
        log.rows.push(row);
        observe(it, &model)?;
    }
    if let Some(p) = &cfg.final_checkpoint {
        save_coarse(&model, p)?;
    }
    Ok(TrainOutcome { model, log, best })
}

pub fn train_fine(docs: &[Document], coarse: CoarseModel, cfg: &TrainConfig) -> Result<TrainOutcome<FineModel>> {
    train_fine_observed(docs, coarse, cfg, |_, _| Ok(()))
}

/// Transfers `coarse`, then optimizes the word-level loss. `observe(0, ..)`
/// sees the model right after transfer, before any update.
pub fn train_fine_observed<O>(
    docs: &[Document],
    mut coarse: CoarseModel,
    cfg: &TrainConfig,
    mut observe: O,
) -> Result<TrainOutcome<FineModel>>
where
    O: FnMut(usize, &FineModel) -> Result<()>,
{
    coarse.hp.freeze_shared = cfg.hp.freeze_shared;
    let mut model = transfer_and_freeze(coarse)?;
    let (train, dev) = dev_slice(docs, cfg.dev_fraction, cfg.hp.seed);
    let examples: Vec<EncodedSentence> = train
        .iter()
        .flat_map(|d| &d.sentences)
        .filter(|s| s.s_type == SentenceType::Action)
        .map(|s| model.coarse.encode(s))
        .collect();
    if examples.is_empty() {
        return Err(Error::Empty("train_fine: no ACTION sentences"));
    }
    let mut batcher = Batcher::new(examples.len(), cfg.hp.batch, cfg.hp.seed, SHUFFLE_STREAM + 1);
    let mut adam = AdamState::new(AdamConfig {
        lr: cfg.hp.lr,
        ..Default::default()
    });
    observe(0, &model)?;
    let start = Instant::now();
    let mut log = TrainLog::default();
    let mut best: Option<(f64, usize)> = None;
    for it in 1..=cfg.hp.iterations {
        let loss = {
            let mut store = std::mem::replace(model.store_mut(), ParamStore::new(0));
            let m = &model;
            let l = optimize(&mut store, &mut adam, &examples, &mut batcher, |g, b| m.fine_loss(g, b));
            *model.store_mut() = store;
            l?
        };
        model.fine_steps += 1;
        let mut row = LogRow {
            iteration: it,
            phase: Phase::Fine,
            loss,
            st1_acc: None,
            st2_acc: None,
            st3_acc: None,
            millis: if cfg.timing { start.elapsed().as_millis() } else { 0 },
        };
        if (cfg.eval_every > 0 && it % cfg.eval_every == 0) || it == cfg.hp.iterations {
            let acc = evaluate(&dev, None, Some(&model))?;
            row.st3_acc = acc.st3.rate();
            let s = score(Phase::Fine, &acc);
            if best.is_none_or(|(b, _)| s > b) {
                best = Some((s, it));
                if let Some(p) = &cfg.best_checkpoint {
                    save_fine(&model, p)?;
                }
            }
        }
        log.rows.push(row);
        observe(it, &model)?;
    }
    if let Some(p) = &cfg.final_checkpoint {
        save_fine(&model, p)?;
    }
    Ok(TrainOutcome { model, log, best })
}

/// Initial word-level loss over all ACTION sentences of `docs`, before any fine step.
pub fn initial_fine_loss(docs: &[Document], fine: &FineModel) -> Result<f64> {
    let examples: Vec<EncodedSentence> = docs
        .iter()
        .flat_map(|d| &d.sentences)
        .filter(|s| s.s_type == SentenceType::Action)
        .map(|s| fine.coarse.encode(s))
        .collect();
    let mut g = Graph::new(fine.store());
    let l = fine.fine_loss(&mut g, &examples)?;
    Ok(g.scalar(l))
}
