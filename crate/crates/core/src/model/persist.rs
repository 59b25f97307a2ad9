//! Checkpoints plus a JSON sidecar (`<checkpoint>.json`) holding hyperparameters and vocabulary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::hyper::HyperParams;
use super::network::{CoarseModel, FineModel};
use crate::corpus::Vocab;
use crate::error::{Error, Result};
use crate::nn::{load_checkpoint, save_checkpoint, ParamStore};

pub const CONFIG_FORMAT: &str = "mgtc-model/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Phase {
    Coarse,
    Fine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub format: String,
    pub phase: Phase,
    pub hyperparams: HyperParams,
    pub vocab_hash: String,
    pub coarse_steps: u64,
    pub fine_steps: u64,
    pub vocab: Vocab,
}

pub fn sidecar_path(checkpoint: &Path) -> PathBuf {
    let mut s = checkpoint.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write(store: &ParamStore, config: &ModelConfig, path: &Path) -> Result<()> {
    save_checkpoint(store, path)?;
    let mut json = serde_json::to_string_pretty(config)?;
    json.push('\n');
    fs::write(sidecar_path(path), json)?;
    Ok(())
}

pub fn save_coarse(model: &CoarseModel, path: impl AsRef<Path>) -> Result<()> {
    let config = ModelConfig {
        format: CONFIG_FORMAT.into(),
        phase: Phase::Coarse,
        hyperparams: model.hp.clone(),
        vocab_hash: model.vocab.hash(),
        coarse_steps: model.coarse_steps,
        fine_steps: 0,
        vocab: model.vocab.clone(),
    };
    write(&model.store, &config, path.as_ref())
}

pub fn save_fine(model: &FineModel, path: impl AsRef<Path>) -> Result<()> {
    let c = &model.coarse;
    let config = ModelConfig {
        format: CONFIG_FORMAT.into(),
        phase: Phase::Fine,
        hyperparams: c.hp.clone(),
        vocab_hash: c.vocab.hash(),
        coarse_steps: c.coarse_steps,
        fine_steps: model.fine_steps,
        vocab: c.vocab.clone(),
    };
    write(&c.store, &config, path.as_ref())
}

pub fn read_config(path: impl AsRef<Path>) -> Result<ModelConfig> {
    let side = sidecar_path(path.as_ref());
    let text = fs::read_to_string(&side)
        .map_err(|e| Error::Config(format!("cannot read model config {}: {e}", side.display())))?;
    let config: ModelConfig = serde_json::from_str(&text)?;
    if config.format != CONFIG_FORMAT {
        return Err(Error::Format(format!("unsupported model config `{}`", config.format)));
    }
    if config.vocab.hash() != config.vocab_hash {
        return Err(Error::VocabMismatch {
            expected: config.vocab_hash.clone(),
            found: config.vocab.hash(),
        });
    }
    config.hyperparams.validate()?;
    Ok(config)
}

/// Copies checkpoint values into a freshly built model of the same layout.
fn restore(target: &mut ParamStore, saved: &ParamStore) -> Result<()> {
    if saved.seed() != target.seed() {
        return Err(Error::Format(format!(
            "checkpoint seed {} disagrees with config seed {}",
            saved.seed(),
            target.seed()
        )));
    }
    if let Some(missing) = target.names().find(|n| saved.get(n).is_err()) {
        return Err(Error::Format(format!("checkpoint lacks parameter `{missing}`")));
    }
    target.load_values_from(saved)
}

pub fn load_coarse(path: impl AsRef<Path>) -> Result<CoarseModel> {
    let path = path.as_ref();
    let config = read_config(path)?;
    if config.phase != Phase::Coarse {
        return Err(Error::Config(format!("{} is not a coarse checkpoint", path.display())));
    }
    let mut model = CoarseModel::new(config.hyperparams, config.vocab, None)?;
    restore(&mut model.store, &load_checkpoint(path)?)?;
    model.coarse_steps = config.coarse_steps;
    Ok(model)
}

pub fn load_fine(path: impl AsRef<Path>) -> Result<FineModel> {
    let path = path.as_ref();
    let config = read_config(path)?;
    if config.phase != Phase::Fine {
        return Err(Error::Config(format!("{} is not a fine checkpoint", path.display())));
    }
    let mut coarse = CoarseModel::new(config.hyperparams, config.vocab, None)?;
    coarse.coarse_steps = config.coarse_steps;
    let mut model = FineModel::attach(coarse)?;
    restore(model.store_mut(), &load_checkpoint(path)?)?;
    model.fine_steps = config.fine_steps;
    Ok(model)
}

/// Both models must have been built over the same vocabulary.
pub fn check_pair(coarse: &CoarseModel, fine: &FineModel) -> Result<()> {
    let (a, b) = (coarse.vocab.hash(), fine.coarse.vocab.hash());
    if a != b {
        return Err(Error::VocabMismatch { expected: a, found: b });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, toy_corpus};
    use crate::model::transfer_and_freeze;

    fn coarse() -> CoarseModel {
        let hp = HyperParams {
            embed_dim: 6,
            hid: 4,
            filters_per_size: 3,
            head_hidden: 5,
            seed: 3,
            ..Default::default()
        };
        let mut m = CoarseModel::new(hp, build_vocab(&toy_corpus(), 1), None).unwrap();
        m.coarse_steps = 7;
        m.store.get_mut("st1.b_1").unwrap().value.data_mut()[0] = 0.25;
        m
    }

    #[test]
    fn coarse_and_fine_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = coarse();
        let p = dir.path().join("coarse.ckpt");
        save_coarse(&m, &p).unwrap();
        let back = load_coarse(&p).unwrap();
        assert_eq!(back.store, m.store);
        assert_eq!(back.coarse_steps, 7);
        assert!(load_fine(&p).is_err());

        let fine = transfer_and_freeze(m).unwrap();
        let p = dir.path().join("fine.ckpt");
        save_fine(&fine, &p).unwrap();
        let back = load_fine(&p).unwrap();
        assert_eq!(back.store(), fine.store());
        assert!(!back.store().get("st2.W_1").unwrap().trainable);
    }

    #[test]
    fn tampered_vocab_or_shapes_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.ckpt");
        save_coarse(&coarse(), &p).unwrap();
        let side = sidecar_path(&p);
        let text = fs::read_to_string(&side).unwrap();
        fs::write(&side, text.replacen("\"chill\"", "\"freeze\"", 1)).unwrap();
        assert!(matches!(load_coarse(&p), Err(Error::VocabMismatch { .. })));

        fs::write(&side, &text).unwrap();
        let mut cfg: ModelConfig = serde_json::from_str(&text).unwrap();
        cfg.hyperparams.hid = 5;
        fs::write(&side, serde_json::to_string(&cfg).unwrap()).unwrap();
        match load_coarse(&p) {
            Err(Error::ParamShape { name, .. }) => assert!(name.starts_with("encoder")),
            other => panic!("unexpected {:?}", other.err()),
        }
    }
}
