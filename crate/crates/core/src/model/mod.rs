//! The multi-grained classifier: shared features, sentence-level heads and the word-level head.

pub mod check;
pub mod hyper;
pub mod network;
pub mod persist;
pub mod predict;

pub use check::{model_gradcheck, ModelGradCheck};
pub use hyper::HyperParams;
pub use network::{
    transfer_and_freeze, CoarseModel, EncodedSentence, FineModel, SentenceFeatures, SharedEncoder, St1Output,
    SHARED_PREFIXES, ST2_PREFIXES,
};
pub use persist::{check_pair, load_coarse, load_fine, read_config, save_coarse, save_fine, sidecar_path, ModelConfig, Phase};
pub use predict::{predict_document, predict_sentence, predict_tags, SentencePrediction};
