//! Neural building blocks recorded on the gradient tape.

pub mod conv;
pub mod embedding;
pub mod gate;
pub mod lstm;
pub mod mlp;

pub use conv::ConvFilterBank;
pub use embedding::{load_pretrained, EmbeddingTable, OOV_INDEX, PAD_INDEX};
pub use gate::GateFusion;
pub use lstm::{BiLstm, BiLstmOutput, LstmCell};
pub use mlp::{MlpHead, MlpOutput};
