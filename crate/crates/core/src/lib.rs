pub mod assembler;
pub mod corpus;
pub mod error;
pub mod evaluator;
pub mod layers;
pub mod model;
pub mod nn;
pub mod registry;
pub mod trainer;

pub use error::{Error, Result};
