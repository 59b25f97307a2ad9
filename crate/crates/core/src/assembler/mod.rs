//! Turns sentence labels into a process model.

mod args;
mod diag;
mod dot;
mod emit;
mod graph;
mod parse;
mod pst;

pub use args::extract_args;
pub use diag::{Diagnostic, Severity};
pub use dot::to_dot;
pub use emit::{normalize, pst_to_labels};
pub use graph::{GatewayKind, Node, ProcessModel};
pub use parse::{parse_labels, ParseMode};
pub use pst::{ActionNode, Pst};

use crate::corpus::Document;
use crate::error::Result;

/// Parses a document and converts it to a validated graph.
pub fn assemble(doc: &Document, mode: ParseMode) -> Result<(Pst, ProcessModel, Vec<Diagnostic>)> {
    let (pst, diags) = parse_labels(&doc.sentences, mode)?;
    let model = ProcessModel::from_pst(&pst);
    model.validate()?;
    Ok((pst, model, diags))
}
