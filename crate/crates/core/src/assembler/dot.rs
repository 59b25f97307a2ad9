use std::fmt::Write as _;

use super::graph::{Node, ProcessModel};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz source. Output depends only on the model, so equal models give equal bytes.
pub fn to_dot(m: &ProcessModel) -> String {
    let mut out = String::from("digraph process {\n  rankdir=LR;\n");
    for (i, n) in m.nodes.iter().enumerate() {
        let attrs = match n {
            Node::Start => "shape=circle, label=\"\"".to_string(),
            Node::End => "shape=doublecircle, label=\"\"".to_string(),
            Node::Action(a) => format!("shape=box, label=\"{}\"", escape(&a.label())),
            Node::Split { kind, .. } | Node::Join { kind } => format!("shape=diamond, label=\"{}\"", kind.symbol()),
        };
        let _ = writeln!(out, "  n{i} [{attrs}];");
    }
    for (a, b) in &m.edges {
        let _ = writeln!(out, "  n{a} -> n{b};");
    }
    out.push_str("}\n");
    out
}
