use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionNode {
    pub id: usize,
    pub role: String,
    pub name: String,
    pub object: String,
    /// Index of the source sentence in its document.
    pub sentence: usize,
}

impl ActionNode {
    /// `role: name object`, omitting empty parts.
    pub fn label(&self) -> String {
        let body = [self.name.as_str(), self.object.as_str()]
            .into_iter()
            .filter(|s| !s.is_empty())
            .collect::<Vec<_>>()
            .join(" ");
        if self.role.is_empty() {
            body
        } else {
            format!("{}: {body}", self.role)
        }
    }

    /// Lowercased, whitespace-collapsed `name object`.
    pub fn key(&self) -> String {
        format!("{} {}", self.name, self.object)
            .split_whitespace()
            .map(str::to_lowercase)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Process structure tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pst {
    Seq(Vec<Pst>),
    Xor(Vec<Pst>),
    And(Vec<Pst>),
    #[serde(rename = "action")]
    Leaf(ActionNode),
}

impl Pst {
    pub fn leaves(&self) -> Vec<&ActionNode> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a ActionNode>) {
        match self {
            Pst::Leaf(a) => out.push(a),
            Pst::Seq(c) | Pst::Xor(c) | Pst::And(c) => c.iter().for_each(|x| x.collect_leaves(out)),
        }
    }

    /// Structural equality ignoring leaf ids and sentence positions.
    pub fn isomorphic(&self, other: &Pst) -> bool {
        match (self, other) {
            (Pst::Leaf(a), Pst::Leaf(b)) => a.role == b.role && a.name == b.name && a.object == b.object,
            (Pst::Seq(a), Pst::Seq(b)) | (Pst::Xor(a), Pst::Xor(b)) | (Pst::And(a), Pst::And(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.isomorphic(y))
            }
            _ => false,
        }
    }

    /// Compact form such as `Seq[a, And[b, c]]`, leaves shown by action name.
    pub fn outline(&self) -> String {
        let list = |tag: &str, c: &[Pst]| format!("{tag}[{}]", c.iter().map(Pst::outline).collect::<Vec<_>>().join(", "));
        match self {
            Pst::Leaf(a) => a.name.clone(),
            Pst::Seq(c) => list("Seq", c),
            Pst::Xor(c) => list("Xor", c),
            Pst::And(c) => list("And", c),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }
}

/// A branch body: a single element stands alone, otherwise a sequence.
pub(crate) fn branch(mut elems: Vec<Pst>) -> Pst {
    if elems.len() == 1 {
        elems.pop().unwrap()
    } else {
        Pst::Seq(elems)
    }
}

/// Appends `p` to a sequence, splicing nested sequences.
pub(crate) fn push_flat(seq: &mut Vec<Pst>, p: Pst) {
    match p {
        Pst::Seq(children) => seq.extend(children),
        other => seq.push(other),
    }
}
