//! Tree → label stream, the inverse of [`parse_labels`](super::parse_labels).

use super::pst::{branch, push_flat, ActionNode, Pst};
use crate::corpus::{Sentence, SentenceSemantic, WordTag};

fn action_sentence(a: &ActionNode) -> Sentence {
    let mut tokens = Vec::new();
    let mut tags = Vec::new();
    for (part, tag) in [(&a.role, WordTag::Role), (&a.name, WordTag::ActionName), (&a.object, WordTag::Object)] {
        for w in part.split_whitespace() {
            tokens.push(w.to_string());
            tags.push(tag);
        }
    }
    let refs: Vec<&str> = tokens.iter().map(String::as_str).collect();
    Sentence::action(&tokens.join(" "), &refs, &tags)
}

fn control(sem: SentenceSemantic) -> Sentence {
    let sym = sem.symbol().to_string();
    Sentence::statement(&sym, &[&sym], sem)
}

struct Emitter {
    implicit: bool,
    out: Vec<Sentence>,
}

impl Emitter {
    fn seq(&mut self, elems: &[Pst]) {
        for (i, e) in elems.iter().enumerate() {
            let next_is_action = matches!(elems.get(i + 1), Some(Pst::Leaf(_)));
            self.elem(e, next_is_action);
        }
    }

    fn elem(&mut self, p: &Pst, next_is_action: bool) {
        match p {
            Pst::Leaf(a) => self.out.push(action_sentence(a)),
            Pst::Seq(c) => self.seq(c),
            Pst::Xor(c) | Pst::And(c) => {
                self.out.push(control(if matches!(p, Pst::Xor(_)) {
                    SentenceSemantic::Optional
                } else {
                    SentenceSemantic::Concurrent
                }));
                let leaves_only = c.iter().all(|b| matches!(b, Pst::Leaf(_)));
                if self.implicit && leaves_only && !next_is_action {
                    self.seq(c);
                } else {
                    for b in c {
                        self.out.push(control(SentenceSemantic::BlockBegin));
                        match b {
                            Pst::Seq(inner) => self.seq(inner),
                            other => self.elem(other, false),
                        }
                        self.out.push(control(SentenceSemantic::BlockEnd));
                    }
                }
            }
        }
    }
}

/// Emits one sentence per action and control symbol. With `implicit_when_safe`,
/// gateways whose branches are single actions drop their ▷ ◁ pairs unless an
/// action follows the gateway directly.
pub fn pst_to_labels(pst: &Pst, implicit_when_safe: bool) -> Vec<Sentence> {
    let mut e = Emitter {
        implicit: implicit_when_safe,
        out: Vec::new(),
    };
    e.elem(pst, false);
    e.out
}

/// Canonical form produced by the parser: a flat root sequence, no nested
/// sequences inside sequences, gateways with at least two branches and
/// single-element branches unwrapped.
pub fn normalize(pst: &Pst) -> Pst {
    let mut root = Vec::new();
    norm_into(pst, &mut root);
    Pst::Seq(root)
}

fn norm_into(p: &Pst, seq: &mut Vec<Pst>) {
    match p {
        Pst::Leaf(_) => seq.push(p.clone()),
        Pst::Seq(c) => c.iter().for_each(|x| norm_into(x, seq)),
        Pst::Xor(c) | Pst::And(c) => {
            let branches: Vec<Pst> = c
                .iter()
                .map(|b| {
                    let mut body = Vec::new();
                    norm_into(b, &mut body);
                    branch(body)
                })
                .collect();
            match branches.len() {
                0 => {}
                1 => push_flat(seq, branches.into_iter().next().unwrap()),
                _ => seq.push(if matches!(p, Pst::Xor(_)) {
                    Pst::Xor(branches)
                } else {
                    Pst::And(branches)
                }),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembler::{parse_labels, ParseMode};

    fn leaf(name: &str) -> Pst {
        Pst::Leaf(ActionNode {
            id: 0,
            role: String::new(),
            name: name.into(),
            object: "it".into(),
            sentence: 0,
        })
    }

    #[test]
    fn implicit_only_when_safe() {
        let t = Pst::Seq(vec![Pst::Xor(vec![leaf("a"), leaf("b")]), leaf("c")]);
        let labels = pst_to_labels(&t, true);
        assert_eq!(labels.len(), 8);
        let t2 = Pst::Seq(vec![Pst::And(vec![leaf("a"), leaf("b")])]);
        assert_eq!(pst_to_labels(&t2, true).len(), 3);
        for t in [t, t2] {
            for implicit in [false, true] {
                let (back, diags) = parse_labels(&pst_to_labels(&t, implicit), ParseMode::Strict).unwrap();
                assert!(back.isomorphic(&t), "{}", back.outline());
                assert!(diags.is_empty());
            }
        }
    }

    #[test]
    fn normalize_collapses_degenerate_nodes() {
        let t = Pst::Seq(vec![Pst::Seq(vec![leaf("a"), Pst::Xor(vec![Pst::Seq(vec![leaf("b")])])]), Pst::Xor(vec![])]);
        assert_eq!(normalize(&t).outline(), "Seq[a, b]");
        let t = Pst::And(vec![Pst::Seq(vec![leaf("a")]), Pst::Xor(vec![])]);
        assert_eq!(normalize(&t).outline(), "Seq[And[a, Seq[]]]");
    }
}
