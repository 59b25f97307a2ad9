use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use super::pst::{ActionNode, Pst};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GatewayKind {
    Xor,
    And,
}

impl GatewayKind {
    pub fn symbol(self) -> char {
        match self {
            GatewayKind::Xor => '×',
            GatewayKind::And => '+',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Start,
    End,
    Action(ActionNode),
    Split { kind: GatewayKind, join: usize },
    Join { kind: GatewayKind },
}

/// Process graph. Node 0 is the start event, node 1 the end event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProcessModel {
    pub nodes: Vec<Node>,
    pub edges: Vec<(usize, usize)>,
}

impl ProcessModel {
    fn add(&mut self, n: Node) -> usize {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    /// Wires `p` after `from`; returns the node the next element attaches to.
    fn build(&mut self, p: &Pst, from: usize) -> usize {
        match p {
            Pst::Leaf(a) => {
                let id = self.add(Node::Action(a.clone()));
                self.edges.push((from, id));
                id
            }
            Pst::Seq(c) => c.iter().fold(from, |at, x| self.build(x, at)),
            Pst::Xor(c) | Pst::And(c) => {
                let kind = if matches!(p, Pst::Xor(_)) { GatewayKind::Xor } else { GatewayKind::And };
                let split = self.add(Node::Split { kind, join: usize::MAX });
                self.edges.push((from, split));
                let exits: Vec<usize> = c.iter().map(|b| self.build(b, split)).collect();
                let join = self.add(Node::Join { kind });
                self.edges.extend(exits.into_iter().map(|e| (e, join)));
                self.nodes[split] = Node::Split { kind, join };
                join
            }
        }
    }

    pub fn from_pst(pst: &Pst) -> Self {
        let mut m = ProcessModel {
            nodes: vec![Node::Start, Node::End],
            edges: Vec::new(),
        };
        let last = m.build(pst, 0);
        m.edges.push((last, 1));
        m
    }

    pub fn successors(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.0 == n).map(|e| e.1)
    }

    pub fn predecessors(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.1 == n).map(|e| e.0)
    }

    /// Structural soundness: one start and one end, every split paired with a
    /// join of the same kind, no cycles, every node on a start→end path.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Unsound(m));
        let n = self.nodes.len();
        let starts = self.nodes.iter().filter(|x| matches!(x, Node::Start)).count();
        let ends = self.nodes.iter().filter(|x| matches!(x, Node::End)).count();
        if starts != 1 || ends != 1 {
            return bad(format!("{starts} start and {ends} end events"));
        }
        if self.edges.iter().any(|&(a, b)| a >= n || b >= n) {
            return bad("edge refers to a missing node".into());
        }
        let mut joins_seen: HashMap<usize, usize> = HashMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            let (ins, outs) = (self.predecessors(i).count(), self.successors(i).count());
            let ok = match node {
                Node::Start => ins == 0 && outs == 1,
                Node::End => ins == 1 && outs == 0,
                Node::Action(_) => ins == 1 && outs == 1,
                Node::Split { kind, join } => {
                    match self.nodes.get(*join) {
                        Some(Node::Join { kind: k }) if k == kind => {}
                        _ => return bad(format!("split {i} has no matching join")),
                    }
                    *joins_seen.entry(*join).or_default() += 1;
                    ins == 1 && outs >= 2
                }
                Node::Join { .. } => ins >= 2 && outs == 1,
            };
            if !ok {
                return bad(format!("node {i} has {ins} incoming and {outs} outgoing edges"));
            }
        }
        let joins = self.nodes.iter().filter(|x| matches!(x, Node::Join { .. })).count();
        if joins != joins_seen.len() || joins_seen.values().any(|&c| c != 1) {
            return bad("joins and splits are not paired one to one".into());
        }

        let mut indeg: Vec<usize> = (0..n).map(|i| self.predecessors(i).count()).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = 0;
        while let Some(v) = queue.pop_front() {
            order += 1;
            for s in self.successors(v) {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    queue.push_back(s);
                }
            }
        }
        if order != n {
            return bad("graph has a cycle".into());
        }
        let reach = |from: usize, fwd: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![from];
            while let Some(v) = stack.pop() {
                if std::mem::replace(&mut seen[v], true) {
                    continue;
                }
                if fwd {
                    stack.extend(self.successors(v));
                } else {
                    stack.extend(self.predecessors(v));
                }
            }
            seen
        };
        let (f, b) = (reach(0, true), reach(1, false));
        if let Some(i) = (0..n).find(|&i| !(f[i] && b[i])) {
            return bad(format!("node {i} is not on a path from start to end"));
        }
        Ok(())
    }
}
