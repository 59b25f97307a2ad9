#![allow(dead_code)]

use mgtc::assembler::{ActionNode, Pst};
use mgtc::evaluator::Relation;
use mgtc::layers::{BiLstm, ConvFilterBank, EmbeddingTable, GateFusion, MlpHead};
use mgtc::nn::{finite_diff_check, GradCheckConfig, GradCheckReport, Graph, ParamStore, Var};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LAYER_TOLERANCE: f64 = 1e-4;
pub const MODEL_TOLERANCE: f64 = 1e-3;

fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn targets(rng: &mut ChaCha8Rng, n: usize, classes: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..classes)).collect()
}

/// Cross-entropy of `x · P` against fixed random targets, `P` a constant projection.
fn head_loss(g: &mut Graph<'_>, x: Var, proj: &[f64], classes: usize, t: &[usize]) -> mgtc::Result<Var> {
    let (_, cols) = g.shape(x);
    let p = g.input(cols, classes, proj.to_vec())?;
    let logits = g.matmul(x, p)?;
    g.softmax_xent(logits, t)
}

fn check<F>(store: &mut ParamStore, f: F) -> GradCheckReport
where
    F: Fn(&mut Graph<'_>) -> mgtc::Result<Var>,
{
    let cfg = GradCheckConfig {
        tolerance: LAYER_TOLERANCE,
        ..GradCheckConfig::default()
    };
    finite_diff_check(store, f, cfg).expect("gradcheck runs")
}

/// Finite-difference reports for every layer type under one seed.
pub fn layer_reports(seed: u64) -> Vec<(&'static str, GradCheckReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, k, classes) = (5, 4, 3);
    let seq = uniform(&mut rng, n * k);
    let t = targets(&mut rng, n, classes);
    let t1 = targets(&mut rng, 1, classes);
    let mut out = Vec::new();

    let mut store = ParamStore::new(seed);
    let emb = EmbeddingTable::new(&mut store, "embedding", 7, k, true, &mut rng).unwrap();
    let ids = [3, 1, 0, 6, 3];
    let proj = uniform(&mut rng, k * classes);
    out.push((
        "embedding",
        check(&mut store, |g| {
            let x = emb.embed(g, &ids)?;
            head_loss(g, x, &proj, classes, &t)
        }),
    ));

    let mut store = ParamStore::new(seed);
    let lstm = BiLstm::new(&mut store, "encoder", k, 3, &mut rng).unwrap();
    let proj = uniform(&mut rng, 6 * classes);
    out.push((
        "bilstm",
        check(&mut store, |g| {
            let x = g.input(n, k, seq.clone())?;
            let enc = lstm.encode(g, x)?;
            head_loss(g, enc.states, &proj, classes, &t)
        }),
    ));

    let mut store = ParamStore::new(seed);
    let conv = ConvFilterBank::new(&mut store, "conv", k, &[1, 2, 3], 4, &mut rng).unwrap();
    let proj = uniform(&mut rng, 12 * classes);
    let short = uniform(&mut rng, 2 * k);
    out.push((
        "conv",
        check(&mut store, |g| {
            let x = g.input(n, k, seq.clone())?;
            let pooled = conv.pooled(g, x)?;
            let v = g.concat_cols(&pooled)?;
            // a sequence shorter than the widest window exercises padding
            let s = g.input(2, k, short.clone())?;
            let pooled = conv.pooled(g, s)?;
            let w = g.concat_cols(&pooled)?;
            let both = g.concat_rows(&[v, w])?;
            head_loss(g, both, &proj, classes, &[t1[0], t[0]])
        }),
    ));

    let mut store = ParamStore::new(seed);
    let gate = GateFusion::new(&mut store, "gate", k, &mut rng).unwrap();
    let proj = uniform(&mut rng, k * classes);
    out.push((
        "gate",
        check(&mut store, |g| {
            let z = g.input(n, k, seq.clone())?;
            let y = gate.apply(g, z)?;
            head_loss(g, y, &proj, classes, &t)
        }),
    ));

    let mut store = ParamStore::new(seed);
    let mlp = MlpHead::new(&mut store, "mlp", k, 6, 3, classes, &mut rng).unwrap();
    out.push((
        "mlp",
        check(&mut store, |g| {
            let x = g.input(n, k, seq.clone())?;
            let o = mlp.forward(g, x)?;
            g.softmax_xent(o.logits, &t)
        }),
    ));
    out
}

pub fn leaf(name: &str, object: &str) -> Pst {
    Pst::Leaf(ActionNode {
        id: 0,
        role: String::new(),
        name: name.into(),
        object: object.into(),
        sentence: 0,
    })
}

/// Normalized trees over at most `max_leaves` distinct actions.
pub fn arb_pst(max_leaves: usize) -> impl Strategy<Value = Pst> {
    let leaf_s = (0usize..1000).prop_map(|i| leaf(&format!("do{i}"), "it"));
    let tree = leaf_s.prop_recursive(3, max_leaves as u32, 4, |inner| {
        (0u8..3, prop::collection::vec(inner, 2..4)).prop_map(|(kind, children)| match kind {
            0 => Pst::Seq(children),
            1 => Pst::Xor(children),
            _ => Pst::And(children),
        })
    });
    tree.prop_filter_map("action budget", move |t| {
        let mut t = mgtc::assembler::normalize(&t);
        if t.leaves().len() > max_leaves {
            return None;
        }
        rename_leaves(&mut t, &mut 0);
        Some(t)
    })
}

/// Gives leaves distinct names in order of appearance.
fn rename_leaves(t: &mut Pst, next: &mut usize) {
    match t {
        Pst::Leaf(a) => {
            a.name = format!("a{next}");
            *next += 1;
        }
        Pst::Seq(c) | Pst::Xor(c) | Pst::And(c) => c.iter_mut().for_each(|x| rename_leaves(x, next)),
    }
}

/// Every complete trace of `t`, each a list of leaf indices in execution order.
pub fn traces(t: &Pst) -> Vec<Vec<usize>> {
    fn go(t: &Pst, next: &mut usize) -> Vec<Vec<usize>> {
        match t {
            Pst::Leaf(_) => {
                *next += 1;
                vec![vec![*next - 1]]
            }
            Pst::Seq(c) => c.iter().fold(vec![vec![]], |acc, x| {
                let tails = go(x, next);
                acc.iter()
                    .flat_map(|h| tails.iter().map(move |tl| [h.clone(), tl.clone()].concat()))
                    .collect()
            }),
            Pst::Xor(c) => c.iter().flat_map(|x| go(x, next)).collect(),
            Pst::And(c) => c.iter().fold(vec![vec![]], |acc, x| {
                let tails = go(x, next);
                let mut out = Vec::new();
                for h in &acc {
                    for tl in &tails {
                        shuffles(h, tl, &mut Vec::new(), &mut out);
                    }
                }
                out
            }),
        }
    }
    go(t, &mut 0)
}

fn shuffles(a: &[usize], b: &[usize], prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if a.is_empty() || b.is_empty() {
        out.push([prefix.as_slice(), a, b].concat());
        return;
    }
    prefix.push(a[0]);
    shuffles(&a[1..], b, prefix, out);
    prefix.pop();
    prefix.push(b[0]);
    shuffles(a, &b[1..], prefix, out);
    prefix.pop();
}

/// Relation of every leaf pair `(i, j)`, `i < j`, read off the complete traces.
/// Strict order pairs are oriented earlier-first.
pub fn pairwise_oracle(t: &Pst) -> Vec<((usize, usize), Relation)> {
    let n = t.leaves().len();
    let all = traces(t);
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (mut before, mut after, mut together) = (false, false, false);
            for tr in &all {
                let (pi, pj) = (tr.iter().position(|&x| x == i), tr.iter().position(|&x| x == j));
                if let (Some(a), Some(b)) = (pi, pj) {
                    together = true;
                    before |= a < b;
                    after |= b < a;
                }
            }
            let rel = match (together, before, after) {
                (false, _, _) => Relation::Exclusive,
                (true, true, true) => Relation::Interleaving,
                _ => Relation::StrictOrder,
            };
            let key = if after && !before { (j, i) } else { (i, j) };
            out.push((key, rel));
        }
    }
    out
}

/// Whether the computed profile of `t` equals the trace oracle on every pair.
pub fn profile_agrees(t: &Pst) -> bool {
    let p = mgtc::evaluator::behavioral_profile(t);
    let keys = mgtc::evaluator::action_keys(t);
    let oracle = pairwise_oracle(t);
    oracle.len() == p.relations.len()
        && oracle.iter().all(|((i, j), rel)| {
            let fwd = p.relations.get(&(keys[*i].clone(), keys[*j].clone()));
            let back = p.relations.get(&(keys[*j].clone(), keys[*i].clone()));
            fwd == Some(rel) || (*rel != Relation::StrictOrder && back == Some(rel))
        })
}
