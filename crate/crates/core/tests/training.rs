use mgtc::corpus::{toy_corpus, Sentence, SentenceType};
use mgtc::model::{predict_sentence, transfer_and_freeze, CoarseModel, HyperParams};
use mgtc::nn::checkpoint;
use mgtc::trainer::{evaluate, train_coarse, train_fine, Accuracy, TrainConfig};
use mgtc::Error;

fn cfg(seed: u64, iterations: usize, lr: f64) -> TrainConfig {
    TrainConfig {
        hp: HyperParams {
            embed_dim: 12,
            hid: 8,
            filters_per_size: 4,
            head_hidden: 12,
            seed,
            iterations,
            lr,
            ..HyperParams::default()
        },
        eval_every: 50,
        ..TrainConfig::default()
    }
}

#[test]
fn same_seed_same_trajectory() {
    let docs = toy_corpus();
    let run = |seed| {
        let c = train_coarse(&docs, &cfg(seed, 60, 1e-3)).unwrap();
        let clog = c.log.to_csv();
        let f = train_fine(&docs, c.model, &cfg(seed, 60, 1e-3)).unwrap();
        (checkpoint::encode(f.model.store()), clog, f.log.to_csv())
    };
    let a = run(4);
    assert_eq!(a, run(4));
    assert_ne!(a.0, run(5).0);
}

fn median_filter(xs: &[f64], half: usize) -> Vec<f64> {
    (0..xs.len())
        .map(|i| {
            let mut w = xs[i.saturating_sub(half)..(i + half + 1).min(xs.len())].to_vec();
            w.sort_by(f64::total_cmp);
            w[w.len() / 2]
        })
        .collect()
}

#[test]
fn smoothed_loss_does_not_rise_over_any_100_iterations() {
    let docs = toy_corpus();
    let c = train_coarse(&docs, &cfg(0, 400, 1e-3)).unwrap();
    let f = train_fine(&docs, c.model, &cfg(0, 400, 1e-3)).unwrap();
    for losses in [c.log.losses(), f.log.losses()] {
        let m = median_filter(&losses, 10);
        for t in 0..m.len() - 100 {
            assert!(m[t + 100] <= m[t], "iteration {}: {} > {}", t + 101, m[t + 100], m[t]);
        }
        assert!(m[m.len() - 1] < 0.5 * m[0]);
    }
}

#[test]
fn fine_phase_requires_coarse_training() {
    let docs = toy_corpus();
    let c = cfg(0, 5, 1e-3);
    let fresh = mgtc::trainer::init_coarse(&docs, &c).unwrap();
    assert!(matches!(transfer_and_freeze(fresh.clone()), Err(Error::Config(_))));
    assert!(train_fine(&docs, fresh, &c).is_err());
}

/// Per-item counting with the public prediction API.
fn naive_accuracy(docs: &[mgtc::corpus::Document], coarse: &CoarseModel, fine: &mgtc::model::FineModel) -> [(usize, usize); 3] {
    let mut t = [(0, 0); 3];
    for s in docs.iter().flat_map(|d| &d.sentences) {
        let Sentence { tokens, s_type, s_semantic, word_tags, .. } = s;
        let pred = predict_sentence(coarse, Some(fine), tokens).unwrap();
        t[0].0 += usize::from(pred.s_type == *s_type);
        t[0].1 += 1;
        if let Some(gold) = s_semantic {
            // ST2 is scored as if ST1 were right
            t[1].0 += usize::from(st2_only(coarse, tokens) == *gold);
            t[1].1 += 1;
        }
        if *s_type == SentenceType::Action {
            let tags = mgtc::model::predict_tags(fine, tokens).unwrap();
            for (p, g) in tags.iter().zip(word_tags) {
                t[2].0 += usize::from(p == g);
                t[2].1 += 1;
            }
        }
    }
    t
}

fn st2_only(coarse: &CoarseModel, tokens: &[String]) -> mgtc::corpus::SentenceSemantic {
    let ids = coarse.vocab.encode(tokens);
    let mut g = mgtc::nn::Graph::new(&coarse.store);
    let f = coarse.shared.features(&mut g, &ids).unwrap();
    let st1 = coarse.forward_st1(&mut g, f.v).unwrap();
    let logits = coarse.forward_st2(&mut g, f.v, st1.z_s).unwrap();
    let row = g.value(logits);
    let best = (0..row.len()).fold(0, |b, i| if row[i] > row[b] { i } else { b });
    mgtc::corpus::SentenceSemantic::from_index(best).unwrap()
}

#[test]
fn accuracy_matches_naive_count() {
    let docs = toy_corpus();
    let c = train_coarse(&docs, &cfg(2, 40, 1e-3)).unwrap();
    let f = train_fine(&docs, c.model, &cfg(2, 40, 1e-3)).unwrap().model;
    let acc: Accuracy = evaluate(&docs, Some(&f.coarse), Some(&f)).unwrap();
    let naive = naive_accuracy(&docs, &f.coarse, &f);
    assert_eq!((acc.st1.correct, acc.st1.total), naive[0]);
    assert_eq!((acc.st2.correct, acc.st2.total), naive[1]);
    assert_eq!((acc.st3.correct, acc.st3.total), naive[2]);
}
