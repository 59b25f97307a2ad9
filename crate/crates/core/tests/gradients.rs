mod common;

use common::{layer_reports, LAYER_TOLERANCE, MODEL_TOLERANCE};
use mgtc::layers::{BiLstm, ConvFilterBank, GateFusion};
use mgtc::model::{model_gradcheck, HyperParams};
use mgtc::nn::{GradCheckConfig, Graph, ParamStore};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn every_layer_passes_on_five_seeds() {
    for seed in 0..5 {
        for (name, report) in layer_reports(seed) {
            assert!(report.max_rel_err() < LAYER_TOLERANCE, "{name} seed {seed}\n{}", report.to_tsv());
        }
    }
}

fn small() -> HyperParams {
    HyperParams {
        embed_dim: 6,
        hid: 4,
        window_sizes: vec![1, 3],
        filters_per_size: 3,
        head_hidden: 5,
        ..HyperParams::default()
    }
}

#[test]
fn model_variants_pass() {
    let variants = [
        small(),
        HyperParams { summary: "mean".into(), ..small() },
        HyperParams { word_features: "bilstm".into(), ..small() },
        HyperParams { mlp_layers: 1, ..small() },
        HyperParams { mlp_layers: 3, lambda1: 0.8, lambda2: 0.2, ..small() },
    ];
    for (i, hp) in variants.into_iter().enumerate() {
        let r = model_gradcheck(HyperParams { seed: i as u64, ..hp }, &[], GradCheckConfig::default()).unwrap();
        assert!(r.max_rel_err() < MODEL_TOLERANCE, "variant {i}\n{}", r.to_tsv());
    }
}

fn bilstm(seed: u64) -> (ParamStore, BiLstm) {
    let mut store = ParamStore::new(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = BiLstm::new(&mut store, "enc", 3, 4, &mut rng).unwrap();
    (store, l)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn every_bilstm_state_sees_every_token(
        seed in 0u64..1000,
        xs in prop::collection::vec(-1.0f64..1.0, 12),
        pos in 0usize..4,
    ) {
        let (store, l) = bilstm(seed);
        let states = |x: Vec<f64>| {
            let mut g = Graph::new(&store);
            let v = g.input(4, 3, x).unwrap();
            let out = l.encode(&mut g, v).unwrap();
            g.value(out.states).to_vec()
        };
        let base = states(xs.clone());
        let mut moved = xs.clone();
        for c in 0..3 {
            moved[pos * 3 + c] += 0.5;
        }
        let after = states(moved);
        for i in 0..4 {
            let changed = (0..8).any(|c| (base[i * 8 + c] - after[i * 8 + c]).abs() > 1e-9);
            prop_assert!(changed, "state {} ignores token {}", i, pos);
        }
    }

    #[test]
    fn pooled_conv_is_in_unit_interval_and_ignores_non_max_windows(
        seed in 0u64..1000,
        xs in prop::collection::vec(-2.0f64..2.0, 15),
    ) {
        let mut store = ParamStore::new(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let conv = ConvFilterBank::new(&mut store, "conv", 3, &[1], 4, &mut rng).unwrap();
        let mut g = Graph::new(&store);
        let x = g.input(5, 3, xs.clone()).unwrap();
        let p = conv.pooled(&mut g, x).unwrap()[0];
        let pooled = g.value(p).to_vec();
        prop_assert!(pooled.iter().all(|&v| v > 0.0 && v < 1.0));
        // repeating the first row adds a window that never exceeds the current max
        let mut longer = xs[..3].to_vec();
        longer.extend_from_slice(&xs);
        let x2 = g.input(6, 3, longer).unwrap();
        let p2 = conv.pooled(&mut g, x2).unwrap()[0];
        prop_assert_eq!(g.value(p2), &pooled[..]);
    }

    #[test]
    fn gate_never_amplifies(seed in 0u64..1000, zs in prop::collection::vec(-50.0f64..50.0, 8)) {
        let mut store = ParamStore::new(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gate = GateFusion::new(&mut store, "gate", 4, &mut rng).unwrap();
        let mut g = Graph::new(&store);
        let z = g.input(2, 4, zs.clone()).unwrap();
        let y = gate.apply(&mut g, z).unwrap();
        for (out, inp) in g.value(y).iter().zip(&zs) {
            prop_assert!(out.abs() <= inp.abs());
        }
    }
}
