use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::{init, Graph, ParamId, ParamStore, Tensor, Var};

/// Soft feature selection `σ(z·W + b) ⊙ z`.
#[derive(Debug, Clone)]
pub struct GateFusion {
    pub dim: usize,
    w: ParamId,
    b: ParamId,
}

impl GateFusion {
    pub fn new<R: Rng>(store: &mut ParamStore, prefix: &str, dim: usize, rng: &mut R) -> Result<Self> {
        let w = store.add(&format!("{prefix}.W"), init::xavier(rng, dim, dim, &[dim, dim]), true)?;
        let b = store.add(&format!("{prefix}.b"), Tensor::zeros(&[dim]), true)?;
        Ok(Self { dim, w, b })
    }

    pub fn gate(&self, g: &mut Graph<'_>, z: Var) -> Result<Var> {
        if g.shape(z).1 != self.dim {
            return Err(Error::shape("gate_attention", format!("feature dim {} vs gate {}", g.shape(z).1, self.dim)));
        }
        let w = g.param(self.w)?;
        let b = g.param(self.b)?;
        let s = g.matmul(z, w)?;
        let s = g.add(s, b)?;
        g.sigmoid(s)
    }

    /// Gated features `g ⊙ z`; the caller concatenates them with the rest.
    pub fn apply(&self, g: &mut Graph<'_>, z: Var) -> Result<Var> {
        let gate = self.gate(g, z)?;
        g.mul(gate, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gate(dim: usize) -> (ParamStore, GateFusion) {
        let mut store = ParamStore::new(2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let gf = GateFusion::new(&mut store, "gate", dim, &mut rng).unwrap();
        (store, gf)
    }

    #[test]
    fn zero_gate_halves_and_open_gate_passes() {
        let (mut store, gf) = gate(3);
        store.get_mut("gate.W").unwrap().value.fill(0.0);
        {
            let mut g = Graph::new(&store);
            let z = g.input(1, 3, vec![2.0, -4.0, 1.0]).unwrap();
            let out = gf.apply(&mut g, z).unwrap();
            assert_eq!(g.value(out), &[1.0, -2.0, 0.5]);
        }
        store.get_mut("gate.b").unwrap().value.fill(20.0);
        let mut g = Graph::new(&store);
        let z = g.input(1, 3, vec![2.0, -4.0, 1.0]).unwrap();
        let out = gf.apply(&mut g, z).unwrap();
        for (a, b) in g.value(out).iter().zip([2.0, -4.0, 1.0]) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn matches_transcription_and_rejects_bad_dims() {
        let (store, gf) = gate(4);
        let z = [0.3, -1.2, 0.8, 2.0];
        let w = store.get("gate.W").unwrap().value.to_f64();
        let expected: Vec<f64> = (0..4)
            .map(|j| {
                let s: f64 = (0..4).map(|p| z[p] * w[p * 4 + j]).sum();
                crate::nn::sigmoid(s) * z[j]
            })
            .collect();
        let mut g = Graph::new(&store);
        let zv = g.input(1, 4, z.to_vec()).unwrap();
        let out = gf.apply(&mut g, zv).unwrap();
        for (a, b) in g.value(out).iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        let bad = g.input(1, 3, vec![0.0; 3]).unwrap();
        assert!(gf.apply(&mut g, bad).is_err());
    }
}
