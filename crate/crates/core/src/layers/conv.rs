//! Multiscale n-gram convolution with max-pooling over time.

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::{init, Graph, ParamId, ParamStore, Tensor, Var};

#[derive(Debug, Clone)]
pub struct ConvFilterBank {
    pub window_sizes: Vec<usize>,
    pub filters_per_size: usize,
    pub input_dim: usize,
    /// `(weights [h·k × filters], bias [filters])` per window size.
    filters: Vec<(ParamId, ParamId)>,
}

impl ConvFilterBank {
    pub fn new<R: Rng>(
        store: &mut ParamStore,
        prefix: &str,
        input_dim: usize,
        window_sizes: &[usize],
        filters_per_size: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if window_sizes.contains(&0) || filters_per_size == 0 {
            return Err(Error::Config("window sizes and filter count must be > 0".into()));
        }
        let mut filters = Vec::with_capacity(window_sizes.len());
        for &h in window_sizes {
            let fan_in = h * input_dim;
            let w = store.add(
                &format!("{prefix}.h{h}.w"),
                init::xavier(rng, fan_in, filters_per_size, &[fan_in, filters_per_size]),
                true,
            )?;
            let b = store.add(&format!("{prefix}.h{h}.b"), Tensor::zeros(&[filters_per_size]), true)?;
            filters.push((w, b));
        }
        Ok(Self {
            window_sizes: window_sizes.to_vec(),
            filters_per_size,
            input_dim,
            filters,
        })
    }

    pub fn max_window(&self) -> usize {
        self.window_sizes.iter().copied().max().unwrap_or(1)
    }

    pub fn output_dim(&self) -> usize {
        self.window_sizes.len() * self.filters_per_size
    }

    /// One pooled `1×filters` vector per window size: `max_i σ(x_{i..i+h}·w + b)`.
    /// Sequences shorter than the largest window are right-padded with zero rows.
    pub fn pooled(&self, g: &mut Graph<'_>, seq: Var) -> Result<Vec<Var>> {
        let (_, k) = g.shape(seq);
        if k != self.input_dim {
            return Err(Error::shape("conv_ngram", format!("input dim {k}, bank expects {}", self.input_dim)));
        }
        let padded = g.pad_rows(seq, self.max_window())?;
        let mut out = Vec::with_capacity(self.filters.len());
        for (&h, &(w, b)) in self.window_sizes.iter().zip(&self.filters) {
            let windows = g.unfold(padded, h)?;
            let wv = g.param(w)?;
            let bv = g.param(b)?;
            let z = g.matmul(windows, wv)?;
            let z = g.add(z, bv)?;
            let a = g.sigmoid(z)?;
            out.push(g.max_rows(a)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bank(dim: usize, windows: &[usize], filters: usize) -> (ParamStore, ConvFilterBank) {
        let mut store = ParamStore::new(5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = ConvFilterBank::new(&mut store, "conv", dim, windows, filters, &mut rng).unwrap();
        (store, b)
    }

    #[test]
    fn zero_sequence_pools_to_half() {
        let (store, b) = bank(3, &[1, 2, 3], 4);
        let mut g = Graph::new(&store);
        let x = g.zeros(5, 3).unwrap();
        for v in b.pooled(&mut g, x).unwrap() {
            assert_eq!(g.value(v), &[0.5; 4]);
        }
    }

    #[test]
    fn hand_computed_windows() {
        // n=4, h=2, k=1, w=[0.5,-1], b=0.1 over [1,-1,2,0.5]
        let (mut store, b) = bank(1, &[2], 1);
        store.get_mut("conv.h2.w").unwrap().value = Tensor::new(vec![2, 1], vec![0.5, -1.0]).unwrap();
        store.get_mut("conv.h2.b").unwrap().value = Tensor::vector(vec![0.1]).unwrap();
        let mut g = Graph::new(&store);
        let x = g.input(4, 1, vec![1.0, -1.0, 2.0, 0.5]).unwrap();
        let out = b.pooled(&mut g, x).unwrap();
        assert!((g.value(out[0])[0] - 0.8320183851339245).abs() < 1e-7);
    }

    #[test]
    fn single_window_equals_its_activation_and_short_input_is_padded() {
        let (store, b) = bank(2, &[3], 2);
        let mut g = Graph::new(&store);
        let x = g.input(3, 2, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let pooled = b.pooled(&mut g, x).unwrap()[0];
        let w = store.get("conv.h3.w").unwrap().value.to_f64();
        for j in 0..2 {
            let s: f64 = (0..6).map(|p| [0.1, 0.2, 0.3, 0.4, 0.5, 0.6][p] * w[p * 2 + j]).sum();
            assert!((g.value(pooled)[j] - crate::nn::sigmoid(s)).abs() < 1e-12);
        }
        let short = g.input(1, 2, vec![1.0, 1.0]).unwrap();
        let pooled_short = b.pooled(&mut g, short).unwrap()[0];
        assert_eq!(g.shape(pooled_short), (1, 2));
    }
}
