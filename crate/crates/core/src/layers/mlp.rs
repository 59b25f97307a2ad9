use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::{init, Graph, ParamId, ParamStore, Tensor, Var};

/// Fully connected head: ReLU on every hidden layer, raw logits out.
#[derive(Debug, Clone)]
pub struct MlpHead {
    /// `[input, hidden.., out_classes]`
    pub layer_dims: Vec<usize>,
    layers: Vec<(ParamId, ParamId)>,
}

pub struct MlpOutput {
    pub logits: Var,
    /// Input to the output layer (the head's last hidden representation).
    pub last_hidden: Var,
}

impl MlpHead {
    /// `linear_layers` counts affine maps; `1` means `logits = v·W + b`.
    pub fn new<R: Rng>(
        store: &mut ParamStore,
        prefix: &str,
        input_dim: usize,
        hidden_dim: usize,
        linear_layers: usize,
        out_classes: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if linear_layers == 0 || out_classes < 2 || input_dim == 0 || hidden_dim == 0 {
            return Err(Error::Config(format!(
                "mlp head needs ≥1 layer and ≥2 classes (got {linear_layers} layers, {out_classes} classes)"
            )));
        }
        let mut layer_dims = vec![input_dim];
        layer_dims.extend(std::iter::repeat_n(hidden_dim, linear_layers - 1));
        layer_dims.push(out_classes);
        let mut layers = Vec::with_capacity(linear_layers);
        for (l, pair) in layer_dims.windows(2).enumerate() {
            let (i, o) = (pair[0], pair[1]);
            let w = store.add(&format!("{prefix}.W_{}", l + 1), init::xavier(rng, i, o, &[i, o]), true)?;
            let b = store.add(&format!("{prefix}.b_{}", l + 1), Tensor::zeros(&[o]), true)?;
            layers.push((w, b));
        }
        Ok(Self { layer_dims, layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn out_classes(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn last_hidden_dim(&self) -> usize {
        self.layer_dims[self.layer_dims.len() - 2]
    }

    /// Accepts one row per example.
    pub fn forward(&self, g: &mut Graph<'_>, v: Var) -> Result<MlpOutput> {
        if g.shape(v).1 != self.input_dim() {
            return Err(Error::shape("mlp_forward", format!("input dim {} vs head {}", g.shape(v).1, self.input_dim())));
        }
        let mut x = v;
        let last = self.layers.len() - 1;
        for (l, &(w, b)) in self.layers.iter().enumerate() {
            let wv = g.param(w)?;
            let bv = g.param(b)?;
            let z = g.matmul(x, wv)?;
            let z = g.add(z, bv)?;
            if l == last {
                return Ok(MlpOutput { logits: z, last_hidden: x });
            }
            x = g.relu(z)?;
        }
        unreachable!("head has at least one layer")
    }
}
