//! LSTM cell and bidirectional encoder.
//!
//! Row-vector convention: for input `x` (1×dim) and previous state `h` (1×hid)
//!
//! ```text
//! i = σ(x·U_i + h·W_i + b_i)      f = σ(x·U_f + h·W_f + b_f)
//! o = σ(x·U_o + h·W_o + b_o)      c = f⊙c_prev + i⊙tanh(x·U_c + h·W_c + b_c)
//! h = o⊙tanh(c)
//! ```

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::{init, Graph, ParamId, ParamStore, Tensor, Var};

const GATES: [&str; 4] = ["i", "f", "o", "c"];

#[derive(Debug, Clone)]
pub struct LstmCell {
    pub input_dim: usize,
    pub hidden: usize,
    u: [ParamId; 4],
    w: [ParamId; 4],
    b: [ParamId; 4],
}

/// Per-gate input projections `x·U + b` for a whole sequence.
pub struct Projections([Var; 4]);

impl LstmCell {
    /// Xavier weights, zero biases, forget-gate bias `+1`.
    pub fn new<R: Rng>(store: &mut ParamStore, prefix: &str, input_dim: usize, hidden: usize, rng: &mut R) -> Result<Self> {
        if input_dim == 0 || hidden == 0 {
            return Err(Error::Config("lstm dims must be > 0".into()));
        }
        let mut u = Vec::with_capacity(4);
        let mut w = Vec::with_capacity(4);
        let mut b = Vec::with_capacity(4);
        for gate in GATES {
            u.push(store.add(
                &format!("{prefix}.U_{gate}"),
                init::xavier(rng, input_dim, hidden, &[input_dim, hidden]),
                true,
            )?);
            w.push(store.add(
                &format!("{prefix}.W_{gate}"),
                init::xavier(rng, hidden, hidden, &[hidden, hidden]),
                true,
            )?);
            let bias = if gate == "f" { 1.0 } else { 0.0 };
            b.push(store.add(&format!("{prefix}.b_{gate}"), Tensor::filled(&[hidden], bias), true)?);
        }
        Ok(Self {
            input_dim,
            hidden,
            u: u.try_into().unwrap(),
            w: w.try_into().unwrap(),
            b: b.try_into().unwrap(),
        })
    }

    pub fn project(&self, g: &mut Graph<'_>, seq: Var) -> Result<Projections> {
        let (_, d) = g.shape(seq);
        if d != self.input_dim {
            return Err(Error::shape("lstm", format!("input dim {d}, cell expects {}", self.input_dim)));
        }
        let mut out = Vec::with_capacity(4);
        for k in 0..4 {
            let u = g.param(self.u[k])?;
            let b = g.param(self.b[k])?;
            let xu = g.matmul(seq, u)?;
            out.push(g.add(xu, b)?);
        }
        Ok(Projections(out.try_into().unwrap()))
    }

    /// One recurrence step at position `t` of pre-projected input.
    pub fn step_projected(&self, g: &mut Graph<'_>, proj: &Projections, t: usize, h_prev: Var, c_prev: Var) -> Result<(Var, Var)> {
        let mut pre = Vec::with_capacity(4);
        for k in 0..4 {
            let w = g.param(self.w[k])?;
            let hw = g.matmul(h_prev, w)?;
            let xt = g.row(proj.0[k], t)?;
            pre.push(g.add(xt, hw)?);
        }
        let i = g.sigmoid(pre[0])?;
        let f = g.sigmoid(pre[1])?;
        let o = g.sigmoid(pre[2])?;
        let cand = g.tanh(pre[3])?;
        let keep = g.mul(f, c_prev)?;
        let write = g.mul(i, cand)?;
        let c = g.add(keep, write)?;
        let tc = g.tanh(c)?;
        let h = g.mul(o, tc)?;
        Ok((h, c))
    }

    /// Single step on a `1×input_dim` input.
    pub fn step(&self, g: &mut Graph<'_>, x_t: Var, h_prev: Var, c_prev: Var) -> Result<(Var, Var)> {
        if g.shape(h_prev) != (1, self.hidden) || g.shape(c_prev) != (1, self.hidden) {
            return Err(Error::shape("lstm_step", "state must be 1×hidden"));
        }
        let proj = self.project(g, x_t)?;
        self.step_projected(g, &proj, 0, h_prev, c_prev)
    }

    /// Hidden states for positions visited in `order`, indexed by position.
    fn run(&self, g: &mut Graph<'_>, seq: Var, order: impl Iterator<Item = usize>) -> Result<Vec<Var>> {
        let n = g.shape(seq).0;
        let proj = self.project(g, seq)?;
        let mut h = g.zeros(1, self.hidden)?;
        let mut c = g.zeros(1, self.hidden)?;
        let mut states = vec![None; n];
        for t in order {
            (h, c) = self.step_projected(g, &proj, t, h, c)?;
            states[t] = Some(h);
        }
        Ok(states.into_iter().map(|s| s.expect("every position visited")).collect())
    }

    pub fn run_forward(&self, g: &mut Graph<'_>, seq: Var) -> Result<Vec<Var>> {
        let n = g.shape(seq).0;
        self.run(g, seq, 0..n)
    }

    pub fn run_backward(&self, g: &mut Graph<'_>, seq: Var) -> Result<Vec<Var>> {
        let n = g.shape(seq).0;
        self.run(g, seq, (0..n).rev())
    }
}

#[derive(Debug, Clone)]
pub struct BiLstm {
    pub fwd: LstmCell,
    pub bwd: LstmCell,
}

pub struct BiLstmOutput {
    /// `[n × 2·hid]`, row `i` is `[→h_i, ←h_i]`.
    pub states: Var,
    pub forward: Vec<Var>,
    pub backward: Vec<Var>,
}

impl BiLstm {
    pub fn new<R: Rng>(store: &mut ParamStore, prefix: &str, input_dim: usize, hidden: usize, rng: &mut R) -> Result<Self> {
        Ok(Self {
            fwd: LstmCell::new(store, &format!("{prefix}.fwd"), input_dim, hidden, rng)?,
            bwd: LstmCell::new(store, &format!("{prefix}.bwd"), input_dim, hidden, rng)?,
        })
    }

    pub fn output_dim(&self) -> usize {
        self.fwd.hidden + self.bwd.hidden
    }

    pub fn encode(&self, g: &mut Graph<'_>, seq: Var) -> Result<BiLstmOutput> {
        if g.shape(seq).0 == 0 {
            return Err(Error::Empty("bilstm_encode"));
        }
        let forward = self.fwd.run_forward(g, seq)?;
        let backward = self.bwd.run_backward(g, seq)?;
        let f = g.concat_rows(&forward)?;
        let b = g.concat_rows(&backward)?;
        let states = g.concat_cols(&[f, b])?;
        Ok(BiLstmOutput {
            states,
            forward,
            backward,
        })
    }
}

impl BiLstmOutput {
    /// `[→h_n, ←h_1]`: the last state each direction reaches.
    pub fn final_states(&self, g: &mut Graph<'_>) -> Result<Var> {
        let last = *self.forward.last().ok_or(Error::Empty("bilstm summary"))?;
        g.concat_cols(&[last, self.backward[0]])
    }
}
