//! Reverse-mode tape over the fixed set of operations the MGTC network uses.
//!
//! Every node holds a row-major matrix of `f64` activations. Parameters are
//! read from a borrowed [`ParamStore`]; gradients are returned per parameter
//! and written back with [`ParamStore::set_grads`].

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use super::params::{ParamId, ParamStore};
use super::tensor::{matmul_kernel, softmax_kernel, Activation, Tensor, LOG_FLOOR};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Input,
    Param(ParamId),
    Gather { param: ParamId, ids: Vec<usize> },
    MatMul(Var, Var),
    /// `b` is either the same shape as `a` or a single row broadcast over `a`.
    Add(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Act(Var, Activation),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    Row(Var, usize),
    Unfold(Var, usize),
    PadRows(Var),
    MaxRows { x: Var, argmax: Vec<usize> },
    MeanRows(Var),
    SoftmaxXent { logits: Var, targets: Vec<usize>, probs: Vec<f64> },
    Sum(Vec<Var>),
}

#[derive(Debug)]
struct Node {
    rows: usize,
    cols: usize,
    value: Vec<f64>,
    op: Op,
    needs_grad: bool,
}

/// Gradients indexed by [`ParamId`]; `None` where no gradient reached.
pub type ParamGrads = Vec<Option<Vec<f64>>>;

pub struct Graph<'s> {
    store: &'s ParamStore,
    nodes: Vec<Node>,
    params: HashMap<ParamId, Var>,
}

impl<'s> Graph<'s> {
    pub fn new(store: &'s ParamStore) -> Self {
        Self {
            store,
            nodes: Vec::new(),
            params: HashMap::new(),
        }
    }

    pub fn store(&self) -> &ParamStore {
        self.store
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, rows: usize, cols: usize, value: Vec<f64>, op: Op, needs_grad: bool, name: &'static str) -> Result<Var> {
        debug_assert_eq!(rows * cols, value.len());
        if value.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(name));
        }
        self.nodes.push(Node {
            rows,
            cols,
            value,
            op,
            needs_grad,
        });
        Ok(Var(self.nodes.len() - 1))
    }

    /// Which side of every non-differentiable point the recorded pass took:
    /// ReLU signs and max-pool winners. Two passes with equal signatures lie
    /// on the same smooth piece of the loss.
    pub fn kink_signature(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for n in &self.nodes {
            match &n.op {
                Op::Act(_, Activation::Relu) => {
                    for v in &n.value {
                        (*v > 0.0).hash(&mut h);
                    }
                }
                Op::MaxRows { argmax, .. } => argmax.hash(&mut h),
                _ => {}
            }
        }
        h.finish()
    }

    fn node(&self, v: Var) -> &Node {
        &self.nodes[v.0]
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        let n = self.node(v);
        (n.rows, n.cols)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.node(v).value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.node(v).value[0]
    }

    pub fn to_tensor(&self, v: Var) -> Result<Tensor> {
        let n = self.node(v);
        let shape = if n.rows == 1 { vec![n.cols] } else { vec![n.rows, n.cols] };
        Tensor::from_f64(shape, &n.value)
    }

    pub fn input(&mut self, rows: usize, cols: usize, value: Vec<f64>) -> Result<Var> {
        if rows * cols != value.len() || rows == 0 || cols == 0 {
            return Err(Error::shape("input", format!("{rows}x{cols} with {} values", value.len())));
        }
        self.push(rows, cols, value, Op::Input, false, "input")
    }

    pub fn input_tensor(&mut self, t: &Tensor) -> Result<Var> {
        let (r, c) = t.as_matrix();
        self.input(r, c, t.to_f64())
    }

    pub fn zeros(&mut self, rows: usize, cols: usize) -> Result<Var> {
        self.input(rows, cols, vec![0.0; rows * cols])
    }

    /// Parameter leaf; repeated requests for the same parameter share one node.
    pub fn param(&mut self, id: ParamId) -> Result<Var> {
        if let Some(&v) = self.params.get(&id) {
            return Ok(v);
        }
        let p = self.store.by_id(id);
        let (r, c) = p.value.as_matrix();
        let v = self.push(r, c, p.value.to_f64(), Op::Param(id), p.trainable, "param")?;
        self.params.insert(id, v);
        Ok(v)
    }

    /// Row lookup into a 2-D parameter table.
    pub fn gather(&mut self, table: ParamId, ids: &[usize]) -> Result<Var> {
        let p = self.store.by_id(table);
        let (rows, cols) = p.value.as_matrix();
        if ids.is_empty() {
            return Err(Error::Empty("gather"));
        }
        let mut value = Vec::with_capacity(ids.len() * cols);
        for &i in ids {
            if i >= rows {
                return Err(Error::shape("gather", format!("index {i} >= {rows}")));
            }
            value.extend(p.value.data()[i * cols..(i + 1) * cols].iter().map(|&x| x as f64));
        }
        let op = Op::Gather {
            param: table,
            ids: ids.to_vec(),
        };
        self.push(ids.len(), cols, value, op, p.trainable, "gather")
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.shape(a);
        let (k2, n) = self.shape(b);
        if k != k2 {
            return Err(Error::shape("matmul", format!("{m}x{k} times {k2}x{n}")));
        }
        let mut out = vec![0.0; m * n];
        matmul_kernel(self.value(a), self.value(b), m, k, n, &mut out);
        let ng = self.node(a).needs_grad || self.node(b).needs_grad;
        self.push(m, n, out, Op::MatMul(a, b), ng, "matmul")
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (r, c) = self.shape(a);
        let (br, bc) = self.shape(b);
        if bc != c || (br != r && br != 1) {
            return Err(Error::shape("add", format!("{r}x{c} + {br}x{bc}")));
        }
        let av = self.value(a);
        let bv = self.value(b);
        let out: Vec<f64> = if br == r {
            av.iter().zip(bv).map(|(x, y)| x + y).collect()
        } else {
            av.iter().enumerate().map(|(i, x)| x + bv[i % c]).collect()
        };
        let ng = self.node(a).needs_grad || self.node(b).needs_grad;
        self.push(r, c, out, Op::Add(a, b), ng, "add")
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::shape("mul", format!("{:?} * {:?}", self.shape(a), self.shape(b))));
        }
        let (r, c) = self.shape(a);
        let out = self.value(a).iter().zip(self.value(b)).map(|(x, y)| x * y).collect();
        let ng = self.node(a).needs_grad || self.node(b).needs_grad;
        self.push(r, c, out, Op::Mul(a, b), ng, "mul")
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Result<Var> {
        let (r, c) = self.shape(a);
        let out = self.value(a).iter().map(|x| x * s).collect();
        let ng = self.node(a).needs_grad;
        self.push(r, c, out, Op::Scale(a, s), ng, "scale")
    }

    pub fn act(&mut self, a: Var, kind: Activation) -> Result<Var> {
        let (r, c) = self.shape(a);
        let out = self.value(a).iter().map(|&x| kind.apply(x)).collect();
        let ng = self.node(a).needs_grad;
        self.push(r, c, out, Op::Act(a, kind), ng, "activation")
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        self.act(a, Activation::Sigmoid)
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var> {
        self.act(a, Activation::Tanh)
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        self.act(a, Activation::Relu)
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts.first().ok_or(Error::Empty("concat_cols"))?;
        let rows = self.shape(first).0;
        if parts.iter().any(|&p| self.shape(p).0 != rows) {
            return Err(Error::shape("concat_cols", "row counts differ"));
        }
        let cols: usize = parts.iter().map(|&p| self.shape(p).1).sum();
        let mut out = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for &p in parts {
                let pc = self.shape(p).1;
                out.extend_from_slice(&self.value(p)[r * pc..(r + 1) * pc]);
            }
        }
        let ng = parts.iter().any(|&p| self.node(p).needs_grad);
        self.push(rows, cols, out, Op::ConcatCols(parts.to_vec()), ng, "concat_cols")
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts.first().ok_or(Error::Empty("concat_rows"))?;
        let cols = self.shape(first).1;
        if parts.iter().any(|&p| self.shape(p).1 != cols) {
            return Err(Error::shape("concat_rows", "column counts differ"));
        }
        let rows: usize = parts.iter().map(|&p| self.shape(p).0).sum();
        let mut out = Vec::with_capacity(rows * cols);
        for &p in parts {
            out.extend_from_slice(self.value(p));
        }
        let ng = parts.iter().any(|&p| self.node(p).needs_grad);
        self.push(rows, cols, out, Op::ConcatRows(parts.to_vec()), ng, "concat_rows")
    }

    pub fn row(&mut self, a: Var, i: usize) -> Result<Var> {
        let (r, c) = self.shape(a);
        if i >= r {
            return Err(Error::shape("row", format!("row {i} of {r}")));
        }
        let out = self.value(a)[i * c..(i + 1) * c].to_vec();
        let ng = self.node(a).needs_grad;
        self.push(1, c, out, Op::Row(a, i), ng, "row")
    }

    /// Sliding windows of `h` consecutive rows, each flattened into one row:
    /// `[n×k] -> [(n-h+1) × h·k]`.
    pub fn unfold(&mut self, a: Var, h: usize) -> Result<Var> {
        let (n, k) = self.shape(a);
        if h == 0 || h > n {
            return Err(Error::shape("unfold", format!("window {h} over {n} rows")));
        }
        let windows = n - h + 1;
        let src = self.value(a);
        let mut out = Vec::with_capacity(windows * h * k);
        for i in 0..windows {
            out.extend_from_slice(&src[i * k..(i + h) * k]);
        }
        let ng = self.node(a).needs_grad;
        self.push(windows, h * k, out, Op::Unfold(a, h), ng, "unfold")
    }

    /// Appends zero rows until the matrix has at least `min_rows` rows.
    pub fn pad_rows(&mut self, a: Var, min_rows: usize) -> Result<Var> {
        let (n, k) = self.shape(a);
        if n >= min_rows {
            return Ok(a);
        }
        let mut out = self.value(a).to_vec();
        out.resize(min_rows * k, 0.0);
        let ng = self.node(a).needs_grad;
        self.push(min_rows, k, out, Op::PadRows(a), ng, "pad_rows")
    }

    /// Column-wise maximum over rows (max-pooling over time).
    pub fn max_rows(&mut self, a: Var) -> Result<Var> {
        let (r, c) = self.shape(a);
        let v = self.value(a);
        let mut argmax = vec![0usize; c];
        let mut out = vec![f64::NEG_INFINITY; c];
        for i in 0..r {
            for j in 0..c {
                if v[i * c + j] > out[j] {
                    out[j] = v[i * c + j];
                    argmax[j] = i;
                }
            }
        }
        let ng = self.node(a).needs_grad;
        self.push(1, c, out, Op::MaxRows { x: a, argmax }, ng, "max_rows")
    }

    pub fn mean_rows(&mut self, a: Var) -> Result<Var> {
        let (r, c) = self.shape(a);
        let v = self.value(a);
        let mut out = vec![0.0; c];
        for i in 0..r {
            for j in 0..c {
                out[j] += v[i * c + j];
            }
        }
        out.iter_mut().for_each(|x| *x /= r as f64);
        let ng = self.node(a).needs_grad;
        self.push(1, c, out, Op::MeanRows(a), ng, "mean_rows")
    }

    /// Row-wise softmax followed by cross-entropy against class indices,
    /// summed over rows. Produces a 1×1 node.
    pub fn softmax_xent(&mut self, logits: Var, targets: &[usize]) -> Result<Var> {
        let (r, c) = self.shape(logits);
        if targets.len() != r {
            return Err(Error::shape("softmax_xent", format!("{} targets for {r} rows", targets.len())));
        }
        let mut probs = vec![0.0; r * c];
        let mut loss = 0.0;
        let v = self.value(logits);
        for (i, &t) in targets.iter().enumerate() {
            if t >= c {
                return Err(Error::shape("softmax_xent", format!("class {t} of {c}")));
            }
            softmax_kernel(&v[i * c..(i + 1) * c], &mut probs[i * c..(i + 1) * c]);
            loss -= probs[i * c + t].max(LOG_FLOOR).ln();
        }
        let ng = self.node(logits).needs_grad;
        let op = Op::SoftmaxXent {
            logits,
            targets: targets.to_vec(),
            probs,
        };
        self.push(1, 1, vec![loss], op, ng, "softmax_xent")
    }

    /// Sum of scalar nodes.
    pub fn sum(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::Empty("sum"));
        }
        if parts.iter().any(|&p| self.shape(p) != (1, 1)) {
            return Err(Error::shape("sum", "operands must be scalars"));
        }
        let total = parts.iter().map(|&p| self.scalar(p)).sum();
        let ng = parts.iter().any(|&p| self.node(p).needs_grad);
        self.push(1, 1, vec![total], Op::Sum(parts.to_vec()), ng, "sum")
    }

    /// Reverse pass from a scalar node.
    pub fn backward(&self, loss: Var) -> Result<ParamGrads> {
        if self.nodes.is_empty() || loss.0 >= self.nodes.len() {
            return Err(Error::BackwardBeforeForward);
        }
        if self.shape(loss) != (1, 1) {
            return Err(Error::shape("backward", "loss must be a scalar"));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        let mut out: ParamGrads = vec![None; self.store.len()];
        grads[loss.0] = Some(vec![1.0]);

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            if !node.needs_grad {
                continue;
            }
            match &node.op {
                Op::Input => {}
                Op::Param(id) => accumulate_param(&mut out, *id, &g, self.store),
                Op::Gather { param, ids } => {
                    let cols = node.cols;
                    let len = self.store.by_id(*param).value.len();
                    let dst = out[param.0].get_or_insert_with(|| vec![0.0; len]);
                    for (r, &i) in ids.iter().enumerate() {
                        for j in 0..cols {
                            dst[i * cols + j] += g[r * cols + j];
                        }
                    }
                }
                Op::MatMul(a, b) => {
                    let (m, k) = self.shape(*a);
                    let n = node.cols;
                    if self.node(*a).needs_grad {
                        let bv = self.value(*b);
                        let ga = self.grad_slot(&mut grads, *a);
                        for i in 0..m {
                            for p in 0..k {
                                let mut s = 0.0;
                                for j in 0..n {
                                    s += g[i * n + j] * bv[p * n + j];
                                }
                                ga[i * k + p] += s;
                            }
                        }
                    }
                    if self.node(*b).needs_grad {
                        let av = self.value(*a);
                        let gb = self.grad_slot(&mut grads, *b);
                        for i in 0..m {
                            for p in 0..k {
                                let x = av[i * k + p];
                                if x == 0.0 {
                                    continue;
                                }
                                for j in 0..n {
                                    gb[p * n + j] += x * g[i * n + j];
                                }
                            }
                        }
                    }
                }
                Op::Add(a, b) => {
                    if self.node(*a).needs_grad {
                        add_into(self.grad_slot(&mut grads, *a), &g);
                    }
                    if self.node(*b).needs_grad {
                        let (br, _) = self.shape(*b);
                        let c = node.cols;
                        let gb = self.grad_slot(&mut grads, *b);
                        if br == node.rows {
                            add_into(gb, &g);
                        } else {
                            for (i, x) in g.iter().enumerate() {
                                gb[i % c] += x;
                            }
                        }
                    }
                }
                Op::Mul(a, b) => {
                    if self.node(*a).needs_grad {
                        let bv = self.value(*b);
                        let ga = self.grad_slot(&mut grads, *a);
                        for i in 0..g.len() {
                            ga[i] += g[i] * bv[i];
                        }
                    }
                    if self.node(*b).needs_grad {
                        let av = self.value(*a);
                        let gb = self.grad_slot(&mut grads, *b);
                        for i in 0..g.len() {
                            gb[i] += g[i] * av[i];
                        }
                    }
                }
                Op::Scale(a, s) => {
                    let ga = self.grad_slot(&mut grads, *a);
                    for (d, x) in ga.iter_mut().zip(&g) {
                        *d += x * s;
                    }
                }
                Op::Act(a, kind) => {
                    let y = &node.value;
                    let ga = self.grad_slot(&mut grads, *a);
                    for i in 0..g.len() {
                        ga[i] += g[i] * kind.derivative_from_output(y[i]);
                    }
                }
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let pc = self.shape(p).1;
                        if self.node(p).needs_grad {
                            let total = node.cols;
                            let gp = self.grad_slot(&mut grads, p);
                            for r in 0..node.rows {
                                for j in 0..pc {
                                    gp[r * pc + j] += g[r * total + offset + j];
                                }
                            }
                        }
                        offset += pc;
                    }
                }
                Op::ConcatRows(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let len = self.node(p).value.len();
                        if self.node(p).needs_grad {
                            add_into(self.grad_slot(&mut grads, p), &g[offset..offset + len]);
                        }
                        offset += len;
                    }
                }
                Op::Row(a, i) => {
                    let c = node.cols;
                    let ga = self.grad_slot(&mut grads, *a);
                    add_into(&mut ga[i * c..(i + 1) * c], &g);
                }
                Op::Unfold(a, h) => {
                    let k = self.shape(*a).1;
                    let windows = node.rows;
                    let width = h * k;
                    let ga = self.grad_slot(&mut grads, *a);
                    for w in 0..windows {
                        add_into(&mut ga[w * k..w * k + width], &g[w * width..(w + 1) * width]);
                    }
                }
                Op::PadRows(a) => {
                    let len = self.node(*a).value.len();
                    add_into(self.grad_slot(&mut grads, *a), &g[..len]);
                }
                Op::MaxRows { x, argmax } => {
                    let c = node.cols;
                    let gx = self.grad_slot(&mut grads, *x);
                    for (j, &r) in argmax.iter().enumerate() {
                        gx[r * c + j] += g[j];
                    }
                }
                Op::MeanRows(a) => {
                    let (r, c) = self.shape(*a);
                    let ga = self.grad_slot(&mut grads, *a);
                    for i in 0..r {
                        for j in 0..c {
                            ga[i * c + j] += g[j] / r as f64;
                        }
                    }
                }
                Op::SoftmaxXent { logits, targets, probs } => {
                    let c = self.shape(*logits).1;
                    let gl = self.grad_slot(&mut grads, *logits);
                    for (i, &t) in targets.iter().enumerate() {
                        for j in 0..c {
                            let y = if j == t { 1.0 } else { 0.0 };
                            gl[i * c + j] += g[0] * (probs[i * c + j] - y);
                        }
                    }
                }
                Op::Sum(parts) => {
                    for &p in parts {
                        if self.node(p).needs_grad {
                            self.grad_slot(&mut grads, p)[0] += g[0];
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn grad_slot<'g>(&self, grads: &'g mut [Option<Vec<f64>>], v: Var) -> &'g mut Vec<f64> {
        let len = self.nodes[v.0].value.len();
        grads[v.0].get_or_insert_with(|| vec![0.0; len])
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

fn accumulate_param(out: &mut ParamGrads, id: ParamId, g: &[f64], store: &ParamStore) {
    let len = store.by_id(id).value.len();
    add_into(out[id.0].get_or_insert_with(|| vec![0.0; len]), g);
}
