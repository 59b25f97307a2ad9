//! Dense row-major `f32` tensors and the scalar kernels shared with the tape.
//!
//! Storage is `f32`; every reduction accumulates in `f64`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied inside `ln` by the cross-entropy kernels.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sigmoid,
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => sigmoid(x),
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the activation's output `y`.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::shape("tensor", format!("non-positive dimension in {shape:?}")));
        }
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::shape(
                "tensor",
                format!("shape {shape:?} needs {n} values, got {}", data.len()),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("tensor"));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; n],
        }
    }

    pub fn filled(shape: &[usize], value: f32) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    pub fn from_rows(rows: &[&[f32]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::shape("tensor", "ragged rows"));
        }
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(vec![rows.len(), cols], data)
    }

    pub fn vector(data: Vec<f32>) -> Result<Self> {
        Self::new(vec![data.len()], data)
    }

    pub(crate) fn from_f64(shape: Vec<usize>, data: &[f64]) -> Result<Self> {
        Self::new(shape, data.iter().map(|&v| v as f32).collect())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Views the tensor as a matrix; 1-D tensors are a single row.
    pub fn as_matrix(&self) -> (usize, usize) {
        match self.shape.as_slice() {
            [n] => (1, *n),
            [r, c] => (*r, *c),
            other => {
                let c = *other.last().unwrap_or(&1);
                (self.data.len() / c.max(1), c)
            }
        }
    }

    pub fn fill(&mut self, value: f32) {
        self.data.iter_mut().for_each(|v| *v = value);
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|&v| v as f64).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// `out[m×n] = a[m×k] · b[k×n]`, accumulating in `f64`.
pub(crate) fn matmul_kernel(a: &[f64], b: &[f64], m: usize, k: usize, n: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..m {
        let row = &a[i * k..(i + 1) * k];
        let dst = &mut out[i * n..(i + 1) * n];
        for (p, &av) in row.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (d, &bv) in dst.iter_mut().zip(brow) {
                *d += av * bv;
            }
        }
    }
}

pub(crate) fn softmax_kernel(logits: &[f64], out: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}

pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.shape.len() != 2 || b.shape.len() != 2 {
        return Err(Error::shape("matmul", "operands must be 2-D"));
    }
    let (m, k) = (a.shape[0], a.shape[1]);
    let (k2, n) = (b.shape[0], b.shape[1]);
    if k != k2 {
        return Err(Error::shape("matmul", format!("{m}x{k} times {k2}x{n}")));
    }
    let mut out = vec![0.0; m * n];
    matmul_kernel(&a.to_f64(), &b.to_f64(), m, k, n, &mut out);
    let t = Tensor::from_f64(vec![m, n], &out).map_err(|_| Error::NonFinite("matmul"))?;
    Ok(t)
}

pub fn activate(x: &Tensor, kind: Activation) -> Tensor {
    Tensor {
        shape: x.shape.clone(),
        data: x.data.iter().map(|&v| kind.apply(v as f64) as f32).collect(),
    }
}

pub fn softmax(logits: &Tensor) -> Result<Tensor> {
    if logits.is_empty() {
        return Err(Error::Empty("softmax"));
    }
    let mut out = vec![0.0; logits.len()];
    softmax_kernel(&logits.to_f64(), &mut out);
    Tensor::from_f64(logits.shape.clone(), &out)
}

/// `-Σ y·ln(max(p, 1e-12))` for a one-hot `y`.
pub fn cross_entropy(p: &Tensor, y_onehot: &Tensor) -> Result<f32> {
    if p.shape != y_onehot.shape {
        return Err(Error::shape(
            "cross_entropy",
            format!("{:?} vs {:?}", p.shape, y_onehot.shape),
        ));
    }
    let ones = y_onehot.data.iter().filter(|&&v| v == 1.0).count();
    let zeros = y_onehot.data.iter().filter(|&&v| v == 0.0).count();
    if ones != 1 || ones + zeros != y_onehot.len() {
        return Err(Error::NotOneHot);
    }
    let loss: f64 = p
        .data
        .iter()
        .zip(&y_onehot.data)
        .filter(|(_, &y)| y == 1.0)
        .map(|(&pv, _)| -(pv as f64).max(LOG_FLOOR).ln())
        .sum();
    Ok(loss as f32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn matmul_identity_zero_and_hand_cases() {
        let id = Tensor::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        let m = Tensor::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(matmul(&id, &m).unwrap(), m);

        let a = Tensor::from_rows(&[&[1.0, 2.0]]).unwrap();
        let z = Tensor::from_rows(&[&[0.0], &[0.0]]).unwrap();
        assert_eq!(matmul(&a, &z).unwrap().data(), &[0.0]);

        let b = Tensor::from_rows(&[&[5.0], &[6.0]]).unwrap();
        let out = matmul(&m, &b).unwrap();
        assert_eq!(out.shape(), &[2, 1]);
        assert_eq!(out.data(), &[17.0, 39.0]);
    }

    #[test]
    fn matmul_rejects_mismatched_inner_dims() {
        let a = Tensor::zeros(&[2, 3]);
        let b = Tensor::zeros(&[2, 3]);
        assert!(matches!(matmul(&a, &b), Err(Error::Shape { .. })));
    }

    #[test]
    fn activation_values() {
        let x = Tensor::vector(vec![0.0, -3.0, 3.0, 1.0]).unwrap();
        let s = activate(&x, Activation::Sigmoid);
        assert_eq!(s.data()[0], 0.5);
        let r = activate(&x, Activation::Relu);
        assert_eq!(&r.data()[1..3], &[0.0, 3.0]);
        let t = activate(&x, Activation::Tanh);
        assert_abs_diff_eq!(t.data()[3], 0.761594, epsilon = 1e-6);
    }

    #[test]
    fn softmax_cases() {
        let u = softmax(&Tensor::vector(vec![0.0; 3]).unwrap()).unwrap();
        for &v in u.data() {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-7);
        }
        let big = softmax(&Tensor::vector(vec![1000.0, 0.0]).unwrap()).unwrap();
        assert_abs_diff_eq!(big.data()[0], 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(big.data()[1], 0.0, epsilon = 1e-7);

        let p = softmax(&Tensor::vector(vec![1.0, 2.0, 3.0]).unwrap()).unwrap();
        let expected = [0.09003057, 0.24472847, 0.66524096];
        for (a, e) in p.data().iter().zip(expected) {
            assert_abs_diff_eq!(*a, e, epsilon = 1e-6);
        }
        assert!(softmax(&Tensor { shape: vec![0], data: vec![] }).is_err());
    }

    #[test]
    fn cross_entropy_cases() {
        let y = Tensor::vector(vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(cross_entropy(&y, &y).unwrap(), 0.0);

        let uniform = Tensor::filled(&[5], 0.2);
        let y5 = Tensor::vector(vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(cross_entropy(&uniform, &y5).unwrap(), 1.609_438, epsilon = 1e-6);

        let p = Tensor::vector(vec![0.9, 0.1]).unwrap();
        let y2 = Tensor::vector(vec![1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(cross_entropy(&p, &y2).unwrap(), 0.1053605, epsilon = 1e-6);

        let bad = Tensor::vector(vec![0.5, 0.5]).unwrap();
        assert!(matches!(cross_entropy(&p, &bad), Err(Error::NotOneHot)));
    }

    #[test]
    fn rejects_non_finite_and_bad_shapes() {
        assert!(Tensor::new(vec![2], vec![1.0, f32::NAN]).is_err());
        assert!(Tensor::new(vec![2, 2], vec![1.0; 3]).is_err());
    }
}
