use rand::distributions::{Distribution, Uniform};
use rand::Rng;

use super::tensor::Tensor;

/// Glorot/Xavier uniform: `U(-√(6/(fan_in+fan_out)), +√(6/(fan_in+fan_out)))`.
pub fn xavier<R: Rng + ?Sized>(rng: &mut R, fan_in: usize, fan_out: usize, shape: &[usize]) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    uniform(rng, limit, shape)
}

pub fn uniform<R: Rng + ?Sized>(rng: &mut R, limit: f64, shape: &[usize]) -> Tensor {
    let dist = Uniform::new_inclusive(-limit, limit);
    let mut t = Tensor::zeros(shape);
    for v in t.data_mut() {
        *v = dist.sample(rng) as f32;
    }
    t
}
