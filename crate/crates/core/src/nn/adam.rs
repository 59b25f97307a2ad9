use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::params::ParamStore;
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    step: u64,
    moments: IndexMap<String, (Tensor, Tensor)>,
}

impl AdamState {
    pub fn new(config: AdamConfig) -> Self {
        Self {
            config,
            step: 0,
            moments: IndexMap::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn moments(&self, name: &str) -> Option<(&Tensor, &Tensor)> {
        self.moments.get(name).map(|(m, v)| (m, v))
    }

    /// One bias-corrected Adam update over every trainable parameter.
    pub fn step(&mut self, store: &mut ParamStore) -> Result<()> {
        if !store.grads_ready() {
            let name = store.names().next().unwrap_or("<empty store>").to_string();
            return Err(Error::MissingGrad(name));
        }
        self.step += 1;
        let t = self.step as i32;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);

        for p in store.iter_mut().filter(|p| p.trainable) {
            let (m, v) = self
                .moments
                .entry(p.name.clone())
                .or_insert_with(|| (Tensor::zeros(p.value.shape()), Tensor::zeros(p.value.shape())));
            if m.shape() != p.value.shape() {
                return Err(Error::ParamShape {
                    name: p.name.clone(),
                    expected: p.value.shape().to_vec(),
                    found: m.shape().to_vec(),
                });
            }
            let grads = p.grad.data();
            let values = p.value.data_mut();
            for (i, (mi, vi)) in m.data_mut().iter_mut().zip(v.data_mut().iter_mut()).enumerate() {
                let g = grads[i] as f64;
                let mn = beta1 * *mi as f64 + (1.0 - beta1) * g;
                let vn = beta2 * *vi as f64 + (1.0 - beta2) * g * g;
                *mi = mn as f32;
                *vi = vn as f32;
                let update = lr * (mn / c1) / ((vn / c2).sqrt() + epsilon);
                values[i] = (values[i] as f64 - update) as f32;
            }
            if !p.value.all_finite() {
                return Err(Error::NonFinite("adam_step"));
            }
        }
        Ok(())
    }
}

/// Convenience wrapper matching the free-function form.
pub fn adam_step(store: &mut ParamStore, state: &mut AdamState) -> Result<()> {
    state.step(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn scalar_store(w: f32, trainable: bool) -> ParamStore {
        let mut s = ParamStore::new(0);
        s.add("w", Tensor::vector(vec![w]).unwrap(), trainable).unwrap();
        s
    }

    #[test]
    fn zero_grads_leave_params_unchanged() {
        let mut s = scalar_store(0.3, true);
        s.set_grads(&[Some(vec![0.0])]).unwrap();
        let mut adam = AdamState::new(AdamConfig::default());
        adam.step(&mut s).unwrap();
        assert_eq!(s.get("w").unwrap().value.data(), &[0.3]);
        assert_eq!(adam.step_count(), 1);
        adam.step(&mut s).unwrap();
        assert_eq!(adam.step_count(), 2);
    }

    #[test]
    fn first_step_matches_formula() {
        // m̂ = 1, v̂ = 1 -> w = 1 - 1e-4 / (1 + 1e-8)
        let mut s = scalar_store(1.0, true);
        s.set_grads(&[Some(vec![1.0])]).unwrap();
        let mut adam = AdamState::new(AdamConfig::default());
        adam.step(&mut s).unwrap();
        assert_abs_diff_eq!(s.get("w").unwrap().value.data()[0], 0.9999, epsilon = 1e-7);
    }

    #[test]
    fn frozen_params_do_not_move_and_missing_grads_error() {
        let mut s = scalar_store(1.0, false);
        let mut adam = AdamState::new(AdamConfig::default());
        assert!(matches!(adam.step(&mut s), Err(Error::MissingGrad(_))));
        s.set_grads(&[Some(vec![5.0])]).unwrap();
        adam.step(&mut s).unwrap();
        assert_eq!(s.get("w").unwrap().value.data(), &[1.0]);
    }
}
