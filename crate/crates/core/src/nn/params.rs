use indexmap::IndexMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Position of a parameter inside its [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub value: Tensor,
    pub grad: Tensor,
    pub trainable: bool,
}

/// Named parameters in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStore {
    params: IndexMap<String, Parameter>,
    rng_seed: u64,
    grads_ready: bool,
}

impl ParamStore {
    pub fn new(rng_seed: u64) -> Self {
        Self {
            params: IndexMap::new(),
            rng_seed,
            grads_ready: false,
        }
    }

    pub fn seed(&self) -> u64 {
        self.rng_seed
    }

    /// Deterministic stream derived from the store seed and a tag.
    pub fn rng_for(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(stream);
        rng
    }

    pub fn add(&mut self, name: &str, value: Tensor, trainable: bool) -> Result<ParamId> {
        if self.params.contains_key(name) {
            return Err(Error::DuplicateParam(name.to_string()));
        }
        let grad = Tensor::zeros(value.shape());
        let (idx, _) = self.params.insert_full(
            name.to_string(),
            Parameter {
                name: name.to_string(),
                value,
                grad,
                trainable,
            },
        );
        Ok(ParamId(idx))
    }

    pub fn id(&self, name: &str) -> Result<ParamId> {
        self.params
            .get_index_of(name)
            .map(ParamId)
            .ok_or_else(|| Error::UnknownParam(name.to_string()))
    }

    pub fn get(&self, name: &str) -> Result<&Parameter> {
        self.params
            .get(name)
            .ok_or_else(|| Error::UnknownParam(name.to_string()))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Parameter> {
        self.params
            .get_mut(name)
            .ok_or_else(|| Error::UnknownParam(name.to_string()))
    }

    pub fn by_id(&self, id: ParamId) -> &Parameter {
        &self.params[id.0]
    }

    pub fn by_id_mut(&mut self, id: ParamId) -> &mut Parameter {
        &mut self.params[id.0]
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Parameter> {
        self.params.values()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Parameter> {
        self.params.values_mut()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.params.keys().map(String::as_str)
    }

    /// Sets `trainable` on every parameter whose name starts with `prefix`.
    /// Returns how many parameters matched.
    pub fn set_trainable_prefix(&mut self, prefix: &str, trainable: bool) -> usize {
        let mut hits = 0;
        for p in self.params.values_mut().filter(|p| p.name.starts_with(prefix)) {
            p.trainable = trainable;
            hits += 1;
        }
        hits
    }

    pub fn zero_grads(&mut self) {
        for p in self.params.values_mut() {
            p.grad.fill(0.0);
        }
        self.grads_ready = false;
    }

    pub fn grads_ready(&self) -> bool {
        self.grads_ready
    }

    /// Writes tape gradients into the store. Frozen parameters keep a zero gradient.
    pub fn set_grads(&mut self, grads: &[Option<Vec<f64>>]) -> Result<()> {
        for (idx, p) in self.params.values_mut().enumerate() {
            p.grad.fill(0.0);
            if !p.trainable {
                continue;
            }
            if let Some(Some(g)) = grads.get(idx) {
                if g.len() != p.grad.len() {
                    return Err(Error::ParamShape {
                        name: p.name.clone(),
                        expected: p.value.shape().to_vec(),
                        found: vec![g.len()],
                    });
                }
                for (dst, &src) in p.grad.data_mut().iter_mut().zip(g) {
                    *dst = src as f32;
                }
                if !p.grad.all_finite() {
                    return Err(Error::NonFinite("backward"));
                }
            }
        }
        self.grads_ready = true;
        Ok(())
    }

    /// Copies values (and trainable flags) from `other` into parameters of the same name.
    /// Every parameter of `other` must exist here with an identical shape.
    pub fn load_values_from(&mut self, other: &ParamStore) -> Result<()> {
        for src in other.iter() {
            let dst = self.get_mut(&src.name)?;
            if dst.value.shape() != src.value.shape() {
                return Err(Error::ParamShape {
                    name: src.name.clone(),
                    expected: dst.value.shape().to_vec(),
                    found: src.value.shape().to_vec(),
                });
            }
            dst.value = src.value.clone();
            dst.trainable = src.trainable;
        }
        Ok(())
    }

    /// Number of scalars across trainable parameters.
    pub fn trainable_scalars(&self) -> usize {
        self.iter().filter(|p| p.trainable).map(|p| p.value.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_ordered() {
        let mut s = ParamStore::new(1);
        s.add("b", Tensor::zeros(&[2]), true).unwrap();
        s.add("a", Tensor::zeros(&[3]), false).unwrap();
        assert!(matches!(
            s.add("a", Tensor::zeros(&[1]), true),
            Err(Error::DuplicateParam(_))
        ));
        assert_eq!(s.names().collect::<Vec<_>>(), vec!["b", "a"]);
        assert_eq!(s.id("a").unwrap().index(), 1);
    }

    #[test]
    fn frozen_params_keep_zero_grad() {
        let mut s = ParamStore::new(1);
        s.add("w", Tensor::zeros(&[2]), true).unwrap();
        s.add("f", Tensor::zeros(&[2]), false).unwrap();
        s.set_grads(&[Some(vec![1.0, 2.0]), Some(vec![3.0, 4.0])]).unwrap();
        assert_eq!(s.get("w").unwrap().grad.data(), &[1.0, 2.0]);
        assert_eq!(s.get("f").unwrap().grad.data(), &[0.0, 0.0]);
    }

    #[test]
    fn load_values_checks_shapes() {
        let mut a = ParamStore::new(1);
        a.add("w", Tensor::zeros(&[2, 2]), true).unwrap();
        let mut b = ParamStore::new(1);
        b.add("w", Tensor::zeros(&[3, 2]), true).unwrap();
        match a.load_values_from(&b) {
            Err(Error::ParamShape { name, .. }) => assert_eq!(name, "w"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
