//! Adam optimizer with bias correction.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::ParamSet;

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
}

impl AdamState {
    /// Zero-initialized moments for `params` with the usual defaults
    /// (β1 = 0.9, β2 = 0.999, ε = 1e-8).
    pub fn new(params: &ParamSet, learning_rate: f64) -> Self {
        let zeros = || params.iter().map(|(_, t)| vec![0.0; t.len()]).collect::<Vec<_>>();
        AdamState {
            step_count: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            first_moment: zeros(),
            second_moment: zeros(),
        }
    }

    pub fn first_moment(&self, index: usize) -> &[f64] {
        &self.first_moment[index]
    }

    pub fn second_moment(&self, index: usize) -> &[f64] {
        &self.second_moment[index]
    }

    /// Applies one update using the gradients stored on `params`.
    ///
    /// Gradients are left in place; the caller zeroes them.
    pub fn step(&mut self, params: &mut ParamSet) -> Result<()> {
        if params.len() != self.first_moment.len() {
            return Err(crate::error::contract("optimizer state does not match parameter set"));
        }
        for id in params.ids() {
            let t = params.get(id);
            if t.requires_grad() && t.grad().is_none() {
                return Err(Error::MissingGradient(params.name(id).to_string()));
            }
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - libm::pow(self.beta1, t as f64);
        let bc2 = 1.0 - libm::pow(self.beta2, t as f64);
        for id in params.ids().collect::<Vec<_>>() {
            let tensor = params.get_mut(id);
            if !tensor.requires_grad() {
                continue;
            }
            let grad = tensor.grad().map(<[f64]>::to_vec).unwrap_or_default();
            let m = &mut self.first_moment[id.index()];
            let v = &mut self.second_moment[id.index()];
            for (i, w) in tensor.data_mut().iter_mut().enumerate() {
                let g = grad[i];
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                *w -= self.learning_rate * m_hat / (libm::sqrt(v_hat) + self.epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn scalar_param(v: f64) -> ParamSet {
        let mut ps = ParamSet::new();
        ps.insert("theta", Tensor::scalar(v)).unwrap();
        ps
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut ps = scalar_param(1.0);
        let id = ps.require("theta").unwrap();
        ps.get_mut(id).accumulate_grad(&[1.0]).unwrap();
        let mut adam = AdamState::new(&ps, 0.1);
        adam.step(&mut ps).unwrap();
        // m̂ = 1, v̂ = 1, so the step is lr / (1 + ε).
        let expected = 1.0 - 0.1 / (1.0 + 1e-8);
        assert!((ps.get(id).data()[0] - expected).abs() < 1e-15);
        assert!((ps.get(id).data()[0] - 0.9).abs() < 1e-8);
        assert_eq!(adam.step_count, 1);
        assert_eq!(ps.get(id).grad().unwrap(), &[1.0]);
    }

    #[test]
    fn zero_gradient_leaves_param() {
        let mut ps = scalar_param(3.0);
        ps.zero_grads();
        let mut adam = AdamState::new(&ps, 0.1);
        adam.step(&mut ps).unwrap();
        assert_eq!(ps.by_name("theta").unwrap().data(), &[3.0]);
    }

    #[test]
    fn missing_gradient_names_parameter() {
        let mut ps = scalar_param(3.0);
        let mut adam = AdamState::new(&ps, 0.1);
        assert_eq!(adam.step(&mut ps), Err(Error::MissingGradient("theta".into())));
    }

    #[test]
    fn descends_quadratic() {
        let mut ps = scalar_param(5.0);
        let id = ps.require("theta").unwrap();
        let mut adam = AdamState::new(&ps, 0.5);
        for _ in 0..100 {
            ps.zero_grads();
            let theta = ps.get(id).data()[0];
            ps.get_mut(id).accumulate_grad(&[2.0 * theta]).unwrap();
            adam.step(&mut ps).unwrap();
            assert!(adam.second_moment(0)[0] >= 0.0);
        }
        assert!(ps.get(id).data()[0].abs() < 0.5);
    }
}
