//! Adam over the flat parameter vector, with global gradient-norm
//! clipping.

use alloc::vec;
use alloc::vec::Vec;

pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl Adam {
    pub fn new(lr: f64, beta1: f64, beta2: f64, epsilon: f64, param_len: usize) -> Self {
        Adam {
            lr,
            beta1,
            beta2,
            epsilon,
            m: vec![0.0; param_len],
            v: vec![0.0; param_len],
            step: 0,
        }
    }

    /// Clips `grad` to `clip_norm` (global L2) in place; returns the
    /// pre-clip norm.
    pub fn clip(grad: &mut [f64], clip_norm: f64) -> f64 {
        let mut sq = 0.0;
        for g in grad.iter() {
            sq += g * g;
        }
        let norm = libm::sqrt(sq);
        if clip_norm > 0.0 && norm > clip_norm {
            let scale = clip_norm / norm;
            for g in grad.iter_mut() {
                *g *= scale;
            }
        }
        norm
    }

    /// One bias-corrected update.
    pub fn update(&mut self, params: &mut [f64], grad: &[f64]) {
        self.step += 1;
        let t = self.step as f64;
        let bc1 = 1.0 - libm::pow(self.beta1, t);
        let bc2 = 1.0 - libm::pow(self.beta2, t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mhat = self.m[i] / bc1;
            let vhat = self.v[i] / bc2;
            params[i] -= self.lr * mhat / (libm::sqrt(vhat) + self.epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lr_leaves_params_bit_identical() {
        let mut a = Adam::new(0.0, 0.9, 0.999, 1e-8, 3);
        let mut p = vec![1.0, -2.0, 0.5];
        let orig = p.clone();
        a.update(&mut p, &[0.3, -0.1, 0.9]);
        assert_eq!(p, orig);
    }

    #[test]
    fn descends_a_quadratic() {
        let mut a = Adam::new(0.05, 0.9, 0.999, 1e-8, 1);
        let mut p = vec![3.0];
        for _ in 0..500 {
            let g = [2.0 * p[0]];
            a.update(&mut p, &g);
        }
        assert!(p[0].abs() < 0.05, "p={}", p[0]);
    }

    #[test]
    fn clip_preserves_direction() {
        let mut g = vec![3.0, 4.0];
        let norm = Adam::clip(&mut g, 1.0);
        assert!((norm - 5.0).abs() < 1e-12);
        assert!((g[0] - 0.6).abs() < 1e-12 && (g[1] - 0.8).abs() < 1e-12);
    }
}
