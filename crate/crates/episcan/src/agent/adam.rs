//! Adaptive-moment gradient descent over ordered parameter blocks.

use crate::num::Real;

/// Optimizer state: per-parameter first/second moment accumulators and a
/// step counter for bias correction. The block layout is fixed by the
/// first call and must match on every subsequent step.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    first_moment: Vec<Vec<T>>,
    second_moment: Vec<Vec<T>>,
    step_count: u64,
}

impl<T: Real> Adam<T> {
    pub fn new(learning_rate: T, beta1: T, beta2: T, epsilon: T) -> Self {
        Adam {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            first_moment: Vec::new(),
            second_moment: Vec::new(),
            step_count: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One descent update: `p -= lr * m_hat / (sqrt(v_hat) + eps)`.
    pub fn step(&mut self, params: &mut [&mut [T]], grads: &[&[T]]) {
        assert_eq!(params.len(), grads.len(), "parameter/gradient block count");
        if self.first_moment.is_empty() {
            self.first_moment = params.iter().map(|p| vec![T::zero(); p.len()]).collect();
            self.second_moment = self.first_moment.clone();
        }
        assert_eq!(self.first_moment.len(), params.len(), "block layout changed");
        self.step_count += 1;
        let t = self.step_count as i32;
        let bias1 = T::one() - self.beta1.powi(t);
        let bias2 = T::one() - self.beta2.powi(t);
        for ((block, grad), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first_moment.iter_mut().zip(&mut self.second_moment))
        {
            debug_assert_eq!(block.len(), grad.len());
            for i in 0..block.len() {
                let g = grad[i];
                m[i] = self.beta1 * m[i] + (T::one() - self.beta1) * g;
                v[i] = self.beta2 * v[i] + (T::one() - self.beta2) * g * g;
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                block[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_roughly_learning_rate() {
        let mut opt = Adam::new(1e-3, 0.9, 0.999, 1e-8);
        let mut p = vec![1.0f64, -2.0];
        let g = vec![0.4f64, -0.7];
        opt.step(&mut [&mut p], &[&g]);
        // bias-corrected first step is lr * g / (|g| + eps) = lr * sign(g)
        assert!((p[0] - (1.0 - 1e-3)).abs() < 1e-9);
        assert!((p[1] - (-2.0 + 1e-3)).abs() < 1e-9);
        assert_eq!(opt.step_count(), 1);
    }

    #[test]
    fn descends_a_quadratic() {
        let mut opt = Adam::new(0.05, 0.9, 0.999, 1e-8);
        let mut p = vec![3.0f64];
        for _ in 0..500 {
            let g = vec![2.0 * p[0]]; // d/dp p^2
            opt.step(&mut [&mut p], &[&g]);
        }
        assert!(p[0].abs() < 0.05, "p = {}", p[0]);
    }

    #[test]
    fn zero_gradient_leaves_parameters_fixed() {
        let mut opt = Adam::new(0.1, 0.9, 0.999, 1e-8);
        let mut p = vec![0.5f64, -0.5];
        let g = vec![0.0f64, 0.0];
        opt.step(&mut [&mut p], &[&g]);
        assert_eq!(p, vec![0.5, -0.5]);
    }
}
