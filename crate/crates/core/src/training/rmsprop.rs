use crate::decoder::{GradientSet, ParamShape, WeightSet};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RmsPropConfig {
    pub learning_rate: f64,
    pub decay: f64,
    pub epsilon: f64,
}

impl Default for RmsPropConfig {
    fn default() -> Self {
        Self { learning_rate: 0.01, decay: 0.99, epsilon: 1e-8 }
    }
}

/// RMSProp accumulators:
/// `acc = decay * acc + (1 - decay) * g^2; w -= lr * g / sqrt(acc + eps)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OptimizerState {
    pub config: RmsPropConfig,
    pub mean_square: Vec<f64>,
}

impl OptimizerState {
    pub fn new(shape: ParamShape, config: RmsPropConfig) -> Self {
        Self { config, mean_square: vec![0.0; shape.len()] }
    }

    pub fn set_learning_rate(&mut self, lr: f64) {
        self.config.learning_rate = lr;
    }

    pub fn step(&mut self, weights: &mut WeightSet, grads: &GradientSet) {
        assert_eq!(weights.shape(), grads.shape());
        assert_eq!(self.mean_square.len(), grads.values().len());
        let RmsPropConfig { learning_rate, decay, epsilon } = self.config;
        for ((w, &g), acc) in weights.values_mut().iter_mut().zip(grads.values()).zip(&mut self.mean_square) {
            *acc = decay * *acc + (1.0 - decay) * g * g;
            *w -= learning_rate * g / (*acc + epsilon).sqrt();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> (WeightSet, ParamShape) {
        let shape = ParamShape { layers: 1, n: 1, edges: 0 };
        (WeightSet::from_values(shape, vec![1.0, 1.0]).unwrap(), shape)
    }

    #[test]
    fn one_step_by_hand() {
        let (mut w, shape) = single();
        let mut opt =
            OptimizerState::new(shape, RmsPropConfig { learning_rate: 0.01, decay: 0.9, epsilon: 1e-8 });
        let g = GradientSet::from_raw(shape, vec![1.0, 0.0]);
        opt.step(&mut w, &g);
        assert!((opt.mean_square[0] - 0.1).abs() < 1e-16);
        // mpmath: -0.01 / sqrt(0.1 + 1e-8) = -0.0316227750205450825
        assert!((w.values()[0] - 1.0 + 0.031_622_775_020_545_08).abs() < 1e-15);
        assert_eq!(w.values()[1], 1.0);
    }

    #[test]
    fn zero_gradient_only_decays() {
        let (mut w, shape) = single();
        let mut opt = OptimizerState::new(shape, RmsPropConfig::default());
        opt.mean_square = vec![0.5, 0.5];
        opt.step(&mut w, &GradientSet::zeros(shape));
        assert_eq!(w.values(), &[1.0, 1.0]);
        assert!((opt.mean_square[0] - 0.495).abs() < 1e-15);
    }

    #[test]
    fn constant_gradient_step_tends_to_lr() {
        let (mut w, shape) = single();
        let mut opt =
            OptimizerState::new(shape, RmsPropConfig { learning_rate: 0.01, decay: 0.9, epsilon: 1e-8 });
        let g = GradientSet::from_raw(shape, vec![0.3, -0.3]);
        for _ in 0..500 {
            opt.step(&mut w, &g);
        }
        let prev = w.values()[0];
        let mut w2 = w.clone();
        opt.step(&mut w2, &g);
        assert!(((prev - w2.values()[0]) - 0.01).abs() < 1e-6);
        assert!(((w2.values()[1] - w.values()[1]) - 0.01).abs() < 1e-6);
    }
}
