//! Adam with bias correction, operating in place on parameter tensors.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Hyperparameters shared by every parameter group.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::Domain("adam: learning rate must be > 0".into()));
        }
        if !(self.beta1 >= 0.0 && self.beta1 < 1.0) {
            return Err(Error::Domain("adam: beta1 must lie in [0, 1)".into()));
        }
        if !(self.beta2 >= 0.0 && self.beta2 < 1.0) {
            return Err(Error::Domain("adam: beta2 must lie in [0, 1)".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Domain("adam: eps must be > 0".into()));
        }
        Ok(())
    }
}

/// Per-network optimizer state: moment buffers mirror parameter shapes.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step_count: u64,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(config: AdamConfig, params: &[Tensor]) -> Result<Self> {
        config.validate()?;
        Ok(AdamState {
            config,
            step_count: 0,
            first_moment: params.iter().map(|p| vec![0.0; p.numel()]).collect(),
            second_moment: params.iter().map(|p| vec![0.0; p.numel()]).collect(),
        })
    }

    /// One bias-corrected Adam update over all parameters. Every parameter
    /// must carry a populated gradient; gradients are left untouched so the
    /// caller zeroes them explicitly via [`zero_grads`].
    pub fn step(&mut self, params: &mut [Tensor]) -> Result<()> {
        if params.len() != self.first_moment.len() {
            return Err(Error::Contract(format!(
                "adam: state built for {} parameters, got {}",
                self.first_moment.len(),
                params.len()
            )));
        }
        for (i, p) in params.iter().enumerate() {
            match &p.grad {
                None => {
                    return Err(Error::Contract(format!(
                        "adam: parameter {i} has no gradient"
                    )))
                }
                Some(g) if g.len() != self.first_moment[i].len() => {
                    return Err(Error::Contract(format!(
                        "adam: parameter {i} gradient length changed"
                    )))
                }
                _ => {}
            }
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let c = &self.config;
        let bc1 = 1.0 - c.beta1.powi(t);
        let bc2 = 1.0 - c.beta2.powi(t);
        for (i, p) in params.iter_mut().enumerate() {
            let g = p.grad.as_ref().expect("checked above");
            let m = &mut self.first_moment[i];
            let v = &mut self.second_moment[i];
            for ((w, &gk), (mk, vk)) in
                p.data.iter_mut().zip(g.iter()).zip(m.iter_mut().zip(v.iter_mut()))
            {
                *mk = c.beta1 * *mk + (1.0 - c.beta1) * gk;
                *vk = c.beta2 * *vk + (1.0 - c.beta2) * gk * gk;
                let m_hat = *mk / bc1;
                let v_hat = *vk / bc2;
                *w -= c.learning_rate * m_hat / (v_hat.sqrt() + c.eps);
            }
        }
        Ok(())
    }
}

/// Reset the gradient buffers of every parameter to zero.
pub fn zero_grads(params: &mut [Tensor]) {
    for p in params {
        p.zero_grad();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn param(data: Vec<f64>) -> Tensor {
        let n = data.len();
        Tensor::new(vec![n], data).unwrap().with_grad()
    }

    #[test]
    fn first_step_moves_by_learning_rate_against_gradient_sign() {
        let mut p = param(vec![1.0]);
        p.accumulate_grad(&[0.37]).unwrap();
        let cfg = AdamConfig::default();
        let mut state = AdamState::new(cfg.clone(), std::slice::from_ref(&p)).unwrap();
        state.step(std::slice::from_mut(&mut p)).unwrap();
        let delta = 1.0 - p.data[0];
        assert!(delta > 0.0, "moves against positive gradient");
        assert!((delta - cfg.learning_rate).abs() < 1e-6, "|Δ| ≈ η, got {delta}");
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut p = param(vec![0.25, -3.0]);
        p.accumulate_grad(&[0.0, 0.0]).unwrap();
        let mut state = AdamState::new(AdamConfig::default(), std::slice::from_ref(&p)).unwrap();
        state.step(std::slice::from_mut(&mut p)).unwrap();
        assert_eq!(p.data, vec![0.25, -3.0]);
    }

    #[test]
    fn missing_gradient_is_a_contract_error() {
        let mut p = param(vec![1.0]);
        let mut state = AdamState::new(AdamConfig::default(), std::slice::from_ref(&p)).unwrap();
        assert!(matches!(
            state.step(std::slice::from_mut(&mut p)),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn zero_betas_degenerate_to_sign_scaled_sgd() {
        // With β1=β2=0: Δw = −η·g/(|g|+eps)
        let cfg = AdamConfig {
            learning_rate: 0.05,
            beta1: 0.0,
            beta2: 0.0,
            eps: 1e-8,
        };
        let g = -0.73;
        let mut p = param(vec![2.0]);
        p.accumulate_grad(&[g]).unwrap();
        let mut state = AdamState::new(cfg.clone(), std::slice::from_ref(&p)).unwrap();
        state.step(std::slice::from_mut(&mut p)).unwrap();
        let expected = 2.0 - cfg.learning_rate * g / (g.abs() + cfg.eps);
        assert!((p.data[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn quadratic_bowl_converges_and_tracks_scalar_reference() {
        // Reference Adam on f(w)=w², gradient 2w, written out longhand.
        let cfg = AdamConfig {
            learning_rate: 0.1,
            ..AdamConfig::default()
        };
        let (mut w_ref, mut m, mut v) = (1.0f64, 0.0f64, 0.0f64);
        for t in 1..=200 {
            let g = 2.0 * w_ref;
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
            let m_hat = m / (1.0 - cfg.beta1.powi(t));
            let v_hat = v / (1.0 - cfg.beta2.powi(t));
            w_ref -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps);
        }
        assert!(w_ref.abs() < 0.05, "reference failed to converge: {w_ref}");

        let mut p = param(vec![1.0]);
        let mut state = AdamState::new(cfg, std::slice::from_ref(&p)).unwrap();
        for _ in 0..200 {
            let g = 2.0 * p.data[0];
            p.accumulate_grad(&[g]).unwrap();
            state.step(std::slice::from_mut(&mut p)).unwrap();
            zero_grads(std::slice::from_mut(&mut p));
        }
        assert!(p.data[0].abs() < 0.05);
        assert!((p.data[0] - w_ref).abs() < 1e-12, "diverged from reference");
    }
}
