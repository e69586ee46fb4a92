use super::network::DrqnNetwork;
use super::tensor::{Scalar, Tensor};

/// Adam with bias correction.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: Vec<Tensor<T>>,
    v: Vec<Tensor<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(net: &DrqnNetwork<T>, learning_rate: f64) -> Self {
        let zeros: Vec<Tensor<T>> = net.tensors().iter().map(|t| Tensor::zeros(t.shape())).collect();
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn apply(&mut self, net: &mut DrqnNetwork<T>, grads: &DrqnNetwork<T>) {
        self.step += 1;
        let t = self.step as i32;
        let (b1, b2) = (T::of(self.beta1), T::of(self.beta2));
        let one = T::one();
        let c1 = one - T::of(self.beta1.powi(t));
        let c2 = one - T::of(self.beta2.powi(t));
        let lr = T::of(self.learning_rate);
        let eps = T::of(self.epsilon);
        for (((p, g), m), v) in net
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            for (((pi, &gi), mi), vi) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                *mi = b1 * *mi + (one - b1) * gi;
                *vi = b2 * *vi + (one - b2) * gi * gi;
                let m_hat = *mi / c1;
                let v_hat = *vi / c2;
                *pi = *pi - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

pub fn grad_norm<T: Scalar>(grads: &DrqnNetwork<T>) -> f64 {
    grads
        .tensors()
        .iter()
        .flat_map(|t| t.data().iter())
        .map(|x| {
            let x = x.to_f64().unwrap_or(f64::NAN);
            x * x
        })
        .sum::<f64>()
        .sqrt()
}

/// Rescales gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_grad_norm<T: Scalar>(grads: &mut DrqnNetwork<T>, max_norm: f64) -> f64 {
    let norm = grad_norm(grads);
    if norm > max_norm && norm.is_finite() {
        let scale = T::of(max_norm / norm);
        for t in grads.tensors_mut() {
            for x in t.data_mut() {
                *x *= scale;
            }
        }
    }
    norm
}

pub fn scale_grads<T: Scalar>(grads: &mut DrqnNetwork<T>, factor: f64) {
    let f = T::of(factor);
    for t in grads.tensors_mut() {
        for x in t.data_mut() {
            *x *= f;
        }
    }
}
