use rand::Rng;

use super::tensor::{check_len, NnError, Scalar, Tensor};

/// Negative-side slope of the leaky ReLU.
pub const LEAKY_SLOPE: f64 = 0.01;

pub fn leaky_relu<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        x * T::of(LEAKY_SLOPE)
    }
}

pub fn leaky_relu_vec<T: Scalar>(pre: &[T]) -> Vec<T> {
    pre.iter().map(|&x| leaky_relu(x)).collect()
}

/// Multiplies `grad` by the leaky-ReLU derivative at `pre`.
pub fn leaky_relu_backward<T: Scalar>(pre: &[T], grad: &[T]) -> Vec<T> {
    let slope = T::of(LEAKY_SLOPE);
    pre.iter()
        .zip(grad)
        .map(|(&p, &g)| if p > T::zero() { g } else { g * slope })
        .collect()
}

fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn axpy<T: Scalar>(y: &mut [T], alpha: T, x: &[T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Affine layer `y = W x + b` with `W` stored `[out, in]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<T> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

impl<T: Scalar> Dense<T> {
    /// Fan-in scaled uniform weights in `±sqrt(6 / fan_in)`, zero bias.
    pub fn new<R: Rng>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let bound = (6.0 / inputs as f64).sqrt();
        Self {
            weight: Tensor::uniform(&[outputs, inputs], bound, rng),
            bias: Tensor::zeros(&[outputs]),
        }
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weight: Tensor::zeros(&[outputs, inputs]),
            bias: Tensor::zeros(&[outputs]),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>, NnError> {
        check_len("dense input", self.inputs(), x.len())?;
        let n = self.inputs();
        Ok(self
            .weight
            .data()
            .chunks_exact(n)
            .zip(self.bias.data())
            .map(|(row, &b)| b + dot(row, x))
            .collect())
    }

    /// Accumulates parameter gradients into `grads` and returns `dL/dx`.
    pub fn backward(&self, x: &[T], grad_out: &[T], grads: &mut Dense<T>) -> Vec<T> {
        let n = self.inputs();
        let mut grad_in = vec![T::zero(); n];
        for (o, &g) in grad_out.iter().enumerate() {
            if g == T::zero() {
                continue;
            }
            axpy(&mut grads.weight.data_mut()[o * n..(o + 1) * n], g, x);
            grads.bias.data_mut()[o] += g;
            axpy(&mut grad_in, g, &self.weight.data()[o * n..(o + 1) * n]);
        }
        grad_in
    }
}

/// Valid (unpadded) cross-correlation with a square kernel. Input and output
/// are `[channels, height, width]`; weights are `[out, in, k, k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv2d<T> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
    pub stride: usize,
}

impl<T: Scalar> Conv2d<T> {
    pub fn new<R: Rng>(in_channels: usize, out_channels: usize, kernel: usize, stride: usize, rng: &mut R) -> Self {
        let fan_in = in_channels * kernel * kernel;
        let bound = (6.0 / fan_in as f64).sqrt();
        Self {
            weight: Tensor::uniform(&[out_channels, in_channels, kernel, kernel], bound, rng),
            bias: Tensor::zeros(&[out_channels]),
            stride,
        }
    }

    pub fn zeros(in_channels: usize, out_channels: usize, kernel: usize, stride: usize) -> Self {
        Self {
            weight: Tensor::zeros(&[out_channels, in_channels, kernel, kernel]),
            bias: Tensor::zeros(&[out_channels]),
            stride,
        }
    }

    pub fn in_channels(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn out_channels(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn kernel(&self) -> usize {
        self.weight.shape()[2]
    }

    /// Output `[channels, height, width]` for an input of the given spatial size.
    pub fn output_shape(&self, height: usize, width: usize) -> [usize; 3] {
        let k = self.kernel();
        [
            self.out_channels(),
            (height - k) / self.stride + 1,
            (width - k) / self.stride + 1,
        ]
    }

    pub fn forward(&self, input: &Tensor<T>) -> Result<Tensor<T>, NnError> {
        let shape = input.shape();
        let k = self.kernel();
        if shape.len() != 3 || shape[0] != self.in_channels() || shape[1] < k || shape[2] < k {
            return Err(NnError::ShapeMismatch {
                context: "conv2d input",
                expected: vec![self.in_channels(), k, k],
                found: shape.to_vec(),
            });
        }
        let (ic, h, w) = (shape[0], shape[1], shape[2]);
        let [oc, oh, ow] = self.output_shape(h, w);
        let s = self.stride;
        let x = input.data();
        let wt = self.weight.data();
        let mut out = vec![T::zero(); oc * oh * ow];
        for o in 0..oc {
            let b = self.bias.data()[o];
            for r in 0..oh {
                for c in 0..ow {
                    let mut acc = b;
                    for i in 0..ic {
                        for kr in 0..k {
                            let xrow = &x[(i * h + r * s + kr) * w + c * s..][..k];
                            let wrow = &wt[((o * ic + i) * k + kr) * k..][..k];
                            acc += dot(wrow, xrow);
                        }
                    }
                    out[(o * oh + r) * ow + c] = acc;
                }
            }
        }
        Tensor::from_vec(&[oc, oh, ow], out)
    }

    pub fn backward(&self, input: &Tensor<T>, grad_out: &Tensor<T>, grads: &mut Conv2d<T>) -> Tensor<T> {
        let (ic, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
        let (oc, oh, ow) = (grad_out.shape()[0], grad_out.shape()[1], grad_out.shape()[2]);
        let k = self.kernel();
        let s = self.stride;
        let x = input.data();
        let g = grad_out.data();
        let wt = self.weight.data();
        let mut grad_in = vec![T::zero(); ic * h * w];
        for o in 0..oc {
            for r in 0..oh {
                for c in 0..ow {
                    let go = g[(o * oh + r) * ow + c];
                    if go == T::zero() {
                        continue;
                    }
                    grads.bias.data_mut()[o] += go;
                    for i in 0..ic {
                        for kr in 0..k {
                            let xi = (i * h + r * s + kr) * w + c * s;
                            let wi = ((o * ic + i) * k + kr) * k;
                            axpy(&mut grads.weight.data_mut()[wi..wi + k], go, &x[xi..xi + k]);
                            axpy(&mut grad_in[xi..xi + k], go, &wt[wi..wi + k]);
                        }
                    }
                }
            }
        }
        Tensor::from_vec(&[ic, h, w], grad_in).expect("input shape")
    }
}

/// Standard LSTM cell, gate order input, forget, candidate, output.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmCell<T> {
    /// `[4H, in]`
    pub w_ih: Tensor<T>,
    /// `[4H, H]`
    pub w_hh: Tensor<T>,
    /// `[4H]`
    pub bias: Tensor<T>,
}

/// Values saved by [`LstmCell::forward`] for the backward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmCache<T> {
    pub x: Vec<T>,
    pub h_prev: Vec<T>,
    pub c_prev: Vec<T>,
    /// Activated gates `[i, f, g, o]`, each of length H.
    pub gates: Vec<T>,
    pub c: Vec<T>,
    pub tanh_c: Vec<T>,
}

impl<T: Scalar> LstmCell<T> {
    /// Uniform `±1/sqrt(H)` weights, zero bias except forget gate `+1`.
    pub fn new<R: Rng>(inputs: usize, hidden: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        let mut bias = Tensor::zeros(&[4 * hidden]);
        for b in &mut bias.data_mut()[hidden..2 * hidden] {
            *b = T::one();
        }
        Self {
            w_ih: Tensor::uniform(&[4 * hidden, inputs], bound, rng),
            w_hh: Tensor::uniform(&[4 * hidden, hidden], bound, rng),
            bias,
        }
    }

    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        Self {
            w_ih: Tensor::zeros(&[4 * hidden, inputs]),
            w_hh: Tensor::zeros(&[4 * hidden, hidden]),
            bias: Tensor::zeros(&[4 * hidden]),
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_hh.shape()[1]
    }

    pub fn inputs(&self) -> usize {
        self.w_ih.shape()[1]
    }

    /// Returns `(h', c', cache)`.
    pub fn forward(&self, x: &[T], h: &[T], c: &[T]) -> Result<(Vec<T>, Vec<T>, LstmCache<T>), NnError> {
        let hn = self.hidden();
        let n_in = self.inputs();
        check_len("lstm input", n_in, x.len())?;
        check_len("lstm hidden", hn, h.len())?;
        check_len("lstm cell", hn, c.len())?;
        let mut gates: Vec<T> = (0..4 * hn)
            .map(|row| {
                self.bias.data()[row]
                    + dot(&self.w_ih.data()[row * n_in..(row + 1) * n_in], x)
                    + dot(&self.w_hh.data()[row * hn..(row + 1) * hn], h)
            })
            .collect();
        for (idx, z) in gates.iter_mut().enumerate() {
            *z = if (2 * hn..3 * hn).contains(&idx) {
                z.tanh()
            } else {
                sigmoid(*z)
            };
        }
        let mut c_new = vec![T::zero(); hn];
        let mut tanh_c = vec![T::zero(); hn];
        let mut h_new = vec![T::zero(); hn];
        for k in 0..hn {
            let (i, f, g, o) = (gates[k], gates[hn + k], gates[2 * hn + k], gates[3 * hn + k]);
            c_new[k] = f * c[k] + i * g;
            tanh_c[k] = c_new[k].tanh();
            h_new[k] = o * tanh_c[k];
        }
        let cache = LstmCache {
            x: x.to_vec(),
            h_prev: h.to_vec(),
            c_prev: c.to_vec(),
            gates,
            c: c_new.clone(),
            tanh_c,
        };
        Ok((h_new, c_new, cache))
    }

    /// Given `dL/dh'` and `dL/dc'`, accumulates parameter gradients and
    /// returns `(dL/dx, dL/dh, dL/dc)`.
    pub fn backward(
        &self,
        cache: &LstmCache<T>,
        grad_h: &[T],
        grad_c: &[T],
        grads: &mut LstmCell<T>,
    ) -> (Vec<T>, Vec<T>, Vec<T>) {
        let hn = self.hidden();
        let n_in = self.inputs();
        let one = T::one();
        let gts = &cache.gates;
        let mut dz = vec![T::zero(); 4 * hn];
        let mut dc_prev = vec![T::zero(); hn];
        for k in 0..hn {
            let (i, f, g, o) = (gts[k], gts[hn + k], gts[2 * hn + k], gts[3 * hn + k]);
            let tc = cache.tanh_c[k];
            let dc = grad_c[k] + grad_h[k] * o * (one - tc * tc);
            let d_o = grad_h[k] * tc;
            let d_i = dc * g;
            let d_g = dc * i;
            let d_f = dc * cache.c_prev[k];
            dc_prev[k] = dc * f;
            dz[k] = d_i * i * (one - i);
            dz[hn + k] = d_f * f * (one - f);
            dz[2 * hn + k] = d_g * (one - g * g);
            dz[3 * hn + k] = d_o * o * (one - o);
        }
        let mut dx = vec![T::zero(); n_in];
        let mut dh = vec![T::zero(); hn];
        for (row, &d) in dz.iter().enumerate() {
            if d == T::zero() {
                continue;
            }
            grads.bias.data_mut()[row] += d;
            axpy(&mut grads.w_ih.data_mut()[row * n_in..(row + 1) * n_in], d, &cache.x);
            axpy(&mut grads.w_hh.data_mut()[row * hn..(row + 1) * hn], d, &cache.h_prev);
            axpy(&mut dx, d, &self.w_ih.data()[row * n_in..(row + 1) * n_in]);
            axpy(&mut dh, d, &self.w_hh.data()[row * hn..(row + 1) * hn]);
        }
        (dx, dh, dc_prev)
    }
}
