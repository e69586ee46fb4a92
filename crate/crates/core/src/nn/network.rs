use rand::Rng;

use super::layers::{leaky_relu_backward, leaky_relu_vec, Conv2d, Dense, LstmCache, LstmCell};
use super::tensor::{check_len, NnError, Scalar, Tensor};

/// Map canvas side length fed to the feature extractor.
pub const MAP_SIDE: usize = 20;
/// Map channels: explored, obstacles, robot positions, goal candidates.
pub const MAP_CHANNELS: usize = 4;
pub const MFE_OUT: usize = 10;
pub const LSTM_HIDDEN: usize = 64;

/// Sizes that vary between the centralized and decentralized policies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetworkShape {
    pub scalar_dim: usize,
    pub hidden: usize,
    pub lstm_hidden: usize,
    pub actions: usize,
}

impl NetworkShape {
    /// Centralized policy for a team of `n`: one Q-value per joint macro action.
    pub fn centralized(n: usize) -> Self {
        Self {
            scalar_dim: 15 * n + 1,
            hidden: 128,
            lstm_hidden: LSTM_HIDDEN,
            actions: 4usize.pow(n as u32),
        }
    }

    /// Decentralized per-robot policy for a team of `n`.
    pub fn decentralized(n: usize) -> Self {
        Self {
            scalar_dim: 12 + 7 * (n - 1),
            hidden: 64,
            lstm_hidden: LSTM_HIDDEN,
            actions: 4,
        }
    }
}

/// LSTM state carried between macro decisions.
#[derive(Clone, Debug, PartialEq)]
pub struct Hidden<T> {
    pub h: Vec<T>,
    pub c: Vec<T>,
}

impl<T: Scalar> Hidden<T> {
    pub fn zeros(size: usize) -> Self {
        Self {
            h: vec![T::zero(); size],
            c: vec![T::zero(); size],
        }
    }
}

/// Convolutional map feature extractor.
#[derive(Clone, Debug, PartialEq)]
pub struct Mfe<T> {
    pub c1: Conv2d<T>,
    pub c2: Conv2d<T>,
    pub c3: Conv2d<T>,
    pub f1: Dense<T>,
    pub f2: Dense<T>,
}

#[derive(Clone, Debug)]
pub struct MfeCache<T> {
    input: Tensor<T>,
    z1: Tensor<T>,
    y1: Tensor<T>,
    z2: Tensor<T>,
    y2: Tensor<T>,
    z3: Tensor<T>,
    y3: Vec<T>,
    z4: Vec<T>,
    y4: Vec<T>,
    z5: Vec<T>,
}

fn activate<T: Scalar>(t: &Tensor<T>) -> Tensor<T> {
    Tensor::from_vec(t.shape(), leaky_relu_vec(t.data())).expect("same shape")
}

fn activate_backward<T: Scalar>(pre: &Tensor<T>, grad: &Tensor<T>) -> Tensor<T> {
    Tensor::from_vec(pre.shape(), leaky_relu_backward(pre.data(), grad.data())).expect("same shape")
}

impl<T: Scalar> Mfe<T> {
    pub fn new<R: Rng>(rng: &mut R) -> Self {
        Self {
            c1: Conv2d::new(MAP_CHANNELS, 8, 4, 2, rng),
            c2: Conv2d::new(8, 16, 3, 2, rng),
            c3: Conv2d::new(16, 16, 2, 2, rng),
            f1: Dense::new(64, 32, rng),
            f2: Dense::new(32, MFE_OUT, rng),
        }
    }

    pub fn zeros() -> Self {
        Self {
            c1: Conv2d::zeros(MAP_CHANNELS, 8, 4, 2),
            c2: Conv2d::zeros(8, 16, 3, 2),
            c3: Conv2d::zeros(16, 16, 2, 2),
            f1: Dense::zeros(64, 32),
            f2: Dense::zeros(32, MFE_OUT),
        }
    }

    /// Shapes of every intermediate activation, input first.
    pub fn shape_chain(&self, map: &Tensor<T>) -> Result<Vec<Vec<usize>>, NnError> {
        let (_, cache) = self.forward_cached(map)?;
        Ok(vec![
            cache.input.shape().to_vec(),
            cache.z1.shape().to_vec(),
            cache.z2.shape().to_vec(),
            cache.z3.shape().to_vec(),
            vec![cache.y3.len()],
            vec![cache.z4.len()],
            vec![cache.z5.len()],
        ])
    }

    pub fn forward(&self, map: &Tensor<T>) -> Result<Vec<T>, NnError> {
        Ok(self.forward_cached(map)?.0)
    }

    pub fn forward_cached(&self, map: &Tensor<T>) -> Result<(Vec<T>, MfeCache<T>), NnError> {
        if map.shape() != [MAP_CHANNELS, MAP_SIDE, MAP_SIDE] {
            return Err(NnError::ShapeMismatch {
                context: "map input",
                expected: vec![MAP_CHANNELS, MAP_SIDE, MAP_SIDE],
                found: map.shape().to_vec(),
            });
        }
        let z1 = self.c1.forward(map)?;
        let y1 = activate(&z1);
        let z2 = self.c2.forward(&y1)?;
        let y2 = activate(&z2);
        let z3 = self.c3.forward(&y2)?;
        let y3 = leaky_relu_vec(z3.data());
        let z4 = self.f1.forward(&y3)?;
        let y4 = leaky_relu_vec(&z4);
        let z5 = self.f2.forward(&y4)?;
        let out = leaky_relu_vec(&z5);
        let cache = MfeCache {
            input: map.clone(),
            z1,
            y1,
            z2,
            y2,
            z3,
            y3,
            z4,
            y4,
            z5,
        };
        Ok((out, cache))
    }

    /// Backward from `dL/d(output)`; returns `dL/d(map)`.
    pub fn backward(&self, cache: &MfeCache<T>, grad_out: &[T], grads: &mut Mfe<T>) -> Tensor<T> {
        let g5 = leaky_relu_backward(&cache.z5, grad_out);
        let g_y4 = self.f2.backward(&cache.y4, &g5, &mut grads.f2);
        let g4 = leaky_relu_backward(&cache.z4, &g_y4);
        let g_y3 = self.f1.backward(&cache.y3, &g4, &mut grads.f1);
        let g_y3 = Tensor::from_vec(cache.z3.shape(), g_y3).expect("flatten");
        let g3 = activate_backward(&cache.z3, &g_y3);
        let g_y2 = self.c3.backward(&cache.y2, &g3, &mut grads.c3);
        let g2 = activate_backward(&cache.z2, &g_y2);
        let g_y1 = self.c2.backward(&cache.y1, &g2, &mut grads.c2);
        let g1 = activate_backward(&cache.z1, &g_y1);
        self.c1.backward(&cache.input, &g1, &mut grads.c1)
    }
}

/// Recurrent Q-network: map features and scalar features merge, pass two
/// dense layers and an LSTM, then a dense layer and a linear Q head.
#[derive(Clone, Debug, PartialEq)]
pub struct DrqnNetwork<T> {
    pub mfe: Mfe<T>,
    pub f3: Dense<T>,
    pub f4: Dense<T>,
    pub f5: Dense<T>,
    pub lstm: LstmCell<T>,
    pub f6: Dense<T>,
    pub f7: Dense<T>,
}

/// Activations saved by [`DrqnNetwork::forward_cached`].
#[derive(Clone, Debug)]
pub struct NetCache<T> {
    mfe: MfeCache<T>,
    scalars: Vec<T>,
    zs: Vec<T>,
    cat: Vec<T>,
    z6: Vec<T>,
    y6: Vec<T>,
    z7: Vec<T>,
    lstm: LstmCache<T>,
    h_out: Vec<T>,
    z8: Vec<T>,
    y8: Vec<T>,
}

/// Gradients with respect to the network inputs.
#[derive(Clone, Debug)]
pub struct InputGrads<T> {
    pub map: Tensor<T>,
    pub scalars: Vec<T>,
    pub h: Vec<T>,
    pub c: Vec<T>,
}

/// Stable parameter names, in the order of [`DrqnNetwork::tensors`].
pub const TENSOR_NAMES: [&str; 23] = [
    "c1.weight",
    "c1.bias",
    "c2.weight",
    "c2.bias",
    "c3.weight",
    "c3.bias",
    "f1.weight",
    "f1.bias",
    "f2.weight",
    "f2.bias",
    "f3.weight",
    "f3.bias",
    "f4.weight",
    "f4.bias",
    "f5.weight",
    "f5.bias",
    "lstm.w_ih",
    "lstm.w_hh",
    "lstm.bias",
    "f6.weight",
    "f6.bias",
    "f7.weight",
    "f7.bias",
];

impl<T: Scalar> DrqnNetwork<T> {
    pub fn new<R: Rng>(shape: NetworkShape, rng: &mut R) -> Self {
        let hd = shape.hidden;
        Self {
            mfe: Mfe::new(rng),
            f3: Dense::new(shape.scalar_dim, hd, rng),
            f4: Dense::new(MFE_OUT + hd, hd, rng),
            f5: Dense::new(hd, hd, rng),
            lstm: LstmCell::new(hd, shape.lstm_hidden, rng),
            f6: Dense::new(shape.lstm_hidden, hd, rng),
            f7: Dense::new(hd, shape.actions, rng),
        }
    }

    /// Same architecture with every parameter zero; used as a gradient buffer.
    pub fn zeros(shape: NetworkShape) -> Self {
        let hd = shape.hidden;
        Self {
            mfe: Mfe::zeros(),
            f3: Dense::zeros(shape.scalar_dim, hd),
            f4: Dense::zeros(MFE_OUT + hd, hd),
            f5: Dense::zeros(hd, hd),
            lstm: LstmCell::zeros(hd, shape.lstm_hidden),
            f6: Dense::zeros(shape.lstm_hidden, hd),
            f7: Dense::zeros(hd, shape.actions),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.shape())
    }

    pub fn shape(&self) -> NetworkShape {
        NetworkShape {
            scalar_dim: self.f3.inputs(),
            hidden: self.f3.outputs(),
            lstm_hidden: self.lstm.hidden(),
            actions: self.f7.outputs(),
        }
    }

    pub fn zero_hidden(&self) -> Hidden<T> {
        Hidden::zeros(self.lstm.hidden())
    }

    pub fn tensors(&self) -> Vec<&Tensor<T>> {
        let m = &self.mfe;
        vec![
            &m.c1.weight,
            &m.c1.bias,
            &m.c2.weight,
            &m.c2.bias,
            &m.c3.weight,
            &m.c3.bias,
            &m.f1.weight,
            &m.f1.bias,
            &m.f2.weight,
            &m.f2.bias,
            &self.f3.weight,
            &self.f3.bias,
            &self.f4.weight,
            &self.f4.bias,
            &self.f5.weight,
            &self.f5.bias,
            &self.lstm.w_ih,
            &self.lstm.w_hh,
            &self.lstm.bias,
            &self.f6.weight,
            &self.f6.bias,
            &self.f7.weight,
            &self.f7.bias,
        ]
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor<T>> {
        let m = &mut self.mfe;
        vec![
            &mut m.c1.weight,
            &mut m.c1.bias,
            &mut m.c2.weight,
            &mut m.c2.bias,
            &mut m.c3.weight,
            &mut m.c3.bias,
            &mut m.f1.weight,
            &mut m.f1.bias,
            &mut m.f2.weight,
            &mut m.f2.bias,
            &mut self.f3.weight,
            &mut self.f3.bias,
            &mut self.f4.weight,
            &mut self.f4.bias,
            &mut self.f5.weight,
            &mut self.f5.bias,
            &mut self.lstm.w_ih,
            &mut self.lstm.w_hh,
            &mut self.lstm.bias,
            &mut self.f6.weight,
            &mut self.f6.bias,
            &mut self.f7.weight,
            &mut self.f7.bias,
        ]
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn fill_zero(&mut self) {
        for t in self.tensors_mut() {
            t.fill_zero();
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.all_finite())
    }

    pub fn cast<U: Scalar>(&self) -> DrqnNetwork<U> {
        let mut out = DrqnNetwork::<U>::zeros(self.shape());
        for (dst, src) in out.tensors_mut().into_iter().zip(self.tensors()) {
            *dst = src.cast();
        }
        out
    }

    pub fn forward(&self, map: &Tensor<T>, scalars: &[T], hidden: &Hidden<T>) -> Result<(Vec<T>, Hidden<T>), NnError> {
        let (q, h, _) = self.forward_cached(map, scalars, hidden)?;
        Ok((q, h))
    }

    pub fn forward_cached(
        &self,
        map: &Tensor<T>,
        scalars: &[T],
        hidden: &Hidden<T>,
    ) -> Result<(Vec<T>, Hidden<T>, NetCache<T>), NnError> {
        check_len("scalar features", self.f3.inputs(), scalars.len())?;
        let (features, mfe) = self.mfe.forward_cached(map)?;
        let zs = self.f3.forward(scalars)?;
        let mut cat = features;
        cat.extend(leaky_relu_vec(&zs));
        let z6 = self.f4.forward(&cat)?;
        let y6 = leaky_relu_vec(&z6);
        let z7 = self.f5.forward(&y6)?;
        let y7 = leaky_relu_vec(&z7);
        let (h_out, c_out, lstm) = self.lstm.forward(&y7, &hidden.h, &hidden.c)?;
        let z8 = self.f6.forward(&h_out)?;
        let y8 = leaky_relu_vec(&z8);
        let q = self.f7.forward(&y8)?;
        let cache = NetCache {
            mfe,
            scalars: scalars.to_vec(),
            zs,
            cat,
            z6,
            y6,
            z7,
            lstm,
            h_out: h_out.clone(),
            z8,
            y8,
        };
        Ok((q, Hidden { h: h_out, c: c_out }, cache))
    }

    /// Backward from `dL/dQ` (plus optional gradients flowing into the output
    /// hidden state). Parameter gradients accumulate into `grads`.
    pub fn backward(
        &self,
        cache: &NetCache<T>,
        grad_q: &[T],
        grad_hidden: Option<&Hidden<T>>,
        grads: &mut DrqnNetwork<T>,
    ) -> InputGrads<T> {
        let g_y8 = self.f7.backward(&cache.y8, grad_q, &mut grads.f7);
        let g8 = leaky_relu_backward(&cache.z8, &g_y8);
        let mut g_h = self.f6.backward(&cache.h_out, &g8, &mut grads.f6);
        let hn = self.lstm.hidden();
        let mut g_c = vec![T::zero(); hn];
        if let Some(extra) = grad_hidden {
            for (a, &b) in g_h.iter_mut().zip(&extra.h) {
                *a += b;
            }
            g_c.clone_from(&extra.c);
        }
        let (g_y7, g_h_prev, g_c_prev) = self.lstm.backward(&cache.lstm, &g_h, &g_c, &mut grads.lstm);
        let g7 = leaky_relu_backward(&cache.z7, &g_y7);
        let g_y6 = self.f5.backward(&cache.y6, &g7, &mut grads.f5);
        let g6 = leaky_relu_backward(&cache.z6, &g_y6);
        let g_cat = self.f4.backward(&cache.cat, &g6, &mut grads.f4);
        let (g_feat, g_ys) = g_cat.split_at(MFE_OUT);
        let gs = leaky_relu_backward(&cache.zs, g_ys);
        let g_scalars = self.f3.backward(&cache.scalars, &gs, &mut grads.f3);
        let g_map = self.mfe.backward(&cache.mfe, g_feat, &mut grads.mfe);
        InputGrads {
            map: g_map,
            scalars: g_scalars,
            h: g_h_prev,
            c: g_c_prev,
        }
    }
}

/// Estimation network paired with its periodically synced target copy.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubleQ<T> {
    pub estimation: DrqnNetwork<T>,
    pub target: DrqnNetwork<T>,
}

impl<T: Scalar> DoubleQ<T> {
    pub fn new(estimation: DrqnNetwork<T>) -> Self {
        Self {
            target: estimation.clone(),
            estimation,
        }
    }

    pub fn sync_target(&mut self) {
        self.target.clone_from(&self.estimation);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{stream_rng, Stream};

    #[test]
    fn shape_chain_is_exact() {
        let mut rng = stream_rng(1, Stream::Policy);
        let mfe = Mfe::<f32>::new(&mut rng);
        let chain = mfe.shape_chain(&Tensor::zeros(&[4, 20, 20])).unwrap();
        let expect: Vec<Vec<usize>> = vec![
            vec![4, 20, 20],
            vec![8, 9, 9],
            vec![16, 4, 4],
            vec![16, 2, 2],
            vec![64],
            vec![32],
            vec![10],
        ];
        assert_eq!(chain, expect);
    }

    #[test]
    fn wrong_map_shape_is_rejected() {
        let mfe = Mfe::<f32>::zeros();
        assert!(mfe.forward(&Tensor::zeros(&[4, 10, 10])).is_err());
    }

    #[test]
    fn zero_params_give_zero_features() {
        let mfe = Mfe::<f64>::zeros();
        let map = Tensor::full(&[4, 20, 20], 1.0);
        assert!(mfe.forward(&map).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn output_widths() {
        let mut rng = stream_rng(2, Stream::Policy);
        let cep = DrqnNetwork::<f32>::new(NetworkShape::centralized(3), &mut rng);
        let dep = DrqnNetwork::<f32>::new(NetworkShape::decentralized(3), &mut rng);
        let map = Tensor::zeros(&[4, 20, 20]);
        let (q, _) = cep.forward(&map, &[0.0; 46], &cep.zero_hidden()).unwrap();
        assert_eq!(q.len(), 64);
        let (q, _) = dep.forward(&map, &[0.0; 26], &dep.zero_hidden()).unwrap();
        assert_eq!(q.len(), 4);
        assert!(dep.forward(&map, &[0.0; 25], &dep.zero_hidden()).is_err());
        assert_eq!(TENSOR_NAMES.len(), cep.tensors().len());
    }

    #[test]
    fn hidden_state_carries_history() {
        let mut rng = stream_rng(3, Stream::Policy);
        let net = DrqnNetwork::<f64>::new(NetworkShape::decentralized(3), &mut rng);
        let map1 = Tensor::uniform(&[4, 20, 20], 1.0, &mut rng);
        let map2 = Tensor::uniform(&[4, 20, 20], 1.0, &mut rng);
        let s: Vec<f64> = (0..26).map(|i| i as f64 / 26.0).collect();
        let (_, h1) = net.forward(&map1, &s, &net.zero_hidden()).unwrap();
        let (q_seq, _) = net.forward(&map2, &s, &h1).unwrap();
        let (q_fresh, _) = net.forward(&map2, &s, &net.zero_hidden()).unwrap();
        assert_ne!(q_seq, q_fresh);
        let (again, _) = net.forward(&map2, &s, &h1).unwrap();
        assert_eq!(q_seq, again);
    }

    #[test]
    fn sync_makes_target_identical() {
        let mut rng = stream_rng(4, Stream::Policy);
        let mut dq = DoubleQ::new(DrqnNetwork::<f32>::new(NetworkShape::decentralized(2), &mut rng));
        dq.estimation.f7.bias.data_mut()[0] = 3.0;
        assert_ne!(dq.estimation, dq.target);
        dq.sync_target();
        assert_eq!(dq.estimation, dq.target);
    }
}
