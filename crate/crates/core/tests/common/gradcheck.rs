//! Central finite-difference checks for every layer and both networks.

use madenet_core::nn::{
    leaky_relu, leaky_relu_backward, Conv2d, Dense, DrqnNetwork, Hidden, LstmCell, NetworkShape, Tensor,
};
use madenet_core::sim::{stream_rng, Stream};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const EPS: f64 = 1e-5;
// Below this magnitude the difference quotient is dominated by f64 rounding.
const FLOOR: f64 = 1e-5;

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR)
}

/// Numeric derivative of `f` with respect to `x[i]`, restoring `x[i]`.
fn central<F: FnMut(&[f64]) -> f64>(x: &mut [f64], i: usize, mut f: F) -> f64 {
    let orig = x[i];
    x[i] = orig + EPS;
    let plus = f(x);
    x[i] = orig - EPS;
    let minus = f(x);
    x[i] = orig;
    (plus - minus) / (2.0 * EPS)
}

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn weighted(w: &[f64], y: &[f64]) -> f64 {
    w.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Indices to probe: everything for small tensors, a random subset otherwise.
fn probe(rng: &mut ChaCha8Rng, len: usize, max: usize) -> Vec<usize> {
    if len <= max {
        (0..len).collect()
    } else {
        sample(rng, len, max).into_vec()
    }
}

#[derive(Debug, Default)]
pub struct Report {
    pub max_rel_err: f64,
    pub checks: usize,
    pub worst: String,
}

impl Report {
    fn add(&mut self, label: &str, analytic: f64, numeric: f64) {
        let e = rel_err(analytic, numeric);
        self.checks += 1;
        if e > self.max_rel_err || e.is_nan() {
            self.max_rel_err = e;
            self.worst = format!("{label}: analytic {analytic:e} numeric {numeric:e}");
        }
    }

    fn merge(&mut self, other: Report) {
        self.checks += other.checks;
        if other.max_rel_err > self.max_rel_err || other.max_rel_err.is_nan() {
            self.max_rel_err = other.max_rel_err;
            self.worst = other.worst;
        }
    }
}

pub fn check_leaky_relu(seed: u64) -> Report {
    let mut rng = stream_rng(seed, Stream::Policy);
    let mut x = rand_vec(&mut rng, 32);
    let w = rand_vec(&mut rng, 32);
    let analytic = leaky_relu_backward(&x, &w);
    let mut r = Report::default();
    for i in 0..x.len() {
        let n = central(&mut x, i, |x| weighted(&w, &x.iter().map(|&v| leaky_relu(v)).collect::<Vec<_>>()));
        r.add("leaky_relu input", analytic[i], n);
    }
    r
}

pub fn check_dense(seed: u64) -> Report {
    let mut rng = stream_rng(seed, Stream::Policy);
    let mut layer = Dense::<f64>::new(7, 5, &mut rng);
    layer.bias = Tensor::uniform(&[5], 0.5, &mut rng);
    let mut x = rand_vec(&mut rng, 7);
    let w = rand_vec(&mut rng, 5);
    let mut grads = Dense::zeros(7, 5);
    let gx = layer.backward(&x, &w, &mut grads);
    let mut r = Report::default();
    for i in 0..x.len() {
        let n = central(&mut x, i, |x| weighted(&w, &layer.forward(x).unwrap()));
        r.add("dense input", gx[i], n);
    }
    let mut p = layer.weight.data().to_vec();
    for i in 0..p.len() {
        let n = central(&mut p, i, |p| {
            let mut l = layer.clone();
            l.weight.data_mut().copy_from_slice(p);
            weighted(&w, &l.forward(&x).unwrap())
        });
        r.add("dense weight", grads.weight.data()[i], n);
    }
    let mut b = layer.bias.data().to_vec();
    for i in 0..b.len() {
        let n = central(&mut b, i, |b| {
            let mut l = layer.clone();
            l.bias.data_mut().copy_from_slice(b);
            weighted(&w, &l.forward(&x).unwrap())
        });
        r.add("dense bias", grads.bias.data()[i], n);
    }
    r
}

fn check_conv_config(rng: &mut ChaCha8Rng, ic: usize, oc: usize, k: usize, s: usize, side: usize) -> Report {
    let mut layer = Conv2d::<f64>::new(ic, oc, k, s, rng);
    layer.bias = Tensor::uniform(&[oc], 0.5, rng);
    let input = Tensor::<f64>::uniform(&[ic, side, side], 1.0, rng);
    let out_len = layer.forward(&input).unwrap().len();
    let w = rand_vec(rng, out_len);
    let out_shape = layer.forward(&input).unwrap().shape().to_vec();
    let mut grads = Conv2d::zeros(ic, oc, k, s);
    let gx = layer.backward(&input, &Tensor::from_vec(&out_shape, w.clone()).unwrap(), &mut grads);
    let mut r = Report::default();
    let mut x = input.data().to_vec();
    for i in probe(rng, x.len(), 40) {
        let n = central(&mut x, i, |x| {
            let t = Tensor::from_vec(input.shape(), x.to_vec()).unwrap();
            weighted(&w, layer.forward(&t).unwrap().data())
        });
        r.add("conv input", gx.data()[i], n);
    }
    let mut p = layer.weight.data().to_vec();
    for i in probe(rng, p.len(), 40) {
        let n = central(&mut p, i, |p| {
            let mut l = layer.clone();
            l.weight.data_mut().copy_from_slice(p);
            weighted(&w, l.forward(&input).unwrap().data())
        });
        r.add("conv weight", grads.weight.data()[i], n);
    }
    let mut b = layer.bias.data().to_vec();
    for i in 0..b.len() {
        let n = central(&mut b, i, |b| {
            let mut l = layer.clone();
            l.bias.data_mut().copy_from_slice(b);
            weighted(&w, l.forward(&input).unwrap().data())
        });
        r.add("conv bias", grads.bias.data()[i], n);
    }
    r
}

pub fn check_conv(seed: u64) -> Report {
    let mut rng = stream_rng(seed, Stream::Policy);
    let mut r = check_conv_config(&mut rng, 2, 3, 3, 2, 9);
    r.merge(check_conv_config(&mut rng, 4, 8, 4, 2, 20));
    r.merge(check_conv_config(&mut rng, 3, 2, 2, 1, 5));
    r
}

pub fn check_lstm(seed: u64) -> Report {
    let mut rng = stream_rng(seed, Stream::Policy);
    let (ni, nh) = (6, 5);
    let mut cell = LstmCell::<f64>::new(ni, nh, &mut rng);
    cell.bias = Tensor::uniform(&[4 * nh], 0.5, &mut rng);
    let x = rand_vec(&mut rng, ni);
    let h = rand_vec(&mut rng, nh);
    let c = rand_vec(&mut rng, nh);
    let wh = rand_vec(&mut rng, nh);
    let wc = rand_vec(&mut rng, nh);
    let loss = |cell: &LstmCell<f64>, x: &[f64], h: &[f64], c: &[f64]| {
        let (h2, c2, _) = cell.forward(x, h, c).unwrap();
        weighted(&wh, &h2) + weighted(&wc, &c2)
    };
    let (_, _, cache) = cell.forward(&x, &h, &c).unwrap();
    let mut grads = LstmCell::zeros(ni, nh);
    let (gx, gh, gc) = cell.backward(&cache, &wh, &wc, &mut grads);
    let mut r = Report::default();
    let mut v = x.clone();
    for i in 0..ni {
        let n = central(&mut v, i, |v| loss(&cell, v, &h, &c));
        r.add("lstm x", gx[i], n);
    }
    let mut v = h.clone();
    for i in 0..nh {
        let n = central(&mut v, i, |v| loss(&cell, &x, v, &c));
        r.add("lstm h", gh[i], n);
    }
    let mut v = c.clone();
    for i in 0..nh {
        let n = central(&mut v, i, |v| loss(&cell, &x, &h, v));
        r.add("lstm c", gc[i], n);
    }
    for which in 0..3 {
        let get = |l: &LstmCell<f64>| match which {
            0 => l.w_ih.data().to_vec(),
            1 => l.w_hh.data().to_vec(),
            _ => l.bias.data().to_vec(),
        };
        let mut p = get(&cell);
        let analytic = get(&grads);
        for i in 0..p.len() {
            let n = central(&mut p, i, |p| {
                let mut l = cell.clone();
                match which {
                    0 => l.w_ih.data_mut().copy_from_slice(p),
                    1 => l.w_hh.data_mut().copy_from_slice(p),
                    _ => l.bias.data_mut().copy_from_slice(p),
                }
                loss(&l, &x, &h, &c)
            });
            r.add("lstm param", analytic[i], n);
        }
    }
    r
}

/// Whole-network check: loss is a random linear functional of the Q-vector
/// and the outgoing hidden state.
pub fn check_network(seed: u64, shape: NetworkShape) -> Report {
    let mut rng = stream_rng(seed, Stream::Policy);
    let mut net = DrqnNetwork::<f64>::new(shape, &mut rng);
    for t in net.tensors_mut() {
        // Non-zero biases so every bias gradient path is exercised.
        if t.shape().len() == 1 {
            for b in t.data_mut() {
                *b += rng.gen_range(-0.1..0.1);
            }
        }
    }
    let map = Tensor::<f64>::uniform(&[4, 20, 20], 1.0, &mut rng);
    let scalars = rand_vec(&mut rng, shape.scalar_dim);
    let hidden = Hidden {
        h: rand_vec(&mut rng, shape.lstm_hidden),
        c: rand_vec(&mut rng, shape.lstm_hidden),
    };
    let wq = rand_vec(&mut rng, shape.actions);
    let wh = rand_vec(&mut rng, shape.lstm_hidden);
    let wc = rand_vec(&mut rng, shape.lstm_hidden);
    let loss = |net: &DrqnNetwork<f64>, map: &Tensor<f64>, s: &[f64], hid: &Hidden<f64>| {
        let (q, h2) = net.forward(map, s, hid).unwrap();
        weighted(&wq, &q) + weighted(&wh, &h2.h) + weighted(&wc, &h2.c)
    };
    let (_, _, cache) = net.forward_cached(&map, &scalars, &hidden).unwrap();
    let mut grads = net.zeros_like();
    let gin = net.backward(&cache, &wq, Some(&Hidden { h: wh.clone(), c: wc.clone() }), &mut grads);

    let mut r = Report::default();
    let mut m = map.data().to_vec();
    for i in probe(&mut rng, m.len(), 24) {
        let n = central(&mut m, i, |m| loss(&net, &Tensor::from_vec(map.shape(), m.to_vec()).unwrap(), &scalars, &hidden));
        r.add("net map", gin.map.data()[i], n);
    }
    let mut s = scalars.clone();
    for i in probe(&mut rng, s.len(), 12) {
        let n = central(&mut s, i, |s| loss(&net, &map, s, &hidden));
        r.add("net scalars", gin.scalars[i], n);
    }
    let mut hv = hidden.h.clone();
    for i in probe(&mut rng, hv.len(), 8) {
        let n = central(&mut hv, i, |hv| loss(&net, &map, &scalars, &Hidden { h: hv.to_vec(), c: hidden.c.clone() }));
        r.add("net h", gin.h[i], n);
    }
    let mut cv = hidden.c.clone();
    for i in probe(&mut rng, cv.len(), 8) {
        let n = central(&mut cv, i, |cv| loss(&net, &map, &scalars, &Hidden { h: hidden.h.clone(), c: cv.to_vec() }));
        r.add("net c", gin.c[i], n);
    }
    let count = net.tensors().len();
    let analytic: Vec<Vec<f64>> = grads.tensors().iter().map(|t| t.data().to_vec()).collect();
    for ti in 0..count {
        let mut p = net.tensors()[ti].data().to_vec();
        for i in probe(&mut rng, p.len(), 6) {
            let n = central(&mut p, i, |p| {
                let mut probe_net = net.clone();
                probe_net.tensors_mut()[ti].data_mut().copy_from_slice(p);
                loss(&probe_net, &map, &scalars, &hidden)
            });
            r.add(madenet_core::nn::TENSOR_NAMES[ti], analytic[ti][i], n);
        }
    }
    r
}

/// Runs every check for one seed and returns `(label, report)` pairs.
pub fn all_checks(seed: u64) -> Vec<(&'static str, Report)> {
    vec![
        ("leaky_relu", check_leaky_relu(seed)),
        ("dense", check_dense(seed)),
        ("conv2d", check_conv(seed)),
        ("lstm", check_lstm(seed)),
        ("centralized network", check_network(seed, NetworkShape::centralized(3))),
        ("decentralized network", check_network(seed, NetworkShape::decentralized(3))),
    ]
}
