//! Feed-forward softmax network trained with Adam.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Scaler};
use super::ensemble::softmax_in_place;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
    Logistic,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Logistic => 1.0 / (1.0 + (-z).exp()),
        }
    }

    /// Derivative expressed through the activation output `a`.
    fn derivative(self, a: f64) -> f64 {
        match self {
            Activation::Relu => f64::from(u8::from(a > 0.0)),
            Activation::Tanh => 1.0 - a * a,
            Activation::Logistic => a * (1.0 - a),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    #[default]
    Constant,
    /// `lr / (epoch + 1)^0.5`.
    Invscaling,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub alpha: f64,
    pub learning_rate: f64,
    pub schedule: Schedule,
    pub epochs: usize,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub standardize: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<Layer>,
    pub activation: Activation,
    pub scaler: Scaler,
    /// Mean training loss per epoch.
    pub loss_curve: Vec<f64>,
}

impl Network {
    pub fn new(sizes: &[usize], activation: Activation, rng: &mut impl Rng) -> Network {
        let layers = sizes
            .windows(2)
            .map(|p| {
                let bound = (6.0 / (p[0] + p[1]) as f64).sqrt();
                Layer {
                    inputs: p[0],
                    outputs: p[1],
                    w: (0..p[0] * p[1]).map(|_| rng.random_range(-bound..bound)).collect(),
                    b: (0..p[1]).map(|_| rng.random_range(-bound..bound)).collect(),
                }
            })
            .collect();
        Network { layers, activation, scaler: Scaler::identity(sizes[0]), loss_curve: Vec::new() }
    }

    /// Activations of every layer; the last is the softmax output.
    fn forward(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![x.to_vec()];
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let a = acts.last().unwrap();
            let mut z: Vec<f64> = (0..layer.outputs)
                .map(|o| layer.b[o] + layer.w[o * layer.inputs..(o + 1) * layer.inputs].iter().zip(a).map(|(w, v)| w * v).sum::<f64>())
                .collect();
            if l == last {
                softmax_in_place(&mut z);
            } else {
                z.iter_mut().for_each(|v| *v = self.activation.apply(*v));
            }
            acts.push(z);
        }
        acts
    }

    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        self.forward(&self.scaler.apply(x)).pop().unwrap()
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        super::tree::argmax(&self.proba(x))
    }

    /// Batch loss `mean(-ln p_y) + alpha/(2 m) sum w^2` and its gradient in
    /// layer order (weights then biases), on already-scaled inputs.
    pub fn loss_and_gradient(&self, xs: &[&[f64]], ys: &[usize], alpha: f64) -> (f64, Vec<(Vec<f64>, Vec<f64>)>) {
        let m = xs.len() as f64;
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> =
            self.layers.iter().map(|l| (vec![0.0; l.w.len()], vec![0.0; l.b.len()])).collect();
        let mut loss = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            let acts = self.forward(x);
            let out = acts.last().unwrap();
            loss -= out[y].max(f64::MIN_POSITIVE).ln();
            let mut delta: Vec<f64> = out.clone();
            delta[y] -= 1.0;
            for l in (0..self.layers.len()).rev() {
                let layer = &self.layers[l];
                let input = &acts[l];
                let (gw, gb) = &mut grads[l];
                for o in 0..layer.outputs {
                    gb[o] += delta[o] / m;
                    for i in 0..layer.inputs {
                        gw[o * layer.inputs + i] += delta[o] * input[i] / m;
                    }
                }
                if l > 0 {
                    delta = (0..layer.inputs)
                        .map(|i| {
                            let back: f64 = (0..layer.outputs).map(|o| layer.w[o * layer.inputs + i] * delta[o]).sum();
                            back * self.activation.derivative(input[i])
                        })
                        .collect();
                }
            }
        }
        let mut penalty = 0.0;
        for (layer, (gw, _)) in self.layers.iter().zip(grads.iter_mut()) {
            for (g, w) in gw.iter_mut().zip(&layer.w) {
                *g += alpha * w / m;
                penalty += w * w;
            }
        }
        (loss / m + alpha * penalty / (2.0 * m), grads)
    }
}

pub fn fit_mlp(ds: &Dataset, cfg: &MlpConfig, seed: u64) -> Result<Network> {
    if cfg.hidden.is_empty() || cfg.hidden.contains(&0) {
        return Err(Error::invalid("an MLP needs at least one non-empty hidden layer"));
    }
    if !(cfg.learning_rate > 0.0) || cfg.batch_size == 0 || cfg.alpha < 0.0 {
        return Err(Error::invalid("MLP learning rate and batch size must be positive, alpha non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes: Vec<usize> = std::iter::once(ds.d).chain(cfg.hidden.iter().copied()).chain([ds.n_classes]).collect();
    let mut net = Network::new(&sizes, cfg.activation, &mut rng);
    net.scaler = if cfg.standardize { Scaler::fit(ds) } else { Scaler::identity(ds.d) };
    let xs: Vec<Vec<f64>> = ds.rows().map(|r| net.scaler.apply(r)).collect();
    let mut m1: Vec<(Vec<f64>, Vec<f64>)> = net.layers.iter().map(|l| (vec![0.0; l.w.len()], vec![0.0; l.b.len()])).collect();
    let mut m2 = m1.clone();
    let mut order: Vec<usize> = (0..ds.n).collect();
    let batch = cfg.batch_size.min(ds.n);
    let mut step = 0i32;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let lr = match cfg.schedule {
            Schedule::Constant => cfg.learning_rate,
            Schedule::Invscaling => cfg.learning_rate / ((epoch + 1) as f64).sqrt(),
        };
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let bx: Vec<&[f64]> = chunk.iter().map(|&i| xs[i].as_slice()).collect();
            let by: Vec<usize> = chunk.iter().map(|&i| ds.y[i]).collect();
            let (loss, grads) = net.loss_and_gradient(&bx, &by, cfg.alpha);
            if !loss.is_finite() {
                return Err(Error::TrainingAbort(format!("MLP loss became {loss} in epoch {epoch}")));
            }
            epoch_loss += loss * chunk.len() as f64;
            step += 1;
            let c1 = 1.0 - cfg.beta1.powi(step);
            let c2 = 1.0 - cfg.beta2.powi(step);
            for ((layer, (gw, gb)), ((mw, mb), (vw, vb))) in
                net.layers.iter_mut().zip(&grads).zip(m1.iter_mut().zip(m2.iter_mut()))
            {
                let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
                    for k in 0..p.len() {
                        m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
                        v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
                        p[k] -= lr * (m[k] / c1) / ((v[k] / c2).sqrt() + cfg.epsilon);
                    }
                };
                update(&mut layer.w, gw, mw, vw);
                update(&mut layer.b, gb, mb, vb);
            }
        }
        net.loss_curve.push(epoch_loss / ds.n as f64);
    }
    Ok(net)
}
