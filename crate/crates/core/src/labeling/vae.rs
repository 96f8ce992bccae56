//! Per-class variational autoencoder used to synthesize extra
//! representatives.
//!
//! An LSTM encoder summarizes a series into its final hidden state, from
//! which two dense layers give the mean and log-variance of a latent vector
//! with one entry per timestep. The decoder LSTM reads the latent vector as
//! a sequence and a dense layer maps each hidden state to one output step.

use std::collections::BTreeMap;

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::{RepresentativeSet, TimeSeries};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::neuralnet::{
    clip_global_norm, Activation, Checkpoint, DenseLayer, Initializer, OptimizerState, Parameters, RecurrentCell,
    TensorRecord, TensorView, GRADIENT_CLIP_NORM,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct VaeConfig {
    pub hidden_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for VaeConfig {
    fn default() -> Self {
        VaeConfig { hidden_size: 32, epochs: 150, learning_rate: 0.003, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VaeNet<T> {
    pub encoder: RecurrentCell<T>,
    pub mu: DenseLayer<T>,
    pub logvar: DenseLayer<T>,
    pub decoder: RecurrentCell<T>,
    pub output: DenseLayer<T>,
}

/// `½ Σ (μ² + exp(lv) − 1 − lv)`, the divergence from a standard normal.
pub fn kl_standard_normal<T: Scalar>(mu: &[T], logvar: &[T]) -> T {
    let half = T::lit(0.5);
    mu.iter()
        .zip(logvar)
        .fold(T::zero(), |acc, (&m, &lv)| acc + half * (m * m + lv.exp() - T::one() - lv))
}

/// `z = μ + exp(lv / 2) ε`.
pub fn reparameterize<T: Scalar>(mu: &[T], logvar: &[T], eps: &[T]) -> Vec<T> {
    let half = T::lit(0.5);
    mu.iter().zip(logvar).zip(eps).map(|((&m, &lv), &e)| m + (half * lv).exp() * e).collect()
}

/// `count` draws from N(0, 1).
pub fn standard_normal<T: Scalar>(rng: &mut impl Rng, count: usize) -> Vec<T> {
    (0..count).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal))).collect()
}

impl<T: Scalar> VaeNet<T> {
    pub fn zeros(channels: usize, latent_length: usize, hidden: usize) -> Self {
        VaeNet {
            encoder: RecurrentCell::zeros(channels, hidden),
            mu: DenseLayer::zeros(hidden, latent_length, Activation::Identity),
            logvar: DenseLayer::zeros(hidden, latent_length, Activation::Identity),
            decoder: RecurrentCell::zeros(1, hidden),
            output: DenseLayer::zeros(hidden, channels, Activation::Identity),
        }
    }

    pub fn new(channels: usize, latent_length: usize, hidden: usize, seed: u64) -> Self {
        let mut init = Initializer::new(seed);
        VaeNet {
            encoder: RecurrentCell::new(channels, hidden, &mut init),
            mu: DenseLayer::new(hidden, latent_length, Activation::Identity, &mut init),
            logvar: DenseLayer::new(hidden, latent_length, Activation::Identity, &mut init),
            decoder: RecurrentCell::new(1, hidden, &mut init),
            output: DenseLayer::new(hidden, channels, Activation::Identity, &mut init),
        }
    }

    pub fn channels(&self) -> usize {
        self.encoder.input_size()
    }

    pub fn latent_length(&self) -> usize {
        self.mu.output_size()
    }

    pub fn hidden_size(&self) -> usize {
        self.encoder.hidden_size()
    }

    fn check(&self, series: &TimeSeries<T>) -> Result<()> {
        if series.channels() != self.channels() {
            return Err(Error::Shape(format!("series has {} channels, VAE expects {}", series.channels(), self.channels())));
        }
        if series.len() > self.latent_length() {
            return Err(Error::Shape(format!(
                "series of length {} exceeds the VAE length {}",
                series.len(),
                self.latent_length()
            )));
        }
        Ok(())
    }

    /// Mean and log-variance of the latent distribution for one series.
    pub fn encode_distribution(&self, series: &TimeSeries<T>) -> Result<(Vec<T>, Vec<T>)> {
        self.check(series)?;
        let (_, h) = self.encoder.forward_sequence(series.values(), &vec![true; series.len()])?;
        Ok((self.mu.forward(&h)?, self.logvar.forward(&h)?))
    }

    /// Decodes a latent vector into a series of the latent length.
    pub fn decode(&self, z: &[T]) -> Result<Matrix<T>> {
        if z.len() != self.latent_length() {
            return Err(Error::Shape(format!("latent of length {}, expected {}", z.len(), self.latent_length())));
        }
        let input = Matrix::from_vec(z.len(), 1, z.to_vec())?;
        let (hidden, _) = self.decoder.forward_sequence(&input, &vec![true; z.len()])?;
        let mut out = Matrix::zeros(z.len(), self.channels());
        for t in 0..z.len() {
            out.row_mut(t).copy_from_slice(&self.output.forward(hidden.row(t))?);
        }
        Ok(out)
    }

    /// Mean over instances of squared reconstruction error plus KL, with
    /// row `i` of `noise` as the ε of instance `i`.
    pub fn loss_with_noise(&self, data: &[&TimeSeries<T>], noise: &Matrix<T>) -> Result<T> {
        self.check_noise(data, noise)?;
        let mut total = T::zero();
        for (i, s) in data.iter().enumerate() {
            let (mu, lv) = self.encode_distribution(s)?;
            let z = reparameterize(&mu, &lv, noise.row(i));
            let y = self.decode(&z)?;
            let n = s.values().as_slice().len();
            let sse = y.as_slice()[..n]
                .iter()
                .zip(s.values().as_slice())
                .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
            total = total + sse + kl_standard_normal(&mu, &lv);
        }
        Ok(total / T::from_usize_lossy(data.len()))
    }

    fn check_noise(&self, data: &[&TimeSeries<T>], noise: &Matrix<T>) -> Result<()> {
        if data.is_empty() {
            return Err(Error::Contract("VAE loss over an empty batch".into()));
        }
        if noise.rows() != data.len() || noise.cols() != self.latent_length() {
            return Err(Error::Shape(format!(
                "noise is {}x{}, expected {}x{}",
                noise.rows(),
                noise.cols(),
                data.len(),
                self.latent_length()
            )));
        }
        for s in data {
            self.check(s)?;
        }
        Ok(())
    }

    /// [`VaeNet::loss_with_noise`] and its gradient, computed as one padded
    /// batch.
    pub fn loss_and_gradients(&self, data: &[&TimeSeries<T>], noise: &Matrix<T>) -> Result<(T, VaeNet<T>)> {
        self.check_noise(data, noise)?;
        let b = data.len();
        let d = self.channels();
        let l = self.latent_length();
        let h = self.hidden_size();
        let one = T::one();
        let half = T::lit(0.5);
        let inv_b = one / T::from_usize_lossy(b);
        let t_max = data.iter().map(|s| s.len()).max().unwrap_or(0);

        let mut inputs = Vec::with_capacity(t_max);
        let mut masks = Vec::with_capacity(t_max);
        for t in 0..t_max {
            let mut x = Matrix::zeros(b, d);
            let mut m = vec![false; b];
            for (i, s) in data.iter().enumerate() {
                if t < s.len() {
                    x.row_mut(i).copy_from_slice(s.step(t));
                    m[i] = true;
                }
            }
            inputs.push(x);
            masks.push(m);
        }
        let enc = self.encoder.run_batch(&inputs, &masks, None)?;
        let mu = self.mu.forward_batch(&enc.final_hidden)?;
        let lv = self.logvar.forward_batch(&enc.final_hidden)?;
        let mut z = Matrix::zeros(b, l);
        let mut loss = T::zero();
        for i in 0..b {
            let zi = reparameterize(mu.row(i), lv.row(i), noise.row(i));
            z.row_mut(i).copy_from_slice(&zi);
            loss = loss + kl_standard_normal(mu.row(i), lv.row(i));
        }
        let dec_inputs: Vec<Matrix<T>> =
            (0..l).map(|t| Matrix::from_vec(b, 1, (0..b).map(|i| z[(i, t)]).collect())).collect::<Result<_>>()?;
        let all = vec![vec![true; b]; l];
        let dec = self.decoder.run_batch(&dec_inputs, &all, None)?;

        let mut grads = VaeNet::zeros(d, l, h);
        let mut d_hidden = Vec::with_capacity(l);
        let two = T::lit(2.0);
        for t in 0..l {
            let y = self.output.forward_batch(&dec.hidden[t])?;
            let mut dy = Matrix::zeros(b, d);
            for (i, s) in data.iter().enumerate() {
                if t >= s.len() {
                    continue;
                }
                for c in 0..d {
                    let diff = y[(i, c)] - s.step(t)[c];
                    loss = loss + diff * diff;
                    dy[(i, c)] = two * diff * inv_b;
                }
            }
            d_hidden.push(self.output.backward_batch(&dec.hidden[t], &y, &dy, &mut grads.output)?);
        }
        let zeros_h = Matrix::zeros(b, h);
        let (d_dec_in, _, _) = self.decoder.backward_batch(&dec.trace, &d_hidden, &zeros_h, &zeros_h, &mut grads.decoder)?;

        let mut d_mu = Matrix::zeros(b, l);
        let mut d_lv = Matrix::zeros(b, l);
        for i in 0..b {
            for t in 0..l {
                let dz = d_dec_in[t][(i, 0)];
                let (m, v, e) = (mu[(i, t)], lv[(i, t)], noise[(i, t)]);
                d_mu[(i, t)] = dz + m * inv_b;
                d_lv[(i, t)] = dz * e * half * (half * v).exp() + half * (v.exp() - one) * inv_b;
            }
        }
        let mut d_code = self.mu.backward_batch(&enc.final_hidden, &mu, &d_mu, &mut grads.mu)?;
        let d_code_lv = self.logvar.backward_batch(&enc.final_hidden, &lv, &d_lv, &mut grads.logvar)?;
        for (a, &c) in d_code.as_mut_slice().iter_mut().zip(d_code_lv.as_slice()) {
            *a = *a + c;
        }
        let no_outputs = vec![zeros_h.clone(); t_max];
        self.encoder.backward_batch(&enc.trace, &no_outputs, &d_code, &zeros_h, &mut grads.encoder)?;
        Ok((loss * inv_b, grads))
    }
}

impl<T: Scalar> Parameters<T> for VaeNet<T> {
    fn tensors(&self) -> Vec<TensorView<'_, T>> {
        let parts = [
            ("encoder", self.encoder.tensors()),
            ("mu", self.mu.tensors()),
            ("logvar", self.logvar.tensors()),
            ("decoder", self.decoder.tensors()),
            ("output", self.output.tensors()),
        ];
        parts
            .into_iter()
            .flat_map(|(prefix, views)| {
                views.into_iter().map(move |mut t| {
                    t.name = format!("{prefix}.{}", t.name);
                    t
                })
            })
            .collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        let mut out = self.encoder.tensors_mut();
        out.extend(self.mu.tensors_mut());
        out.extend(self.logvar.tensors_mut());
        out.extend(self.decoder.tensors_mut());
        out.extend(self.output.tensors_mut());
        out
    }
}

/// A trained class VAE and the expert instances it conditions on.
#[derive(Debug, Clone, PartialEq)]
pub struct VaeModel<T> {
    pub net: VaeNet<T>,
    pub class_id: usize,
    pub seed: u64,
    pub conditioning: Vec<TimeSeries<T>>,
    pub loss_history: Vec<T>,
}

impl<T: Scalar> VaeModel<T> {
    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut hp = BTreeMap::new();
        hp.insert("channels".into(), self.net.channels() as f64);
        hp.insert("latent_length".into(), self.net.latent_length() as f64);
        hp.insert("hidden_size".into(), self.net.hidden_size() as f64);
        hp.insert("class_id".into(), self.class_id as f64);
        hp.insert("conditioning".into(), self.conditioning.len() as f64);
        let mut ck = Checkpoint::capture("vae", self.seed, hp, &self.net);
        for (i, s) in self.conditioning.iter().enumerate() {
            ck.tensors.push(TensorRecord {
                name: format!("conditioning.{i}"),
                shape: vec![s.len(), s.channels()],
                data: s.values().as_slice().iter().map(|v| v.as_f64()).collect(),
            });
        }
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        if ck.kind != "vae" {
            return Err(Error::Format(format!("checkpoint holds a '{}' model, not vae", ck.kind)));
        }
        let count = ck.hyperparameter("conditioning")? as usize;
        if count > ck.tensors.len() {
            return Err(Error::Format("checkpoint lacks conditioning series".into()));
        }
        let mut net = VaeNet::zeros(
            ck.hyperparameter("channels")? as usize,
            ck.hyperparameter("latent_length")? as usize,
            ck.hyperparameter("hidden_size")? as usize,
        );
        let split = ck.tensors.len() - count;
        let params = Checkpoint { tensors: ck.tensors[..split].to_vec(), ..ck.clone() };
        params.restore(&mut net)?;
        let conditioning = ck.tensors[split..]
            .iter()
            .map(|rec| {
                if rec.shape.len() != 2 {
                    return Err(Error::Format(format!("conditioning tensor '{}' is not 2-D", rec.name)));
                }
                let values = rec.data.iter().map(|&v| T::lit(v)).collect();
                TimeSeries::new(Matrix::from_vec(rec.shape[0], rec.shape[1], values)?)
            })
            .collect::<Result<_>>()?;
        Ok(VaeModel {
            net,
            class_id: ck.hyperparameter("class_id")? as usize,
            seed: ck.seed,
            conditioning,
            loss_history: Vec::new(),
        })
    }
}

/// Trains the VAE of `class_id` on that class's expert instances.
pub fn train_vae<T: Scalar>(reps: &RepresentativeSet<T>, class_id: usize, seed: u64) -> Result<VaeModel<T>> {
    train_vae_with(reps, class_id, &VaeConfig { seed, ..VaeConfig::default() })
}

pub fn train_vae_with<T: Scalar>(reps: &RepresentativeSet<T>, class_id: usize, config: &VaeConfig) -> Result<VaeModel<T>> {
    let data: Vec<TimeSeries<T>> = reps.expert_instances(class_id).into_iter().cloned().collect();
    if data.is_empty() {
        return Err(Error::Contract(format!("class {class_id} has no expert instance to train a VAE on")));
    }
    train_vae_on(data, class_id, config)
}

/// Full-batch RMSProp on the negative ELBO with fresh noise every epoch.
pub fn train_vae_on<T: Scalar>(data: Vec<TimeSeries<T>>, class_id: usize, config: &VaeConfig) -> Result<VaeModel<T>> {
    if config.epochs == 0 || config.hidden_size == 0 {
        return Err(Error::Config("VAE needs at least one epoch and one hidden unit".into()));
    }
    let channels = data[0].channels();
    let latent = data.iter().map(TimeSeries::len).max().unwrap_or(0);
    let mut net = VaeNet::new(channels, latent, config.hidden_size, config.seed);
    let mut opt = OptimizerState::new(T::lit(config.learning_rate));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let batch: Vec<&TimeSeries<T>> = data.iter().collect();
    let clip = T::lit(GRADIENT_CLIP_NORM);
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let noise = Matrix::from_vec(batch.len(), latent, standard_normal(&mut rng, batch.len() * latent))?;
        let (loss, mut grads) = net.loss_and_gradients(&batch, &noise)?;
        if !loss.is_finite() {
            return Err(Error::Training { epoch, message: format!("VAE loss for class {class_id} became {loss}") });
        }
        history.push(loss);
        clip_global_norm(&mut grads, clip);
        opt.step(&mut net, &grads, epoch)?;
        if epoch % 25 == 0 || epoch == 1 {
            debug!("vae class {class_id} epoch {epoch}: loss {loss:e}");
        }
    }
    Ok(VaeModel { net, class_id, seed: config.seed, conditioning: data, loss_history: history })
}

/// One sample conditioned on conditioning instance `instance` with the
/// given ε. Returns the latent vector and the decoded series.
pub fn sample_with_noise<T: Scalar>(model: &VaeModel<T>, instance: usize, eps: &[T]) -> Result<(Vec<T>, TimeSeries<T>)> {
    let source = model
        .conditioning
        .get(instance)
        .ok_or_else(|| Error::Contract(format!("no conditioning instance {instance}")))?;
    if eps.len() != model.net.latent_length() {
        return Err(Error::Shape(format!("ε of length {}, expected {}", eps.len(), model.net.latent_length())));
    }
    let (mu, lv) = model.net.encode_distribution(source)?;
    let z = reparameterize(&mu, &lv, eps);
    let series = TimeSeries::new(model.net.decode(&z)?)?;
    Ok((z, series))
}

/// `count` synthetic series, each conditioned on a randomly chosen
/// conditioning instance.
pub fn sample_vae<T: Scalar>(model: &VaeModel<T>, count: usize, seed: u64) -> Result<Vec<TimeSeries<T>>> {
    if model.conditioning.is_empty() {
        return Err(Error::Contract("VAE has no conditioning instances".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = model.net.latent_length();
    (0..count)
        .map(|_| {
            let idx = rng.random_range(0..model.conditioning.len());
            let eps = standard_normal(&mut rng, l);
            sample_with_noise(model, idx, &eps).map(|(_, s)| s)
        })
        .collect()
}
