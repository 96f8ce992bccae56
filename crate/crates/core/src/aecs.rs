//! Seq2Seq under-complete LSTM autoencoder producing the Auto-Encoded
//! Compact Sequence (AECS) of each instance: a fixed-length vector of
//! `compact_length` values, much shorter than the series itself.
//!
//! Architecture: two stacked encoder cells with hidden sizes
//! `(2 * max(16, p), p)`; the top encoder's final hidden state is the AECS.
//! The decoder starts from that state, reads zero inputs, and runs two
//! stacked cells `(p, 2 * max(16, p))` followed by an identity dense layer
//! that emits one reconstructed timestep per step.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use log::debug;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::dataset::{TimeSeries, TimeSeriesDataset};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::neuralnet::{
    clip_global_norm, Activation, Checkpoint, DenseLayer, Initializer, OptimizerState, Parameters, RecurrentCell,
    TensorView, GRADIENT_CLIP_NORM,
};
use crate::scalar::Scalar;

pub const DEFAULT_COMPACT_LENGTH: usize = 12;
pub const DEFAULT_EPOCHS: usize = 150;

#[derive(Debug, Clone, PartialEq)]
pub struct AecsConfig {
    pub compact_length: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Stop once the best loss has improved by less than
    /// `min_improvement` for this many consecutive epochs.
    pub patience: usize,
    pub min_improvement: f64,
    pub seed: u64,
}

impl Default for AecsConfig {
    fn default() -> Self {
        AecsConfig {
            compact_length: DEFAULT_COMPACT_LENGTH,
            epochs: DEFAULT_EPOCHS,
            learning_rate: 0.003,
            patience: 20,
            min_improvement: 1e-6,
            seed: 0,
        }
    }
}

/// Width of the outer encoder / inner decoder layer.
pub fn outer_hidden_size(compact_length: usize) -> usize {
    2 * compact_length.max(16)
}

/// The autoencoder's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AecsNet<T> {
    pub encoder: [RecurrentCell<T>; 2],
    pub decoder: [RecurrentCell<T>; 2],
    pub output: DenseLayer<T>,
}

impl<T: Scalar> AecsNet<T> {
    pub fn zeros(channels: usize, compact_length: usize) -> Self {
        let wide = outer_hidden_size(compact_length);
        AecsNet {
            encoder: [RecurrentCell::zeros(channels, wide), RecurrentCell::zeros(wide, compact_length)],
            decoder: [RecurrentCell::zeros(channels, compact_length), RecurrentCell::zeros(compact_length, wide)],
            output: DenseLayer::zeros(wide, channels, Activation::Identity),
        }
    }

    pub fn new(channels: usize, compact_length: usize, seed: u64) -> Self {
        let wide = outer_hidden_size(compact_length);
        let mut init = Initializer::new(seed);
        AecsNet {
            encoder: [
                RecurrentCell::new(channels, wide, &mut init),
                RecurrentCell::new(wide, compact_length, &mut init),
            ],
            decoder: [
                RecurrentCell::new(channels, compact_length, &mut init),
                RecurrentCell::new(compact_length, wide, &mut init),
            ],
            output: DenseLayer::new(wide, channels, Activation::Identity, &mut init),
        }
    }

    pub fn channels(&self) -> usize {
        self.encoder[0].input_size()
    }

    pub fn compact_length(&self) -> usize {
        self.encoder[1].hidden_size()
    }

    fn check_channels(&self, series: &TimeSeries<T>) -> Result<()> {
        if series.channels() != self.channels() {
            return Err(Error::Shape(format!(
                "series has {} channels, model was trained on {}",
                series.channels(),
                self.channels()
            )));
        }
        Ok(())
    }

    /// AECS of one instance: the top encoder's final hidden state.
    pub fn encode_one(&self, series: &TimeSeries<T>) -> Result<Vec<T>> {
        self.check_channels(series)?;
        let mask = vec![true; series.len()];
        let (h1, _) = self.encoder[0].forward_sequence(series.values(), &mask)?;
        let (_, code) = self.encoder[1].forward_sequence(&h1, &mask)?;
        Ok(code)
    }

    /// Reconstruction of one instance (same shape as the input).
    pub fn reconstruct(&self, series: &TimeSeries<T>) -> Result<Matrix<T>> {
        self.check_channels(series)?;
        let t = series.len();
        let mask = vec![true; t];
        let e0 = self.encoder[0].run(series.values(), &mask, None)?;
        let e1 = self.encoder[1].run(&e0.hidden, &mask, None)?;
        let zero_cell = vec![T::zero(); self.compact_length()];
        let silence = Matrix::zeros(t, self.channels());
        let d0 = self.decoder[0].run(&silence, &mask, Some((&e1.final_hidden, &zero_cell)))?;
        let d1 = self.decoder[1].run(&d0.hidden, &mask, None)?;
        let mut outputs = Matrix::zeros(t, self.channels());
        for s in 0..t {
            let y = self.output.forward(d1.hidden.row(s))?;
            outputs.row_mut(s).copy_from_slice(&y);
        }
        Ok(outputs)
    }

    /// Mean squared reconstruction error over every valid value of `data`.
    pub fn loss(&self, data: &[&TimeSeries<T>]) -> Result<T> {
        let mut sum = T::zero();
        let mut count = 0usize;
        for s in data {
            let y = self.reconstruct(s)?;
            sum = sum
                + y.as_slice()
                    .iter()
                    .zip(s.values().as_slice())
                    .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
            count += s.values().as_slice().len();
        }
        if count == 0 {
            return Err(Error::Contract("autoencoder loss over an empty batch".into()));
        }
        Ok(sum / T::from_usize_lossy(count))
    }

    /// Loss and its gradient with respect to every parameter.
    pub fn loss_and_gradients(&self, data: &[&TimeSeries<T>]) -> Result<(T, AecsNet<T>)> {
        self.scaled_loss_and_gradients(data, T::one())
    }

    /// Gradient of `scale * loss`. The instances run as one padded batch
    /// with per-step masks.
    pub(crate) fn scaled_loss_and_gradients(&self, data: &[&TimeSeries<T>], scale: T) -> Result<(T, AecsNet<T>)> {
        let total: usize = data.iter().map(|s| s.values().as_slice().len()).sum();
        if total == 0 {
            return Err(Error::Contract("autoencoder loss over an empty batch".into()));
        }
        for s in data {
            self.check_channels(s)?;
        }
        let norm = T::from_usize_lossy(total);
        let b = data.len();
        let d = self.channels();
        let p = self.compact_length();
        let wide = outer_hidden_size(p);
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

        let e0 = self.encoder[0].run_batch(&inputs, &masks, None)?;
        let e1 = self.encoder[1].run_batch(&e0.hidden, &masks, None)?;
        let silence = vec![Matrix::zeros(b, d); t_max];
        let d0 = self.decoder[0].run_batch(&silence, &masks, Some((&e1.final_hidden, &Matrix::zeros(b, p))))?;
        let d1 = self.decoder[1].run_batch(&d0.hidden, &masks, None)?;

        let mut grads = AecsNet::zeros(d, p);
        let mut sum = T::zero();
        let two = T::lit(2.0);
        let mut d_top = Vec::with_capacity(t_max);
        for t in 0..t_max {
            let y = self.output.forward_batch(&d1.hidden[t])?;
            let mut dy = Matrix::zeros(b, d);
            for i in 0..b {
                if !masks[t][i] {
                    continue;
                }
                let (yr, xr, dr) = (y.row(i), inputs[t].row(i), dy.row_mut(i));
                for c in 0..d {
                    let diff = yr[c] - xr[c];
                    sum = sum + diff * diff;
                    dr[c] = scale * two * diff / norm;
                }
            }
            d_top.push(self.output.backward_batch(&d1.hidden[t], &y, &dy, &mut grads.output)?);
        }
        let zeros_wide = Matrix::zeros(b, wide);
        let zeros_p = Matrix::zeros(b, p);
        let (d_dec0_out, _, _) =
            self.decoder[1].backward_batch(&d1.trace, &d_top, &zeros_wide, &zeros_wide, &mut grads.decoder[1])?;
        let (_, d_code, _) =
            self.decoder[0].backward_batch(&d0.trace, &d_dec0_out, &zeros_p, &zeros_p, &mut grads.decoder[0])?;
        let no_outputs = vec![zeros_p.clone(); t_max];
        let (d_enc0_out, _, _) =
            self.encoder[1].backward_batch(&e1.trace, &no_outputs, &d_code, &zeros_p, &mut grads.encoder[1])?;
        self.encoder[0].backward_batch(&e0.trace, &d_enc0_out, &zeros_wide, &zeros_wide, &mut grads.encoder[0])?;
        Ok((sum / norm, grads))
    }
}

impl<T: Scalar> Parameters<T> for AecsNet<T> {
    fn tensors(&self) -> Vec<TensorView<'_, T>> {
        let mut out = Vec::new();
        for (prefix, cell) in [
            ("encoder.0", &self.encoder[0]),
            ("encoder.1", &self.encoder[1]),
            ("decoder.0", &self.decoder[0]),
            ("decoder.1", &self.decoder[1]),
        ] {
            out.extend(cell.tensors().into_iter().map(|mut t| {
                t.name = format!("{prefix}.{}", t.name);
                t
            }));
        }
        out.extend(self.output.tensors().into_iter().map(|mut t| {
            t.name = format!("output.{}", t.name);
            t
        }));
        out
    }

    fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        let [e0, e1] = &mut self.encoder;
        let [d0, d1] = &mut self.decoder;
        let mut out = Vec::new();
        out.extend(e0.tensors_mut());
        out.extend(e1.tensors_mut());
        out.extend(d0.tensors_mut());
        out.extend(d1.tensors_mut());
        out.extend(self.output.tensors_mut());
        out
    }
}

/// A trained autoencoder together with its training record.
#[derive(Debug, Clone, PartialEq)]
pub struct AecsModel<T> {
    pub net: AecsNet<T>,
    pub seed: u64,
    /// Loss before each optimizer step, one entry per epoch run.
    pub loss_history: Vec<T>,
}

impl<T: Scalar> AecsModel<T> {
    pub fn compact_length(&self) -> usize {
        self.net.compact_length()
    }

    pub fn channels(&self) -> usize {
        self.net.channels()
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut hp = BTreeMap::new();
        hp.insert("channels".into(), self.channels() as f64);
        hp.insert("compact_length".into(), self.compact_length() as f64);
        hp.insert("epochs_run".into(), self.loss_history.len() as f64);
        Checkpoint::capture("aecs", self.seed, hp, &self.net)
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        if ck.kind != "aecs" {
            return Err(Error::Format(format!("checkpoint holds a '{}' model, not aecs", ck.kind)));
        }
        let channels = ck.hyperparameter("channels")? as usize;
        let p = ck.hyperparameter("compact_length")? as usize;
        let mut net = AecsNet::zeros(channels, p);
        ck.restore(&mut net)?;
        Ok(AecsModel { net, seed: ck.seed, loss_history: Vec::new() })
    }
}

/// Trains the autoencoder with the default schedule.
pub fn train_aecs<T: Scalar>(ds: &TimeSeriesDataset<T>, p: usize, epochs: usize, seed: u64) -> Result<AecsModel<T>> {
    let config = AecsConfig { compact_length: p, epochs, seed, ..AecsConfig::default() };
    train_aecs_with(ds.instances(), &config)
}

/// Checks the under-completeness precondition without training anything.
pub fn check_compact_length(min_length: usize, p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::Config("compact length must be positive".into()));
    }
    if p >= min_length {
        return Err(Error::Config(format!(
            "compact length {p} must be smaller than the shortest series ({min_length} steps)"
        )));
    }
    Ok(())
}

/// Full-batch RMSProp training on `data`, minimizing the mean squared
/// reconstruction error.
pub fn train_aecs_with<T: Scalar>(data: &[TimeSeries<T>], config: &AecsConfig) -> Result<AecsModel<T>> {
    let first = data.first().ok_or_else(|| Error::Config("no instances to train the autoencoder on".into()))?;
    let min_len = data.iter().map(TimeSeries::len).min().unwrap_or(0);
    check_compact_length(min_len, config.compact_length)?;
    if config.epochs == 0 {
        return Err(Error::Config("autoencoder needs at least one epoch".into()));
    }
    let channels = first.channels();
    if let Some(i) = data.iter().position(|s| s.channels() != channels) {
        return Err(Error::Shape(format!("instance {i} has {} channels, expected {channels}", data[i].channels())));
    }

    let batch: Vec<&TimeSeries<T>> = data.iter().collect();
    let mut net = AecsNet::new(channels, config.compact_length, config.seed);
    let mut opt = OptimizerState::new(T::lit(config.learning_rate));
    let clip = T::lit(GRADIENT_CLIP_NORM);
    let min_gain = T::lit(config.min_improvement);
    let mut history = Vec::with_capacity(config.epochs);
    let mut best = T::infinity();
    let mut stale = 0usize;

    for epoch in 1..=config.epochs {
        let (loss, mut grads) = batch_gradients(&net, &batch)?;
        if !loss.is_finite() {
            return Err(Error::Training { epoch, message: format!("autoencoder loss became {loss}") });
        }
        history.push(loss);
        clip_global_norm(&mut grads, clip);
        opt.step(&mut net, &grads, epoch)?;
        if epoch % 10 == 0 || epoch == 1 {
            debug!("aecs epoch {epoch}: loss {loss:e}");
        }

        if best - loss >= min_gain {
            best = loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                debug!("aecs early stop at epoch {epoch}");
                break;
            }
        }
    }
    Ok(AecsModel { net, seed: config.seed, loss_history: history })
}

/// Instances are split into fixed-size chunks whose gradients are computed
/// in parallel and summed in chunk order, so the result does not depend on
/// the number of worker threads.
const GRADIENT_CHUNK: usize = 32;

fn batch_gradients<T: Scalar>(net: &AecsNet<T>, batch: &[&TimeSeries<T>]) -> Result<(T, AecsNet<T>)> {
    let total: usize = batch.iter().map(|s| s.values().as_slice().len()).sum();
    let partials: Vec<(T, AecsNet<T>, usize)> = batch
        .par_chunks(GRADIENT_CHUNK)
        .map(|chunk| {
            let count: usize = chunk.iter().map(|s| s.values().as_slice().len()).sum();
            net.loss_and_gradients(chunk).map(|(l, g)| (l, g, count))
        })
        .collect::<Result<_>>()?;
    let norm = T::from_usize_lossy(total);
    let mut grads = AecsNet::zeros(net.channels(), net.compact_length());
    let mut loss = T::zero();
    for (l, g, count) in partials {
        let weight = T::from_usize_lossy(count) / norm;
        loss = loss + l * weight;
        for (dst, src) in grads.tensors_mut().into_iter().zip(g.tensors()) {
            for (d, &s) in dst.iter_mut().zip(src.data) {
                *d = *d + s * weight;
            }
        }
    }
    Ok((loss, grads))
}

/// The AECS of every instance of a dataset, one row each.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactMatrix<T> {
    pub embeddings: Matrix<T>,
    /// SHA-256 of the encoded instances' values and shapes.
    pub source_hash: String,
}

impl<T: Scalar> CompactMatrix<T> {
    pub fn rows(&self) -> usize {
        self.embeddings.rows()
    }

    pub fn compact_length(&self) -> usize {
        self.embeddings.cols()
    }

    /// CSV with one row per instance and 9 significant digits per value.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        for row in self.embeddings.iter_rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.8e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rows: Vec<Vec<T>> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map(T::lit)
                        .map_err(|_| Error::Parse { row: i + 1, message: format!("invalid value '{tok}'") })
                })
                .collect::<Result<Vec<T>>>()?;
            rows.push(row);
        }
        let embeddings = Matrix::from_rows(&rows)?;
        let source_hash = hash_values(embeddings.as_slice(), &[embeddings.rows(), embeddings.cols()]);
        Ok(CompactMatrix { embeddings, source_hash })
    }
}

fn hash_values<T: Scalar>(values: &[T], shape: &[usize]) -> String {
    let mut h = Sha256::new();
    for s in shape {
        h.update((*s as u64).to_le_bytes());
    }
    for v in values {
        h.update(v.as_f64().to_bits().to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Digest identifying a set of instances.
pub fn dataset_digest<T: Scalar>(instances: &[TimeSeries<T>]) -> String {
    let mut h = Sha256::new();
    h.update((instances.len() as u64).to_le_bytes());
    for s in instances {
        h.update((s.len() as u64).to_le_bytes());
        h.update((s.channels() as u64).to_le_bytes());
        for v in s.values().as_slice() {
            h.update(v.as_f64().to_bits().to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Encodes every instance of `ds`.
pub fn encode<T: Scalar>(model: &AecsModel<T>, ds: &TimeSeriesDataset<T>) -> Result<CompactMatrix<T>> {
    encode_instances(model, ds.instances())
}

pub fn encode_instances<T: Scalar>(model: &AecsModel<T>, instances: &[TimeSeries<T>]) -> Result<CompactMatrix<T>> {
    let rows: Vec<Vec<T>> = instances.par_iter().map(|s| model.net.encode_one(s)).collect::<Result<_>>()?;
    let embeddings = if rows.is_empty() {
        Matrix::zeros(0, model.compact_length())
    } else {
        Matrix::from_rows(&rows)?
    };
    if !embeddings.is_finite() {
        return Err(Error::Numeric("autoencoder produced non-finite embeddings".into()));
    }
    Ok(CompactMatrix { embeddings, source_hash: dataset_digest(instances) })
}
