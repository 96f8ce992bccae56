use super::{Initializer, Parameters, TensorView};
use crate::error::{Error, Result};
use crate::matrix::{gemm, Matrix};
use crate::scalar::{sigmoid, Scalar};

/// A standard LSTM cell. Gate rows are stacked in the order input, forget,
/// candidate, output.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentCell<T> {
    input_size: usize,
    hidden_size: usize,
    /// (4h) x input_size
    pub w_input: Matrix<T>,
    /// (4h) x h
    pub w_hidden: Matrix<T>,
    /// 4h
    pub bias: Vec<T>,
}

/// Activations of one timestep kept for the backward pass.
#[derive(Debug, Clone)]
struct StepCache<T> {
    active: bool,
    x: Vec<T>,
    h_prev: Vec<T>,
    c_prev: Vec<T>,
    /// Activated gates i, f, g, o.
    gates: Vec<T>,
    tanh_c: Vec<T>,
}

/// Everything the backward pass needs from one forward run.
#[derive(Debug, Clone)]
pub struct LstmTrace<T> {
    steps: Vec<StepCache<T>>,
}

/// Output of [`RecurrentCell::run`].
#[derive(Debug, Clone)]
pub struct LstmRun<T> {
    /// Hidden state after every step (t x h). Masked steps repeat the
    /// carried state.
    pub hidden: Matrix<T>,
    pub final_hidden: Vec<T>,
    pub final_cell: Vec<T>,
    pub trace: LstmTrace<T>,
}

impl<T: Scalar> RecurrentCell<T> {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        RecurrentCell {
            input_size,
            hidden_size,
            w_input: Matrix::zeros(4 * hidden_size, input_size),
            w_hidden: Matrix::zeros(4 * hidden_size, hidden_size),
            bias: vec![T::zero(); 4 * hidden_size],
        }
    }

    /// Uniform initialization in `±1/sqrt(hidden_size)`.
    pub fn new(input_size: usize, hidden_size: usize, init: &mut Initializer) -> Self {
        let mut cell = Self::zeros(input_size, hidden_size);
        let bound = 1.0 / (hidden_size as f64).sqrt();
        init.fill(cell.w_input.as_mut_slice(), bound);
        init.fill(cell.w_hidden.as_mut_slice(), bound);
        init.fill(&mut cell.bias, bound);
        cell
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    /// Runs the cell over `sequence` from a zero state, returning all hidden
    /// states and the final hidden state.
    pub fn forward_sequence(&self, sequence: &Matrix<T>, mask: &[bool]) -> Result<(Matrix<T>, Vec<T>)> {
        let run = self.run(sequence, mask, None)?;
        Ok((run.hidden, run.final_hidden))
    }

    /// Runs the cell from an optional initial `(hidden, cell)` state.
    /// Steps whose mask is false leave the state untouched.
    pub fn run(&self, sequence: &Matrix<T>, mask: &[bool], initial: Option<(&[T], &[T])>) -> Result<LstmRun<T>> {
        let h = self.hidden_size;
        if sequence.cols() != self.input_size {
            return Err(Error::Shape(format!(
                "sequence has {} channels, cell expects {}",
                sequence.cols(),
                self.input_size
            )));
        }
        if mask.len() != sequence.rows() {
            return Err(Error::Shape(format!("mask length {} for {} steps", mask.len(), sequence.rows())));
        }
        let (mut h_state, mut c_state) = match initial {
            Some((h0, c0)) => {
                if h0.len() != h || c0.len() != h {
                    return Err(Error::Shape(format!("initial state must have length {h}")));
                }
                (h0.to_vec(), c0.to_vec())
            }
            None => (vec![T::zero(); h], vec![T::zero(); h]),
        };

        let t_len = sequence.rows();
        let mut hidden = Matrix::zeros(t_len, h);
        let mut steps = Vec::with_capacity(t_len);
        let mut pre = vec![T::zero(); 4 * h];
        for t in 0..t_len {
            let x = sequence.row(t);
            if !mask[t] {
                hidden.row_mut(t).copy_from_slice(&h_state);
                steps.push(StepCache {
                    active: false,
                    x: Vec::new(),
                    h_prev: Vec::new(),
                    c_prev: Vec::new(),
                    gates: Vec::new(),
                    tanh_c: Vec::new(),
                });
                continue;
            }
            for (r, p) in pre.iter_mut().enumerate() {
                *p = self.bias[r] + dot(self.w_input.row(r), x) + dot(self.w_hidden.row(r), &h_state);
            }
            let mut gates = vec![T::zero(); 4 * h];
            for j in 0..h {
                gates[j] = sigmoid(pre[j]);
                gates[h + j] = sigmoid(pre[h + j]);
                gates[2 * h + j] = pre[2 * h + j].tanh();
                gates[3 * h + j] = sigmoid(pre[3 * h + j]);
            }
            let h_prev = h_state.clone();
            let c_prev = c_state.clone();
            let mut tanh_c = vec![T::zero(); h];
            for j in 0..h {
                let c = gates[h + j] * c_prev[j] + gates[j] * gates[2 * h + j];
                c_state[j] = c;
                tanh_c[j] = c.tanh();
                h_state[j] = gates[3 * h + j] * tanh_c[j];
            }
            hidden.row_mut(t).copy_from_slice(&h_state);
            steps.push(StepCache { active: true, x: x.to_vec(), h_prev, c_prev, gates, tanh_c });
        }
        Ok(LstmRun { hidden, final_hidden: h_state, final_cell: c_state, trace: LstmTrace { steps } })
    }

    /// Backpropagates through a recorded run.
    ///
    /// `d_hidden` is the loss gradient with respect to every hidden output
    /// (t x h); `d_final_hidden` / `d_final_cell` are gradients flowing into
    /// the final state from downstream. Parameter gradients are accumulated
    /// into `grads`; returns the gradients for the input sequence and for the
    /// initial `(hidden, cell)` state.
    pub fn backward(
        &self,
        trace: &LstmTrace<T>,
        d_hidden: &Matrix<T>,
        d_final_hidden: &[T],
        d_final_cell: &[T],
        grads: &mut RecurrentCell<T>,
    ) -> (Matrix<T>, Vec<T>, Vec<T>) {
        let h = self.hidden_size;
        let t_len = trace.steps.len();
        debug_assert_eq!(d_hidden.rows(), t_len);
        let mut d_inputs = Matrix::zeros(t_len, self.input_size);
        let mut dh = d_final_hidden.to_vec();
        let mut dc = d_final_cell.to_vec();
        let mut da = vec![T::zero(); 4 * h];
        let one = T::one();
        for t in (0..t_len).rev() {
            for (d, &g) in dh.iter_mut().zip(d_hidden.row(t)) {
                *d = *d + g;
            }
            let step = &trace.steps[t];
            if !step.active {
                continue;
            }
            let g = &step.gates;
            for j in 0..h {
                let (i_g, f_g, c_g, o_g) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
                let tc = step.tanh_c[j];
                let d_o = dh[j] * tc;
                let dc_total = dc[j] + dh[j] * o_g * (one - tc * tc);
                da[j] = dc_total * c_g * i_g * (one - i_g);
                da[h + j] = dc_total * step.c_prev[j] * f_g * (one - f_g);
                da[2 * h + j] = dc_total * i_g * (one - c_g * c_g);
                da[3 * h + j] = d_o * o_g * (one - o_g);
                dc[j] = dc_total * f_g;
            }
            let mut dh_prev = vec![T::zero(); h];
            let dx = d_inputs.row_mut(t);
            for (r, &dar) in da.iter().enumerate() {
                grads.bias[r] = grads.bias[r] + dar;
                if dar == T::zero() {
                    continue;
                }
                for (gw, &xv) in grads.w_input.row_mut(r).iter_mut().zip(&step.x) {
                    *gw = *gw + dar * xv;
                }
                for (gw, &hv) in grads.w_hidden.row_mut(r).iter_mut().zip(&step.h_prev) {
                    *gw = *gw + dar * hv;
                }
                for (d, &w) in dx.iter_mut().zip(self.w_input.row(r)) {
                    *d = *d + dar * w;
                }
                for (d, &w) in dh_prev.iter_mut().zip(self.w_hidden.row(r)) {
                    *d = *d + dar * w;
                }
            }
            dh = dh_prev;
        }
        (d_inputs, dh, dc)
    }
}

/// Activations of one timestep for a whole batch.
#[derive(Debug, Clone)]
struct BatchStep<T> {
    active: Vec<bool>,
    x: Matrix<T>,
    h_prev: Matrix<T>,
    c_prev: Matrix<T>,
    gates: Matrix<T>,
    tanh_c: Matrix<T>,
}

/// Backward-pass record of [`RecurrentCell::run_batch`].
#[derive(Debug, Clone)]
pub struct BatchTrace<T> {
    steps: Vec<BatchStep<T>>,
}

/// Output of [`RecurrentCell::run_batch`]: time-major hidden states, one
/// `batch x hidden` matrix per step.
#[derive(Debug, Clone)]
pub struct BatchRun<T> {
    pub hidden: Vec<Matrix<T>>,
    pub final_hidden: Matrix<T>,
    pub final_cell: Matrix<T>,
    pub trace: BatchTrace<T>,
}

impl<T: Scalar> RecurrentCell<T> {
    /// Runs a batch of sequences in lockstep. `inputs[t]` holds step `t` of
    /// every sequence (`batch x input_size`); `masks[t][b]` is false where
    /// sequence `b` has no step `t`, which leaves its state untouched.
    pub fn run_batch(
        &self,
        inputs: &[Matrix<T>],
        masks: &[Vec<bool>],
        initial: Option<(&Matrix<T>, &Matrix<T>)>,
    ) -> Result<BatchRun<T>> {
        let h = self.hidden_size;
        let batch = match (inputs.first(), initial) {
            (Some(x), _) => x.rows(),
            (None, Some((h0, _))) => h0.rows(),
            (None, None) => 0,
        };
        if masks.len() != inputs.len() {
            return Err(Error::Shape(format!("{} masks for {} steps", masks.len(), inputs.len())));
        }
        for (x, m) in inputs.iter().zip(masks) {
            if x.rows() != batch || x.cols() != self.input_size || m.len() != batch {
                return Err(Error::Shape(format!(
                    "step input {}x{} (mask {}) does not match batch {batch} x {}",
                    x.rows(),
                    x.cols(),
                    m.len(),
                    self.input_size
                )));
            }
        }
        let (mut h_state, mut c_state) = match initial {
            Some((h0, c0)) => {
                if h0.rows() != batch || h0.cols() != h || c0.rows() != batch || c0.cols() != h {
                    return Err(Error::Shape(format!("initial state must be {batch}x{h}")));
                }
                (h0.clone(), c0.clone())
            }
            None => (Matrix::zeros(batch, h), Matrix::zeros(batch, h)),
        };

        let mut hidden = Vec::with_capacity(inputs.len());
        let mut steps = Vec::with_capacity(inputs.len());
        for (x, mask) in inputs.iter().zip(masks) {
            let mut gates = Matrix::zeros(batch, 4 * h);
            for b in 0..batch {
                gates.row_mut(b).copy_from_slice(&self.bias);
            }
            gemm(T::one(), x, false, &self.w_input, true, T::one(), &mut gates)?;
            gemm(T::one(), &h_state, false, &self.w_hidden, true, T::one(), &mut gates)?;
            let h_prev = h_state.clone();
            let c_prev = c_state.clone();
            let mut tanh_c = Matrix::zeros(batch, h);
            for b in 0..batch {
                if !mask[b] {
                    continue;
                }
                let g = gates.row_mut(b);
                for j in 0..h {
                    g[j] = sigmoid(g[j]);
                    g[h + j] = sigmoid(g[h + j]);
                    g[2 * h + j] = g[2 * h + j].tanh();
                    g[3 * h + j] = sigmoid(g[3 * h + j]);
                }
                let g = gates.row(b);
                let (cp, cs, hs, tc) = (c_prev.row(b), c_state.row_mut(b), h_state.row_mut(b), tanh_c.row_mut(b));
                for j in 0..h {
                    let c = g[h + j] * cp[j] + g[j] * g[2 * h + j];
                    cs[j] = c;
                    tc[j] = c.tanh();
                    hs[j] = g[3 * h + j] * tc[j];
                }
            }
            hidden.push(h_state.clone());
            steps.push(BatchStep { active: mask.clone(), x: x.clone(), h_prev, c_prev, gates, tanh_c });
        }
        Ok(BatchRun { hidden, final_hidden: h_state, final_cell: c_state, trace: BatchTrace { steps } })
    }

    /// Batched counterpart of [`RecurrentCell::backward`]. `d_hidden[t]` is
    /// the gradient for the step-`t` hidden output of every sequence.
    /// Returns per-step input gradients and the initial-state gradients.
    pub fn backward_batch(
        &self,
        trace: &BatchTrace<T>,
        d_hidden: &[Matrix<T>],
        d_final_hidden: &Matrix<T>,
        d_final_cell: &Matrix<T>,
        grads: &mut RecurrentCell<T>,
    ) -> Result<(Vec<Matrix<T>>, Matrix<T>, Matrix<T>)> {
        let h = self.hidden_size;
        let t_len = trace.steps.len();
        if d_hidden.len() != t_len {
            return Err(Error::Shape(format!("{} hidden gradients for {t_len} steps", d_hidden.len())));
        }
        let batch = d_final_hidden.rows();
        let one = T::one();
        let mut dh = d_final_hidden.clone();
        let mut dc = d_final_cell.clone();
        let mut d_inputs = vec![Matrix::zeros(0, 0); t_len];
        for t in (0..t_len).rev() {
            let step = &trace.steps[t];
            for (d, &g) in dh.as_mut_slice().iter_mut().zip(d_hidden[t].as_slice()) {
                *d = *d + g;
            }
            let mut da = Matrix::zeros(batch, 4 * h);
            for b in 0..batch {
                if !step.active[b] {
                    continue;
                }
                let g = step.gates.row(b);
                let tc = step.tanh_c.row(b);
                let cp = step.c_prev.row(b);
                let dhb = dh.row(b).to_vec();
                let dcb = dc.row_mut(b);
                let dab = da.row_mut(b);
                for j in 0..h {
                    let (i_g, f_g, c_g, o_g) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
                    let d_o = dhb[j] * tc[j];
                    let dc_total = dcb[j] + dhb[j] * o_g * (one - tc[j] * tc[j]);
                    dab[j] = dc_total * c_g * i_g * (one - i_g);
                    dab[h + j] = dc_total * cp[j] * f_g * (one - f_g);
                    dab[2 * h + j] = dc_total * i_g * (one - c_g * c_g);
                    dab[3 * h + j] = d_o * o_g * (one - o_g);
                    dcb[j] = dc_total * f_g;
                }
            }
            gemm(one, &da, true, &step.x, false, one, &mut grads.w_input)?;
            gemm(one, &da, true, &step.h_prev, false, one, &mut grads.w_hidden)?;
            for b in 0..batch {
                for (gb, &v) in grads.bias.iter_mut().zip(da.row(b)) {
                    *gb = *gb + v;
                }
            }
            let mut dx = Matrix::zeros(batch, self.input_size);
            gemm(one, &da, false, &self.w_input, false, T::zero(), &mut dx)?;
            let mut dh_prev = Matrix::zeros(batch, h);
            gemm(one, &da, false, &self.w_hidden, false, T::zero(), &mut dh_prev)?;
            for b in 0..batch {
                if !step.active[b] {
                    dh_prev.row_mut(b).copy_from_slice(dh.row(b));
                }
            }
            dh = dh_prev;
            d_inputs[t] = dx;
        }
        Ok((d_inputs, dh, dc))
    }
}

/// Dot product with four independent partial sums.
#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [T::zero(); 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let i = c * 4;
        acc[0] = acc[0] + a[i] * b[i];
        acc[1] = acc[1] + a[i + 1] * b[i + 1];
        acc[2] = acc[2] + a[i + 2] * b[i + 2];
        acc[3] = acc[3] + a[i + 3] * b[i + 3];
    }
    let mut tail = T::zero();
    for i in chunks * 4..n {
        tail = tail + a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

impl<T: Scalar> Parameters<T> for RecurrentCell<T> {
    fn tensors(&self) -> Vec<TensorView<'_, T>> {
        vec![
            TensorView {
                name: "w_input".into(),
                shape: vec![self.w_input.rows(), self.w_input.cols()],
                data: self.w_input.as_slice(),
            },
            TensorView {
                name: "w_hidden".into(),
                shape: vec![self.w_hidden.rows(), self.w_hidden.cols()],
                data: self.w_hidden.as_slice(),
            },
            TensorView { name: "bias".into(), shape: vec![self.bias.len()], data: &self.bias },
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        vec![self.w_input.as_mut_slice(), self.w_hidden.as_mut_slice(), &mut self.bias]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    /// Re-evaluates the gate equations one scalar at a time.
    fn scalar_oracle(cell: &RecurrentCell<f64>, seq: &[[f64; 2]]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let h = cell.hidden_size();
        let mut hs = vec![0.0; h];
        let mut cs = vec![0.0; h];
        let mut all = Vec::new();
        for x in seq {
            let gate = |block: usize, j: usize, hs: &[f64]| {
                let r = block * h + j;
                let mut a = cell.bias[r];
                for k in 0..2 {
                    a += cell.w_input[(r, k)] * x[k];
                }
                for k in 0..h {
                    a += cell.w_hidden[(r, k)] * hs[k];
                }
                a
            };
            let mut new_h = vec![0.0; h];
            for j in 0..h {
                let i = sig(gate(0, j, &hs));
                let f = sig(gate(1, j, &hs));
                let g = gate(2, j, &hs).tanh();
                let o = sig(gate(3, j, &hs));
                cs[j] = f * cs[j] + i * g;
                new_h[j] = o * cs[j].tanh();
            }
            hs = new_h;
            all.push(hs.clone());
        }
        (all, hs)
    }

    #[test]
    fn zero_parameters_give_zero_state() {
        let cell = RecurrentCell::<f64>::zeros(2, 3);
        let seq = Matrix::from_rows(&[[1.0, -2.0], [3.0, 0.5], [9.0, 9.0]]).unwrap();
        let (_, last) = cell.forward_sequence(&seq, &[true; 3]).unwrap();
        assert_eq!(last, vec![0.0; 3]);
    }

    #[test]
    fn fully_masked_sequence_keeps_initial_state() {
        let cell = RecurrentCell::<f64>::new(2, 4, &mut Initializer::new(1));
        let seq = Matrix::from_rows(&[[1.0, -2.0], [3.0, 0.5]]).unwrap();
        let (hidden, last) = cell.forward_sequence(&seq, &[false, false]).unwrap();
        assert_eq!(last, vec![0.0; 4]);
        assert!(hidden.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_scalar_oracle() {
        let cell = RecurrentCell::<f64>::new(2, 3, &mut Initializer::new(11));
        let raw = [[0.3, -1.2], [0.8, 0.1], [-0.5, 0.9], [1.4, -0.7], [0.0, 0.2]];
        let seq = Matrix::from_rows(&raw).unwrap();
        let (hidden, last) = cell.forward_sequence(&seq, &[true; 5]).unwrap();
        let (expect_all, expect_last) = scalar_oracle(&cell, &raw);
        for (t, row) in expect_all.iter().enumerate() {
            for (a, b) in hidden.row(t).iter().zip(row) {
                assert!((a - b).abs() < 1e-14);
            }
        }
        for (a, b) in last.iter().zip(&expect_last) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn dimension_mismatch_is_shape_error() {
        let cell = RecurrentCell::<f64>::zeros(3, 2);
        let seq = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(matches!(cell.forward_sequence(&seq, &[true]), Err(Error::Shape(_))));
        let seq = Matrix::from_rows(&[[1.0, 2.0, 3.0]]).unwrap();
        assert!(matches!(cell.forward_sequence(&seq, &[true, true]), Err(Error::Shape(_))));
    }

    #[test]
    fn large_inputs_stay_finite() {
        let cell = RecurrentCell::<f32>::new(1, 4, &mut Initializer::new(3));
        let seq = Matrix::from_vec(4, 1, vec![1e3_f32, -1e3, 1e3, -1e3]).unwrap();
        let (hidden, _) = cell.forward_sequence(&seq, &[true; 4]).unwrap();
        assert!(hidden.is_finite());
    }

    #[test]
    fn batch_run_matches_single_sequences() {
        let cell = RecurrentCell::<f64>::new(2, 3, &mut Initializer::new(21));
        let seqs = [
            Matrix::from_rows(&[[0.3, -1.2], [0.8, 0.1], [-0.5, 0.9], [1.4, -0.7]]).unwrap(),
            Matrix::from_rows(&[[0.1, 0.2], [-0.4, 0.6]]).unwrap(),
            Matrix::from_rows(&[[1.0, -1.0], [0.0, 0.5], [0.9, 0.3]]).unwrap(),
        ];
        let t_max = 4;
        let mut inputs = Vec::new();
        let mut masks = Vec::new();
        for t in 0..t_max {
            let mut x = Matrix::zeros(3, 2);
            let mut m = vec![false; 3];
            for (b, s) in seqs.iter().enumerate() {
                if t < s.rows() {
                    x.row_mut(b).copy_from_slice(s.row(t));
                    m[b] = true;
                }
            }
            inputs.push(x);
            masks.push(m);
        }
        let h0 = Matrix::from_rows(&[[0.1, 0.0, -0.1], [0.2, 0.2, 0.2], [0.0, -0.3, 0.1]]).unwrap();
        let c0 = h0.map(|v| v * 0.5);
        let batch = cell.run_batch(&inputs, &masks, Some((&h0, &c0))).unwrap();

        // Weighted loss on hidden outputs plus final cell state.
        let weights: Vec<Matrix<f64>> =
            (0..t_max).map(|t| Matrix::from_vec(3, 3, (0..9).map(|i| ((i + t) % 4) as f64 * 0.25 - 0.3).collect()).unwrap()).collect();
        let ones = Matrix::from_vec(3, 3, vec![1.0; 9]).unwrap();
        let mut bgrads = RecurrentCell::zeros(2, 3);
        let (bdx, bdh0, bdc0) =
            cell.backward_batch(&batch.trace, &weights, &Matrix::zeros(3, 3), &ones, &mut bgrads).unwrap();

        let mut sgrads = RecurrentCell::zeros(2, 3);
        for (b, s) in seqs.iter().enumerate() {
            let run = cell.run(s, &vec![true; s.rows()], Some((h0.row(b), c0.row(b)))).unwrap();
            for t in 0..s.rows() {
                for (x, y) in run.hidden.row(t).iter().zip(batch.hidden[t].row(b)) {
                    assert!((x - y).abs() < 1e-14);
                }
            }
            for (x, y) in run.final_hidden.iter().zip(batch.final_hidden.row(b)) {
                assert!((x - y).abs() < 1e-14);
            }
            let mut dh = Matrix::zeros(s.rows(), 3);
            for t in 0..s.rows() {
                dh.row_mut(t).copy_from_slice(weights[t].row(b));
            }
            // Padded steps still see their weights through the carried state.
            let carried: Vec<f64> = (s.rows()..t_max).fold(vec![0.0; 3], |acc, t| {
                acc.iter().zip(weights[t].row(b)).map(|(a, w)| a + w).collect()
            });
            let (dx, dh0, dc0) = cell.backward(&run.trace, &dh, &carried, &[1.0; 3], &mut sgrads);
            for t in 0..s.rows() {
                for (x, y) in dx.row(t).iter().zip(bdx[t].row(b)) {
                    assert!((x - y).abs() < 1e-13);
                }
            }
            for (x, y) in dh0.iter().zip(bdh0.row(b)) {
                assert!((x - y).abs() < 1e-13);
            }
            for (x, y) in dc0.iter().zip(bdc0.row(b)) {
                assert!((x - y).abs() < 1e-13);
            }
        }
        for (x, y) in sgrads.flatten().iter().zip(bgrads.flatten()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    /// Loss = sum of hidden outputs weighted by fixed coefficients plus the
    /// final cell state; checks the hand-written backward pass.
    #[test]
    fn backward_matches_finite_differences() {
        let mut cell = RecurrentCell::<f64>::new(2, 3, &mut Initializer::new(7));
        let seq = Matrix::from_rows(&[[0.3, -1.2], [0.8, 0.1], [-0.5, 0.9], [1.4, -0.7]]).unwrap();
        let mask = [true, true, false, true];
        let h0 = vec![0.1, -0.2, 0.05];
        let c0 = vec![-0.3, 0.2, 0.4];
        let weights: Vec<f64> = (0..12).map(|i| ((i * 7) % 5) as f64 * 0.3 - 0.6).collect();
        let loss = |cell: &RecurrentCell<f64>| {
            let run = cell.run(&seq, &mask, Some((&h0, &c0))).unwrap();
            let s: f64 = run.hidden.as_slice().iter().zip(&weights).map(|(a, b)| a * b).sum();
            s + run.final_cell.iter().sum::<f64>()
        };
        let run = cell.run(&seq, &mask, Some((&h0, &c0))).unwrap();
        let d_hidden = Matrix::from_vec(4, 3, weights.clone()).unwrap();
        let mut grads = RecurrentCell::zeros(2, 3);
        let (dx, dh0, dc0) = cell.backward(&run.trace, &d_hidden, &[0.0; 3], &[1.0; 3], &mut grads);

        let analytic = grads.flatten();
        let base = cell.flatten();
        let eps = 1e-6;
        for (i, g) in analytic.iter().enumerate() {
            let mut p = base.clone();
            p[i] += eps;
            cell.assign_flat(&p).unwrap();
            let up = loss(&cell);
            p[i] -= 2.0 * eps;
            cell.assign_flat(&p).unwrap();
            let down = loss(&cell);
            let fd = (up - down) / (2.0 * eps);
            assert!((fd - g).abs() < 1e-6, "param {i}: fd {fd} vs {g}");
        }
        cell.assign_flat(&base).unwrap();
        // Masked step receives no input gradient.
        assert!(dx.row(2).iter().all(|&v| v == 0.0));
        assert_eq!(dh0.len(), 3);
        assert_eq!(dc0.len(), 3);
    }
}
