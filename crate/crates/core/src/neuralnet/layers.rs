use rand::Rng;

use super::scalar::{axpy, dot, sigmoid, Scalar};
use super::NeuralError;

/// Input to one recurrent step. Token inputs are one-hot, so `W x` is a
/// column of `W`; PAD uses the zero vector.
#[derive(Debug, Clone, Copy)]
pub enum StepInput<'a, F> {
    Dense(&'a [F]),
    OneHot(usize),
    Zero,
}

#[derive(Debug, Clone)]
enum CachedInput<F> {
    Dense(Vec<F>),
    OneHot(usize),
    Zero,
}

/// Parameters of a single LSTM cell. Gate blocks are stacked in the order
/// input, forget, candidate, output; matrices are row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCell<F> {
    pub input_dim: usize,
    pub hidden: usize,
    /// `4·hidden × input_dim`
    pub w: Vec<F>,
    /// `4·hidden × hidden`
    pub u: Vec<F>,
    /// `4·hidden`
    pub b: Vec<F>,
}

/// Everything the backward pass needs from one forward step.
#[derive(Debug, Clone)]
pub struct StepCache<F> {
    input: CachedInput<F>,
    h_prev: Vec<F>,
    c_prev: Vec<F>,
    /// activated gates `[i; f; g; o]`
    gates: Vec<F>,
    tanh_c: Vec<F>,
    pub c: Vec<F>,
    pub h: Vec<F>,
}

pub(crate) fn uniform_vec<F: Scalar, R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<F> {
    (0..n)
        .map(|_| F::from_f64(rng.gen_range(-scale..scale)))
        .collect()
}

impl<F: Scalar> LstmCell<F> {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        LstmCell {
            input_dim,
            hidden,
            w: vec![F::zero(); 4 * hidden * input_dim],
            u: vec![F::zero(); 4 * hidden * hidden],
            b: vec![F::zero(); 4 * hidden],
        }
    }

    /// Uniform weights in `(-scale, scale)`, zero bias except a forget-gate
    /// bias of one.
    pub fn init<R: Rng>(input_dim: usize, hidden: usize, scale: f64, rng: &mut R) -> Self {
        let mut cell = LstmCell {
            input_dim,
            hidden,
            w: uniform_vec(rng, 4 * hidden * input_dim, scale),
            u: uniform_vec(rng, 4 * hidden * hidden, scale),
            b: vec![F::zero(); 4 * hidden],
        };
        for j in hidden..2 * hidden {
            cell.b[j] = F::one();
        }
        cell
    }

    pub fn forward(&self, x: StepInput<'_, F>, h_prev: &[F], c_prev: &[F]) -> StepCache<F> {
        let h = self.hidden;
        let mut z = self.b.clone();
        let input = match x {
            StepInput::Dense(v) => {
                for (r, zr) in z.iter_mut().enumerate() {
                    *zr = *zr + dot(&self.w[r * self.input_dim..(r + 1) * self.input_dim], v);
                }
                CachedInput::Dense(v.to_vec())
            }
            StepInput::OneHot(k) => {
                for (r, zr) in z.iter_mut().enumerate() {
                    *zr = *zr + self.w[r * self.input_dim + k];
                }
                CachedInput::OneHot(k)
            }
            StepInput::Zero => CachedInput::Zero,
        };
        for (r, zr) in z.iter_mut().enumerate() {
            *zr = *zr + dot(&self.u[r * h..(r + 1) * h], h_prev);
        }
        for j in 0..h {
            z[j] = sigmoid(z[j]);
            z[h + j] = sigmoid(z[h + j]);
            z[2 * h + j] = z[2 * h + j].tanh();
            z[3 * h + j] = sigmoid(z[3 * h + j]);
        }
        let mut c = vec![F::zero(); h];
        let mut tanh_c = vec![F::zero(); h];
        let mut h_new = vec![F::zero(); h];
        for j in 0..h {
            c[j] = z[h + j] * c_prev[j] + z[j] * z[2 * h + j];
            tanh_c[j] = c[j].tanh();
            h_new[j] = z[3 * h + j] * tanh_c[j];
        }
        StepCache {
            input,
            h_prev: h_prev.to_vec(),
            c_prev: c_prev.to_vec(),
            gates: z,
            tanh_c,
            c,
            h: h_new,
        }
    }

    /// Backpropagates `dh`, `dc` (gradients w.r.t. this step's outputs)
    /// into `grads` and returns the gradients w.r.t. the previous state.
    pub fn backward(
        &self,
        cache: &StepCache<F>,
        dh: &[F],
        dc: &[F],
        grads: &mut LstmCell<F>,
    ) -> (Vec<F>, Vec<F>) {
        let h = self.hidden;
        let g = &cache.gates;
        let one = F::one();
        let mut dz = vec![F::zero(); 4 * h];
        let mut dc_prev = vec![F::zero(); h];
        for j in 0..h {
            let (i_g, f_g, c_g, o_g) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
            let tc = cache.tanh_c[j];
            let dct = dc[j] + dh[j] * o_g * (one - tc * tc);
            dz[j] = dct * c_g * i_g * (one - i_g);
            dz[h + j] = dct * cache.c_prev[j] * f_g * (one - f_g);
            dz[2 * h + j] = dct * i_g * (one - c_g * c_g);
            dz[3 * h + j] = dh[j] * tc * o_g * (one - o_g);
            dc_prev[j] = dct * f_g;
        }
        for (gb, &d) in grads.b.iter_mut().zip(&dz) {
            *gb = *gb + d;
        }
        match &cache.input {
            CachedInput::Dense(x) => {
                for (r, &d) in dz.iter().enumerate() {
                    axpy(
                        &mut grads.w[r * self.input_dim..(r + 1) * self.input_dim],
                        d,
                        x,
                    );
                }
            }
            CachedInput::OneHot(k) => {
                for (r, &d) in dz.iter().enumerate() {
                    let idx = r * self.input_dim + k;
                    grads.w[idx] = grads.w[idx] + d;
                }
            }
            CachedInput::Zero => {}
        }
        let mut dh_prev = vec![F::zero(); h];
        for (r, &d) in dz.iter().enumerate() {
            axpy(&mut grads.u[r * h..(r + 1) * h], d, &cache.h_prev);
            axpy(&mut dh_prev, d, &self.u[r * h..(r + 1) * h]);
        }
        (dh_prev, dc_prev)
    }

    pub(crate) fn tensors(&self) -> [&[F]; 3] {
        [&self.w, &self.u, &self.b]
    }

    pub(crate) fn tensors_mut(&mut self) -> [&mut [F]; 3] {
        [&mut self.w, &mut self.u, &mut self.b]
    }
}

/// One LSTM step on a dense input vector.
pub fn lstm_step<F: Scalar>(
    params: &LstmCell<F>,
    x: &[F],
    state: (&[F], &[F]),
) -> Result<(Vec<F>, Vec<F>), NeuralError> {
    let (h, c) = state;
    if x.len() != params.input_dim {
        return Err(NeuralError::DimensionMismatch {
            expected: params.input_dim,
            found: x.len(),
        });
    }
    for v in [h, c] {
        if v.len() != params.hidden {
            return Err(NeuralError::DimensionMismatch {
                expected: params.hidden,
                found: v.len(),
            });
        }
    }
    let cache = params.forward(StepInput::Dense(x), h, c);
    Ok((cache.h, cache.c))
}

/// Fully connected layer `y = W x + b`, `W` row-major `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<F> {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Vec<F>,
    pub b: Vec<F>,
}

impl<F: Scalar> Dense<F> {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Dense {
            in_dim,
            out_dim,
            w: vec![F::zero(); in_dim * out_dim],
            b: vec![F::zero(); out_dim],
        }
    }

    pub fn init<R: Rng>(in_dim: usize, out_dim: usize, scale: f64, rng: &mut R) -> Self {
        Dense {
            in_dim,
            out_dim,
            w: uniform_vec(rng, in_dim * out_dim, scale),
            b: vec![F::zero(); out_dim],
        }
    }

    pub fn forward(&self, x: &[F]) -> Vec<F> {
        (0..self.out_dim)
            .map(|r| self.b[r] + dot(&self.w[r * self.in_dim..(r + 1) * self.in_dim], x))
            .collect()
    }

    /// Accumulates parameter gradients and returns `dx`.
    pub fn backward(&self, x: &[F], dy: &[F], grads: &mut Dense<F>) -> Vec<F> {
        let mut dx = vec![F::zero(); self.in_dim];
        for (r, &d) in dy.iter().enumerate() {
            grads.b[r] = grads.b[r] + d;
            let row = r * self.in_dim..(r + 1) * self.in_dim;
            axpy(&mut grads.w[row.clone()], d, x);
            axpy(&mut dx, d, &self.w[row]);
        }
        dx
    }

    pub(crate) fn tensors(&self) -> [&[F]; 2] {
        [&self.w, &self.b]
    }

    pub(crate) fn tensors_mut(&mut self) -> [&mut [F]; 2] {
        [&mut self.w, &mut self.b]
    }
}

/// Forward and backward LSTM over the same sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLstm<F> {
    pub fwd: LstmCell<F>,
    pub bwd: LstmCell<F>,
}

/// Caches of a bidirectional pass; `bwd[t]` is the backward cell's step on
/// input position `t`.
pub struct BiLstmTrace<F> {
    pub fwd: Vec<StepCache<F>>,
    pub bwd: Vec<StepCache<F>>,
}

impl<F: Scalar> BiLstmTrace<F> {
    /// `[h_fwd; h_bwd]` at position `t`.
    pub fn output(&self, t: usize) -> Vec<F> {
        let mut v = self.fwd[t].h.clone();
        v.extend_from_slice(&self.bwd[t].h);
        v
    }

    /// `[h_fwd_last; h_bwd_first; c_fwd_last; c_bwd_first]`
    pub fn final_state(&self) -> Vec<F> {
        let f = self.fwd.last().expect("nonempty");
        let b = &self.bwd[0];
        let mut v = Vec::with_capacity(4 * f.h.len());
        v.extend_from_slice(&f.h);
        v.extend_from_slice(&b.h);
        v.extend_from_slice(&f.c);
        v.extend_from_slice(&b.c);
        v
    }
}

impl<F: Scalar> BiLstm<F> {
    pub fn run(&self, xs: &[StepInput<'_, F>]) -> BiLstmTrace<F> {
        let h = self.fwd.hidden;
        let zero = vec![F::zero(); h];
        let mut fwd: Vec<StepCache<F>> = Vec::with_capacity(xs.len());
        for &x in xs {
            let step = match fwd.last() {
                Some(p) => self.fwd.forward(x, &p.h, &p.c),
                None => self.fwd.forward(x, &zero, &zero),
            };
            fwd.push(step);
        }
        let mut bwd: Vec<Option<StepCache<F>>> = vec![None; xs.len()];
        for t in (0..xs.len()).rev() {
            let step = match bwd.get(t + 1).and_then(|s| s.as_ref()) {
                Some(p) => self.bwd.forward(xs[t], &p.h, &p.c),
                None => self.bwd.forward(xs[t], &zero, &zero),
            };
            bwd[t] = Some(step);
        }
        BiLstmTrace {
            fwd,
            bwd: bwd.into_iter().map(|s| s.expect("filled")).collect(),
        }
    }

    /// Backpropagation through time. `d_out[t]` is the gradient w.r.t. the
    /// concatenated output at `t` (length `2·hidden`, or empty for none);
    /// `d_final` is w.r.t. [`BiLstmTrace::final_state`] (or empty).
    pub fn backward(
        &self,
        trace: &BiLstmTrace<F>,
        d_out: &[Vec<F>],
        d_final: &[F],
        grads: &mut BiLstm<F>,
    ) {
        let h = self.fwd.hidden;
        let n = trace.fwd.len();
        let (mut dh, mut dc) = if d_final.is_empty() {
            (vec![F::zero(); h], vec![F::zero(); h])
        } else {
            (d_final[..h].to_vec(), d_final[2 * h..3 * h].to_vec())
        };
        for t in (0..n).rev() {
            if let Some(d) = d_out.get(t).filter(|d| !d.is_empty()) {
                axpy(&mut dh, F::one(), &d[..h]);
            }
            let (a, b) = self.fwd.backward(&trace.fwd[t], &dh, &dc, &mut grads.fwd);
            dh = a;
            dc = b;
        }
        let (mut dh, mut dc) = if d_final.is_empty() {
            (vec![F::zero(); h], vec![F::zero(); h])
        } else {
            (d_final[h..2 * h].to_vec(), d_final[3 * h..].to_vec())
        };
        for t in 0..n {
            if let Some(d) = d_out.get(t).filter(|d| !d.is_empty()) {
                axpy(&mut dh, F::one(), &d[h..]);
            }
            let (a, b) = self.bwd.backward(&trace.bwd[t], &dh, &dc, &mut grads.bwd);
            dh = a;
            dc = b;
        }
    }
}

/// Runs a bidirectional LSTM over dense inputs and returns per-step
/// `[h_fwd; h_bwd]` plus the final `(h, c)` of each direction.
#[allow(clippy::type_complexity)]
pub fn bilstm_encode<F: Scalar>(
    fwd: &LstmCell<F>,
    bwd: &LstmCell<F>,
    xs: &[Vec<F>],
) -> Result<(Vec<Vec<F>>, ((Vec<F>, Vec<F>), (Vec<F>, Vec<F>))), NeuralError> {
    if xs.is_empty() {
        return Err(NeuralError::EmptySequence);
    }
    if let Some(x) = xs.iter().find(|x| x.len() != fwd.input_dim) {
        return Err(NeuralError::DimensionMismatch {
            expected: fwd.input_dim,
            found: x.len(),
        });
    }
    let bi = BiLstm {
        fwd: fwd.clone(),
        bwd: bwd.clone(),
    };
    let inputs: Vec<StepInput<'_, F>> = xs.iter().map(|x| StepInput::Dense(x)).collect();
    let trace = bi.run(&inputs);
    let outputs = (0..xs.len()).map(|t| trace.output(t)).collect();
    let last = trace.fwd.last().unwrap();
    let first = &trace.bwd[0];
    Ok((
        outputs,
        (
            (last.h.clone(), last.c.clone()),
            (first.h.clone(), first.c.clone()),
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sig(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    #[test]
    fn zero_params_give_zero_state() {
        let cell = LstmCell::<f64>::zeros(3, 4);
        let (h, c) = lstm_step(&cell, &[0.3, -1.0, 2.0], (&[0.0; 4], &[0.0; 4])).unwrap();
        assert!(h.iter().all(|&v| v == 0.0));
        assert!(c.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_computed_two_unit_cell() {
        // input_dim 1, hidden 2; W column, U identity-scaled, per-gate biases
        let mut cell = LstmCell::<f64>::zeros(1, 2);
        cell.w = vec![0.5, -0.5, 0.25, 0.0, 1.0, -1.0, 0.0, 0.75];
        for r in 0..8 {
            cell.u[r * 2 + (r % 2)] = 0.5;
        }
        cell.b = vec![0.0, 0.1, 1.0, 1.0, 0.0, 0.0, -0.2, 0.2];
        let x = [2.0];
        let h0 = [0.4, -0.6];
        let c0 = [1.0, -1.0];
        // by hand, unit j gate pre-activation = w*x + 0.5*h0[j] + b
        let pre = |r: usize| cell.w[r] * x[0] + 0.5 * h0[r % 2] + cell.b[r];
        let mut h_exp = [0.0; 2];
        let mut c_exp = [0.0; 2];
        for j in 0..2 {
            let i = sig(pre(j));
            let f = sig(pre(2 + j));
            let g = pre(4 + j).tanh();
            let o = sig(pre(6 + j));
            c_exp[j] = f * c0[j] + i * g;
            h_exp[j] = o * c_exp[j].tanh();
        }
        // unit 0: i=σ(1.2), f=σ(1.7), g=tanh(2.2), o=σ(0.0)
        assert!((sig(1.2) - 0.7685247834990175).abs() < 1e-12);
        let (h, c) = lstm_step(&cell, &x, (&h0, &c0)).unwrap();
        for j in 0..2 {
            assert!((h[j] - h_exp[j]).abs() < 1e-12);
            assert!((c[j] - c_exp[j]).abs() < 1e-12);
        }
        let c0_hand = sig(1.7) * 1.0 + sig(1.2) * 2.2f64.tanh();
        assert!((c[0] - c0_hand).abs() < 1e-12);
        assert!((h[0] - 0.5 * c0_hand.tanh()).abs() < 1e-12);
    }

    #[test]
    fn outputs_are_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cell = LstmCell::<f64>::init(3, 5, 3.0, &mut rng);
        let (h, _) = lstm_step(&cell, &[5.0, -4.0, 9.0], (&[0.9; 5], &[7.0; 5])).unwrap();
        assert!(h.iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn dimension_errors() {
        let cell = LstmCell::<f32>::zeros(3, 2);
        assert!(matches!(
            lstm_step(&cell, &[0.0; 2], (&[0.0; 2], &[0.0; 2])),
            Err(NeuralError::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
        assert!(lstm_step(&cell, &[0.0; 3], (&[0.0; 1], &[0.0; 2])).is_err());
    }

    #[test]
    fn one_hot_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cell = LstmCell::<f64>::init(4, 3, 0.5, &mut rng);
        let h = [0.1, 0.2, -0.3];
        let c = [0.0, 0.5, -0.5];
        let a = cell.forward(StepInput::OneHot(2), &h, &c);
        let b = cell.forward(StepInput::Dense(&[0.0, 0.0, 1.0, 0.0]), &h, &c);
        assert_eq!(a.h, b.h);
        let z = cell.forward(StepInput::Zero, &h, &c);
        let d = cell.forward(StepInput::Dense(&[0.0; 4]), &h, &c);
        assert_eq!(z.h, d.h);
    }

    #[test]
    fn bilstm_shapes_and_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fwd = LstmCell::<f64>::init(2, 3, 0.5, &mut rng);
        let bwd = LstmCell::<f64>::init(2, 3, 0.5, &mut rng);
        assert!(matches!(
            bilstm_encode(&fwd, &bwd, &[]),
            Err(NeuralError::EmptySequence)
        ));

        let x = vec![vec![1.0, -0.5]];
        let (out, _) = bilstm_encode(&fwd, &bwd, &x).unwrap();
        let zero = [0.0; 3];
        let hf = lstm_step(&fwd, &x[0], (&zero, &zero)).unwrap().0;
        let hb = lstm_step(&bwd, &x[0], (&zero, &zero)).unwrap().0;
        assert_eq!(out[0], [hf, hb].concat());

        let xs = vec![vec![1.0, 0.0], vec![0.2, -0.7], vec![-1.0, 0.3]];
        let (out, _) = bilstm_encode(&fwd, &bwd, &xs).unwrap();
        assert!(out.iter().all(|o| o.len() == 6));
        // swapping directions and reversing the input swaps the halves
        let rev: Vec<Vec<f64>> = xs.iter().rev().cloned().collect();
        let (out_rev, _) = bilstm_encode(&bwd, &fwd, &rev).unwrap();
        for t in 0..3 {
            let a = &out[t];
            let b = &out_rev[2 - t];
            assert_eq!(&a[..3], &b[3..]);
            assert_eq!(&a[3..], &b[..3]);
        }
    }
}
