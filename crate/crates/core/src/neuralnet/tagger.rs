//! Per-character sequence tagger: bidirectional LSTM, then a shared dense
//! unit with a sigmoid at every position.

use rand::Rng;

use super::layers::{BiLstm, Dense, LstmCell, StepInput};
use super::scalar::{sigmoid, Scalar};
use super::train::TrainConfig;
use super::{NeuralError, Parameters, INIT_SCALE};
use crate::corpus::Vocabulary;

#[derive(Debug, Clone, PartialEq)]
pub struct TaggerParams<F> {
    pub encoder: BiLstm<F>,
    /// `2·hidden → 1`
    pub head: Dense<F>,
}

impl<F: Scalar> TaggerParams<F> {
    pub fn zeros(vocab_size: usize, hidden: usize) -> Self {
        TaggerParams {
            encoder: BiLstm {
                fwd: LstmCell::zeros(vocab_size, hidden),
                bwd: LstmCell::zeros(vocab_size, hidden),
            },
            head: Dense::zeros(2 * hidden, 1),
        }
    }

    pub fn init<R: Rng>(vocab_size: usize, hidden: usize, scale: f64, rng: &mut R) -> Self {
        TaggerParams {
            encoder: BiLstm {
                fwd: LstmCell::init(vocab_size, hidden, scale, rng),
                bwd: LstmCell::init(vocab_size, hidden, scale, rng),
            },
            head: Dense::init(2 * hidden, 1, scale, rng),
        }
    }

    pub fn hidden(&self) -> usize {
        self.encoder.fwd.hidden
    }

    pub fn vocab_size(&self) -> usize {
        self.encoder.fwd.input_dim
    }

    pub fn scores(&self, input: &[usize], pad: usize) -> Vec<F> {
        self.loss_and_grad(input, None, pad, None).1
    }

    /// Mean squared error against `target` (one value per position) and the
    /// per-position outputs. With `target == None` only the forward runs.
    pub fn loss_and_grad(
        &self,
        input: &[usize],
        target: Option<&[F]>,
        pad: usize,
        grads: Option<&mut TaggerParams<F>>,
    ) -> (F, Vec<F>) {
        let xs: Vec<StepInput<'_, F>> = input
            .iter()
            .map(|&t| {
                if t == pad {
                    StepInput::Zero
                } else {
                    StepInput::OneHot(t)
                }
            })
            .collect();
        let trace = self.encoder.run(&xs);
        let feats: Vec<Vec<F>> = (0..input.len()).map(|t| trace.output(t)).collect();
        let outputs: Vec<F> = feats
            .iter()
            .map(|f| sigmoid(self.head.forward(f)[0]))
            .collect();
        let Some(target) = target else {
            return (F::zero(), outputs);
        };
        let n = F::from_f64(input.len() as f64);
        let loss = outputs
            .iter()
            .zip(target)
            .fold(F::zero(), |acc, (&y, &t)| acc + (y - t) * (y - t))
            / n;
        if let Some(grads) = grads {
            let two = F::from_f64(2.0);
            let d_out: Vec<Vec<F>> = (0..input.len())
                .map(|t| {
                    let y = outputs[t];
                    let dz = two * (y - target[t]) / n * y * (F::one() - y);
                    self.head.backward(&feats[t], &[dz], &mut grads.head)
                })
                .collect();
            self.encoder
                .backward(&trace, &d_out, &[], &mut grads.encoder);
        }
        (loss, outputs)
    }
}

impl<F: Scalar> Parameters<F> for TaggerParams<F> {
    fn tensors(&self) -> Vec<&[F]> {
        let mut v: Vec<&[F]> = Vec::with_capacity(8);
        v.extend(self.encoder.fwd.tensors());
        v.extend(self.encoder.bwd.tensors());
        v.extend(self.head.tensors());
        v
    }

    fn tensors_mut(&mut self) -> Vec<&mut [F]> {
        let mut v: Vec<&mut [F]> = Vec::with_capacity(8);
        v.extend(self.encoder.fwd.tensors_mut());
        v.extend(self.encoder.bwd.tensors_mut());
        v.extend(self.head.tensors_mut());
        v
    }

    fn zeros_like(&self) -> Self {
        TaggerParams::zeros(self.vocab_size(), self.hidden())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaggerModel<F = f32> {
    pub vocab: Vocabulary,
    pub params: TaggerParams<F>,
    pub config: TrainConfig,
}

impl<F: Scalar> TaggerModel<F> {
    pub fn new(vocab: Vocabulary, config: TrainConfig) -> Self {
        let mut rng = config.rng();
        let params = TaggerParams::init(vocab.len(), config.hidden_size, INIT_SCALE, &mut rng);
        TaggerModel {
            vocab,
            params,
            config,
        }
    }

    /// Per-character scores in `(0, 1)`.
    pub fn predict(&self, input: &str) -> Result<Vec<F>, NeuralError> {
        let ids: Vec<usize> = input
            .chars()
            .map(|c| self.vocab.index_of(c).ok_or(NeuralError::VocabMiss(c)))
            .collect::<Result<_, _>>()?;
        if ids.is_empty() {
            return Err(NeuralError::EmptySequence);
        }
        Ok(self.params.scores(&ids, self.vocab.pad()))
    }
}
