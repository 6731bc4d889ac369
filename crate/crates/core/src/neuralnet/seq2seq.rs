//! Encoder-decoder over characters: a bidirectional LSTM encoder whose final
//! states feed, through a learned linear bridge, the initial state of an LSTM
//! decoder with a softmax output layer. No attention; the decoder sees the
//! input only through the bridged state.

use rand::Rng;

use super::layers::{BiLstm, BiLstmTrace, Dense, LstmCell, StepCache, StepInput};
use super::scalar::{argmax, softmax_in_place, Scalar};
use super::train::TrainConfig;
use super::{NeuralError, Parameters, INIT_SCALE};
use crate::corpus::{Vocabulary, END, START};

#[derive(Debug, Clone, PartialEq)]
pub struct Seq2SeqParams<F> {
    pub encoder: BiLstm<F>,
    /// `4·hidden → 2·hidden`: `[h_f; h_b; c_f; c_b]` to decoder `[h; c]`.
    pub bridge: Dense<F>,
    pub decoder: LstmCell<F>,
    /// `hidden → vocab`
    pub output: Dense<F>,
}

impl<F: Scalar> Seq2SeqParams<F> {
    pub fn zeros(vocab_size: usize, hidden: usize) -> Self {
        Seq2SeqParams {
            encoder: BiLstm {
                fwd: LstmCell::zeros(vocab_size, hidden),
                bwd: LstmCell::zeros(vocab_size, hidden),
            },
            bridge: Dense::zeros(4 * hidden, 2 * hidden),
            decoder: LstmCell::zeros(vocab_size, hidden),
            output: Dense::zeros(hidden, vocab_size),
        }
    }

    pub fn init<R: Rng>(vocab_size: usize, hidden: usize, scale: f64, rng: &mut R) -> Self {
        Seq2SeqParams {
            encoder: BiLstm {
                fwd: LstmCell::init(vocab_size, hidden, scale, rng),
                bwd: LstmCell::init(vocab_size, hidden, scale, rng),
            },
            bridge: Dense::init(4 * hidden, 2 * hidden, scale, rng),
            decoder: LstmCell::init(vocab_size, hidden, scale, rng),
            output: Dense::init(hidden, vocab_size, scale, rng),
        }
    }

    pub fn hidden(&self) -> usize {
        self.decoder.hidden
    }

    pub fn vocab_size(&self) -> usize {
        self.output.out_dim
    }

    fn encode(&self, input: &[usize], pad: usize) -> (BiLstmTrace<F>, Vec<F>, Vec<F>) {
        let xs: Vec<StepInput<'_, F>> = input.iter().map(|&t| token_input(t, pad)).collect();
        let trace = self.encoder.run(&xs);
        let enc_state = trace.final_state();
        let dec_init = self.bridge.forward(&enc_state);
        (trace, enc_state, dec_init)
    }

    /// Mean cross-entropy of a teacher-forced target (`&…$` token ids).
    /// Accumulates gradients into `grads` when given.
    pub fn loss_and_grad(
        &self,
        input: &[usize],
        target: &[usize],
        pad: usize,
        grads: Option<&mut Seq2SeqParams<F>>,
    ) -> F {
        let h = self.hidden();
        let (trace, enc_state, dec_init) = self.encode(input, pad);
        let steps = target.len() - 1;
        let scale = F::one() / F::from_f64(steps as f64);
        let mut caches: Vec<StepCache<F>> = Vec::with_capacity(steps);
        let mut probs: Vec<Vec<F>> = Vec::with_capacity(steps);
        let mut loss = F::zero();
        for t in 0..steps {
            let step = match caches.last() {
                Some(p) => self
                    .decoder
                    .forward(token_input(target[t], pad), &p.h, &p.c),
                None => self.decoder.forward(
                    token_input(target[t], pad),
                    &dec_init[..h],
                    &dec_init[h..],
                ),
            };
            let mut p = self.output.forward(&step.h);
            softmax_in_place(&mut p);
            loss = loss - p[target[t + 1]].max(F::min_positive_value()).ln();
            caches.push(step);
            probs.push(p);
        }
        let Some(grads) = grads else {
            return loss * scale;
        };
        let mut dh = vec![F::zero(); h];
        let mut dc = vec![F::zero(); h];
        for t in (0..steps).rev() {
            let mut dlogits = std::mem::take(&mut probs[t]);
            dlogits[target[t + 1]] = dlogits[target[t + 1]] - F::one();
            for d in dlogits.iter_mut() {
                *d = *d * scale;
            }
            let dh_out = self
                .output
                .backward(&caches[t].h, &dlogits, &mut grads.output);
            for (a, b) in dh.iter_mut().zip(&dh_out) {
                *a = *a + *b;
            }
            let (a, b) = self
                .decoder
                .backward(&caches[t], &dh, &dc, &mut grads.decoder);
            dh = a;
            dc = b;
        }
        let mut d_init = dh;
        d_init.extend_from_slice(&dc);
        let d_enc = self.bridge.backward(&enc_state, &d_init, &mut grads.bridge);
        self.encoder
            .backward(&trace, &[], &d_enc, &mut grads.encoder);
        loss * scale
    }

    /// Greedy decoding from `&`, capped at `max_steps` emitted tokens.
    /// Returns emitted token ids (including a final `$` if produced) and the
    /// softmax of every step.
    pub fn decode(
        &self,
        input: &[usize],
        start: usize,
        end: usize,
        pad: usize,
        max_steps: usize,
    ) -> (Vec<usize>, Vec<Vec<F>>) {
        let h = self.hidden();
        let (_, _, dec_init) = self.encode(input, pad);
        let mut state = (dec_init[..h].to_vec(), dec_init[h..].to_vec());
        let mut prev = start;
        let mut out = Vec::new();
        let mut dists = Vec::new();
        for _ in 0..max_steps {
            let step = self
                .decoder
                .forward(token_input(prev, pad), &state.0, &state.1);
            let mut p = self.output.forward(&step.h);
            softmax_in_place(&mut p);
            let next = argmax(&p);
            dists.push(p);
            out.push(next);
            if next == end {
                break;
            }
            prev = next;
            state = (step.h, step.c);
        }
        (out, dists)
    }
}

fn token_input<'a, F>(token: usize, pad: usize) -> StepInput<'a, F> {
    if token == pad {
        StepInput::Zero
    } else {
        StepInput::OneHot(token)
    }
}

impl<F: Scalar> Parameters<F> for Seq2SeqParams<F> {
    fn tensors(&self) -> Vec<&[F]> {
        let mut v: Vec<&[F]> = Vec::with_capacity(13);
        v.extend(self.encoder.fwd.tensors());
        v.extend(self.encoder.bwd.tensors());
        v.extend(self.bridge.tensors());
        v.extend(self.decoder.tensors());
        v.extend(self.output.tensors());
        v
    }

    fn tensors_mut(&mut self) -> Vec<&mut [F]> {
        let mut v: Vec<&mut [F]> = Vec::with_capacity(13);
        v.extend(self.encoder.fwd.tensors_mut());
        v.extend(self.encoder.bwd.tensors_mut());
        v.extend(self.bridge.tensors_mut());
        v.extend(self.decoder.tensors_mut());
        v.extend(self.output.tensors_mut());
        v
    }

    fn zeros_like(&self) -> Self {
        Seq2SeqParams::zeros(self.vocab_size(), self.hidden())
    }
}

/// A trained (or trainable) character seq2seq network with its vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Seq2SeqModel<F = f32> {
    pub vocab: Vocabulary,
    pub params: Seq2SeqParams<F>,
    pub config: TrainConfig,
}

impl<F: Scalar> Seq2SeqModel<F> {
    /// Freshly initialized from `config.seed`.
    pub fn new(vocab: Vocabulary, config: TrainConfig) -> Self {
        let mut rng = config.rng();
        let params = Seq2SeqParams::init(vocab.len(), config.hidden_size, INIT_SCALE, &mut rng);
        Seq2SeqModel {
            vocab,
            params,
            config,
        }
    }

    pub fn encode_input(&self, input: &str) -> Result<Vec<usize>, NeuralError> {
        input
            .chars()
            .map(|c| self.vocab.index_of(c).ok_or(NeuralError::VocabMiss(c)))
            .collect()
    }

    /// Greedy decoding: start at `&`, emit the argmax token each step, stop
    /// at `$` or after `|input| + max_decode_margin` tokens. Markers are
    /// stripped from the result.
    pub fn greedy_decode(&self, input: &str) -> Result<String, NeuralError> {
        Ok(self.greedy_decode_with_probs(input)?.0)
    }

    pub fn greedy_decode_with_probs(
        &self,
        input: &str,
    ) -> Result<(String, Vec<Vec<F>>), NeuralError> {
        let ids = self.encode_input(input)?;
        if ids.is_empty() {
            return Err(NeuralError::EmptySequence);
        }
        let v = &self.vocab;
        let cap = ids.len() + self.config.max_decode_margin;
        let (out, dists) = self.params.decode(&ids, v.start(), v.end(), v.pad(), cap);
        let text = out
            .iter()
            .map(|&i| v.token(i))
            .filter(|&c| c != START && c != END && c != crate::corpus::PAD)
            .collect();
        Ok((text, dists))
    }

    /// Mean cross-entropy of one `(input, &target$)` pair.
    pub fn loss(&self, input: &str, target: &str) -> Result<F, NeuralError> {
        let x = self.encode_input(input)?;
        let y = self.encode_input(target)?;
        check_target(&y, &self.vocab)?;
        Ok(self.params.loss_and_grad(&x, &y, self.vocab.pad(), None))
    }
}

pub(crate) fn check_target(target: &[usize], vocab: &Vocabulary) -> Result<(), NeuralError> {
    if target.len() < 2 || target[0] != vocab.start() || *target.last().unwrap() != vocab.end() {
        return Err(NeuralError::MalformedTarget);
    }
    Ok(())
}
