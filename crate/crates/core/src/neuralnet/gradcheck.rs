//! Central finite differences against the analytic gradients, in `f64`,
//! on every parameter of a small random model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::seq2seq::Seq2SeqParams;
use super::tagger::TaggerParams;
use super::train::{Objective, SeqExample, TagExample};
use super::Parameters;

/// Finite-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Denominator floor of the relative error, so parameters whose true
/// gradient is ~0 are judged on absolute error.
pub const REL_ERROR_FLOOR: f64 = 1e-6;
/// Weight scale for check instances; larger than training init so the
/// nonlinearities are exercised away from zero.
const CHECK_SCALE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckKind {
    Seq2Seq,
    Tagger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CheckSize {
    pub vocab: usize,
    pub hidden: usize,
    pub seq_len: usize,
    pub examples: usize,
}

impl Default for CheckSize {
    fn default() -> Self {
        CheckSize {
            vocab: 8,
            hidden: 5,
            seq_len: 6,
            examples: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub parameters: usize,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub max_abs_grad: f64,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(REL_ERROR_FLOOR)
}

/// Compares the analytic gradient of the summed example loss with central
/// differences on every parameter.
pub fn check_objective<P>(params: &mut P, data: &[P::Example]) -> GradCheckReport
where
    P: Objective<f64> + Clone,
{
    let mut grads = params.zeros_like();
    for ex in data {
        params.example_loss(ex, Some(&mut grads));
    }
    let analytic: Vec<f64> = grads
        .tensors()
        .iter()
        .flat_map(|t| t.iter().copied())
        .collect();
    let total = |p: &P| data.iter().map(|ex| p.example_loss(ex, None)).sum::<f64>();

    let mut report = GradCheckReport {
        parameters: analytic.len(),
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        max_abs_grad: 0.0,
    };
    let mut flat = 0;
    let n_tensors = params.tensors().len();
    for ti in 0..n_tensors {
        let len = params.tensors()[ti].len();
        for k in 0..len {
            let orig = params.tensors()[ti][k];
            params.tensors_mut()[ti][k] = orig + FD_STEP;
            let plus = total(params);
            params.tensors_mut()[ti][k] = orig - FD_STEP;
            let minus = total(params);
            params.tensors_mut()[ti][k] = orig;
            let numeric = (plus - minus) / (2.0 * FD_STEP);
            let a = analytic[flat];
            report.max_rel_error = report.max_rel_error.max(relative_error(a, numeric));
            report.max_abs_error = report.max_abs_error.max((a - numeric).abs());
            report.max_abs_grad = report.max_abs_grad.max(a.abs().max(numeric.abs()));
            flat += 1;
        }
    }
    report
}

fn random_tokens(rng: &mut ChaCha8Rng, len: usize, vocab: usize) -> Vec<usize> {
    (0..len).map(|_| rng.gen_range(0..vocab)).collect()
}

/// Builds a random instance of the given shape and checks it. Token
/// `vocab - 1` plays PAD so the zero-input path is covered too.
pub fn gradient_check(kind: CheckKind, size: CheckSize, seed: u64) -> GradCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pad = size.vocab - 1;
    match kind {
        CheckKind::Seq2Seq => {
            let mut params =
                Seq2SeqParams::<f64>::init(size.vocab, size.hidden, CHECK_SCALE, &mut rng);
            randomize_biases(&mut params, &mut rng);
            let data: Vec<SeqExample> = (0..size.examples)
                .map(|i| {
                    let in_len = (size.seq_len - i).max(1);
                    let mut input = random_tokens(&mut rng, in_len, size.vocab);
                    if i == 0 {
                        input[0] = pad;
                    }
                    let mut target = random_tokens(&mut rng, size.seq_len, size.vocab - 1);
                    target[0] = 0;
                    SeqExample { input, target, pad }
                })
                .collect();
            check_objective(&mut params, &data)
        }
        CheckKind::Tagger => {
            let mut params =
                TaggerParams::<f64>::init(size.vocab, size.hidden, CHECK_SCALE, &mut rng);
            randomize_biases(&mut params, &mut rng);
            let data: Vec<TagExample<f64>> = (0..size.examples)
                .map(|i| {
                    let len = (size.seq_len - i).max(1);
                    let input = random_tokens(&mut rng, len, size.vocab);
                    let target = (0..len).map(|_| f64::from(rng.gen_range(0..2u8))).collect();
                    TagExample { input, target, pad }
                })
                .collect();
            check_objective(&mut params, &data)
        }
    }
}

fn randomize_biases<P: Parameters<f64>>(params: &mut P, rng: &mut ChaCha8Rng) {
    for t in params.tensors_mut() {
        for v in t.iter_mut() {
            if *v == 0.0 {
                *v = rng.gen_range(-0.2..0.2);
            }
        }
    }
}
