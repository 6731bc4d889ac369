//! Mini-batch training with RMSProp, global-norm clipping and seeded
//! shuffling. Examples are processed one at a time at their own length, so
//! padding never enters a loss; batch gradients are summed in a fixed order.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::optim::{clip_global_norm, RmsProp};
use super::scalar::Scalar;
use super::seq2seq::{check_target, Seq2SeqModel, Seq2SeqParams};
use super::tagger::{TaggerModel, TaggerParams};
use super::{NeuralError, Parameters};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub hidden_size: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub max_decode_margin: usize,
    pub clip_norm: f64,
}

impl TrainConfig {
    fn base(hidden_size: usize, epochs: usize) -> Self {
        TrainConfig {
            hidden_size,
            batch_size: 64,
            epochs,
            learning_rate: 0.001,
            rho: 0.9,
            epsilon: 1e-7,
            seed: 0,
            max_decode_margin: 4,
            clip_norm: 5.0,
        }
    }

    /// Sandhi joiner: hidden 16, batch 64, 100 epochs.
    pub fn joiner() -> Self {
        Self::base(16, 100)
    }

    /// Stage-1 window tagger: hidden 64, batch 64, 40 epochs.
    pub fn tagger() -> Self {
        Self::base(64, 40)
    }

    /// Stage-2 window splitter: hidden 128, batch 64, 30 epochs.
    pub fn window_splitter() -> Self {
        Self::base(128, 30)
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        let bad = |what: &str| Err(NeuralError::InvalidConfig(what.to_string()));
        if self.hidden_size == 0 {
            return bad("hidden_size must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad("rho must lie in (0, 1)");
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad("epsilon must be positive");
        }
        if self.max_decode_margin == 0 {
            return bad("max_decode_margin must be positive");
        }
        if self.clip_norm.is_nan() || self.clip_norm <= 0.0 {
            return bad("clip_norm must be positive");
        }
        Ok(())
    }

    /// Generator for parameter initialization.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn shuffle_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(1);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
}

/// `epoch,train_loss,val_loss` with an empty cell when there is no
/// validation set.
pub fn history_csv(history: &[EpochRecord]) -> String {
    let mut s = String::from("epoch,train_loss,val_loss\n");
    for r in history {
        match r.val_loss {
            Some(v) => s.push_str(&format!("{},{},{}\n", r.epoch, r.train_loss, v)),
            None => s.push_str(&format!("{},{},\n", r.epoch, r.train_loss)),
        }
    }
    s
}

/// Something with a per-example loss and gradient.
pub trait Objective<F: Scalar>: Parameters<F> + Sized {
    type Example;
    fn example_loss(&self, ex: &Self::Example, grads: Option<&mut Self>) -> F;
}

pub struct SeqExample {
    pub input: Vec<usize>,
    pub target: Vec<usize>,
    pub pad: usize,
}

impl<F: Scalar> Objective<F> for Seq2SeqParams<F> {
    type Example = SeqExample;
    fn example_loss(&self, ex: &SeqExample, grads: Option<&mut Self>) -> F {
        self.loss_and_grad(&ex.input, &ex.target, ex.pad, grads)
    }
}

pub struct TagExample<F> {
    pub input: Vec<usize>,
    pub target: Vec<F>,
    pub pad: usize,
}

impl<F: Scalar> Objective<F> for TaggerParams<F> {
    type Example = TagExample<F>;
    fn example_loss(&self, ex: &TagExample<F>, grads: Option<&mut Self>) -> F {
        self.loss_and_grad(&ex.input, Some(&ex.target), ex.pad, grads)
            .0
    }
}

pub fn mean_loss<F: Scalar, P: Objective<F>>(params: &P, data: &[P::Example]) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    data.iter()
        .map(|ex| params.example_loss(ex, None).to_f64())
        .sum::<f64>()
        / data.len() as f64
}

/// Runs `cfg.epochs` epochs of shuffled mini-batch RMSProp. The reported
/// training loss of an epoch is the mean per-example loss seen while
/// training it; validation loss is measured after the epoch.
pub fn fit<F, P>(
    params: &mut P,
    train: &[P::Example],
    val: &[P::Example],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<Vec<EpochRecord>, NeuralError>
where
    F: Scalar,
    P: Objective<F>,
{
    cfg.validate()?;
    if train.is_empty() {
        return Err(NeuralError::EmptyDataset);
    }
    let mut rng = cfg.shuffle_rng();
    let mut opt = RmsProp::new(params, cfg.learning_rate, cfg.rho, cfg.epsilon);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0f64;
        for batch in order.chunks(cfg.batch_size) {
            let mut grads = params.zeros_like();
            for &i in batch {
                let loss = params.example_loss(&train[i], Some(&mut grads));
                total += loss.to_f64();
            }
            let scale = F::from_f64(1.0 / batch.len() as f64);
            for t in grads.tensors_mut() {
                for g in t.iter_mut() {
                    *g = *g * scale;
                }
            }
            clip_global_norm(&mut grads, cfg.clip_norm);
            opt.step(params, &grads);
        }
        let train_loss = total / train.len() as f64;
        if !train_loss.is_finite() {
            return Err(NeuralError::Diverged { epoch });
        }
        let record = EpochRecord {
            epoch,
            train_loss,
            val_loss: (!val.is_empty()).then(|| mean_loss(params, val)),
        };
        on_epoch(&record);
        history.push(record);
    }
    Ok(history)
}

fn seq_examples<F: Scalar>(
    model: &Seq2SeqModel<F>,
    data: &[(String, String)],
) -> Result<Vec<SeqExample>, NeuralError> {
    data.iter()
        .map(|(x, y)| {
            let input = model.encode_input(x)?;
            let target = model.encode_input(y)?;
            if input.is_empty() {
                return Err(NeuralError::EmptySequence);
            }
            check_target(&target, &model.vocab)?;
            Ok(SeqExample {
                input,
                target,
                pad: model.vocab.pad(),
            })
        })
        .collect()
}

/// Teacher-forced training on `(input, "&target$")` pairs with mean
/// categorical cross-entropy.
pub fn train_seq2seq<F: Scalar>(
    mut model: Seq2SeqModel<F>,
    data: &[(String, String)],
    val: &[(String, String)],
    cfg: &TrainConfig,
    on_epoch: impl FnMut(&EpochRecord),
) -> Result<(Seq2SeqModel<F>, Vec<EpochRecord>), NeuralError> {
    let train = seq_examples(&model, data)?;
    let val = seq_examples(&model, val)?;
    let history = fit(&mut model.params, &train, &val, cfg, on_epoch)?;
    model.config = *cfg;
    Ok((model, history))
}

fn tag_examples<F: Scalar>(
    model: &TaggerModel<F>,
    data: &[(String, Vec<u8>)],
) -> Result<Vec<TagExample<F>>, NeuralError> {
    data.iter()
        .map(|(x, y)| {
            let input: Vec<usize> = x
                .chars()
                .map(|c| model.vocab.index_of(c).ok_or(NeuralError::VocabMiss(c)))
                .collect::<Result<_, _>>()?;
            if input.len() != y.len() {
                return Err(NeuralError::LengthMismatch {
                    input: input.len(),
                    target: y.len(),
                });
            }
            if input.is_empty() {
                return Err(NeuralError::EmptySequence);
            }
            Ok(TagExample {
                input,
                target: y.iter().map(|&b| F::from_f64(b as f64)).collect(),
                pad: model.vocab.pad(),
            })
        })
        .collect()
}

/// Regresses per-character sigmoid outputs onto 0/1 targets with MSE.
pub fn train_tagger<F: Scalar>(
    mut model: TaggerModel<F>,
    data: &[(String, Vec<u8>)],
    val: &[(String, Vec<u8>)],
    cfg: &TrainConfig,
    on_epoch: impl FnMut(&EpochRecord),
) -> Result<(TaggerModel<F>, Vec<EpochRecord>), NeuralError> {
    let train = tag_examples(&model, data)?;
    let val = tag_examples(&model, val)?;
    let history = fit(&mut model.params, &train, &val, cfg, on_epoch)?;
    model.config = *cfg;
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Vocabulary;

    fn small(mut cfg: TrainConfig, hidden: usize, epochs: usize) -> TrainConfig {
        cfg.hidden_size = hidden;
        cfg.epochs = epochs;
        cfg.batch_size = 8;
        cfg
    }

    fn toy_seq_data() -> Vec<(String, String)> {
        // reverse three-letter strings
        let letters = ['a', 'b', 'c', 'd'];
        let mut data = Vec::new();
        for i in 0..50 {
            let s: String = (0..3)
                .map(|k| letters[(i * 7 + k * 3 + i / 4) % 4])
                .collect();
            let r: String = s.chars().rev().collect();
            data.push((s, format!("&{r}$")));
        }
        data
    }

    #[test]
    fn seq2seq_loss_decreases_and_is_finite() {
        let data = toy_seq_data();
        let vocab = Vocabulary::build(data.iter().flat_map(|(a, b)| [a.as_str(), b.as_str()]));
        let cfg = small(TrainConfig::joiner(), 16, 100);
        let model = Seq2SeqModel::<f32>::new(vocab, cfg);
        let (_, hist) = train_seq2seq(model, &data, &[], &cfg, |_| {}).unwrap();
        assert_eq!(hist.len(), 100);
        assert!(hist.iter().all(|r| r.train_loss.is_finite()));
        assert!(hist.last().unwrap().train_loss < hist[0].train_loss);
    }

    #[test]
    fn seq2seq_is_deterministic() {
        let data = toy_seq_data();
        let vocab = Vocabulary::build(data.iter().flat_map(|(a, b)| [a.as_str(), b.as_str()]));
        let cfg = small(TrainConfig::joiner(), 8, 3);
        let run = || {
            let model = Seq2SeqModel::<f32>::new(vocab.clone(), cfg);
            train_seq2seq(model, &data, &data[..5], &cfg, |_| {}).unwrap()
        };
        let (a, ha) = run();
        let (b, hb) = run();
        assert_eq!(a.params, b.params);
        assert_eq!(ha, hb);
    }

    #[test]
    fn single_example_overfits() {
        let data = vec![("vidyA+Al".to_string(), "&vidyAl$".to_string()); 4];
        let vocab = Vocabulary::build(data.iter().flat_map(|(a, b)| [a.as_str(), b.as_str()]));
        let mut cfg = small(TrainConfig::joiner(), 16, 500);
        cfg.batch_size = 4;
        let model = Seq2SeqModel::<f32>::new(vocab, cfg);
        let (model, _) = train_seq2seq(model, &data[..1], &[], &cfg, |_| {}).unwrap();
        assert_eq!(model.greedy_decode("vidyA+Al").unwrap(), "vidyAl");
    }

    #[test]
    fn seq2seq_errors() {
        let vocab = Vocabulary::build(["ab"]);
        let cfg = small(TrainConfig::joiner(), 4, 1);
        let model = Seq2SeqModel::<f32>::new(vocab, cfg);
        let bad = vec![("az".to_string(), "&a$".to_string())];
        assert!(matches!(
            train_seq2seq(model.clone(), &bad, &[], &cfg, |_| {}),
            Err(NeuralError::VocabMiss('z'))
        ));
        let unmarked = vec![("ab".to_string(), "ab".to_string())];
        assert!(matches!(
            train_seq2seq(model.clone(), &unmarked, &[], &cfg, |_| {}),
            Err(NeuralError::MalformedTarget)
        ));
        assert!(matches!(
            train_seq2seq(model, &[], &[], &cfg, |_| {}),
            Err(NeuralError::EmptyDataset)
        ));
    }

    #[test]
    fn tagger_constant_zero_targets() {
        let words = ["abcab", "cabba", "bca", "aabbcc"];
        let data: Vec<(String, Vec<u8>)> = words
            .iter()
            .map(|w| (w.to_string(), vec![0; w.len()]))
            .collect();
        let vocab = Vocabulary::build(words);
        let cfg = small(TrainConfig::tagger(), 8, 60);
        let model = TaggerModel::<f32>::new(vocab, cfg);
        let (model, hist) = train_tagger(model, &data, &[], &cfg, |_| {}).unwrap();
        assert!(hist[0].train_loss <= 0.25 + 1e-3);
        assert!(hist.last().unwrap().train_loss < hist[0].train_loss);
        for w in words {
            assert!(model.predict(w).unwrap().iter().all(|&s| s < 0.5));
        }
    }

    #[test]
    fn tagger_length_mismatch() {
        let vocab = Vocabulary::build(["ab"]);
        let cfg = small(TrainConfig::tagger(), 4, 1);
        let model = TaggerModel::<f32>::new(vocab, cfg);
        let data = vec![("ab".to_string(), vec![0u8])];
        assert!(matches!(
            train_tagger(model, &data, &[], &cfg, |_| {}),
            Err(NeuralError::LengthMismatch {
                input: 2,
                target: 1
            })
        ));
    }

    #[test]
    fn tagger_is_deterministic() {
        let data = vec![("abcab".to_string(), vec![0, 1, 1, 0, 0]); 3];
        let vocab = Vocabulary::build(["abc"]);
        let cfg = small(TrainConfig::tagger(), 6, 4);
        let run = || {
            train_tagger(
                TaggerModel::<f32>::new(vocab.clone(), cfg),
                &data,
                &[],
                &cfg,
                |_| {},
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn defaults_and_validation() {
        let j = TrainConfig::joiner();
        assert_eq!((j.hidden_size, j.batch_size, j.epochs), (16, 64, 100));
        let t = TrainConfig::tagger();
        assert_eq!((t.hidden_size, t.batch_size, t.epochs), (64, 64, 40));
        let w = TrainConfig::window_splitter();
        assert_eq!((w.hidden_size, w.batch_size, w.epochs), (128, 64, 30));
        assert_eq!((j.learning_rate, j.rho, j.epsilon), (0.001, 0.9, 1e-7));
        let mut bad = j;
        bad.epochs = 0;
        assert!(bad.validate().is_err());
        bad = j;
        bad.rho = 1.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn csv_layout() {
        let h = [
            EpochRecord {
                epoch: 1,
                train_loss: 0.5,
                val_loss: Some(0.25),
            },
            EpochRecord {
                epoch: 2,
                train_loss: 0.125,
                val_loss: None,
            },
        ];
        assert_eq!(
            history_csv(&h),
            "epoch,train_loss,val_loss\n1,0.5,0.25\n2,0.125,\n"
        );
    }
}
