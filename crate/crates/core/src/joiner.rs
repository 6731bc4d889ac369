//! Sandhi generation on truncated word pairs.
//!
//! Only the last `n` characters of the first word and the first `m` of the
//! second reach the network; the rest is copied around its output.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{wrap_target, CorpusError, SandhiTriple, Vocabulary, SEP};
use crate::neuralnet::checkpoint::{self, CheckpointError, ModelKind, SavedModel};
use crate::neuralnet::{train_seq2seq, EpochRecord, NeuralError, Seq2SeqModel, TrainConfig};
use crate::translit::{Slp1String, TranslitError};

#[derive(Debug, Error)]
pub enum JoinError {
    #[error("empty word")]
    EmptyWord,
    #[error("character {0:?} is not in the joiner vocabulary")]
    VocabMiss(char),
    #[error("decoded core {0:?} is empty, contains '+' or is not SLP1")]
    MalformedDecode(String),
    #[error("invalid joiner configuration: {0}")]
    InvalidConfig(String),
    #[error("no training examples")]
    EmptyDataset,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Neural(NeuralError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

impl From<NeuralError> for JoinError {
    fn from(e: NeuralError) -> Self {
        match e {
            NeuralError::VocabMiss(c) => JoinError::VocabMiss(c),
            NeuralError::EmptyDataset => JoinError::EmptyDataset,
            other => JoinError::Neural(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JoinerConfig {
    /// Trailing characters of `w1` fed to the network.
    pub n: usize,
    /// Leading characters of `w2` fed to the network.
    pub m: usize,
    pub train: TrainConfig,
}

impl Default for JoinerConfig {
    fn default() -> Self {
        JoinerConfig {
            n: 5,
            m: 2,
            train: TrainConfig::joiner(),
        }
    }
}

impl JoinerConfig {
    /// Large enough that no word is truncated: the untruncated baseline.
    pub const FULL_WORD: usize = usize::MAX / 2;

    pub fn validate(&self) -> Result<(), JoinError> {
        if self.n < 2 || self.m < 1 {
            return Err(JoinError::InvalidConfig(format!(
                "need n >= 2 and m >= 1, got n={} m={}",
                self.n, self.m
            )));
        }
        self.train.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationPlan {
    pub prefix: String,
    pub t1: String,
    pub t2: String,
    pub suffix: String,
}

impl TruncationPlan {
    /// The network input `t1+t2`.
    pub fn input(&self) -> String {
        format!("{}{SEP}{}", self.t1, self.t2)
    }
}

pub fn truncate_pair(w1: &str, w2: &str, n: usize, m: usize) -> Result<TruncationPlan, JoinError> {
    if w1.is_empty() || w2.is_empty() {
        return Err(JoinError::EmptyWord);
    }
    let cut1 = w1.len().saturating_sub(n);
    let cut2 = w2.len().min(m);
    Ok(TruncationPlan {
        prefix: w1[..cut1].to_string(),
        t1: w1[cut1..].to_string(),
        t2: w2[..cut2].to_string(),
        suffix: w2[cut2..].to_string(),
    })
}

/// Network input and target core for one triple. The core is the compound
/// minus the prefix and suffix of the truncation plan.
pub fn training_pair(
    t: &SandhiTriple,
    n: usize,
    m: usize,
) -> Result<(String, String), CorpusError> {
    let plan = truncate_pair(t.w1.as_str(), t.w2.as_str(), n, m).map_err(|_| mismatch(t))?;
    let cw = t.cw.as_str();
    if cw.len() < plan.prefix.len() + plan.suffix.len()
        || !cw.starts_with(&plan.prefix)
        || !cw.ends_with(&plan.suffix)
    {
        return Err(mismatch(t));
    }
    let core = &cw[plan.prefix.len()..cw.len() - plan.suffix.len()];
    if core.is_empty() {
        return Err(mismatch(t));
    }
    Ok((plan.input(), core.to_string()))
}

fn mismatch(t: &SandhiTriple) -> CorpusError {
    CorpusError::CoreMismatch {
        w1: t.w1.to_string(),
        w2: t.w2.to_string(),
        cw: t.cw.to_string(),
    }
}

/// A trained joiner with the truncation lengths it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinerModel {
    pub model: Seq2SeqModel,
    pub n: usize,
    pub m: usize,
}

impl JoinerModel {
    pub fn join(&self, w1: &Slp1String, w2: &Slp1String) -> Result<Slp1String, JoinError> {
        join(&self.model, w1, w2, self.n, self.m)
    }

    pub fn save(&self, path: &Path) -> Result<(), JoinError> {
        let mut extra = BTreeMap::new();
        extra.insert("n".to_string(), self.n.into());
        extra.insert("m".to_string(), self.m.into());
        checkpoint::save_checkpoint(
            path,
            ModelKind::Joiner,
            &SavedModel::Seq2Seq(self.model.clone()),
            extra,
        )?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, JoinError> {
        let (header, model) = checkpoint::load_seq2seq(path, ModelKind::Joiner)?;
        let get = |k: &str| {
            header
                .extra
                .get(k)
                .and_then(|v| v.as_u64())
                .map(|v| v as usize)
                .ok_or_else(|| CheckpointError::Malformed(format!("joiner checkpoint lacks {k:?}")))
        };
        Ok(JoinerModel {
            n: get("n")?,
            m: get("m")?,
            model,
        })
    }
}

/// `prefix ++ decode(t1+t2) ++ suffix`.
pub fn join(
    model: &Seq2SeqModel,
    w1: &Slp1String,
    w2: &Slp1String,
    n: usize,
    m: usize,
) -> Result<Slp1String, JoinError> {
    let plan = truncate_pair(w1.as_str(), w2.as_str(), n, m)?;
    let core = model.greedy_decode(&plan.input())?;
    if core.is_empty() || core.contains(SEP) {
        return Err(JoinError::MalformedDecode(core));
    }
    let joined = format!("{}{core}{}", plan.prefix, plan.suffix);
    Slp1String::new(&joined).map_err(|_: TranslitError| JoinError::MalformedDecode(core))
}

pub fn training_data(
    triples: &[SandhiTriple],
    n: usize,
    m: usize,
) -> Result<Vec<(String, String)>, CorpusError> {
    triples
        .iter()
        .map(|t| training_pair(t, n, m).map(|(x, core)| (x, wrap_target(&core))))
        .collect()
}

/// Vocabulary covering every character of the given triples.
pub fn triple_vocabulary<'a>(triples: impl IntoIterator<Item = &'a SandhiTriple>) -> Vocabulary {
    Vocabulary::build(
        triples
            .into_iter()
            .flat_map(|t| [t.w1.as_str(), t.w2.as_str(), t.cw.as_str()]),
    )
}

/// Trains on `(t1+t2 → &core$)`, reporting validation loss every epoch
/// when `val` is nonempty.
pub fn train_joiner(
    train: &[SandhiTriple],
    val: &[SandhiTriple],
    cfg: &JoinerConfig,
    on_epoch: impl FnMut(&EpochRecord),
) -> Result<(JoinerModel, Vec<EpochRecord>), JoinError> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(JoinError::EmptyDataset);
    }
    let vocab = triple_vocabulary(train.iter().chain(val));
    let data = training_data(train, cfg.n, cfg.m)?;
    let val_data = training_data(val, cfg.n, cfg.m)?;
    let model = Seq2SeqModel::new(vocab, cfg.train);
    let (model, history) = train_seq2seq(model, &data, &val_data, &cfg.train, on_epoch)?;
    Ok((
        JoinerModel {
            model,
            n: cfg.n,
            m: cfg.m,
        },
        history,
    ))
}
