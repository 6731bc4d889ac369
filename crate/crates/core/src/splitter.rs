//! Two-stage sandhi split.
//!
//! Stage 1 scores every compound character with the tagger and picks the
//! fixed-length span with the highest score sum. Stage 2 decodes that span
//! into `ps1+ps2`, and the untouched flanks are glued back on.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{window_labels, wrap_target, SandhiTriple, WindowAnnotation, MAX_WINDOW, SEP};
use crate::joiner::triple_vocabulary;
use crate::neuralnet::checkpoint::{self, CheckpointError, ModelKind, SavedModel};
use crate::neuralnet::{
    train_seq2seq, train_tagger, EpochRecord, NeuralError, Seq2SeqModel, TaggerModel, TrainConfig,
};
use crate::translit::Slp1String;

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("compound {0:?} is shorter than two characters")]
    WordTooShort(String),
    #[error("decoded window {0:?} has no '+'")]
    NoSeparator(String),
    #[error("decoded window {0:?} is malformed")]
    MalformedDecode(String),
    #[error("character {0:?} is not in the model vocabulary")]
    VocabMiss(char),
    #[error("no training examples")]
    EmptyDataset,
    #[error(transparent)]
    Neural(NeuralError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

impl From<NeuralError> for SplitError {
    fn from(e: NeuralError) -> Self {
        match e {
            NeuralError::VocabMiss(c) => SplitError::VocabMiss(c),
            NeuralError::EmptyDataset => SplitError::EmptyDataset,
            other => SplitError::Neural(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpan {
    pub start: usize,
    pub length: usize,
    pub score: f64,
}

impl WindowSpan {
    pub fn end(&self) -> usize {
        self.start + self.length
    }

    /// True when the span contains the whole gold window.
    pub fn covers(&self, gold: &WindowAnnotation) -> bool {
        self.start <= gold.start() && gold.end() <= self.end()
    }

    /// True when start and length both equal the gold window's.
    pub fn matches(&self, gold: &WindowAnnotation) -> bool {
        self.start == gold.start() && self.length == gold.window.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub pw1: String,
    pub pw2: String,
    pub window: WindowSpan,
    pub ps1: String,
    pub ps2: String,
    pub nw1: String,
    pub nw2: String,
}

/// Inference span length for a compound of `len` characters.
pub fn span_length(len: usize) -> usize {
    len.min(MAX_WINDOW)
}

/// Start and sum of the leftmost contiguous `length`-span with the largest
/// sum. Sums are kept in `f64` and compared strictly, so equal sums keep the
/// earlier span.
pub fn best_span(scores: &[f64], length: usize) -> (usize, f64) {
    assert!(length >= 1 && length <= scores.len());
    let (mut best, mut best_sum) = (0, f64::NEG_INFINITY);
    for s in 0..=scores.len() - length {
        let sum: f64 = scores[s..s + length].iter().sum();
        if sum > best_sum {
            best = s;
            best_sum = sum;
        }
    }
    (best, best_sum)
}

pub fn predict_window(tagger: &TaggerModel, compound: &str) -> Result<WindowSpan, SplitError> {
    let len = compound.chars().count();
    if len < 2 {
        return Err(SplitError::WordTooShort(compound.to_string()));
    }
    let scores: Vec<f64> = tagger
        .predict(compound)?
        .into_iter()
        .map(f64::from)
        .collect();
    let length = span_length(len);
    let (start, score) = best_span(&scores, length);
    Ok(WindowSpan {
        start,
        length,
        score,
    })
}

/// Decodes a window into its two parts, split at the first `+`.
pub fn split_window(model: &Seq2SeqModel, window: &str) -> Result<(String, String), SplitError> {
    let decoded = model.greedy_decode(window)?;
    parse_split(&decoded)
}

pub fn parse_split(decoded: &str) -> Result<(String, String), SplitError> {
    let Some((ps1, ps2)) = decoded.split_once(SEP) else {
        return Err(SplitError::NoSeparator(decoded.to_string()));
    };
    if ps2.contains(SEP) {
        return Err(SplitError::MalformedDecode(decoded.to_string()));
    }
    Ok((ps1.to_string(), ps2.to_string()))
}

pub fn split(
    tagger: &TaggerModel,
    wsplit: &Seq2SeqModel,
    compound: &str,
) -> Result<SplitResult, SplitError> {
    let span = predict_window(tagger, compound)?;
    // SLP1 is ASCII, so byte and char offsets agree
    let window = &compound[span.start..span.end()];
    let (ps1, ps2) = split_window(wsplit, window)?;
    let nw1 = compound[..span.start].to_string();
    let nw2 = compound[span.end()..].to_string();
    Ok(SplitResult {
        pw1: format!("{nw1}{ps1}"),
        pw2: format!("{ps2}{nw2}"),
        window: span,
        ps1,
        ps2,
        nw1,
        nw2,
    })
}

/// Both stages with their shared vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Splitter {
    pub tagger: TaggerModel,
    pub wsplit: Seq2SeqModel,
}

impl Splitter {
    pub fn split(&self, compound: &str) -> Result<SplitResult, SplitError> {
        split(&self.tagger, &self.wsplit, compound)
    }

    pub fn split_word(&self, compound: &Slp1String) -> Result<SplitResult, SplitError> {
        self.split(compound.as_str())
    }

    pub fn load(tagger: &Path, wsplit: &Path) -> Result<Self, SplitError> {
        let (_, tagger) = checkpoint::load_tagger(tagger)?;
        let (_, wsplit) = checkpoint::load_seq2seq(wsplit, ModelKind::Wsplitter)?;
        Ok(Splitter { tagger, wsplit })
    }
}

pub fn save_tagger(model: &TaggerModel, path: &Path) -> Result<(), SplitError> {
    checkpoint::save_checkpoint(
        path,
        ModelKind::Tagger,
        &SavedModel::Tagger(model.clone()),
        Default::default(),
    )?;
    Ok(())
}

pub fn save_wsplitter(model: &Seq2SeqModel, path: &Path) -> Result<(), SplitError> {
    checkpoint::save_checkpoint(
        path,
        ModelKind::Wsplitter,
        &SavedModel::Seq2Seq(model.clone()),
        Default::default(),
    )?;
    Ok(())
}

/// Stage-1 examples: compound and its 0/1 window mask.
pub fn stage1_data(annotated: &[(SandhiTriple, WindowAnnotation)]) -> Vec<(String, Vec<u8>)> {
    annotated
        .iter()
        .map(|(t, a)| {
            (
                t.cw.to_string(),
                window_labels(t.cw.len(), a.start(), a.end()),
            )
        })
        .collect()
}

/// Stage-2 `(window, "&tw1+tw2$")` pairs for one triple: the gold window,
/// and with `covering` also every inference-length span that contains it,
/// each paired with the parts of `w1` and `w2` it spans.
pub fn stage2_pairs(
    t: &SandhiTriple,
    a: &WindowAnnotation,
    covering: bool,
) -> Vec<(String, String)> {
    let (w1, w2, cw) = (t.w1.as_str(), t.w2.as_str(), t.cw.as_str());
    let gold = (
        a.window.to_string(),
        wrap_target(&format!("{}{SEP}{}", a.tw1, a.tw2)),
    );
    let mut out = vec![gold];
    if !covering {
        return out;
    }
    let len = span_length(cw.len());
    if len == a.window.len() && cw.len() == len {
        return out;
    }
    let lo = a.end().saturating_sub(len);
    let hi = a.start().min(cw.len() - len);
    for s in lo..=hi {
        if s == a.start() && len == a.window.len() {
            continue;
        }
        let tail = cw.len() - s - len;
        let ps1 = &w1[s..];
        let ps2 = &w2[..w2.len() - tail];
        out.push((
            cw[s..s + len].to_string(),
            wrap_target(&format!("{ps1}{SEP}{ps2}")),
        ));
    }
    out
}

pub fn stage2_data(
    annotated: &[(SandhiTriple, WindowAnnotation)],
    covering: bool,
) -> Vec<(String, String)> {
    annotated
        .iter()
        .flat_map(|(t, a)| stage2_pairs(t, a, covering))
        .collect()
}

fn vocabulary(
    train: &[(SandhiTriple, WindowAnnotation)],
    val: &[(SandhiTriple, WindowAnnotation)],
) -> crate::corpus::Vocabulary {
    triple_vocabulary(train.iter().chain(val).map(|(t, _)| t))
}

pub fn train_stage1(
    train: &[(SandhiTriple, WindowAnnotation)],
    val: &[(SandhiTriple, WindowAnnotation)],
    cfg: &TrainConfig,
    on_epoch: impl FnMut(&EpochRecord),
) -> Result<(TaggerModel, Vec<EpochRecord>), SplitError> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(SplitError::EmptyDataset);
    }
    let model = TaggerModel::new(vocabulary(train, val), *cfg);
    Ok(train_tagger(
        model,
        &stage1_data(train),
        &stage1_data(val),
        cfg,
        on_epoch,
    )?)
}

/// Trains the window splitter. With `covering`, the gold windows are joined
/// by the inference-length spans around them, which is what the model sees
/// after Stage 1.
pub fn train_stage2(
    train: &[(SandhiTriple, WindowAnnotation)],
    val: &[(SandhiTriple, WindowAnnotation)],
    cfg: &TrainConfig,
    covering: bool,
    on_epoch: impl FnMut(&EpochRecord),
) -> Result<(Seq2SeqModel, Vec<EpochRecord>), SplitError> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(SplitError::EmptyDataset);
    }
    let model = Seq2SeqModel::new(vocabulary(train, val), *cfg);
    Ok(train_seq2seq(
        model,
        &stage2_data(train, covering),
        &stage2_data(val, covering),
        cfg,
        on_epoch,
    )?)
}
