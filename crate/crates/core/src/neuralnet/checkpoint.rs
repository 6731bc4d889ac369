//! Binary checkpoint format.
//!
//! ```text
//! "SKTSNDH1"            8-byte magic
//! u32 LE                header length in bytes
//! UTF-8 JSON            CheckpointHeader
//! f32 LE * N            parameters, tensor by tensor
//! u32 LE                CRC32 of every preceding byte
//! ```
//!
//! Seq2seq tensors: encoder-fwd W,U,b; encoder-bwd W,U,b; bridge W,b;
//! decoder W,U,b; output W,b. Tagger tensors: encoder-fwd W,U,b;
//! encoder-bwd W,U,b; head W,b. LSTM gate blocks are ordered i,f,c,o and all
//! matrices are row-major, so the vocabulary order in the header fixes the
//! meaning of every input and output column.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::seq2seq::{Seq2SeqModel, Seq2SeqParams};
use super::tagger::{TaggerModel, TaggerParams};
use super::train::TrainConfig;
use super::Parameters;
use crate::corpus::Vocabulary;

pub const MAGIC: &[u8; 8] = b"SKTSNDH1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("checkpoint format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("checksum mismatch: file is truncated or corrupted")]
    ChecksumMismatch,
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
    #[error("expected a {expected} checkpoint, found {found}")]
    WrongKind {
        expected: ModelKind,
        found: ModelKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Joiner,
    Tagger,
    Wsplitter,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Joiner => "joiner",
            ModelKind::Tagger => "tagger",
            ModelKind::Wsplitter => "wsplitter",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub version: u32,
    pub kind: ModelKind,
    pub vocab_size: usize,
    pub hidden_size: usize,
    pub vocab: Vec<String>,
    pub train_config: TrainConfig,
    /// Kind-specific settings, such as the joiner's truncation lengths.
    #[serde(default)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    Seq2Seq(Seq2SeqModel),
    Tagger(TaggerModel),
}

impl SavedModel {
    fn vocab(&self) -> &Vocabulary {
        match self {
            SavedModel::Seq2Seq(m) => &m.vocab,
            SavedModel::Tagger(m) => &m.vocab,
        }
    }

    fn hidden(&self) -> usize {
        match self {
            SavedModel::Seq2Seq(m) => m.params.hidden(),
            SavedModel::Tagger(m) => m.params.hidden(),
        }
    }

    fn config(&self) -> TrainConfig {
        match self {
            SavedModel::Seq2Seq(m) => m.config,
            SavedModel::Tagger(m) => m.config,
        }
    }

    fn tensors(&self) -> Vec<&[f32]> {
        match self {
            SavedModel::Seq2Seq(m) => m.params.tensors(),
            SavedModel::Tagger(m) => m.params.tensors(),
        }
    }
}

/// Serializes a model to bytes.
pub fn encode_checkpoint(
    kind: ModelKind,
    model: &SavedModel,
    extra: BTreeMap<String, serde_json::Value>,
) -> Vec<u8> {
    let header = CheckpointHeader {
        version: FORMAT_VERSION,
        kind,
        vocab_size: model.vocab().len(),
        hidden_size: model.hidden(),
        vocab: model.vocab().to_tokens(),
        train_config: model.config(),
        extra,
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for t in model.tensors() {
        for v in t {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

/// Parses checkpoint bytes, verifying magic, checksum, version and sizes.
pub fn decode_checkpoint(bytes: &[u8]) -> Result<(CheckpointHeader, SavedModel), CheckpointError> {
    let prefix = bytes.len().min(MAGIC.len());
    if bytes[..prefix] != MAGIC[..prefix] {
        return Err(CheckpointError::BadMagic);
    }
    if bytes.len() < MAGIC.len() + 8 {
        return Err(CheckpointError::ChecksumMismatch);
    }
    let (body, crc_bytes) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(crc_bytes.try_into().unwrap());
    if crc32fast::hash(body) != stored {
        return Err(CheckpointError::ChecksumMismatch);
    }
    let header_len = u32::from_le_bytes(body[8..12].try_into().unwrap()) as usize;
    let header_end = 12usize
        .checked_add(header_len)
        .filter(|&e| e <= body.len())
        .ok_or_else(|| CheckpointError::Malformed("header length past end of file".into()))?;
    let version: serde_json::Value = serde_json::from_slice(&body[12..header_end])
        .map_err(|e| CheckpointError::Malformed(e.to_string()))?;
    let found = version.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if found != FORMAT_VERSION {
        return Err(CheckpointError::VersionMismatch {
            found,
            expected: FORMAT_VERSION,
        });
    }
    let header: CheckpointHeader =
        serde_json::from_value(version).map_err(|e| CheckpointError::Malformed(e.to_string()))?;
    let vocab = Vocabulary::from_tokens(&header.vocab)
        .map_err(|e| CheckpointError::Malformed(e.to_string()))?;
    if vocab.len() != header.vocab_size {
        return Err(CheckpointError::Malformed(
            "vocab_size disagrees with vocab".into(),
        ));
    }
    let payload = &body[header_end..];
    let (v, h) = (header.vocab_size, header.hidden_size);
    let mut model = match header.kind {
        ModelKind::Joiner | ModelKind::Wsplitter => SavedModel::Seq2Seq(Seq2SeqModel {
            vocab,
            params: Seq2SeqParams::zeros(v, h),
            config: header.train_config,
        }),
        ModelKind::Tagger => SavedModel::Tagger(TaggerModel {
            vocab,
            params: TaggerParams::zeros(v, h),
            config: header.train_config,
        }),
    };
    let tensors = match &mut model {
        SavedModel::Seq2Seq(m) => m.params.tensors_mut(),
        SavedModel::Tagger(m) => m.params.tensors_mut(),
    };
    let expected: usize = tensors.iter().map(|t| t.len() * 4).sum();
    if payload.len() != expected {
        return Err(CheckpointError::Malformed(format!(
            "payload is {} bytes, expected {expected}",
            payload.len()
        )));
    }
    let mut words = payload.chunks_exact(4);
    for t in tensors {
        for slot in t.iter_mut() {
            *slot = f32::from_le_bytes(words.next().unwrap().try_into().unwrap());
        }
    }
    Ok((header, model))
}

pub fn save_checkpoint(
    path: &Path,
    kind: ModelKind,
    model: &SavedModel,
    extra: BTreeMap<String, serde_json::Value>,
) -> Result<(), CheckpointError> {
    fs::write(path, encode_checkpoint(kind, model, extra))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(CheckpointHeader, SavedModel), CheckpointError> {
    decode_checkpoint(&fs::read(path)?)
}

/// Loads a seq2seq checkpoint of the given kind.
pub fn load_seq2seq(
    path: &Path,
    kind: ModelKind,
) -> Result<(CheckpointHeader, Seq2SeqModel), CheckpointError> {
    match load_checkpoint(path)? {
        (h, SavedModel::Seq2Seq(m)) if h.kind == kind => Ok((h, m)),
        (h, _) => Err(CheckpointError::WrongKind {
            expected: kind,
            found: h.kind,
        }),
    }
}

pub fn load_tagger(path: &Path) -> Result<(CheckpointHeader, TaggerModel), CheckpointError> {
    match load_checkpoint(path)? {
        (h, SavedModel::Tagger(m)) => Ok((h, m)),
        (h, _) => Err(CheckpointError::WrongKind {
            expected: ModelKind::Tagger,
            found: h.kind,
        }),
    }
}
