//! Small recurrent networks with hand-written backward passes.

pub mod checkpoint;
pub mod gradcheck;
pub mod layers;
pub mod optim;
pub mod scalar;
pub mod seq2seq;
pub mod tagger;
pub mod train;

use thiserror::Error;

pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, load_seq2seq, load_tagger,
    save_checkpoint, CheckpointError, CheckpointHeader, ModelKind, SavedModel,
};
pub use gradcheck::{gradient_check, CheckKind, CheckSize, GradCheckReport};
pub use layers::{bilstm_encode, lstm_step, BiLstm, Dense, LstmCell};
pub use optim::{clip_global_norm, rmsprop_update, RmsProp};
pub use scalar::Scalar;
pub use seq2seq::{Seq2SeqModel, Seq2SeqParams};
pub use tagger::{TaggerModel, TaggerParams};
pub use train::{fit, history_csv, train_seq2seq, train_tagger, EpochRecord, TrainConfig};

/// Half-width of the uniform weight initialization.
pub const INIT_SCALE: f64 = 0.08;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuralError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty sequence")]
    EmptySequence,
    #[error("character {0:?} is not in the vocabulary")]
    VocabMiss(char),
    #[error("target must start with the start token and end with the end token")]
    MalformedTarget,
    #[error("input has {input} positions but target has {target}")]
    LengthMismatch { input: usize, target: usize },
    #[error("no training examples")]
    EmptyDataset,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },
}

/// Flat view of a model's trainable tensors, in a fixed order.
pub trait Parameters<F> {
    fn tensors(&self) -> Vec<&[F]>;
    fn tensors_mut(&mut self) -> Vec<&mut [F]>;
    fn zeros_like(&self) -> Self;
}
