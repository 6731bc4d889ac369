//! Sanskrit sandhi joining and splitting with character-level recurrent
//! models.

pub mod corpus;
pub mod eval;
pub mod joiner;
pub mod neuralnet;
pub mod oracle;
pub mod splitter;
pub mod translit;
