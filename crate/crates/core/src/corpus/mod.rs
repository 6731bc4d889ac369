//! Sandhi corpora: parsing, cleaning, sandhi-window annotation, dataset
//! splits, and per-stage training examples.

mod dataset;
mod stage;
mod vocab;

pub use dataset::{split_dataset, DatasetSplit, SplitRatios};
pub use stage::{make_stage_examples, window_labels, wrap_target, StageKind, TrainingExample};
pub use vocab::{Vocabulary, END, PAD, PAD_TOKEN, SEP, START};

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::translit::{self, Slp1String, TranslitError, AVAGRAHA};

/// Characters reserved for model sequences; never valid inside words.
pub const RESERVED: [char; 3] = [SEP, START, END];

/// Maximum number of characters a sandhi-window may span.
pub const MAX_WINDOW: usize = 5;
/// Minimum number of characters a sandhi-window may span.
pub const MIN_WINDOW: usize = 2;
/// Characters at each side of the junction that may change.
pub const PARTICIPATING: usize = 2;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("corpus is not valid UTF-8")]
    Encoding,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("character {0:?} is not in the vocabulary")]
    VocabMiss(char),
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),
    #[error("compound {cw:?} does not contain the untruncated flanks of {w1:?} + {w2:?}")]
    CoreMismatch { w1: String, w2: String, cw: String },
}

/// One corpus unit: `w1 + w2 = cw`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SandhiTriple {
    pub w1: Slp1String,
    pub w2: Slp1String,
    pub cw: Slp1String,
}

impl SandhiTriple {
    pub fn new(w1: &str, w2: &str, cw: &str) -> Result<Self, TranslitError> {
        Ok(SandhiTriple {
            w1: Slp1String::new(w1)?,
            w2: Slp1String::new(w2)?,
            cw: Slp1String::new(cw)?,
        })
    }

    /// `N_c - (N_w1 + N_w2)`.
    pub fn length_delta(&self) -> i64 {
        self.cw.len() as i64 - (self.w1.len() + self.w2.len()) as i64
    }

    pub fn to_tsv(&self) -> String {
        format!("{}\t{}\t{}", self.w1, self.w2, self.cw)
    }
}

impl fmt::Display for SandhiTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {} = {}", self.w1, self.w2, self.cw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Script {
    #[default]
    Slp1,
    Devanagari,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DiagnosticKind {
    BlankLine,
    FieldCount(usize),
    /// A field holds a reserved or non-SLP1 character.
    IllegalChar {
        field: usize,
        ch: char,
    },
    EmptyField(usize),
    Transliteration(String),
    /// The triple is kept but contains an avagraha and wants manual review.
    AvagrahaReview,
}

impl DiagnosticKind {
    /// Warnings keep their triple; everything else drops the line.
    pub fn is_warning(&self) -> bool {
        matches!(self, DiagnosticKind::AvagrahaReview)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    /// 1-based line number.
    pub line: usize,
    pub kind: DiagnosticKind,
}

/// Parses a `w1<TAB>w2<TAB>cw` corpus file.
pub fn parse_corpus(
    path: &Path,
    script: Script,
) -> Result<(Vec<SandhiTriple>, Vec<Diagnostic>), CorpusError> {
    let bytes = fs::read(path)?;
    let text = String::from_utf8(bytes).map_err(|_| CorpusError::Encoding)?;
    Ok(parse_corpus_str(&text, script))
}

pub fn parse_corpus_str(text: &str, script: Script) -> (Vec<SandhiTriple>, Vec<Diagnostic>) {
    let mut triples = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        match parse_line(raw, script) {
            Ok(triple) => {
                if [&triple.w1, &triple.w2, &triple.cw]
                    .iter()
                    .any(|w| w.chars().any(|c| c == AVAGRAHA))
                {
                    diagnostics.push(Diagnostic {
                        line,
                        kind: DiagnosticKind::AvagrahaReview,
                    });
                }
                triples.push(triple);
            }
            Err(kind) => diagnostics.push(Diagnostic { line, kind }),
        }
    }
    (triples, diagnostics)
}

fn parse_line(raw: &str, script: Script) -> Result<SandhiTriple, DiagnosticKind> {
    let line = raw.trim_end_matches('\r');
    if line.trim().is_empty() {
        return Err(DiagnosticKind::BlankLine);
    }
    let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
    if fields.len() != 3 {
        return Err(DiagnosticKind::FieldCount(fields.len()));
    }
    let mut words = Vec::with_capacity(3);
    for (field, text) in fields.iter().enumerate() {
        if text.is_empty() {
            return Err(DiagnosticKind::EmptyField(field));
        }
        if let Some(ch) = text.chars().find(|c| RESERVED.contains(c)) {
            return Err(DiagnosticKind::IllegalChar { field, ch });
        }
        let slp = match script {
            Script::Slp1 => text.to_string(),
            Script::Devanagari => translit::devanagari_to_slp1(text)
                .map_err(|e| DiagnosticKind::Transliteration(e.to_string()))?,
        };
        match Slp1String::new(&slp) {
            Ok(w) => words.push(w),
            Err(TranslitError::InvalidSlp1 { ch, .. }) => {
                return Err(DiagnosticKind::IllegalChar { field, ch })
            }
            Err(e) => return Err(DiagnosticKind::Transliteration(e.to_string())),
        }
    }
    let cw = words.pop().unwrap();
    let w2 = words.pop().unwrap();
    let w1 = words.pop().unwrap();
    Ok(SandhiTriple { w1, w2, cw })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FilterReason {
    Ok,
    LengthRelation,
    WindowMismatch,
    WindowLength,
    IllegalChar,
}

impl fmt::Display for FilterReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FilterReason::Ok => "ok",
            FilterReason::LengthRelation => "length_relation",
            FilterReason::WindowMismatch => "window_mismatch",
            FilterReason::WindowLength => "window_length",
            FilterReason::IllegalChar => "illegal_char",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterVerdict {
    pub retained: bool,
    pub reason: FilterReason,
}

impl FilterVerdict {
    fn from_reason(reason: FilterReason) -> Self {
        FilterVerdict {
            retained: reason == FilterReason::Ok,
            reason,
        }
    }
}

/// Allowed range of `N_c - (N_w1 + N_w2)`.
pub const LENGTH_DELTA_RANGE: std::ops::RangeInclusive<i64> = -2..=1;

/// Keeps a triple iff the length relation holds and its window annotates.
pub fn filter_triple(t: &SandhiTriple) -> FilterVerdict {
    if !LENGTH_DELTA_RANGE.contains(&t.length_delta()) {
        return FilterVerdict::from_reason(FilterReason::LengthRelation);
    }
    match annotate_window(t) {
        Ok(_) => FilterVerdict::from_reason(FilterReason::Ok),
        Err(WindowError::Mismatch) => FilterVerdict::from_reason(FilterReason::WindowMismatch),
        Err(WindowError::Length(_)) => FilterVerdict::from_reason(FilterReason::WindowLength),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum WindowError {
    #[error("compound flanks differ from the input words")]
    Mismatch,
    #[error("sandhi-window length {0} outside 2..=5")]
    Length(i64),
}

/// The sandhi-window of a compound and the truncated gold words it splits into.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowAnnotation {
    /// Leading compound characters copied from `w1`.
    pub n1: usize,
    /// Trailing compound characters copied from `w2`.
    pub n2: usize,
    pub window: Slp1String,
    pub tw1: Slp1String,
    pub tw2: Slp1String,
}

impl WindowAnnotation {
    pub fn start(&self) -> usize {
        self.n1
    }

    pub fn end(&self) -> usize {
        self.n1 + self.window.len()
    }
}

/// Marks the sandhi-window: all but the last two characters of `w1` and all
/// but the first two of `w2` must appear unchanged at the compound's edges.
pub fn annotate_window(t: &SandhiTriple) -> Result<WindowAnnotation, WindowError> {
    let (w1, w2, cw) = (t.w1.as_str(), t.w2.as_str(), t.cw.as_str());
    let n1 = w1.len().saturating_sub(PARTICIPATING);
    let n2 = w2.len().saturating_sub(PARTICIPATING);
    let window_len = cw.len() as i64 - (n1 + n2) as i64;
    if window_len < 0 {
        return Err(WindowError::Length(window_len));
    }
    if cw[..n1] != w1[..n1] || cw[cw.len() - n2..] != w2[w2.len() - n2..] {
        return Err(WindowError::Mismatch);
    }
    if !(MIN_WINDOW as i64..=MAX_WINDOW as i64).contains(&window_len) {
        return Err(WindowError::Length(window_len));
    }
    // slices of validated SLP1 words are themselves valid and nonempty here
    let sub = |s: &str| Slp1String::new(s).expect("nonempty SLP1 slice");
    Ok(WindowAnnotation {
        n1,
        n2,
        window: sub(&cw[n1..cw.len() - n2]),
        tw1: sub(&w1[n1..]),
        tw2: sub(&w2[..w2.len() - n2]),
    })
}

/// Discard counts per filter reason, plus parse-level rejects.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStats {
    pub examined: usize,
    pub retained: usize,
    pub reasons: BTreeMap<String, usize>,
}

impl FilterStats {
    pub fn record(&mut self, reason: FilterReason) {
        self.examined += 1;
        if reason == FilterReason::Ok {
            self.retained += 1;
        }
        *self.reasons.entry(reason.to_string()).or_insert(0) += 1;
    }
}

/// Filters and annotates triples, keeping input order.
pub fn filter_corpus(
    triples: &[SandhiTriple],
) -> (Vec<(SandhiTriple, WindowAnnotation)>, FilterStats) {
    let mut stats = FilterStats::default();
    let mut kept = Vec::new();
    for t in triples {
        let verdict = filter_triple(t);
        stats.record(verdict.reason);
        if verdict.retained {
            let ann = annotate_window(t).expect("retained triples annotate");
            kept.push((t.clone(), ann));
        }
    }
    (kept, stats)
}

/// Drops repeated triples, keeping the first occurrence.
pub fn dedup_triples(triples: Vec<SandhiTriple>) -> Vec<SandhiTriple> {
    let mut seen = std::collections::HashSet::new();
    triples
        .into_iter()
        .filter(|t| seen.insert(t.clone()))
        .collect()
}
