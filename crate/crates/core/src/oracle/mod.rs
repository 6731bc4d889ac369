//! Rule-based sandhi for synthetic corpora and independent checks.

pub mod rules;

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{filter_triple, SandhiTriple, WindowAnnotation, WindowError};
use crate::translit::Slp1String;
pub use rules::{find_rule, SandhiRule, RULES};

const BUNDLED_LEXICON: &str = include_str!("../../data/lexicon.tsv");

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("no rule covers {w1} + {w2}")]
    NoRule { w1: String, w2: String },
    #[error("only {produced} of {requested} distinct triples found within the attempt budget")]
    InsufficientCoverage { requested: usize, produced: usize },
    #[error("lexicon line {line}: {reason}")]
    Lexicon { line: usize, reason: String },
    #[error("lexicon is empty")]
    EmptyLexicon,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Applies the first matching rule to the junction of `w1` and `w2`.
pub fn apply_rules(w1: &Slp1String, w2: &Slp1String) -> Result<Slp1String, OracleError> {
    let (a, b) = (w1.as_str(), w2.as_str());
    let rule = find_rule(a, b).ok_or_else(|| OracleError::NoRule {
        w1: a.to_string(),
        w2: b.to_string(),
    })?;
    let joined = format!(
        "{}{}{}",
        &a[..a.len() - 1],
        (rule.rewrite)(w1.last(), w2.first()),
        &b[1..]
    );
    Ok(Slp1String::new(&joined).expect("rules emit SLP1"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    words: Vec<Slp1String>,
    weights: Vec<f64>,
}

impl Lexicon {
    /// One word per line with an optional tab-separated positive weight.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, OracleError> {
        let mut words = Vec::new();
        let mut weights = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| OracleError::Lexicon {
                line: i + 1,
                reason,
            };
            let mut fields = line.split('\t');
            let word = fields.next().unwrap_or_default();
            let word = Slp1String::new(word).map_err(|e| err(e.to_string()))?;
            let weight = match fields.next() {
                None => 1.0,
                Some(w) => w
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|w| w.is_finite() && *w > 0.0)
                    .ok_or_else(|| err(format!("bad weight {w:?}")))?,
            };
            if fields.next().is_some() {
                return Err(err("more than two fields".into()));
            }
            words.push(word);
            weights.push(weight);
        }
        if words.is_empty() {
            return Err(OracleError::EmptyLexicon);
        }
        Ok(Lexicon { words, weights })
    }

    pub fn load(path: &Path) -> Result<Self, OracleError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// The demo lexicon shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn words(&self) -> &[Slp1String] {
        &self.words
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Samples weighted word pairs and keeps `count` distinct ones that some
/// rule covers. The same lexicon, count and seed give the same corpus.
pub fn generate_synthetic(
    lex: &Lexicon,
    count: usize,
    seed: u64,
) -> Result<Vec<SandhiTriple>, OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = WeightedIndex::new(lex.weights()).map_err(|_| OracleError::EmptyLexicon)?;
    let budget = count.saturating_mul(200).max(10_000);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    for _ in 0..budget {
        if out.len() == count {
            break;
        }
        let (i, j) = (dist.sample(&mut rng), dist.sample(&mut rng));
        if !seen.insert((i, j)) {
            continue;
        }
        let (w1, w2) = (&lex.words[i], &lex.words[j]);
        let Ok(cw) = apply_rules(w1, w2) else {
            continue;
        };
        let t = SandhiTriple {
            w1: w1.clone(),
            w2: w2.clone(),
            cw,
        };
        if filter_triple(&t).retained {
            out.push(t);
        }
    }
    if out.len() < count {
        return Err(OracleError::InsufficientCoverage {
            requested: count,
            produced: out.len(),
        });
    }
    Ok(out)
}

/// Window annotation by direct character comparison, written separately
/// from the corpus module so the two can check each other.
pub fn brute_force_window(t: &SandhiTriple) -> Result<WindowAnnotation, WindowError> {
    let w1: Vec<char> = t.w1.chars().collect();
    let w2: Vec<char> = t.w2.chars().collect();
    let cw: Vec<char> = t.cw.chars().collect();
    let keep1 = if w1.len() > 2 { w1.len() - 2 } else { 0 };
    let keep2 = if w2.len() > 2 { w2.len() - 2 } else { 0 };
    if keep1 + keep2 > cw.len() {
        return Err(WindowError::Length(
            cw.len() as i64 - (keep1 + keep2) as i64,
        ));
    }
    for k in 0..keep1 {
        if cw[k] != w1[k] {
            return Err(WindowError::Mismatch);
        }
    }
    for k in 1..=keep2 {
        if cw[cw.len() - k] != w2[w2.len() - k] {
            return Err(WindowError::Mismatch);
        }
    }
    let width = cw.len() - keep1 - keep2;
    if !(2..=5).contains(&width) {
        return Err(WindowError::Length(width as i64));
    }
    let collect = |s: &[char]| Slp1String::new(&s.iter().collect::<String>()).unwrap();
    Ok(WindowAnnotation {
        n1: keep1,
        n2: keep2,
        window: collect(&cw[keep1..keep1 + width]),
        tw1: collect(&w1[keep1..]),
        tw2: collect(&w2[..w2.len() - keep2]),
    })
}
