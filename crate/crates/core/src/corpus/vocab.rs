use std::collections::{BTreeSet, HashMap};

use super::CorpusError;

/// Separator between the two words of a split.
pub const SEP: char = '+';
/// Start-of-sequence marker on decoder targets.
pub const START: char = '&';
/// End-of-sequence marker on decoder targets.
pub const END: char = '$';
/// Padding symbol. Its one-hot input is the zero vector.
pub const PAD: char = '\u{0}';
/// How [`PAD`] is written in token lists.
pub const PAD_TOKEN: &str = "<pad>";

/// A single character dictionary shared by a model's inputs and outputs.
///
/// Token order is the order of one-hot positions and of every weight column
/// that touches a token, so it is also the serialization order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<char>,
    index: HashMap<char, usize>,
}

impl Vocabulary {
    /// Sorted distinct characters, then `+`, `&`, `$`, then PAD.
    pub fn build<I, S>(sequences: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let specials = [SEP, START, END, PAD];
        let mut chars = BTreeSet::new();
        for s in sequences {
            chars.extend(s.as_ref().chars().filter(|c| !specials.contains(c)));
        }
        let tokens: Vec<char> = chars.into_iter().chain(specials).collect();
        Self::from_chars(tokens).expect("distinct by construction")
    }

    fn from_chars(tokens: Vec<char>) -> Result<Self, CorpusError> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, &c) in tokens.iter().enumerate() {
            if index.insert(c, i).is_some() {
                return Err(CorpusError::InvalidVocabulary(format!(
                    "duplicate token {c:?}"
                )));
            }
        }
        for special in [SEP, START, END, PAD] {
            if !index.contains_key(&special) {
                return Err(CorpusError::InvalidVocabulary(format!(
                    "missing special token {special:?}"
                )));
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    /// Rebuilds a vocabulary from its serialized token list, keeping order.
    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Result<Self, CorpusError> {
        let mut chars = Vec::with_capacity(tokens.len());
        for t in tokens {
            let t = t.as_ref();
            if t == PAD_TOKEN {
                chars.push(PAD);
                continue;
            }
            let mut it = t.chars();
            match (it.next(), it.next()) {
                (Some(c), None) if c != PAD => chars.push(c),
                _ => {
                    return Err(CorpusError::InvalidVocabulary(format!("bad token {t:?}")));
                }
            }
        }
        Self::from_chars(chars)
    }

    pub fn to_tokens(&self) -> Vec<String> {
        self.tokens
            .iter()
            .map(|&c| {
                if c == PAD {
                    PAD_TOKEN.to_string()
                } else {
                    c.to_string()
                }
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        self.index.get(&c).copied()
    }

    pub fn token(&self, i: usize) -> char {
        self.tokens[i]
    }

    pub fn tokens(&self) -> &[char] {
        &self.tokens
    }

    pub fn sep(&self) -> usize {
        self.index[&SEP]
    }

    pub fn start(&self) -> usize {
        self.index[&START]
    }

    pub fn end(&self) -> usize {
        self.index[&END]
    }

    pub fn pad(&self) -> usize {
        self.index[&PAD]
    }

    pub fn encode(&self, s: &str) -> Result<Vec<usize>, CorpusError> {
        s.chars()
            .map(|c| self.index_of(c).ok_or(CorpusError::VocabMiss(c)))
            .collect()
    }

    pub fn decode(&self, ids: &[usize]) -> String {
        ids.iter().map(|&i| self.tokens[i]).collect()
    }

    pub fn one_hot(&self, c: char) -> Result<Vec<f32>, CorpusError> {
        let i = self.index_of(c).ok_or(CorpusError::VocabMiss(c))?;
        let mut v = vec![0.0; self.len()];
        if c != PAD {
            v[i] = 1.0;
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_orders_chars_then_specials() {
        let v = Vocabulary::build(["ab", "bc"]);
        assert_eq!(v.tokens(), &['a', 'b', 'c', '+', '&', '$', PAD]);
        assert_eq!(v.to_tokens().last().unwrap(), PAD_TOKEN);
    }

    #[test]
    fn specials_in_input_are_not_duplicated() {
        let v = Vocabulary::build(["yA+Al", "&yA$"]);
        assert_eq!(v.tokens(), &['A', 'l', 'y', '+', '&', '$', PAD]);
    }

    #[test]
    fn one_hot_places_single_one() {
        let v = Vocabulary::build(["ab", "bc"]);
        for (i, &c) in v.tokens().iter().enumerate() {
            let oh = v.one_hot(c).unwrap();
            for (j, &x) in oh.iter().enumerate() {
                let expect = if i == j && c != PAD { 1.0 } else { 0.0 };
                assert_eq!(x, expect);
            }
        }
        assert!(matches!(v.one_hot('z'), Err(CorpusError::VocabMiss('z'))));
    }

    #[test]
    fn token_round_trip_and_validation() {
        let v = Vocabulary::build(["vidyA", "AlayaH"]);
        let back = Vocabulary::from_tokens(&v.to_tokens()).unwrap();
        assert_eq!(v, back);
        assert!(Vocabulary::from_tokens(&["a", "a", "+", "&", "$", PAD_TOKEN]).is_err());
        assert!(Vocabulary::from_tokens(&["a", "+", "&", PAD_TOKEN]).is_err());
        assert!(Vocabulary::from_tokens(&["ab", "+", "&", "$", PAD_TOKEN]).is_err());
    }

    #[test]
    fn encode_reports_misses() {
        let v = Vocabulary::build(["ab"]);
        assert_eq!(v.encode("ba+").unwrap(), vec![1, 0, 2]);
        assert!(matches!(v.encode("abz"), Err(CorpusError::VocabMiss('z'))));
        assert_eq!(v.decode(&[0, 1]), "ab");
    }
}
