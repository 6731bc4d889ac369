//! Transliteration between Devanagari, ITRANS and SLP1, plus the phoneme and
//! sandhi-type classification used throughout the crate.
//!
//! SLP1 is the internal representation: one ASCII character per phoneme, so
//! character counts are phoneme counts. Whitespace and `+` pass through every
//! codec unchanged so that corpus lines can be converted whole.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Vowels in SLP1.
pub const SLP1_VOWELS: &str = "aAiIuUfFxXeEoO";
/// Consonants in SLP1, in varga order, followed by the Vedic `L`.
pub const SLP1_CONSONANTS: &str = "kKgGNcCjJYwWqQRtTdDnpPbBmyrlvSzshL";
/// Anusvara.
pub const ANUSVARA: char = 'M';
/// Candrabindu.
pub const CANDRABINDU: char = '~';
/// Visarga.
pub const VISARGA: char = 'H';
/// Avagraha (elided initial `a`).
pub const AVAGRAHA: char = '\'';

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslitError {
    #[error("unknown code point {ch:?} at position {position}")]
    UnknownCodePoint { ch: char, position: usize },
    #[error("dependent sign {ch:?} at position {position} does not follow a consonant")]
    MisplacedSign { ch: char, position: usize },
    #[error("unknown ITRANS token starting at position {position}")]
    UnknownToken { position: usize },
    #[error("invalid SLP1 character {ch:?} at position {position}")]
    InvalidSlp1 { ch: char, position: usize },
    #[error("empty word")]
    EmptyWord,
}

/// Returns true if `c` belongs to the SLP1 phoneme inventory.
pub fn is_slp1_char(c: char) -> bool {
    SLP1_VOWELS.contains(c)
        || SLP1_CONSONANTS.contains(c)
        || c == ANUSVARA
        || c == CANDRABINDU
        || c == VISARGA
        || c == AVAGRAHA
}

/// A nonempty word made only of SLP1 phoneme characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slp1String(String);

impl Slp1String {
    pub fn new(s: &str) -> Result<Self, TranslitError> {
        if s.is_empty() {
            return Err(TranslitError::EmptyWord);
        }
        if let Some((position, ch)) = s.chars().enumerate().find(|&(_, c)| !is_slp1_char(c)) {
            return Err(TranslitError::InvalidSlp1 { ch, position });
        }
        Ok(Slp1String(s.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Number of phonemes. SLP1 is ASCII so this is also the byte length.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn chars(&self) -> std::str::Chars<'_> {
        self.0.chars()
    }

    pub fn first(&self) -> char {
        self.0.as_bytes()[0] as char
    }

    pub fn last(&self) -> char {
        self.0.as_bytes()[self.0.len() - 1] as char
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl serde::Serialize for Slp1String {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> serde::Deserialize<'de> for Slp1String {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        Slp1String::new(&s).map_err(serde::de::Error::custom)
    }
}

impl FromStr for Slp1String {
    type Err = TranslitError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Slp1String::new(s)
    }
}

impl fmt::Display for Slp1String {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Slp1String {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhonemeClass {
    Vowel,
    Consonant,
    Visarga,
    Anusvara,
    Other,
}

/// Total classification of a single character.
pub fn classify_phoneme(c: char) -> PhonemeClass {
    if SLP1_VOWELS.contains(c) {
        PhonemeClass::Vowel
    } else if SLP1_CONSONANTS.contains(c) {
        PhonemeClass::Consonant
    } else if c == VISARGA {
        PhonemeClass::Visarga
    } else if c == ANUSVARA || c == CANDRABINDU {
        PhonemeClass::Anusvara
    } else {
        PhonemeClass::Other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum SandhiType {
    /// Vowel meets vowel.
    Swara,
    /// At least one side of the junction is a consonant.
    Vyanjana,
    /// The first word ends in visarga.
    Visarga,
}

/// Classifies a junction by the last phoneme of `w1` and the first of `w2`.
/// Visarga wins over Swara, which wins over Vyanjana.
pub fn classify_sandhi_type(w1: &str, w2: &str) -> Result<SandhiType, TranslitError> {
    let last = w1.chars().last().ok_or(TranslitError::EmptyWord)?;
    let first = w2.chars().next().ok_or(TranslitError::EmptyWord)?;
    Ok(classify_junction(last, first))
}

pub(crate) fn classify_junction(last: char, first: char) -> SandhiType {
    if last == VISARGA {
        SandhiType::Visarga
    } else if classify_phoneme(last) == PhonemeClass::Vowel
        && classify_phoneme(first) == PhonemeClass::Vowel
    {
        SandhiType::Swara
    } else {
        SandhiType::Vyanjana
    }
}

// (slp1, independent vowel, dependent sign); `a` has no sign.
const VOWEL_TABLE: &[(char, char, Option<char>)] = &[
    ('a', 'अ', None),
    ('A', 'आ', Some('ा')),
    ('i', 'इ', Some('ि')),
    ('I', 'ई', Some('ी')),
    ('u', 'उ', Some('ु')),
    ('U', 'ऊ', Some('ू')),
    ('f', 'ऋ', Some('ृ')),
    ('F', 'ॠ', Some('ॄ')),
    ('x', 'ऌ', Some('ॢ')),
    ('X', 'ॡ', Some('ॣ')),
    ('e', 'ए', Some('े')),
    ('E', 'ऐ', Some('ै')),
    ('o', 'ओ', Some('ो')),
    ('O', 'औ', Some('ौ')),
];

const CONSONANT_TABLE: &[(char, char)] = &[
    ('k', 'क'),
    ('K', 'ख'),
    ('g', 'ग'),
    ('G', 'घ'),
    ('N', 'ङ'),
    ('c', 'च'),
    ('C', 'छ'),
    ('j', 'ज'),
    ('J', 'झ'),
    ('Y', 'ञ'),
    ('w', 'ट'),
    ('W', 'ठ'),
    ('q', 'ड'),
    ('Q', 'ढ'),
    ('R', 'ण'),
    ('t', 'त'),
    ('T', 'थ'),
    ('d', 'द'),
    ('D', 'ध'),
    ('n', 'न'),
    ('p', 'प'),
    ('P', 'फ'),
    ('b', 'ब'),
    ('B', 'भ'),
    ('m', 'म'),
    ('y', 'य'),
    ('r', 'र'),
    ('l', 'ल'),
    ('v', 'व'),
    ('S', 'श'),
    ('z', 'ष'),
    ('s', 'स'),
    ('h', 'ह'),
    ('L', 'ळ'),
];

const MARK_TABLE: &[(char, char)] = &[('M', 'ं'), ('H', 'ः'), ('~', 'ँ'), ('\'', 'ऽ')];

const VIRAMA: char = '्';
const DANDA: char = '।';
const DOUBLE_DANDA: char = '॥';

fn is_passthrough(c: char) -> bool {
    c.is_whitespace() || matches!(c, '+' | '-' | ',' | '?' | '!' | ';' | ':' | '(' | ')' | '"')
}

enum DevaChar {
    Consonant(char),
    Vowel(char),
    Sign(char),
    Virama,
    Mark(char),
    Digit(char),
}

fn lookup_devanagari(c: char) -> Option<DevaChar> {
    if c == VIRAMA {
        return Some(DevaChar::Virama);
    }
    if let Some(&(s, _)) = CONSONANT_TABLE.iter().find(|&&(_, d)| d == c) {
        return Some(DevaChar::Consonant(s));
    }
    if let Some(&(s, _, _)) = VOWEL_TABLE.iter().find(|&&(_, d, _)| d == c) {
        return Some(DevaChar::Vowel(s));
    }
    if let Some(&(s, _, _)) = VOWEL_TABLE.iter().find(|&&(_, _, sign)| sign == Some(c)) {
        return Some(DevaChar::Sign(s));
    }
    if let Some(&(s, _)) = MARK_TABLE.iter().find(|&&(_, d)| d == c) {
        return Some(DevaChar::Mark(s));
    }
    if ('०'..='९').contains(&c) {
        let d = (c as u32 - '०' as u32) as u8 + b'0';
        return Some(DevaChar::Digit(d as char));
    }
    None
}

/// Converts Devanagari text to SLP1. The inherent vowel of a consonant is
/// written out unless suppressed by a virama or replaced by a vowel sign.
pub fn devanagari_to_slp1(text: &str) -> Result<String, TranslitError> {
    let mut out = String::with_capacity(text.len());
    let mut pending_a = false;
    for (position, c) in text.chars().enumerate() {
        if c == DANDA || c == DOUBLE_DANDA || is_passthrough(c) {
            if pending_a {
                out.push('a');
                pending_a = false;
            }
            match c {
                DANDA => out.push('.'),
                DOUBLE_DANDA => out.push_str(".."),
                _ => out.push(c),
            }
            continue;
        }
        match lookup_devanagari(c) {
            Some(DevaChar::Consonant(s)) => {
                if pending_a {
                    out.push('a');
                }
                out.push(s);
                pending_a = true;
            }
            Some(DevaChar::Sign(s)) => {
                if !pending_a {
                    return Err(TranslitError::MisplacedSign { ch: c, position });
                }
                out.push(s);
                pending_a = false;
            }
            Some(DevaChar::Virama) => {
                if !pending_a {
                    return Err(TranslitError::MisplacedSign { ch: c, position });
                }
                pending_a = false;
            }
            Some(DevaChar::Vowel(s)) | Some(DevaChar::Mark(s)) | Some(DevaChar::Digit(s)) => {
                if pending_a {
                    out.push('a');
                    pending_a = false;
                }
                out.push(s);
            }
            None => return Err(TranslitError::UnknownCodePoint { ch: c, position }),
        }
    }
    if pending_a {
        out.push('a');
    }
    Ok(out)
}

/// Converts SLP1 text to Devanagari. Inverse of [`devanagari_to_slp1`] on
/// its image.
pub fn slp1_to_devanagari(text: &str) -> Result<String, TranslitError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len() * 3);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if let Some(&(_, d)) = CONSONANT_TABLE.iter().find(|&&(s, _)| s == c) {
            out.push(d);
            match chars
                .get(i + 1)
                .and_then(|&n| VOWEL_TABLE.iter().find(|&&(s, _, _)| s == n))
            {
                Some(&(_, _, sign)) => {
                    if let Some(sign) = sign {
                        out.push(sign);
                    }
                    i += 2;
                }
                None => {
                    out.push(VIRAMA);
                    i += 1;
                }
            }
            continue;
        }
        if let Some(&(_, d, _)) = VOWEL_TABLE.iter().find(|&&(s, _, _)| s == c) {
            out.push(d);
        } else if let Some(&(_, d)) = MARK_TABLE.iter().find(|&&(s, _)| s == c) {
            out.push(d);
        } else if c.is_ascii_digit() {
            out.push(char::from_u32('०' as u32 + (c as u32 - '0' as u32)).unwrap());
        } else if c == '.' {
            if chars.get(i + 1) == Some(&'.') {
                out.push(DOUBLE_DANDA);
                i += 1;
            } else {
                out.push(DANDA);
            }
        } else if is_passthrough(c) {
            out.push(c);
        } else {
            return Err(TranslitError::InvalidSlp1 { ch: c, position: i });
        }
        i += 1;
    }
    Ok(out)
}

// Longest match wins; alternatives for the same phoneme are all listed.
const ITRANS_TABLE: &[(&str, &str)] = &[
    ("a", "a"),
    ("aa", "A"),
    ("A", "A"),
    ("i", "i"),
    ("ii", "I"),
    ("I", "I"),
    ("u", "u"),
    ("uu", "U"),
    ("U", "U"),
    ("RRi", "f"),
    ("R^i", "f"),
    ("RRI", "F"),
    ("R^I", "F"),
    ("LLi", "x"),
    ("L^i", "x"),
    ("LLI", "X"),
    ("L^I", "X"),
    ("e", "e"),
    ("ai", "E"),
    ("o", "o"),
    ("au", "O"),
    ("M", "M"),
    (".n", "M"),
    (".m", "M"),
    (".N", "~"),
    ("H", "H"),
    (".a", "'"),
    ("k", "k"),
    ("kh", "K"),
    ("g", "g"),
    ("gh", "G"),
    ("~N", "N"),
    ("N^", "N"),
    ("c", "c"),
    ("ch", "c"),
    ("Ch", "C"),
    ("chh", "C"),
    ("j", "j"),
    ("jh", "J"),
    ("~n", "Y"),
    ("JN", "Y"),
    ("T", "w"),
    ("Th", "W"),
    ("D", "q"),
    ("Dh", "Q"),
    ("N", "R"),
    ("t", "t"),
    ("th", "T"),
    ("d", "d"),
    ("dh", "D"),
    ("n", "n"),
    ("p", "p"),
    ("ph", "P"),
    ("b", "b"),
    ("bh", "B"),
    ("m", "m"),
    ("y", "y"),
    ("r", "r"),
    ("l", "l"),
    ("L", "L"),
    ("v", "v"),
    ("w", "v"),
    ("sh", "S"),
    ("Sh", "z"),
    ("shh", "z"),
    ("s", "s"),
    ("h", "h"),
    ("x", "kz"),
    ("kSh", "kz"),
    ("GY", "jY"),
    ("j~n", "jY"),
    ("dny", "jY"),
];

const ITRANS_MAX_TOKEN: usize = 3;

/// Converts ITRANS to SLP1 with greedy longest-match tokenization.
pub fn itrans_to_slp1(text: &str) -> Result<String, TranslitError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        if is_passthrough(chars[i]) {
            out.push(chars[i]);
            i += 1;
            continue;
        }
        let mut matched = false;
        for len in (1..=ITRANS_MAX_TOKEN.min(chars.len() - i)).rev() {
            let candidate: String = chars[i..i + len].iter().collect();
            if let Some(&(_, slp)) = ITRANS_TABLE.iter().find(|&&(tok, _)| tok == candidate) {
                out.push_str(slp);
                i += len;
                matched = true;
                break;
            }
        }
        if !matched {
            return Err(TranslitError::UnknownToken { position: i });
        }
    }
    Ok(out)
}
