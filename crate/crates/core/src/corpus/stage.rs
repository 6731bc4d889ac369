use serde::{Deserialize, Serialize};

use super::{CorpusError, SandhiTriple, WindowAnnotation, END, SEP, START};
use crate::joiner;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StageKind {
    /// Sandhi generation on truncated pairs: keep the last `n` chars of the
    /// first word and the first `m` of the second.
    Joiner { n: usize, m: usize },
    /// Stage 1: per-character window membership.
    Tagger,
    /// Stage 2: sandhi-window to truncated word pair.
    WindowSplitter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainingExample {
    /// Character sequence to character sequence. Targets carry `&` and `$`.
    Sequence { input: String, target: String },
    /// One 0/1 label per input character.
    Tagging { input: String, target: Vec<u8> },
}

impl TrainingExample {
    pub fn input(&self) -> &str {
        match self {
            TrainingExample::Sequence { input, .. } | TrainingExample::Tagging { input, .. } => {
                input
            }
        }
    }

    /// Single TSV line: `input<TAB>target`, tagging targets as a 0/1 string.
    pub fn to_tsv(&self) -> String {
        match self {
            TrainingExample::Sequence { input, target } => format!("{input}\t{target}"),
            TrainingExample::Tagging { input, target } => {
                let bits: String = target
                    .iter()
                    .map(|&b| if b == 1 { '1' } else { '0' })
                    .collect();
                format!("{input}\t{bits}")
            }
        }
    }
}

/// Wraps a decoder target in start and end markers.
pub fn wrap_target(core: &str) -> String {
    let mut s = String::with_capacity(core.len() + 2);
    s.push(START);
    s.push_str(core);
    s.push(END);
    s
}

/// 0/1 labels with ones exactly on `[start, end)`.
pub fn window_labels(len: usize, start: usize, end: usize) -> Vec<u8> {
    (0..len).map(|i| u8::from(i >= start && i < end)).collect()
}

pub fn make_stage_examples(
    annotated: &[(SandhiTriple, WindowAnnotation)],
    kind: StageKind,
) -> Result<Vec<TrainingExample>, CorpusError> {
    annotated
        .iter()
        .map(|(t, a)| match kind {
            StageKind::Joiner { n, m } => {
                let (input, core) = joiner::training_pair(t, n, m)?;
                Ok(TrainingExample::Sequence {
                    input,
                    target: wrap_target(&core),
                })
            }
            StageKind::Tagger => Ok(TrainingExample::Tagging {
                input: t.cw.to_string(),
                target: window_labels(t.cw.len(), a.start(), a.end()),
            }),
            StageKind::WindowSplitter => Ok(TrainingExample::Sequence {
                input: a.window.to_string(),
                target: wrap_target(&format!("{}{SEP}{}", a.tw1, a.tw2)),
            }),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::annotate_window;

    fn annotated(w1: &str, w2: &str, cw: &str) -> (SandhiTriple, WindowAnnotation) {
        let t = SandhiTriple::new(w1, w2, cw).unwrap();
        let a = annotate_window(&t).unwrap();
        (t, a)
    }

    #[test]
    fn tagger_targets_mark_the_window() {
        let data = [annotated(
            "sAmAnyaDvaMsAn",
            "aNgIkArAt",
            "sAmAnyaDvaMsAnaNgIkArAt",
        )];
        let ex = make_stage_examples(&data, StageKind::Tagger).unwrap();
        let TrainingExample::Tagging { input, target } = &ex[0] else {
            panic!()
        };
        assert_eq!(input, "sAmAnyaDvaMsAnaNgIkArAt");
        let ones: Vec<usize> = (0..target.len()).filter(|&i| target[i] == 1).collect();
        assert_eq!(ones, vec![12, 13, 14, 15]);

        // a five-character window at 1-based positions 13..=17
        let labels = window_labels(23, 12, 17);
        let ones: Vec<usize> = (0..23).filter(|&i| labels[i] == 1).collect();
        assert_eq!(ones, vec![12, 13, 14, 15, 16]);
    }

    #[test]
    fn window_splitter_example() {
        let data = [annotated("vidyA", "AlayaH", "vidyAlayaH")];
        let ex = make_stage_examples(&data, StageKind::WindowSplitter).unwrap();
        assert_eq!(
            ex[0],
            TrainingExample::Sequence {
                input: "yAl".into(),
                target: "&yA+Al$".into()
            }
        );
    }

    #[test]
    fn joiner_example() {
        let data = [annotated("vidyA", "AlayaH", "vidyAlayaH")];
        let ex = make_stage_examples(&data, StageKind::Joiner { n: 5, m: 2 }).unwrap();
        assert_eq!(
            ex[0],
            TrainingExample::Sequence {
                input: "vidyA+Al".into(),
                target: "&vidyAl$".into()
            }
        );
        assert_eq!(ex[0].to_tsv(), "vidyA+Al\t&vidyAl$");
    }

    #[test]
    fn tagging_tsv() {
        let ex = TrainingExample::Tagging {
            input: "abc".into(),
            target: vec![0, 1, 1],
        };
        assert_eq!(ex.to_tsv(), "abc\t011");
    }
}
