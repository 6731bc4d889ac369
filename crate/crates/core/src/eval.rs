//! Exact-match evaluation of the joiner, the splitter and their round trip.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{annotate_window, SandhiTriple};
use crate::joiner::JoinerModel;
use crate::splitter::Splitter;

/// Failure samples kept per report.
pub const MAX_FAILURES: usize = 50;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricCount {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

impl MetricCount {
    fn add(&mut self, ok: bool) {
        self.total += 1;
        self.correct += usize::from(ok);
        self.accuracy = self.correct as f64 / self.total as f64;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureSample {
    pub input: String,
    pub expected: String,
    pub predicted: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Headline metric: `exact_match`, `split` or `round_trip`.
    pub metric: String,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub breakdown: BTreeMap<String, MetricCount>,
    pub failures: Vec<FailureSample>,
}

impl EvalReport {
    fn new(metric: &str) -> Self {
        EvalReport {
            metric: metric.to_string(),
            total: 0,
            correct: 0,
            accuracy: 0.0,
            breakdown: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    fn record(&mut self, name: &str, ok: bool) {
        self.breakdown.entry(name.to_string()).or_default().add(ok);
        if name == self.metric {
            self.total += 1;
            self.correct += usize::from(ok);
            self.accuracy = self.correct as f64 / self.total as f64;
        }
    }

    fn fail(&mut self, input: &str, expected: String, predicted: String) {
        if self.failures.len() < MAX_FAILURES {
            self.failures.push(FailureSample {
                input: input.to_string(),
                expected,
                predicted,
            });
        }
    }

    pub fn metric(&self, name: &str) -> Option<&MetricCount> {
        self.breakdown.get(name)
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<16} {:>8} {:>8} {:>9}",
            "metric", "correct", "total", "accuracy"
        )?;
        for (name, m) in &self.breakdown {
            writeln!(
                f,
                "{name:<16} {:>8} {:>8} {:>8.2}%",
                m.correct,
                m.total,
                100.0 * m.accuracy
            )?;
        }
        Ok(())
    }
}

/// Whole-compound exact match; any wrong character fails the example.
pub fn eval_join(model: &JoinerModel, test: &[SandhiTriple]) -> EvalReport {
    let mut report = EvalReport::new("exact_match");
    for t in test {
        let predicted = match model.join(&t.w1, &t.w2) {
            Ok(cw) => cw.to_string(),
            Err(e) => format!("ERR {e}"),
        };
        let ok = predicted == t.cw.as_str();
        report.record("exact_match", ok);
        if !ok {
            report.fail(&format!("{} {}", t.w1, t.w2), t.cw.to_string(), predicted);
        }
    }
    report
}

/// Location accuracy (predicted span covers the gold window), exact span
/// equality, and split accuracy (both words equal gold).
pub fn eval_split(splitter: &Splitter, test: &[SandhiTriple]) -> EvalReport {
    let mut report = EvalReport::new("split");
    for t in test {
        let gold = annotate_window(t).ok();
        let expected = format!("{} + {}", t.w1, t.w2);
        match splitter.split(t.cw.as_str()) {
            Ok(r) => {
                if let Some(g) = &gold {
                    report.record("location", r.window.covers(g));
                    report.record("location_exact", r.window.matches(g));
                }
                let ok = r.pw1 == t.w1.as_str() && r.pw2 == t.w2.as_str();
                report.record("split", ok);
                if !ok {
                    report.fail(t.cw.as_str(), expected, format!("{} + {}", r.pw1, r.pw2));
                }
            }
            Err(e) => {
                if gold.is_some() {
                    report.record("location", false);
                    report.record("location_exact", false);
                }
                report.record("split", false);
                report.fail(t.cw.as_str(), expected, format!("ERR {e}"));
            }
        }
    }
    report
}

/// `split(join(w1, w2)) == (w1, w2)`.
pub fn eval_round_trip(
    joiner: &JoinerModel,
    splitter: &Splitter,
    test: &[SandhiTriple],
) -> EvalReport {
    let mut report = EvalReport::new("round_trip");
    for t in test {
        let expected = format!("{} + {}", t.w1, t.w2);
        let predicted = joiner
            .join(&t.w1, &t.w2)
            .map_err(|e| e.to_string())
            .and_then(|cw| splitter.split(cw.as_str()).map_err(|e| e.to_string()));
        let (ok, shown) = match predicted {
            Ok(r) => (
                r.pw1 == t.w1.as_str() && r.pw2 == t.w2.as_str(),
                format!("{} + {}", r.pw1, r.pw2),
            ),
            Err(e) => (false, format!("ERR {e}")),
        };
        report.record("round_trip", ok);
        if !ok {
            report.fail(&expected, expected.clone(), shown);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_is_exact_ratio() {
        let mut r = EvalReport::new("split");
        for ok in [true, false, true] {
            r.record("split", ok);
            r.record("location", true);
        }
        assert_eq!((r.correct, r.total), (2, 3));
        assert_eq!(r.accuracy, 2.0 / 3.0);
        assert_eq!(r.metric("location").unwrap().correct, 3);
        let text = r.to_string();
        assert!(text.contains("split"));
        assert!(text.contains("66.67%"));
    }

    #[test]
    fn failures_are_capped() {
        let mut r = EvalReport::new("exact_match");
        for i in 0..120 {
            r.record("exact_match", false);
            r.fail(&i.to_string(), "a".into(), "b".into());
        }
        assert_eq!(r.failures.len(), MAX_FAILURES);
        assert_eq!(r.total, 120);
    }
}
