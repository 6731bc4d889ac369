use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Held-out fractions. Test is carved from the whole set, validation from
/// what remains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub test: f64,
    pub validation: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            test: 0.2,
            validation: 0.2,
        }
    }
}

impl SplitRatios {
    /// `(train, validation, test)` sizes for `n` examples. Held-out sizes
    /// round half up; train takes the remainder.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let test = ((n as f64 * self.test).round() as usize).min(n);
        let rest = n - test;
        let validation = ((rest as f64 * self.validation).round() as usize).min(rest);
        (rest - validation, validation, test)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
    pub seed: u64,
}

/// Seeded shuffle followed by a test / validation / train partition.
pub fn split_dataset<T>(
    mut examples: Vec<T>,
    ratios: SplitRatios,
    seed: u64,
) -> Result<DatasetSplit<T>, CorpusError> {
    if examples.is_empty() {
        return Err(CorpusError::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    examples.shuffle(&mut rng);
    let (_, n_val, n_test) = ratios.sizes(examples.len());
    let rest = examples.split_off(n_test);
    let test = examples;
    let mut train = rest;
    let validation = train.split_off(train.len() - n_val);
    Ok(DatasetSplit {
        train,
        validation,
        test,
        seed,
    })
}
