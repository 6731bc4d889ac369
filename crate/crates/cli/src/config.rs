//! Training configuration: kind defaults, then the JSON file, then flags.

use std::fs;
use std::path::Path;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use sandhi_core::joiner::JoinerConfig;
use sandhi_core::neuralnet::TrainConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKindArg {
    Joiner,
    Tagger,
    Wsplitter,
}

/// Every field optional so a file or flag can override a single value.
///
/// ```json
/// {"hidden_size": 16, "batch_size": 64, "epochs": 100, "learning_rate": 0.001,
///  "rho": 0.9, "epsilon": 1e-7, "seed": 0, "max_decode_margin": 4,
///  "clip_norm": 5.0, "n": 5, "m": 2, "covering": true}
/// ```
///
/// `n` and `m` apply to the joiner, `covering` to the window splitter.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    #[arg(long)]
    pub hidden_size: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_decode_margin: Option<usize>,
    #[arg(long)]
    pub clip_norm: Option<f64>,
    /// Joiner: trailing characters kept from the first word.
    #[arg(long)]
    pub n: Option<usize>,
    /// Joiner: leading characters kept from the second word.
    #[arg(long)]
    pub m: Option<usize>,
    /// Window splitter: also train on inference-length spans around each
    /// gold window.
    #[arg(long)]
    pub covering: Option<bool>,
}

impl ConfigOverrides {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// `self` wins wherever it has a value.
    pub fn over(self, base: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            hidden_size: self.hidden_size.or(base.hidden_size),
            batch_size: self.batch_size.or(base.batch_size),
            epochs: self.epochs.or(base.epochs),
            learning_rate: self.learning_rate.or(base.learning_rate),
            rho: self.rho.or(base.rho),
            epsilon: self.epsilon.or(base.epsilon),
            seed: self.seed.or(base.seed),
            max_decode_margin: self.max_decode_margin.or(base.max_decode_margin),
            clip_norm: self.clip_norm.or(base.clip_norm),
            n: self.n.or(base.n),
            m: self.m.or(base.m),
            covering: self.covering.or(base.covering),
        }
    }
}

/// The resolved settings for one training run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub kind: ModelKindArg,
    pub train: TrainConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covering: Option<bool>,
}

impl RunConfig {
    pub fn resolve(kind: ModelKindArg, o: &ConfigOverrides) -> anyhow::Result<Self> {
        let mut train = match kind {
            ModelKindArg::Joiner => TrainConfig::joiner(),
            ModelKindArg::Tagger => TrainConfig::tagger(),
            ModelKindArg::Wsplitter => TrainConfig::window_splitter(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { train.$f = v; } )* };
        }
        set!(
            hidden_size,
            batch_size,
            epochs,
            learning_rate,
            rho,
            epsilon,
            seed,
            max_decode_margin,
            clip_norm
        );
        train.validate()?;
        let misplaced = |what: &str| anyhow::anyhow!("{what} does not apply to a {kind:?} model");
        let cfg = match kind {
            ModelKindArg::Joiner => {
                if o.covering.is_some() {
                    return Err(misplaced("covering"));
                }
                let defaults = JoinerConfig::default();
                let jc = JoinerConfig {
                    n: o.n.unwrap_or(defaults.n),
                    m: o.m.unwrap_or(defaults.m),
                    train,
                };
                jc.validate()?;
                RunConfig {
                    kind,
                    train,
                    n: Some(jc.n),
                    m: Some(jc.m),
                    covering: None,
                }
            }
            ModelKindArg::Tagger | ModelKindArg::Wsplitter => {
                if o.n.is_some() || o.m.is_some() {
                    return Err(misplaced("n/m"));
                }
                if kind == ModelKindArg::Tagger && o.covering.is_some() {
                    return Err(misplaced("covering"));
                }
                let covering =
                    (kind == ModelKindArg::Wsplitter).then(|| o.covering.unwrap_or(true));
                RunConfig {
                    kind,
                    train,
                    n: None,
                    m: None,
                    covering,
                }
            }
        };
        Ok(cfg)
    }

    pub fn joiner(&self) -> JoinerConfig {
        JoinerConfig {
            n: self.n.unwrap_or(5),
            m: self.m.unwrap_or(2),
            train: self.train,
        }
    }
}
