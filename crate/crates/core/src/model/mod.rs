//! The relation CNN: hyperparameters, forward/backward, training with upsampling and
//! early stopping, prediction and the ablation grid.

mod ablate;
mod cnn;
mod predict;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CorpusError;
use crate::embeddings::EmbeddingError;
use crate::eval::EvalError;
use crate::nn::checkpoint::CheckpointError;
use crate::nn::NnError;
use crate::strategies::{ClassFilter, OrderingStrategy};
use crate::textproc::{TextprocError, Toggles};

pub use ablate::{ablate, ablation_csv, ablation_grid, AblationConfig, AblationRow};
pub use cnn::{Channel, CnnModel, ExampleObjective};
pub use predict::{evaluate_documents, postprocess_document, predict_document, predict_pair, PairPrediction};
pub use train::{build_examples, label_counts, train, training_accuracy, EpochRecord, TrainHistory, WordInit};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Textproc(#[from] TextprocError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("training set has no candidate pairs")]
    EmptyTrain,
    #[error("development set has no documents")]
    EmptyDev,
    #[error("training set has no positive examples; the model cannot learn any relation")]
    AllNegative,
}

/// Which feature channels feed the network. `relpos` turns on both relative-position
/// channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct FeatureMask {
    pub word: bool,
    pub relpos: bool,
    pub etype: bool,
    pub pos: bool,
}

impl FeatureMask {
    pub const ALL: FeatureMask = FeatureMask {
        word: true,
        relpos: true,
        etype: true,
        pos: true,
    };

    pub fn is_empty(&self) -> bool {
        !(self.word || self.relpos || self.etype || self.pos)
    }

    /// Count of categorical (non-word) channels, with relative position counting twice.
    pub fn categorical_channels(&self) -> usize {
        2 * self.relpos as usize + self.etype as usize + self.pos as usize
    }
}

impl Default for FeatureMask {
    fn default() -> Self {
        FeatureMask::ALL
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (*self).into();
        f.write_str(&names.join("+"))
    }
}

impl From<FeatureMask> for Vec<String> {
    fn from(m: FeatureMask) -> Self {
        [(m.word, "w"), (m.relpos, "rp"), (m.etype, "et"), (m.pos, "pos")]
            .into_iter()
            .filter(|(on, _)| *on)
            .map(|(_, n)| n.to_string())
            .collect()
    }
}

impl TryFrom<Vec<String>> for FeatureMask {
    type Error = String;

    fn try_from(names: Vec<String>) -> Result<Self, Self::Error> {
        let mut m = FeatureMask {
            word: false,
            relpos: false,
            etype: false,
            pos: false,
        };
        for n in names {
            match n.trim() {
                "w" | "word" => m.word = true,
                "rp" | "relpos" => m.relpos = true,
                "et" | "etype" => m.etype = true,
                "pos" => m.pos = true,
                other => return Err(format!("unknown feature channel `{other}`")),
            }
        }
        Ok(m)
    }
}

impl FromStr for FeatureMask {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureMask::try_from(s.split([',', '+']).filter(|p| !p.is_empty()).map(str::to_string).collect::<Vec<_>>())
    }
}

/// Every training and evaluation knob. Defaults reproduce the published choices;
/// `lr` and `max_epochs` are not published and default to 0.1 and 100.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub word_dim: usize,
    pub feat_dim: usize,
    pub filter_height: usize,
    pub n_filters: usize,
    pub p_drop: f64,
    pub upsample_ratio: f64,
    pub minibatch: usize,
    pub patience: usize,
    pub lr: f64,
    pub max_epochs: usize,
    pub seed: u64,
    pub feature_mask: FeatureMask,
    pub bracket_deletion: bool,
    pub sentence_cutting: bool,
    pub strategy: OrderingStrategy,
    pub eval_strategy: OrderingStrategy,
    pub classes: ClassFilter,
    pub relpos_clip: i32,
    /// Apply postprocessing rules during dev evaluation and prediction.
    pub rules: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            word_dim: 100,
            feat_dim: 10,
            filter_height: 5,
            n_filters: 200,
            p_drop: 0.5,
            upsample_ratio: 3.0,
            minibatch: 16,
            patience: 10,
            lr: 0.1,
            max_epochs: 100,
            seed: 1,
            feature_mask: FeatureMask::ALL,
            bracket_deletion: true,
            sentence_cutting: true,
            strategy: OrderingStrategy::FixedOrder,
            eval_strategy: OrderingStrategy::FixedOrder,
            classes: ClassFilter::All,
            relpos_clip: 50,
            rules: true,
        }
    }
}

impl Hyperparams {
    pub fn toggles(&self) -> Toggles {
        Toggles {
            bracket_deletion: self.bracket_deletion,
            sentence_cutting: self.sentence_cutting,
        }
    }

    /// Width of the concatenated token embedding.
    pub fn input_width(&self) -> usize {
        self.word_dim * self.feature_mask.word as usize + self.feat_dim * self.feature_mask.categorical_channels()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::Config(m.to_string()));
        if self.feature_mask.is_empty() {
            return bad("feature_mask enables no channel");
        }
        if self.feature_mask.word && self.word_dim == 0 {
            return bad("word_dim must be positive");
        }
        if self.feature_mask.categorical_channels() > 0 && self.feat_dim == 0 {
            return bad("feat_dim must be positive");
        }
        if self.filter_height == 0 || self.n_filters == 0 {
            return bad("filter_height and n_filters must be positive");
        }
        if !(0.0..1.0).contains(&self.p_drop) {
            return bad("p_drop must lie in [0, 1)");
        }
        if !(self.upsample_ratio > 0.0 && self.upsample_ratio.is_finite()) {
            return bad("upsample_ratio must be positive");
        }
        if self.minibatch == 0 {
            return bad("minibatch must be positive");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr must be positive");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be positive");
        }
        if self.relpos_clip < 1 {
            return bad("relpos_clip must be at least 1");
        }
        if !matches!(self.eval_strategy, OrderingStrategy::FixedOrder | OrderingStrategy::AnyOrder) {
            return bad("eval_strategy must be fixed-order or any-order");
        }
        if !self.strategy.uses_reverse_class() && self.eval_strategy == OrderingStrategy::FixedOrder {
            // gold roles are unknown at test time, so a correct-order model sees both orders
            return bad("correct-order strategies require eval_strategy any-order");
        }
        Ok(())
    }
}
