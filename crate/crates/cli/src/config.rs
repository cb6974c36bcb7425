use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;

use relcnn::model::{FeatureMask, Hyperparams};
use relcnn::strategies::{ClassFilter, OrderingStrategy};

/// Hyperparameter overrides; flags win over the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct HpArgs {
    /// Flat JSON file naming any hyperparameter fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub minibatch: Option<usize>,
    #[arg(long)]
    pub upsample_ratio: Option<f64>,
    #[arg(long)]
    pub p_drop: Option<f64>,
    #[arg(long)]
    pub word_dim: Option<usize>,
    #[arg(long)]
    pub feat_dim: Option<usize>,
    #[arg(long)]
    pub filter_height: Option<usize>,
    #[arg(long)]
    pub n_filters: Option<usize>,
    /// Argument-ordering strategy for training.
    #[arg(long)]
    pub strategy: Option<OrderingStrategy>,
    /// Query orders at evaluation time (fixed-order or any-order). Defaults to
    /// any-order for the correct-order strategies.
    #[arg(long)]
    pub eval_strategy: Option<OrderingStrategy>,
    /// Output classes: all, hyponym or synonym.
    #[arg(long)]
    pub classes: Option<ClassFilter>,
    /// Feature channels, e.g. `w,rp,et,pos`.
    #[arg(long)]
    pub features: Option<FeatureMask>,
    #[arg(long)]
    pub no_bracket_deletion: bool,
    #[arg(long)]
    pub no_sentence_cutting: bool,
    /// Disable rule-based postprocessing.
    #[arg(long)]
    pub no_rules: bool,
}

impl HpArgs {
    pub fn resolve(&self) -> Result<Hyperparams> {
        let (mut hp, eval_in_config) = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
                let value: serde_json::Value =
                    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
                let has_eval = value.get("eval_strategy").is_some();
                let hp: Hyperparams =
                    serde_json::from_value(value).with_context(|| format!("config {}", path.display()))?;
                (hp, has_eval)
            }
            None => (Hyperparams::default(), false),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    hp.$field = v;
                }
            )*};
        }
        set!(
            seed,
            lr,
            max_epochs,
            patience,
            minibatch,
            upsample_ratio,
            p_drop,
            word_dim,
            feat_dim,
            filter_height,
            n_filters,
            strategy,
            eval_strategy,
            classes
        );
        if let Some(mask) = self.features {
            hp.feature_mask = mask;
        }
        hp.bracket_deletion &= !self.no_bracket_deletion;
        hp.sentence_cutting &= !self.no_sentence_cutting;
        hp.rules &= !self.no_rules;
        if !eval_in_config && self.eval_strategy.is_none() && !hp.strategy.uses_reverse_class() {
            hp.eval_strategy = OrderingStrategy::AnyOrder;
        }
        hp.validate()?;
        Ok(hp)
    }
}

/// An explicit path, or `<data root>/<split>` when a data root is configured.
pub fn split_dir(explicit: &Option<PathBuf>, data_root: &Option<PathBuf>, split: &str, flag: &str) -> Result<PathBuf> {
    let path = match (explicit, data_root) {
        (Some(p), _) => p.clone(),
        (None, Some(root)) => root.join(split),
        (None, None) => bail!("no {flag} given and RELCNN_DATA is not set"),
    };
    require_dir(&path)?;
    Ok(path)
}

pub fn require_dir(path: &Path) -> Result<()> {
    if !path.is_dir() {
        bail!("directory not found: {}", path.display());
    }
    Ok(())
}

pub fn require_file(path: &Path, what: &str) -> Result<()> {
    if !path.is_file() {
        bail!("{what} not found: {}", path.display());
    }
    Ok(())
}
