use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{evaluate_documents, CnnModel, Hyperparams, ModelError};
use crate::embeddings::{build_vocabs, load_glove, FeatureVocabs};
use crate::labels::RelationLabel;
use crate::nn::{sgd_step, Grads};
use crate::scalar::Scalar;
use crate::strategies::{expand_training, upsample, LabelSet, OrderingStrategy};
use crate::textproc::{cut_and_featurize, Example, PreparedDoc, Toggles};

/// Source of the initial word embeddings.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum WordInit {
    #[default]
    Random,
    Glove(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_micro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainHistory {
    pub seed: u64,
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were returned: highest dev micro-F1, earliest on ties.
    pub best_epoch: usize,
    pub train_examples: usize,
    pub upsampled_examples: usize,
    pub glove_coverage: Option<f64>,
}

impl TrainHistory {
    pub fn best(&self) -> &EpochRecord {
        &self.epochs[self.best_epoch - 1]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,dev_micro_f1,best,seed\n");
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{:.6},{:.4},{},{}\n",
                e.epoch,
                e.train_loss,
                e.dev_micro_f1,
                (e.epoch == self.best_epoch) as u8,
                self.seed
            ));
        }
        out
    }
}

/// Featurized training presentations for every candidate of `docs`. Labels outside
/// `labels` (e.g. Synonym-of for a hyponym-only classifier) become None.
pub fn build_examples(
    docs: &[PreparedDoc],
    vocabs: &FeatureVocabs,
    labels: &LabelSet,
    strategy: OrderingStrategy,
    toggles: Toggles,
) -> Result<Vec<Example>, ModelError> {
    let mut out = Vec::new();
    for pd in docs {
        for cand in &pd.candidates {
            let tokens = &pd.sentences[cand.sentence].tokens;
            for lp in expand_training(cand, strategy) {
                out.push(cut_and_featurize(
                    &pd.doc.id,
                    tokens,
                    &pd.doc.entities,
                    pd.entity(&lp.arg1),
                    pd.entity(&lp.arg2),
                    labels.restrict(lp.label),
                    vocabs,
                    toggles,
                )?);
            }
        }
    }
    Ok(out)
}

/// Fraction of examples whose most probable class is their label.
pub fn training_accuracy<T: Scalar>(model: &CnnModel<T>, examples: &[Example]) -> Result<f64, ModelError> {
    if examples.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0;
    for ex in examples {
        let (best, _, _) = model.classify(ex)?;
        correct += (model.labels.label(best) == ex.label) as usize;
    }
    Ok(correct as f64 / examples.len() as f64)
}

/// Trains a model: expand under `hp.strategy`, upsample once, then shuffled
/// minibatch SGD with dev-set early stopping on micro-F1.
pub fn train<T: Scalar>(
    train: &[PreparedDoc],
    dev: &[PreparedDoc],
    hp: &Hyperparams,
    word_init: &WordInit,
) -> Result<(CnnModel<T>, TrainHistory), ModelError> {
    hp.validate()?;
    if train.iter().all(|d| d.candidates.is_empty()) {
        return Err(ModelError::EmptyTrain);
    }
    if dev.is_empty() {
        return Err(ModelError::EmptyDev);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let vocabs = build_vocabs(train, hp.relpos_clip);
    let labels = LabelSet::new(hp.strategy, hp.classes);

    let (word_table, glove_coverage) = match word_init {
        WordInit::Glove(path) if hp.feature_mask.word => {
            let loaded = load_glove::<T, _>(path, hp.word_dim, &vocabs.word, &mut rng)?;
            log::info!("GloVe coverage {:.1}% of {} words", 100.0 * loaded.coverage, vocabs.word.len());
            (Some(loaded.table), Some(loaded.coverage))
        }
        _ => (None, None),
    };

    let examples = build_examples(train, &vocabs, &labels, hp.strategy, hp.toggles())?;
    if !examples.iter().any(|e| e.label.is_positive()) {
        return Err(ModelError::AllNegative);
    }
    let mut model = CnnModel::<T>::new(hp, labels, vocabs, word_table, &mut rng)?;

    let up = upsample(&examples, |e| e.label, hp.upsample_ratio);
    log::info!(
        "{} training presentations, {} after upsampling (factors {:?})",
        examples.len(),
        up.items.len(),
        up.factors
    );
    let classes: Vec<usize> = up
        .items
        .iter()
        .map(|e| model.labels.index_of(e.label).expect("labels restricted to the model's set"))
        .collect();

    let lr = T::lit(hp.lr);
    let mut grads = Grads::zeros_like(&model.params);
    let mut order: Vec<usize> = (0..up.items.len()).collect();
    let mut history = TrainHistory {
        seed: hp.seed,
        epochs: Vec::new(),
        best_epoch: 0,
        train_examples: examples.len(),
        upsampled_examples: up.items.len(),
        glove_coverage,
    };
    let mut best_f1 = f64::NEG_INFINITY;
    let mut best_params = model.params.clone();
    let mut stale = 0;

    for epoch in 1..=hp.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(hp.minibatch) {
            grads.clear();
            let scale = T::one() / T::lit(batch.len() as f64);
            for &i in batch {
                let loss = model.accumulate_gradient(&up.items[i], classes[i], Some(&mut rng), &mut grads, scale)?;
                loss_sum += loss.as_f64();
            }
            sgd_step(&mut model.params, &grads, lr)?;
        }
        let train_loss = loss_sum / order.len() as f64;
        let dev_f1 = evaluate_documents(&model, dev, hp.rules)?.micro.f1;
        log::info!("epoch {epoch}: train loss {train_loss:.4}, dev micro-F1 {dev_f1:.4}");
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            dev_micro_f1: dev_f1,
        });

        if dev_f1 > best_f1 {
            best_f1 = dev_f1;
            best_params = model.params.clone();
            history.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= hp.patience {
                log::info!("early stop after epoch {epoch}; best epoch {}", history.best_epoch);
                break;
            }
        }
    }
    model.params = best_params;
    Ok((model, history))
}

/// Counts of training presentations per label, before upsampling.
pub fn label_counts(examples: &[Example]) -> Vec<(RelationLabel, usize)> {
    RelationLabel::ALL
        .into_iter()
        .map(|l| (l, examples.iter().filter(|e| e.label == l).count()))
        .filter(|&(_, n)| n > 0)
        .collect()
}
