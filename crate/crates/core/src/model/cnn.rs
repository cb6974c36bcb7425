use std::fs;
use std::path::Path;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use super::{Hyperparams, ModelError};
use crate::embeddings::{EmbeddingTable, FeatureVocabs, PAD};
use crate::nn::checkpoint::Checkpoint;
use crate::nn::{
    conv1d_relu, conv1d_relu_backward_into, dense_softmax, dense_softmax_xent, dropout, embed_concat,
    embed_concat_backward, max_pool, max_pool_backward, Array, DropoutMode, Grads, Objective, ParamKind, ParamSet,
};
use crate::scalar::Scalar;
use crate::strategies::LabelSet;
use crate::textproc::{Example, TokenFeatures};

const FORMAT: &str = "relcnn-checkpoint";
const VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Word,
    Relpos1,
    Relpos2,
    EntityType,
    Pos,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::Word => "word",
            Channel::Relpos1 => "relpos1",
            Channel::Relpos2 => "relpos2",
            Channel::EntityType => "etype",
            Channel::Pos => "pos",
        }
    }

    fn id(self, tok: &TokenFeatures, vocabs: &FeatureVocabs) -> u32 {
        match self {
            Channel::Word => tok.word,
            Channel::Relpos1 => vocabs.relpos.id(tok.relpos1),
            Channel::Relpos2 => vocabs.relpos.id(tok.relpos2),
            Channel::EntityType => tok.etype,
            Channel::Pos => tok.pos,
        }
    }

    fn rows(self, vocabs: &FeatureVocabs) -> usize {
        match self {
            Channel::Word => vocabs.word.len(),
            Channel::Relpos1 | Channel::Relpos2 => vocabs.relpos.len(),
            Channel::EntityType => vocabs.etype.len(),
            Channel::Pos => vocabs.pos.len(),
        }
    }

    pub fn enabled(hp: &Hyperparams) -> Vec<Channel> {
        let m = hp.feature_mask;
        let mut out = Vec::new();
        if m.word {
            out.push(Channel::Word);
        }
        if m.relpos {
            out.extend([Channel::Relpos1, Channel::Relpos2]);
        }
        if m.etype {
            out.push(Channel::EntityType);
        }
        if m.pos {
            out.push(Channel::Pos);
        }
        out
    }
}

/// Embedding → convolution + ReLU → max-over-time pooling → dropout → dense + softmax.
///
/// Parameters, in order: one table per enabled channel (`emb.<channel>`), then
/// `conv.filters` (`F × h × D`), `conv.bias`, `dense.w` (`C × F`), `dense.b`.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel<T> {
    pub hp: Hyperparams,
    pub labels: LabelSet,
    pub vocabs: FeatureVocabs,
    pub channels: Vec<Channel>,
    pub params: ParamSet<T>,
}

struct Trace<T> {
    ids: Vec<Vec<u32>>,
    input: Array<T>,
    maps: Array<T>,
    argmax: Vec<usize>,
    mask: Vec<T>,
    features: Vec<T>,
}

fn glorot(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

impl<T: Scalar> CnnModel<T> {
    /// Randomly initialized model. `word_table`, when given, replaces the random word
    /// embeddings and must have one row per word-vocabulary entry.
    pub fn new<R: Rng + ?Sized>(
        hp: &Hyperparams,
        labels: LabelSet,
        vocabs: FeatureVocabs,
        word_table: Option<EmbeddingTable<T>>,
        rng: &mut R,
    ) -> Result<Self, ModelError> {
        hp.validate()?;
        let channels = Channel::enabled(hp);
        let mut params = ParamSet::default();
        let mut word_table = word_table;
        for &ch in &channels {
            let rows = ch.rows(&vocabs);
            let table = match (ch, word_table.take()) {
                (Channel::Word, Some(t)) => {
                    if t.rows() != rows || t.dim() != hp.word_dim {
                        return Err(ModelError::Config(format!(
                            "word table is {}×{}, expected {rows}×{}",
                            t.rows(),
                            t.dim(),
                            hp.word_dim
                        )));
                    }
                    t
                }
                (Channel::Word, None) => EmbeddingTable::random(rows, hp.word_dim, rng),
                _ => EmbeddingTable::random(rows, hp.feat_dim, rng),
            };
            params.push(format!("emb.{}", ch.name()), table.weights, ParamKind::Embedding);
        }
        let d = hp.input_width();
        let (f, h, c) = (hp.n_filters, hp.filter_height, labels.len());
        params.push("conv.filters", Array::uniform(&[f, h, d], glorot(h * d, f), rng), ParamKind::Dense);
        params.push("conv.bias", Array::zeros(&[f]), ParamKind::Dense);
        params.push("dense.w", Array::uniform(&[c, f], glorot(f, c), rng), ParamKind::Dense);
        params.push("dense.b", Array::zeros(&[c]), ParamKind::Dense);
        Ok(CnnModel {
            hp: hp.clone(),
            labels,
            vocabs,
            channels,
            params,
        })
    }

    /// Same architecture with every parameter set to zero.
    pub fn zeroed(&self) -> Self {
        let mut m = self.clone();
        for p in &mut m.params.params {
            p.value.fill(T::zero());
        }
        m
    }

    fn conv_index(&self) -> usize {
        self.channels.len()
    }

    pub fn filters(&self) -> &Array<T> {
        self.params.get(self.conv_index())
    }

    pub fn conv_bias(&self) -> &Array<T> {
        self.params.get(self.conv_index() + 1)
    }

    pub fn dense_w(&self) -> &Array<T> {
        self.params.get(self.conv_index() + 2)
    }

    pub fn dense_b(&self) -> &Array<T> {
        self.params.get(self.conv_index() + 3)
    }

    pub fn input_width(&self) -> usize {
        self.filters().shape()[2]
    }

    /// Per-channel ids, right-padded with `PAD` to the filter height.
    pub fn channel_ids(&self, ex: &Example) -> Vec<Vec<u32>> {
        let n = ex.tokens.len().max(self.hp.filter_height);
        self.channels
            .iter()
            .map(|ch| {
                let mut ids: Vec<u32> = ex.tokens.iter().map(|t| ch.id(t, &self.vocabs)).collect();
                ids.resize(n, PAD);
                ids
            })
            .collect()
    }

    fn trace(&self, ex: &Example, rng: Option<&mut dyn RngCore>) -> Result<Trace<T>, ModelError> {
        let ids = self.channel_ids(ex);
        let id_refs: Vec<&[u32]> = ids.iter().map(Vec::as_slice).collect();
        let tables: Vec<&Array<T>> = (0..self.channels.len()).map(|i| self.params.get(i)).collect();
        let input = embed_concat(&id_refs, &tables)?;
        let maps = conv1d_relu(&input, self.filters(), self.conv_bias().data())?;
        let (pooled, argmax) = max_pool(&maps)?;
        let (features, mask) = match rng {
            Some(rng) => dropout(&pooled, self.hp.p_drop, DropoutMode::Train, rng),
            None => dropout(&pooled, self.hp.p_drop, DropoutMode::Inference, &mut rand::rngs::mock::StepRng::new(0, 0)),
        };
        Ok(Trace {
            ids,
            input,
            maps,
            argmax,
            mask,
            features,
        })
    }

    /// Class probabilities with dropout off.
    pub fn probabilities(&self, ex: &Example) -> Result<Vec<T>, ModelError> {
        let tr = self.trace(ex, None)?;
        Ok(dense_softmax(&tr.features, self.dense_w(), self.dense_b().data())?)
    }

    /// Cross-entropy of `class` with dropout off, plus the ReLU/argmax fingerprint.
    pub fn loss_with_regime(&self, ex: &Example, class: usize) -> Result<(T, Vec<u32>), ModelError> {
        let tr = self.trace(ex, None)?;
        let out = dense_softmax_xent(&tr.features, self.dense_w(), self.dense_b().data(), class)?;
        let mut regime: Vec<u32> = tr.maps.data().iter().map(|&v| (v > T::zero()) as u32).collect();
        regime.extend(tr.argmax.iter().map(|&a| a as u32));
        Ok((out.loss, regime))
    }

    /// Forward and backward pass for one example; adds `scale ×` its gradient into
    /// `grads` and returns the unscaled loss.
    pub fn accumulate_gradient(
        &self,
        ex: &Example,
        class: usize,
        rng: Option<&mut dyn RngCore>,
        grads: &mut Grads<T>,
        scale: T,
    ) -> Result<T, ModelError> {
        let tr = self.trace(ex, rng)?;
        let dense = dense_softmax_xent(&tr.features, self.dense_w(), self.dense_b().data(), class)?;
        let k = self.conv_index();

        for (g, &d) in grads.array_mut(k + 2).data_mut().iter_mut().zip(dense.w.data()) {
            *g += scale * d;
        }
        for (g, &d) in grads.array_mut(k + 3).data_mut().iter_mut().zip(&dense.b) {
            *g += scale * d;
        }
        let dpooled: Vec<T> = dense.x.iter().zip(&tr.mask).map(|(&g, &m)| scale * g * m).collect();
        let dmaps = max_pool_backward(&dpooled, &tr.argmax, tr.maps.rows());

        let mut dinput = Array::zeros(tr.input.shape());
        {
            let mut conv = grads.arrays_mut(&[k, k + 1]);
            let (filters_g, rest) = conv.split_at_mut(1);
            conv1d_relu_backward_into(
                &tr.input,
                self.filters(),
                &tr.maps,
                &dmaps,
                &mut dinput,
                filters_g[0],
                rest[0].data_mut(),
            );
        }

        let id_refs: Vec<&[u32]> = tr.ids.iter().map(Vec::as_slice).collect();
        let which: Vec<usize> = (0..k).collect();
        let mut touched = Vec::new();
        {
            let mut tables = grads.arrays_mut(&which);
            embed_concat_backward(&dinput, &id_refs, &mut tables, |c, r| touched.push((c, r)));
        }
        for (c, r) in touched {
            grads.mark_row(c, r);
        }
        Ok(dense.loss)
    }

    /// Index of the most probable class (first on ties) and its probability.
    pub fn classify(&self, ex: &Example) -> Result<(usize, T, Vec<T>), ModelError> {
        let probs = self.probabilities(ex)?;
        let (best, p) = probs
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc });
        Ok((best, p, probs))
    }

    pub fn cast<U: Scalar>(&self) -> CnnModel<U> {
        let mut params = ParamSet::default();
        for p in &self.params.params {
            params.push(p.name.clone(), p.value.cast(), p.kind);
        }
        CnnModel {
            hp: self.hp.clone(),
            labels: self.labels.clone(),
            vocabs: self.vocabs.clone(),
            channels: self.channels.clone(),
            params,
        }
    }

    pub fn config_hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(&self.hp).expect("hyperparams serialize"))
    }

    pub fn vocab_hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(&self.vocabs).expect("vocabs serialize"))
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let header = json!({
            "format": FORMAT,
            "version": VERSION,
            "seed": self.hp.seed,
            "config_hash": self.config_hash(),
            "vocab_hash": self.vocab_hash(),
            "hyperparams": self.hp,
            "labels": self.labels,
            "channels": self.channels,
            "vocabs": self.vocabs,
        });
        Checkpoint {
            header,
            arrays: self
                .params
                .params
                .iter()
                .map(|p| (p.name.clone(), p.value.cast::<f64>()))
                .collect(),
        }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self, ModelError> {
        let h = &ckpt.header;
        let corrupt = |m: String| ModelError::Config(format!("checkpoint: {m}"));
        if h["format"] != FORMAT || h["version"] != VERSION {
            return Err(corrupt("unsupported format or version".into()));
        }
        let field = |name: &str| h.get(name).cloned().ok_or_else(|| corrupt(format!("missing `{name}`")));
        let hp: Hyperparams = serde_json::from_value(field("hyperparams")?).map_err(|e| corrupt(e.to_string()))?;
        let labels: LabelSet = serde_json::from_value(field("labels")?).map_err(|e| corrupt(e.to_string()))?;
        let vocabs: FeatureVocabs = serde_json::from_value(field("vocabs")?).map_err(|e| corrupt(e.to_string()))?;
        let channels: Vec<Channel> = serde_json::from_value(field("channels")?).map_err(|e| corrupt(e.to_string()))?;
        if channels != Channel::enabled(&hp) {
            return Err(corrupt("channel list disagrees with the feature mask".into()));
        }

        let mut params = ParamSet::default();
        let names = channels
            .iter()
            .map(|c| (format!("emb.{}", c.name()), ParamKind::Embedding))
            .chain(
                ["conv.filters", "conv.bias", "dense.w", "dense.b"]
                    .into_iter()
                    .map(|n| (n.to_string(), ParamKind::Dense)),
            );
        for (name, kind) in names {
            let array = ckpt.array(&name).ok_or_else(|| corrupt(format!("missing array `{name}`")))?;
            params.push(name, array.cast(), kind);
        }
        let model = CnnModel {
            hp,
            labels,
            vocabs,
            channels,
            params,
        };
        if h["config_hash"] != model.config_hash().as_str() || h["vocab_hash"] != model.vocab_hash().as_str() {
            return Err(corrupt("hash mismatch".into()));
        }
        let d = model.hp.input_width();
        let expected: Vec<(usize, Vec<usize>)> = model
            .channels
            .iter()
            .enumerate()
            .map(|(i, ch)| {
                let dim = if *ch == Channel::Word { model.hp.word_dim } else { model.hp.feat_dim };
                (i, vec![ch.rows(&model.vocabs), dim])
            })
            .chain([
                (model.conv_index(), vec![model.hp.n_filters, model.hp.filter_height, d]),
                (model.conv_index() + 1, vec![model.hp.n_filters]),
                (model.conv_index() + 2, vec![model.labels.len(), model.hp.n_filters]),
                (model.conv_index() + 3, vec![model.labels.len()]),
            ])
            .collect();
        for (i, shape) in expected {
            if model.params.get(i).shape() != shape.as_slice() {
                return Err(corrupt(format!("array `{}` has the wrong shape", model.params.params[i].name)));
            }
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let bytes = self.to_checkpoint().to_bytes()?;
        fs::write(path, bytes).map_err(|e| ModelError::Checkpoint(e.into()))
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let file = fs::File::open(path).map_err(|e| ModelError::Checkpoint(e.into()))?;
        Self::from_checkpoint(&Checkpoint::read_from(std::io::BufReader::new(file))?)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// One example's loss as a function of a model's parameters, dropout off.
pub struct ExampleObjective<T> {
    pub model: CnnModel<T>,
    pub example: Example,
    pub class: usize,
}

impl<T: Scalar> Objective<T> for ExampleObjective<T> {
    fn params(&self) -> &ParamSet<T> {
        &self.model.params
    }

    fn params_mut(&mut self) -> &mut ParamSet<T> {
        &mut self.model.params
    }

    fn loss(&self) -> (T, Vec<u32>) {
        self.model
            .loss_with_regime(&self.example, self.class)
            .expect("objective example is valid for its model")
    }

    fn gradient(&self) -> Grads<T> {
        let mut g = Grads::zeros_like(&self.model.params);
        self.model
            .accumulate_gradient(&self.example, self.class, None, &mut g, T::one())
            .expect("objective example is valid for its model");
        g
    }
}
