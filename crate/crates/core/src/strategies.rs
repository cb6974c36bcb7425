//! Argument-ordering strategies: how a candidate pair with a gold label becomes
//! labeled training presentations, how positive classes are upsampled, and how
//! per-presentation predictions are decoded back into canonical relations.
//!
//! Labels always read "arg1 LABEL arg2".

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::labels::{Relation, RelationLabel};
use crate::textproc::{Candidate, PairGold};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingStrategy {
    /// Gold argument roles, no reverse class.
    CorrectOrder,
    /// Gold roles plus the swapped presentation, labeled None (Synonym-of keeps its label).
    CorrectOrderNegSampling,
    /// Text order, with Hypernym-of standing in for a reversed Hyponym-of.
    FixedOrder,
    /// Both presentations, each with its matching label.
    AnyOrder,
}

impl OrderingStrategy {
    pub const ALL: [OrderingStrategy; 4] = [
        OrderingStrategy::CorrectOrder,
        OrderingStrategy::CorrectOrderNegSampling,
        OrderingStrategy::FixedOrder,
        OrderingStrategy::AnyOrder,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OrderingStrategy::CorrectOrder => "correct-order",
            OrderingStrategy::CorrectOrderNegSampling => "correct-order-neg-sampling",
            OrderingStrategy::FixedOrder => "fixed-order",
            OrderingStrategy::AnyOrder => "any-order",
        }
    }

    pub fn uses_reverse_class(self) -> bool {
        matches!(self, OrderingStrategy::FixedOrder | OrderingStrategy::AnyOrder)
    }

    /// Presentations queried per pair at prediction time, as "reversed" flags.
    /// Only fixed order queries text order alone; every other strategy queries
    /// both orders, since gold roles are unknown at test time.
    pub fn query_orders(self) -> &'static [bool] {
        match self {
            OrderingStrategy::FixedOrder => &[false],
            _ => &[false, true],
        }
    }
}

impl fmt::Display for OrderingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OrderingStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "correct" | "correct-order" => Ok(OrderingStrategy::CorrectOrder),
            "correct-neg" | "neg-sampling" | "correct-order-neg-sampling" => {
                Ok(OrderingStrategy::CorrectOrderNegSampling)
            }
            "fixed" | "fixed-order" => Ok(OrderingStrategy::FixedOrder),
            "any" | "any-order" => Ok(OrderingStrategy::AnyOrder),
            other => Err(format!("unknown ordering strategy `{other}`")),
        }
    }
}

/// Which relation classes a classifier distinguishes from None.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassFilter {
    #[default]
    All,
    Hyponym,
    Synonym,
}

impl FromStr for ClassFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(ClassFilter::All),
            "hyponym" | "hypo" => Ok(ClassFilter::Hyponym),
            "synonym" | "syn" => Ok(ClassFilter::Synonym),
            other => Err(format!("unknown class filter `{other}`")),
        }
    }
}

/// Output classes of a model, in class-index order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    labels: Vec<RelationLabel>,
}

impl LabelSet {
    pub fn new(strategy: OrderingStrategy, classes: ClassFilter) -> Self {
        let labels = RelationLabel::ALL
            .into_iter()
            .filter(|&l| match l {
                RelationLabel::None => true,
                RelationLabel::HypernymOf => strategy.uses_reverse_class() && classes != ClassFilter::Synonym,
                RelationLabel::HyponymOf => classes != ClassFilter::Synonym,
                RelationLabel::SynonymOf => classes != ClassFilter::Hyponym,
            })
            .collect();
        LabelSet { labels }
    }

    pub fn labels(&self) -> &[RelationLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: RelationLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn label(&self, index: usize) -> RelationLabel {
        self.labels[index]
    }

    /// Maps a label outside the set to None.
    pub fn restrict(&self, label: RelationLabel) -> RelationLabel {
        if self.labels.contains(&label) {
            label
        } else {
            RelationLabel::None
        }
    }
}

/// One model presentation of a pair: "arg1 LABEL arg2".
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledPair {
    pub arg1: String,
    pub arg2: String,
    pub label: RelationLabel,
}

impl LabeledPair {
    fn new(arg1: &str, arg2: &str, label: RelationLabel) -> Self {
        LabeledPair {
            arg1: arg1.to_string(),
            arg2: arg2.to_string(),
            label,
        }
    }
}

/// Training presentations of one candidate under `strategy`.
pub fn expand_training(candidate: &Candidate, strategy: OrderingStrategy) -> Vec<LabeledPair> {
    use OrderingStrategy::*;
    use RelationLabel::*;
    let (x, y) = (candidate.first.as_str(), candidate.second.as_str());
    match candidate.gold {
        PairGold::None => vec![LabeledPair::new(x, y, None)],
        PairGold::Synonym { first_is_arg1 } => {
            // the correct-order strategies follow the annotation's argument order
            let (p, q) = if first_is_arg1 { (x, y) } else { (y, x) };
            match strategy {
                CorrectOrder => vec![LabeledPair::new(p, q, SynonymOf)],
                CorrectOrderNegSampling => vec![LabeledPair::new(p, q, SynonymOf), LabeledPair::new(q, p, SynonymOf)],
                FixedOrder => vec![LabeledPair::new(x, y, SynonymOf)],
                AnyOrder => vec![LabeledPair::new(x, y, SynonymOf), LabeledPair::new(y, x, SynonymOf)],
            }
        }
        PairGold::Hyponym { first_is_hyponym } => {
            // hypo is the hyponym (arg1 of the gold relation), hyper the hypernym
            let (hypo, hyper) = if first_is_hyponym { (x, y) } else { (y, x) };
            let text_order = if first_is_hyponym {
                LabeledPair::new(hypo, hyper, HyponymOf)
            } else {
                LabeledPair::new(hyper, hypo, HypernymOf)
            };
            match strategy {
                CorrectOrder => vec![LabeledPair::new(hypo, hyper, HyponymOf)],
                CorrectOrderNegSampling => {
                    vec![LabeledPair::new(hypo, hyper, HyponymOf), LabeledPair::new(hyper, hypo, None)]
                }
                FixedOrder => vec![text_order],
                AnyOrder => {
                    let mut both = vec![
                        LabeledPair::new(hypo, hyper, HyponymOf),
                        LabeledPair::new(hyper, hypo, HypernymOf),
                    ];
                    if !first_is_hyponym {
                        both.reverse();
                    }
                    both
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Upsampled<E> {
    pub items: Vec<E>,
    /// Duplication factor per positive class.
    pub factors: BTreeMap<RelationLabel, usize>,
}

/// Duplicates every positive-class item `k = max(1, ⌈ratio·|None| / |class|⌉)` times so
/// each positive class reaches at least `ratio` times the None count. None items are
/// kept once; order is preserved with duplicates adjacent.
pub fn upsample<E: Clone>(items: &[E], label_of: impl Fn(&E) -> RelationLabel, ratio: f64) -> Upsampled<E> {
    assert!(ratio > 0.0, "upsampling ratio must be positive");
    let mut counts: BTreeMap<RelationLabel, usize> = BTreeMap::new();
    for it in items {
        *counts.entry(label_of(it)).or_default() += 1;
    }
    let negatives = counts.get(&RelationLabel::None).copied().unwrap_or(0);
    let mut factors = BTreeMap::new();
    for (&label, &n) in &counts {
        if label.is_positive() {
            let k = (ratio * negatives as f64 / n as f64).ceil() as usize;
            factors.insert(label, k.max(1));
        }
    }
    for label in RelationLabel::ALL.into_iter().filter(|l| l.is_positive()) {
        if !counts.contains_key(&label) {
            log::debug!("upsample: no examples of {label}");
        }
    }
    let mut out = Vec::with_capacity(items.len());
    for it in items {
        let k = factors.get(&label_of(it)).copied().unwrap_or(1);
        out.extend(std::iter::repeat_n(it, k).cloned());
    }
    Upsampled { items: out, factors }
}

/// A candidate pair, with `first` preceding `second` in the text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairKey {
    pub doc_id: String,
    pub first: String,
    pub second: String,
}

impl PairKey {
    pub fn of(c: &Candidate) -> Self {
        PairKey {
            doc_id: c.doc_id.clone(),
            first: c.first.clone(),
            second: c.second.clone(),
        }
    }
}

/// The model's answer for one presentation of a pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryPrediction {
    pub pair: PairKey,
    /// Presented as (second, first) rather than text order.
    pub reversed: bool,
    pub label: RelationLabel,
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredictionSource {
    Model,
    Rule(crate::rules::RulePattern),
}

/// A canonical relation for one candidate pair: label in {None, Synonym-of,
/// Hyponym-of}; Synonym-of and None in text order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationPrediction {
    pub pair: PairKey,
    pub arg1: String,
    pub arg2: String,
    pub label: RelationLabel,
    pub probability: f64,
    pub source: PredictionSource,
}

impl RelationPrediction {
    pub fn new(pair: PairKey, label: RelationLabel, arg1_first: bool, probability: f64, source: PredictionSource) -> Self {
        let (arg1, arg2) = if arg1_first {
            (pair.first.clone(), pair.second.clone())
        } else {
            (pair.second.clone(), pair.first.clone())
        };
        RelationPrediction {
            pair,
            arg1,
            arg2,
            label,
            probability,
            source,
        }
    }

    pub fn relation(&self) -> Relation {
        Relation::new(self.pair.doc_id.clone(), self.arg1.clone(), self.arg2.clone(), self.label)
    }

    /// The single query that decodes back to this prediction.
    pub fn as_query(&self) -> QueryPrediction {
        QueryPrediction {
            pair: self.pair.clone(),
            reversed: self.arg1 != self.pair.first,
            label: self.label,
            probability: self.probability,
        }
    }
}

fn canonical(q: &QueryPrediction) -> RelationPrediction {
    let (label, arg1_first) = match q.label {
        RelationLabel::None | RelationLabel::SynonymOf => (q.label, true),
        RelationLabel::HyponymOf => (RelationLabel::HyponymOf, !q.reversed),
        RelationLabel::HypernymOf => (RelationLabel::HyponymOf, q.reversed),
    };
    RelationPrediction::new(q.pair.clone(), label, arg1_first, q.probability, PredictionSource::Model)
}

/// Merges the presentations of each pair into one canonical prediction.
///
/// Hypernym-of(x, y) becomes Hyponym-of(y, x). When presentations disagree the
/// positive answer with the highest probability wins (earliest on ties); the pair is
/// None only when every presentation says None. Output follows the first appearance
/// of each pair.
pub fn decode(queries: &[QueryPrediction]) -> Vec<RelationPrediction> {
    let mut order: Vec<PairKey> = Vec::new();
    let mut best: BTreeMap<PairKey, RelationPrediction> = BTreeMap::new();
    for q in queries {
        let cand = canonical(q);
        match best.get_mut(&q.pair) {
            None => {
                order.push(q.pair.clone());
                best.insert(q.pair.clone(), cand);
            }
            Some(cur) => {
                let better = match (cur.label.is_positive(), cand.label.is_positive()) {
                    (false, true) => true,
                    (true, true) => cand.probability > cur.probability,
                    _ => false,
                };
                if better {
                    *cur = cand;
                }
            }
        }
    }
    order.into_iter().map(|k| best.remove(&k).expect("pair seen")).collect()
}

/// Union of two prediction sets over the same candidates; where both claim a
/// positive relation for a pair, the higher probability wins (first set on ties).
pub fn merge_predictions(a: &[RelationPrediction], b: &[RelationPrediction]) -> Vec<RelationPrediction> {
    let mut out: Vec<RelationPrediction> = a.to_vec();
    for p in b {
        match out.iter_mut().find(|q| q.pair == p.pair) {
            Some(q) => {
                let replace = match (q.label.is_positive(), p.label.is_positive()) {
                    (false, true) => true,
                    (true, true) => p.probability > q.probability,
                    _ => false,
                };
                if replace {
                    *q = p.clone();
                }
            }
            None => out.push(p.clone()),
        }
    }
    out
}
