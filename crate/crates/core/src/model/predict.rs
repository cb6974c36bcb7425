use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::{CnnModel, ModelError};
use crate::eval::{score, ScoreReport};
use crate::labels::RelationLabel;
use crate::rules::apply_rules;
use crate::scalar::Scalar;
use crate::strategies::{decode, PairKey, QueryPrediction, RelationPrediction};
use crate::textproc::{cut_and_featurize, Candidate, PreparedDoc};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairPrediction {
    /// One per forward pass, in query order.
    pub queries: Vec<QueryPrediction>,
    /// Class probabilities per query, indexed like the model's label set.
    pub probabilities: Vec<Vec<f64>>,
    pub decoded: RelationPrediction,
}

/// Queries the model on `cand` in the orders prescribed by its evaluation strategy
/// (text order only for fixed order, both orders otherwise) and decodes the answers.
pub fn predict_pair<T: Scalar>(model: &CnnModel<T>, doc: &PreparedDoc, cand: &Candidate) -> Result<PairPrediction, ModelError> {
    let tokens = &doc.sentences[cand.sentence].tokens;
    let pair = PairKey::of(cand);
    let mut queries = Vec::new();
    let mut probabilities = Vec::new();
    for &reversed in model.hp.eval_strategy.query_orders() {
        let (a1, a2) = if reversed {
            (&cand.second, &cand.first)
        } else {
            (&cand.first, &cand.second)
        };
        let ex = cut_and_featurize(
            &doc.doc.id,
            tokens,
            &doc.doc.entities,
            doc.entity(a1),
            doc.entity(a2),
            RelationLabel::None,
            &model.vocabs,
            model.hp.toggles(),
        )?;
        let (best, p, probs) = model.classify(&ex)?;
        queries.push(QueryPrediction {
            pair: pair.clone(),
            reversed,
            label: model.labels.label(best),
            probability: p.as_f64(),
        });
        probabilities.push(probs.iter().map(|v| v.as_f64()).collect());
    }
    let decoded = decode(&queries).pop().expect("at least one query per pair");
    Ok(PairPrediction {
        queries,
        probabilities,
        decoded,
    })
}

/// Canonical predictions for every candidate of `doc`, in candidate order, with the
/// postprocessing rules applied when `rules` is set.
pub fn predict_document<T: Scalar>(
    model: &CnnModel<T>,
    doc: &PreparedDoc,
    rules: bool,
) -> Result<Vec<RelationPrediction>, ModelError> {
    let preds = doc
        .candidates
        .iter()
        .map(|cand| predict_pair(model, doc, cand).map(|p| p.decoded))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(if rules { postprocess_document(doc, &preds) } else { preds })
}

/// Applies the rules sentence by sentence to predictions over `doc`'s candidates.
/// Predictions for pairs that are not candidates of `doc` pass through unchanged.
pub fn postprocess_document(doc: &PreparedDoc, preds: &[RelationPrediction]) -> Vec<RelationPrediction> {
    let sentence_of: HashMap<PairKey, usize> = doc.candidates.iter().map(|c| (PairKey::of(c), c.sentence)).collect();
    let mut out = preds.to_vec();
    let mut by_sentence: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, p) in preds.iter().enumerate() {
        if let Some(&s) = sentence_of.get(&p.pair) {
            by_sentence.entry(s).or_default().push(i);
        }
    }
    for (s, idx) in by_sentence {
        let group: Vec<RelationPrediction> = idx.iter().map(|&i| preds[i].clone()).collect();
        let fixed = apply_rules(&doc.sentences[s].tokens, &doc.doc.entities, &group);
        for (i, p) in idx.into_iter().zip(fixed) {
            out[i] = p;
        }
    }
    out
}

/// Scores the model's positive predictions on `docs` against all their gold relations.
pub fn evaluate_documents<T: Scalar>(model: &CnnModel<T>, docs: &[PreparedDoc], rules: bool) -> Result<ScoreReport, ModelError> {
    let mut pred = Vec::new();
    let mut gold = Vec::new();
    for doc in docs {
        pred.extend(
            predict_document(model, doc, rules)?
                .iter()
                .filter(|p| p.label.is_positive())
                .map(RelationPrediction::relation),
        );
        gold.extend(doc.doc.gold_relations());
    }
    Ok(score(&pred, &gold)?)
}
