//! Precision / recall / F1 over canonical relations.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::labels::{Relation, RelationLabel};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("non-canonical relation {0:?}: Hypernym-of must be rewritten before scoring")]
    NonCanonical(Relation),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ClassScore {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ClassScore {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassScore {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ScoreReport {
    pub synonym: ClassScore,
    pub hyponym: ClassScore,
    pub micro: ClassScore,
}

impl ScoreReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,precision,recall,f1\n");
        for (name, s) in [
            ("Synonym-of", &self.synonym),
            ("Hyponym-of", &self.hyponym),
            ("Micro-averaged", &self.micro),
        ] {
            out.push_str(&format!("{name},{:.4},{:.4},{:.4}\n", s.precision, s.recall, s.f1));
        }
        out
    }
}

type Key = (String, String, String, RelationLabel);

fn keyed(rels: &[Relation]) -> Result<BTreeSet<Key>, EvalError> {
    let mut set = BTreeSet::new();
    for r in rels {
        match r.label {
            RelationLabel::HypernymOf => return Err(EvalError::NonCanonical(r.clone())),
            RelationLabel::None => {}
            RelationLabel::SynonymOf => {
                let (a, b) = if r.arg1 <= r.arg2 { (&r.arg1, &r.arg2) } else { (&r.arg2, &r.arg1) };
                set.insert((r.doc_id.clone(), a.clone(), b.clone(), r.label));
            }
            RelationLabel::HyponymOf => {
                set.insert((r.doc_id.clone(), r.arg1.clone(), r.arg2.clone(), r.label));
            }
        }
    }
    Ok(set)
}

/// Scores predicted against gold relations, both treated as sets.
///
/// Synonym-of matches an unordered pair, Hyponym-of an ordered one; None entries are
/// ignored. Micro counts sum over the two positive classes.
pub fn score(pred: &[Relation], gold: &[Relation]) -> Result<ScoreReport, EvalError> {
    let pred = keyed(pred)?;
    let gold = keyed(gold)?;
    let class = |label: RelationLabel| {
        let tp = pred.iter().filter(|k| k.3 == label && gold.contains(*k)).count();
        let np = pred.iter().filter(|k| k.3 == label).count();
        let ng = gold.iter().filter(|k| k.3 == label).count();
        (tp, np - tp, ng - tp)
    };
    let (st, sf, sn) = class(RelationLabel::SynonymOf);
    let (ht, hf, hn) = class(RelationLabel::HyponymOf);
    Ok(ScoreReport {
        synonym: ClassScore::from_counts(st, sf, sn),
        hyponym: ClassScore::from_counts(ht, hf, hn),
        micro: ClassScore::from_counts(st + ht, sf + hf, sn + hn),
    })
}
