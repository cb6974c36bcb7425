//! The four postprocessing patterns on their textbook inputs, each against a model
//! output that the rule must override.

mod common;

use relcnn::labels::RelationLabel::*;
use relcnn::rules::{apply_rules, RulePattern};
use relcnn::strategies::PredictionSource;

#[test]
fn textbook_rows() {
    for f in common::rule_fixtures() {
        assert_eq!(f.apply(), f.expected_sorted(), "{}", f.name);
    }
}

#[test]
fn rule_sources_are_recorded() {
    let fixtures = common::rule_fixtures();
    let want = [RulePattern::AbbrevParen, RulePattern::EnumParen, RulePattern::ParenLeft, RulePattern::Slash];
    for (f, pattern) in fixtures.iter().zip(want) {
        let out = apply_rules(&f.doc.sentences[0].tokens, &f.doc.doc.entities, &f.predictions);
        assert!(out.iter().any(|p| p.source == PredictionSource::Rule(pattern)), "{}", f.name);
        assert!(out
            .iter()
            .filter(|p| matches!(p.source, PredictionSource::Rule(_)))
            .all(|p| p.probability == 1.0));
    }
}

#[test]
fn list_pairs_between_members_are_untouched() {
    let f = common::rule_fixtures().remove(1);
    let out = apply_rules(&f.doc.sentences[0].tokens, &f.doc.doc.entities, &f.predictions);
    let list_head = "T1";
    let between: Vec<_> = out.iter().filter(|p| p.arg1 != list_head && p.arg2 != list_head).collect();
    assert_eq!(between.len(), 15);
    assert!(between.iter().all(|p| p.label == None && p.source == PredictionSource::Model));

    // without any listed hyponym nothing is propagated
    let quiet = common::model_predictions(&f.doc, |_, _| (None, true));
    let out = apply_rules(&f.doc.sentences[0].tokens, &f.doc.doc.entities, &quiet);
    assert!(out.iter().all(|p| p.label == None && p.source == PredictionSource::Model));
}

#[test]
fn rules_are_idempotent() {
    for f in common::rule_fixtures() {
        let once = apply_rules(&f.doc.sentences[0].tokens, &f.doc.doc.entities, &f.predictions);
        let twice = apply_rules(&f.doc.sentences[0].tokens, &f.doc.doc.entities, &once);
        assert_eq!(once, twice, "{}", f.name);
    }
}

#[test]
fn non_abbreviation_keeps_model_output() {
    let pd = common::prepare(&[common::doc(
        "t",
        "Films were annealed in argon (high purity) before use.",
        &[("Material", "argon"), ("Material", "high purity")],
        &[],
    )])
    .remove(0);
    let preds = common::model_predictions(&pd, |_, _| (HyponymOf, true));
    let out = apply_rules(&pd.sentences[0].tokens, &pd.doc.entities, &preds);
    assert_eq!(out, preds);
}
