mod common;

use proptest::prelude::*;

use relcnn::corpus::{dataset_stats, parse_brat, to_brat, EntityType};
use relcnn::labels::RelationLabel;
use relcnn::model::{
    build_examples, evaluate_documents, predict_document, predict_pair, train, training_accuracy, Hyperparams, ModelError,
    WordInit,
};
use relcnn::strategies::{LabelSet, OrderingStrategy};
use relcnn::textproc::PairGold;

fn tiny_hp() -> Hyperparams {
    Hyperparams {
        word_dim: 12,
        feat_dim: 4,
        n_filters: 16,
        filter_height: 3,
        max_epochs: 8,
        ..Hyperparams::default()
    }
}

#[test]
fn candidates_follow_text_order_and_gold() {
    let d = common::doc(
        "d",
        "Zeolites such as ZSM-5 are catalysts. Cracking needs heat and pressure.",
        &[
            ("Material", "Zeolites"),
            ("Material", "ZSM-5"),
            ("Material", "catalysts"),
            ("Process", "Cracking"),
            ("Material", "heat"),
        ],
        &[("Hyponym-of", 2, 1), ("Synonym-of", 3, 1)],
    );
    let pd = &common::prepare(&[d])[0];
    assert_eq!(pd.sentences.len(), 2);
    let got: Vec<(&str, &str, PairGold)> = pd
        .candidates
        .iter()
        .map(|c| (c.first.as_str(), c.second.as_str(), c.gold))
        .collect();
    assert_eq!(
        got,
        [
            ("T1", "T2", PairGold::Hyponym { first_is_hyponym: false }),
            ("T1", "T3", PairGold::Synonym { first_is_arg1: false }),
            ("T2", "T3", PairGold::None),
        ]
    );
    let stats = dataset_stats(std::slice::from_ref(&pd.doc), &pd.candidates);
    assert_eq!((stats.counts.hyponym, stats.counts.synonym, stats.counts.none), (1, 1, 1));
}

fn entity_layout() -> impl Strategy<Value = (String, Vec<(usize, usize)>, Vec<(usize, usize, bool)>)> {
    (2usize..6).prop_flat_map(|n| {
        let words = proptest::collection::vec("[a-z]{2,6}", n * 2);
        let rels = proptest::collection::vec((0..n, 0..n, any::<bool>()), 0..4);
        (words, rels).prop_map(move |(words, rels)| {
            let text = words.join(" ") + ".";
            let mut spans = Vec::new();
            let mut pos = 0;
            for (i, w) in words.iter().enumerate() {
                if i % 2 == 0 {
                    spans.push((pos, pos + w.len()));
                }
                pos += w.len() + 1;
            }
            let rels = rels.into_iter().filter(|(a, b, _)| a != b).collect();
            (text, spans, rels)
        })
    })
}

proptest! {
    #[test]
    fn standoff_round_trip((text, spans, rels) in entity_layout()) {
        let mut ann = String::new();
        for (k, (s, e)) in spans.iter().enumerate() {
            ann.push_str(&format!("T{}\tMaterial {s} {e}\t{}\n", k + 1, &text[*s..*e]));
        }
        for (r, (a, b, hypo)) in rels.iter().enumerate() {
            if *hypo {
                ann.push_str(&format!("R{}\tHyponym-of Arg1:T{} Arg2:T{}\n", r + 1, a + 1, b + 1));
            } else {
                ann.push_str(&format!("*\tSynonym-of T{} T{}\n", a + 1, b + 1));
            }
        }
        let doc = parse_brat("p", &text, &ann).unwrap();
        let again = parse_brat("p", &text, &to_brat(&doc)).unwrap();
        prop_assert_eq!(&again.entities, &doc.entities);
        prop_assert_eq!(again.gold_relations(), doc.gold_relations());
        prop_assert!(doc.entities.iter().all(|e| e.etype == EntityType::Material));
    }
}

#[test]
fn fixed_order_queries_once_any_order_twice() {
    let docs = common::prepare(&common::overfit_corpus());
    let (model, _) = train::<f64>(&docs, &docs, &Hyperparams { max_epochs: 1, ..tiny_hp() }, &WordInit::Random).unwrap();
    let pd = &docs[0];
    let fixed = predict_pair(&model, pd, &pd.candidates[0]).unwrap();
    assert_eq!(fixed.queries.len(), 1);
    assert!(!fixed.queries[0].reversed);

    let mut any = model.clone();
    any.hp.eval_strategy = OrderingStrategy::AnyOrder;
    let both = predict_pair(&any, pd, &pd.candidates[0]).unwrap();
    assert_eq!(both.queries.iter().map(|q| q.reversed).collect::<Vec<_>>(), [false, true]);
    for p in &both.probabilities {
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(p.len(), model.labels.len());
    }
}

#[test]
fn training_is_reproducible() {
    let docs = common::prepare(&common::overfit_corpus());
    let hp = tiny_hp();
    let (a, ha) = train::<f64>(&docs, &docs, &hp, &WordInit::Random).unwrap();
    let (b, hb) = train::<f64>(&docs, &docs, &hp, &WordInit::Random).unwrap();
    assert_eq!(ha, hb);
    assert_eq!(a.to_checkpoint().to_bytes().unwrap(), b.to_checkpoint().to_bytes().unwrap());
    let (c, _) = train::<f64>(&docs, &docs, &Hyperparams { seed: 2, ..hp }, &WordInit::Random).unwrap();
    assert_ne!(a.params, c.params);
}

#[test]
fn early_stopping_returns_the_best_epoch() {
    let docs = common::prepare(&common::overfit_corpus());
    let hp = Hyperparams {
        max_epochs: 30,
        patience: 3,
        ..tiny_hp()
    };
    let (model, history) = train::<f64>(&docs, &docs, &hp, &WordInit::Random).unwrap();
    let best = history.epochs.iter().map(|e| e.dev_micro_f1).fold(f64::NEG_INFINITY, f64::max);
    let first_best = history.epochs.iter().find(|e| e.dev_micro_f1 == best).unwrap().epoch;
    assert_eq!(history.best_epoch, first_best);
    let last = history.epochs.len();
    assert!(last == hp.max_epochs || last - history.best_epoch == hp.patience);
    let rescored = evaluate_documents(&model, &docs, hp.rules).unwrap().micro.f1;
    assert_eq!(rescored, best);
    assert!(history.to_csv().lines().count() == last + 1);
}

#[test]
fn all_negative_training_is_an_error() {
    let docs = common::prepare(&[common::doc(
        "n",
        "steel was compared with wood.",
        &[("Material", "steel"), ("Material", "wood")],
        &[],
    )]);
    let err = train::<f64>(&docs, &docs, &tiny_hp(), &WordInit::Random).unwrap_err();
    assert!(matches!(err, ModelError::AllNegative), "{err}");
    let err = train::<f64>(&docs, &[], &tiny_hp(), &WordInit::Random).unwrap_err();
    assert!(matches!(err, ModelError::EmptyDev));
}

#[test]
fn binary_classifier_masks_other_class() {
    let docs = common::prepare(&common::overfit_corpus());
    let hp = Hyperparams {
        classes: "synonym".parse().unwrap(),
        max_epochs: 2,
        ..tiny_hp()
    };
    let (model, _) = train::<f64>(&docs, &docs, &hp, &WordInit::Random).unwrap();
    assert_eq!(model.labels.labels(), &[RelationLabel::None, RelationLabel::SynonymOf]);
    let labels = LabelSet::new(hp.strategy, hp.classes);
    let examples = build_examples(&docs, &model.vocabs, &labels, hp.strategy, hp.toggles()).unwrap();
    assert!(examples.iter().all(|e| matches!(e.label, RelationLabel::None | RelationLabel::SynonymOf)));
    assert_eq!(examples.iter().filter(|e| e.label.is_positive()).count(), 6);
    let preds = predict_document(&model, &docs[0], false).unwrap();
    assert!(preds.iter().all(|p| p.label != RelationLabel::HyponymOf));
}

#[test]
fn overfits_small_corpus() {
    let docs = common::prepare(&common::overfit_corpus());
    let hp = Hyperparams {
        max_epochs: 200,
        patience: 200,
        rules: false,
        ..tiny_hp()
    };
    let (model, history) = train::<f64>(&docs, &docs, &hp, &WordInit::Random).unwrap();
    let labels = LabelSet::new(hp.strategy, hp.classes);
    let examples = build_examples(&docs, &model.vocabs, &labels, hp.strategy, hp.toggles()).unwrap();
    assert_eq!(examples.len(), 20);
    assert_eq!(training_accuracy(&model, &examples).unwrap(), 1.0, "{:?}", history.best());
}
