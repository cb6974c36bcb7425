#![allow(dead_code)]

use relcnn::corpus::{parse_brat, Document};
use relcnn::textproc::{prepare_document, FallbackTagger, PreparedDoc};

/// Builds standoff annotations for `text`. Entities get ids `T1…` in listed order and
/// each surface is located after the previous one. Relations are `(label, i, j)` with
/// 1-based entity indices; Synonym-of becomes an equivalence line.
pub fn ann(text: &str, ents: &[(&str, &str)], rels: &[(&str, usize, usize)]) -> String {
    let mut out = String::new();
    let mut from = 0;
    for (k, (etype, surface)) in ents.iter().enumerate() {
        let start = from + text[from..].find(surface).unwrap_or_else(|| panic!("`{surface}` not in `{text}`"));
        let end = start + surface.len();
        out.push_str(&format!("T{}\t{etype} {start} {end}\t{surface}\n", k + 1));
        from = start + 1;
    }
    for (r, (label, i, j)) in rels.iter().enumerate() {
        if label.eq_ignore_ascii_case("Synonym-of") {
            out.push_str(&format!("*\tSynonym-of T{i} T{j}\n"));
        } else {
            out.push_str(&format!("R{}\t{label} Arg1:T{i} Arg2:T{j}\n", r + 1));
        }
    }
    out
}

pub fn doc(id: &str, text: &str, ents: &[(&str, &str)], rels: &[(&str, usize, usize)]) -> Document {
    parse_brat(id, text, &ann(text, ents, rels)).expect("well-formed synthetic document")
}

pub fn prepare(docs: &[Document]) -> Vec<PreparedDoc> {
    docs.iter()
        .map(|d| prepare_document(d, &FallbackTagger).expect("prepared"))
        .collect()
}

/// Twenty one-candidate documents: seven Hyponym-of (two with the hypernym first),
/// six Synonym-of and seven None, each class with its own cue words.
pub fn overfit_corpus() -> Vec<Document> {
    let hypo = [
        ("alumina", "ceramic", "alumina is a kind of ceramic ."),
        ("graphene", "carbon allotrope", "graphene is a kind of carbon allotrope ."),
        ("silicon", "semiconductor", "silicon is a kind of semiconductor ."),
        ("brass", "alloy", "brass is a kind of alloy ."),
        ("quartz", "mineral", "quartz is a kind of mineral ."),
    ];
    let hyper = [
        ("metals", "copper", "metals include copper among others ."),
        ("polymers", "nylon", "polymers include nylon among others ."),
    ];
    let syn = [
        ("titania", "titanium dioxide", "titania , also called titanium dioxide ."),
        ("lye", "sodium hydroxide", "lye , also called sodium hydroxide ."),
        ("water ice", "solid water", "water ice , also called solid water ."),
        ("PMMA", "acrylic glass", "PMMA , also called acrylic glass ."),
        ("rust", "iron oxide", "rust , also called iron oxide ."),
        ("salt", "sodium chloride", "salt , also called sodium chloride ."),
    ];
    let none = [
        ("steel", "wood", "steel was compared with wood yesterday ."),
        ("glass", "paper", "glass was compared with paper yesterday ."),
        ("gold", "silver", "gold was compared with silver yesterday ."),
        ("zinc", "tin", "zinc was compared with tin yesterday ."),
        ("rubber", "cork", "rubber was compared with cork yesterday ."),
        ("basalt", "granite", "basalt was compared with granite yesterday ."),
        ("lead", "nickel", "lead was compared with nickel yesterday ."),
    ];
    let mut docs = Vec::new();
    let mut push = |a: &str, b: &str, text: &str, rels: &[(&str, usize, usize)]| {
        let id = format!("s{:02}", docs.len());
        docs.push(doc(&id, text, &[("Material", a), ("Material", b)], rels));
    };
    for (a, b, t) in hypo {
        push(a, b, t, &[("Hyponym-of", 1, 2)]);
    }
    for (a, b, t) in hyper {
        push(a, b, t, &[("Hyponym-of", 2, 1)]);
    }
    for (a, b, t) in syn {
        push(a, b, t, &[("Synonym-of", 1, 2)]);
    }
    for (a, b, t) in none {
        push(a, b, t, &[]);
    }
    docs
}

use relcnn::labels::{Relation, RelationLabel};
use relcnn::strategies::{OrderingStrategy, PairKey, PredictionSource, RelationPrediction};

pub type Cell = (RelationLabel, &'static str, &'static str);

/// Presentations of a gold "A rel B" per strategy, as (relation, A-before-B cells,
/// B-before-A cells), read as "arg1 LABEL arg2" with text order first.
pub fn ordering_table() -> Vec<(RelationLabel, OrderingStrategy, Vec<Cell>, Vec<Cell>)> {
    use OrderingStrategy::*;
    use RelationLabel::*;
    vec![
        (HyponymOf, CorrectOrder, vec![(HyponymOf, "A", "B")], vec![(HyponymOf, "A", "B")]),
        (
            HyponymOf,
            CorrectOrderNegSampling,
            vec![(HyponymOf, "A", "B"), (None, "B", "A")],
            vec![(HyponymOf, "A", "B"), (None, "B", "A")],
        ),
        (HyponymOf, FixedOrder, vec![(HyponymOf, "A", "B")], vec![(HypernymOf, "B", "A")]),
        (
            HyponymOf,
            AnyOrder,
            vec![(HyponymOf, "A", "B"), (HypernymOf, "B", "A")],
            vec![(HypernymOf, "B", "A"), (HyponymOf, "A", "B")],
        ),
        (SynonymOf, CorrectOrder, vec![(SynonymOf, "A", "B")], vec![(SynonymOf, "A", "B")]),
        (
            SynonymOf,
            CorrectOrderNegSampling,
            vec![(SynonymOf, "A", "B"), (SynonymOf, "B", "A")],
            vec![(SynonymOf, "A", "B"), (SynonymOf, "B", "A")],
        ),
        (SynonymOf, FixedOrder, vec![(SynonymOf, "A", "B")], vec![(SynonymOf, "B", "A")]),
        (
            SynonymOf,
            AnyOrder,
            vec![(SynonymOf, "A", "B"), (SynonymOf, "B", "A")],
            vec![(SynonymOf, "B", "A"), (SynonymOf, "A", "B")],
        ),
    ]
}

/// One textbook input for a postprocessing pattern, with model predictions the rule
/// must override and the relations expected afterwards (by surface; None omitted).
pub struct RuleFixture {
    pub name: &'static str,
    pub doc: PreparedDoc,
    pub predictions: Vec<RelationPrediction>,
    pub expected: Vec<(String, String, RelationLabel)>,
}

impl RuleFixture {
    fn new(
        name: &'static str,
        text: &str,
        ents: &[(&str, &str)],
        model: impl Fn(&str, &str) -> (RelationLabel, bool),
        expected: &[(&str, &str, RelationLabel)],
    ) -> Self {
        let doc = prepare(&[self::doc("t", text, ents, &[])]).remove(0);
        assert_eq!(doc.sentences.len(), 1, "{text}");
        let predictions = model_predictions(&doc, model);
        RuleFixture {
            name,
            doc,
            predictions,
            expected: expected.iter().map(|&(a, b, l)| (a.to_string(), b.to_string(), l)).collect(),
        }
    }

    /// Positive relations after applying the rules, by surface, sorted.
    pub fn apply(&self) -> Vec<(String, String, RelationLabel)> {
        let out = relcnn::rules::apply_rules(&self.doc.sentences[0].tokens, &self.doc.doc.entities, &self.predictions);
        let mut rels: Vec<_> = out
            .into_iter()
            .filter(|p| p.label.is_positive())
            .map(|p| (self.doc.entity(&p.arg1).surface.clone(), self.doc.entity(&p.arg2).surface.clone(), p.label))
            .collect();
        rels.sort();
        rels
    }

    pub fn expected_sorted(&self) -> Vec<(String, String, RelationLabel)> {
        let mut e = self.expected.clone();
        e.sort();
        e
    }
}

/// Predictions for every candidate of a one-sentence document: `model(a, b)` gives
/// the label and whether arg1 is the earlier mention, by surface.
pub fn model_predictions(pd: &PreparedDoc, model: impl Fn(&str, &str) -> (RelationLabel, bool)) -> Vec<RelationPrediction> {
    pd.candidates
        .iter()
        .map(|c| {
            let (label, arg1_first) = model(&pd.entity(&c.first).surface, &pd.entity(&c.second).surface);
            RelationPrediction::new(PairKey::of(c), label, arg1_first, 0.9, PredictionSource::Model)
        })
        .collect()
}

pub fn rule_fixtures() -> Vec<RuleFixture> {
    use RelationLabel::*;
    const METALS: &str = "high purity standard metals";
    let members = ["Sn", "Pb", "Zn", "Al", "Ag", "Ni"];
    let mut metal_ents = vec![("Material", METALS)];
    metal_ents.extend(members.iter().map(|m| ("Material", *m)));
    let metal_expected: Vec<(&str, &str, RelationLabel)> = members.iter().map(|m| (*m, METALS, HyponymOf)).collect();
    vec![
        RuleFixture::new(
            "A (B) abbreviation",
            "Samples were imaged with transmission electron microscopy (TEM) at room temperature.",
            &[("Process", "transmission electron microscopy"), ("Process", "TEM")],
            |_, _| (None, true),
            &[("transmission electron microscopy", "TEM", SynonymOf)],
        ),
        RuleFixture::new(
            "A (B, C, ..., D) list",
            "We used high purity standard metals (Sn, Pb, Zn, Al, Ag, Ni) as references.",
            &metal_ents,
            // the model finds only Sn, and calls Pb a synonym
            |a, b| match (a, b) {
                (METALS, "Sn") => (HyponymOf, false),
                (METALS, "Pb") => (SynonymOf, true),
                _ => (None, true),
            },
            &metal_expected,
        ),
        RuleFixture::new(
            "(A) B",
            "Images from (TEMs), scanning electron microscopes and probes were compared.",
            &[("Material", "TEMs"), ("Material", "scanning electron microscopes")],
            |_, _| (SynonymOf, true),
            &[],
        ),
        RuleFixture::new(
            "A/B",
            "Liposomes were prepared from DOTMA/DOPE mixtures.",
            &[("Material", "DOTMA"), ("Material", "DOPE")],
            |_, _| (HyponymOf, true),
            &[],
        ),
    ]
}

fn same_relation(x: &Relation, y: &Relation) -> bool {
    if x.doc_id != y.doc_id || x.label != y.label {
        return false;
    }
    let direct = x.arg1 == y.arg1 && x.arg2 == y.arg2;
    let swapped = x.arg1 == y.arg2 && x.arg2 == y.arg1;
    direct || (x.label == RelationLabel::SynonymOf && swapped)
}

/// (tp, fp, fn) for one class: deduplicate by linear scan, then match pairwise.
pub fn brute_force_counts(pred: &[Relation], gold: &[Relation], label: RelationLabel) -> (usize, usize, usize) {
    let uniq = |rels: &[Relation]| {
        let mut out: Vec<Relation> = Vec::new();
        for r in rels.iter().filter(|r| r.label == label) {
            if !out.iter().any(|o| same_relation(o, r)) {
                out.push(r.clone());
            }
        }
        out
    };
    let (p, g) = (uniq(pred), uniq(gold));
    let tp = p.iter().filter(|x| g.iter().any(|y| same_relation(x, y))).count();
    let matched_gold = g.iter().filter(|y| p.iter().any(|x| same_relation(x, y))).count();
    (tp, p.len() - tp, g.len() - matched_gold)
}
