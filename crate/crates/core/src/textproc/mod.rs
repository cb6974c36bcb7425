//! Sentence splitting, offset-preserving tokenization, reference deletion,
//! candidate-pair generation and per-token featurization.

mod pos;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Document, EntityMention};
use crate::embeddings::FeatureVocabs;
use crate::labels::RelationLabel;

pub use pos::{FallbackTagger, PosError, PosFile, PosTagger};

#[derive(Debug, Error)]
pub enum TextprocError {
    #[error("{doc}: entity `{entity}` does not intersect the sentence tokens")]
    EntityOutsideTokens { doc: String, entity: String },
    #[error("{doc}: candidate ({arg1}, {arg2}) has no tokens left after cutting")]
    EmptyWindow { doc: String, arg1: String, arg2: String },
    #[error(transparent)]
    Pos(#[from] PosError),
}

/// Half-open byte span into a document's text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn contains(&self, pos: usize) -> bool {
        self.start <= pos && pos < self.end
    }
}

const ABBREVIATIONS: &[&str] = &[
    "al", "approx", "ca", "cf", "dr", "e.g", "eq", "eqs", "et", "etc", "fig", "figs", "i.e", "jr",
    "mr", "mrs", "ms", "no", "nos", "pp", "prof", "ref", "refs", "resp", "sec", "sect", "st", "tab",
    "viz", "vol", "vs",
];

fn is_abbreviation_before(text: &str, dot: usize) -> bool {
    let head = &text[..dot];
    let word_start = head
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_alphabetic() || *c == '.')
        .last()
        .map_or(dot, |(i, _)| i);
    let word = head[word_start..].trim_start_matches('.').to_lowercase();
    !word.is_empty() && ABBREVIATIONS.contains(&word.as_str())
}

/// Byte ranges strictly inside matched `()`, `[]` or `{}` pairs.
fn bracketed_ranges(text: &str) -> Vec<Span> {
    let mut stack: Vec<(char, usize)> = Vec::new();
    let mut out = Vec::new();
    for (i, c) in text.char_indices() {
        match c {
            '(' | '[' | '{' => stack.push((c, i)),
            ')' | ']' | '}' => {
                let open = match c {
                    ')' => '(',
                    ']' => '[',
                    _ => '{',
                };
                if let Some(k) = stack.iter().rposition(|(o, _)| *o == open) {
                    let (_, start) = stack[k];
                    stack.truncate(k);
                    out.push(Span::new(start + 1, i));
                }
            }
            _ => {}
        }
    }
    out
}

/// Splits text into sentence spans; see [`split_sentences_protected`].
pub fn split_sentences(text: &str) -> Vec<Span> {
    split_sentences_protected(text, &[])
}

/// Splits text into trimmed sentence spans.
///
/// A boundary follows `.`, `!` or `?` when the next character is whitespace and the
/// next non-whitespace character is uppercase or a digit. No boundary is placed after
/// a known abbreviation, inside matched brackets, or inside any `protected` span.
pub fn split_sentences_protected(text: &str, protected: &[Span]) -> Vec<Span> {
    let brackets = bracketed_ranges(text);
    let mut cuts = vec![0];
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    for (k, &(i, c)) in chars.iter().enumerate() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let after = i + c.len_utf8();
        match chars.get(k + 1) {
            Some((_, n)) if n.is_whitespace() => {}
            _ => continue,
        }
        let next = chars[k + 1..].iter().find(|(_, n)| !n.is_whitespace());
        match next {
            Some((_, n)) if n.is_uppercase() || n.is_ascii_digit() => {}
            _ => continue,
        }
        if c == '.' && is_abbreviation_before(text, i) {
            continue;
        }
        let inside = |s: &Span| s.start < after && after < s.end;
        if brackets.iter().any(inside) || protected.iter().any(inside) {
            continue;
        }
        cuts.push(after);
    }
    cuts.push(text.len());

    cuts.windows(2)
        .filter_map(|w| {
            let seg = &text[w[0]..w[1]];
            let lead = seg.len() - seg.trim_start().len();
            let trimmed = seg.trim();
            (!trimmed.is_empty()).then(|| Span::new(w[0] + lead, w[0] + lead + trimmed.len()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub start: usize,
    pub end: usize,
    pub pos: String,
}

impl Token {
    pub fn overlaps(&self, e: &EntityMention) -> bool {
        e.overlaps(self.start, self.end)
    }
}

/// Tokenizes `text[span]`: maximal runs of letters/digits are tokens, every other
/// non-whitespace character is a token of its own.
pub fn tokenize(text: &str, span: Span) -> Vec<Token> {
    tokenize_with_cuts(text, span, &[])
}

/// Like [`tokenize`], additionally splitting any letter/digit run at the byte
/// positions in `cuts` (entity boundaries).
pub fn tokenize_with_cuts(text: &str, span: Span, cuts: &[usize]) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut run: Option<usize> = None;
    let flush = |start: usize, end: usize, tokens: &mut Vec<Token>| {
        tokens.push(Token {
            surface: text[start..end].to_string(),
            start,
            end,
            pos: String::new(),
        });
    };
    for (i, c) in text[span.start..span.end].char_indices() {
        let i = span.start + i;
        if c.is_alphanumeric() {
            match run {
                Some(s) if cuts.contains(&i) => {
                    flush(s, i, &mut tokens);
                    run = Some(i);
                }
                Some(_) => {}
                None => run = Some(i),
            }
            continue;
        }
        if let Some(s) = run.take() {
            flush(s, i, &mut tokens);
        }
        if !c.is_whitespace() {
            flush(i, i + c.len_utf8(), &mut tokens);
        }
    }
    if let Some(s) = run {
        flush(s, span.end, &mut tokens);
    }
    tokens
}

fn is_reference_item(surface: &str) -> bool {
    surface == "," || surface == "-" || surface == "\u{2013}" || surface.chars().all(|c| c.is_ascii_digit())
}

/// Removes citation markers such as `[1, 2]` or `[12-15]`.
///
/// A bracketed run is removed when its interior holds at least one number and
/// otherwise only commas and hyphens (or en-dashes). Runs touching a protected span
/// are kept.
pub fn delete_references(tokens: &[Token], protected: &[EntityMention]) -> Vec<Token> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i].surface == "[" {
            let close = tokens[i + 1..]
                .iter()
                .position(|t| t.surface == "]" || t.surface == "[")
                .map(|k| i + 1 + k)
                .filter(|&j| tokens[j].surface == "]");
            if let Some(j) = close {
                let interior = &tokens[i + 1..j];
                let is_ref = !interior.is_empty()
                    && interior.iter().all(|t| is_reference_item(&t.surface))
                    && interior.iter().any(|t| t.surface.chars().all(|c| c.is_ascii_digit()));
                let touches_entity = tokens[i..=j]
                    .iter()
                    .any(|t| protected.iter().any(|e| t.overlaps(e)));
                if is_ref && !touches_entity {
                    i = j + 1;
                    continue;
                }
            }
        }
        out.push(tokens[i].clone());
        i += 1;
    }
    out
}

/// Gold status of a candidate pair, relative to its text order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairGold {
    None,
    /// Synonym-of between the two; `first_is_arg1` when the annotation lists the
    /// earlier mention first.
    Synonym { first_is_arg1: bool },
    /// Hyponym-of between the two; `first_is_hyponym` when the earlier mention is the hyponym.
    Hyponym { first_is_hyponym: bool },
}

/// Two same-type mentions in one sentence, `first` preceding `second` in the text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub doc_id: String,
    pub sentence: usize,
    pub first: String,
    pub second: String,
    pub gold: PairGold,
}

impl Candidate {
    pub fn gold_label(&self) -> RelationLabel {
        match self.gold {
            PairGold::None => RelationLabel::None,
            PairGold::Synonym { .. } => RelationLabel::SynonymOf,
            PairGold::Hyponym { .. } => RelationLabel::HyponymOf,
        }
    }
}

fn text_order(e: &EntityMention) -> (usize, usize, &str) {
    (e.start, e.end, e.id.as_str())
}

/// Index of the sentence holding each entity (the one containing its start).
pub fn assign_sentences(doc: &Document, sentences: &[Span]) -> Vec<Option<usize>> {
    doc.entities
        .iter()
        .map(|e| {
            let found = sentences.iter().position(|s| s.contains(e.start));
            match found {
                Some(k) if e.end > sentences[k].end => log::warn!(
                    "{}: entity {} crosses a sentence boundary; assigned to sentence {k}",
                    doc.id,
                    e.id
                ),
                None => log::warn!("{}: entity {} lies outside every sentence", doc.id, e.id),
                _ => {}
            }
            found
        })
        .collect()
}

/// Every unordered pair of same-type mentions sharing a sentence, in text order.
pub fn generate_candidates(doc: &Document, sentences: &[Span]) -> Vec<Candidate> {
    let assigned = assign_sentences(doc, sentences);
    let mut per_sentence: Vec<Vec<&EntityMention>> = vec![Vec::new(); sentences.len()];
    for (e, s) in doc.entities.iter().zip(&assigned) {
        if let Some(s) = s {
            per_sentence[*s].push(e);
        }
    }

    let mut gold: HashMap<(&str, &str), PairGold> = HashMap::new();
    for g in &doc.gold {
        let (a, b) = (g.arg1.as_str(), g.arg2.as_str());
        match g.label {
            RelationLabel::HyponymOf => {
                gold.insert((a, b), PairGold::Hyponym { first_is_hyponym: true });
                gold.entry((b, a)).or_insert(PairGold::Hyponym { first_is_hyponym: false });
            }
            RelationLabel::SynonymOf => {
                gold.entry((a, b)).or_insert(PairGold::Synonym { first_is_arg1: true });
                gold.entry((b, a)).or_insert(PairGold::Synonym { first_is_arg1: false });
            }
            _ => {}
        }
    }

    let mut out = Vec::new();
    for (k, ents) in per_sentence.iter_mut().enumerate() {
        ents.sort_by(|a, b| text_order(a).cmp(&text_order(b)));
        for i in 0..ents.len() {
            for j in i + 1..ents.len() {
                let (a, b) = (ents[i], ents[j]);
                if a.etype != b.etype {
                    continue;
                }
                out.push(Candidate {
                    doc_id: doc.id.clone(),
                    sentence: k,
                    first: a.id.clone(),
                    second: b.id.clone(),
                    gold: gold.get(&(a.id.as_str(), b.id.as_str())).copied().unwrap_or(PairGold::None),
                });
            }
        }
    }
    out
}

/// Preprocessing switches, both on by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Toggles {
    pub bracket_deletion: bool,
    pub sentence_cutting: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Toggles {
            bracket_deletion: true,
            sentence_cutting: true,
        }
    }
}

/// Categorical features of one token. `relpos1`/`relpos2` are clipped signed token
/// distances to the first and second argument; the other fields are vocabulary ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenFeatures {
    pub word: u32,
    pub relpos1: i32,
    pub relpos2: i32,
    pub etype: u32,
    pub pos: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub doc_id: String,
    pub arg1: String,
    pub arg2: String,
    /// True when arg1 precedes arg2 in the text.
    pub text_order: bool,
}

/// A featurized token window with its relation label ("arg1 LABEL arg2").
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub tokens: Vec<TokenFeatures>,
    pub label: RelationLabel,
    pub provenance: Provenance,
}

fn token_range(tokens: &[Token], e: &EntityMention) -> Option<(usize, usize)> {
    let first = tokens.iter().position(|t| t.overlaps(e))?;
    let last = tokens.iter().rposition(|t| t.overlaps(e))?;
    Some((first, last))
}

fn distance(t: usize, (first, last): (usize, usize), clip: i32) -> i32 {
    let d = if t < first {
        t as i64 - first as i64
    } else if t > last {
        t as i64 - last as i64
    } else {
        0
    };
    d.clamp(-(clip as i64), clip as i64) as i32
}

/// Featurizes one presentation of a candidate pair.
///
/// `tokens` are the sentence tokens; `entities` are all mentions of the document and
/// feed the entity-type channel. With bracket deletion on, citation markers are
/// removed first; with sentence cutting on, the window is trimmed to run from the
/// first token of the earlier argument to the last token of the later one.
#[allow(clippy::too_many_arguments)]
pub fn cut_and_featurize(
    doc_id: &str,
    tokens: &[Token],
    entities: &[EntityMention],
    arg1: &EntityMention,
    arg2: &EntityMention,
    label: RelationLabel,
    vocabs: &FeatureVocabs,
    toggles: Toggles,
) -> Result<Example, TextprocError> {
    let cleaned;
    let tokens = if toggles.bracket_deletion {
        cleaned = delete_references(tokens, entities);
        &cleaned[..]
    } else {
        tokens
    };
    let missing = |e: &EntityMention| TextprocError::EntityOutsideTokens {
        doc: doc_id.to_string(),
        entity: e.id.clone(),
    };
    let r1 = token_range(tokens, arg1).ok_or_else(|| missing(arg1))?;
    let r2 = token_range(tokens, arg2).ok_or_else(|| missing(arg2))?;

    let (lo, hi) = if toggles.sentence_cutting {
        (r1.0.min(r2.0), r1.1.max(r2.1))
    } else {
        (0, tokens.len().saturating_sub(1))
    };
    let window = tokens.get(lo..=hi).unwrap_or(&[]);
    if window.is_empty() {
        return Err(TextprocError::EmptyWindow {
            doc: doc_id.to_string(),
            arg1: arg1.id.clone(),
            arg2: arg2.id.clone(),
        });
    }

    let clip = vocabs.relpos.clip();
    let features = window
        .iter()
        .enumerate()
        .map(|(k, tok)| {
            let t = lo + k;
            let etype = if tok.overlaps(arg1) {
                Some(arg1.etype)
            } else if tok.overlaps(arg2) {
                Some(arg2.etype)
            } else {
                entities.iter().find(|e| tok.overlaps(e)).map(|e| e.etype)
            };
            TokenFeatures {
                word: vocabs.word.id(&tok.surface.to_lowercase()),
                relpos1: distance(t, r1, clip),
                relpos2: distance(t, r2, clip),
                etype: vocabs.etype.id(etype.map_or("O", |e| e.as_str())),
                pos: vocabs.pos.id(&tok.pos),
            }
        })
        .collect();

    Ok(Example {
        tokens: features,
        label,
        provenance: Provenance {
            doc_id: doc_id.to_string(),
            arg1: arg1.id.clone(),
            arg2: arg2.id.clone(),
            text_order: (arg1.start, arg1.end) <= (arg2.start, arg2.end),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub span: Span,
    /// Raw tokens with POS tags; reference deletion happens at featurization time.
    pub tokens: Vec<Token>,
}

/// A document split, tokenized, tagged and paired into candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedDoc {
    pub doc: Document,
    pub sentences: Vec<Sentence>,
    pub candidates: Vec<Candidate>,
}

impl PreparedDoc {
    pub fn entity(&self, id: &str) -> &EntityMention {
        self.doc.entity(id).expect("candidate ids resolve to document entities")
    }
}

pub fn prepare_document(doc: &Document, tagger: &dyn PosTagger) -> Result<PreparedDoc, TextprocError> {
    let protected: Vec<Span> = doc.entities.iter().map(|e| Span::new(e.start, e.end)).collect();
    let spans = split_sentences_protected(&doc.text, &protected);
    let mut cuts: Vec<usize> = doc.entities.iter().flat_map(|e| [e.start, e.end]).collect();
    cuts.sort_unstable();
    cuts.dedup();

    let mut sentences: Vec<Sentence> = spans
        .iter()
        .map(|&span| Sentence {
            span,
            tokens: tokenize_with_cuts(&doc.text, span, &cuts),
        })
        .collect();

    let flat: Vec<&Token> = sentences.iter().flat_map(|s| &s.tokens).collect();
    let tags = tagger.tag(&doc.id, &flat)?;
    let mut tags = tags.into_iter();
    for s in &mut sentences {
        for t in &mut s.tokens {
            t.pos = tags.next().unwrap_or_default();
        }
    }

    let candidates = generate_candidates(doc, &spans);
    Ok(PreparedDoc {
        doc: doc.clone(),
        sentences,
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_brat, EntityType};
    use crate::embeddings::build_vocabs;

    fn surfaces(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    fn whole(text: &str) -> Span {
        Span::new(0, text.len())
    }

    #[test]
    fn sentences() {
        assert!(split_sentences("").is_empty());
        let text = "A dog is an animal. It barks.";
        let spans = split_sentences(text);
        assert_eq!(spans.len(), 2);
        assert_eq!(&text[spans[0].start..spans[0].end], "A dog is an animal.");
        assert_eq!(&text[spans[1].start..spans[1].end], "It barks.");
        assert_eq!(split_sentences("See Fig. 2 for details.").len(), 1);
        assert_eq!(split_sentences("As noted (see Sec. 3. The end) here.").len(), 1);
        assert_eq!(split_sentences("Values rose by 3.5 percent. Then fell.").len(), 2);
        assert_eq!(split_sentences("Ends here. lowercase continues.").len(), 1);
    }

    #[test]
    fn protected_spans_block_boundaries() {
        let text = "We used Co. Ltd samples.";
        assert_eq!(split_sentences(text).len(), 2);
        assert_eq!(split_sentences_protected(text, &[Span::new(8, 15)]).len(), 1);
    }

    #[test]
    fn tokenization() {
        let t = "high-purity Sn";
        assert_eq!(surfaces(&tokenize(t, whole(t))), vec!["high", "-", "purity", "Sn"]);
        let t = "(TEM)";
        assert_eq!(surfaces(&tokenize(t, whole(t))), vec!["(", "TEM", ")"]);
        assert!(tokenize("abc", Span::new(1, 1)).is_empty());
        let t = "TEMs";
        let toks = tokenize_with_cuts(t, whole(t), &[3]);
        assert_eq!(surfaces(&toks), vec!["TEM", "s"]);
        assert_eq!((toks[1].start, toks[1].end), (3, 4));
    }

    fn toks(words: &[&str]) -> Vec<Token> {
        let mut out = Vec::new();
        let mut at = 0;
        for w in words {
            out.push(Token {
                surface: w.to_string(),
                start: at,
                end: at + w.len(),
                pos: String::new(),
            });
            at += w.len() + 1;
        }
        out
    }

    #[test]
    fn references() {
        let t = toks(&["as", "shown", "[", "1", ",", "2", "]", "here"]);
        assert_eq!(surfaces(&delete_references(&t, &[])), vec!["as", "shown", "here"]);

        let t = toks(&["[", "Fe", "]"]);
        let fe = EntityMention {
            id: "T1".into(),
            etype: EntityType::Material,
            start: 2,
            end: 4,
            surface: "Fe".into(),
        };
        assert_eq!(delete_references(&t, &[fe]), t);

        let t = toks(&["[", "12", "-", "15", "]"]);
        assert!(delete_references(&t, &[]).is_empty());

        let t = toks(&["[", "a", "]", "[", "3"]);
        assert_eq!(delete_references(&t, &[]), t);
    }

    fn doc_with(text: &str, ann: &str) -> Document {
        parse_brat("d", text, ann).unwrap()
    }

    #[test]
    fn candidates() {
        let text = "aa bb cc pp. dd";
        let doc = doc_with(
            text,
            "T1\tMaterial 0 2\taa\nT2\tMaterial 3 5\tbb\nT3\tMaterial 6 8\tcc\nT4\tProcess 9 11\tpp\nT5\tMaterial 13 15\tdd\nR1\tHyponym-of Arg1:T3 Arg2:T1\n",
        );
        let spans = split_sentences(text);
        assert_eq!(spans.len(), 1, "lowercase start keeps a single sentence");
        let c = generate_candidates(&doc, &spans);
        assert_eq!(c.len(), 6);
        let hypo: Vec<_> = c.iter().filter(|c| c.gold_label().is_positive()).collect();
        assert_eq!(hypo.len(), 1);
        assert_eq!((hypo[0].first.as_str(), hypo[0].second.as_str()), ("T1", "T3"));
        assert_eq!(hypo[0].gold, PairGold::Hyponym { first_is_hyponym: false });

        let stats = crate::corpus::dataset_stats(std::slice::from_ref(&doc), &c);
        assert_eq!((stats.counts.hyponym, stats.counts.none), (1, 5));
    }

    #[test]
    fn three_materials_without_gold() {
        let text = "aa bb cc";
        let doc = doc_with(text, "T1\tMaterial 0 2\taa\nT2\tMaterial 3 5\tbb\nT3\tMaterial 6 8\tcc\n");
        let c = generate_candidates(&doc, &split_sentences(text));
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|c| c.gold == PairGold::None));

        let doc = doc_with("aa pp", "T1\tMaterial 0 2\taa\nT2\tProcess 3 5\tpp\n");
        assert!(generate_candidates(&doc, &split_sentences("aa pp")).is_empty());
    }

    fn prepared(text: &str, ann: &str) -> (PreparedDoc, FeatureVocabs) {
        let doc = doc_with(text, ann);
        let p = prepare_document(&doc, &FallbackTagger).unwrap();
        let vocabs = build_vocabs(std::slice::from_ref(&p), 50);
        (p, vocabs)
    }

    #[test]
    fn featurize_cut_window() {
        let text = "the TEM imaging resolved X";
        let (p, vocabs) = prepared(text, "T1\tProcess 4 7\tTEM\nT2\tProcess 25 26\tX\n");
        let toks = &p.sentences[0].tokens;
        let (a, b) = (p.entity("T1"), p.entity("T2"));
        let ex = cut_and_featurize("d", toks, &p.doc.entities, a, b, RelationLabel::None, &vocabs, Toggles::default())
            .unwrap();
        let r1: Vec<i32> = ex.tokens.iter().map(|t| t.relpos1).collect();
        let r2: Vec<i32> = ex.tokens.iter().map(|t| t.relpos2).collect();
        assert_eq!(r1, vec![0, 1, 2, 3]);
        assert_eq!(r2, vec![-3, -2, -1, 0]);
        assert_eq!(ex.tokens[0].word, vocabs.word.id("tem"));
        assert_eq!(ex.tokens[0].etype, vocabs.etype.id("Process"));
        assert_eq!(ex.tokens[1].etype, vocabs.etype.id("O"));
        assert!(ex.provenance.text_order);

        let off = Toggles {
            sentence_cutting: false,
            ..Toggles::default()
        };
        let full = cut_and_featurize("d", toks, &p.doc.entities, a, b, RelationLabel::None, &vocabs, off).unwrap();
        assert_eq!(full.tokens.len(), 5);
        let r1: Vec<i32> = full.tokens.iter().map(|t| t.relpos1).collect();
        assert_eq!(r1, vec![-1, 0, 1, 2, 3]);

        let rev = cut_and_featurize("d", toks, &p.doc.entities, b, a, RelationLabel::None, &vocabs, Toggles::default())
            .unwrap();
        assert_eq!(rev.tokens[3].relpos1, 0);
        assert!(!rev.provenance.text_order);
    }

    #[test]
    fn multi_token_entities_have_zero_span() {
        let text = "transmission electron microscopy shows grain boundaries";
        let (p, vocabs) = prepared(text, "T1\tProcess 0 32\ttransmission electron microscopy\nT2\tProcess 39 55\tgrain boundaries\n");
        let (a, b) = (p.entity("T1"), p.entity("T2"));
        let ex = cut_and_featurize("d", &p.sentences[0].tokens, &p.doc.entities, a, b, RelationLabel::None, &vocabs, Toggles::default())
            .unwrap();
        let r1: Vec<i32> = ex.tokens.iter().map(|t| t.relpos1).collect();
        let r2: Vec<i32> = ex.tokens.iter().map(|t| t.relpos2).collect();
        assert_eq!(r1, vec![0, 0, 0, 1, 2, 3]);
        assert_eq!(r2, vec![-4, -3, -2, -1, 0, 0]);
    }
}
