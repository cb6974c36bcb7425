//! Surface-pattern postprocessing over decoded predictions.
//!
//! | pattern        | shape               | effect                                         |
//! |----------------|---------------------|------------------------------------------------|
//! | `AbbrevParen`  | `A ( B )`           | Synonym-of(A, B) when B abbreviates A          |
//! | `EnumParen`    | `A ( B , C , … D )` | one listed Hyponym-of A makes all of them so   |
//! | `ParenLeft`    | `( A ) B`           | None                                           |
//! | `Slash`        | `A / B`             | None                                           |
//!
//! Patterns are tried in that order and the first structural match decides; rule
//! outputs override the model.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::EntityMention;
use crate::labels::RelationLabel;
use crate::strategies::{PairKey, PredictionSource, RelationPrediction};
use crate::textproc::Token;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RulePattern {
    AbbrevParen,
    EnumParen,
    ParenLeft,
    Slash,
}

const FUNCTION_WORDS: &[&str] = &["of", "the", "and", "for", "in", "a"];

/// Initialism test: `short` is at least two letters, mostly uppercase, and its
/// letters are the initials of `long`'s words in order. Function words may be
/// skipped; a trailing lowercase `s` on `short` may stand for a plural long form.
pub fn is_abbreviation(long: &[&str], short: &str) -> bool {
    let words: Vec<String> = long
        .iter()
        .filter(|w| w.chars().any(char::is_alphanumeric))
        .map(|w| w.to_lowercase())
        .collect();
    if words.is_empty() {
        return false;
    }
    let check = |s: &str| -> bool {
        let letters: Vec<char> = s.chars().collect();
        if letters.len() < 2 || !letters.iter().all(|c| c.is_alphabetic()) {
            return false;
        }
        let upper = letters.iter().filter(|c| c.is_uppercase()).count();
        if upper * 2 <= letters.len() {
            return false;
        }
        let lower: Vec<char> = letters.iter().flat_map(|c| c.to_lowercase()).collect();
        initials_match(&lower, &words)
    };
    if check(short) {
        return true;
    }
    match short.strip_suffix('s') {
        Some(stem) if words.last().is_some_and(|w| w.ends_with('s')) => check(stem),
        _ => false,
    }
}

fn initials_match(letters: &[char], words: &[String]) -> bool {
    // reachable[i]: the first i letters are consumed by the words seen so far
    let mut reachable = vec![false; letters.len() + 1];
    reachable[0] = true;
    for w in words {
        let initial = w.chars().next();
        let skippable = FUNCTION_WORDS.contains(&w.as_str());
        let mut next = vec![false; letters.len() + 1];
        for i in 0..=letters.len() {
            if !reachable[i] {
                continue;
            }
            if skippable {
                next[i] = true;
            }
            if i < letters.len() && Some(letters[i]) == initial {
                next[i + 1] = true;
            }
        }
        reachable = next;
    }
    reachable[letters.len()]
}

struct Layout<'a> {
    tokens: &'a [Token],
    ranges: HashMap<&'a str, (usize, usize)>,
    starts: HashMap<usize, &'a str>,
}

impl<'a> Layout<'a> {
    fn new(tokens: &'a [Token], entities: &'a [EntityMention]) -> Self {
        let mut ranges = HashMap::new();
        let mut starts = HashMap::new();
        for e in entities {
            let first = tokens.iter().position(|t| t.overlaps(e));
            let last = tokens.iter().rposition(|t| t.overlaps(e));
            if let (Some(f), Some(l)) = (first, last) {
                ranges.insert(e.id.as_str(), (f, l));
                starts.entry(f).or_insert(e.id.as_str());
            }
        }
        Layout { tokens, ranges, starts }
    }

    fn is(&self, i: usize, surface: &str) -> bool {
        self.tokens.get(i).is_some_and(|t| t.surface == surface)
    }

    fn surfaces(&self, (f, l): (usize, usize)) -> Vec<&str> {
        self.tokens[f..=l].iter().map(|t| t.surface.as_str()).collect()
    }

    /// Entities listed as `A ( B sep C sep … D )` right after `a`.
    fn enumeration(&self, a: &str) -> Option<Vec<&'a str>> {
        let &(_, a_last) = self.ranges.get(a)?;
        if !self.is(a_last + 1, "(") {
            return None;
        }
        let mut members = Vec::new();
        let mut i = a_last + 2;
        loop {
            let id = *self.starts.get(&i)?;
            members.push(id);
            let (_, last) = self.ranges[id];
            let mut j = last + 1;
            while self
                .tokens
                .get(j)
                .is_some_and(|t| matches!(t.surface.as_str(), "," | ";" | "and" | "or"))
            {
                j += 1;
            }
            if j == last + 1 {
                return (self.is(j, ")") && members.len() >= 2).then_some(members);
            }
            i = j;
        }
    }
}

fn forced(p: &RelationPrediction, label: RelationLabel, arg1_first: bool, pattern: RulePattern) -> RelationPrediction {
    RelationPrediction::new(p.pair.clone(), label, arg1_first, 1.0, PredictionSource::Rule(pattern))
}

/// Applies the patterns to the predictions of one sentence.
///
/// `tokens` are the sentence's raw tokens (before reference deletion); `entities`
/// must contain every mention referenced by `predictions`.
pub fn apply_rules(
    tokens: &[Token],
    entities: &[EntityMention],
    predictions: &[RelationPrediction],
) -> Vec<RelationPrediction> {
    let layout = Layout::new(tokens, entities);
    let by_pair: HashMap<(&str, &str), &RelationPrediction> = predictions
        .iter()
        .map(|p| ((p.pair.first.as_str(), p.pair.second.as_str()), p))
        .collect();
    let says_hyponym_of = |x: &str, a: &str| {
        by_pair
            .get(&(x, a))
            .or_else(|| by_pair.get(&(a, x)))
            .is_some_and(|p| p.label == RelationLabel::HyponymOf && p.arg1 == x && p.arg2 == a)
    };

    predictions
        .iter()
        .map(|p| {
            let PairKey { first, second, .. } = &p.pair;
            let (Some(&(f0, f1)), Some(&(s0, s1))) =
                (layout.ranges.get(first.as_str()), layout.ranges.get(second.as_str()))
            else {
                return p.clone();
            };

            if layout.is(f1 + 1, "(")
                && s0 == f1 + 2
                && layout.is(s1 + 1, ")")
                && is_abbreviation(&layout.surfaces((f0, f1)), &layout.surfaces((s0, s1)).concat())
            {
                return forced(p, RelationLabel::SynonymOf, true, RulePattern::AbbrevParen);
            }

            if let Some(members) = layout.enumeration(first) {
                if members.contains(&second.as_str()) {
                    let fires = members.iter().any(|x| says_hyponym_of(x, first));
                    return if fires {
                        forced(p, RelationLabel::HyponymOf, false, RulePattern::EnumParen)
                    } else {
                        p.clone()
                    };
                }
            }

            if f0 > 0
                && layout.is(f0 - 1, "(")
                && layout.is(f1 + 1, ")")
                && (s0 == f1 + 2 || (s0 == f1 + 3 && layout.is(f1 + 2, ",")))
            {
                return forced(p, RelationLabel::None, true, RulePattern::ParenLeft);
            }

            if layout.is(f1 + 1, "/") && s0 == f1 + 2 {
                return forced(p, RelationLabel::None, true, RulePattern::Slash);
            }

            p.clone()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abbreviations() {
        assert!(is_abbreviation(&["transmission", "electron", "microscopy"], "TEM"));
        assert!(!is_abbreviation(&["gold"], "gold"));
        assert!(!is_abbreviation(&["polymerase", "chain", "reaction"], "PCRX"));
        assert!(is_abbreviation(&["scanning", "electron", "microscopes"], "SEMs"));
        assert!(is_abbreviation(&["X", "-", "ray", "diffraction"], "XRD"));
        assert!(is_abbreviation(&["density", "of", "states"], "DOS"));
        assert!(is_abbreviation(&["density", "of", "states"], "DS"));
        assert!(!is_abbreviation(&["electron", "microscopy"], "T"));
        assert!(!is_abbreviation(&["transmission", "electron", "microscopy"], "tem"));
        assert!(!is_abbreviation(&["transmission", "electron", "microscopy"], "TE"));
    }
}
