use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::Token;

#[derive(Debug, Error)]
pub enum PosError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("POS file line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("{doc}: no POS tags for token {index}")]
    Missing { doc: String, index: usize },
    #[error("{doc}: token {index} is `{expected}` but the POS file has `{found}`")]
    SurfaceMismatch {
        doc: String,
        index: usize,
        expected: String,
        found: String,
    },
}

/// Assigns one tag per token of a document (tokens in document order).
pub trait PosTagger {
    fn tag(&self, doc_id: &str, tokens: &[&Token]) -> Result<Vec<String>, PosError>;
}

/// Closed-class lexicon plus suffix heuristics. Tags are Penn-style but only serve as
/// opaque categories for the model.
#[derive(Debug, Clone, Copy, Default)]
pub struct FallbackTagger;

const CLOSED: &[(&str, &str)] = &[
    ("a", "DT"), ("an", "DT"), ("the", "DT"), ("this", "DT"), ("that", "DT"), ("these", "DT"),
    ("those", "DT"), ("each", "DT"), ("every", "DT"), ("some", "DT"), ("no", "DT"), ("all", "DT"),
    ("of", "IN"), ("in", "IN"), ("on", "IN"), ("at", "IN"), ("by", "IN"), ("for", "IN"),
    ("with", "IN"), ("from", "IN"), ("into", "IN"), ("over", "IN"), ("under", "IN"),
    ("between", "IN"), ("through", "IN"), ("via", "IN"), ("as", "IN"), ("than", "IN"),
    ("about", "IN"), ("within", "IN"), ("without", "IN"), ("during", "IN"), ("after", "IN"),
    ("before", "IN"), ("if", "IN"), ("because", "IN"), ("while", "IN"), ("whereas", "IN"),
    ("and", "CC"), ("or", "CC"), ("but", "CC"), ("nor", "CC"),
    ("to", "TO"),
    ("is", "VBZ"), ("are", "VBP"), ("was", "VBD"), ("were", "VBD"), ("be", "VB"), ("been", "VBN"),
    ("being", "VBG"), ("has", "VBZ"), ("have", "VBP"), ("had", "VBD"), ("do", "VBP"),
    ("does", "VBZ"), ("did", "VBD"),
    ("can", "MD"), ("could", "MD"), ("may", "MD"), ("might", "MD"), ("must", "MD"),
    ("shall", "MD"), ("should", "MD"), ("will", "MD"), ("would", "MD"),
    ("it", "PRP"), ("its", "PRP$"), ("we", "PRP"), ("our", "PRP$"), ("they", "PRP"),
    ("their", "PRP$"), ("he", "PRP"), ("she", "PRP"), ("i", "PRP"), ("you", "PRP"),
    ("which", "WDT"), ("who", "WP"), ("whose", "WP$"), ("where", "WRB"), ("when", "WRB"),
    ("how", "WRB"), ("why", "WRB"),
    ("not", "RB"), ("also", "RB"), ("very", "RB"), ("only", "RB"), ("however", "RB"),
    ("there", "EX"),
];

const SUFFIXES: &[(&str, &str)] = &[
    ("ing", "VBG"), ("ed", "VBN"), ("ly", "RB"), ("tion", "NN"), ("sion", "NN"), ("ment", "NN"),
    ("ness", "NN"), ("ity", "NN"), ("ism", "NN"), ("ous", "JJ"), ("ive", "JJ"), ("able", "JJ"),
    ("ible", "JJ"), ("al", "JJ"), ("ic", "JJ"), ("ful", "JJ"), ("less", "JJ"), ("ss", "NN"),
    ("s", "NNS"),
];

impl FallbackTagger {
    pub fn tag_word(word: &str) -> String {
        if !word.chars().any(char::is_alphanumeric) {
            return word.to_string();
        }
        if word.chars().all(|c| c.is_ascii_digit()) {
            return "CD".into();
        }
        let lower = word.to_lowercase();
        if let Some((_, tag)) = CLOSED.iter().find(|(w, _)| *w == lower) {
            return (*tag).into();
        }
        let mut chars = word.chars();
        let first_upper = chars.next().is_some_and(char::is_uppercase);
        if first_upper && word.chars().filter(|c| c.is_uppercase()).count() > 1 {
            return "NNP".into();
        }
        if word.chars().any(|c| c.is_ascii_digit()) {
            return "NN".into();
        }
        if lower.chars().count() > 3 {
            if let Some((_, tag)) = SUFFIXES.iter().find(|(s, _)| lower.ends_with(s)) {
                return (*tag).into();
            }
        }
        if first_upper {
            "NNP".into()
        } else {
            "NN".into()
        }
    }
}

impl PosTagger for FallbackTagger {
    fn tag(&self, _doc_id: &str, tokens: &[&Token]) -> Result<Vec<String>, PosError> {
        Ok(tokens.iter().map(|t| Self::tag_word(&t.surface)).collect())
    }
}

/// Pre-computed tags: lines `doc_id<TAB>token_index<TAB>surface<TAB>tag`, where
/// `token_index` counts tokens across the whole document.
#[derive(Debug, Clone, Default)]
pub struct PosFile {
    docs: HashMap<String, HashMap<usize, (String, String)>>,
}

impl PosFile {
    pub fn load(path: &Path) -> Result<Self, PosError> {
        let content = fs::read_to_string(path).map_err(|source| PosError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&content)
    }

    pub fn parse(content: &str) -> Result<Self, PosError> {
        let mut docs: HashMap<String, HashMap<usize, (String, String)>> = HashMap::new();
        for (k, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [doc, index, surface, tag] = fields[..] else {
                return Err(PosError::Malformed {
                    line: k + 1,
                    msg: "expected 4 tab-separated fields".into(),
                });
            };
            let index: usize = index.parse().map_err(|_| PosError::Malformed {
                line: k + 1,
                msg: format!("bad token index `{index}`"),
            })?;
            docs.entry(doc.to_string())
                .or_default()
                .insert(index, (surface.to_string(), tag.to_string()));
        }
        Ok(PosFile { docs })
    }
}

impl PosTagger for PosFile {
    fn tag(&self, doc_id: &str, tokens: &[&Token]) -> Result<Vec<String>, PosError> {
        let entries = self.docs.get(doc_id);
        tokens
            .iter()
            .enumerate()
            .map(|(index, tok)| {
                let (surface, tag) = entries.and_then(|m| m.get(&index)).ok_or_else(|| PosError::Missing {
                    doc: doc_id.to_string(),
                    index,
                })?;
                if *surface != tok.surface {
                    return Err(PosError::SurfaceMismatch {
                        doc: doc_id.to_string(),
                        index,
                        expected: tok.surface.clone(),
                        found: surface.clone(),
                    });
                }
                Ok(tag.clone())
            })
            .collect()
    }
}
