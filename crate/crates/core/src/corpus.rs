//! Standoff (BRAT / ScienceIE) documents.
//!
//! Each document is a pair `<id>.txt` / `<id>.ann`. Offsets in the `.ann` file are
//! half-open byte offsets into the UTF-8 text.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::{Relation, RelationLabel};
use crate::textproc::Candidate;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{doc}: line {line}: {msg}")]
    Parse { doc: String, line: usize, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}: no `.ann` file next to the text file")]
    MissingAnnotations(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityType {
    Process,
    Task,
    Material,
}

impl EntityType {
    pub const ALL: [EntityType; 3] = [EntityType::Process, EntityType::Task, EntityType::Material];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::Process => "Process",
            EntityType::Task => "Task",
            EntityType::Material => "Material",
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityType::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown entity type `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub id: String,
    pub etype: EntityType,
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

impl EntityMention {
    pub fn overlaps(&self, start: usize, end: usize) -> bool {
        start < self.end && end > self.start
    }
}

/// A gold relation. `HyponymOf` is directed (arg1 is the hyponym); `SynonymOf` is
/// symmetric and compares equal under argument swap via [`GoldRelation::same_as`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldRelation {
    pub label: RelationLabel,
    pub arg1: String,
    pub arg2: String,
}

impl GoldRelation {
    pub fn same_as(&self, other: &GoldRelation) -> bool {
        if self.label != other.label {
            return false;
        }
        let direct = self.arg1 == other.arg1 && self.arg2 == other.arg2;
        match self.label {
            RelationLabel::SynonymOf => {
                direct || (self.arg1 == other.arg2 && self.arg2 == other.arg1)
            }
            _ => direct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub entities: Vec<EntityMention>,
    pub gold: Vec<GoldRelation>,
}

impl Document {
    pub fn entity(&self, id: &str) -> Option<&EntityMention> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn entity_index(&self, id: &str) -> Option<usize> {
        self.entities.iter().position(|e| e.id == id)
    }

    /// Gold relations in canonical form (Synonym-of ordered by text position).
    pub fn gold_relations(&self) -> Vec<Relation> {
        self.gold
            .iter()
            .map(|g| {
                let (a, b) = if g.label == RelationLabel::SynonymOf {
                    self.text_ordered(&g.arg1, &g.arg2)
                } else {
                    (g.arg1.clone(), g.arg2.clone())
                };
                Relation::new(self.id.clone(), a, b, g.label)
            })
            .collect()
    }

    /// Orders two entity ids by their position in the text.
    pub fn text_ordered(&self, a: &str, b: &str) -> (String, String) {
        let key = |id: &str| self.entity(id).map(|e| (e.start, e.end, e.id.clone()));
        if key(a) <= key(b) {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        }
    }

    /// Gold relations whose arguments differ in entity type; reported, never dropped.
    pub fn type_mismatches(&self) -> Vec<&GoldRelation> {
        self.gold
            .iter()
            .filter(|g| match (self.entity(&g.arg1), self.entity(&g.arg2)) {
                (Some(a), Some(b)) => a.etype != b.etype,
                _ => false,
            })
            .collect()
    }
}

fn parse_err(doc: &str, line: usize, msg: impl Into<String>) -> CorpusError {
    CorpusError::Parse {
        doc: doc.to_string(),
        line,
        msg: msg.into(),
    }
}

/// Parses one document from its raw text and standoff annotations.
pub fn parse_brat(id: &str, text: &str, ann: &str) -> Result<Document, CorpusError> {
    let mut entities: Vec<EntityMention> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    // (line number, label, args)
    let mut pending: Vec<(usize, RelationLabel, Vec<String>, bool)> = Vec::new();

    for (lineno, raw) in ann.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (rid, rest) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(id, lineno, "expected a tab after the record id"))?;
        match rid.chars().next() {
            Some('T') => {
                let (head, surface) = rest
                    .split_once('\t')
                    .ok_or_else(|| parse_err(id, lineno, "entity record has no surface field"))?;
                if head.contains(';') {
                    return Err(parse_err(id, lineno, "discontinuous entity spans are not supported"));
                }
                let fields: Vec<&str> = head.split_whitespace().collect();
                let [ty, start, end] = fields[..] else {
                    return Err(parse_err(id, lineno, "entity record must be `Type start end`"));
                };
                let etype: EntityType = ty.parse().map_err(|m: String| parse_err(id, lineno, m))?;
                let start: usize = start
                    .parse()
                    .map_err(|_| parse_err(id, lineno, format!("bad start offset `{start}`")))?;
                let end: usize = end
                    .parse()
                    .map_err(|_| parse_err(id, lineno, format!("bad end offset `{end}`")))?;
                if start >= end || end > text.len() {
                    return Err(parse_err(
                        id,
                        lineno,
                        format!("offsets {start}..{end} out of bounds for text of {} bytes", text.len()),
                    ));
                }
                let slice = text.get(start..end).ok_or_else(|| {
                    parse_err(id, lineno, format!("offsets {start}..{end} split a UTF-8 character"))
                })?;
                if slice != surface {
                    return Err(parse_err(
                        id,
                        lineno,
                        format!("surface `{surface}` does not match text `{slice}`"),
                    ));
                }
                if index.insert(rid.to_string(), entities.len()).is_some() {
                    return Err(parse_err(id, lineno, format!("duplicate entity id `{rid}`")));
                }
                entities.push(EntityMention {
                    id: rid.to_string(),
                    etype,
                    start,
                    end,
                    surface: surface.to_string(),
                });
            }
            Some('R') => {
                let fields: Vec<&str> = rest.split_whitespace().collect();
                let [label, a1, a2] = fields[..] else {
                    return Err(parse_err(id, lineno, "relation record must be `Label Arg1:X Arg2:Y`"));
                };
                let label = match label.parse::<RelationLabel>() {
                    Ok(l @ (RelationLabel::HyponymOf | RelationLabel::SynonymOf)) => l,
                    _ => {
                        log::warn!("{id}: line {lineno}: skipping relation type `{label}`");
                        continue;
                    }
                };
                let arg = |s: &str, key: &str| {
                    s.split_once(':')
                        .filter(|(k, v)| k.eq_ignore_ascii_case(key) && !v.is_empty())
                        .map(|(_, v)| v.to_string())
                        .ok_or_else(|| parse_err(id, lineno, format!("expected `{key}:<id>`, got `{s}`")))
                };
                pending.push((lineno, label, vec![arg(a1, "Arg1")?, arg(a2, "Arg2")?], true));
            }
            Some('*') => {
                let mut fields = rest.split_whitespace();
                let label = fields.next().unwrap_or_default();
                if !label.eq_ignore_ascii_case("Synonym-of") {
                    log::warn!("{id}: line {lineno}: skipping equivalence type `{label}`");
                    continue;
                }
                let members: Vec<String> = fields.map(str::to_string).collect();
                if members.len() < 2 {
                    return Err(parse_err(id, lineno, "equivalence needs at least two members"));
                }
                pending.push((lineno, RelationLabel::SynonymOf, members, false));
            }
            _ => {
                log::warn!("{id}: line {lineno}: skipping unsupported record `{rid}`");
            }
        }
    }

    let mut gold: Vec<GoldRelation> = Vec::new();
    for (lineno, label, args, directed) in pending {
        for a in &args {
            if !index.contains_key(a) {
                return Err(parse_err(id, lineno, format!("relation references unknown entity `{a}`")));
            }
        }
        let mut push = |arg1: &str, arg2: &str| -> Result<(), CorpusError> {
            if arg1 == arg2 {
                return Err(parse_err(id, lineno, format!("relation links `{arg1}` to itself")));
            }
            let rel = GoldRelation {
                label,
                arg1: arg1.to_string(),
                arg2: arg2.to_string(),
            };
            if !gold.iter().any(|g| g.same_as(&rel)) {
                gold.push(rel);
            }
            Ok(())
        };
        if directed {
            push(&args[0], &args[1])?;
        } else {
            for i in 0..args.len() {
                for j in i + 1..args.len() {
                    push(&args[i], &args[j])?;
                }
            }
        }
    }

    Ok(Document {
        id: id.to_string(),
        text: text.to_string(),
        entities,
        gold,
    })
}

/// Serializes entities and gold relations back to standoff lines.
///
/// Each Synonym-of pair becomes its own two-member equivalence line, so re-parsing
/// reproduces the same pair list in the same order.
pub fn to_brat(doc: &Document) -> String {
    let mut out = String::new();
    for e in &doc.entities {
        out.push_str(&format!("{}\t{} {} {}\t{}\n", e.id, e.etype, e.start, e.end, e.surface));
    }
    out.push_str(&relations_to_brat(doc.gold.iter().map(|g| (g.label, g.arg1.as_str(), g.arg2.as_str()))));
    out
}

/// Relation lines only: `R<k>` records for Hyponym-of, `*` lines for Synonym-of.
/// `None` and `Hypernym-of` entries are not representable and are skipped.
pub fn relations_to_brat<'a>(rels: impl IntoIterator<Item = (RelationLabel, &'a str, &'a str)>) -> String {
    let mut out = String::new();
    let mut next_r = 1;
    for (label, a1, a2) in rels {
        match label {
            RelationLabel::HyponymOf => {
                out.push_str(&format!("R{next_r}\tHyponym-of Arg1:{a1} Arg2:{a2}\n"));
                next_r += 1;
            }
            RelationLabel::SynonymOf => out.push_str(&format!("*\tSynonym-of {a1} {a2}\n")),
            _ => {}
        }
    }
    out
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads every `<id>.txt` / `<id>.ann` pair in a directory, sorted by id.
pub fn load_dir(dir: &Path) -> Result<Vec<Document>, CorpusError> {
    let io = |source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut stems: Vec<PathBuf> = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_some_and(|e| e == "txt") {
            stems.push(path);
        }
    }
    stems.sort();
    stems
        .into_iter()
        .map(|txt| {
            let ann = txt.with_extension("ann");
            if !ann.exists() {
                return Err(CorpusError::MissingAnnotations(txt));
            }
            let id = txt.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            parse_brat(&id, &read(&txt)?, &read(&ann)?)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub hyponym: usize,
    pub synonym: usize,
    pub none: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.hyponym + self.synonym + self.none
    }

    pub fn add(&mut self, label: RelationLabel) {
        match label {
            RelationLabel::HyponymOf | RelationLabel::HypernymOf => self.hyponym += 1,
            RelationLabel::SynonymOf => self.synonym += 1,
            RelationLabel::None => self.none += 1,
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "class,count\nHyponym-of,{}\nSynonym-of,{}\nNone,{}\nTotal,{}\n",
            self.hyponym,
            self.synonym,
            self.none,
            self.total()
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DatasetStats {
    pub counts: ClassCounts,
    /// Gold relations in the corpus.
    pub gold_relations: usize,
    /// Gold relations that no candidate pair covers (cross-sentence or cross-type).
    pub gold_outside_candidates: usize,
}

/// Per-class candidate counts.
pub fn dataset_stats(corpus: &[Document], candidates: &[Candidate]) -> DatasetStats {
    let mut counts = ClassCounts::default();
    let mut covered = 0;
    for c in candidates {
        let label = c.gold_label();
        counts.add(label);
        if label.is_positive() {
            covered += 1;
        }
    }
    let gold_relations: usize = corpus.iter().map(|d| d.gold.len()).sum();
    DatasetStats {
        counts,
        gold_relations,
        gold_outside_candidates: gold_relations.saturating_sub(covered),
    }
}
