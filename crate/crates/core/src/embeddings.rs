//! Vocabularies and pre-trained word vectors.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::EntityType;
use crate::nn::Array;
use crate::scalar::Scalar;
use crate::textproc::PreparedDoc;

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;
pub const PAD_SYMBOL: &str = "<pad>";
pub const UNK_SYMBOL: &str = "<unk>";

/// Bound of the uniform initializer for rows without a pre-trained vector.
pub const INIT_RANGE: f64 = 0.05;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: expected {expected} values, found {found}")]
    Arity {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: vectors have {found} dimensions but {expected} were configured")]
    DimMismatch {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("{path}: line {line}: bad number `{value}`")]
    BadNumber { path: PathBuf, line: usize, value: String },
}

/// Dense symbol ↔ id map with `PAD = 0` and `UNK = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocab {
    symbols: Vec<String>,
    index: HashMap<String, u32>,
}

impl Default for Vocab {
    fn default() -> Self {
        Self::new()
    }
}

impl Vocab {
    pub fn new() -> Self {
        let mut v = Vocab {
            symbols: Vec::new(),
            index: HashMap::new(),
        };
        v.insert(PAD_SYMBOL);
        v.insert(UNK_SYMBOL);
        v
    }

    pub fn insert(&mut self, symbol: &str) -> u32 {
        if let Some(&id) = self.index.get(symbol) {
            return id;
        }
        let id = self.symbols.len() as u32;
        self.symbols.push(symbol.to_string());
        self.index.insert(symbol.to_string(), id);
        id
    }

    /// Id of `symbol`, or `UNK`.
    pub fn id(&self, symbol: &str) -> u32 {
        self.get(symbol).unwrap_or(UNK)
    }

    pub fn get(&self, symbol: &str) -> Option<u32> {
        self.index.get(symbol).copied()
    }

    pub fn symbol(&self, id: u32) -> Option<&str> {
        self.symbols.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }
}

impl From<Vec<String>> for Vocab {
    fn from(symbols: Vec<String>) -> Self {
        let mut v = Vocab::new();
        for s in symbols {
            v.insert(&s);
        }
        v
    }
}

impl From<Vocab> for Vec<String> {
    fn from(v: Vocab) -> Self {
        v.symbols
    }
}

/// Relative positions `−clip..=clip` mapped to ids `1..=2·clip+1`; id 0 is padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelposVocab {
    clip: i32,
}

impl RelposVocab {
    pub fn new(clip: i32) -> Self {
        assert!(clip >= 0);
        RelposVocab { clip }
    }

    pub fn clip(&self) -> i32 {
        self.clip
    }

    pub fn id(&self, distance: i32) -> u32 {
        (distance.clamp(-self.clip, self.clip) + self.clip + 1) as u32
    }

    pub fn len(&self) -> usize {
        2 * self.clip as usize + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureVocabs {
    pub word: Vocab,
    pub pos: Vocab,
    pub etype: Vocab,
    pub relpos: RelposVocab,
}

pub fn etype_vocab() -> Vocab {
    let mut v = Vocab::new();
    v.insert("O");
    for t in EntityType::ALL {
        v.insert(t.as_str());
    }
    v
}

/// Builds the vocabularies from prepared training documents. Words are lowercased;
/// ids follow first occurrence in document order.
pub fn build_vocabs(train: &[PreparedDoc], relpos_clip: i32) -> FeatureVocabs {
    let mut word = Vocab::new();
    let mut pos = Vocab::new();
    for doc in train {
        for tok in doc.sentences.iter().flat_map(|s| &s.tokens) {
            word.insert(&tok.surface.to_lowercase());
            pos.insert(&tok.pos);
        }
    }
    FeatureVocabs {
        word,
        pos,
        etype: etype_vocab(),
        relpos: RelposVocab::new(relpos_clip),
    }
}

/// `rows × dim` lookup table; row `PAD` is all zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    pub weights: Array<T>,
}

impl<T: Scalar> EmbeddingTable<T> {
    /// Rows drawn uniformly from `[−INIT_RANGE, INIT_RANGE]`, padding row zeroed.
    pub fn random<R: Rng + ?Sized>(rows: usize, dim: usize, rng: &mut R) -> Self {
        let mut weights = Array::zeros(&[rows, dim]);
        for r in 1..rows {
            for v in weights.row_mut(r) {
                *v = T::lit(rng.gen_range(-INIT_RANGE..=INIT_RANGE));
            }
        }
        EmbeddingTable { weights }
    }

    pub fn rows(&self) -> usize {
        self.weights.rows()
    }

    pub fn dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn lookup(&self, id: u32) -> &[T] {
        self.weights.row(id as usize)
    }
}

#[derive(Debug, Clone)]
pub struct GloveLoad<T> {
    pub table: EmbeddingTable<T>,
    /// Fraction of non-reserved vocabulary words found in the file.
    pub coverage: f64,
}

/// Loads GloVe text vectors (`word v1 … v_dim` per line, no header) for the words of
/// `vocab`. Words missing from the file and `UNK` keep their random initialization.
pub fn load_glove<T: Scalar, R: Rng + ?Sized>(
    path: &Path,
    dim: usize,
    vocab: &Vocab,
    rng: &mut R,
) -> Result<GloveLoad<T>, EmbeddingError> {
    let file = File::open(path).map_err(|source| EmbeddingError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut table = EmbeddingTable::<T>::random(vocab.len(), dim, rng);
    let mut found = vec![false; vocab.len()];
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|source| EmbeddingError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(' ');
        let word = fields.next().unwrap_or_default();
        let values: Vec<&str> = fields.collect();
        if values.len() != dim {
            if lineno == 1 {
                return Err(EmbeddingError::DimMismatch {
                    path: path.to_path_buf(),
                    expected: dim,
                    found: values.len(),
                });
            }
            return Err(EmbeddingError::Arity {
                path: path.to_path_buf(),
                line: lineno,
                expected: dim + 1,
                found: values.len() + 1,
            });
        }
        let Some(id) = vocab.get(word) else { continue };
        if id < 2 || found[id as usize] {
            continue;
        }
        let row = table.weights.row_mut(id as usize);
        for (slot, v) in row.iter_mut().zip(&values) {
            let x: f64 = v.parse().map_err(|_| EmbeddingError::BadNumber {
                path: path.to_path_buf(),
                line: lineno,
                value: v.to_string(),
            })?;
            *slot = T::lit(x);
        }
        found[id as usize] = true;
    }
    let words = vocab.len().saturating_sub(2);
    let hits = found.iter().filter(|&&f| f).count();
    Ok(GloveLoad {
        table,
        coverage: if words == 0 { 0.0 } else { hits as f64 / words as f64 },
    })
}
