//! Embedding backends.
//!
//! Two kinds are supported: a word-vector table (textual word2vec format)
//! whose token vectors are averaged per text, and a table of precomputed
//! sentence vectors keyed by normalized text, used for encoders that cannot
//! run in-process.

use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{tokenize, StopWords};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct WordVectors {
    dimension: usize,
    table: HashMap<String, Vec<f64>>,
}

impl WordVectors {
    pub fn new(dimension: usize, table: HashMap<String, Vec<f64>>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Validation(
                "word vectors need a positive dimension".into(),
            ));
        }
        if table.is_empty() {
            return Err(Error::Empty("word vector table".into()));
        }
        if let Some(v) = table.values().find(|v| v.len() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                found: v.len(),
            });
        }
        Ok(WordVectors { dimension, table })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.table.get(token).map(Vec::as_slice)
    }

    /// Mean of the in-vocabulary token vectors; `None` when every token misses.
    fn average<'a>(&self, tokens: impl Iterator<Item = &'a str>) -> Option<Vec<f64>> {
        let mut sum = vec![0.0; self.dimension];
        let mut hits = 0usize;
        for token in tokens {
            if let Some(v) = self.table.get(token) {
                sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
                hits += 1;
            }
        }
        (hits > 0).then(|| {
            let n = hits as f64;
            sum.into_iter().map(|s| s / n).collect()
        })
    }
}

#[derive(Debug, Clone)]
pub struct SentenceVectors {
    dimension: usize,
    table: HashMap<String, Vec<f64>>,
}

impl SentenceVectors {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, text: &str) -> Option<&[f64]> {
        self.table
            .get(&normalize_sentence_key(text))
            .map(Vec::as_slice)
    }
}

/// Trim, collapse internal whitespace, lowercase.
pub fn normalize_sentence_key(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone)]
pub enum EmbeddingBackend {
    WordAverage(WordVectors),
    PrecomputedSentence(SentenceVectors),
}

impl EmbeddingBackend {
    pub fn dimension(&self) -> usize {
        match self {
            EmbeddingBackend::WordAverage(w) => w.dimension(),
            EmbeddingBackend::PrecomputedSentence(s) => s.dimension(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            EmbeddingBackend::WordAverage(_) => "word_average",
            EmbeddingBackend::PrecomputedSentence(_) => "precomputed_sentence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingSource {
    WordAverage,
    Sentence,
    /// Sentence table missed; word vectors were used instead.
    WordFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub vector: Vec<f64>,
    /// No token of the text had a word vector; `vector` is all zeros.
    pub all_oov: bool,
    pub source: EmbeddingSource,
}

/// Embeds one text with a single backend.
///
/// Word averaging drops stop words first. Precomputed lookups use the
/// normalized text and fail when the table has no entry.
pub fn embed_text(
    backend: &EmbeddingBackend,
    stop_words: &StopWords,
    text: &str,
) -> Result<Embedding> {
    match backend {
        EmbeddingBackend::WordAverage(words) => {
            let tokens = tokenize(text, stop_words);
            Ok(match words.average(tokens.iter()) {
                Some(vector) => Embedding {
                    vector,
                    all_oov: false,
                    source: EmbeddingSource::WordAverage,
                },
                None => Embedding {
                    vector: vec![0.0; words.dimension()],
                    all_oov: true,
                    source: EmbeddingSource::WordAverage,
                },
            })
        }
        EmbeddingBackend::PrecomputedSentence(sentences) => sentences
            .get(text)
            .map(|v| Embedding {
                vector: v.to_vec(),
                all_oov: false,
                source: EmbeddingSource::Sentence,
            })
            .ok_or_else(|| Error::MissingEmbedding(text.to_string())),
    }
}

/// A backend plus its stop-word list and an optional word-vector fallback
/// for texts missing from a sentence table.
#[derive(Debug, Clone)]
pub struct Embedder {
    backend: EmbeddingBackend,
    fallback: Option<EmbeddingBackend>,
    stop_words: StopWords,
}

impl Embedder {
    pub fn new(backend: EmbeddingBackend, stop_words: StopWords) -> Self {
        Embedder {
            backend,
            fallback: None,
            stop_words,
        }
    }

    /// Sets the word-vector fallback. Its dimension must match the backend.
    pub fn with_fallback(mut self, fallback: WordVectors) -> Result<Self> {
        if fallback.dimension() != self.backend.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.backend.dimension(),
                found: fallback.dimension(),
            });
        }
        self.fallback = Some(EmbeddingBackend::WordAverage(fallback));
        Ok(self)
    }

    pub fn backend(&self) -> &EmbeddingBackend {
        &self.backend
    }

    pub fn stop_words(&self) -> &StopWords {
        &self.stop_words
    }

    pub fn dimension(&self) -> usize {
        self.backend.dimension()
    }

    pub fn embed(&self, text: &str) -> Result<Embedding> {
        match embed_text(&self.backend, &self.stop_words, text) {
            Err(Error::MissingEmbedding(_)) if self.fallback.is_some() => {
                let words = self.fallback.as_ref().expect("checked above");
                let mut e = embed_text(words, &self.stop_words, text)?;
                e.source = EmbeddingSource::WordFallback;
                Ok(e)
            }
            other => other,
        }
    }

    pub fn embed_all<S: AsRef<str> + Sync>(&self, texts: &[S]) -> Result<Vec<Embedding>> {
        use rayon::prelude::*;
        texts.par_iter().map(|t| self.embed(t.as_ref())).collect()
    }
}

fn vector_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::VectorFile {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads the textual word-vector format: a `<vocab_size> <dimension>` header,
/// then one `<token> <f1> ... <fd>` line per word.
pub fn load_word_vectors(path: &Path) -> Result<EmbeddingBackend> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| vector_error(path, 1, "missing header"))?
        .map_err(|e| Error::io(path, e))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [vocab, dim] = fields[..] else {
        return Err(vector_error(
            path,
            1,
            "header must be `<vocab_size> <dimension>`",
        ));
    };
    let declared: usize = vocab
        .parse()
        .map_err(|_| vector_error(path, 1, format!("bad vocabulary size `{vocab}`")))?;
    let dimension: usize = dim
        .parse()
        .ok()
        .filter(|&d| d > 0)
        .ok_or_else(|| vector_error(path, 1, format!("bad dimension `{dim}`")))?;

    let mut table = HashMap::with_capacity(declared);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let token = parts.next().expect("non-empty line has a token");
        let vector = parts
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        vector_error(path, line_no, format!("non-numeric component `{s}`"))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        if vector.len() != dimension {
            return Err(vector_error(
                path,
                line_no,
                format!("expected {dimension} components, found {}", vector.len()),
            ));
        }
        if table.insert(token.to_string(), vector).is_some() {
            log::warn!(
                "{}:{line_no}: duplicate token `{token}`, keeping the last",
                path.display()
            );
        }
    }
    if table.len() != declared {
        log::warn!(
            "{}: header declares {declared} tokens, file has {}",
            path.display(),
            table.len()
        );
    }
    Ok(EmbeddingBackend::WordAverage(WordVectors::new(
        dimension, table,
    )?))
}

#[derive(Deserialize)]
struct SentenceLine {
    text: String,
    vector: Vec<f64>,
}

/// Reads JSON Lines of `{"text": ..., "vector": [...]}`.
pub fn load_sentence_vectors(path: &Path) -> Result<EmbeddingBackend> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut table: HashMap<String, Vec<f64>> = HashMap::new();
    let mut dimension = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SentenceLine =
            serde_json::from_str(&line).map_err(|e| vector_error(path, line_no, e.to_string()))?;
        if rec.vector.iter().any(|v| !v.is_finite()) {
            return Err(vector_error(path, line_no, "non-finite component"));
        }
        let expected = *dimension.get_or_insert(rec.vector.len());
        if rec.vector.len() != expected || expected == 0 {
            return Err(vector_error(
                path,
                line_no,
                format!("expected {expected} components, found {}", rec.vector.len()),
            ));
        }
        let key = normalize_sentence_key(&rec.text);
        match table.get(&key) {
            Some(existing) if *existing != rec.vector => {
                return Err(vector_error(
                    path,
                    line_no,
                    format!("`{key}` appears twice with different vectors"),
                ));
            }
            Some(_) => {}
            None => {
                table.insert(key, rec.vector);
            }
        }
    }
    let dimension = dimension
        .ok_or_else(|| Error::Empty(format!("{}: no sentence vectors", path.display())))?;
    Ok(EmbeddingBackend::PrecomputedSentence(SentenceVectors {
        dimension,
        table,
    }))
}
