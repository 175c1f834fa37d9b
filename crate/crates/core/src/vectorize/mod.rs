//! Text to vector conversion and cosine similarity.

mod embedding;
mod tfidf;
mod tokenize;

pub use embedding::{
    embed_text, load_sentence_vectors, load_word_vectors, normalize_sentence_key, Embedder,
    Embedding, EmbeddingBackend, EmbeddingSource, SentenceVectors, WordVectors,
};
pub use tfidf::{tfidf_fit, tfidf_vector, SparseVector, TfidfModel};
pub use tokenize::{tokenize, StopWords, TokenStream};

use crate::error::{Error, Result};

/// Cosine of the angle between two dense vectors.
///
/// A zero vector on either side scores 0. The result is clamped to [-1, 1]
/// to absorb rounding.
pub fn cosine(v: &[f64], w: &[f64]) -> Result<f64> {
    if v.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            found: w.len(),
        });
    }
    let (mut dot, mut nv, mut nw) = (0.0, 0.0, 0.0);
    for (a, b) in v.iter().zip(w) {
        dot += a * b;
        nv += a * a;
        nw += b * b;
    }
    Ok(finish_cosine(dot, nv, nw))
}

pub(crate) fn finish_cosine(dot: f64, norm_sq_v: f64, norm_sq_w: f64) -> f64 {
    if norm_sq_v == 0.0 || norm_sq_w == 0.0 {
        return 0.0;
    }
    // sqrt(a * a) == a exactly, so a vector scores exactly 1 against itself.
    let product = norm_sq_v * norm_sq_w;
    let denom = if product.is_normal() {
        product.sqrt()
    } else {
        norm_sq_v.sqrt() * norm_sq_w.sqrt()
    };
    (dot / denom).clamp(-1.0, 1.0)
}
