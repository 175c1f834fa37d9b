use std::collections::HashMap;

use serde::Serialize;

use super::TokenStream;
use crate::error::{Error, Result};

/// Vocabulary and document frequencies of a fitted corpus.
#[derive(Debug, Clone, Serialize)]
pub struct TfidfModel {
    #[serde(skip)]
    index: HashMap<String, usize>,
    terms: Vec<String>,
    document_frequency: Vec<usize>,
    document_count: usize,
}

impl TfidfModel {
    pub fn document_count(&self) -> usize {
        self.document_count
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    /// Number of documents containing `term`, or 0 when unseen.
    pub fn document_frequency(&self, term: &str) -> usize {
        self.term_index(term)
            .map_or(0, |i| self.document_frequency[i])
    }

    /// `1 + ln(k / k_t)`.
    pub fn idf(&self, index: usize) -> f64 {
        1.0 + (self.document_count as f64 / self.document_frequency[index] as f64).ln()
    }
}

/// Counts documents and per-term document frequencies. Vocabulary indices
/// follow first appearance.
pub fn tfidf_fit(documents: &[TokenStream]) -> Result<TfidfModel> {
    if documents.is_empty() {
        return Err(Error::Empty("tf-idf needs at least one document".into()));
    }
    let mut index = HashMap::new();
    let mut terms = Vec::new();
    let mut document_frequency = Vec::new();
    let mut last_seen: Vec<usize> = Vec::new();
    for (doc_no, doc) in documents.iter().enumerate() {
        for token in doc.iter() {
            let i = *index.entry(token.to_string()).or_insert_with(|| {
                terms.push(token.to_string());
                document_frequency.push(0);
                last_seen.push(usize::MAX);
                terms.len() - 1
            });
            if last_seen[i] != doc_no {
                last_seen[i] = doc_no;
                document_frequency[i] += 1;
            }
        }
    }
    Ok(TfidfModel {
        index,
        terms,
        document_frequency,
        document_count: documents.len(),
    })
}

/// Sparse vector with strictly ascending indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Sorts and validates `(index, weight)` pairs.
    pub fn new(mut entries: Vec<(usize, f64)>) -> Result<Self> {
        entries.sort_by_key(|&(i, _)| i);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Validation(
                "sparse vector has duplicate indices".into(),
            ));
        }
        if entries.iter().any(|(_, w)| !w.is_finite()) {
            return Err(Error::Validation(
                "sparse vector has non-finite weights".into(),
            ));
        }
        Ok(SparseVector { entries })
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0.0, |pos| self.entries[pos].1)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_squared(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Cosine similarity; 0 when either vector is empty.
    pub fn cosine(&self, other: &SparseVector) -> f64 {
        super::finish_cosine(self.dot(other), self.norm_squared(), other.norm_squared())
    }
}

/// TF-IDF weights of one document: `(n_t / N) * (1 + ln(k / k_t))`, where
/// `N` counts every token of the document, in vocabulary or not.
pub fn tfidf_vector(model: &TfidfModel, doc: &TokenStream) -> Result<SparseVector> {
    if doc.is_empty() {
        return Err(Error::Empty("tf-idf vector of an empty document".into()));
    }
    let total = doc.len() as f64;
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for token in doc.iter() {
        if let Some(i) = model.term_index(token) {
            *counts.entry(i).or_default() += 1;
        }
    }
    let entries = counts
        .into_iter()
        .map(|(i, n)| (i, n as f64 / total * model.idf(i)))
        .collect();
    SparseVector::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn doc(tokens: &[&str]) -> TokenStream {
        tokens.iter().copied().collect()
    }

    #[test]
    fn fit_counts() {
        let m = tfidf_fit(&[doc(&["a", "b"]), doc(&["b"])]).unwrap();
        assert_eq!(m.document_count(), 2);
        assert_eq!(m.document_frequency("a"), 1);
        assert_eq!(m.document_frequency("b"), 2);
        assert_eq!(m.vocabulary_size(), 2);
    }

    #[test]
    fn single_document() {
        let m = tfidf_fit(&[doc(&["x", "y", "x"])]).unwrap();
        assert_eq!(m.document_count(), 1);
        assert_eq!(m.document_frequency("x"), 1);
        assert_eq!(m.document_frequency("y"), 1);
    }

    #[test]
    fn empty_corpus() {
        assert!(tfidf_fit(&[]).is_err());
    }

    #[test]
    fn hand_evaluated_weights() {
        let m = tfidf_fit(&[doc(&["a", "b"]), doc(&["b"])]).unwrap();
        let v = tfidf_vector(&m, &doc(&["a", "a", "b"])).unwrap();
        let a = m.term_index("a").unwrap();
        let b = m.term_index("b").unwrap();
        assert_abs_diff_eq!(v.get(a), (2.0 / 3.0) * (1.0 + 2f64.ln()), epsilon = 1e-12);
        assert_abs_diff_eq!(v.get(b), 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn term_everywhere_has_plain_tf() {
        let m = tfidf_fit(&[doc(&["c", "d"]), doc(&["c"])]).unwrap();
        let v = tfidf_vector(&m, &doc(&["c", "d", "d", "e"])).unwrap();
        assert_abs_diff_eq!(v.get(m.term_index("c").unwrap()), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn out_of_vocabulary() {
        let m = tfidf_fit(&[doc(&["a"])]).unwrap();
        assert!(tfidf_vector(&m, &doc(&["z", "q"])).unwrap().is_empty());
        assert!(tfidf_vector(&m, &doc(&[])).is_err());
    }

    #[test]
    fn sparse_validation() {
        assert!(SparseVector::new(vec![(1, 1.0), (1, 2.0)]).is_err());
        assert!(SparseVector::new(vec![(0, f64::NAN)]).is_err());
        let v = SparseVector::new(vec![(3, 1.0), (0, 2.0)]).unwrap();
        assert_eq!(v.entries(), &[(0, 2.0), (3, 1.0)]);
    }
}
