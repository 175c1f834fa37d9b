#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use riskbench::corpus::{Corpus, ProjectRecord, RegisterSnapshot, RiskItem, SizeBand};
use riskbench::vectorize::{Embedder, EmbeddingBackend, StopWords, WordVectors};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/fixtures")
}

pub fn project(id: &str, delivery: &str, jurisdiction: &str, names: &[&str]) -> ProjectRecord {
    ProjectRecord {
        project_id: id.into(),
        jurisdiction: jurisdiction.into(),
        delivery_method: delivery.into(),
        project_type: "highway".into(),
        size_band: SizeBand::Over1B,
        contract_value_musd: Some(1500.0),
        award_year: None,
        snapshots: vec![RegisterSnapshot {
            ordinal: 0,
            label: None,
            items: names
                .iter()
                .enumerate()
                .map(|(i, n)| RiskItem::named(format!("{id}-{i}"), *n))
                .collect(),
        }],
    }
}

pub fn corpus(projects: Vec<ProjectRecord>) -> Corpus {
    Corpus::new(projects, "test").unwrap()
}

pub fn word_embedder(words: &[(&str, Vec<f64>)]) -> Embedder {
    let dim = words[0].1.len();
    let table: HashMap<String, Vec<f64>> = words
        .iter()
        .map(|(w, v)| (w.to_string(), v.clone()))
        .collect();
    Embedder::new(
        EmbeddingBackend::WordAverage(WordVectors::new(dim, table).unwrap()),
        StopWords::none(),
    )
}

/// The topical word vectors shipped with the fixtures.
pub fn fixture_embedder() -> Embedder {
    let backend =
        riskbench::vectorize::load_word_vectors(&fixtures().join("vectors/words.txt")).unwrap();
    Embedder::new(backend, StopWords::english())
}
