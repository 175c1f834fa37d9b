//! Risk-register analytics.
//!
//! * [`corpus`]: projects, register snapshots, assessment normalization.
//! * [`vectorize`]: tokenization, TF-IDF, embedding backends, cosine.
//! * [`similarity`]: document, risk-item, pooling and evaluation-level similarity.
//! * [`template`]: grouping similar risks into ranked register templates and scoring them.
//! * [`lifecycle`]: the risk life-cycle automaton, performance ratios and styles.
//! * [`rbs`]: risk breakdown structure coverage and co-occurrence.
//! * [`report`]: canonical JSON and CSV output.

pub mod corpus;
pub mod data;
pub mod error;
pub mod lifecycle;
pub mod rbs;
pub mod report;
pub mod similarity;
pub mod template;
pub mod vectorize;

pub use error::{Error, Result};
