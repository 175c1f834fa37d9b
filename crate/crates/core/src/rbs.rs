//! Risk breakdown structure: a two-level taxonomy of generic risks, used to
//! test how much of a register it covers and which risks co-occur.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Band, Corpus, RiskItem};
use crate::data;
use crate::error::{Error, Result};
use crate::similarity::{best_match_index, ScoreHistogram};
use crate::vectorize::{Embedder, EmbeddingSource};

pub const DEFAULT_COVERAGE_THRESHOLD: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RbsItem {
    pub text: String,
    pub frequency: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RbsCategory {
    pub name: String,
    pub items: Vec<RbsItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rbs {
    pub categories: Vec<RbsCategory>,
}

impl Rbs {
    pub fn new(categories: Vec<RbsCategory>) -> Result<Self> {
        let rbs = Rbs { categories };
        rbs.validate()?;
        Ok(rbs)
    }

    pub fn validate(&self) -> Result<()> {
        if self.categories.is_empty() {
            return Err(Error::Validation("RBS has no categories".into()));
        }
        let mut names = HashSet::new();
        let mut texts = HashSet::new();
        for c in &self.categories {
            if !names.insert(c.name.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate RBS category `{}`",
                    c.name
                )));
            }
            if c.items.is_empty() {
                return Err(Error::Validation(format!(
                    "RBS category `{}` has no items",
                    c.name
                )));
            }
            for i in &c.items {
                if !texts.insert(i.text.as_str()) {
                    return Err(Error::Validation(format!(
                        "duplicate RBS item `{}`",
                        i.text
                    )));
                }
                if i.frequency < 1 {
                    return Err(Error::Validation(format!(
                        "RBS item `{}` has frequency 0",
                        i.text
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let rbs: Rbs = serde_json::from_slice(bytes).map_err(|e| Error::json("RBS", e))?;
        rbs.validate()?;
        Ok(rbs)
    }

    /// The structure shipped with the crate: 11 categories, 70 items.
    pub fn bundled() -> Result<Self> {
        Self::from_json(data::bundled(data::RBS_FILE)?.as_bytes())
    }

    pub fn item_count(&self) -> usize {
        self.categories.iter().map(|c| c.items.len()).sum()
    }

    /// `(category name, item)` in file order.
    pub fn items(&self) -> impl Iterator<Item = (&str, &RbsItem)> {
        self.categories
            .iter()
            .flat_map(|c| c.items.iter().map(move |i| (c.name.as_str(), i)))
    }

    pub fn embed(&self, embedder: &Embedder) -> Result<EmbeddedRbs> {
        let texts: Vec<&str> = self.items().map(|(_, i)| i.text.as_str()).collect();
        Ok(EmbeddedRbs {
            items: self
                .items()
                .map(|(c, i)| (c.to_string(), i.text.clone()))
                .collect(),
            vectors: embedder
                .embed_all(&texts)?
                .into_iter()
                .map(|e| e.vector)
                .collect(),
        })
    }
}

pub fn load_rbs(path: &Path) -> Result<Rbs> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Rbs::from_json(&bytes)
}

/// RBS item texts with their embeddings, in file order.
#[derive(Debug, Clone)]
pub struct EmbeddedRbs {
    items: Vec<(String, String)>,
    vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub risk_id: String,
    pub text: String,
    pub best_item: String,
    pub category: String,
    pub score: f64,
    pub covered: bool,
    pub embedding_source: EmbeddingSource,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ImpactMeans {
    pub covered_cost_band: Option<f64>,
    pub covered_schedule_band: Option<f64>,
    pub uncovered_cost_band: Option<f64>,
    pub uncovered_schedule_band: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryShare {
    pub category: String,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub project_id: Option<String>,
    pub threshold: f64,
    pub rows: Vec<CoverageRow>,
    pub coverage_fraction: f64,
    pub histogram: ScoreHistogram,
    pub distribution: Vec<CategoryShare>,
    pub impact: ImpactMeans,
    /// Share of covered risks whose own category label names the matched
    /// RBS category, when the register carries labels.
    pub category_agreement: Option<f64>,
}

fn mean_band(items: &[&RiskItem], f: fn(&RiskItem) -> Option<Band>) -> Option<f64> {
    let v: Vec<f64> = items
        .iter()
        .filter_map(|i| f(i))
        .map(|b| f64::from(b.get()))
        .collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn shares(categories: impl Iterator<Item = String>) -> Vec<CategoryShare> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for c in categories {
        *counts.entry(c).or_default() += 1;
    }
    let total: usize = counts.values().sum();
    let mut out: Vec<CategoryShare> = counts
        .into_iter()
        .map(|(category, count)| CategoryShare {
            category,
            count,
            fraction: count as f64 / total as f64,
        })
        .collect();
    out.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then_with(|| a.category.cmp(&b.category))
    });
    out
}

/// Matches every register risk to its most similar RBS item; a risk is
/// covered when that score reaches `threshold`.
pub fn coverage(
    rbs: &EmbeddedRbs,
    register: &[RiskItem],
    embedder: &Embedder,
    threshold: f64,
) -> Result<CoverageReport> {
    if register.is_empty() {
        return Err(Error::Empty("coverage needs a non-empty register".into()));
    }
    let texts: Vec<String> = register.iter().map(|i| i.match_text(false)).collect();
    let embedded = embedder.embed_all(&texts)?;
    let rows = embedded
        .iter()
        .zip(register)
        .map(|(e, item)| {
            let (k, score) = best_match_index(&e.vector, &rbs.vectors)?.expect("RBS is non-empty");
            let (category, text) = &rbs.items[k];
            Ok(CoverageRow {
                risk_id: item.risk_id.clone(),
                text: item.name.clone(),
                best_item: text.clone(),
                category: category.clone(),
                score,
                covered: score >= threshold,
                embedding_source: e.source,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let covered: Vec<&RiskItem> = register
        .iter()
        .zip(&rows)
        .filter(|(_, r)| r.covered)
        .map(|(i, _)| i)
        .collect();
    let uncovered: Vec<&RiskItem> = register
        .iter()
        .zip(&rows)
        .filter(|(_, r)| !r.covered)
        .map(|(i, _)| i)
        .collect();
    let labelled: Vec<bool> = register
        .iter()
        .zip(&rows)
        .filter(|(_, r)| r.covered)
        .filter_map(|(i, r)| {
            i.category_label
                .as_ref()
                .map(|l| l.trim().eq_ignore_ascii_case(&r.category))
        })
        .collect();
    let scores: Vec<f64> = rows.iter().map(|r| r.score).collect();
    Ok(CoverageReport {
        project_id: None,
        threshold,
        coverage_fraction: covered.len() as f64 / rows.len() as f64,
        histogram: ScoreHistogram::of(&scores),
        distribution: shares(
            rows.iter()
                .filter(|r| r.covered)
                .map(|r| r.category.clone()),
        ),
        impact: ImpactMeans {
            covered_cost_band: mean_band(&covered, |i| i.assessment.cost_band),
            covered_schedule_band: mean_band(&covered, |i| i.assessment.schedule_band),
            uncovered_cost_band: mean_band(&uncovered, |i| i.assessment.cost_band),
            uncovered_schedule_band: mean_band(&uncovered, |i| i.assessment.schedule_band),
        },
        category_agreement: (!labelled.is_empty())
            .then(|| labelled.iter().filter(|&&b| b).count() as f64 / labelled.len() as f64),
        rows,
    })
}

/// Coverage of every project's latest register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusCoverage {
    pub threshold: f64,
    pub rbs_items: Vec<String>,
    pub coverage_fraction: f64,
    pub distribution: Vec<CategoryShare>,
    pub projects: Vec<CoverageReport>,
}

pub fn corpus_coverage(
    rbs: &Rbs,
    corpus: &Corpus,
    embedder: &Embedder,
    threshold: f64,
) -> Result<CorpusCoverage> {
    let embedded = rbs.embed(embedder)?;
    let projects = corpus
        .projects
        .par_iter()
        .filter(|p| !p.latest_snapshot().items.is_empty())
        .map(|p| {
            let mut r = coverage(&embedded, &p.latest_snapshot().items, embedder, threshold)?;
            r.project_id = Some(p.project_id.clone());
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    let total: usize = projects.iter().map(|r| r.rows.len()).sum();
    let covered: usize = projects
        .iter()
        .map(|r| r.rows.iter().filter(|x| x.covered).count())
        .sum();
    let distribution = category_distribution(&projects).unwrap_or_default();
    Ok(CorpusCoverage {
        threshold,
        rbs_items: rbs.items().map(|(_, i)| i.text.clone()).collect(),
        coverage_fraction: if total == 0 {
            0.0
        } else {
            covered as f64 / total as f64
        },
        distribution,
        projects,
    })
}

/// Share of covered risks per RBS category, across all reports, largest
/// first.
pub fn category_distribution(reports: &[CoverageReport]) -> Result<Vec<CategoryShare>> {
    let covered: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.rows
                .iter()
                .filter(|x| x.covered)
                .map(|x| x.category.clone())
        })
        .collect();
    if covered.is_empty() {
        return Err(Error::Empty("no covered risks to distribute".into()));
    }
    Ok(shares(covered.into_iter()))
}

/// Per-project presence counts over RBS items. `counts` is symmetric with
/// the diagonal holding occurrence counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooccurrenceMatrix {
    pub items: Vec<String>,
    pub projects: usize,
    pub occurrences: Vec<usize>,
    pub counts: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCount {
    pub item_a: String,
    pub item_b: String,
    pub count: usize,
}

impl CooccurrenceMatrix {
    /// An item occurs in a project when any covered risk maps to it.
    pub fn from_reports(items: &[String], reports: &[CoverageReport]) -> Result<Self> {
        let index: HashMap<&str, usize> = items
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect();
        let presence = reports
            .iter()
            .map(|r| {
                r.rows
                    .iter()
                    .filter(|row| row.covered)
                    .map(|row| {
                        index.get(row.best_item.as_str()).copied().ok_or_else(|| {
                            Error::Validation(format!("`{}` is not an RBS item", row.best_item))
                        })
                    })
                    .collect::<Result<BTreeSet<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_presence(items.to_vec(), &presence))
    }

    pub fn from_presence(items: Vec<String>, presence: &[BTreeSet<usize>]) -> Self {
        let n = items.len();
        let counts = presence
            .par_iter()
            .fold(
                || vec![vec![0usize; n]; n],
                |mut acc, set| {
                    for &i in set {
                        for &j in set {
                            acc[i][j] += 1;
                        }
                    }
                    acc
                },
            )
            .reduce(
                || vec![vec![0usize; n]; n],
                |mut a, b| {
                    for (ra, rb) in a.iter_mut().zip(b) {
                        for (x, y) in ra.iter_mut().zip(rb) {
                            *x += y;
                        }
                    }
                    a
                },
            );
        CooccurrenceMatrix {
            occurrences: (0..n).map(|i| counts[i][i]).collect(),
            items,
            projects: presence.len(),
            counts,
        }
    }

    pub fn count(&self, i: usize, j: usize) -> usize {
        self.counts[i][j]
    }

    /// Pairs `i < j` with a non-zero count, most frequent first, ties in
    /// item order.
    pub fn pairs(&self) -> Vec<PairCount> {
        let n = self.items.len();
        let mut idx: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.counts[i][j] > 0)
            .collect();
        idx.sort_by(|&(a, b), &(c, d)| {
            self.counts[c][d]
                .cmp(&self.counts[a][b])
                .then((a, b).cmp(&(c, d)))
        });
        idx.into_iter()
            .map(|(i, j)| PairCount {
                item_a: self.items[i].clone(),
                item_b: self.items[j].clone(),
                count: self.counts[i][j],
            })
            .collect()
    }

    pub fn pairs_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let pairs = self.pairs();
        for p in &pairs {
            w.serialize(p)
                .map_err(|e| Error::Validation(e.to_string()))?;
        }
        if pairs.is_empty() {
            w.write_record(["item_a", "item_b", "count"])
                .map_err(|e| Error::Validation(e.to_string()))?;
        }
        w.into_inner().map_err(|e| Error::Validation(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_shape() {
        let rbs = Rbs::bundled().unwrap();
        assert_eq!(rbs.categories.len(), 11);
        assert_eq!(rbs.item_count(), 70);
        let (cat, first) = rbs.items().next().unwrap();
        assert_eq!(cat, "Environmental");
        assert_eq!(first.text, "Environmental permitting and requirements");
        assert_eq!(first.frequency, 10);
        assert!(rbs
            .items()
            .any(|(_, i)| i.text == "Right of way acquisition issues"));
    }

    #[test]
    fn validation() {
        let dup = r#"{"categories":[{"name":"A","items":[{"text":"x","frequency":1}]},
                                    {"name":"B","items":[{"text":"x","frequency":2}]}]}"#;
        assert!(Rbs::from_json(dup.as_bytes()).is_err());
        let empty = r#"{"categories":[{"name":"A","items":[]}]}"#;
        assert!(Rbs::from_json(empty.as_bytes()).is_err());
        let zero = r#"{"categories":[{"name":"A","items":[{"text":"x","frequency":0}]}]}"#;
        assert!(Rbs::from_json(zero.as_bytes()).is_err());
    }

    #[test]
    fn two_projects_same_pair() {
        let items: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let sets = vec![BTreeSet::from([0, 1]), BTreeSet::from([0, 1])];
        let m = CooccurrenceMatrix::from_presence(items, &sets);
        assert_eq!(m.count(0, 1), 2);
        assert_eq!(m.count(1, 0), 2);
        assert_eq!(m.count(0, 2), 0);
        assert_eq!(m.occurrences, [2, 2, 0]);
        let csv = String::from_utf8(m.pairs_csv().unwrap()).unwrap();
        assert_eq!(csv, "item_a,item_b,count\nA,B,2\n");
    }

    #[test]
    fn distribution_counts() {
        let row = |cat: &str, covered: bool| CoverageRow {
            risk_id: String::new(),
            text: String::new(),
            best_item: String::new(),
            category: cat.into(),
            score: 0.9,
            covered,
            embedding_source: EmbeddingSource::WordAverage,
        };
        let report = CoverageReport {
            project_id: None,
            threshold: 0.6,
            rows: vec![
                row("X", true),
                row("Y", true),
                row("X", true),
                row("Z", false),
            ],
            coverage_fraction: 0.75,
            histogram: ScoreHistogram::of(&[]),
            distribution: vec![],
            impact: ImpactMeans::default(),
            category_agreement: None,
        };
        let d = category_distribution(std::slice::from_ref(&report)).unwrap();
        assert_eq!(d[0].category, "X");
        assert!((d[0].fraction - 2.0 / 3.0).abs() < 1e-12);
        assert!((d[1].fraction - 1.0 / 3.0).abs() < 1e-12);
        let mut none = report.clone();
        none.rows.retain(|r| !r.covered);
        assert!(category_distribution(&[none]).is_err());
    }
}
