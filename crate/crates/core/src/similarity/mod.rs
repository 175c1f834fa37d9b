//! Similarity between risk registers at three levels: whole documents
//! (TF-IDF), individual risk items (embeddings, best match), and the
//! assessments attached to matched items.

mod ttest;

pub use ttest::{two_sample_t_test, TTestResult, TTestVariant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Assessment, Band, Corpus, ProjectRecord, Qualitative, RiskItem};
use crate::error::{Error, Result};
use crate::vectorize::{
    cosine, tfidf_fit, tfidf_vector, tokenize, Embedder, SparseVector, StopWords, TfidfModel,
};

/// Score-band edges used for histograms.
pub const SCORE_BAND_EDGES: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 1.0];

/// Thresholds at which evaluation-level similarity is reported by default.
pub const EVALUATION_THRESHOLDS: [f64; 3] = [0.5, 0.7, 0.8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    DeliveryMethod,
    ProjectType,
    Jurisdiction,
    SizeBand,
}

impl GroupKey {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "delivery_method" => Some(GroupKey::DeliveryMethod),
            "project_type" => Some(GroupKey::ProjectType),
            "jurisdiction" => Some(GroupKey::Jurisdiction),
            "size_band" | "size" => Some(GroupKey::SizeBand),
            _ => None,
        }
    }

    pub fn value(self, project: &ProjectRecord) -> String {
        match self {
            GroupKey::DeliveryMethod => project.delivery_method.clone(),
            GroupKey::ProjectType => project.project_type.clone(),
            GroupKey::Jurisdiction => project.jurisdiction.clone(),
            GroupKey::SizeBand => project.size_band.as_str().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Document,
    RiskItem,
    Pooling,
    Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub source_project: Option<String>,
    pub source_risk_id: String,
    pub target_project: Option<String>,
    pub target_risk_id: String,
    pub score: f64,
}

/// Score between two projects. For risk-level pairs the direction matters:
/// every risk of `a` was matched into `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub a: String,
    pub b: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    /// Sums in slice order, so results do not depend on scheduling.
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let sum: f64 = values.iter().sum();
        Some(Summary {
            count: values.len(),
            mean: sum / values.len() as f64,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    #[serde(flatten)]
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreHistogram {
    pub edges: Vec<f64>,
    /// `counts[0]` is below the first edge; `counts[i]` covers
    /// `[edges[i-1], edges[i])`, the last bin is closed at 1.0.
    pub counts: Vec<usize>,
    pub fractions: Vec<f64>,
    /// Fraction of scores at or above each edge.
    pub cumulative_at_least: Vec<f64>,
}

impl ScoreHistogram {
    pub fn of(scores: &[f64]) -> Self {
        let edges = SCORE_BAND_EDGES.to_vec();
        let mut counts = vec![0usize; edges.len()];
        for &s in scores {
            let bin = edges[..edges.len() - 1].iter().filter(|&&e| s >= e).count();
            counts[bin] += 1;
        }
        let n = scores.len().max(1) as f64;
        let fractions = counts.iter().map(|&c| c as f64 / n).collect();
        let cumulative_at_least = edges
            .iter()
            .map(|&e| scores.iter().filter(|&&s| s >= e).count() as f64 / n)
            .collect();
        ScoreHistogram {
            edges,
            counts,
            fractions,
            cumulative_at_least,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolingProject {
    pub project_id: String,
    pub matches: Vec<MatchResult>,
    pub histogram: ScoreHistogram,
    pub fraction_at_least_half: f64,
    pub mean_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationLevel {
    pub threshold: f64,
    pub match_count: usize,
    pub probability: Option<f64>,
    pub cost: Option<f64>,
    pub schedule: Option<f64>,
    pub probability_cost: Option<f64>,
    pub probability_schedule: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub level: Level,
    pub pairs: Vec<PairScore>,
    pub overall: Option<Summary>,
    pub groups: Vec<GroupSummary>,
    pub test: Option<TTestResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matches: Vec<MatchResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pooling: Vec<PoolingProject>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evaluation: Vec<EvaluationLevel>,
    pub notes: Vec<String>,
}

impl SimilarityReport {
    fn new(level: Level) -> Self {
        SimilarityReport {
            level,
            pairs: Vec::new(),
            overall: None,
            groups: Vec::new(),
            test: None,
            matches: Vec::new(),
            pooling: Vec::new(),
            evaluation: Vec::new(),
            notes: vec!["group means weight every pair equally".into()],
        }
    }
}

/// Category, name and description of every risk in the project's latest
/// register, joined into one document.
pub fn document_text(project: &ProjectRecord) -> String {
    let mut parts = Vec::new();
    for item in &project.latest_snapshot().items {
        parts.extend(item.category_label.iter().cloned());
        parts.push(item.name.clone());
        parts.extend(item.description.iter().cloned());
    }
    parts.join(" ")
}

/// Per-group summaries over pairs whose two projects share a group, plus a
/// t-test when exactly two groups have pairs.
fn group_pairs(
    projects: &[&ProjectRecord],
    pairs: &[(usize, usize, f64)],
    group_by: Option<GroupKey>,
    variant: TTestVariant,
) -> Result<(Vec<GroupSummary>, Option<TTestResult>, Vec<String>)> {
    let Some(key) = group_by else {
        return Ok((Vec::new(), None, Vec::new()));
    };
    let labels: Vec<String> = projects.iter().map(|p| key.value(p)).collect();
    let mut order: Vec<String> = Vec::new();
    for l in &labels {
        if !order.contains(l) {
            order.push(l.clone());
        }
    }
    let mut groups = Vec::new();
    let mut samples = Vec::new();
    for g in &order {
        let scores: Vec<f64> = pairs
            .iter()
            .filter(|&&(i, j, _)| labels[i] == *g && labels[j] == *g)
            .map(|&(_, _, s)| s)
            .collect();
        if let Some(summary) = Summary::of(&scores) {
            groups.push(GroupSummary {
                group: g.clone(),
                summary,
            });
            samples.push(scores);
        }
    }
    let mut notes = Vec::new();
    let test = if samples.len() == 2 {
        match two_sample_t_test(&samples[0], &samples[1], variant) {
            Ok(t) => Some(t),
            Err(e) => {
                notes.push(format!("t-test skipped: {e}"));
                None
            }
        }
    } else {
        notes.push(format!(
            "t-test needs exactly two groups with pairs, found {}",
            samples.len()
        ));
        None
    };
    Ok((groups, test, notes))
}

/// Fits a TF-IDF model with one document per project.
pub fn fit_documents(corpus: &Corpus, stop_words: &StopWords) -> Result<TfidfModel> {
    let docs: Vec<_> = corpus
        .projects
        .iter()
        .map(|p| tokenize(&document_text(p), stop_words))
        .collect();
    tfidf_fit(&docs)
}

/// Cosine of TF-IDF document vectors for every unordered project pair.
pub fn document_similarity(
    corpus: &Corpus,
    model: &TfidfModel,
    stop_words: &StopWords,
    group_by: Option<GroupKey>,
    variant: TTestVariant,
) -> Result<SimilarityReport> {
    if corpus.len() < 2 {
        return Err(Error::Empty(
            "document similarity needs at least 2 projects".into(),
        ));
    }
    let vectors: Vec<SparseVector> = corpus
        .projects
        .par_iter()
        .map(|p| {
            let tokens = tokenize(&document_text(p), stop_words);
            if tokens.is_empty() {
                Ok(SparseVector::default())
            } else {
                tfidf_vector(model, &tokens)
            }
        })
        .collect::<Result<_>>()?;
    let n = vectors.len();
    let index_pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let scored: Vec<(usize, usize, f64)> = index_pairs
        .par_iter()
        .map(|&(i, j)| (i, j, vectors[i].cosine(&vectors[j])))
        .collect();

    let projects: Vec<&ProjectRecord> = corpus.projects.iter().collect();
    let mut report = SimilarityReport::new(Level::Document);
    report.pairs = scored
        .iter()
        .map(|&(i, j, score)| PairScore {
            a: projects[i].project_id.clone(),
            b: projects[j].project_id.clone(),
            score,
        })
        .collect();
    let scores: Vec<f64> = scored.iter().map(|s| s.2).collect();
    report.overall = Summary::of(&scores);
    let (groups, test, notes) = group_pairs(&projects, &scored, group_by, variant)?;
    report.groups = groups;
    report.test = test;
    report.notes.extend(notes);
    Ok(report)
}

/// Index and score of the most similar candidate. Ties go to the lowest
/// index; an empty candidate list yields `None`.
pub fn best_match_index(query: &[f64], candidates: &[Vec<f64>]) -> Result<Option<(usize, f64)>> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let score = cosine(query, c)?;
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((i, score));
        }
    }
    Ok(best)
}

/// Matches one risk to the most similar of `candidates` by name (or name
/// plus description).
pub fn best_match(
    risk: &RiskItem,
    candidates: &[RiskItem],
    embedder: &Embedder,
    use_description: bool,
) -> Result<MatchResult> {
    if candidates.is_empty() {
        return Err(Error::Empty(
            "best match needs at least one candidate".into(),
        ));
    }
    let query = embedder.embed(&risk.match_text(use_description))?.vector;
    let pool = embed_items(candidates, embedder, use_description)?;
    let (i, score) = best_match_index(&query, &pool)?.expect("non-empty candidates");
    Ok(MatchResult {
        source_project: None,
        source_risk_id: risk.risk_id.clone(),
        target_project: None,
        target_risk_id: candidates[i].risk_id.clone(),
        score,
    })
}

pub fn embed_items(
    items: &[RiskItem],
    embedder: &Embedder,
    use_description: bool,
) -> Result<Vec<Vec<f64>>> {
    let texts: Vec<String> = items
        .iter()
        .map(|i| i.match_text(use_description))
        .collect();
    Ok(embedder
        .embed_all(&texts)?
        .into_iter()
        .map(|e| e.vector)
        .collect())
}

/// Embeddings of every project's latest register, in corpus order.
pub struct EmbeddedCorpus<'a> {
    pub corpus: &'a Corpus,
    pub vectors: Vec<Vec<Vec<f64>>>,
}

impl<'a> EmbeddedCorpus<'a> {
    pub fn new(corpus: &'a Corpus, embedder: &Embedder, use_description: bool) -> Result<Self> {
        let vectors = corpus
            .projects
            .iter()
            .map(|p| embed_items(&p.latest_snapshot().items, embedder, use_description))
            .collect::<Result<_>>()?;
        Ok(EmbeddedCorpus { corpus, vectors })
    }

    fn items(&self, project: usize) -> &[RiskItem] {
        &self.corpus.projects[project].latest_snapshot().items
    }

    fn project_id(&self, project: usize) -> &str {
        &self.corpus.projects[project].project_id
    }

    /// Directional matching of every risk of project `a` into project `b`.
    pub fn match_projects(&self, a: usize, b: usize) -> Result<Vec<MatchResult>> {
        let (items_a, items_b) = (self.items(a), self.items(b));
        if items_a.is_empty() || items_b.is_empty() {
            return Err(Error::Empty(format!(
                "cannot match `{}` into `{}`: empty register",
                self.project_id(a),
                self.project_id(b)
            )));
        }
        self.vectors[a]
            .iter()
            .zip(items_a)
            .map(|(q, item)| {
                let (j, score) =
                    best_match_index(q, &self.vectors[b])?.expect("non-empty register");
                Ok(MatchResult {
                    source_project: Some(self.project_id(a).to_string()),
                    source_risk_id: item.risk_id.clone(),
                    target_project: Some(self.project_id(b).to_string()),
                    target_risk_id: items_b[j].risk_id.clone(),
                    score,
                })
            })
            .collect()
    }

    /// Matches each risk of `project` against the union of the risks of
    /// `pool` projects, scanned in the given order.
    pub fn match_into_pool(&self, project: usize, pool: &[usize]) -> Result<Vec<MatchResult>> {
        let candidates: Vec<(usize, usize)> = pool
            .iter()
            .flat_map(|&p| (0..self.vectors[p].len()).map(move |r| (p, r)))
            .collect();
        if candidates.is_empty() {
            return Err(Error::Empty(format!(
                "no pool risks for `{}`",
                self.project_id(project)
            )));
        }
        let flat: Vec<Vec<f64>> = candidates
            .iter()
            .map(|&(p, r)| self.vectors[p][r].clone())
            .collect();
        self.vectors[project]
            .par_iter()
            .zip(self.items(project).par_iter())
            .map(|(q, item)| {
                let (k, score) = best_match_index(q, &flat)?.expect("non-empty pool");
                let (p, r) = candidates[k];
                Ok(MatchResult {
                    source_project: Some(self.project_id(project).to_string()),
                    source_risk_id: item.risk_id.clone(),
                    target_project: Some(self.project_id(p).to_string()),
                    target_risk_id: self.items(p)[r].risk_id.clone(),
                    score,
                })
            })
            .collect()
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Directional similarity of two registers: the mean best-match score of
/// every risk of `reg_a` into `reg_b`.
pub fn pairwise_risk_similarity(
    reg_a: &[RiskItem],
    reg_b: &[RiskItem],
    embedder: &Embedder,
    use_description: bool,
) -> Result<(f64, Vec<MatchResult>)> {
    if reg_a.is_empty() || reg_b.is_empty() {
        return Err(Error::Empty(
            "risk-level similarity needs two non-empty registers".into(),
        ));
    }
    let va = embed_items(reg_a, embedder, use_description)?;
    let vb = embed_items(reg_b, embedder, use_description)?;
    let matches = va
        .iter()
        .zip(reg_a)
        .map(|(q, item)| {
            let (j, score) = best_match_index(q, &vb)?.expect("non-empty register");
            Ok(MatchResult {
                source_project: None,
                source_risk_id: item.risk_id.clone(),
                target_project: None,
                target_risk_id: reg_b[j].risk_id.clone(),
                score,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let m = mean(matches.iter().map(|m| m.score)).expect("non-empty");
    Ok((m, matches))
}

/// Risk-level similarity for every ordered project pair.
pub fn risk_level_report(
    embedded: &EmbeddedCorpus<'_>,
    group_by: Option<GroupKey>,
    variant: TTestVariant,
) -> Result<SimilarityReport> {
    let n = embedded.corpus.len();
    if n < 2 {
        return Err(Error::Empty(
            "risk-level similarity needs at least 2 projects".into(),
        ));
    }
    let ordered: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let scored: Vec<(usize, usize, f64)> = ordered
        .par_iter()
        .map(|&(i, j)| {
            let matches = embedded.match_projects(i, j)?;
            Ok((
                i,
                j,
                mean(matches.iter().map(|m| m.score)).expect("non-empty"),
            ))
        })
        .collect::<Result<_>>()?;
    let projects: Vec<&ProjectRecord> = embedded.corpus.projects.iter().collect();
    let mut report = SimilarityReport::new(Level::RiskItem);
    report.pairs = scored
        .iter()
        .map(|&(i, j, score)| PairScore {
            a: projects[i].project_id.clone(),
            b: projects[j].project_id.clone(),
            score,
        })
        .collect();
    let scores: Vec<f64> = scored.iter().map(|s| s.2).collect();
    report.overall = Summary::of(&scores);
    let (groups, test, notes) = group_pairs(&projects, &scored, group_by, variant)?;
    report.groups = groups;
    report.test = test;
    report
        .notes
        .push("pair a->b matches every risk of a into b; a->b and b->a can differ".into());
    report.notes.extend(notes);
    Ok(report)
}

/// Indices of the projects forming `project`'s pool: every other project,
/// or only those sharing its group.
fn pool_for(corpus: &Corpus, project: usize, group_by: Option<GroupKey>) -> Vec<usize> {
    let own = group_by.map(|k| k.value(&corpus.projects[project]));
    (0..corpus.len())
        .filter(|&j| j != project)
        .filter(|&j| match (group_by, &own) {
            (Some(k), Some(g)) => k.value(&corpus.projects[j]) == *g,
            _ => true,
        })
        .collect()
}

/// Pooling analysis of one project: each of its risks is matched against
/// every risk of every other project (within its group when `group_by` is
/// set).
pub fn pooling_similarity(
    project_id: &str,
    embedded: &EmbeddedCorpus<'_>,
    group_by: Option<GroupKey>,
) -> Result<PoolingProject> {
    let corpus = embedded.corpus;
    let index = corpus
        .projects
        .iter()
        .position(|p| p.project_id == project_id)
        .ok_or_else(|| Error::UnknownProject(project_id.to_string()))?;
    let pool = pool_for(corpus, index, group_by);
    if pool.is_empty() {
        return Err(Error::Empty(format!(
            "no other projects to pool against `{project_id}`"
        )));
    }
    let matches = embedded.match_into_pool(index, &pool)?;
    let scores: Vec<f64> = matches.iter().map(|m| m.score).collect();
    let histogram = ScoreHistogram::of(&scores);
    let fraction_at_least_half = histogram.cumulative_at_least[0];
    Ok(PoolingProject {
        project_id: project_id.to_string(),
        mean_score: mean(scores.iter().copied()).unwrap_or(0.0),
        matches,
        histogram,
        fraction_at_least_half,
    })
}

/// Pooling analysis of every project with a non-empty pool and register.
pub fn pooling_report(
    embedded: &EmbeddedCorpus<'_>,
    group_by: Option<GroupKey>,
    variant: TTestVariant,
) -> Result<SimilarityReport> {
    let corpus = embedded.corpus;
    let mut report = SimilarityReport::new(Level::Pooling);
    for p in &corpus.projects {
        if p.latest_snapshot().items.is_empty() {
            report
                .notes
                .push(format!("`{}` skipped: empty register", p.project_id));
            continue;
        }
        match pooling_similarity(&p.project_id, embedded, group_by) {
            Ok(r) => report.pooling.push(r),
            Err(Error::Empty(msg)) => report
                .notes
                .push(format!("`{}` skipped: {msg}", p.project_id)),
            Err(e) => return Err(e),
        }
    }
    let fractions: Vec<f64> = report
        .pooling
        .iter()
        .map(|p| p.fraction_at_least_half)
        .collect();
    report.overall = Summary::of(&fractions);
    report
        .notes
        .push("overall summarizes each project's fraction of risks matched at >= 0.5".into());
    if let Some(key) = group_by {
        let mut order: Vec<String> = Vec::new();
        let mut samples: Vec<Vec<f64>> = Vec::new();
        for pp in &report.pooling {
            let g = key.value(
                corpus
                    .project(&pp.project_id)
                    .expect("pooled project exists"),
            );
            match order.iter().position(|o| *o == g) {
                Some(i) => samples[i].push(pp.fraction_at_least_half),
                None => {
                    order.push(g);
                    samples.push(vec![pp.fraction_at_least_half]);
                }
            }
        }
        report.groups = order
            .into_iter()
            .zip(&samples)
            .filter_map(|(group, s)| Summary::of(s).map(|summary| GroupSummary { group, summary }))
            .collect();
        if samples.len() == 2 {
            match two_sample_t_test(&samples[0], &samples[1], variant) {
                Ok(t) => report.test = Some(t),
                Err(e) => report.notes.push(format!("t-test skipped: {e}")),
            }
        }
    }
    Ok(report)
}

/// Distance similarity of two Likert bands as a percentage:
/// `(1 - |x1 - x2| / 4) * 100`.
pub fn evaluation_similarity(x1: i64, x2: i64) -> Result<f64> {
    let (a, b) = (Band::new(x1)?, Band::new(x2)?);
    Ok(band_similarity(a, b))
}

pub fn band_similarity(a: Band, b: Band) -> f64 {
    let distance = (i64::from(a.get()) - i64::from(b.get())).abs() as f64;
    (1.0 - distance / 4.0) * 100.0
}

/// 100 when both qualitative levels agree, 0 otherwise.
pub fn qualitative_match(q1: Qualitative, q2: Qualitative) -> Result<f64> {
    if !q1.is_set() || !q2.is_set() {
        return Err(Error::UnsetQualitative);
    }
    Ok(if q1 == q2 { 100.0 } else { 0.0 })
}

/// A matched pair together with both assessments.
#[derive(Debug, Clone, PartialEq)]
pub struct AssessedMatch {
    pub score: f64,
    pub source: Assessment,
    pub target: Assessment,
}

/// Mean assessment agreement over matches scoring at least `threshold`.
/// Each metric averages only the pairs where both sides are assessed.
pub fn evaluation_level_report(
    matches: &[AssessedMatch],
    threshold: f64,
) -> Result<EvaluationLevel> {
    let kept: Vec<&AssessedMatch> = matches.iter().filter(|m| m.score >= threshold).collect();
    if kept.is_empty() {
        return Err(Error::NoMatches(threshold));
    }
    let bands = |f: fn(&Assessment) -> Option<Band>| {
        mean(
            kept.iter()
                .filter_map(|m| Some(band_similarity(f(&m.source)?, f(&m.target)?))),
        )
    };
    let quals = |f: fn(&Assessment) -> Qualitative| {
        mean(
            kept.iter()
                .filter_map(|m| qualitative_match(f(&m.source), f(&m.target)).ok()),
        )
    };
    Ok(EvaluationLevel {
        threshold,
        match_count: kept.len(),
        probability: bands(|a| a.probability_band),
        cost: bands(|a| a.cost_band),
        schedule: bands(|a| a.schedule_band),
        probability_cost: quals(|a| a.qualitative_cost),
        probability_schedule: quals(|a| a.qualitative_schedule),
    })
}

/// Looks up the assessments behind pooling matches.
pub fn assessed_matches(corpus: &Corpus, matches: &[MatchResult]) -> Vec<AssessedMatch> {
    let find = |project: &Option<String>, risk: &str| {
        project
            .as_deref()
            .and_then(|p| corpus.project(p))
            .and_then(|p| p.latest_snapshot().items.iter().find(|i| i.risk_id == risk))
            .map(|i| i.assessment.clone())
    };
    matches
        .iter()
        .filter_map(|m| {
            Some(AssessedMatch {
                score: m.score,
                source: find(&m.source_project, &m.source_risk_id)?,
                target: find(&m.target_project, &m.target_risk_id)?,
            })
        })
        .collect()
}

/// Evaluation-level similarity of pooled matches at each threshold.
/// Thresholds with no surviving matches are noted and skipped.
pub fn evaluation_report(
    embedded: &EmbeddedCorpus<'_>,
    group_by: Option<GroupKey>,
    thresholds: &[f64],
) -> Result<SimilarityReport> {
    let pooled = pooling_report(embedded, group_by, TTestVariant::default())?;
    let mut report = SimilarityReport::new(Level::Evaluation);
    report.notes = pooled
        .notes
        .into_iter()
        .filter(|n| n.contains("skipped"))
        .collect();
    let all: Vec<MatchResult> = pooled.pooling.into_iter().flat_map(|p| p.matches).collect();
    let assessed = assessed_matches(embedded.corpus, &all);
    for &t in thresholds {
        match evaluation_level_report(&assessed, t) {
            Ok(level) => report.evaluation.push(level),
            Err(Error::NoMatches(_)) => report.notes.push(format!("no matches at threshold {t}")),
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn likert_grid() {
        assert_eq!(evaluation_similarity(3, 3).unwrap(), 100.0);
        assert_eq!(evaluation_similarity(1, 5).unwrap(), 0.0);
        assert_eq!(evaluation_similarity(2, 4).unwrap(), 50.0);
        assert!(evaluation_similarity(0, 3).is_err());
        assert!(evaluation_similarity(3, 6).is_err());
    }

    #[test]
    fn qualitative() {
        use Qualitative::*;
        assert_eq!(qualitative_match(High, High).unwrap(), 100.0);
        assert_eq!(qualitative_match(High, Low).unwrap(), 0.0);
        assert_eq!(qualitative_match(Medium, Medium).unwrap(), 100.0);
        assert!(matches!(
            qualitative_match(Unset, High),
            Err(Error::UnsetQualitative)
        ));
    }

    #[test]
    fn best_match_ties_go_low() {
        let cands = vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(
            best_match_index(&[1.0, 0.0], &cands).unwrap(),
            Some((0, 1.0))
        );
        assert_eq!(
            best_match_index(&[0.0, 0.0], &cands).unwrap(),
            Some((0, 0.0))
        );
        assert_eq!(best_match_index(&[1.0, 0.0], &[]).unwrap(), None);
        let (i, s) = best_match_index(&[-1.0, 0.0], &[vec![-1.0, -5.0]])
            .unwrap()
            .unwrap();
        assert_eq!(i, 0);
        assert!(s > 0.0);
    }

    fn assessed(score: f64, a: (u8, u8, u8), b: (u8, u8, u8)) -> AssessedMatch {
        let mk = |(p, c, s): (u8, u8, u8)| Assessment {
            probability_band: Some(Band::new(p.into()).unwrap()),
            cost_band: Some(Band::new(c.into()).unwrap()),
            schedule_band: Some(Band::new(s.into()).unwrap()),
            qualitative_cost: if p * c >= 15 {
                Qualitative::High
            } else if p * c >= 6 {
                Qualitative::Medium
            } else {
                Qualitative::Low
            },
            qualitative_schedule: if p * s >= 15 {
                Qualitative::High
            } else if p * s >= 6 {
                Qualitative::Medium
            } else {
                Qualitative::Low
            },
            ..Assessment::default()
        };
        AssessedMatch {
            score,
            source: mk(a),
            target: mk(b),
        }
    }

    #[test]
    fn evaluation_hand_average() {
        let ms = vec![
            assessed(0.9, (3, 3, 3), (3, 3, 3)),
            assessed(0.75, (1, 2, 5), (2, 2, 1)),
            assessed(0.6, (5, 5, 5), (1, 1, 1)),
            assessed(0.4, (1, 1, 1), (5, 5, 5)),
        ];
        // >= 0.5 keeps the first three
        let r = evaluation_level_report(&ms, 0.5).unwrap();
        assert_eq!(r.match_count, 3);
        assert_abs_diff_eq!(r.probability.unwrap(), (100.0 + 75.0 + 0.0) / 3.0);
        assert_abs_diff_eq!(r.cost.unwrap(), (100.0 + 100.0 + 0.0) / 3.0);
        assert_abs_diff_eq!(r.schedule.unwrap(), (100.0 + 0.0 + 0.0) / 3.0);
        // qualitative cost: (M,M) (L,L) (H,L) ; schedule: (M,M) (L,L) (H,L)
        assert_abs_diff_eq!(r.probability_cost.unwrap(), 200.0 / 3.0);
        assert_abs_diff_eq!(r.probability_schedule.unwrap(), 200.0 / 3.0);
        let r = evaluation_level_report(&ms, 0.8).unwrap();
        assert_eq!(r.match_count, 1);
        assert_eq!(r.probability, Some(100.0));
        assert!(matches!(
            evaluation_level_report(&ms, 0.95),
            Err(Error::NoMatches(_))
        ));
    }

    #[test]
    fn identical_assessments_score_100() {
        let ms = vec![
            assessed(0.9, (2, 4, 1), (2, 4, 1)),
            assessed(0.7, (5, 1, 3), (5, 1, 3)),
        ];
        let r = evaluation_level_report(&ms, 0.5).unwrap();
        for v in [
            r.probability,
            r.cost,
            r.schedule,
            r.probability_cost,
            r.probability_schedule,
        ] {
            assert_eq!(v, Some(100.0));
        }
    }

    #[test]
    fn unassessed_pairs_are_skipped_per_metric() {
        let mut m = assessed(0.9, (2, 2, 2), (2, 2, 2));
        m.target.cost_band = None;
        m.target.qualitative_cost = Qualitative::Unset;
        let r = evaluation_level_report(&[m], 0.5).unwrap();
        assert_eq!(r.cost, None);
        assert_eq!(r.probability_cost, None);
        assert_eq!(r.probability, Some(100.0));
    }

    #[test]
    fn histogram_bins() {
        let h = ScoreHistogram::of(&[0.1, 0.5, 0.65, 0.7, 0.79, 0.8, 1.0]);
        assert_eq!(h.counts, [1, 1, 1, 2, 2]);
        assert_abs_diff_eq!(h.cumulative_at_least[0], 6.0 / 7.0);
        assert_abs_diff_eq!(h.cumulative_at_least[4], 1.0 / 7.0);
    }
}
