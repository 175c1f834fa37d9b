//! Risk-register templates: select comparable projects, group similar
//! risks, rank the groups and score the result against held-out registers.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Band, Corpus, ProjectRecord, RiskItem};
use crate::data;
use crate::error::{Error, Result};
use crate::similarity::{best_match_index, embed_items};
use crate::vectorize::{cosine, normalize_sentence_key, Embedder};

pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.7;
pub const DEFAULT_LABEL_THRESHOLD: f64 = 0.6;

/// Below this many selected projects a template is flagged as possibly biased.
pub const MIN_PROJECTS: usize = 5;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterCriteria {
    pub project_type: Option<String>,
    pub size_band: Option<String>,
    pub delivery_method: Option<String>,
    pub jurisdiction: Option<String>,
}

impl FilterCriteria {
    /// Parses `type=highway,size=over_1B,delivery=DBB,location=WA`.
    /// A value of `all` leaves that criterion unset.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut criteria = FilterCriteria::default();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("filter term `{part}` is not key=value")))?;
            let value = value.trim();
            let value = (!value.eq_ignore_ascii_case("all")).then(|| value.to_string());
            let characteristic = Characteristic::parse(key.trim())
                .filter(|c| *c != Characteristic::All)
                .ok_or_else(|| Error::Config(format!("unknown filter key `{key}`")))?;
            criteria.set(characteristic, value);
        }
        Ok(criteria)
    }

    pub fn is_empty(&self) -> bool {
        *self == FilterCriteria::default()
    }

    fn set(&mut self, characteristic: Characteristic, value: Option<String>) {
        match characteristic {
            Characteristic::All => {}
            Characteristic::ProjectType => self.project_type = value,
            Characteristic::SizeBand => self.size_band = value,
            Characteristic::DeliveryMethod => self.delivery_method = value,
            Characteristic::Jurisdiction => self.jurisdiction = value,
        }
    }

    pub fn matches(&self, project: &ProjectRecord) -> bool {
        let ok = |want: &Option<String>, have: &str| {
            want.as_deref().is_none_or(|w| w.eq_ignore_ascii_case(have))
        };
        ok(&self.project_type, &project.project_type)
            && ok(&self.size_band, project.size_band.as_str())
            && ok(&self.delivery_method, &project.delivery_method)
            && ok(&self.jurisdiction, &project.jurisdiction)
    }
}

/// Projects meeting every set criterion, in corpus order.
pub fn filter_projects<'a>(
    corpus: &'a Corpus,
    criteria: &FilterCriteria,
) -> Vec<&'a ProjectRecord> {
    let selected: Vec<_> = corpus
        .projects
        .iter()
        .filter(|p| criteria.matches(p))
        .collect();
    if selected.len() < MIN_PROJECTS {
        warn!(
            "filter selected {} project(s); fewer than {MIN_PROJECTS} may bias the template",
            selected.len()
        );
    }
    selected
}

/// Greedy seed clustering of `vectors` in order: the first unassigned
/// vector seeds a group and every later unassigned vector whose cosine to
/// the seed reaches `threshold` joins it. Returns member indices per group,
/// seed first.
pub fn group_vectors(vectors: &[Vec<f64>], threshold: f64) -> Result<Vec<Vec<usize>>> {
    let mut assigned = vec![false; vectors.len()];
    let mut groups = Vec::new();
    for seed in 0..vectors.len() {
        if assigned[seed] {
            continue;
        }
        assigned[seed] = true;
        let candidates: Vec<usize> = (seed + 1..vectors.len())
            .filter(|&j| !assigned[j])
            .collect();
        let joins: Vec<bool> = candidates
            .par_iter()
            .map(|&j| Ok(cosine(&vectors[seed], &vectors[j])? >= threshold))
            .collect::<Result<_>>()?;
        let mut members = vec![seed];
        for (&j, join) in candidates.iter().zip(joins) {
            if join {
                assigned[j] = true;
                members.push(j);
            }
        }
        groups.push(members);
    }
    Ok(groups)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MemberRef {
    pub project_id: String,
    pub risk_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskGroup {
    pub seed: MemberRef,
    pub members: Vec<MemberRef>,
    pub representative_text: String,
    pub prevalence: f64,
    pub avg_probability_band: Option<f64>,
    pub avg_cost_band: Option<f64>,
    pub avg_schedule_band: Option<f64>,
    pub category: Option<String>,
    pub category_score: Option<f64>,
    pub source_projects: Vec<String>,
}

impl RiskGroup {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Fills a group from its members (`(project_id, risk)` pairs, seed first).
/// The representative is the most frequent normalized text, ties going to
/// the lexicographically smallest; band averages skip unassessed members.
pub fn summarize_group(
    members: &[(&str, &RiskItem)],
    selected_projects: usize,
) -> Result<RiskGroup> {
    let Some(&(seed_project, seed_item)) = members.first() else {
        return Err(Error::Empty("cannot summarize an empty group".into()));
    };
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for (_, item) in members {
        *counts
            .entry(normalize_sentence_key(&item.name))
            .or_default() += 1;
    }
    // BTreeMap iterates in key order, so the first maximum is the smallest text.
    let mut representative = String::new();
    let mut best = 0;
    for (text, &n) in &counts {
        if n > best {
            best = n;
            representative = text.clone();
        }
    }
    let average = |f: fn(&RiskItem) -> Option<Band>| {
        let bands: Vec<f64> = members
            .iter()
            .filter_map(|(_, i)| f(i))
            .map(|b| f64::from(b.get()))
            .collect();
        (!bands.is_empty()).then(|| bands.iter().sum::<f64>() / bands.len() as f64)
    };
    let mut source_projects: Vec<String> = Vec::new();
    for (p, _) in members {
        if !source_projects.iter().any(|s| s == p) {
            source_projects.push(p.to_string());
        }
    }
    Ok(RiskGroup {
        seed: MemberRef {
            project_id: seed_project.to_string(),
            risk_id: seed_item.risk_id.clone(),
        },
        members: members
            .iter()
            .map(|(p, i)| MemberRef {
                project_id: p.to_string(),
                risk_id: i.risk_id.clone(),
            })
            .collect(),
        representative_text: representative,
        prevalence: source_projects.len() as f64 / selected_projects.max(1) as f64,
        avg_probability_band: average(|i| i.assessment.probability_band),
        avg_cost_band: average(|i| i.assessment.cost_band),
        avg_schedule_band: average(|i| i.assessment.schedule_band),
        category: None,
        category_score: None,
        source_projects,
    })
}

/// Groups the risks of each project's latest register, projects in the
/// given order and risks in register order.
pub fn group_risks(
    projects: &[&ProjectRecord],
    embedder: &Embedder,
    threshold: f64,
    use_description: bool,
) -> Result<Vec<RiskGroup>> {
    if projects.is_empty() {
        return Err(Error::Empty("grouping needs at least one project".into()));
    }
    let members: Vec<(&str, &RiskItem)> = projects
        .iter()
        .flat_map(|p| {
            p.latest_snapshot()
                .items
                .iter()
                .map(move |i| (p.project_id.as_str(), i))
        })
        .collect();
    let items: Vec<RiskItem> = members.iter().map(|(_, i)| (*i).clone()).collect();
    let vectors = embed_items(&items, embedder, use_description)?;
    group_vectors(&vectors, threshold)?
        .into_iter()
        .map(|idx| {
            let group: Vec<_> = idx.into_iter().map(|i| members[i]).collect();
            summarize_group(&group, projects.len())
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CategoryFile {
    categories: Vec<Category>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Category {
    pub label: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategorySet {
    categories: Vec<Category>,
}

impl CategorySet {
    pub fn new(categories: Vec<Category>) -> Result<Self> {
        if categories.is_empty() {
            return Err(Error::Validation("category set is empty".into()));
        }
        let mut seen = HashSet::new();
        for c in &categories {
            if !seen.insert(c.label.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate category label `{}`",
                    c.label
                )));
            }
        }
        Ok(CategorySet { categories })
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let file: CategoryFile =
            serde_json::from_slice(bytes).map_err(|e| Error::json("category set", e))?;
        Self::new(file.categories)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&bytes)
    }

    /// The WSDOT category set shipped with the crate.
    pub fn bundled() -> Result<Self> {
        Self::from_json(data::bundled(data::CATEGORIES_FILE)?.as_bytes())
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn embed(&self, embedder: &Embedder, label_only: bool) -> Result<EmbeddedCategories> {
        let texts: Vec<String> = self
            .categories
            .iter()
            .map(|c| {
                if label_only || c.description.is_empty() {
                    c.label.clone()
                } else {
                    format!("{} {}", c.label, c.description)
                }
            })
            .collect();
        Ok(EmbeddedCategories {
            labels: self.categories.iter().map(|c| c.label.clone()).collect(),
            vectors: embedder
                .embed_all(&texts)?
                .into_iter()
                .map(|e| e.vector)
                .collect(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddedCategories {
    labels: Vec<String>,
    vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: String,
    pub score: f64,
    /// Every category score, in category order.
    pub scores: Vec<f64>,
    pub all_oov: bool,
}

impl EmbeddedCategories {
    pub fn classify(&self, embedder: &Embedder, text: &str) -> Result<Classification> {
        let e = embedder.embed(text)?;
        let scores = self
            .vectors
            .iter()
            .map(|v| cosine(&e.vector, v))
            .collect::<Result<Vec<_>>>()?;
        let (i, score) =
            best_match_index(&e.vector, &self.vectors)?.expect("category set is non-empty");
        Ok(Classification {
            label: self.labels[i].clone(),
            score,
            scores,
            all_oov: e.all_oov,
        })
    }
}

/// The category whose text is most similar to `text`; ties go to the
/// earlier category.
pub fn classify_risk(
    text: &str,
    categories: &CategorySet,
    embedder: &Embedder,
    label_only: bool,
) -> Result<Classification> {
    categories
        .embed(embedder, label_only)?
        .classify(embedder, text)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortKey {
    #[default]
    Prevalence,
    Cost,
    Schedule,
}

impl SortKey {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "prevalence" => Some(SortKey::Prevalence),
            "cost" => Some(SortKey::Cost),
            "schedule" => Some(SortKey::Schedule),
            _ => None,
        }
    }

    fn value(self, e: &TemplateEntry) -> Option<f64> {
        match self {
            SortKey::Prevalence => Some(e.prevalence),
            SortKey::Cost => e.avg_cost,
            SortKey::Schedule => e.avg_schedule,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateEntry {
    pub rank: usize,
    pub text: String,
    pub category: Option<String>,
    pub prevalence: f64,
    pub avg_probability: Option<f64>,
    pub avg_cost: Option<f64>,
    pub avg_schedule: Option<f64>,
    pub group_size: usize,
    pub source_projects: Vec<String>,
}

impl From<&RiskGroup> for TemplateEntry {
    fn from(g: &RiskGroup) -> Self {
        TemplateEntry {
            rank: 0,
            text: g.representative_text.clone(),
            category: g.category.clone(),
            prevalence: g.prevalence,
            avg_probability: g.avg_probability_band,
            avg_cost: g.avg_cost_band,
            avg_schedule: g.avg_schedule_band,
            group_size: g.size(),
            source_projects: g.source_projects.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskTemplate {
    pub entries: Vec<TemplateEntry>,
    pub sort_key: SortKey,
    pub source_filter: FilterCriteria,
    pub source_project_count: usize,
}

/// Ranks groups descending on `sort_key` (unassessed groups last), breaking
/// ties by prevalence and then text, and keeps the first `top_n`.
pub fn build_template(
    groups: &[RiskGroup],
    sort_key: SortKey,
    top_n: usize,
) -> Result<Vec<TemplateEntry>> {
    if top_n == 0 {
        return Err(Error::Config("template size must be positive".into()));
    }
    if groups.is_empty() {
        return Err(Error::Empty(
            "no risk groups to build a template from".into(),
        ));
    }
    let mut entries: Vec<TemplateEntry> = groups.iter().map(TemplateEntry::from).collect();
    entries.sort_by(|a, b| {
        let key = match (sort_key.value(a), sort_key.value(b)) {
            (Some(x), Some(y)) => y.total_cmp(&x),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        };
        key.then(b.prevalence.total_cmp(&a.prevalence))
            .then_with(|| a.text.cmp(&b.text))
    });
    entries.truncate(top_n);
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i + 1;
    }
    Ok(entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemplateOptions {
    pub match_threshold: f64,
    pub sort_key: SortKey,
    pub top_n: usize,
    pub use_description: bool,
}

impl Default for TemplateOptions {
    fn default() -> Self {
        TemplateOptions {
            match_threshold: DEFAULT_MATCH_THRESHOLD,
            sort_key: SortKey::Prevalence,
            top_n: 30,
            use_description: false,
        }
    }
}

/// Filter, group, classify and rank in one pass.
pub fn template_from_corpus(
    corpus: &Corpus,
    filter: &FilterCriteria,
    embedder: &Embedder,
    categories: Option<&EmbeddedCategories>,
    options: &TemplateOptions,
) -> Result<RiskTemplate> {
    let projects = filter_projects(corpus, filter);
    template_from_projects(&projects, filter, embedder, categories, options)
}

pub fn template_from_projects(
    projects: &[&ProjectRecord],
    filter: &FilterCriteria,
    embedder: &Embedder,
    categories: Option<&EmbeddedCategories>,
    options: &TemplateOptions,
) -> Result<RiskTemplate> {
    let mut groups = group_risks(
        projects,
        embedder,
        options.match_threshold,
        options.use_description,
    )?;
    if let Some(cats) = categories {
        let labels = groups
            .par_iter()
            .map(|g| cats.classify(embedder, &g.representative_text))
            .collect::<Result<Vec<_>>>()?;
        for (g, c) in groups.iter_mut().zip(labels) {
            g.category = Some(c.label);
            g.category_score = Some(c.score);
        }
    }
    Ok(RiskTemplate {
        entries: build_template(&groups, options.sort_key, options.top_n)?,
        sort_key: options.sort_key,
        source_filter: filter.clone(),
        source_project_count: projects.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
}

impl EvalCounts {
    pub fn from_counts(tp: usize, fn_: usize, fp: usize) -> Self {
        let ratio = |num: f64, den: f64| (den > 0.0).then(|| num / den);
        let t = tp as f64;
        EvalCounts {
            tp,
            fn_,
            fp,
            recall: ratio(t, t + fn_ as f64),
            precision: ratio(t, t + fp as f64),
            f1: ratio(t, t + 0.5 * (fn_ + fp) as f64),
        }
    }
}

impl std::ops::Add for EvalCounts {
    type Output = EvalCounts;

    fn add(self, o: EvalCounts) -> EvalCounts {
        EvalCounts::from_counts(self.tp + o.tp, self.fn_ + o.fn_, self.fp + o.fp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub risk_id: String,
    pub best_rank: usize,
    pub score: f64,
    pub true_positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateEvaluation {
    pub counts: EvalCounts,
    pub label_threshold: f64,
    pub rows: Vec<EvalRow>,
    pub unused_entries: Vec<usize>,
}

/// Matches every test risk to its best template entry. A match scoring at
/// least `label_threshold` is a true positive, otherwise a false negative;
/// entries no true positive chose are false positives.
pub fn evaluate_template(
    entries: &[TemplateEntry],
    test_register: &[RiskItem],
    embedder: &Embedder,
    label_threshold: f64,
    use_description: bool,
) -> Result<TemplateEvaluation> {
    if entries.is_empty() || test_register.is_empty() {
        return Err(Error::Empty(
            "template evaluation needs a template and a test register".into(),
        ));
    }
    let template_texts: Vec<&str> = entries.iter().map(|e| e.text.as_str()).collect();
    let template_vectors: Vec<Vec<f64>> = embedder
        .embed_all(&template_texts)?
        .into_iter()
        .map(|e| e.vector)
        .collect();
    let test_vectors = embed_items(test_register, embedder, use_description)?;
    let rows = test_vectors
        .par_iter()
        .zip(test_register.par_iter())
        .map(|(q, item)| {
            let (i, score) = best_match_index(q, &template_vectors)?.expect("non-empty template");
            Ok(EvalRow {
                risk_id: item.risk_id.clone(),
                best_rank: entries[i].rank,
                score,
                true_positive: score >= label_threshold,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let chosen: BTreeSet<usize> = rows
        .iter()
        .filter(|r| r.true_positive)
        .map(|r| r.best_rank)
        .collect();
    let unused_entries: Vec<usize> = entries
        .iter()
        .map(|e| e.rank)
        .filter(|r| !chosen.contains(r))
        .collect();
    let tp = rows.iter().filter(|r| r.true_positive).count();
    Ok(TemplateEvaluation {
        counts: EvalCounts::from_counts(tp, rows.len() - tp, unused_entries.len()),
        label_threshold,
        rows,
        unused_entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Characteristic {
    All,
    ProjectType,
    SizeBand,
    DeliveryMethod,
    Jurisdiction,
}

impl Characteristic {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "all" => Some(Characteristic::All),
            "type" | "project_type" => Some(Characteristic::ProjectType),
            "size" | "size_band" => Some(Characteristic::SizeBand),
            "delivery" | "delivery_method" => Some(Characteristic::DeliveryMethod),
            "location" | "jurisdiction" => Some(Characteristic::Jurisdiction),
            _ => None,
        }
    }

    fn value(self, p: &ProjectRecord) -> Option<String> {
        match self {
            Characteristic::All => None,
            Characteristic::ProjectType => Some(p.project_type.clone()),
            Characteristic::SizeBand => Some(p.size_band.as_str().to_string()),
            Characteristic::DeliveryMethod => Some(p.delivery_method.clone()),
            Characteristic::Jurisdiction => Some(p.jurisdiction.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityEntry {
    pub test_project: String,
    pub characteristic: Characteristic,
    pub value: Option<String>,
    pub selected_projects: usize,
    pub baseline: EvalCounts,
    pub filtered: Option<EvalCounts>,
    pub delta_recall: Option<f64>,
    pub delta_precision: Option<f64>,
    pub delta_f1: Option<f64>,
    pub skipped: Option<String>,
}

fn delta(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a? - b?)
}

/// For each test project, compares a template built from the corpus
/// projects sharing its `characteristic` value with the all-projects
/// baseline.
pub fn sensitivity_run(
    corpus: &Corpus,
    test_projects: &[&ProjectRecord],
    characteristic: Characteristic,
    embedder: &Embedder,
    options: &TemplateOptions,
    label_threshold: f64,
) -> Result<Vec<SensitivityEntry>> {
    for t in test_projects {
        if corpus.project(&t.project_id).is_some() {
            return Err(Error::Validation(format!(
                "test project `{}` is also in the training corpus",
                t.project_id
            )));
        }
    }
    let all = FilterCriteria::default();
    let baseline_template = template_from_corpus(corpus, &all, embedder, None, options)?;
    let mut out = Vec::new();
    for test in test_projects {
        let register = &test.latest_snapshot().items;
        let baseline = evaluate_template(
            &baseline_template.entries,
            register,
            embedder,
            label_threshold,
            options.use_description,
        )?
        .counts;
        let value = characteristic.value(test);
        let mut filter = FilterCriteria::default();
        filter.set(characteristic, value.clone());
        let selected = filter_projects(corpus, &filter);
        let mut entry = SensitivityEntry {
            test_project: test.project_id.clone(),
            characteristic,
            value,
            selected_projects: selected.len(),
            baseline,
            filtered: None,
            delta_recall: None,
            delta_precision: None,
            delta_f1: None,
            skipped: None,
        };
        if selected.is_empty() {
            entry.skipped = Some("no corpus project matches this characteristic".into());
            out.push(entry);
            continue;
        }
        let template = template_from_projects(&selected, &filter, embedder, None, options)?;
        let counts = evaluate_template(
            &template.entries,
            register,
            embedder,
            label_threshold,
            options.use_description,
        )?
        .counts;
        entry.delta_recall = delta(counts.recall, baseline.recall);
        entry.delta_precision = delta(counts.precision, baseline.precision);
        entry.delta_f1 = delta(counts.f1, baseline.f1);
        entry.filtered = Some(counts);
        out.push(entry);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eval_counts_printed_rows() {
        let a = EvalCounts::from_counts(16, 19, 19);
        assert_abs_diff_eq!(a.recall.unwrap(), 0.457, epsilon = 5e-4);
        assert_abs_diff_eq!(a.precision.unwrap(), 0.457, epsilon = 5e-4);
        assert_abs_diff_eq!(a.f1.unwrap(), 0.457, epsilon = 5e-4);
        let d = EvalCounts::from_counts(12, 1, 18);
        assert_abs_diff_eq!(d.recall.unwrap(), 0.923, epsilon = 5e-4);
        assert_abs_diff_eq!(d.precision.unwrap(), 0.400, epsilon = 5e-4);
        assert_abs_diff_eq!(d.f1.unwrap(), 0.558, epsilon = 5e-4);
        let p = EvalCounts::from_counts(7, 0, 0);
        assert_eq!(
            (p.recall, p.precision, p.f1),
            (Some(1.0), Some(1.0), Some(1.0))
        );
        let z = EvalCounts::from_counts(0, 0, 0);
        assert_eq!(z.recall, None);
    }

    #[test]
    fn filter_parsing() {
        let f = FilterCriteria::parse("type=highway, size=over_1B,delivery=all").unwrap();
        assert_eq!(f.project_type.as_deref(), Some("highway"));
        assert_eq!(f.size_band.as_deref(), Some("over_1B"));
        assert_eq!(f.delivery_method, None);
        assert!(FilterCriteria::parse("").unwrap().is_empty());
        assert!(FilterCriteria::parse("colour=red").is_err());
        assert!(FilterCriteria::parse("type").is_err());
    }

    #[test]
    fn orthogonal_vectors_stay_apart() {
        let v = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        assert_eq!(
            group_vectors(&v, 0.7).unwrap(),
            vec![vec![0], vec![1], vec![2]]
        );
    }

    #[test]
    fn seed_only_membership() {
        // b is close to the seed a; c is close to b but not to a.
        let a = vec![1.0, 0.0];
        let b = vec![0.8, 0.6];
        let c = vec![0.0, 1.0];
        let groups = group_vectors(&[a, b, c], 0.7).unwrap();
        assert_eq!(groups, vec![vec![0, 1], vec![2]]);
    }

    fn item(id: &str, name: &str, bands: Option<(i64, i64, i64)>) -> RiskItem {
        let mut i = RiskItem::named(id, name);
        if let Some((p, c, s)) = bands {
            i.assessment.probability_band = Some(Band::new(p).unwrap());
            i.assessment.cost_band = Some(Band::new(c).unwrap());
            i.assessment.schedule_band = Some(Band::new(s).unwrap());
        }
        i
    }

    #[test]
    fn representative_is_most_frequent_text() {
        let mut items = Vec::new();
        for (n, text) in [
            (4, "utility relocation at overcrossings"),
            (3, "utility relocation may not happen on time"),
            (
                7,
                "construction impacts due to lack of right of way and timely utility relocation",
            ),
        ] {
            for k in 0..n {
                items.push(item(&format!("{text}-{k}"), text, None));
            }
        }
        let members: Vec<(&str, &RiskItem)> = items.iter().map(|i| ("p", i)).collect();
        let g = summarize_group(&members, 1).unwrap();
        assert_eq!(
            g.representative_text,
            "construction impacts due to lack of right of way and timely utility relocation"
        );
        assert_eq!(g.avg_cost_band, None);
    }

    #[test]
    fn representative_ties_and_averages() {
        let items = [
            item("1", "Zeta risk", Some((2, 4, 1))),
            item("2", "alpha risk", None),
            item("3", "ALPHA  risk", Some((4, 2, 3))),
            item("4", "zeta risk", None),
        ];
        let members: Vec<(&str, &RiskItem)> = vec![
            ("a", &items[0]),
            ("b", &items[1]),
            ("a", &items[2]),
            ("c", &items[3]),
        ];
        let g = summarize_group(&members, 4).unwrap();
        assert_eq!(g.representative_text, "alpha risk");
        assert_eq!(g.avg_probability_band, Some(3.0));
        assert_eq!(g.avg_cost_band, Some(3.0));
        assert_eq!(g.avg_schedule_band, Some(2.0));
        assert_abs_diff_eq!(g.prevalence, 0.75);
        assert_eq!(g.source_projects, ["a", "b", "c"]);
        assert_eq!(g.seed.risk_id, "1");
    }

    fn group(text: &str, prevalence: f64, cost: Option<f64>) -> RiskGroup {
        RiskGroup {
            seed: MemberRef {
                project_id: "p".into(),
                risk_id: text.into(),
            },
            members: vec![],
            representative_text: text.into(),
            prevalence,
            avg_probability_band: None,
            avg_cost_band: cost,
            avg_schedule_band: None,
            category: None,
            category_score: None,
            source_projects: vec![],
        }
    }

    #[test]
    fn sort_keys_rank_differently() {
        let groups = [
            group("common cheap", 0.9, Some(1.5)),
            group("rare costly", 0.2, Some(4.5)),
            group("middling", 0.5, Some(3.0)),
            group("unassessed", 0.95, None),
        ];
        let by_prev: Vec<_> = build_template(&groups, SortKey::Prevalence, 10)
            .unwrap()
            .into_iter()
            .map(|e| e.text)
            .collect();
        assert_eq!(
            by_prev,
            ["unassessed", "common cheap", "middling", "rare costly"]
        );
        let by_cost: Vec<_> = build_template(&groups, SortKey::Cost, 10)
            .unwrap()
            .into_iter()
            .map(|e| e.text)
            .collect();
        assert_eq!(
            by_cost,
            ["rare costly", "middling", "common cheap", "unassessed"]
        );
        let top = build_template(&groups, SortKey::Cost, 2).unwrap();
        assert_eq!(top.len(), 2);
        assert_eq!(top[1].rank, 2);
        assert!(build_template(&groups, SortKey::Cost, 0).is_err());
    }

    #[test]
    fn sort_ties_by_prevalence_then_text() {
        let groups = [
            group("b", 0.5, Some(2.0)),
            group("a", 0.5, Some(2.0)),
            group("c", 0.6, Some(2.0)),
        ];
        let order: Vec<_> = build_template(&groups, SortKey::Cost, 3)
            .unwrap()
            .into_iter()
            .map(|e| e.text)
            .collect();
        assert_eq!(order, ["c", "a", "b"]);
    }

    #[test]
    fn bundled_categories() {
        let c = CategorySet::bundled().unwrap();
        assert_eq!(c.len(), 10);
        assert_eq!(c.categories()[3].label, "right of way");
        let dup = r#"{"categories":[{"label":"a"},{"label":"a"}]}"#;
        assert!(CategorySet::from_json(dup.as_bytes()).is_err());
        assert!(CategorySet::from_json(br#"{"categories":[]}"#).is_err());
    }
}
