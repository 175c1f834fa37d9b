//! Canonical data model for projects, register snapshots and risk assessments,
//! plus the readers that turn register files and manifests into it.
//!
//! Registers arrive with raw values (probability as a fraction, cost impact in
//! millions of dollars, schedule impact in months). [`load_corpus`] maps those
//! onto 1-5 Likert bands with a [`ScaleConfig`] and derives High/Medium/Low
//! combined assessments from the configured risk matrix. Nothing is imputed:
//! a missing raw value leaves its band unset.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 1-5 Likert band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct Band(u8);

impl Band {
    pub const MIN: Band = Band(1);
    pub const MAX: Band = Band(5);

    pub fn new(value: i64) -> Result<Self> {
        if (1..=5).contains(&value) {
            Ok(Band(value as u8))
        } else {
            Err(Error::BandOutOfRange(value))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = Band> {
        (1..=5).map(Band)
    }
}

impl TryFrom<i64> for Band {
    type Error = Error;

    fn try_from(value: i64) -> Result<Self> {
        Band::new(value)
    }
}

impl From<Band> for u8 {
    fn from(band: Band) -> u8 {
        band.0
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Qualitative {
    High,
    Medium,
    Low,
    #[default]
    Unset,
}

impl Qualitative {
    pub fn is_set(self) -> bool {
        self != Qualitative::Unset
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Assessment {
    pub probability_band: Option<Band>,
    pub cost_band: Option<Band>,
    pub schedule_band: Option<Band>,
    pub qualitative_cost: Qualitative,
    pub qualitative_schedule: Qualitative,
    /// Fraction of certainty, 0-1.
    pub raw_probability: Option<f64>,
    /// Millions of dollars.
    pub raw_cost: Option<f64>,
    /// Months.
    pub raw_schedule: Option<f64>,
}

impl Assessment {
    pub fn has_raw(&self) -> bool {
        self.raw_probability.is_some() || self.raw_cost.is_some() || self.raw_schedule.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskItem {
    pub risk_id: String,
    pub name: String,
    pub description: Option<String>,
    pub category_label: Option<String>,
    pub assessment: Assessment,
    pub status_note: Option<String>,
}

impl RiskItem {
    /// Creates an item with only an id and a name; everything else unset.
    pub fn named(risk_id: impl Into<String>, name: impl Into<String>) -> Self {
        RiskItem {
            risk_id: risk_id.into(),
            name: name.into(),
            description: None,
            category_label: None,
            assessment: Assessment::default(),
            status_note: None,
        }
    }

    /// Text used for matching: the name, optionally followed by the description.
    pub fn match_text(&self, use_description: bool) -> String {
        match (&self.description, use_description) {
            (Some(d), true) if !d.trim().is_empty() => format!("{} {}", self.name, d),
            _ => self.name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterSnapshot {
    pub ordinal: u32,
    pub label: Option<String>,
    pub items: Vec<RiskItem>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SizeBand {
    #[serde(rename = "under_500M")]
    Under500M,
    #[serde(rename = "500M_to_1B")]
    From500MTo1B,
    #[serde(rename = "over_1B")]
    Over1B,
}

impl SizeBand {
    pub fn from_value_musd(value: f64) -> Self {
        if value < 500.0 {
            SizeBand::Under500M
        } else if value <= 1000.0 {
            SizeBand::From500MTo1B
        } else {
            SizeBand::Over1B
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SizeBand::Under500M => "under_500M",
            SizeBand::From500MTo1B => "500M_to_1B",
            SizeBand::Over1B => "over_1B",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "under_500M" => Some(SizeBand::Under500M),
            "500M_to_1B" => Some(SizeBand::From500MTo1B),
            "over_1B" => Some(SizeBand::Over1B),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectRecord {
    pub project_id: String,
    pub jurisdiction: String,
    pub delivery_method: String,
    pub project_type: String,
    pub size_band: SizeBand,
    pub contract_value_musd: Option<f64>,
    pub award_year: Option<i32>,
    pub snapshots: Vec<RegisterSnapshot>,
}

impl ProjectRecord {
    pub fn initial_snapshot(&self) -> Option<&RegisterSnapshot> {
        self.snapshots.iter().find(|s| s.ordinal == 0)
    }

    /// The most recent register version.
    pub fn latest_snapshot(&self) -> &RegisterSnapshot {
        self.snapshots
            .last()
            .expect("project records always hold at least one snapshot")
    }

    /// Checks the record invariants: at least one snapshot, strictly
    /// increasing ordinals, unique risk ids per snapshot, and a size band
    /// consistent with the contract value.
    pub fn validate(&self) -> Result<()> {
        let id = &self.project_id;
        if id.trim().is_empty() {
            return Err(Error::Validation("project id is empty".into()));
        }
        if self.snapshots.is_empty() {
            return Err(Error::Validation(format!(
                "project `{id}` has no registers"
            )));
        }
        for pair in self.snapshots.windows(2) {
            if pair[1].ordinal <= pair[0].ordinal {
                return Err(Error::Validation(format!(
                    "project `{id}`: register ordinals must be strictly increasing ({} then {})",
                    pair[0].ordinal, pair[1].ordinal
                )));
            }
        }
        if let Some(value) = self.contract_value_musd {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Validation(format!(
                    "project `{id}`: contract value must be positive, got {value}"
                )));
            }
            let expected = SizeBand::from_value_musd(value);
            if expected != self.size_band {
                return Err(Error::Validation(format!(
                    "project `{id}`: size band {} inconsistent with contract value {value} (expected {})",
                    self.size_band.as_str(),
                    expected.as_str()
                )));
            }
        }
        for snapshot in &self.snapshots {
            check_unique_ids(&snapshot.items)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub projects: Vec<ProjectRecord>,
    pub manifest_path: String,
}

impl Corpus {
    pub fn new(projects: Vec<ProjectRecord>, manifest_path: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for p in &projects {
            p.validate()?;
            if !seen.insert(p.project_id.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate project id `{}`",
                    p.project_id
                )));
            }
        }
        Ok(Corpus {
            projects,
            manifest_path: manifest_path.into(),
        })
    }

    pub fn project(&self, id: &str) -> Option<&ProjectRecord> {
        self.projects.iter().find(|p| p.project_id == id)
    }

    pub fn len(&self) -> usize {
        self.projects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projects.is_empty()
    }
}

/// Band edges and the probability x impact risk matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleConfig {
    pub probability_band_edges: [f64; 4],
    /// Fractions of the project contract value.
    pub cost_band_edges: [f64; 4],
    /// Months.
    pub schedule_band_edges: [f64; 4],
    /// Rows are probability bands 1-5, columns impact bands 1-5.
    pub risk_matrix: [[Qualitative; 5]; 5],
}

impl Default for ScaleConfig {
    fn default() -> Self {
        let mut risk_matrix = [[Qualitative::Low; 5]; 5];
        for (p, row) in risk_matrix.iter_mut().enumerate() {
            for (i, cell) in row.iter_mut().enumerate() {
                let product = (p + 1) * (i + 1);
                *cell = if product >= 15 {
                    Qualitative::High
                } else if product >= 6 {
                    Qualitative::Medium
                } else {
                    Qualitative::Low
                };
            }
        }
        ScaleConfig {
            probability_band_edges: [0.10, 0.30, 0.50, 0.70],
            cost_band_edges: [0.001, 0.005, 0.01, 0.05],
            schedule_band_edges: [1.0, 3.0, 6.0, 12.0],
            risk_matrix,
        }
    }
}

impl ScaleConfig {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let cfg: ScaleConfig =
            serde_json::from_slice(bytes).map_err(|e| Error::json("scale config", e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&bytes)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, edges) in [
            ("probability_band_edges", &self.probability_band_edges),
            ("cost_band_edges", &self.cost_band_edges),
            ("schedule_band_edges", &self.schedule_band_edges),
        ] {
            if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(format!(
                    "{name} must be finite and strictly ascending"
                )));
            }
        }
        let p = &self.probability_band_edges;
        if p[0] < 0.0 || p[3] > 1.0 {
            return Err(Error::Config(
                "probability_band_edges must lie in [0, 1]".into(),
            ));
        }
        if self.risk_matrix.iter().flatten().any(|q| !q.is_set()) {
            return Err(Error::Config(
                "risk_matrix must be High/Medium/Low everywhere".into(),
            ));
        }
        Ok(())
    }

    pub fn combined(&self, probability: Band, impact: Band) -> Qualitative {
        self.risk_matrix[usize::from(probability.get() - 1)][usize::from(impact.get() - 1)]
    }
}

/// Upper-inclusive banding: `(-inf, e1] -> 1`, `(e1, e2] -> 2`, ..., `(e4, inf) -> 5`.
fn band_for(value: f64, edges: &[f64; 4]) -> Band {
    let below = edges.iter().filter(|&&edge| value > edge).count();
    Band(below as u8 + 1)
}

/// Fills Likert bands from raw values and the combined qualitative levels
/// from the risk matrix. Existing bands are kept when no raw value backs them.
pub fn normalize_assessment(
    raw: &Assessment,
    project_value: f64,
    cfg: &ScaleConfig,
) -> Result<Assessment> {
    if !raw.has_raw() {
        return Err(Error::NothingToNormalize);
    }
    let mut out = raw.clone();
    if let Some(p) = raw.raw_probability {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Validation(format!("probability {p} outside [0, 1]")));
        }
        out.probability_band = Some(band_for(p, &cfg.probability_band_edges));
    }
    if let Some(cost) = raw.raw_cost {
        if !(project_value.is_finite() && project_value > 0.0) {
            return Err(Error::Validation(format!(
                "cost impact needs a positive project value, got {project_value}"
            )));
        }
        if !cost.is_finite() || cost < 0.0 {
            return Err(Error::Validation(format!(
                "cost impact {cost} must be non-negative"
            )));
        }
        out.cost_band = Some(band_for(cost / project_value, &cfg.cost_band_edges));
    }
    if let Some(months) = raw.raw_schedule {
        if !months.is_finite() || months < 0.0 {
            return Err(Error::Validation(format!(
                "schedule impact {months} must be non-negative"
            )));
        }
        out.schedule_band = Some(band_for(months, &cfg.schedule_band_edges));
    }
    if let Some(p) = out.probability_band {
        if let Some(c) = out.cost_band {
            out.qualitative_cost = cfg.combined(p, c);
        }
        if let Some(s) = out.schedule_band {
            out.qualitative_schedule = cfg.combined(p, s);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegisterFormat {
    Csv,
    Json,
}

impl RegisterFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(RegisterFormat::Csv),
            "json" => Some(RegisterFormat::Json),
            _ => None,
        }
    }
}

pub const REGISTER_COLUMNS: [&str; 9] = [
    "risk_id",
    "name",
    "description",
    "category",
    "probability",
    "cost_impact",
    "schedule_impact",
    "status",
    "snapshot",
];

#[derive(Debug, Default, Serialize, Deserialize)]
struct RegisterRecord {
    risk_id: String,
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cost_impact: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schedule_impact: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    status: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum JsonRegister {
    Items(Vec<RegisterRecord>),
    Document {
        #[serde(default)]
        label: Option<String>,
        items: Vec<RegisterRecord>,
    },
}

fn non_empty(s: Option<&str>) -> Option<String> {
    s.map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
}

fn parse_number(raw: Option<&str>, column: &str, row: usize) -> Result<Option<f64>> {
    let Some(text) = raw.map(str::trim).filter(|s| !s.is_empty()) else {
        return Ok(None);
    };
    let (digits, scale) = match text.strip_suffix('%') {
        Some(d) => (d.trim(), 0.01),
        None => (text, 1.0),
    };
    let value: f64 = digits.replace(',', "").parse().map_err(|_| Error::Parse {
        row,
        message: format!("column `{column}`: `{text}` is not a number"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            row,
            message: format!("column `{column}`: `{text}` is not finite"),
        });
    }
    Ok(Some(value * scale))
}

impl RegisterRecord {
    fn into_item(self, row: usize) -> Result<RiskItem> {
        let risk_id = self.risk_id.trim().to_string();
        if risk_id.is_empty() {
            return Err(Error::Parse {
                row,
                message: "empty risk_id".into(),
            });
        }
        let name = self.name.trim().to_string();
        if name.is_empty() {
            return Err(Error::Parse {
                row,
                message: format!("risk `{risk_id}` has an empty name"),
            });
        }
        Ok(RiskItem {
            risk_id,
            name,
            description: non_empty(self.description.as_deref()),
            category_label: non_empty(self.category.as_deref()),
            assessment: Assessment {
                raw_probability: self.probability,
                raw_cost: self.cost_impact,
                raw_schedule: self.schedule_impact,
                ..Assessment::default()
            },
            status_note: non_empty(self.status.as_deref()),
        })
    }
}

fn check_unique_ids(items: &[RiskItem]) -> Result<()> {
    let mut seen = HashSet::new();
    for item in items {
        if !seen.insert(item.risk_id.as_str()) {
            return Err(Error::DuplicateId(item.risk_id.clone()));
        }
    }
    Ok(())
}

fn parse_csv(bytes: &[u8]) -> Result<Vec<RiskItem>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(id_col), Some(name_col)) = (column("risk_id"), column("name")) else {
        return Err(Error::Parse {
            row: 1,
            message: "header must contain `risk_id` and `name`".into(),
        });
    };
    let cols = [
        column("description"),
        column("category"),
        column("probability"),
        column("cost_impact"),
        column("schedule_impact"),
        column("status"),
    ];

    let mut items = Vec::new();
    for (index, record) in reader.records().enumerate() {
        // header is row 1
        let row = index + 2;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        let field = |col: Option<usize>| col.and_then(|c| record.get(c));
        let rec = RegisterRecord {
            risk_id: record.get(id_col).unwrap_or_default().to_string(),
            name: record.get(name_col).unwrap_or_default().to_string(),
            description: field(cols[0]).map(str::to_string),
            category: field(cols[1]).map(str::to_string),
            probability: parse_number(field(cols[2]), "probability", row)?,
            cost_impact: parse_number(field(cols[3]), "cost_impact", row)?,
            schedule_impact: parse_number(field(cols[4]), "schedule_impact", row)?,
            status: field(cols[5]).map(str::to_string),
        };
        items.push(rec.into_item(row)?);
    }
    Ok(items)
}

/// Parses a register file. The returned snapshot has ordinal 0 and no label;
/// [`load_corpus`] fills both from the manifest.
pub fn parse_register(bytes: &[u8], format: RegisterFormat) -> Result<RegisterSnapshot> {
    std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        row: 0,
        message: format!("register is not valid UTF-8: {e}"),
    })?;
    let (label, items) = match format {
        RegisterFormat::Csv => (None, parse_csv(bytes)?),
        RegisterFormat::Json => {
            let doc: JsonRegister = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
                row: e.line(),
                message: e.to_string(),
            })?;
            let (label, records) = match doc {
                JsonRegister::Items(r) => (None, r),
                JsonRegister::Document { label, items } => (label, items),
            };
            let items = records
                .into_iter()
                .enumerate()
                .map(|(i, r)| r.into_item(i + 1))
                .collect::<Result<Vec<_>>>()?;
            (label, items)
        }
    };
    check_unique_ids(&items)?;
    Ok(RegisterSnapshot {
        ordinal: 0,
        label,
        items,
    })
}

/// Writes a snapshot back out in the register file format. Only raw values
/// are written; bands are recomputed on load.
pub fn serialize_register(snapshot: &RegisterSnapshot, format: RegisterFormat) -> Result<Vec<u8>> {
    let records = snapshot.items.iter().map(|item| RegisterRecord {
        risk_id: item.risk_id.clone(),
        name: item.name.clone(),
        description: item.description.clone(),
        category: item.category_label.clone(),
        probability: item.assessment.raw_probability,
        cost_impact: item.assessment.raw_cost,
        schedule_impact: item.assessment.raw_schedule,
        status: item.status_note.clone(),
    });
    match format {
        RegisterFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Validation(format!("csv write: {e}"));
            writer.write_record(REGISTER_COLUMNS).map_err(io)?;
            let num = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
            let ordinal = snapshot.ordinal.to_string();
            for r in records {
                writer
                    .write_record([
                        r.risk_id.as_str(),
                        r.name.as_str(),
                        r.description.as_deref().unwrap_or(""),
                        r.category.as_deref().unwrap_or(""),
                        &num(r.probability),
                        &num(r.cost_impact),
                        &num(r.schedule_impact),
                        r.status.as_deref().unwrap_or(""),
                        &ordinal,
                    ])
                    .map_err(io)?;
            }
            writer
                .into_inner()
                .map_err(|e| Error::Validation(format!("csv write: {e}")))
        }
        RegisterFormat::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                #[serde(skip_serializing_if = "Option::is_none")]
                label: Option<&'a str>,
                items: Vec<RegisterRecord>,
            }
            let doc = Doc {
                label: snapshot.label.as_deref(),
                items: records.collect(),
            };
            serde_json::to_vec_pretty(&doc).map_err(|e| Error::json("register", e))
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub projects: Vec<ManifestProject>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestProject {
    pub id: String,
    #[serde(default)]
    pub jurisdiction: String,
    #[serde(default)]
    pub delivery_method: String,
    #[serde(default)]
    pub project_type: String,
    #[serde(default)]
    pub size_band: Option<String>,
    #[serde(default)]
    pub contract_value_musd: Option<f64>,
    #[serde(default)]
    pub award_year: Option<i32>,
    #[serde(default)]
    pub registers: Vec<ManifestRegister>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestRegister {
    pub ordinal: u32,
    #[serde(default)]
    pub label: Option<String>,
    pub path: PathBuf,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_slice(&bytes).map_err(|e| Error::json(path.display().to_string(), e))
    }

    /// Every register path, resolved against the manifest directory.
    pub fn register_paths(&self, manifest_path: &Path) -> Vec<PathBuf> {
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        self.projects
            .iter()
            .flat_map(|p| p.registers.iter().map(|r| base.join(&r.path)))
            .collect()
    }
}

fn normalize_items(
    items: &mut [RiskItem],
    project_value: Option<f64>,
    cfg: &ScaleConfig,
) -> Result<()> {
    for item in items.iter_mut() {
        let raw = &item.assessment;
        if !raw.has_raw() {
            continue;
        }
        let mut raw = raw.clone();
        if project_value.is_none() && raw.raw_cost.is_some() {
            log::warn!(
                "risk `{}`: cost impact ignored, project has no contract value",
                item.risk_id
            );
            raw.raw_cost = None;
            if !raw.has_raw() {
                continue;
            }
        }
        item.assessment = normalize_assessment(&raw, project_value.unwrap_or(0.0), cfg)
            .map_err(|e| Error::Validation(format!("risk `{}`: {e}", item.risk_id)))?;
        // keep the raw cost even when it could not be banded
        item.assessment.raw_cost = item.assessment.raw_cost.or(raw.raw_cost);
    }
    Ok(())
}

/// Loads every project listed in a manifest, parsing and normalizing each
/// referenced register. Project order follows the manifest.
pub fn load_corpus(manifest_path: &Path, cfg: &ScaleConfig) -> Result<Corpus> {
    let manifest = Manifest::load(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut projects = Vec::with_capacity(manifest.projects.len());
    for entry in manifest.projects {
        let size_band = match (&entry.size_band, entry.contract_value_musd) {
            (Some(s), _) => SizeBand::parse(s).ok_or_else(|| {
                Error::Validation(format!("project `{}`: unknown size band `{s}`", entry.id))
            })?,
            (None, Some(v)) => SizeBand::from_value_musd(v),
            (None, None) => {
                return Err(Error::Validation(format!(
                    "project `{}` needs a size_band or contract_value_musd",
                    entry.id
                )))
            }
        };
        let mut snapshots = Vec::with_capacity(entry.registers.len());
        for reg in &entry.registers {
            let path = base.join(&reg.path);
            let format = RegisterFormat::from_path(&path).ok_or_else(|| {
                Error::Validation(format!("{}: unknown register format", path.display()))
            })?;
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let mut snapshot = parse_register(&bytes, format)
                .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
            normalize_items(&mut snapshot.items, entry.contract_value_musd, cfg)?;
            snapshot.ordinal = reg.ordinal;
            snapshot.label = reg.label.clone().or(snapshot.label);
            snapshots.push(snapshot);
        }
        projects.push(ProjectRecord {
            project_id: entry.id,
            jurisdiction: entry.jurisdiction,
            delivery_method: entry.delivery_method,
            project_type: entry.project_type,
            size_band,
            contract_value_musd: entry.contract_value_musd,
            award_year: entry.award_year,
            snapshots,
        });
    }
    Corpus::new(projects, manifest_path.display().to_string())
}
