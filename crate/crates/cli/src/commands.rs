use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use riskbench::corpus::{
    load_corpus, parse_register, Corpus, Manifest, RegisterFormat, ScaleConfig,
};
use riskbench::data;
use riskbench::lifecycle::{
    aggregate_ratios, classify_style, compute_ratios, hotelling_t2, parse_state_table, Activity,
    InferenceRules, ProjectObservations, ProjectRatios, StyleThresholds,
};
use riskbench::rbs::{corpus_coverage, coverage, CooccurrenceMatrix, CorpusCoverage, Rbs};
use riskbench::report::{emit_report, heatmap_csv, sha256_file, to_canonical_json, ReportBundle};
use riskbench::similarity::{
    document_similarity, evaluation_report, fit_documents, pooling_report, risk_level_report,
    EmbeddedCorpus, GroupKey, SimilarityReport, TTestVariant, EVALUATION_THRESHOLDS,
};
use riskbench::template::{
    evaluate_template, sensitivity_run, template_from_corpus, CategorySet, Characteristic,
    FilterCriteria, SortKey, TemplateEntry, TemplateOptions,
};
use riskbench::vectorize::{
    load_sentence_vectors, load_word_vectors, Embedder, EmbeddingBackend, StopWords,
};

use crate::{
    CharacteristicArg, Command, GroupBy, Inputs, LifecycleCommand, LifecycleInputs, RbsCommand,
    SimilarityArgs, SimilarityCommand, Sort, TemplateCommand, UsageError, Variant,
};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

/// Accumulates what a report needs besides its result: the command echo,
/// the effective configuration and digests of every input read.
struct Session {
    command: Vec<String>,
    config: BTreeMap<String, Value>,
    digests: BTreeMap<String, String>,
}

impl Session {
    fn new() -> Self {
        // output locations and the thread count are left out so reruns match
        let mut command = Vec::new();
        let mut args = std::env::args().skip(1);
        while let Some(a) = args.next() {
            match a.as_str() {
                "--out" | "--heatmap" | "--jobs" => {
                    args.next();
                }
                s if ["--out=", "--heatmap=", "--jobs="]
                    .iter()
                    .any(|p| s.starts_with(p)) => {}
                _ => command.push(a),
            }
        }
        Session {
            command,
            config: BTreeMap::new(),
            digests: BTreeMap::new(),
        }
    }

    fn set(&mut self, key: &str, value: impl Serialize) {
        self.config.insert(
            key.to_string(),
            serde_json::to_value(value).expect("config value serializes"),
        );
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        let digest = sha256_file(path)?;
        self.digests.insert(path.display().to_string(), digest);
        Ok(())
    }

    fn emit<R: Serialize>(self, result: &R, out: Option<&Path>) -> Result<()> {
        let mut bundle = ReportBundle::new(self.command, &self.config, result)?;
        bundle.input_digests = self.digests;
        match out {
            Some(path) => {
                emit_report(&bundle, path)?;
                log::info!("wrote {}", path.display());
            }
            None => std::io::stdout().write_all(to_canonical_json(&bundle)?.as_bytes())?,
        }
        Ok(())
    }
}

fn check_threshold(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(usage(format!("{name} must be within [0, 1], got {value}")));
    }
    Ok(())
}

fn scales(inputs: &Inputs, s: &mut Session) -> Result<ScaleConfig> {
    match &inputs.scales {
        Some(p) => {
            s.input(p)?;
            Ok(ScaleConfig::load(p)?)
        }
        None => Ok(ScaleConfig::default()),
    }
}

fn corpus(inputs: &Inputs, s: &mut Session) -> Result<Corpus> {
    let manifest = inputs
        .manifest
        .as_deref()
        .ok_or_else(|| usage("--manifest is required"))?;
    corpus_at(manifest, inputs, s)
}

fn corpus_at(manifest: &Path, inputs: &Inputs, s: &mut Session) -> Result<Corpus> {
    let cfg = scales(inputs, s)?;
    let corpus = load_corpus(manifest, &cfg)?;
    s.input(manifest)?;
    for p in Manifest::load(manifest)?.register_paths(manifest) {
        s.input(&p)?;
    }
    Ok(corpus)
}

fn stop_words(inputs: &Inputs, s: &mut Session) -> Result<StopWords> {
    match &inputs.stopwords {
        Some(p) => {
            s.input(p)?;
            Ok(StopWords::load(p)?)
        }
        None => Ok(StopWords::parse(&data::bundled(data::STOPWORDS_FILE)?)),
    }
}

fn embedder(inputs: &Inputs, s: &mut Session) -> Result<Embedder> {
    let stop = stop_words(inputs, s)?;
    let words = match &inputs.embeddings {
        Some(p) => {
            s.input(p)?;
            Some(load_word_vectors(p)?)
        }
        None => None,
    };
    let embedder = match (&inputs.sentence_embeddings, words) {
        (Some(p), words) => {
            s.input(p)?;
            let e = Embedder::new(load_sentence_vectors(p)?, stop);
            match words {
                Some(EmbeddingBackend::WordAverage(w)) => e.with_fallback(w)?,
                _ => e,
            }
        }
        (None, Some(w)) => Embedder::new(w, stop),
        (None, None) => return Err(usage("--embeddings or --sentence-embeddings is required")),
    };
    s.set("embedding_backend", embedder.backend().kind());
    Ok(embedder)
}

fn write_bytes(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(bytes)?),
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest(inputs) => ingest(inputs),
        Command::Similarity(c) => similarity(c),
        Command::Template(c) => template(c),
        Command::Lifecycle(c) => lifecycle(c),
        Command::Rbs(c) => rbs(c),
    }
}

fn ingest(inputs: Inputs) -> Result<()> {
    let mut s = Session::new();
    let corpus = corpus(&inputs, &mut s)?;
    let projects: Vec<Value> = corpus
        .projects
        .iter()
        .map(|p| {
            let items: usize = p.snapshots.iter().map(|r| r.items.len()).sum();
            let assessed: usize = p
                .snapshots
                .iter()
                .flat_map(|r| &r.items)
                .filter(|i| i.assessment.probability_band.is_some())
                .count();
            json!({
                "project_id": p.project_id,
                "project_type": p.project_type,
                "jurisdiction": p.jurisdiction,
                "delivery_method": p.delivery_method,
                "size_band": p.size_band.as_str(),
                "contract_value_musd": p.contract_value_musd,
                "snapshots": p.snapshots.len(),
                "latest_register_size": p.latest_snapshot().items.len(),
                "risk_rows": items,
                "assessed_rows": assessed,
            })
        })
        .collect();
    s.emit(
        &json!({ "project_count": corpus.len(), "projects": projects }),
        inputs.out.as_deref(),
    )
}

fn group_key(g: Option<GroupBy>) -> Option<GroupKey> {
    g.map(|g| match g {
        GroupBy::DeliveryMethod => GroupKey::DeliveryMethod,
        GroupBy::ProjectType => GroupKey::ProjectType,
        GroupBy::Jurisdiction => GroupKey::Jurisdiction,
        GroupBy::SizeBand => GroupKey::SizeBand,
    })
}

fn similarity(command: SimilarityCommand) -> Result<()> {
    let (level, args) = match command {
        SimilarityCommand::Docs(a) => ("docs", a),
        SimilarityCommand::Risks(a) => ("risks", a),
        SimilarityCommand::Pooling(a) => ("pooling", a),
        SimilarityCommand::Evaluation(a) => ("evaluation", a),
    };
    let SimilarityArgs {
        inputs,
        group_by,
        threshold,
        use_description,
        variant,
        heatmap,
    } = args;
    if heatmap.is_some() && !matches!(level, "docs" | "risks") {
        return Err(usage(
            "--heatmap applies to `similarity docs` and `similarity risks`",
        ));
    }
    for t in &threshold {
        check_threshold("--threshold", *t)?;
    }
    let mut s = Session::new();
    let key = group_key(group_by);
    let variant = match variant {
        Variant::Welch => TTestVariant::Welch,
        Variant::Pooled => TTestVariant::Pooled,
    };
    s.set("group_by", key);
    s.set("t_test", variant);
    let corpus = corpus(&inputs, &mut s)?;
    let report: SimilarityReport = match level {
        "docs" => {
            let stop = stop_words(&inputs, &mut s)?;
            let model = fit_documents(&corpus, &stop)?;
            document_similarity(&corpus, &model, &stop, key, variant)?
        }
        _ => {
            s.set("use_description", use_description);
            let embedder = embedder(&inputs, &mut s)?;
            let embedded = EmbeddedCorpus::new(&corpus, &embedder, use_description)?;
            match level {
                "risks" => risk_level_report(&embedded, key, variant)?,
                "pooling" => pooling_report(&embedded, key, variant)?,
                _ => {
                    let thresholds = if threshold.is_empty() {
                        EVALUATION_THRESHOLDS.to_vec()
                    } else {
                        threshold
                    };
                    s.set("thresholds", &thresholds);
                    evaluation_report(&embedded, key, &thresholds)?
                }
            }
        }
    };
    if let Some(path) = &heatmap {
        let ids: Vec<String> = corpus
            .projects
            .iter()
            .map(|p| p.project_id.clone())
            .collect();
        let csv = heatmap_csv(&ids, &report.pairs, level == "docs");
        write_bytes(&csv, Some(path))?;
    }
    s.emit(&report, inputs.out.as_deref())
}

fn sort_key(sort: Sort) -> SortKey {
    match sort {
        Sort::Prevalence => SortKey::Prevalence,
        Sort::Cost => SortKey::Cost,
        Sort::Schedule => SortKey::Schedule,
    }
}

fn read_register(path: &Path, s: &mut Session) -> Result<riskbench::corpus::RegisterSnapshot> {
    let format = RegisterFormat::from_path(path)
        .ok_or_else(|| usage(format!("{}: unknown register format", path.display())))?;
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    s.input(path)?;
    parse_register(&bytes, format).with_context(|| path.display().to_string())
}

/// Template entries from a `template build` report or a bare entry array.
fn read_template(path: &Path) -> Result<Vec<TemplateEntry>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| path.display().to_string())?;
    let entries = if v.is_array() {
        v
    } else if let Some(e) = v.pointer("/result/entries") {
        e.clone()
    } else if let Some(e) = v.get("entries") {
        e.clone()
    } else {
        bail!("{}: no template entries found", path.display());
    };
    serde_json::from_value(entries).with_context(|| path.display().to_string())
}

fn template(command: TemplateCommand) -> Result<()> {
    let mut s = Session::new();
    match command {
        TemplateCommand::Build {
            inputs,
            filter,
            sort,
            top,
            match_threshold,
            use_description,
            categories,
            label_only,
        } => {
            check_threshold("--match-threshold", match_threshold)?;
            if top == 0 {
                return Err(usage("--top must be positive"));
            }
            let criteria = FilterCriteria::parse(&filter).map_err(|e| usage(e.to_string()))?;
            let options = TemplateOptions {
                match_threshold,
                sort_key: sort_key(sort),
                top_n: top,
                use_description,
            };
            s.set("options", options);
            s.set("filter", &criteria);
            s.set("label_only", label_only);
            let corpus = corpus(&inputs, &mut s)?;
            let embedder = embedder(&inputs, &mut s)?;
            let cats = match &categories {
                Some(p) => {
                    s.input(p)?;
                    CategorySet::load(p)?
                }
                None => CategorySet::bundled()?,
            };
            let embedded = cats.embed(&embedder, label_only)?;
            let template =
                template_from_corpus(&corpus, &criteria, &embedder, Some(&embedded), &options)?;
            s.emit(&template, inputs.out.as_deref())
        }
        TemplateCommand::Eval {
            inputs,
            template,
            register,
            label_threshold,
            use_description,
        } => {
            check_threshold("--label-threshold", label_threshold)?;
            s.set("label_threshold", label_threshold);
            s.set("use_description", use_description);
            let entries = read_template(&template)?;
            s.input(&template)?;
            let snapshot = read_register(&register, &mut s)?;
            let embedder = embedder(&inputs, &mut s)?;
            let eval = evaluate_template(
                &entries,
                &snapshot.items,
                &embedder,
                label_threshold,
                use_description,
            )?;
            s.emit(&eval, inputs.out.as_deref())
        }
        TemplateCommand::Sensitivity {
            inputs,
            test_manifest,
            characteristic,
            sort,
            top,
            match_threshold,
            label_threshold,
        } => {
            check_threshold("--match-threshold", match_threshold)?;
            check_threshold("--label-threshold", label_threshold)?;
            if top == 0 {
                return Err(usage("--top must be positive"));
            }
            let characteristic = match characteristic {
                CharacteristicArg::All => Characteristic::All,
                CharacteristicArg::Type => Characteristic::ProjectType,
                CharacteristicArg::Size => Characteristic::SizeBand,
                CharacteristicArg::Delivery => Characteristic::DeliveryMethod,
                CharacteristicArg::Location => Characteristic::Jurisdiction,
            };
            let options = TemplateOptions {
                match_threshold,
                sort_key: sort_key(sort),
                top_n: top,
                use_description: false,
            };
            s.set("options", options);
            s.set("characteristic", characteristic);
            s.set("label_threshold", label_threshold);
            let corpus = corpus(&inputs, &mut s)?;
            let tests = corpus_at(&test_manifest, &inputs, &mut s)?;
            let embedder = embedder(&inputs, &mut s)?;
            let test_refs: Vec<_> = tests.projects.iter().collect();
            let entries = sensitivity_run(
                &corpus,
                &test_refs,
                characteristic,
                &embedder,
                &options,
                label_threshold,
            )?;
            s.emit(&entries, inputs.out.as_deref())
        }
    }
}

fn project_ratios(args: &LifecycleInputs, s: &mut Session) -> Result<Vec<ProjectRatios>> {
    let rules = match &args.rules {
        Some(p) => {
            s.input(p)?;
            let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_slice(&bytes).with_context(|| p.display().to_string())?
        }
        None => InferenceRules::default(),
    };
    s.set("inference_rules", &rules);
    let observations: Vec<(String, ProjectObservations)> =
        match (&args.states, &args.inputs.manifest) {
            (Some(_), Some(_)) => {
                return Err(usage("give either --states or --manifest, not both"))
            }
            (Some(p), None) => {
                let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
                s.input(p)?;
                parse_state_table(&bytes).with_context(|| p.display().to_string())?
            }
            (None, Some(_)) => corpus(&args.inputs, s)?
                .projects
                .iter()
                .map(|p| (p.project_id.clone(), ProjectObservations::from_project(p)))
                .collect(),
            (None, None) => return Err(usage("--manifest or --states is required")),
        };
    observations
        .iter()
        .map(|(id, obs)| {
            let lifecycles = obs
                .lifecycles(&rules)
                .with_context(|| format!("project `{id}`"))?;
            Ok(compute_ratios(id, &lifecycles)?)
        })
        .collect()
}

#[derive(Serialize)]
struct StyleRow {
    project_id: String,
    ratios: riskbench::lifecycle::RatioSet,
    style: Option<String>,
    activity: Option<Activity>,
    diligence: Option<riskbench::lifecycle::Diligence>,
    note: Option<String>,
}

fn lifecycle(command: LifecycleCommand) -> Result<()> {
    let mut s = Session::new();
    match command {
        LifecycleCommand::Ratios(args) => {
            let projects = project_ratios(&args, &mut s)?;
            let agg = aggregate_ratios(projects)?;
            s.emit(&agg, args.inputs.out.as_deref())
        }
        LifecycleCommand::Styles {
            lifecycle,
            thresholds,
        } => {
            let thresholds: StyleThresholds = match &thresholds {
                Some(p) => {
                    s.input(p)?;
                    let bytes =
                        std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
                    serde_json::from_slice(&bytes).with_context(|| p.display().to_string())?
                }
                None => StyleThresholds::default(),
            };
            check_threshold("doer threshold", thresholds.doer)?;
            check_threshold("careful threshold", thresholds.careful)?;
            s.set("thresholds", thresholds);
            let rows: Vec<StyleRow> = project_ratios(&lifecycle, &mut s)?
                .into_iter()
                .map(|p| {
                    let label = classify_style(&p.ratios, &thresholds);
                    StyleRow {
                        project_id: p.project_id,
                        ratios: p.ratios,
                        style: label.as_ref().ok().map(|l| l.to_string()),
                        activity: label.as_ref().ok().map(|l| l.activity),
                        diligence: label.as_ref().ok().map(|l| l.diligence),
                        note: label.err().map(|e| e.to_string()),
                    }
                })
                .collect();
            s.emit(
                &json!({ "projects": rows }),
                lifecycle.inputs.out.as_deref(),
            )
        }
        LifecycleCommand::Compare {
            groups,
            outcomes,
            metric,
            alpha,
            exclude,
            out,
        } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(usage("--alpha must be within (0, 1)"));
            }
            if metric.is_empty() {
                return Err(usage("--metric needs at least one column"));
            }
            s.set("metrics", &metric);
            s.set("alpha", alpha);
            s.set("exclude", &exclude);
            let text = std::fs::read_to_string(&groups)
                .with_context(|| format!("reading {}", groups.display()))?;
            s.input(&groups)?;
            let styles: Value =
                serde_json::from_str(&text).with_context(|| groups.display().to_string())?;
            let rows = styles
                .pointer("/result/projects")
                .or_else(|| styles.get("projects"))
                .and_then(Value::as_array)
                .ok_or_else(|| anyhow!("{}: no `projects` array", groups.display()))?;
            let mut activity: BTreeMap<String, String> = BTreeMap::new();
            for r in rows {
                if let (Some(id), Some(a)) = (r["project_id"].as_str(), r["activity"].as_str()) {
                    activity.insert(id.to_string(), a.to_string());
                }
            }
            s.input(&outcomes)?;
            let table = read_outcomes(&outcomes, &metric)?;
            let (mut doers, mut planners) = (Vec::new(), Vec::new());
            let (mut doer_ids, mut planner_ids) = (Vec::new(), Vec::new());
            for (id, values) in &table {
                if exclude.contains(id) {
                    continue;
                }
                match activity.get(id).map(String::as_str) {
                    Some("doer") => {
                        doers.push(values.clone());
                        doer_ids.push(id.clone());
                    }
                    Some("planner") => {
                        planners.push(values.clone());
                        planner_ids.push(id.clone());
                    }
                    _ => log::warn!("project `{id}` has no style label; left out"),
                }
            }
            let result = hotelling_t2(&doers, &planners, alpha)?;
            s.emit(
                &json!({ "doers": doer_ids, "planners": planner_ids, "hotelling": result }),
                out.as_deref(),
            )
        }
    }
}

/// `project_id` plus the requested metric columns, in file order.
fn read_outcomes(path: &PathBuf, metrics: &[String]) -> Result<Vec<(String, Vec<f64>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("{}: missing column `{name}`", path.display()))
    };
    let id_col = col("project_id")?;
    let cols = metrics.iter().map(|m| col(m)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: row {}", path.display(), i + 2))?;
        let values = cols
            .iter()
            .zip(metrics)
            .map(|(&c, m)| {
                rec.get(c).unwrap_or("").parse::<f64>().map_err(|_| {
                    anyhow!("{}: row {}: `{m}` is not a number", path.display(), i + 2)
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((rec.get(id_col).unwrap_or("").to_string(), values));
    }
    Ok(out)
}

fn rbs(command: RbsCommand) -> Result<()> {
    let mut s = Session::new();
    match command {
        RbsCommand::Coverage {
            inputs,
            rbs,
            register,
            threshold,
        } => {
            if !threshold.is_finite() || threshold < 0.0 {
                return Err(usage("--threshold must be a non-negative number"));
            }
            s.set("threshold", threshold);
            let structure = match &rbs {
                Some(p) => {
                    s.input(p)?;
                    riskbench::rbs::load_rbs(p)?
                }
                None => Rbs::bundled()?,
            };
            let report = match (&register, &inputs.manifest) {
                (Some(_), Some(_)) => {
                    return Err(usage("give either --register or --manifest, not both"))
                }
                (Some(path), None) => {
                    let snapshot = read_register(path, &mut s)?;
                    let embedder = embedder(&inputs, &mut s)?;
                    let mut r = coverage(
                        &structure.embed(&embedder)?,
                        &snapshot.items,
                        &embedder,
                        threshold,
                    )?;
                    r.project_id = path.file_stem().map(|n| n.to_string_lossy().into_owned());
                    CorpusCoverage {
                        threshold,
                        rbs_items: structure.items().map(|(_, i)| i.text.clone()).collect(),
                        coverage_fraction: r.coverage_fraction,
                        distribution: r.distribution.clone(),
                        projects: vec![r],
                    }
                }
                (None, Some(_)) => {
                    let corpus = corpus(&inputs, &mut s)?;
                    let embedder = embedder(&inputs, &mut s)?;
                    corpus_coverage(&structure, &corpus, &embedder, threshold)?
                }
                (None, None) => return Err(usage("--manifest or --register is required")),
            };
            s.emit(&report, inputs.out.as_deref())
        }
        RbsCommand::Cooccur { coverage, out } => {
            let text = std::fs::read_to_string(&coverage)
                .with_context(|| format!("reading {}", coverage.display()))?;
            let v: Value =
                serde_json::from_str(&text).with_context(|| coverage.display().to_string())?;
            let payload = v.get("result").cloned().unwrap_or(v);
            let cov: CorpusCoverage = serde_json::from_value(payload)
                .with_context(|| format!("{}: not a coverage report", coverage.display()))?;
            let matrix = CooccurrenceMatrix::from_reports(&cov.rbs_items, &cov.projects)?;
            write_bytes(&matrix.pairs_csv()?, out.as_deref())
        }
    }
}
