mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "riskbench",
    version,
    about = "Risk-register similarity, templates, lifecycles and RBS coverage"
)]
pub struct Cli {
    /// Worker threads for parallel steps; output does not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Inputs {
    /// Project manifest (JSON).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Word vectors in text format (`<vocab> <dim>` header).
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Precomputed sentence vectors (JSONL); `--embeddings` becomes the fallback.
    #[arg(long)]
    pub sentence_embeddings: Option<PathBuf>,
    /// Stop-word list, one word per line.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Band edges and risk matrix (JSON).
    #[arg(long)]
    pub scales: Option<PathBuf>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Load and normalize a corpus, reporting what was read.
    Ingest(Inputs),
    #[command(subcommand)]
    Similarity(SimilarityCommand),
    #[command(subcommand)]
    Template(TemplateCommand),
    #[command(subcommand)]
    Lifecycle(LifecycleCommand),
    #[command(subcommand)]
    Rbs(RbsCommand),
}

#[derive(Args, Debug, Clone)]
pub struct SimilarityArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Project attribute to group pairs by.
    #[arg(long, value_enum)]
    pub group_by: Option<GroupBy>,
    /// Score threshold for evaluation-level similarity (repeatable).
    #[arg(long)]
    pub threshold: Vec<f64>,
    /// Match on name plus description instead of name only.
    #[arg(long)]
    pub use_description: bool,
    /// t-test variant for group comparisons.
    #[arg(long, value_enum, default_value_t = Variant::Welch)]
    pub variant: Variant,
    /// Also write the pair scores as a project-by-project CSV.
    #[arg(long)]
    pub heatmap: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum SimilarityCommand {
    /// TF-IDF similarity of whole registers.
    Docs(SimilarityArgs),
    /// Mean best-match similarity of risk items, per ordered project pair.
    Risks(SimilarityArgs),
    /// Each project's risks matched against all other projects' risks.
    Pooling(SimilarityArgs),
    /// Agreement of probability and impact assessments of matched risks.
    Evaluation(SimilarityArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
#[value(rename_all = "snake_case")]
pub enum GroupBy {
    DeliveryMethod,
    ProjectType,
    Jurisdiction,
    SizeBand,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Welch,
    Pooled,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Prevalence,
    Cost,
    Schedule,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharacteristicArg {
    All,
    Type,
    Size,
    Delivery,
    Location,
}

#[derive(Subcommand, Debug)]
pub enum TemplateCommand {
    /// Group similar risks of the selected projects into a ranked template.
    Build {
        #[command(flatten)]
        inputs: Inputs,
        /// e.g. `type=highway,size=over_1B,delivery=DBB,location=CA`
        #[arg(long, default_value = "")]
        filter: String,
        #[arg(long, value_enum, default_value_t = Sort::Prevalence)]
        sort: Sort,
        #[arg(long, default_value_t = 30)]
        top: usize,
        /// Cosine needed to join a group.
        #[arg(long, default_value_t = 0.7)]
        match_threshold: f64,
        #[arg(long)]
        use_description: bool,
        /// Category set (JSON); the bundled set when omitted.
        #[arg(long)]
        categories: Option<PathBuf>,
        /// Classify against category labels only, without descriptions.
        #[arg(long)]
        label_only: bool,
    },
    /// Score a template against a held-out register.
    Eval {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        template: PathBuf,
        #[arg(long)]
        register: PathBuf,
        /// Best-match score counted as a true positive.
        #[arg(long, default_value_t = 0.6)]
        label_threshold: f64,
        #[arg(long)]
        use_description: bool,
    },
    /// Compare filtered templates with the all-projects template on test projects.
    Sensitivity {
        #[command(flatten)]
        inputs: Inputs,
        /// Manifest of held-out test projects.
        #[arg(long)]
        test_manifest: PathBuf,
        #[arg(long, value_enum)]
        characteristic: CharacteristicArg,
        #[arg(long, value_enum, default_value_t = Sort::Prevalence)]
        sort: Sort,
        #[arg(long, default_value_t = 30)]
        top: usize,
        #[arg(long, default_value_t = 0.7)]
        match_threshold: f64,
        #[arg(long, default_value_t = 0.6)]
        label_threshold: f64,
    },
}

#[derive(Args, Debug, Clone)]
pub struct LifecycleInputs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Pre-tabulated `project_id,risk_id,snapshot,state` CSV instead of a manifest.
    #[arg(long)]
    pub states: Option<PathBuf>,
    /// State inference rules (JSON).
    #[arg(long)]
    pub rules: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum LifecycleCommand {
    /// Per-project and pooled identification performance ratios.
    Ratios(LifecycleInputs),
    /// Planner/doer and careful/excessive labels per project.
    Styles {
        #[command(flatten)]
        lifecycle: LifecycleInputs,
        /// Style thresholds (JSON `{"doer": 0.5, "careful": 0.5}`).
        #[arg(long)]
        thresholds: Option<PathBuf>,
    },
    /// Hotelling T² between doers and planners on outcome metrics.
    Compare {
        /// Report written by `lifecycle styles`.
        #[arg(long)]
        groups: PathBuf,
        /// CSV with `project_id` and one column per metric.
        #[arg(long)]
        outcomes: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "cost_growth,time_growth")]
        metric: Vec<String>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Project ids to leave out (repeatable).
        #[arg(long)]
        exclude: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum RbsCommand {
    /// Best RBS match of every risk, with coverage at a threshold.
    Coverage {
        #[command(flatten)]
        inputs: Inputs,
        /// RBS (JSON); the bundled structure when omitted.
        #[arg(long)]
        rbs: Option<PathBuf>,
        /// A single register instead of a manifest.
        #[arg(long)]
        register: Option<PathBuf>,
        #[arg(long, default_value_t = 0.6)]
        threshold: f64,
    },
    /// Pairwise co-occurrence of covered RBS items across projects.
    Cooccur {
        /// Report written by `rbs coverage`.
        #[arg(long)]
        coverage: PathBuf,
        /// CSV path (`item_a,item_b,count`); stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Errors caused by how the tool was invoked rather than by the inputs.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(2),
            };
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // library errors already embed their source in the message
            let mut message = String::new();
            for cause in e.chain() {
                let text = cause.to_string();
                if !message.contains(&text) {
                    if !message.is_empty() {
                        message.push_str(": ");
                    }
                    message.push_str(&text);
                }
            }
            eprintln!("error: {message}");
            if e.downcast_ref::<UsageError>().is_some() {
                eprintln!("\nFor more information, try '--help'.");
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
