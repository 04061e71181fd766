//! Thin command-line layer over the library: `prepare` compiles seeds into
//! specifications and writes variant artifacts, `eval` scores a student
//! oracle on seeds or previously written variants. Oracle implementations
//! are chosen with small spec strings (`scripted:<path>`, `perfect`,
//! `remote:<url>[,<model>]`, ...), so the whole pipeline runs offline with
//! mocks or against a live endpoint with the same flags.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::datasets::{
    load_seeds, read_variants, write_generator_artifacts, write_progress, write_summary,
    write_variants, ArtifactManifest, DatasetError, DatasetFormat, GeneratorArtifact,
    ProgressRecord,
};
use crate::evalkit::{eval_dataset, EvalItem, EvalReport, ItemKind};
use crate::judging::select_hardest;
use crate::model::{
    normalize_answer, validate_config, Answer, AugmentationSummary, GenerationConfig, Mode,
    SeedProblem, VariantRecord,
};
use crate::oracles::mock::{
    AlwaysTrueJudge, ConstantStudent, FailingJudge, GarbageTeacher, LongestRanker,
    NoiseBlindJudge, PerfectJudge, ScriptedRanker, ScriptedStudent, ScriptedTeacher,
};
use crate::oracles::{
    HttpTransport, JudgeOracle, OracleEndpoint, OracleError, RankerOracle, RemoteJudge,
    RemoteRanker, RemoteStudent, RemoteTeacher, StudentOracle, TeacherOracle, Transport,
};
use crate::synthesis::augment_seed;

/// Command-line failures, each with a stable category and exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}", .0.join("\n"))]
    Config(Vec<String>),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Dataset(_) => "dataset",
            CliError::Oracle(_) => "oracle",
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Dataset(_) => 4,
            CliError::Oracle(_) => 5,
            CliError::Io(_) => 6,
        }
    }
}

/// Pipeline mode flag: equivalent, hardened, or hardened with per-seed
/// hardest-variant pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PipelineMode {
    #[value(name = "E")]
    E,
    #[value(name = "H")]
    H,
    #[value(name = "H-Pro")]
    HPro,
}

impl PipelineMode {
    pub fn label(self) -> &'static str {
        match self {
            PipelineMode::E => "E",
            PipelineMode::H => "H",
            PipelineMode::HPro => "H-Pro",
        }
    }

    fn inner(self) -> Mode {
        match self {
            PipelineMode::E => Mode::E,
            PipelineMode::H | PipelineMode::HPro => Mode::H,
        }
    }
}

/// Which items an evaluation run scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DatasetMode {
    #[value(name = "seed")]
    Seed,
    #[value(name = "augmented")]
    Augmented,
    #[value(name = "augmented-hard")]
    AugmentedHard,
}

#[derive(Debug, Parser)]
#[command(name = "vera", about = "Compile benchmark seeds into executable specifications, sample verified variants, and evaluate answering models", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Augment seed problems into verified variants and write artifacts.
    Prepare(PrepareArgs),
    /// Score a student oracle over seeds or augmented variants.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// Teacher oracle: scripted:<path>, garbage, or remote:<url>[,<model>].
    #[arg(long = "teacher_impl")]
    pub teacher_impl: String,
    /// Judge oracle: perfect, always-true, noise-blind:<eps>, failing, or
    /// remote:<url>[,<model>].
    #[arg(long = "judge_impl", default_value = "perfect")]
    pub judge_impl: String,
    /// Ranker oracle for H-Pro: longest, fixed:<variant_id>, or
    /// remote:<url>[,<model>].
    #[arg(long = "ranker_impl", default_value = "longest")]
    pub ranker_impl: String,
    /// Dataset name, resolved as a local path.
    #[arg(long = "dataset_name")]
    pub dataset_name: Option<String>,
    /// Dataset file path (takes precedence over --dataset_name).
    #[arg(long = "dataset_path")]
    pub dataset_path: Option<PathBuf>,
    /// Column mapping: aime, beyond-aime, amo-bench, or vera-jsonl.
    #[arg(long = "dataset_format", default_value = "aime")]
    pub dataset_format: String,
    #[arg(long = "variants_per_seed")]
    pub variants_per_seed: Option<u32>,
    #[arg(long = "prompt_attempt_limit")]
    pub prompt_attempt_limit: Option<u32>,
    #[arg(long = "samples_per_prompt")]
    pub samples_per_prompt: Option<u32>,
    #[arg(long = "judge_consistency_threshold")]
    pub judge_consistency_threshold: Option<u32>,
    /// Output JSONL with every accepted variant.
    #[arg(long = "out_augmented")]
    pub out_augmented: PathBuf,
    /// Output JSONL with the per-seed hardest selection (required for
    /// H-Pro).
    #[arg(long = "out_augmented_hard")]
    pub out_augmented_hard: Option<PathBuf>,
    /// Directory for per-generator specification artifacts.
    #[arg(long = "generators_dir")]
    pub generators_dir: Option<PathBuf>,
    /// Directory for per-seed progress snapshots.
    #[arg(long = "progress_dir")]
    pub progress_dir: Option<PathBuf>,
    /// Path for the run summary document.
    #[arg(long = "summary_json")]
    pub summary_json: Option<PathBuf>,
    #[arg(long = "mode", default_value = "E")]
    pub mode: PipelineMode,
    #[arg(long = "base_seed")]
    pub base_seed: Option<i64>,
    /// Seed-level parallelism; outputs are sorted by seed id so the byte
    /// output never depends on this.
    #[arg(long = "jobs", default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Student oracle: scripted:<path>, constant:<text>, or
    /// remote:<url>[,<model>].
    #[arg(long = "student_impl")]
    pub student_impl: String,
    #[arg(long = "dataset_mode", default_value = "seed")]
    pub dataset_mode: DatasetMode,
    /// Dataset name, resolved as a local path.
    #[arg(long = "dataset_name")]
    pub dataset_name: Option<String>,
    /// Dataset file path (takes precedence over --dataset_name).
    #[arg(long = "dataset_path")]
    pub dataset_path: Option<PathBuf>,
    /// Column mapping for seed datasets.
    #[arg(long = "dataset_format", default_value = "aime")]
    pub dataset_format: String,
    /// Inclusive year filter (seed datasets only).
    #[arg(long = "min_year")]
    pub min_year: Option<i32>,
    #[arg(long = "max_year")]
    pub max_year: Option<i32>,
    /// Independent attempts per item.
    #[arg(long = "runs", default_value_t = 5)]
    pub runs: u32,
    /// Absolute numeric tolerance for answer matching.
    #[arg(long = "tolerance", default_value_t = 1e-3)]
    pub tolerance: f64,
    /// Path for the evaluation report.
    #[arg(long = "report_json")]
    pub report_json: Option<PathBuf>,
}

fn remote_endpoint(rest: &str) -> Result<(OracleEndpoint, Arc<dyn Transport>), CliError> {
    let mut endpoint = OracleEndpoint::default();
    match rest.split_once(',') {
        Some((url, model)) => {
            endpoint.base_url = url.to_string();
            endpoint.model_name = model.to_string();
        }
        None => endpoint.base_url = rest.to_string(),
    }
    endpoint.validate()?;
    let transport: Arc<dyn Transport> = Arc::new(HttpTransport::new(4)?);
    Ok((endpoint, transport))
}

/// Build a teacher from its spec string.
pub fn make_teacher(spec: &str) -> Result<Box<dyn TeacherOracle>, CliError> {
    if spec == "garbage" {
        return Ok(Box::new(GarbageTeacher));
    }
    if let Some(path) = spec.strip_prefix("scripted:") {
        return Ok(Box::new(ScriptedTeacher::from_file(Path::new(path))?));
    }
    if let Some(rest) = spec.strip_prefix("remote:") {
        let (endpoint, transport) = remote_endpoint(rest)?;
        return Ok(Box::new(RemoteTeacher::new(endpoint, transport)));
    }
    Err(CliError::Usage(format!(
        "unknown teacher implementation '{spec}' (expected scripted:<path>, garbage, or remote:<url>[,<model>])"
    )))
}

/// Build a judge from its spec string.
pub fn make_judge(spec: &str) -> Result<Box<dyn JudgeOracle>, CliError> {
    match spec {
        "perfect" => return Ok(Box::new(PerfectJudge::new())),
        "always-true" => return Ok(Box::new(AlwaysTrueJudge)),
        "failing" => return Ok(Box::new(FailingJudge)),
        _ => {}
    }
    if let Some(eps) = spec.strip_prefix("noise-blind:") {
        let eps: f64 = eps.parse().map_err(|_| {
            CliError::Usage(format!("noise-blind epsilon '{eps}' is not a number"))
        })?;
        return Ok(Box::new(NoiseBlindJudge::new(eps)));
    }
    if let Some(rest) = spec.strip_prefix("remote:") {
        let (endpoint, transport) = remote_endpoint(rest)?;
        return Ok(Box::new(RemoteJudge::new(endpoint, transport)));
    }
    Err(CliError::Usage(format!(
        "unknown judge implementation '{spec}' (expected perfect, always-true, noise-blind:<eps>, failing, or remote:<url>[,<model>])"
    )))
}

/// Build a student from its spec string.
pub fn make_student(spec: &str) -> Result<Box<dyn StudentOracle>, CliError> {
    if let Some(path) = spec.strip_prefix("scripted:") {
        return Ok(Box::new(ScriptedStudent::from_file(Path::new(path))?));
    }
    if let Some(text) = spec.strip_prefix("constant:") {
        return Ok(Box::new(ConstantStudent::new(text)));
    }
    if let Some(rest) = spec.strip_prefix("remote:") {
        let (endpoint, transport) = remote_endpoint(rest)?;
        return Ok(Box::new(RemoteStudent::new(endpoint, transport)));
    }
    Err(CliError::Usage(format!(
        "unknown student implementation '{spec}' (expected scripted:<path>, constant:<text>, or remote:<url>[,<model>])"
    )))
}

/// Build a ranker from its spec string.
pub fn make_ranker(spec: &str) -> Result<Box<dyn RankerOracle>, CliError> {
    if spec == "longest" {
        return Ok(Box::new(LongestRanker));
    }
    if let Some(id) = spec.strip_prefix("fixed:") {
        return Ok(Box::new(ScriptedRanker::new(id)));
    }
    if let Some(rest) = spec.strip_prefix("remote:") {
        let (endpoint, transport) = remote_endpoint(rest)?;
        return Ok(Box::new(RemoteRanker::new(endpoint, transport)));
    }
    Err(CliError::Usage(format!(
        "unknown ranker implementation '{spec}' (expected longest, fixed:<variant_id>, or remote:<url>[,<model>])"
    )))
}

fn dataset_source(
    path: &Option<PathBuf>,
    name: &Option<String>,
) -> Result<PathBuf, CliError> {
    match (path, name) {
        (Some(path), _) => Ok(path.clone()),
        (None, Some(name)) => Ok(PathBuf::from(name)),
        (None, None) => Err(CliError::Usage(
            "one of --dataset_path or --dataset_name is required".to_string(),
        )),
    }
}

fn build_config(args: &PrepareArgs) -> GenerationConfig {
    let mut cfg = GenerationConfig::default();
    if let Some(v) = args.variants_per_seed {
        cfg.variants_per_seed = v;
    }
    if let Some(v) = args.prompt_attempt_limit {
        cfg.prompt_attempt_limit = v;
    }
    if let Some(v) = args.samples_per_prompt {
        cfg.samples_per_prompt = v;
    }
    if let Some(v) = args.judge_consistency_threshold {
        cfg.judge_consistency_threshold = v;
    }
    if let Some(v) = args.base_seed {
        cfg.base_seed = v;
    }
    cfg
}

/// One seed's augmentation output, kept together for deterministic sorting.
struct SeedRun {
    seed_id: String,
    variants: Vec<VariantRecord>,
    artifacts: Vec<GeneratorArtifact>,
    summary: AugmentationSummary,
}

fn augment_one(
    seed: &SeedProblem,
    cfg: &GenerationConfig,
    mode: Mode,
    teacher: &dyn TeacherOracle,
    judge: &dyn JudgeOracle,
) -> SeedRun {
    let (variants, artifacts, summary) = augment_seed(seed, cfg, mode, teacher, judge);
    SeedRun { seed_id: seed.id.clone(), variants, artifacts, summary }
}

fn run_seeds(
    seeds: &[SeedProblem],
    cfg: &GenerationConfig,
    mode: Mode,
    teacher: &dyn TeacherOracle,
    judge: &dyn JudgeOracle,
    jobs: usize,
) -> Vec<SeedRun> {
    let mut runs: Vec<SeedRun> = if jobs <= 1 || seeds.len() <= 1 {
        seeds.iter().map(|s| augment_one(s, cfg, mode, teacher, judge)).collect()
    } else {
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<SeedRun>>> =
            seeds.iter().map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..jobs.min(seeds.len()) {
                scope.spawn(|| loop {
                    let index = next.fetch_add(1, Ordering::Relaxed);
                    if index >= seeds.len() {
                        break;
                    }
                    let run = augment_one(&seeds[index], cfg, mode, teacher, judge);
                    *slots[index].lock().expect("slot poisoned") = Some(run);
                });
            }
        });
        slots
            .into_iter()
            .map(|slot| slot.into_inner().expect("slot poisoned").expect("worker filled slot"))
            .collect()
    };
    // Concurrency must never change bytes: order everything by seed id.
    runs.sort_by(|a, b| a.seed_id.cmp(&b.seed_id));
    runs
}

/// What `prepare` produced, for callers that drive it programmatically.
#[derive(Debug)]
pub struct PrepareOutcome {
    pub seeds: usize,
    pub variants_written: usize,
    pub hard_written: usize,
}

/// Run the full augmentation pipeline and write every requested artifact.
pub fn run_prepare(args: &PrepareArgs) -> Result<PrepareOutcome, CliError> {
    if args.mode == PipelineMode::HPro && args.out_augmented_hard.is_none() {
        return Err(CliError::Usage(
            "--mode H-Pro requires --out_augmented_hard".to_string(),
        ));
    }
    let cfg = build_config(args);
    let problems = validate_config(&cfg);
    if !problems.is_empty() {
        return Err(CliError::Config(problems));
    }
    let fmt = DatasetFormat::parse(&args.dataset_format)?;
    let source = dataset_source(&args.dataset_path, &args.dataset_name)?;
    let seeds = load_seeds(&source, fmt, None, None)?;

    let teacher = make_teacher(&args.teacher_impl)?;
    let judge = make_judge(&args.judge_impl)?;
    let ranker = make_ranker(&args.ranker_impl)?;

    let runs = run_seeds(&seeds, &cfg, args.mode.inner(), &*teacher, &*judge, args.jobs);

    let all_variants: Vec<VariantRecord> =
        runs.iter().flat_map(|r| r.variants.iter().cloned()).collect();
    write_variants(&args.out_augmented, &all_variants)?;

    let mut hard_written = 0;
    if let Some(hard_path) = &args.out_augmented_hard {
        let selection: Vec<VariantRecord> = runs
            .iter()
            .filter_map(|r| select_hardest(&r.variants, &*ranker))
            .collect();
        hard_written = selection.len();
        write_variants(hard_path, &selection)?;
    }

    if let Some(dir) = &args.generators_dir {
        let artifacts: Vec<GeneratorArtifact> =
            runs.iter().flat_map(|r| r.artifacts.iter().cloned()).collect();
        write_generator_artifacts(dir, &artifacts)?;
    }
    if let Some(dir) = &args.progress_dir {
        for run in &runs {
            write_progress(
                dir,
                &ProgressRecord {
                    seed_id: run.seed_id.clone(),
                    mode: args.mode.label().to_string(),
                    prompt_attempts: run.summary.total_prompt_attempts,
                    samples: run.summary.total_samples,
                    variants: run.summary.valid_variants,
                    failures: run.summary.failures.clone(),
                },
            )?;
        }
    }
    if let Some(path) = &args.summary_json {
        let artifacts: Vec<GeneratorArtifact> =
            runs.iter().flat_map(|r| r.artifacts.iter().cloned()).collect();
        let manifest = ArtifactManifest::new(&artifacts, &cfg);
        let summaries: Vec<AugmentationSummary> =
            runs.iter().map(|r| r.summary.clone()).collect();
        write_summary(path, &summaries, &manifest)?;
    }

    Ok(PrepareOutcome {
        seeds: seeds.len(),
        variants_written: all_variants.len(),
        hard_written,
    })
}

fn seed_gold(answer: &str) -> Answer {
    normalize_answer(answer).unwrap_or(Answer { text: answer.to_string(), numeric: None })
}

fn eval_items(args: &EvalArgs, source: &Path) -> Result<Vec<EvalItem>, CliError> {
    match args.dataset_mode {
        DatasetMode::Seed => {
            let fmt = DatasetFormat::parse(&args.dataset_format)?;
            let seeds = load_seeds(source, fmt, args.min_year, args.max_year)?;
            Ok(seeds
                .into_iter()
                .map(|seed| EvalItem {
                    item_id: seed.id,
                    kind: ItemKind::Seed,
                    question: seed.question,
                    gold: seed_gold(&seed.answer),
                    seed_id: None,
                })
                .collect())
        }
        DatasetMode::Augmented | DatasetMode::AugmentedHard => {
            let kind = if args.dataset_mode == DatasetMode::Augmented {
                ItemKind::Variant
            } else {
                ItemKind::VariantHard
            };
            let records = read_variants(source)?;
            Ok(records
                .into_iter()
                .map(|record| EvalItem {
                    item_id: record.variant_id(),
                    kind,
                    question: record.question_text.clone(),
                    gold: record.correct_answer.clone(),
                    seed_id: Some(record.seed_id.clone()),
                })
                .collect())
        }
    }
}

/// Run an evaluation and optionally write the report.
pub fn run_eval(args: &EvalArgs) -> Result<EvalReport, CliError> {
    if args.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".to_string()));
    }
    let source = dataset_source(&args.dataset_path, &args.dataset_name)?;
    let items = eval_items(args, &source)?;
    let student = make_student(&args.student_impl)?;
    let report = eval_dataset(
        &source.display().to_string(),
        &args.student_impl,
        &items,
        &*student,
        args.runs,
        args.tolerance,
    );
    if let Some(path) = &args.report_json {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let mut text = serde_json::to_string_pretty(&report).expect("reports serialize");
        text.push('\n');
        std::fs::write(path, text)?;
    }
    Ok(report)
}

/// Dispatch a parsed command line, printing a short outcome per action.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Prepare(args) => {
            let outcome = run_prepare(&args)?;
            println!(
                "prepared {} seeds: {} variants -> {}",
                outcome.seeds,
                outcome.variants_written,
                args.out_augmented.display()
            );
            if let Some(hard) = &args.out_augmented_hard {
                println!("paired hardest: {} -> {}", outcome.hard_written, hard.display());
            }
            Ok(())
        }
        Command::Eval(args) => {
            let report = run_eval(&args)?;
            println!(
                "evaluated {} items x {} runs: mean_avg_at_k {:.6}",
                report.items.len(),
                report.runs,
                report.aggregates.mean_avg_at_k
            );
            if let (Some(seed), Some(variant), Some(delta)) = (
                report.aggregates.seed_mean,
                report.aggregates.variant_mean,
                report.aggregates.delta,
            ) {
                println!("seed_mean {seed:.6} variant_mean {variant:.6} delta {delta:.6}");
            }
            if let Some(path) = &args.report_json {
                println!("report -> {}", path.display());
            }
            Ok(())
        }
    }
}
