//! Dataset adapters and artifact persistence: seed loaders for the
//! supported benchmark formats, JSONL variant files, per-generator artifact
//! files, per-seed progress snapshots, and the summary document with its
//! reproducibility manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{AugmentationSummary, ExecSpec, GenerationConfig, SeedProblem, VariantRecord};

/// Human-readable constant identifying the seeding scheme, recorded in every
/// manifest: instance streams are SHA-256 derived from
/// `(seed_id, generator_id, sample_index)`, XORed with the base seed, and
/// expanded through splitmix64 into xoshiro256** state.
pub const RNG_SCHEME: &str =
    "sha256(seed_id, generator_id, sample_index) xor base_seed -> splitmix64 -> xoshiro256**";

/// Errors from dataset loading and artifact IO.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("unknown dataset format '{0}'")]
    UnknownFormat(String),
    #[error("missing column: tried {}", .0.join(", "))]
    MissingColumn(Vec<String>),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("line {0}: {1}")]
    SchemaError(usize, String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Column-mapping presets for the supported seed datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetFormat {
    /// Columns `ID` / `Question` / `Answer`.
    Aime,
    /// Columns `ID` or `problem_id` / `problem` or `prompt` / `answer`.
    BeyondAime,
    /// Columns `question_id` or `id` / `prompt` or `question` / `solution`
    /// or `answer`.
    AmoBench,
    /// Variant JSONL written by this crate, read back as evaluation items.
    VeraJsonl,
}

impl DatasetFormat {
    /// Parse the format name used on the command line.
    pub fn parse(name: &str) -> Result<Self, DatasetError> {
        match name {
            "aime" => Ok(DatasetFormat::Aime),
            "beyond-aime" => Ok(DatasetFormat::BeyondAime),
            "amo-bench" => Ok(DatasetFormat::AmoBench),
            "vera-jsonl" => Ok(DatasetFormat::VeraJsonl),
            other => Err(DatasetError::UnknownFormat(other.to_string())),
        }
    }

    /// The command-line name.
    pub fn name(self) -> &'static str {
        match self {
            DatasetFormat::Aime => "aime",
            DatasetFormat::BeyondAime => "beyond-aime",
            DatasetFormat::AmoBench => "amo-bench",
            DatasetFormat::VeraJsonl => "vera-jsonl",
        }
    }

    fn id_aliases(self) -> &'static [&'static str] {
        match self {
            DatasetFormat::Aime => &["ID"],
            DatasetFormat::BeyondAime => &["ID", "problem_id"],
            DatasetFormat::AmoBench => &["question_id", "id"],
            DatasetFormat::VeraJsonl => &[],
        }
    }

    fn question_aliases(self) -> &'static [&'static str] {
        match self {
            DatasetFormat::Aime => &["Question"],
            DatasetFormat::BeyondAime => &["problem", "prompt"],
            DatasetFormat::AmoBench => &["prompt", "question"],
            DatasetFormat::VeraJsonl => &[],
        }
    }

    fn answer_aliases(self) -> &'static [&'static str] {
        match self {
            DatasetFormat::Aime => &["Answer"],
            DatasetFormat::BeyondAime => &["answer"],
            DatasetFormat::AmoBench => &["solution", "answer"],
            DatasetFormat::VeraJsonl => &[],
        }
    }
}

const YEAR_ALIASES: &[&str] = &["Year", "year"];

/// Year encoded as a leading four-digit prefix of the id ("2024-II-10"),
/// or 0 when the id carries none.
fn year_from_id(id: &str) -> i32 {
    let bytes = id.as_bytes();
    if bytes.len() >= 4
        && bytes[..4].iter().all(u8::is_ascii_digit)
        && !bytes.get(4).is_some_and(u8::is_ascii_digit)
    {
        id[..4].parse().unwrap_or(0)
    } else {
        0
    }
}

fn value_to_text(value: &serde_json::Value) -> Option<String> {
    match value {
        serde_json::Value::Null => None,
        serde_json::Value::String(s) => Some(s.clone()),
        other => Some(other.to_string()),
    }
}

fn pick(row: &BTreeMap<String, String>, aliases: &[&str]) -> Result<String, DatasetError> {
    aliases
        .iter()
        .find_map(|alias| row.get(*alias))
        .map(|v| v.trim().to_string())
        .ok_or_else(|| {
            DatasetError::MissingColumn(aliases.iter().map(|a| a.to_string()).collect())
        })
}

fn row_to_seed(fmt: DatasetFormat, row: &BTreeMap<String, String>) -> Result<SeedProblem, DatasetError> {
    let id = pick(row, fmt.id_aliases())?;
    let question = pick(row, fmt.question_aliases())?;
    let answer = pick(row, fmt.answer_aliases())?;
    let year = match pick(row, YEAR_ALIASES) {
        Ok(text) => text.parse().unwrap_or_else(|_| year_from_id(&id)),
        Err(_) => year_from_id(&id),
    };
    Ok(SeedProblem { id, year, question, answer })
}

fn rows_from_csv(path: &Path) -> Result<Vec<BTreeMap<String, String>>, DatasetError> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    let headers = reader.headers().map_err(csv_error)?.clone();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let row = headers
            .iter()
            .zip(record.iter())
            .map(|(h, v)| (h.to_string(), v.to_string()))
            .collect();
        rows.push(row);
    }
    Ok(rows)
}

fn csv_error(err: csv::Error) -> DatasetError {
    let line = err.position().map(|p| p.line() as usize).unwrap_or(0);
    DatasetError::SchemaError(line, err.to_string())
}

fn rows_from_jsonl(path: &Path) -> Result<Vec<BTreeMap<String, String>>, DatasetError> {
    let contents = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (index, line) in contents.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let object: BTreeMap<String, serde_json::Value> = serde_json::from_str(line)
            .map_err(|e| DatasetError::SchemaError(index + 1, e.to_string()))?;
        let row = object
            .iter()
            .filter_map(|(k, v)| value_to_text(v).map(|text| (k.clone(), text)))
            .collect();
        rows.push(row);
    }
    Ok(rows)
}

/// Load seed problems from a CSV or JSONL file, mapping columns through the
/// format's aliases (first present alias wins) and applying the inclusive
/// year filter. Row order is preserved. An empty result is an error.
pub fn load_seeds(
    path: impl AsRef<Path>,
    fmt: DatasetFormat,
    min_year: Option<i32>,
    max_year: Option<i32>,
) -> Result<Vec<SeedProblem>, DatasetError> {
    let path = path.as_ref();
    let seeds: Vec<SeedProblem> = if fmt == DatasetFormat::VeraJsonl {
        read_variants(path)?
            .iter()
            .map(|record| SeedProblem {
                id: record.variant_id(),
                year: 0,
                question: record.question_text.clone(),
                answer: record.correct_answer.text.clone(),
            })
            .collect()
    } else {
        let is_csv = path.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("csv"));
        let rows = if is_csv { rows_from_csv(path)? } else { rows_from_jsonl(path)? };
        rows.iter().map(|row| row_to_seed(fmt, row)).collect::<Result<_, _>>()?
    };
    let filtered: Vec<SeedProblem> = seeds
        .into_iter()
        .filter(|seed| {
            min_year.is_none_or(|min| seed.year >= min)
                && max_year.is_none_or(|max| seed.year <= max)
        })
        .collect();
    if filtered.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    Ok(filtered)
}

/// Write variant records as JSONL: one canonical-order JSON object per
/// line, UTF-8, reals rendered shortest-round-trip. Parent directories are
/// created.
pub fn write_variants(path: impl AsRef<Path>, records: &[VariantRecord]) -> Result<(), DatasetError> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("variant records serialize"));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Exact inverse of [`write_variants`]; a malformed line reports its
/// 1-based line number.
pub fn read_variants(path: impl AsRef<Path>) -> Result<Vec<VariantRecord>, DatasetError> {
    let contents = fs::read_to_string(path.as_ref())?;
    contents
        .lines()
        .enumerate()
        .map(|(index, line)| {
            serde_json::from_str(line)
                .map_err(|e: serde_json::Error| DatasetError::SchemaError(index + 1, e.to_string()))
        })
        .collect()
}

/// Hex SHA-256 of a spec's canonical serialization: fixed field order,
/// sorted map keys, no insignificant whitespace, UTF-8.
pub fn spec_hash(spec: &ExecSpec) -> String {
    let canonical = serde_json::to_string(spec).expect("specs serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// One compiled specification persisted for audit and replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorArtifact {
    pub generator_id: String,
    pub spec: ExecSpec,
    /// Hash of `spec`'s canonical serialization at creation time.
    pub spec_hash: String,
}

impl GeneratorArtifact {
    pub fn new(generator_id: &str, spec: ExecSpec) -> Self {
        let spec_hash = spec_hash(&spec);
        GeneratorArtifact { generator_id: generator_id.to_string(), spec, spec_hash }
    }
}

/// Reproducibility manifest embedded in the summary document. Everything
/// except `created_at` is a pure function of the run's inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactManifest {
    /// generator_id → hex SHA-256 of the spec's canonical serialization.
    pub spec_hashes: BTreeMap<String, String>,
    pub rng_scheme: String,
    pub config_hash: String,
    /// RFC 3339 UTC timestamp; never part of any hash input.
    pub created_at: String,
}

impl ArtifactManifest {
    pub fn new(artifacts: &[GeneratorArtifact], cfg: &GenerationConfig) -> Self {
        let spec_hashes = artifacts
            .iter()
            .map(|a| (a.generator_id.clone(), a.spec_hash.clone()))
            .collect();
        let canonical_cfg = serde_json::to_string(cfg).expect("configs serialize");
        ArtifactManifest {
            spec_hashes,
            rng_scheme: RNG_SCHEME.to_string(),
            config_hash: hex::encode(Sha256::digest(canonical_cfg.as_bytes())),
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

/// Filesystem-safe stem for ids that may contain separators.
fn safe_stem(id: &str) -> String {
    id.chars().map(|c| if matches!(c, '/' | '\\' | ':') { '_' } else { c }).collect()
}

fn write_json_doc<T: Serialize>(path: &Path, doc: &T) -> Result<(), DatasetError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut text = serde_json::to_string_pretty(doc).expect("documents serialize");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn read_json_doc<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, DatasetError> {
    let contents = fs::read_to_string(path)?;
    serde_json::from_str(&contents)
        .map_err(|e: serde_json::Error| DatasetError::SchemaError(e.line(), e.to_string()))
}

/// Write one artifact file per generator under `dir`, named
/// `<generator_id>.json`. Returns the paths written, in input order.
pub fn write_generator_artifacts(
    dir: impl AsRef<Path>,
    artifacts: &[GeneratorArtifact],
) -> Result<Vec<PathBuf>, DatasetError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for artifact in artifacts {
        let path = dir.join(format!("{}.json", safe_stem(&artifact.generator_id)));
        write_json_doc(&path, artifact)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Read one artifact file back.
pub fn read_generator_artifact(path: impl AsRef<Path>) -> Result<GeneratorArtifact, DatasetError> {
    read_json_doc(path.as_ref())
}

/// Per-seed progress snapshot written as augmentation finishes a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressRecord {
    pub seed_id: String,
    /// Pipeline mode label: "E", "H", or "H-Pro".
    pub mode: String,
    pub prompt_attempts: u32,
    pub samples: u32,
    pub variants: u32,
    pub failures: Vec<String>,
}

/// Write one progress file per seed under `dir`, named `<seed_id>.json`.
pub fn write_progress(dir: impl AsRef<Path>, record: &ProgressRecord) -> Result<PathBuf, DatasetError> {
    let path = dir.as_ref().join(format!("{}.json", safe_stem(&record.seed_id)));
    write_json_doc(&path, record)?;
    Ok(path)
}

/// The single summary document: per-seed accounting plus the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDocument {
    pub summaries: Vec<AugmentationSummary>,
    pub manifest: ArtifactManifest,
}

/// Write the summary document. Key order is deterministic and the
/// timestamp lives only in `manifest.created_at`, so reruns with identical
/// inputs differ in that one value alone.
pub fn write_summary(
    path: impl AsRef<Path>,
    summaries: &[AugmentationSummary],
    manifest: &ArtifactManifest,
) -> Result<(), DatasetError> {
    let doc = SummaryDocument { summaries: summaries.to_vec(), manifest: manifest.clone() };
    write_json_doc(path.as_ref(), &doc)
}

/// Read a summary document back.
pub fn read_summary(path: impl AsRef<Path>) -> Result<SummaryDocument, DatasetError> {
    read_json_doc(path.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Answer, Assignment, Mode, Rational, SlotValue};
    use std::collections::BTreeMap;

    fn sample_spec() -> ExecSpec {
        ExecSpec {
            seed_id: "aime-2024-II-10".to_string(),
            mode: Mode::E,
            template: "Compute {a} + {b}.".to_string(),
            carriers: vec!["Compute {a} + {b}.".to_string()],
            slots: Vec::new(),
            generator_src: "def generator(rng):\n    return {'a': 1, 'b': 2}".to_string(),
            verifier_src: "def verifier(assign):\n    return True, 3".to_string(),
            base_assignment: None,
            hardness_rationale: "r".to_string(),
            notes: None,
            meta: BTreeMap::new(),
        }
    }

    fn sample_record(index: u32) -> VariantRecord {
        let mut assignment = Assignment::new();
        assignment.insert("a", SlotValue::Int(7));
        assignment.insert("r", SlotValue::Rational(Rational::new(1, 3).unwrap()));
        assignment.insert("x", SlotValue::Real(0.1));
        VariantRecord {
            seed_id: "aime-2024-II-10".to_string(),
            generator_id: "aime-2024-II-10_prompt1".to_string(),
            prompt_attempt: 1,
            sample_index: index,
            assignment,
            question_text: "Compute 7 + 1/3.".to_string(),
            correct_answer: Answer::from_real(22.0 / 3.0),
            generator_attempts: 1,
            generator_elapsed_sec: 0.0123,
            judge_trials: Vec::new(),
            judge_consistent: true,
            judge_successes: 0,
            noise_answers: vec![Answer::from_int(8)],
            perturbation: Some(0.25),
            metadata: BTreeMap::from([("mode".to_string(), "E".to_string())]),
        }
    }

    #[test]
    fn aime_rows_map_directly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seeds.csv");
        fs::write(
            &path,
            "ID,Question,Answer\n2024-II-10,Find the rhombus thing.,468\n2023-I-1,Count stuff.,55\n",
        )
        .unwrap();
        let seeds = load_seeds(&path, DatasetFormat::Aime, None, None).unwrap();
        assert_eq!(seeds.len(), 2);
        assert_eq!(seeds[0].id, "2024-II-10");
        assert_eq!(seeds[0].year, 2024);
        assert_eq!(seeds[0].question, "Find the rhombus thing.");
        assert_eq!(seeds[0].answer, "468");
        assert_eq!(seeds[1].year, 2023);
    }

    #[test]
    fn alias_fallbacks_cover_the_other_formats() {
        let dir = tempfile::tempdir().unwrap();
        let beyond = dir.path().join("beyond.jsonl");
        fs::write(
            &beyond,
            "{\"problem_id\": \"b-1\", \"prompt\": \"Hard one.\", \"answer\": 97}\n",
        )
        .unwrap();
        let seeds = load_seeds(&beyond, DatasetFormat::BeyondAime, None, None).unwrap();
        assert_eq!(seeds[0].id, "b-1");
        assert_eq!(seeds[0].question, "Hard one.");
        assert_eq!(seeds[0].answer, "97");
        assert_eq!(seeds[0].year, 0);

        let amo = dir.path().join("amo.jsonl");
        fs::write(
            &amo,
            "{\"question_id\": \"amo-3\", \"prompt\": \"Olympiad.\", \"solution\": \"1/2\", \"year\": 2025}\n",
        )
        .unwrap();
        let seeds = load_seeds(&amo, DatasetFormat::AmoBench, None, None).unwrap();
        assert_eq!(seeds[0].id, "amo-3");
        assert_eq!(seeds[0].answer, "1/2");
        assert_eq!(seeds[0].year, 2025);
    }

    #[test]
    fn unknown_formats_are_rejected() {
        let err = DatasetFormat::parse("csv2").unwrap_err();
        assert!(matches!(err, DatasetError::UnknownFormat(name) if name == "csv2"));
        for name in ["aime", "beyond-aime", "amo-bench", "vera-jsonl"] {
            assert_eq!(DatasetFormat::parse(name).unwrap().name(), name);
        }
    }

    #[test]
    fn missing_columns_list_the_tried_aliases() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.jsonl");
        fs::write(&path, "{\"prompt\": \"No id here.\", \"solution\": \"5\"}\n").unwrap();
        let err = load_seeds(&path, DatasetFormat::AmoBench, None, None).unwrap_err();
        match err {
            DatasetError::MissingColumn(tried) => assert_eq!(tried, vec!["question_id", "id"]),
            other => panic!("expected MissingColumn, got {other:?}"),
        }
    }

    #[test]
    fn year_filters_are_inclusive() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("years.csv");
        fs::write(
            &path,
            "ID,Question,Answer\n2023-I-1,q1,1\n2024-I-1,q2,2\n2025-I-1,q3,3\n",
        )
        .unwrap();
        let only_2024 = load_seeds(&path, DatasetFormat::Aime, Some(2024), Some(2024)).unwrap();
        assert_eq!(only_2024.len(), 1);
        assert_eq!(only_2024[0].id, "2024-I-1");
        let from_2024 = load_seeds(&path, DatasetFormat::Aime, Some(2024), None).unwrap();
        assert_eq!(from_2024.len(), 2);
        let to_2024 = load_seeds(&path, DatasetFormat::Aime, None, Some(2024)).unwrap();
        assert_eq!(to_2024.len(), 2);
        let none = load_seeds(&path, DatasetFormat::Aime, Some(2030), None).unwrap_err();
        assert!(matches!(none, DatasetError::EmptyDataset));
    }

    #[test]
    fn year_prefixes_only_count_when_delimited() {
        assert_eq!(year_from_id("2024-II-10"), 2024);
        assert_eq!(year_from_id("1983"), 1983);
        assert_eq!(year_from_id("123456"), 0);
        assert_eq!(year_from_id("b-1"), 0);
        assert_eq!(year_from_id(""), 0);
    }

    #[test]
    fn variant_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep/nested/variants.jsonl");
        let records: Vec<VariantRecord> = (1..=3).map(sample_record).collect();
        write_variants(&path, &records).unwrap();
        assert_eq!(read_variants(&path).unwrap(), records);

        let empty = dir.path().join("empty.jsonl");
        write_variants(&empty, &[]).unwrap();
        assert_eq!(fs::read_to_string(&empty).unwrap(), "");
        assert_eq!(read_variants(&empty).unwrap(), Vec::new());
    }

    #[test]
    fn malformed_lines_name_their_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("variants.jsonl");
        let records: Vec<VariantRecord> = (1..=3).map(sample_record).collect();
        write_variants(&path, &records).unwrap();
        let mut lines: Vec<String> =
            fs::read_to_string(&path).unwrap().lines().map(String::from).collect();
        lines[1] = "not json at all".to_string();
        fs::write(&path, lines.join("\n") + "\n").unwrap();
        match read_variants(&path).unwrap_err() {
            DatasetError::SchemaError(line, _) => assert_eq!(line, 2),
            other => panic!("expected SchemaError, got {other:?}"),
        }
    }

    #[test]
    fn vera_jsonl_reads_variants_back_as_items() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("variants.jsonl");
        let records: Vec<VariantRecord> = (1..=3).map(sample_record).collect();
        write_variants(&path, &records).unwrap();
        let seeds = load_seeds(&path, DatasetFormat::VeraJsonl, None, None).unwrap();
        assert_eq!(seeds.len(), 3);
        assert_eq!(seeds[0].id, "aime-2024-II-10/aime-2024-II-10_prompt1/1");
        assert_eq!(seeds[0].question, "Compute 7 + 1/3.");
        assert_eq!(seeds[0].answer, records[0].correct_answer.text);
    }

    #[test]
    fn spec_hashes_track_canonical_serialization() {
        let spec = sample_spec();
        let artifact = GeneratorArtifact::new("g1", spec.clone());
        assert_eq!(artifact.spec_hash.len(), 64);
        assert!(artifact.spec_hash.chars().all(|c| c.is_ascii_hexdigit()));
        assert_eq!(artifact.spec_hash, spec_hash(&spec), "hashing is pure");

        let mut changed = spec.clone();
        changed.template = "Compute {a} * {b}.".to_string();
        assert_ne!(spec_hash(&changed), artifact.spec_hash);
    }

    #[test]
    fn manifests_cover_every_artifact_and_ignore_time() {
        let artifacts =
            vec![GeneratorArtifact::new("g1", sample_spec()), GeneratorArtifact::new("g2", sample_spec())];
        let cfg = GenerationConfig::default();
        let manifest = ArtifactManifest::new(&artifacts, &cfg);
        assert_eq!(manifest.spec_hashes.len(), 2);
        assert_eq!(manifest.spec_hashes["g1"], artifacts[0].spec_hash);
        assert_eq!(manifest.rng_scheme, RNG_SCHEME);

        let again = ArtifactManifest::new(&artifacts, &cfg);
        assert_eq!(again.spec_hashes, manifest.spec_hashes);
        assert_eq!(again.config_hash, manifest.config_hash);

        let other_cfg = GenerationConfig { base_seed: 7, ..Default::default() };
        assert_ne!(ArtifactManifest::new(&artifacts, &other_cfg).config_hash, manifest.config_hash);
    }

    #[test]
    fn summaries_rerun_byte_identical_except_created_at() {
        let dir = tempfile::tempdir().unwrap();
        let summaries = vec![AugmentationSummary {
            seed_id: "s1".to_string(),
            total_prompt_attempts: 20,
            total_samples: 0,
            valid_variants: 5,
            failures: vec!["parse".to_string(); 3],
        }];
        let artifacts = vec![GeneratorArtifact::new("g1", sample_spec())];
        let cfg = GenerationConfig::default();

        let strip_time = |text: &str| -> String {
            text.lines().filter(|l| !l.contains("created_at")).collect::<Vec<_>>().join("\n")
        };
        let first = dir.path().join("one.json");
        let second = dir.path().join("two.json");
        let mut manifest = ArtifactManifest::new(&artifacts, &cfg);
        write_summary(&first, &summaries, &manifest).unwrap();
        manifest.created_at = "2001-01-01T00:00:00Z".to_string();
        write_summary(&second, &summaries, &manifest).unwrap();
        assert_eq!(
            strip_time(&fs::read_to_string(&first).unwrap()),
            strip_time(&fs::read_to_string(&second).unwrap())
        );

        let doc = read_summary(&first).unwrap();
        assert_eq!(doc.summaries, summaries);
        assert_eq!(doc.summaries[0].failures.len(), 3);
    }

    #[test]
    fn artifact_and_progress_files_land_under_their_directories() {
        let dir = tempfile::tempdir().unwrap();
        let artifacts = vec![
            GeneratorArtifact::new("seed-1_prompt1", sample_spec()),
            GeneratorArtifact::new("seed-2_prompt3", sample_spec()),
        ];
        let paths = write_generator_artifacts(dir.path().join("gens"), &artifacts).unwrap();
        assert_eq!(paths.len(), 2);
        assert!(paths[0].ends_with("gens/seed-1_prompt1.json"));
        assert_eq!(read_generator_artifact(&paths[1]).unwrap(), artifacts[1]);

        let record = ProgressRecord {
            seed_id: "seed/with/slashes".to_string(),
            mode: "H-Pro".to_string(),
            prompt_attempts: 3,
            samples: 15,
            variants: 5,
            failures: vec!["judge-reject".to_string()],
        };
        let path = write_progress(dir.path().join("progress"), &record).unwrap();
        assert!(path.ends_with("progress/seed_with_slashes.json"));
        let read: ProgressRecord =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(read, record);
    }
}
