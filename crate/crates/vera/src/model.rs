//! Core data model shared by every pipeline stage: seed problems, slot
//! schemas, executable specifications, sampled variants, and the generation
//! configuration, plus answer normalization and tolerance-aware matching.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("answer text is empty")]
    EmptyAnswer,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("rational arithmetic overflow")]
    RationalOverflow,
}

/// A benchmark problem used as the anchor for augmentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedProblem {
    pub id: String,
    pub year: i32,
    pub question: String,
    pub answer: String,
}

/// Augmentation mode carried by a specification. Equivalent-mode specs must
/// reproduce the seed answer on their base assignment; hardened-mode specs
/// are gated per-variant by the judge instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    E,
    H,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::E => write!(f, "E"),
            Mode::H => write!(f, "H"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    Int,
    Rational,
    Real,
    Categorical,
}

/// Declared shape of one template slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotSpec {
    pub name: String,
    pub kind: SlotKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choices: Option<Vec<String>>,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub harder_than_seed: bool,
}

/// Exact rational with a reduced positive denominator. Arithmetic is checked:
/// results that cannot be reduced back into i64 components are an error
/// rather than a silent wrap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct Rational {
    p: i64,
    q: i64,
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub fn new(p: i64, q: i64) -> Result<Self, ModelError> {
        Self::from_i128(p as i128, q as i128)
    }

    fn from_i128(p: i128, q: i128) -> Result<Self, ModelError> {
        if q == 0 {
            return Err(ModelError::ZeroDenominator);
        }
        let sign = if q < 0 { -1 } else { 1 };
        let g = gcd_i128(p, q);
        let (p, q) = if g == 0 { (0, 1) } else { (sign * p / g, sign * q / g) };
        if p < i64::MIN as i128 || p > i64::MAX as i128 || q > i64::MAX as i128 {
            return Err(ModelError::RationalOverflow);
        }
        Ok(Rational { p: p as i64, q: q as i64 })
    }

    pub fn from_int(v: i64) -> Self {
        Rational { p: v, q: 1 }
    }

    pub fn numer(&self) -> i64 {
        self.p
    }

    pub fn denom(&self) -> i64 {
        self.q
    }

    pub fn is_integer(&self) -> bool {
        self.q == 1
    }

    pub fn to_f64(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn add(&self, o: &Rational) -> Result<Self, ModelError> {
        Self::from_i128(
            self.p as i128 * o.q as i128 + o.p as i128 * self.q as i128,
            self.q as i128 * o.q as i128,
        )
    }

    pub fn sub(&self, o: &Rational) -> Result<Self, ModelError> {
        Self::from_i128(
            self.p as i128 * o.q as i128 - o.p as i128 * self.q as i128,
            self.q as i128 * o.q as i128,
        )
    }

    pub fn mul(&self, o: &Rational) -> Result<Self, ModelError> {
        Self::from_i128(self.p as i128 * o.p as i128, self.q as i128 * o.q as i128)
    }

    pub fn div(&self, o: &Rational) -> Result<Self, ModelError> {
        Self::from_i128(self.p as i128 * o.q as i128, self.q as i128 * o.p as i128)
    }

    pub fn neg(&self) -> Result<Self, ModelError> {
        Self::from_i128(-(self.p as i128), self.q as i128)
    }

    pub fn abs(&self) -> Result<Self, ModelError> {
        Self::from_i128((self.p as i128).abs(), self.q as i128)
    }

    /// Floor toward negative infinity as an integer.
    pub fn floor(&self) -> i64 {
        self.p.div_euclid(self.q)
    }

    pub fn ceil(&self) -> i64 {
        -(-self.p).div_euclid(self.q)
    }

    /// Truncation toward zero.
    pub fn trunc(&self) -> i64 {
        self.p / self.q
    }

    pub fn cmp_exact(&self, o: &Rational) -> std::cmp::Ordering {
        (self.p as i128 * o.q as i128).cmp(&(o.p as i128 * self.q as i128))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == 1 {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}/{}", self.p, self.q)
        }
    }
}

impl TryFrom<(i64, i64)> for Rational {
    type Error = ModelError;
    fn try_from(v: (i64, i64)) -> Result<Self, ModelError> {
        Rational::new(v.0, v.1)
    }
}

impl From<Rational> for (i64, i64) {
    fn from(r: Rational) -> (i64, i64) {
        (r.p, r.q)
    }
}

/// One concrete value bound to a slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotValue {
    Int(i64),
    Rational(Rational),
    Real(f64),
    Str(String),
}

impl SlotValue {
    /// Canonical text used when substituting into templates: plain decimal
    /// for integers, `p/q` for rationals, shortest round-trip decimal for
    /// reals, the string itself otherwise.
    pub fn canonical_text(&self) -> String {
        match self {
            SlotValue::Int(v) => v.to_string(),
            SlotValue::Rational(r) => format!("{}/{}", r.numer(), r.denom()),
            SlotValue::Real(v) => v.to_string(),
            SlotValue::Str(s) => s.clone(),
        }
    }

    pub fn numeric(&self) -> Option<f64> {
        match self {
            SlotValue::Int(v) => Some(*v as f64),
            SlotValue::Rational(r) => Some(r.to_f64()),
            SlotValue::Real(v) => Some(*v),
            SlotValue::Str(_) => None,
        }
    }
}

/// Slot-name to value map produced by one generator run. Entries are kept
/// sorted so serialization and iteration order never depend on insertion.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    pub entries: BTreeMap<String, SlotValue>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&SlotValue> {
        self.entries.get(name)
    }

    pub fn insert(&mut self, name: impl Into<String>, value: SlotValue) {
        self.entries.insert(name.into(), value);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A gold answer in canonical form: the text as given plus a numeric reading
/// when the text is an optionally-signed integer, decimal, or p/q fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeric: Option<f64>,
}

impl Answer {
    pub fn from_int(v: i64) -> Self {
        Answer { text: v.to_string(), numeric: Some(v as f64) }
    }

    pub fn from_real(v: f64) -> Self {
        Answer { text: v.to_string(), numeric: Some(v) }
    }
}

fn numeric_res() -> &'static (Regex, Regex) {
    static RES: OnceLock<(Regex, Regex)> = OnceLock::new();
    RES.get_or_init(|| {
        (
            Regex::new(r"^[+-]?[0-9]+(\.[0-9]+)?$").unwrap(),
            Regex::new(r"^([+-]?[0-9]+)/([0-9]+)$").unwrap(),
        )
    })
}

/// Trim the text and attach a numeric reading when it has one. Whitespace-only
/// input is an error; any other text is preserved verbatim (just trimmed).
pub fn normalize_answer(text: &str) -> Result<Answer, ModelError> {
    let t = text.trim();
    if t.is_empty() {
        return Err(ModelError::EmptyAnswer);
    }
    let (plain, frac) = numeric_res();
    let numeric = if plain.is_match(t) {
        t.parse::<f64>().ok()
    } else if let Some(caps) = frac.captures(t) {
        let p: f64 = caps[1].parse().ok().unwrap_or(f64::NAN);
        let q: f64 = caps[2].parse().ok().unwrap_or(0.0);
        if q > 0.0 && p.is_finite() {
            Some(p / q)
        } else {
            None
        }
    } else {
        None
    };
    Ok(Answer { text: t.to_string(), numeric })
}

/// Two answers match when both are numeric and within `tol`, or neither is
/// numeric and the trimmed texts are equal (case-sensitive). A numeric and a
/// non-numeric answer never match.
pub fn answers_match(a: &Answer, b: &Answer, tol: f64) -> bool {
    match (a.numeric, b.numeric) {
        (Some(x), Some(y)) => (x - y).abs() <= tol,
        (None, None) => a.text.trim() == b.text.trim(),
        _ => false,
    }
}

/// Full executable specification compiled from one teacher payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecSpec {
    pub seed_id: String,
    pub mode: Mode,
    /// Primary problem statement with `{name}` placeholders.
    pub template: String,
    /// All statement wordings, primary first. Every carrier must use the
    /// same placeholder set.
    pub carriers: Vec<String>,
    pub slots: Vec<SlotSpec>,
    pub generator_src: String,
    pub verifier_src: String,
    /// Assignment that reproduces the seed exactly (equivalent mode only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_assignment: Option<Assignment>,
    pub hardness_rationale: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

/// Knobs for one augmentation run. `Default` gives the standard values used
/// throughout: 5 variants per seed, 20 teacher attempts, 5 samples per
/// attempt, a 300 s wall-clock backstop over a 10M step budget, and a 4-of-5
/// judge consistency bar (2 correct + 3 noise trials).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub variants_per_seed: u32,
    pub prompt_attempt_limit: u32,
    pub samples_per_prompt: u32,
    pub generator_timeout_sec: f64,
    pub step_budget: u64,
    pub memory_cells_budget: u64,
    pub judge_consistency_threshold: u32,
    pub judge_correct_trials: u32,
    pub judge_noise_trials: u32,
    pub max_variants_per_attempt: u32,
    pub base_seed: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation_budget: Option<f64>,
    pub debug: bool,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            variants_per_seed: 5,
            prompt_attempt_limit: 20,
            samples_per_prompt: 5,
            generator_timeout_sec: 300.0,
            step_budget: 10_000_000,
            memory_cells_budget: 1_000_000,
            judge_consistency_threshold: 4,
            judge_correct_trials: 2,
            judge_noise_trials: 3,
            max_variants_per_attempt: 2,
            base_seed: 0,
            perturbation_budget: None,
            debug: false,
        }
    }
}

/// Sanity-check a configuration. Returns human-readable diagnostics; an
/// empty list means the configuration is usable.
pub fn validate_config(cfg: &GenerationConfig) -> Vec<String> {
    let mut out = Vec::new();
    if cfg.variants_per_seed == 0 {
        out.push("variants_per_seed must be at least 1".to_string());
    }
    if cfg.prompt_attempt_limit == 0 {
        out.push("prompt_attempt_limit must be at least 1".to_string());
    }
    if cfg.samples_per_prompt == 0 {
        out.push("samples_per_prompt must be at least 1".to_string());
    }
    if cfg.generator_timeout_sec <= 0.0 {
        out.push("generator_timeout_sec must be positive".to_string());
    }
    if cfg.step_budget == 0 {
        out.push("step_budget must be at least 1".to_string());
    }
    if cfg.memory_cells_budget == 0 {
        out.push("memory_cells_budget must be at least 1".to_string());
    }
    let trials = cfg.judge_correct_trials + cfg.judge_noise_trials;
    if cfg.judge_consistency_threshold == 0 || cfg.judge_consistency_threshold > trials {
        out.push(format!(
            "judge_consistency_threshold {} is outside 1..={} (correct + noise trials)",
            cfg.judge_consistency_threshold, trials
        ));
    }
    if cfg.max_variants_per_attempt == 0 {
        out.push("max_variants_per_attempt must be at least 1".to_string());
    }
    if let Some(b) = cfg.perturbation_budget {
        if !(0.0..=1.0).contains(&b) {
            out.push(format!("perturbation_budget {b} is outside [0, 1]"));
        }
    }
    out
}

/// One judge query: the candidate shown, what the judge should have said,
/// and what it actually said.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeTrial {
    pub candidate: Answer,
    pub expected: bool,
    pub is_noise: bool,
    pub observed: bool,
    pub success: bool,
}

/// One released (or fallback) variant with its full provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRecord {
    pub seed_id: String,
    pub generator_id: String,
    pub prompt_attempt: u32,
    pub sample_index: u32,
    pub assignment: Assignment,
    pub question_text: String,
    pub correct_answer: Answer,
    pub generator_attempts: u32,
    /// Deterministic accounted execution time: interpreter steps at a
    /// nominal 1e7 steps per second, so reruns serialize identically.
    pub generator_elapsed_sec: f64,
    pub judge_trials: Vec<JudgeTrial>,
    pub judge_consistent: bool,
    pub judge_successes: u32,
    pub noise_answers: Vec<Answer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<f64>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl VariantRecord {
    /// Stable identifier unique across a run: seed, generator, and sample.
    pub fn variant_id(&self) -> String {
        format!("{}/{}/{}", self.seed_id, self.generator_id, self.sample_index)
    }

    pub fn is_fallback(&self) -> bool {
        self.metadata.get("fallback").map(String::as_str) == Some("true")
    }
}

/// Per-seed accounting of how augmentation went.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationSummary {
    pub seed_id: String,
    pub total_prompt_attempts: u32,
    pub total_samples: u32,
    pub valid_variants: u32,
    /// Category per failure event, drawn from the closed set: parse,
    /// compile, runtime, seed-mismatch, judge-reject, low-yield, timeout.
    pub failures: Vec<String>,
}
