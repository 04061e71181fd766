//! The augmentation driver: it walks teacher attempts, compiles payloads
//! into executable specifications, samples variants on derived streams,
//! applies the per-mode acceptance gates, chains diagnostics back into the
//! next prompt, and falls back to deterministic rephrasings when every
//! attempt fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::rc::Rc;

use crate::datasets::GeneratorArtifact;
use crate::judging::judge_instance;
use crate::model::{
    answers_match, normalize_answer, Answer, Assignment, AugmentationSummary, ExecSpec,
    GenerationConfig, Mode, SeedProblem, VariantRecord,
};
use crate::oracles::{
    parse_teacher_payload, slot_value_from_json, JudgeOracle, TeacherOracle, TeacherPayload,
};
use crate::runtime::{derive_seed, run_generator_with_rng, run_verifier, Budget, ExecStatus, SpecRng};
use crate::speclang::{compile_program, Diagnostic, Program, Role};
use crate::templating::{perturbation_score, placeholders, render, within_budget};

/// Tolerance for matching a base-assignment answer against the seed's
/// official answer. Contest answers are integers or short decimals, so this
/// sits far below any meaningful gap.
pub const SEED_ANSWER_TOL: f64 = 1e-6;

/// Accounted execution speed used to turn interpreter steps into the
/// deterministic `generator_elapsed_sec` field.
const STEPS_PER_SEC: f64 = 1e7;

/// Closed set of failure reasons tracked by the pipeline, in canonical
/// reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FailureCategory {
    Parse,
    Compile,
    Runtime,
    SeedMismatch,
    JudgeReject,
    LowYield,
    Timeout,
}

impl FailureCategory {
    /// Summary label.
    pub fn label(self) -> &'static str {
        match self {
            FailureCategory::Parse => "parse",
            FailureCategory::Compile => "compile",
            FailureCategory::Runtime => "runtime",
            FailureCategory::SeedMismatch => "seed-mismatch",
            FailureCategory::JudgeReject => "judge-reject",
            FailureCategory::LowYield => "low-yield",
            FailureCategory::Timeout => "timeout",
        }
    }

    /// Label used in teacher feedback; seed mismatches read as
    /// seed-consistency problems there.
    pub fn feedback_label(self) -> &'static str {
        match self {
            FailureCategory::SeedMismatch => "seed-consistency",
            other => other.label(),
        }
    }
}

impl fmt::Display for FailureCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One recorded failure event with its diagnostic message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureNote {
    pub category: FailureCategory,
    pub message: String,
}

impl FailureNote {
    fn new(category: FailureCategory, message: impl Into<String>) -> Self {
        FailureNote { category, message: message.into() }
    }
}

/// Everything one prompt attempt produced.
#[derive(Debug, Clone, PartialEq)]
pub struct AttemptResult {
    pub prompt_attempt: u32,
    /// Present once the payload compiled into a structurally valid spec.
    pub spec: Option<ExecSpec>,
    pub diagnostics: Vec<FailureNote>,
    /// Every variant sampled in this attempt, accepted or not.
    pub sampled: Vec<VariantRecord>,
    /// Why the attempt contributed nothing, when it didn't.
    pub failure_category: Option<FailureCategory>,
}

/// A payload compiled and ready to sample.
pub struct CompiledSpec {
    pub spec: ExecSpec,
    pub generator: Program,
    pub verifier: Program,
    pub generator_id: String,
    pub prompt_attempt: u32,
    /// The base assignment rendered on the primary carrier, when present.
    pub base_text: Option<String>,
}

fn first_diagnostic(role: &str, diags: &[Diagnostic]) -> String {
    match diags.first() {
        Some(first) if diags.len() > 1 => {
            format!("{role}: {first} (+{} more)", diags.len() - 1)
        }
        Some(first) => format!("{role}: {first}"),
        None => format!("{role}: rejected"),
    }
}

fn meta_string(value: &serde_json::Value) -> String {
    match value {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Convert a parsed payload into an executable specification, validating
/// its structure: slots must exist, every carrier must use exactly the
/// template's placeholder set, declared placeholders must be slots, and an
/// equivalent-mode payload must carry a full base assignment.
pub fn spec_from_payload(
    seed: &SeedProblem,
    mode: Mode,
    payload: &TeacherPayload,
) -> Result<ExecSpec, Vec<String>> {
    let mut problems = Vec::new();
    let slots = payload.slot_specs();
    if slots.is_empty() {
        problems.push("payload declares no slots".to_string());
    }
    let slot_names: BTreeSet<&str> = slots.iter().map(|s| s.name.as_str()).collect();
    let mut carriers = vec![payload.language_wrapper.clone()];
    carriers.extend(payload.carriers.clone().unwrap_or_default());
    let template_placeholders = placeholders(&payload.language_wrapper);
    for name in &template_placeholders {
        if !slot_names.contains(name.as_str()) {
            problems.push(format!("template references unknown slot '{name}'"));
        }
    }
    for (index, carrier) in carriers.iter().enumerate().skip(1) {
        let used = placeholders(carrier);
        for name in &used {
            if !slot_names.contains(name.as_str()) {
                problems.push(format!("carrier {index} references unknown slot '{name}'"));
            }
        }
        if used != template_placeholders {
            problems.push(format!("carrier {index} placeholder set differs from the template"));
        }
    }
    let base_assignment = match &payload.base_assignment {
        Some(raw) => {
            let mut entries = BTreeMap::new();
            for (name, value) in raw {
                if !slot_names.contains(name.as_str()) {
                    problems.push(format!("base_assignment names unknown slot '{name}'"));
                    continue;
                }
                match slot_value_from_json(value) {
                    Some(v) => {
                        entries.insert(name.clone(), v);
                    }
                    None => problems.push(format!("base_assignment value for '{name}' is not usable")),
                }
            }
            for slot in &slots {
                if !raw.contains_key(&slot.name) {
                    problems.push(format!("base_assignment is missing slot '{}'", slot.name));
                }
            }
            Some(Assignment { entries })
        }
        None => {
            if mode == Mode::E {
                problems.push("equivalent mode requires a base_assignment".to_string());
            }
            None
        }
    };
    if !problems.is_empty() {
        return Err(problems);
    }
    Ok(ExecSpec {
        seed_id: seed.id.clone(),
        mode,
        template: payload.language_wrapper.clone(),
        carriers,
        slots,
        generator_src: payload.generator.code.clone(),
        verifier_src: payload.verifier.code.clone(),
        base_assignment,
        hardness_rationale: payload.hardness_rationale.clone(),
        notes: payload.notes.clone(),
        meta: payload.meta.iter().map(|(k, v)| (k.clone(), meta_string(v))).collect(),
    })
}

fn seed_answer(seed: &SeedProblem) -> Answer {
    normalize_answer(&seed.answer)
        .unwrap_or(Answer { text: seed.answer.clone(), numeric: None })
}

fn seed_equivalence(
    spec: &ExecSpec,
    verifier: &Program,
    seed: &SeedProblem,
    budget: &Budget,
    tol: f64,
) -> Result<(), String> {
    let Some(base) = &spec.base_assignment else {
        return Err("equivalent mode requires a base_assignment".to_string());
    };
    let outcome = run_verifier(verifier, base, budget);
    match (outcome.status, outcome.value) {
        (ExecStatus::Ok, Some(verdict)) if verdict.valid => {
            let produced = verdict.answer.expect("valid verdicts carry answers");
            if answers_match(&produced, &seed_answer(seed), tol) {
                Ok(())
            } else {
                Err(format!("expected {}, produced {}", seed.answer, produced.text))
            }
        }
        (ExecStatus::Ok, _) => {
            Err(format!("expected {}, produced an invalid verdict", seed.answer))
        }
        (_, _) => Err(format!(
            "expected {}, produced no answer ({})",
            seed.answer,
            outcome.error.unwrap_or_else(|| "execution failed".to_string())
        )),
    }
}

/// True when the spec's verifier, run on its base assignment, reproduces
/// the seed's official answer within `tol`. Execution failures of any kind
/// count as false.
pub fn validate_spec_e(spec: &ExecSpec, seed: &SeedProblem, tol: f64) -> bool {
    let Ok(verifier) = compile_program(&spec.verifier_src, Role::Verifier, &spec.slots) else {
        return false;
    };
    seed_equivalence(spec, &verifier, seed, &Budget::default(), tol).is_ok()
}

/// Deterministic diagnostics text for the next teacher prompt: one line per
/// failure category in canonical order, with the event count and the first
/// message seen. Empty input gives an empty string.
pub fn feedback_from(results: &[AttemptResult]) -> String {
    let mut grouped: BTreeMap<FailureCategory, (usize, &str)> = BTreeMap::new();
    for result in results {
        for note in &result.diagnostics {
            grouped
                .entry(note.category)
                .and_modify(|(count, _)| *count += 1)
                .or_insert((1, note.message.as_str()));
        }
    }
    grouped
        .iter()
        .map(|(category, (count, first))| {
            format!("{} ({count}): {first}", category.feedback_label())
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// The five deterministic rephrasings used when synthesis exhausts its
/// attempts. They wrap the seed verbatim, keep the seed's answer, and
/// bypass every gate (`metadata["fallback"] = "true"`, no judge trials).
pub fn fallback_rephrase(seed: &SeedProblem) -> Vec<VariantRecord> {
    let texts = [
        format!("In the {} AIME, contestants faced: {}", seed.year, seed.question),
        format!("Rephrased challenge: {}", seed.question),
        format!("Consider this AIME-style task: {}", seed.question),
        format!("Alternate wording: {}", seed.question),
        format!("Restatement for clarity: {}", seed.question),
    ];
    texts
        .into_iter()
        .enumerate()
        .map(|(index, text)| VariantRecord {
            seed_id: seed.id.clone(),
            generator_id: format!("{}_fallback", seed.id),
            prompt_attempt: 1,
            sample_index: index as u32 + 1,
            assignment: Assignment::new(),
            question_text: text,
            correct_answer: seed_answer(seed),
            generator_attempts: 0,
            generator_elapsed_sec: 0.0,
            judge_trials: Vec::new(),
            judge_consistent: false,
            judge_successes: 0,
            noise_answers: Vec::new(),
            perturbation: None,
            metadata: BTreeMap::from([("fallback".to_string(), "true".to_string())]),
        })
        .collect()
}

struct Run<'a> {
    seed: &'a SeedProblem,
    cfg: &'a GenerationConfig,
    mode: Mode,
    teacher: &'a dyn TeacherOracle,
    judge: &'a dyn JudgeOracle,
    budget: Budget,
    variants: Vec<VariantRecord>,
    artifacts: Vec<GeneratorArtifact>,
    attempts: Vec<AttemptResult>,
    total_samples: u32,
    /// Equivalent mode keeps exactly one validated spec and draws every
    /// variant from it; sample indices keep advancing across attempts so
    /// later draws use fresh streams.
    validated: Option<Rc<CompiledSpec>>,
    next_sample_index: u32,
}

impl Run<'_> {
    fn target_met(&self) -> bool {
        self.variants.len() as u32 >= self.cfg.variants_per_seed
    }

    fn attempt(&mut self, prompt_attempt: u32) {
        let mut notes = Vec::new();
        let mut sampled = Vec::new();
        let accepted_before = self.variants.len();
        let spec = match self.acquire_spec(prompt_attempt, &mut notes) {
            Ok(current) => {
                self.sample_from(&current, &mut notes, &mut sampled);
                Some(current.spec.clone())
            }
            Err(spec) => spec,
        };
        // A spec whose rendered text or acceptance rate is broken stays
        // broken; drop it so the next attempt asks the teacher again.
        if self.mode == Mode::E
            && notes.iter().any(|n| n.category == FailureCategory::LowYield)
        {
            self.validated = None;
        }
        let accepted = self.variants.len() - accepted_before;
        let failure_category = if accepted == 0 {
            let mut counts: BTreeMap<FailureCategory, usize> = BTreeMap::new();
            for note in &notes {
                *counts.entry(note.category).or_insert(0) += 1;
            }
            counts
                .iter()
                .max_by_key(|(_, count)| **count)
                .map(|(category, _)| *category)
        } else {
            None
        };
        self.attempts.push(AttemptResult {
            prompt_attempt,
            spec,
            diagnostics: notes,
            sampled,
            failure_category,
        });
    }

    fn acquire_spec(
        &mut self,
        prompt_attempt: u32,
        notes: &mut Vec<FailureNote>,
    ) -> Result<Rc<CompiledSpec>, Option<ExecSpec>> {
        if self.mode == Mode::E {
            if let Some(validated) = &self.validated {
                return Ok(Rc::clone(validated));
            }
        }
        let feedback_text = feedback_from(&self.attempts);
        let feedback = (!feedback_text.is_empty()).then_some(feedback_text.as_str());
        let raw = match self.teacher.propose(self.seed, self.mode, feedback) {
            Ok(raw) => raw,
            Err(err) => {
                notes.push(FailureNote::new(FailureCategory::Parse, err.to_string()));
                return Err(None);
            }
        };
        let payload = match parse_teacher_payload(&raw, self.seed) {
            Ok(payload) => payload,
            Err(err) => {
                notes.push(FailureNote::new(FailureCategory::Parse, err.to_string()));
                return Err(None);
            }
        };
        let spec = match spec_from_payload(self.seed, self.mode, &payload) {
            Ok(spec) => spec,
            Err(problems) => {
                notes.push(FailureNote::new(FailureCategory::Compile, problems.join("; ")));
                return Err(None);
            }
        };
        let generator = match compile_program(&spec.generator_src, Role::Generator, &spec.slots) {
            Ok(program) => program,
            Err(diags) => {
                notes.push(FailureNote::new(
                    FailureCategory::Compile,
                    first_diagnostic("generator", &diags),
                ));
                return Err(Some(spec));
            }
        };
        let verifier = match compile_program(&spec.verifier_src, Role::Verifier, &spec.slots) {
            Ok(program) => program,
            Err(diags) => {
                notes.push(FailureNote::new(
                    FailureCategory::Compile,
                    first_diagnostic("verifier", &diags),
                ));
                return Err(Some(spec));
            }
        };
        let generator_id = format!("{}_prompt{}", self.seed.id, prompt_attempt);
        self.artifacts.push(GeneratorArtifact::new(&generator_id, spec.clone()));
        let base_text = match &spec.base_assignment {
            Some(base) => match render(&spec, base, 0) {
                Ok(rendered) => Some(rendered.text),
                Err(err) => {
                    if self.mode == Mode::E {
                        notes.push(FailureNote::new(
                            FailureCategory::Compile,
                            format!("base assignment does not render: {err}"),
                        ));
                        return Err(Some(spec));
                    }
                    None
                }
            },
            None => None,
        };
        if self.mode == Mode::E {
            if let Err(message) =
                seed_equivalence(&spec, &verifier, self.seed, &self.budget, SEED_ANSWER_TOL)
            {
                notes.push(FailureNote::new(FailureCategory::SeedMismatch, message));
                return Err(Some(spec));
            }
        }
        let compiled = Rc::new(CompiledSpec {
            spec,
            generator,
            verifier,
            generator_id,
            prompt_attempt,
            base_text,
        });
        if self.mode == Mode::E {
            self.validated = Some(Rc::clone(&compiled));
        }
        Ok(compiled)
    }

    fn sample_from(
        &mut self,
        current: &CompiledSpec,
        notes: &mut Vec<FailureNote>,
        sampled: &mut Vec<VariantRecord>,
    ) {
        let indices: Vec<u32> = if self.mode == Mode::E {
            let start = self.next_sample_index;
            self.next_sample_index += self.cfg.samples_per_prompt;
            (start..start + self.cfg.samples_per_prompt).collect()
        } else {
            (1..=self.cfg.samples_per_prompt).collect()
        };
        let mut accepted_this_attempt = 0u32;
        let mut verifier_ran = 0u32;
        let mut verifier_invalid = 0u32;
        for sample_index in indices {
            if self.target_met() {
                break;
            }
            self.total_samples += 1;
            let stream = derive_seed(&self.seed.id, &current.generator_id, sample_index)
                ^ self.cfg.base_seed as u64;
            let mut rng = SpecRng::seed(stream);
            let generated =
                run_generator_with_rng(&current.generator, &mut rng, &self.budget, &current.spec.slots);
            let assignment = match (generated.status, generated.value) {
                (ExecStatus::Ok, Some(assignment)) => assignment,
                (ExecStatus::StepExhausted | ExecStatus::Timeout, _) => {
                    notes.push(FailureNote::new(
                        FailureCategory::Timeout,
                        format!(
                            "generator: {}",
                            generated.error.unwrap_or_else(|| "budget exhausted".to_string())
                        ),
                    ));
                    continue;
                }
                (_, _) => {
                    notes.push(FailureNote::new(
                        FailureCategory::Runtime,
                        format!(
                            "generator: {}",
                            generated.error.unwrap_or_else(|| "execution failed".to_string())
                        ),
                    ));
                    continue;
                }
            };
            let carrier_index = if current.spec.carriers.len() > 1 {
                rng.randint(0, current.spec.carriers.len() as i64 - 1)
                    .expect("nonempty carrier range") as usize
            } else {
                0
            };
            let rendered = match render(&current.spec, &assignment, carrier_index) {
                Ok(rendered) => rendered,
                Err(err) => {
                    notes.push(FailureNote::new(
                        FailureCategory::Runtime,
                        format!("render failed: {err}"),
                    ));
                    continue;
                }
            };
            if rendered.text.contains('{') {
                notes.push(FailureNote::new(
                    FailureCategory::LowYield,
                    "rendered text still contains '{'",
                ));
                break;
            }
            let verified = run_verifier(&current.verifier, &assignment, &self.budget);
            let verdict = match (verified.status, verified.value) {
                (ExecStatus::Ok, Some(verdict)) => verdict,
                (ExecStatus::StepExhausted | ExecStatus::Timeout, _) => {
                    notes.push(FailureNote::new(
                        FailureCategory::Timeout,
                        format!(
                            "verifier: {}",
                            verified.error.unwrap_or_else(|| "budget exhausted".to_string())
                        ),
                    ));
                    continue;
                }
                (_, _) => {
                    notes.push(FailureNote::new(
                        FailureCategory::Runtime,
                        format!(
                            "verifier: {}",
                            verified.error.unwrap_or_else(|| "execution failed".to_string())
                        ),
                    ));
                    continue;
                }
            };
            verifier_ran += 1;
            if !verdict.valid {
                verifier_invalid += 1;
                continue;
            }
            let answer = verdict.answer.expect("valid verdicts carry answers");
            let perturbation = match (&current.base_text, &current.spec.base_assignment) {
                (Some(base_text), Some(base)) => Some(perturbation_score(
                    &current.spec,
                    base,
                    &assignment,
                    base_text,
                    &rendered.text,
                )),
                _ => None,
            };
            if let Some(score) = perturbation {
                if !within_budget(score, self.cfg) {
                    continue;
                }
            }
            let mut record = VariantRecord {
                seed_id: self.seed.id.clone(),
                generator_id: current.generator_id.clone(),
                prompt_attempt: current.prompt_attempt,
                sample_index,
                assignment,
                question_text: rendered.text.clone(),
                correct_answer: answer.clone(),
                generator_attempts: 1,
                generator_elapsed_sec: generated.steps_used as f64 / STEPS_PER_SEC,
                judge_trials: Vec::new(),
                judge_consistent: false,
                judge_successes: 0,
                noise_answers: Vec::new(),
                perturbation,
                metadata: BTreeMap::from([
                    ("mode".to_string(), self.mode.to_string()),
                    ("carrier_index".to_string(), carrier_index.to_string()),
                ]),
            };
            match self.mode {
                Mode::E => {
                    record.judge_consistent = true;
                    sampled.push(record.clone());
                    self.variants.push(record);
                }
                Mode::H => match judge_instance(&rendered.text, &answer, self.judge, self.cfg, &mut rng)
                {
                    Ok((passed, trials)) => {
                        record.judge_successes =
                            trials.iter().filter(|t| t.success).count() as u32;
                        record.noise_answers = trials
                            .iter()
                            .filter(|t| t.is_noise)
                            .map(|t| t.candidate.clone())
                            .collect();
                        record.judge_trials = trials;
                        record.judge_consistent = passed;
                        if !passed {
                            notes.push(FailureNote::new(
                                FailureCategory::JudgeReject,
                                format!(
                                    "judge agreed on {}/{} trials (threshold {})",
                                    record.judge_successes,
                                    record.judge_trials.len(),
                                    self.cfg.judge_consistency_threshold
                                ),
                            ));
                        }
                        let accept =
                            passed && accepted_this_attempt < self.cfg.max_variants_per_attempt;
                        sampled.push(record.clone());
                        if accept {
                            accepted_this_attempt += 1;
                            self.variants.push(record);
                        }
                    }
                    Err(err) => {
                        notes.push(FailureNote::new(FailureCategory::JudgeReject, err.to_string()));
                    }
                },
            }
        }
        if verifier_ran > 0 && verifier_invalid as f64 / verifier_ran as f64 > 0.9 {
            notes.push(FailureNote::new(
                FailureCategory::LowYield,
                format!("verifier rejected {verifier_invalid}/{verifier_ran} sampled assignments"),
            ));
        }
    }
}

/// Augment one seed: up to `prompt_attempt_limit` teacher attempts, each
/// compiled, sampled on streams derived from
/// `(seed_id, generator_id, sample_index)` XOR `base_seed`, and gated per
/// mode — equivalent specs must reproduce the seed answer on their base
/// assignment before any sampling; hardened variants must pass the judge
/// noise gate, at most `max_variants_per_attempt` per attempt. Five
/// deterministic rephrasings stand in when nothing survives. No error
/// escapes: every failure becomes a category in the summary.
pub fn augment_seed(
    seed: &SeedProblem,
    cfg: &GenerationConfig,
    mode: Mode,
    teacher: &dyn TeacherOracle,
    judge: &dyn JudgeOracle,
) -> (Vec<VariantRecord>, Vec<GeneratorArtifact>, AugmentationSummary) {
    let mut run = Run {
        seed,
        cfg,
        mode,
        teacher,
        judge,
        budget: Budget::from(cfg),
        variants: Vec::new(),
        artifacts: Vec::new(),
        attempts: Vec::new(),
        total_samples: 0,
        validated: None,
        next_sample_index: 1,
    };
    let mut total_prompt_attempts = 0u32;
    for prompt_attempt in 1..=cfg.prompt_attempt_limit {
        if run.target_met() {
            break;
        }
        total_prompt_attempts += 1;
        run.attempt(prompt_attempt);
    }
    let mut variants = run.variants;
    if variants.is_empty() {
        let mut fallback = fallback_rephrase(seed);
        for record in &mut fallback {
            record.metadata.insert("mode".to_string(), mode.to_string());
        }
        variants = fallback;
    }
    let failures = run
        .attempts
        .iter()
        .flat_map(|a| a.diagnostics.iter().map(|n| n.category.label().to_string()))
        .collect();
    let summary = AugmentationSummary {
        seed_id: seed.id.clone(),
        total_prompt_attempts,
        total_samples: run.total_samples,
        valid_variants: variants.len() as u32,
        failures,
    };
    (variants, run.artifacts, summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::mock::{AlwaysTrueJudge, GarbageTeacher, PerfectJudge, ScriptedTeacher};
    use proptest::prelude::*;

    fn seed() -> SeedProblem {
        SeedProblem {
            id: "sum-2024".to_string(),
            year: 2024,
            question: "Compute 40 + 2.".to_string(),
            answer: "42".to_string(),
        }
    }

    fn sum_payload(verifier_body: &str, base: serde_json::Value) -> String {
        serde_json::json!({
            "language_wrapper": "Compute {a} + {b}.",
            "slots": {
                "a": {"kind": "int", "bounds": [1.0, 50.0], "description": "first addend"},
                "b": {"kind": "int", "bounds": [1.0, 50.0], "description": "second addend"}
            },
            "generator": {
                "type": "speclang-v1",
                "code": "def generator(rng):\n    return {'a': rng.randint(1, 50), 'b': rng.randint(1, 50)}"
            },
            "verifier": {"type": "speclang-v1", "code": verifier_body},
            "hardness_rationale": "same structure, fresh numbers",
            "base_assignment": base
        })
        .to_string()
    }

    fn good_payload() -> String {
        sum_payload(
            "def verifier(assign):\n    return True, assign['a'] + assign['b']",
            serde_json::json!({"a": 40, "b": 2}),
        )
    }

    fn teacher_with(payload: &str) -> ScriptedTeacher {
        ScriptedTeacher::single("sum-2024", payload)
    }

    #[test]
    fn a_clean_equivalent_payload_fills_in_one_attempt() {
        let cfg = GenerationConfig::default();
        let (variants, artifacts, summary) = augment_seed(
            &seed(),
            &cfg,
            Mode::E,
            &teacher_with(&good_payload()),
            &PerfectJudge::new(),
        );
        assert_eq!(variants.len(), 5);
        assert_eq!(artifacts.len(), 1);
        assert_eq!(summary.total_prompt_attempts, 1);
        assert_eq!(summary.total_samples, 5);
        assert_eq!(summary.valid_variants, 5);
        assert!(summary.failures.is_empty());
        for (i, v) in variants.iter().enumerate() {
            assert_eq!(v.generator_id, "sum-2024_prompt1");
            assert_eq!(v.sample_index, i as u32 + 1);
            assert!(v.judge_consistent);
            assert!(v.judge_trials.is_empty());
            assert_eq!(v.metadata.get("mode").map(String::as_str), Some("E"));
            assert_eq!(v.metadata.get("carrier_index").map(String::as_str), Some("0"));
            assert!(v.perturbation.is_some());
            assert!(!v.question_text.contains('{'));
        }
    }

    #[test]
    fn reruns_are_field_for_field_identical() {
        let cfg = GenerationConfig::default();
        let run = || {
            augment_seed(
                &seed(),
                &cfg,
                Mode::E,
                &teacher_with(&good_payload()),
                &PerfectJudge::new(),
            )
        };
        let (v1, a1, s1) = run();
        let (v2, a2, s2) = run();
        assert_eq!(v1, v2);
        assert_eq!(a1, a2);
        assert_eq!(s1, s2);
    }

    #[test]
    fn the_base_seed_reroutes_every_stream() {
        let run = |base_seed: i64| {
            let cfg = GenerationConfig { base_seed, ..Default::default() };
            augment_seed(
                &seed(),
                &cfg,
                Mode::E,
                &teacher_with(&good_payload()),
                &PerfectJudge::new(),
            )
            .0
        };
        let zero = run(0);
        let one = run(1);
        assert_eq!(zero.len(), one.len());
        assert!(
            zero.iter().zip(&one).any(|(a, b)| a.assignment != b.assignment),
            "changing base_seed left every assignment unchanged"
        );
    }

    #[test]
    fn labels_come_from_the_verifier() {
        let cfg = GenerationConfig::default();
        let (variants, artifacts, _) = augment_seed(
            &seed(),
            &cfg,
            Mode::E,
            &teacher_with(&good_payload()),
            &PerfectJudge::new(),
        );
        let spec = &artifacts[0].spec;
        let verifier = compile_program(&spec.verifier_src, Role::Verifier, &spec.slots).unwrap();
        for v in &variants {
            let outcome = run_verifier(&verifier, &v.assignment, &Budget::default());
            let verdict = outcome.value.expect("stored assignments re-verify");
            assert_eq!(verdict.answer.unwrap(), v.correct_answer);
        }
    }

    #[test]
    fn garbage_teachers_exhaust_attempts_and_fall_back() {
        let cfg = GenerationConfig::default();
        let (variants, artifacts, summary) =
            augment_seed(&seed(), &cfg, Mode::E, &GarbageTeacher, &PerfectJudge::new());
        assert_eq!(summary.total_prompt_attempts, 20);
        assert_eq!(summary.total_samples, 0);
        assert!(artifacts.is_empty());
        assert_eq!(summary.failures.len(), 20);
        assert!(summary.failures.iter().all(|f| f == "parse"));
        assert_eq!(variants.len(), 5);
        assert!(variants[0].question_text.contains("In the 2024 AIME"));
        assert!(variants[1].question_text.starts_with("Rephrased challenge: "));
        for v in &variants {
            assert!(v.is_fallback());
            assert!(v.judge_trials.is_empty());
            assert_eq!(v.correct_answer.numeric, Some(42.0));
            assert_eq!(v.generator_id, "sum-2024_fallback");
        }
    }

    #[test]
    fn seed_mismatches_block_sampling_and_name_both_answers() {
        let off_by_one = sum_payload(
            "def verifier(assign):\n    return True, assign['a'] + assign['b'] + 1",
            serde_json::json!({"a": 40, "b": 2}),
        );
        let cfg = GenerationConfig::default();
        let (variants, artifacts, summary) = augment_seed(
            &seed(),
            &cfg,
            Mode::E,
            &teacher_with(&off_by_one),
            &PerfectJudge::new(),
        );
        assert_eq!(summary.total_samples, 0, "mismatched specs must not sample");
        assert_eq!(summary.failures.len(), 20);
        assert!(summary.failures.iter().all(|f| f == "seed-mismatch"));
        assert_eq!(artifacts.len(), 20, "compiled specs are registered before validation");
        assert!(variants.iter().all(VariantRecord::is_fallback));
    }

    #[test]
    fn the_equivalence_validator_is_strict() {
        let payload = parse_teacher_payload(&good_payload(), &seed()).unwrap();
        let spec = spec_from_payload(&seed(), Mode::E, &payload).unwrap();
        assert!(validate_spec_e(&spec, &seed(), 1e-6));

        let mut wrong_seed = seed();
        wrong_seed.answer = "43".to_string();
        assert!(!validate_spec_e(&spec, &wrong_seed, 1e-6));

        let spinning = sum_payload(
            "def verifier(assign):\n    n = 0\n    while True:\n        n = n + 1\n    return True, n",
            serde_json::json!({"a": 40, "b": 2}),
        );
        let payload = parse_teacher_payload(&spinning, &seed()).unwrap();
        let spec = spec_from_payload(&seed(), Mode::E, &payload).unwrap();
        assert!(!validate_spec_e(&spec, &seed(), 1e-6), "timeouts count as mismatches");
    }

    #[test]
    fn hardened_attempts_cap_their_acceptances() {
        let hard = sum_payload(
            "def verifier(assign):\n    return True, assign['a'] + assign['b']",
            serde_json::json!(null),
        );
        let cfg = GenerationConfig::default();
        let (variants, artifacts, summary) = augment_seed(
            &seed(),
            &cfg,
            Mode::H,
            &teacher_with(&hard),
            &PerfectJudge::new(),
        );
        assert_eq!(variants.len(), 5);
        let per_attempt: Vec<usize> = (1..=3)
            .map(|a| variants.iter().filter(|v| v.prompt_attempt == a).count())
            .collect();
        assert_eq!(per_attempt, vec![2, 2, 1], "acceptance caps at 2 per attempt");
        assert_eq!(artifacts.len(), 3, "hardened mode accumulates specs across attempts");
        assert_eq!(summary.total_prompt_attempts, 3);
        for v in &variants {
            assert!(v.judge_consistent);
            assert_eq!(v.judge_trials.len(), 5);
            assert_eq!(v.judge_successes, 5);
            assert_eq!(v.noise_answers.len(), 3);
            assert_eq!(v.metadata.get("mode").map(String::as_str), Some("H"));
            assert!(v.perturbation.is_none());
        }
    }

    #[test]
    fn rubber_stamp_judges_reject_every_hardened_variant() {
        let hard = sum_payload(
            "def verifier(assign):\n    return True, assign['a'] + assign['b']",
            serde_json::json!(null),
        );
        let cfg = GenerationConfig::default();
        let (variants, _, summary) =
            augment_seed(&seed(), &cfg, Mode::H, &teacher_with(&hard), &AlwaysTrueJudge);
        assert!(variants.iter().all(VariantRecord::is_fallback));
        assert_eq!(summary.total_prompt_attempts, 20);
        assert_eq!(summary.total_samples, 100);
        assert_eq!(summary.failures.len(), 100);
        assert!(summary.failures.iter().all(|f| f == "judge-reject"));
    }

    #[test]
    fn equivalent_mode_keeps_one_spec_even_when_starved() {
        // The base assignment sits outside the generator's support, so with
        // a zero perturbation budget every sample is silently rejected: the
        // teacher must still only be consulted once.
        let starved = sum_payload(
            "def verifier(assign):\n    return True, assign['a'] + assign['b']",
            serde_json::json!({"a": 0, "b": 42}),
        );
        let cfg = GenerationConfig { perturbation_budget: Some(0.0), ..Default::default() };
        let (variants, artifacts, summary) = augment_seed(
            &seed(),
            &cfg,
            Mode::E,
            &teacher_with(&starved),
            &PerfectJudge::new(),
        );
        assert_eq!(artifacts.len(), 1, "one validated spec serves every attempt");
        assert_eq!(summary.total_prompt_attempts, 20);
        assert_eq!(summary.total_samples, 100, "sample indices keep advancing");
        assert!(variants.iter().all(VariantRecord::is_fallback));
    }

    #[test]
    fn leaky_templates_are_low_yield() {
        let leaky = serde_json::json!({
            "language_wrapper": "Compute {a} + { b} anyway.",
            "slots": {"a": {"kind": "int", "bounds": [1.0, 9.0], "description": "addend"}},
            "generator": {"type": "speclang-v1", "code": "def generator(rng):\n    return {'a': rng.randint(1, 9)}"},
            "verifier": {"type": "speclang-v1", "code": "def verifier(assign):\n    return True, assign['a']"},
            "hardness_rationale": "r",
            "base_assignment": {"a": 4}
        })
        .to_string();
        let mut seed = seed();
        seed.answer = "4".to_string();
        let cfg = GenerationConfig::default();
        let (variants, _, summary) = augment_seed(
            &seed,
            &cfg,
            Mode::E,
            &teacher_with(&leaky),
            &PerfectJudge::new(),
        );
        assert!(summary.failures.contains(&"low-yield".to_string()));
        assert!(variants.iter().all(VariantRecord::is_fallback));
    }

    #[test]
    fn slow_generators_are_timeouts() {
        let spinning = serde_json::json!({
            "language_wrapper": "Count to {n}.",
            "slots": {"n": {"kind": "int", "description": "target"}},
            "generator": {"type": "speclang-v1", "code": "def generator(rng):\n    n = 0\n    while True:\n        n = n + 1\n    return {'n': n}"},
            "verifier": {"type": "speclang-v1", "code": "def verifier(assign):\n    return True, assign['n']"},
            "hardness_rationale": "r",
            "base_assignment": {"n": 42}
        })
        .to_string();
        let cfg = GenerationConfig { step_budget: 10_000, ..Default::default() };
        let (_, _, summary) = augment_seed(
            &seed(),
            &cfg,
            Mode::E,
            &teacher_with(&spinning),
            &PerfectJudge::new(),
        );
        assert!(summary.failures.contains(&"timeout".to_string()));
    }

    #[test]
    fn structural_problems_are_compile_failures() {
        let unknown_slot = serde_json::json!({
            "language_wrapper": "Compute {a} + {mystery}.",
            "slots": {"a": {"kind": "int", "description": "addend"}},
            "generator": {"type": "speclang-v1", "code": "def generator(rng):\n    return {'a': rng.randint(1, 9)}"},
            "verifier": {"type": "speclang-v1", "code": "def verifier(assign):\n    return True, assign['a']"},
            "hardness_rationale": "r"
        })
        .to_string();
        let payload = parse_teacher_payload(&unknown_slot, &seed()).unwrap();
        let problems = spec_from_payload(&seed(), Mode::E, &payload).unwrap_err();
        assert!(problems.iter().any(|p| p.contains("unknown slot 'mystery'")));
        assert!(problems.iter().any(|p| p.contains("requires a base_assignment")));

        let cfg = GenerationConfig { prompt_attempt_limit: 2, ..Default::default() };
        let (_, artifacts, summary) = augment_seed(
            &seed(),
            &cfg,
            Mode::E,
            &teacher_with(&unknown_slot),
            &PerfectJudge::new(),
        );
        assert!(artifacts.is_empty());
        assert!(summary.failures.iter().all(|f| f == "compile"));
    }

    #[test]
    fn extra_carriers_must_match_the_template() {
        let mismatched = serde_json::json!({
            "language_wrapper": "Compute {a} + {b}.",
            "slots": {
                "a": {"kind": "int", "description": "x"},
                "b": {"kind": "int", "description": "y"}
            },
            "generator": {"type": "speclang-v1", "code": "def generator(rng):\n    return {'a': 1, 'b': 2}"},
            "verifier": {"type": "speclang-v1", "code": "def verifier(assign):\n    return True, assign['a']"},
            "hardness_rationale": "r",
            "carriers": ["Suma {a} y {b}.", "Only {a} here."]
        })
        .to_string();
        let payload = parse_teacher_payload(&mismatched, &seed()).unwrap();
        let problems = spec_from_payload(&seed(), Mode::H, &payload).unwrap_err();
        assert_eq!(problems, vec!["carrier 2 placeholder set differs from the template".to_string()]);
    }

    #[test]
    fn sampled_carriers_come_from_the_instance_stream() {
        let multilingual = serde_json::json!({
            "language_wrapper": "Compute {a} + {b}.",
            "slots": {
                "a": {"kind": "int", "bounds": [1.0, 50.0], "description": "x"},
                "b": {"kind": "int", "bounds": [1.0, 50.0], "description": "y"}
            },
            "generator": {
                "type": "speclang-v1",
                "code": "def generator(rng):\n    return {'a': rng.randint(1, 50), 'b': rng.randint(1, 50)}"
            },
            "verifier": {"type": "speclang-v1", "code": "def verifier(assign):\n    return True, assign['a'] + assign['b']"},
            "hardness_rationale": "r",
            "base_assignment": {"a": 40, "b": 2},
            "carriers": ["Suma {a} y {b}.", "Addiere {a} und {b}."]
        })
        .to_string();
        let cfg = GenerationConfig::default();
        let run = || {
            augment_seed(
                &seed(),
                &cfg,
                Mode::E,
                &teacher_with(&multilingual),
                &PerfectJudge::new(),
            )
            .0
        };
        let variants = run();
        assert_eq!(variants.len(), 5);
        for v in &variants {
            let index: usize = v.metadata["carrier_index"].parse().unwrap();
            assert!(index < 3);
        }
        assert_eq!(variants, run(), "carrier choice replays exactly");
    }

    #[test]
    fn feedback_groups_categories_in_canonical_order() {
        let attempt = |notes: Vec<FailureNote>| AttemptResult {
            prompt_attempt: 1,
            spec: None,
            diagnostics: notes,
            sampled: Vec::new(),
            failure_category: Some(FailureCategory::Parse),
        };
        assert_eq!(feedback_from(&[]), "");

        let results = vec![
            attempt(vec![
                FailureNote::new(FailureCategory::Runtime, "generator: line 2: division by zero"),
                FailureNote::new(FailureCategory::Parse, "no JSON object found in the reply"),
            ]),
            attempt(vec![FailureNote::new(FailureCategory::Parse, "second parse message")]),
        ];
        let feedback = feedback_from(&results);
        let lines: Vec<&str> = feedback.lines().collect();
        assert_eq!(
            lines,
            vec![
                "parse (2): no JSON object found in the reply",
                "runtime (1): generator: line 2: division by zero",
            ]
        );

        let mismatch = vec![attempt(vec![FailureNote::new(
            FailureCategory::SeedMismatch,
            "expected 468, produced 470",
        )])];
        let feedback = feedback_from(&mismatch);
        assert!(feedback.contains("seed-consistency"));
        assert!(feedback.contains("expected 468, produced 470"));
    }

    #[test]
    fn fallback_wrappings_are_pinned() {
        let records = fallback_rephrase(&seed());
        assert_eq!(records.len(), 5);
        assert_eq!(records[0].question_text, "In the 2024 AIME, contestants faced: Compute 40 + 2.");
        assert_eq!(records[1].question_text, "Rephrased challenge: Compute 40 + 2.");
        assert_eq!(records[2].question_text, "Consider this AIME-style task: Compute 40 + 2.");
        assert_eq!(records[3].question_text, "Alternate wording: Compute 40 + 2.");
        assert_eq!(records[4].question_text, "Restatement for clarity: Compute 40 + 2.");
        for (i, r) in records.iter().enumerate() {
            assert_eq!(r.sample_index, i as u32 + 1);
            assert!(r.is_fallback());
            assert!(r.judge_trials.is_empty());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn augmentation_is_deterministic_for_any_base_seed(base_seed in any::<u32>()) {
            let cfg = GenerationConfig { base_seed: base_seed as i64, ..Default::default() };
            let run = || augment_seed(
                &seed(),
                &cfg,
                Mode::E,
                &teacher_with(&good_payload()),
                &PerfectJudge::new(),
            );
            let (v1, a1, s1) = run();
            let (v2, a2, s2) = run();
            prop_assert_eq!(v1, v2);
            prop_assert_eq!(a1, a2);
            prop_assert_eq!(s1, s2);
        }
    }
}
