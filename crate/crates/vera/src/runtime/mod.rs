//! Sandboxed execution of generator and verifier programs.
//!
//! A generator runs against a deterministic [`SpecRng`] stream and must
//! return a slot assignment that satisfies the declared schema. A verifier
//! runs against an assignment and must return a `(valid, answer)` pair.
//! Both run under a [`Budget`]: a step limit, an allocation-cell limit, and
//! a wall-clock backstop. Exceeding any of them ends the run with a
//! distinct [`ExecStatus`] instead of an error in the host process.

mod interp;
mod rng;
mod value;

use serde::{Deserialize, Serialize};

use crate::model::{
    normalize_answer, Answer, Assignment, GenerationConfig, Rational, SlotKind, SlotSpec,
    SlotValue,
};
use crate::speclang::{Program, Role};

pub use rng::{derive_seed, SpecRng};

use interp::Halt;
use value::Value;

/// Resource ceiling for one program run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Maximum number of evaluation steps (one per syntax-tree node).
    pub step_limit: u64,
    /// Maximum cumulative allocation cells (list/map/tuple elements plus
    /// string growth).
    pub memory_cells: u64,
    /// Wall-clock backstop in seconds, polled every 4096 steps.
    pub wall_clock_sec: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { step_limit: 10_000_000, memory_cells: 1_000_000, wall_clock_sec: 300.0 }
    }
}

impl From<&GenerationConfig> for Budget {
    fn from(cfg: &GenerationConfig) -> Self {
        Budget {
            step_limit: cfg.step_budget,
            memory_cells: cfg.memory_cells_budget,
            wall_clock_sec: cfg.generator_timeout_sec,
        }
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecStatus {
    /// Finished and produced a well-formed result.
    Ok,
    /// Hit the step limit; `steps_used` equals the limit exactly.
    StepExhausted,
    /// Exceeded the cumulative allocation budget.
    MemoryExhausted,
    /// Tripped the wall-clock backstop.
    Timeout,
    /// Failed inside the program (overflow, bad types, division by zero,
    /// a failed generator assertion, ...).
    RuntimeError,
    /// Finished but the returned value does not fit the expected shape.
    InvalidReturn,
}

impl ExecStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, ExecStatus::Ok)
    }
}

/// Result of one budgeted run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecOutcome<T> {
    pub status: ExecStatus,
    /// Present only when `status` is [`ExecStatus::Ok`].
    pub value: Option<T>,
    pub steps_used: u64,
    /// Measured wall time of this run. Not deterministic; never persisted.
    pub elapsed_sec: f64,
    /// Human-readable failure detail for non-`Ok` statuses.
    pub error: Option<String>,
}

impl<T> ExecOutcome<T> {
    fn failure(status: ExecStatus, steps: u64, elapsed: f64, error: String) -> Self {
        ExecOutcome { status, value: None, steps_used: steps, elapsed_sec: elapsed, error: Some(error) }
    }
}

/// A verifier's judgment of one assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub valid: bool,
    /// The canonical answer; present exactly when `valid` is true.
    pub answer: Option<Answer>,
}

/// Run a generator with a fresh stream derived from `seed`.
pub fn run_generator(
    program: &Program,
    seed: u64,
    budget: &Budget,
    slots: &[SlotSpec],
) -> ExecOutcome<Assignment> {
    let mut rng = SpecRng::seed(seed);
    run_generator_with_rng(program, &mut rng, budget, slots)
}

/// Run a generator against a caller-owned stream. After an `Ok` outcome
/// the stream is positioned just past the generator's last draw, so
/// follow-up draws (e.g. picking a carrier) stay on the same stream.
pub fn run_generator_with_rng(
    program: &Program,
    rng: &mut SpecRng,
    budget: &Budget,
    slots: &[SlotSpec],
) -> ExecOutcome<Assignment> {
    if program.role != Role::Generator {
        return ExecOutcome::failure(
            ExecStatus::RuntimeError,
            0,
            0.0,
            "program is not a generator".to_string(),
        );
    }
    let raw = interp::run_program(program, Some(rng), budget, None);
    let (steps, elapsed) = (raw.steps, raw.elapsed_sec);
    let values = match raw.result {
        Ok(Some(values)) => values,
        Ok(None) => {
            return ExecOutcome::failure(
                ExecStatus::InvalidReturn,
                steps,
                elapsed,
                "generator finished without returning".to_string(),
            )
        }
        Err(halt) => return halted(halt, steps, elapsed),
    };
    if values.len() != 1 {
        return ExecOutcome::failure(
            ExecStatus::InvalidReturn,
            steps,
            elapsed,
            format!("generator must return a single slot map, got {} values", values.len()),
        );
    }
    match assignment_from_value(&values[0], slots) {
        Ok(assignment) => ExecOutcome {
            status: ExecStatus::Ok,
            value: Some(assignment),
            steps_used: steps,
            elapsed_sec: elapsed,
            error: None,
        },
        Err(message) => {
            ExecOutcome::failure(ExecStatus::InvalidReturn, steps, elapsed, message)
        }
    }
}

/// Run a verifier against an assignment.
pub fn run_verifier(
    program: &Program,
    assignment: &Assignment,
    budget: &Budget,
) -> ExecOutcome<Verdict> {
    if program.role != Role::Verifier {
        return ExecOutcome::failure(
            ExecStatus::RuntimeError,
            0,
            0.0,
            "program is not a verifier".to_string(),
        );
    }
    let param = assignment_to_value(assignment);
    let raw = interp::run_program(program, None, budget, Some(param));
    let (steps, elapsed) = (raw.steps, raw.elapsed_sec);
    let values = match raw.result {
        Ok(Some(values)) => values,
        Ok(None) => {
            return ExecOutcome::failure(
                ExecStatus::InvalidReturn,
                steps,
                elapsed,
                "verifier finished without returning".to_string(),
            )
        }
        Err(halt) => return halted(halt, steps, elapsed),
    };
    if values.len() != 2 {
        return ExecOutcome::failure(
            ExecStatus::InvalidReturn,
            steps,
            elapsed,
            format!("verifier must return (valid, answer), got {} values", values.len()),
        );
    }
    let valid = match &values[0] {
        Value::Bool(b) => *b,
        other => {
            return ExecOutcome::failure(
                ExecStatus::InvalidReturn,
                steps,
                elapsed,
                format!("verifier validity must be a boolean, got {}", other.type_name()),
            )
        }
    };
    let verdict = if valid {
        match answer_from_value(&values[1]) {
            Ok(answer) => Verdict { valid: true, answer: Some(answer) },
            Err(message) => {
                return ExecOutcome::failure(ExecStatus::InvalidReturn, steps, elapsed, message)
            }
        }
    } else {
        Verdict { valid: false, answer: None }
    };
    ExecOutcome {
        status: ExecStatus::Ok,
        value: Some(verdict),
        steps_used: steps,
        elapsed_sec: elapsed,
        error: None,
    }
}

fn halted<T>(halt: Halt, steps: u64, elapsed: f64) -> ExecOutcome<T> {
    match halt {
        Halt::Step => ExecOutcome::failure(
            ExecStatus::StepExhausted,
            steps,
            elapsed,
            "step budget exhausted".to_string(),
        ),
        Halt::Memory => ExecOutcome::failure(
            ExecStatus::MemoryExhausted,
            steps,
            elapsed,
            "memory budget exhausted".to_string(),
        ),
        Halt::Timeout => ExecOutcome::failure(
            ExecStatus::Timeout,
            steps,
            elapsed,
            "wall-clock budget exhausted".to_string(),
        ),
        Halt::Error(line, message) => ExecOutcome::failure(
            ExecStatus::RuntimeError,
            steps,
            elapsed,
            format!("line {line}: {message}"),
        ),
        Halt::Return(_) => unreachable!("return is handled before halt mapping"),
    }
}

/// Check a returned map against the slot schema and convert it.
fn assignment_from_value(value: &Value, slots: &[SlotSpec]) -> Result<Assignment, String> {
    let map = match value {
        Value::Map(m) => m,
        other => {
            return Err(format!(
                "generator must return a map of slot values, got {}",
                other.type_name()
            ))
        }
    };
    for key in map.keys() {
        if !slots.iter().any(|s| &s.name == key) {
            return Err(format!("returned key '{key}' is not a declared slot"));
        }
    }
    let mut assignment = Assignment::new();
    for slot in slots {
        let v = map
            .get(&slot.name)
            .ok_or_else(|| format!("slot '{}' missing from generator return", slot.name))?;
        let sv = slot_value_from(v, slot)?;
        assignment.insert(slot.name.clone(), sv);
    }
    Ok(assignment)
}

fn slot_value_from(value: &Value, slot: &SlotSpec) -> Result<SlotValue, String> {
    let sv = match (slot.kind, value) {
        (SlotKind::Int, Value::Int(v)) => SlotValue::Int(*v),
        (SlotKind::Rational, Value::Int(v)) => SlotValue::Rational(Rational::from_int(*v)),
        (SlotKind::Rational, Value::Rational(r)) => SlotValue::Rational(*r),
        (SlotKind::Real, Value::Int(v)) => SlotValue::Real(*v as f64),
        (SlotKind::Real, Value::Rational(r)) => SlotValue::Real(r.to_f64()),
        (SlotKind::Real, Value::Real(x)) => SlotValue::Real(*x),
        (SlotKind::Categorical, Value::Str(s)) => {
            if let Some(choices) = &slot.choices {
                if !choices.iter().any(|c| c.as_str() == s.as_ref()) {
                    return Err(format!(
                        "slot '{}': '{}' is not one of the declared choices",
                        slot.name, s
                    ));
                }
            }
            SlotValue::Str(s.to_string())
        }
        (kind, other) => {
            return Err(format!(
                "slot '{}' expects a {kind:?} value, got {}",
                slot.name,
                other.type_name()
            ))
        }
    };
    if let Some((lo, hi)) = slot.bounds {
        if let Some(x) = sv.numeric() {
            if x < lo || x > hi {
                return Err(format!(
                    "slot '{}': value {x} outside bounds [{lo}, {hi}]",
                    slot.name
                ));
            }
        }
    }
    Ok(sv)
}

fn assignment_to_value(assignment: &Assignment) -> Value {
    let map = assignment
        .entries
        .iter()
        .map(|(k, v)| (k.clone(), value_of_slot(v)))
        .collect::<std::collections::BTreeMap<_, _>>();
    Value::Map(std::rc::Rc::new(map))
}

fn value_of_slot(sv: &SlotValue) -> Value {
    match sv {
        SlotValue::Int(v) => Value::Int(*v),
        SlotValue::Rational(r) => Value::from_rational(*r),
        SlotValue::Real(x) => Value::Real(*x),
        SlotValue::Str(s) => Value::str(s),
    }
}

fn answer_from_value(value: &Value) -> Result<Answer, String> {
    match value {
        Value::Int(v) => Ok(Answer::from_int(*v)),
        Value::Rational(r) => {
            Ok(Answer { text: r.to_string(), numeric: Some(r.to_f64()) })
        }
        Value::Real(x) => Ok(Answer::from_real(*x)),
        Value::Str(s) => {
            normalize_answer(s).map_err(|_| "verifier produced an empty answer".to_string())
        }
        Value::None => Err("a valid verdict requires a non-empty answer".to_string()),
        other => Err(format!("unsupported answer type {}", other.type_name())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::speclang::parse_program;

    const GEN_SRC: &str = "\
def generator(rng):
    a = rng.randint(2, 20)
    b = rng.randint(2, 20)
    if a == b:
        if b == 20:
            b = 2
        else:
            b += 1
    c = rng.randint(1, 10)
    return {\"a\": a, \"b\": b, \"c\": c}
";

    const VER_SRC: &str = "\
def verifier(assign):
    a = assign[\"a\"]
    b = assign[\"b\"]
    c = assign[\"c\"]
    if a == b:
        return (False, None)
    return (True, a * b + c)
";

    fn slot(name: &str, kind: SlotKind, bounds: Option<(f64, f64)>) -> SlotSpec {
        SlotSpec {
            name: name.to_string(),
            kind,
            bounds,
            choices: None,
            description: String::new(),
            harder_than_seed: false,
        }
    }

    fn abc_slots() -> Vec<SlotSpec> {
        vec![
            slot("a", SlotKind::Int, Some((2.0, 20.0))),
            slot("b", SlotKind::Int, Some((2.0, 20.0))),
            slot("c", SlotKind::Int, Some((1.0, 10.0))),
        ]
    }

    fn gen_program(src: &str) -> Program {
        parse_program(src, Role::Generator).expect("generator parses")
    }

    fn ver_program(src: &str) -> Program {
        parse_program(src, Role::Verifier).expect("verifier parses")
    }

    fn int_assignment(pairs: &[(&str, i64)]) -> Assignment {
        let mut a = Assignment::new();
        for (k, v) in pairs {
            a.insert(k.to_string(), SlotValue::Int(*v));
        }
        a
    }

    /// Run a one-line verifier body and return the answer text.
    fn answer_of(expr: &str) -> String {
        let src = format!("def verifier(assign):\n    return (True, {expr})\n");
        let program = ver_program(&src);
        let out = run_verifier(&program, &Assignment::new(), &Budget::default());
        assert_eq!(out.status, ExecStatus::Ok, "{expr}: {:?}", out.error);
        out.value.unwrap().answer.unwrap().text
    }

    #[test]
    fn generator_matches_the_frozen_stream() {
        let program = gen_program(GEN_SRC);
        let out = run_generator(&program, 0, &Budget::default(), &abc_slots());
        assert_eq!(out.status, ExecStatus::Ok, "{:?}", out.error);
        let assignment = out.value.unwrap();
        // Frozen reference stream for seed 0: randint(2,20) twice gives
        // 13 then 8, and the third word under randint(1,10) gives 9.
        assert_eq!(assignment.get("a"), Some(&SlotValue::Int(13)));
        assert_eq!(assignment.get("b"), Some(&SlotValue::Int(8)));
        assert_eq!(assignment.get("c"), Some(&SlotValue::Int(9)));
    }

    #[test]
    fn generator_is_deterministic_and_seed_sensitive() {
        let program = gen_program(GEN_SRC);
        let slots = abc_slots();
        let a = run_generator(&program, 42, &Budget::default(), &slots);
        let b = run_generator(&program, 42, &Budget::default(), &slots);
        assert_eq!(a.value, b.value);
        assert_eq!(a.steps_used, b.steps_used);
        let c = run_generator(&program, 43, &Budget::default(), &slots);
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn generator_respects_bounds_across_many_seeds() {
        let program = gen_program(GEN_SRC);
        let slots = abc_slots();
        for seed in 0..200 {
            let out = run_generator(&program, seed, &Budget::default(), &slots);
            let assignment = out.value.expect("generator succeeds");
            let get = |k: &str| match assignment.get(k) {
                Some(SlotValue::Int(v)) => *v,
                other => panic!("unexpected {k}: {other:?}"),
            };
            let (a, b, c) = (get("a"), get("b"), get("c"));
            assert!((2..=20).contains(&a));
            assert!((2..=20).contains(&b));
            assert!((1..=10).contains(&c));
            assert_ne!(a, b, "seed {seed} produced a == b");
        }
    }

    #[test]
    fn verifier_answers_the_worked_example() {
        let program = ver_program(VER_SRC);
        let out = run_verifier(
            &program,
            &int_assignment(&[("a", 5), ("b", 4), ("c", 3)]),
            &Budget::default(),
        );
        assert_eq!(out.status, ExecStatus::Ok);
        let verdict = out.value.unwrap();
        assert!(verdict.valid);
        assert_eq!(verdict.answer.unwrap().text, "23");
    }

    #[test]
    fn verifier_rejects_the_degenerate_case() {
        let program = ver_program(VER_SRC);
        let out = run_verifier(
            &program,
            &int_assignment(&[("a", 7), ("b", 7), ("c", 1)]),
            &Budget::default(),
        );
        assert_eq!(out.status, ExecStatus::Ok);
        let verdict = out.value.unwrap();
        assert!(!verdict.valid);
        assert!(verdict.answer.is_none());
    }

    #[test]
    fn failed_verifier_assert_is_an_invalid_verdict() {
        let src = "\
def verifier(assign):
    assert assign[\"a\"] != assign[\"b\"]
    return (True, assign[\"a\"])
";
        let program = ver_program(src);
        let bad = run_verifier(
            &program,
            &int_assignment(&[("a", 3), ("b", 3)]),
            &Budget::default(),
        );
        assert_eq!(bad.status, ExecStatus::Ok);
        assert!(!bad.value.unwrap().valid);
        let good = run_verifier(
            &program,
            &int_assignment(&[("a", 3), ("b", 4)]),
            &Budget::default(),
        );
        assert!(good.value.unwrap().valid);
    }

    #[test]
    fn failed_generator_assert_is_a_runtime_error() {
        let src = "\
def generator(rng):
    x = rng.randint(1, 6)
    assert x > 6, \"impossible draw\"
    return {\"a\": x}
";
        let program = gen_program(src);
        let out = run_generator(
            &program,
            0,
            &Budget::default(),
            &[slot("a", SlotKind::Int, None)],
        );
        assert_eq!(out.status, ExecStatus::RuntimeError);
        let msg = out.error.unwrap();
        assert!(msg.contains("assertion failed"), "{msg}");
        assert!(msg.contains("impossible draw"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn step_budget_exhausts_at_exactly_the_limit() {
        let src = "\
def generator(rng):
    x = 0
    while True:
        x = x + 1
    return {\"a\": x}
";
        let program = gen_program(src);
        let budget = Budget { step_limit: 1_000, ..Budget::default() };
        let out = run_generator(&program, 0, &budget, &[slot("a", SlotKind::Int, None)]);
        assert_eq!(out.status, ExecStatus::StepExhausted);
        assert_eq!(out.steps_used, 1_000);
    }

    #[test]
    fn wall_clock_backstop_fires() {
        let src = "\
def generator(rng):
    x = 0
    while True:
        x = x + 1
    return {\"a\": x}
";
        let program = gen_program(src);
        let budget = Budget {
            step_limit: u64::MAX,
            memory_cells: u64::MAX,
            wall_clock_sec: 0.05,
        };
        let start = std::time::Instant::now();
        let out = run_generator(&program, 0, &budget, &[slot("a", SlotKind::Int, None)]);
        assert_eq!(out.status, ExecStatus::Timeout);
        assert!(start.elapsed().as_secs_f64() < 0.1 * 2.0 + 0.5, "backstop was late");
    }

    #[test]
    fn memory_budget_stops_list_growth() {
        let src = "\
def generator(rng):
    xs = [1]
    while True:
        xs = xs + [1]
    return {\"a\": xs[0]}
";
        let program = gen_program(src);
        let budget = Budget { memory_cells: 10_000, ..Budget::default() };
        let out = run_generator(&program, 0, &budget, &[slot("a", SlotKind::Int, None)]);
        assert_eq!(out.status, ExecStatus::MemoryExhausted);
    }

    #[test]
    fn memory_budget_stops_string_growth() {
        let src = "\
def generator(rng):
    s = \"xxxxxxxxxxxxxxxx\"
    while True:
        s = s + s
    return {\"a\": len(s)}
";
        let program = gen_program(src);
        let budget = Budget { memory_cells: 10_000, ..Budget::default() };
        let out = run_generator(&program, 0, &budget, &[slot("a", SlotKind::Int, None)]);
        assert_eq!(out.status, ExecStatus::MemoryExhausted);
    }

    #[test]
    fn integer_overflow_is_a_runtime_error() {
        let src = "\
def generator(rng):
    x = 9223372036854775807
    return {\"a\": x + 1}
";
        let program = gen_program(src);
        let out = run_generator(&program, 0, &Budget::default(), &[slot("a", SlotKind::Int, None)]);
        assert_eq!(out.status, ExecStatus::RuntimeError);
        let msg = out.error.unwrap();
        assert!(msg.contains("integer overflow"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn division_follows_exact_semantics() {
        assert_eq!(answer_of("7 / 2"), "7/2");
        assert_eq!(answer_of("8 / 2"), "4");
        assert_eq!(answer_of("(0 - 7) // 2"), "-4");
        assert_eq!(answer_of("(0 - 7) % 3"), "2");
        assert_eq!(answer_of("7 % (0 - 3)"), "-2");
        assert_eq!(answer_of("fraction(1, 3) + fraction(1, 6)"), "1/2");
        assert_eq!(answer_of("fraction(2, 3) ** 2"), "4/9");
        assert_eq!(answer_of("2 ** (0 - 2)"), "1/4");
        assert_eq!(answer_of("(1 / 3) * 3"), "1");
    }

    #[test]
    fn rounding_is_half_to_even() {
        assert_eq!(answer_of("round(2.5)"), "2");
        assert_eq!(answer_of("round(3.5)"), "4");
        assert_eq!(answer_of("round(7 / 2)"), "4");
        assert_eq!(answer_of("round(5 / 2)"), "2");
        assert_eq!(answer_of("round(0 - 5, 0 - 1)"), "0");
        assert_eq!(answer_of("round(2.675, 2)"), "2.67");
    }

    #[test]
    fn division_by_zero_is_a_runtime_error() {
        let src = "def verifier(assign):\n    return (True, 1 / 0)\n";
        let program = ver_program(src);
        let out = run_verifier(&program, &Assignment::new(), &Budget::default());
        assert_eq!(out.status, ExecStatus::RuntimeError);
        assert!(out.error.unwrap().contains("division by zero"));
    }

    #[test]
    fn sqrt_of_negative_is_a_domain_error() {
        let src = "def verifier(assign):\n    return (True, sqrt(0 - 1))\n";
        let program = ver_program(src);
        let out = run_verifier(&program, &Assignment::new(), &Budget::default());
        assert_eq!(out.status, ExecStatus::RuntimeError);
        assert!(out.error.unwrap().contains("math domain error"));
    }

    #[test]
    fn generator_return_shape_is_validated() {
        let cases: &[(&str, &str)] = &[
            ("def generator(rng):\n    return {\"a\": 1}\n", "'b' missing"),
            (
                "def generator(rng):\n    return {\"a\": 1, \"b\": 2, \"c\": 3}\n",
                "not a declared slot",
            ),
            ("def generator(rng):\n    return {\"a\": 1.5, \"b\": 2}\n", "expects a Int"),
            ("def generator(rng):\n    return {\"a\": 99, \"b\": 2}\n", "outside bounds"),
        ];
        let slots = vec![
            slot("a", SlotKind::Int, Some((0.0, 10.0))),
            slot("b", SlotKind::Int, None),
        ];
        for (src, needle) in cases {
            let program = gen_program(src);
            let out = run_generator(&program, 0, &Budget::default(), &slots);
            assert_eq!(out.status, ExecStatus::InvalidReturn, "{src}");
            let msg = out.error.unwrap();
            assert!(msg.contains(needle), "{src} -> {msg}");
        }
    }

    #[test]
    fn slot_kind_coercions_hold() {
        let src = "\
def generator(rng):
    return {\"r\": 1 / 2, \"x\": 3, \"tag\": \"fast\"}
";
        let slots = vec![
            slot("r", SlotKind::Rational, None),
            slot("x", SlotKind::Real, None),
            SlotSpec {
                name: "tag".to_string(),
                kind: SlotKind::Categorical,
                bounds: None,
                choices: Some(vec!["fast".to_string(), "slow".to_string()]),
                description: String::new(),
                harder_than_seed: false,
            },
        ];
        let program = gen_program(src);
        let out = run_generator(&program, 0, &Budget::default(), &slots);
        assert_eq!(out.status, ExecStatus::Ok, "{:?}", out.error);
        let assignment = out.value.unwrap();
        assert_eq!(
            assignment.get("r"),
            Some(&SlotValue::Rational(Rational::new(1, 2).unwrap()))
        );
        assert_eq!(assignment.get("x"), Some(&SlotValue::Real(3.0)));
        assert_eq!(assignment.get("tag"), Some(&SlotValue::Str("fast".to_string())));
    }

    #[test]
    fn categorical_outside_choices_is_rejected() {
        let src = "def generator(rng):\n    return {\"tag\": \"medium\"}\n";
        let slots = vec![SlotSpec {
            name: "tag".to_string(),
            kind: SlotKind::Categorical,
            bounds: None,
            choices: Some(vec!["fast".to_string(), "slow".to_string()]),
            description: String::new(),
            harder_than_seed: false,
        }];
        let program = gen_program(src);
        let out = run_generator(&program, 0, &Budget::default(), &slots);
        assert_eq!(out.status, ExecStatus::InvalidReturn);
        assert!(out.error.unwrap().contains("declared choices"));
    }

    #[test]
    fn verifier_return_shape_is_validated() {
        let cases: &[(&str, &str)] = &[
            ("def verifier(assign):\n    return True\n", "got 1 values"),
            ("def verifier(assign):\n    return (1, 2)\n", "must be a boolean"),
            ("def verifier(assign):\n    return (True, None)\n", "requires a non-empty answer"),
            ("def verifier(assign):\n    return (True, [1, 2])\n", "unsupported answer type"),
        ];
        for (src, needle) in cases {
            let program = ver_program(src);
            let out = run_verifier(&program, &Assignment::new(), &Budget::default());
            assert_eq!(out.status, ExecStatus::InvalidReturn, "{src}");
            let msg = out.error.unwrap();
            assert!(msg.contains(needle), "{src} -> {msg}");
        }
    }

    #[test]
    fn string_answers_are_normalized() {
        assert_eq!(answer_of("\" 42 \""), "42");
        assert_eq!(answer_of("str(6 * 7)"), "42");
    }

    #[test]
    fn rng_is_unavailable_to_verifiers_at_runtime() {
        // The static checker flags this too; the runtime guard is the
        // second line of defense for programs that skip checking.
        let src = "def verifier(assign):\n    return (True, rng.randint(1, 2))\n";
        let program = ver_program(src);
        let out = run_verifier(&program, &Assignment::new(), &Budget::default());
        assert_eq!(out.status, ExecStatus::RuntimeError);
        assert!(out.error.unwrap().contains("not available"));
    }

    #[test]
    fn shuffle_and_choice_follow_the_frozen_stream() {
        let src = "\
def generator(rng):
    xs = [1, 2, 3]
    rng.shuffle(xs)
    return {\"a\": xs[0], \"b\": xs[1], \"c\": xs[2]}
";
        let program = gen_program(src);
        let slots = vec![
            slot("a", SlotKind::Int, None),
            slot("b", SlotKind::Int, None),
            slot("c", SlotKind::Int, None),
        ];
        let out = run_generator(&program, 0, &Budget::default(), &slots);
        let assignment = out.value.expect("shuffle generator succeeds");
        // Seed 0 shuffles [1, 2, 3] into [2, 1, 3] (frozen reference).
        assert_eq!(assignment.get("a"), Some(&SlotValue::Int(2)));
        assert_eq!(assignment.get("b"), Some(&SlotValue::Int(1)));
        assert_eq!(assignment.get("c"), Some(&SlotValue::Int(3)));
    }

    #[test]
    fn generator_with_rng_leaves_the_stream_usable() {
        let src = "def generator(rng):\n    return {\"a\": rng.randint(2, 20)}\n";
        let program = gen_program(src);
        let mut rng = SpecRng::seed(0);
        let out = run_generator_with_rng(
            &program,
            &mut rng,
            &Budget::default(),
            &[slot("a", SlotKind::Int, None)],
        );
        assert_eq!(out.status, ExecStatus::Ok);
        // First draw was 13; the follow-up draw continues the stream (8).
        assert_eq!(rng.randint(2, 20).unwrap(), 8);
    }

    #[test]
    fn loops_and_builtins_compose() {
        let src = "\
def verifier(assign):
    total = 0
    for i in range(1, 11):
        total += i * i
    assert total == 385
    return (True, gcd(total, 100) + max([1, 7, 5]) + len(\"abc\"))
";
        assert_eq!(
            run_verifier(&ver_program(src), &Assignment::new(), &Budget::default())
                .value
                .unwrap()
                .answer
                .unwrap()
                .text,
            "15"
        );
    }

    #[test]
    fn comparison_chains_evaluate_each_operand_once() {
        let src = "\
def generator(rng):
    a = rng.randint(1, 100)
    ok = 0
    if 1 <= a <= 100:
        ok = 1
    return {\"a\": ok}
";
        let program = gen_program(src);
        let out = run_generator(&program, 7, &Budget::default(), &[slot("a", SlotKind::Int, None)]);
        assert_eq!(out.value.unwrap().get("a"), Some(&SlotValue::Int(1)));
    }

    #[test]
    fn budget_comes_from_config() {
        let cfg = GenerationConfig { step_budget: 123, ..GenerationConfig::default() };
        let budget = Budget::from(&cfg);
        assert_eq!(budget.step_limit, 123);
        assert_eq!(budget.memory_cells, 1_000_000);
        assert!((budget.wall_clock_sec - 300.0).abs() < 1e-12);
    }
}
