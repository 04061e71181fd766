//! Parsers for the three reply shapes the pipeline receives: teacher
//! payloads (JSON, possibly wrapped in prose or code fences), judge
//! verdicts (free text with a final True/False line), and student answers
//! (free text with a boxed or trailing numeric answer).

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde_json::Value;

use crate::model::{normalize_answer, Answer, Rational, SeedProblem, SlotKind, SlotValue};
use crate::oracles::{
    OracleError, PayloadSlot, ProgramSource, TeacherPayload, PROGRAM_FORMAT_TAG,
};

/// Find the first substring of `raw` that parses as a JSON object. Prose,
/// code fences, and stray brace groups (like template placeholders) before
/// the object are tolerated.
pub fn extract_first_json_object(raw: &str) -> Result<Value, OracleError> {
    let bytes = raw.as_bytes();
    for (start, _) in raw.char_indices().filter(|(_, c)| *c == '{') {
        let mut depth = 0usize;
        let mut in_string = false;
        let mut escaped = false;
        let mut end = None;
        for (offset, b) in bytes[start..].iter().enumerate() {
            if escaped {
                escaped = false;
                continue;
            }
            match *b {
                b'\\' if in_string => escaped = true,
                b'"' => in_string = !in_string,
                b'{' if !in_string => depth += 1,
                b'}' if !in_string => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(start + offset + 1);
                        break;
                    }
                }
                _ => {}
            }
        }
        if let Some(end) = end {
            if let Ok(value) = serde_json::from_str::<Value>(&raw[start..end]) {
                if value.is_object() {
                    return Ok(value);
                }
            }
        }
    }
    Err(OracleError::NotJson)
}

/// Read one payload value into a slot value. Accepts bare JSON scalars
/// (the shape teachers write), `[p, q]` pairs and `"p/q"` strings for
/// rationals, and the tagged form this crate serializes.
pub fn slot_value_from_json(value: &Value) -> Option<SlotValue> {
    match value {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Some(SlotValue::Int(i))
            } else {
                n.as_f64().map(SlotValue::Real)
            }
        }
        Value::String(s) => {
            static FRAC: OnceLock<Regex> = OnceLock::new();
            let frac = FRAC.get_or_init(|| Regex::new(r"^([+-]?[0-9]+)/([0-9]+)$").unwrap());
            if let Some(caps) = frac.captures(s) {
                let p = caps[1].parse::<i64>().ok()?;
                let q = caps[2].parse::<i64>().ok()?;
                return Rational::new(p, q).ok().map(SlotValue::Rational);
            }
            Some(SlotValue::Str(s.clone()))
        }
        Value::Array(items) => {
            if let [Value::Number(p), Value::Number(q)] = items.as_slice() {
                let (p, q) = (p.as_i64()?, q.as_i64()?);
                return Rational::new(p, q).ok().map(SlotValue::Rational);
            }
            None
        }
        Value::Object(_) => serde_json::from_value(value.clone()).ok(),
        _ => None,
    }
}

fn str_field(obj: &serde_json::Map<String, Value>, name: &str) -> Option<String> {
    obj.get(name).and_then(Value::as_str).map(str::to_string)
}

fn program_block(
    obj: &serde_json::Map<String, Value>,
    name: &str,
    missing: &mut Vec<String>,
) -> Option<ProgramSource> {
    let Some(block) = obj.get(name).and_then(Value::as_object) else {
        missing.push(name.to_string());
        return None;
    };
    let Some(code) = str_field(block, "code") else {
        missing.push(format!("{name}.code"));
        return None;
    };
    let format = str_field(block, "type").unwrap_or_default();
    Some(ProgramSource { format, code })
}

fn payload_slots(
    obj: &serde_json::Map<String, Value>,
    missing: &mut Vec<String>,
) -> BTreeMap<String, PayloadSlot> {
    let mut slots = BTreeMap::new();
    let Some(raw) = obj.get("slots").and_then(Value::as_object) else {
        missing.push("slots".to_string());
        return slots;
    };
    for (name, decl) in raw {
        let Some(decl) = decl.as_object() else {
            missing.push(format!("slots.{name}"));
            continue;
        };
        let kind = decl
            .get("kind")
            .cloned()
            .and_then(|k| serde_json::from_value::<SlotKind>(k).ok());
        let Some(kind) = kind else {
            missing.push(format!("slots.{name}.kind"));
            continue;
        };
        let bounds = match decl.get("bounds") {
            None | Some(Value::Null) => None,
            Some(v) => match serde_json::from_value::<(f64, f64)>(v.clone()) {
                Ok(b) => Some(b),
                Err(_) => {
                    missing.push(format!("slots.{name}.bounds"));
                    continue;
                }
            },
        };
        let choices = match decl.get("choices") {
            None | Some(Value::Null) => None,
            Some(v) => match serde_json::from_value::<Vec<String>>(v.clone()) {
                Ok(c) => Some(c),
                Err(_) => {
                    missing.push(format!("slots.{name}.choices"));
                    continue;
                }
            },
        };
        slots.insert(
            name.clone(),
            PayloadSlot {
                kind,
                bounds,
                choices,
                description: str_field(decl, "description").unwrap_or_default(),
                harder_than_seed: decl
                    .get("harder_than_seed")
                    .and_then(Value::as_bool)
                    .unwrap_or(false),
            },
        );
    }
    slots
}

/// Parse a raw teacher reply into a payload. The first JSON object found in
/// the text is used; required fields are validated; program-format tags must
/// match; `meta.seed_id` is bound to the seed.
pub fn parse_teacher_payload(raw: &str, seed: &SeedProblem) -> Result<TeacherPayload, OracleError> {
    let value = extract_first_json_object(raw)?;
    let obj = value.as_object().expect("extraction yields objects");

    let mut missing = Vec::new();
    let language_wrapper = str_field(obj, "language_wrapper");
    if language_wrapper.is_none() {
        missing.push("language_wrapper".to_string());
    }
    let slots = payload_slots(obj, &mut missing);
    let generator = program_block(obj, "generator", &mut missing);
    let verifier = program_block(obj, "verifier", &mut missing);
    let hardness_rationale = str_field(obj, "hardness_rationale");
    if hardness_rationale.is_none() {
        missing.push("hardness_rationale".to_string());
    }
    let base_assignment = match obj.get("base_assignment") {
        None | Some(Value::Null) => None,
        Some(Value::Object(entries)) => {
            Some(entries.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
        }
        Some(_) => {
            missing.push("base_assignment".to_string());
            None
        }
    };
    let carriers = match obj.get("carriers") {
        None | Some(Value::Null) => None,
        Some(v) => match serde_json::from_value::<Vec<String>>(v.clone()) {
            Ok(c) => Some(c),
            Err(_) => {
                missing.push("carriers".to_string());
                None
            }
        },
    };
    if !missing.is_empty() {
        return Err(OracleError::MissingRequiredFields(missing));
    }
    let (generator, verifier) = (generator.unwrap(), verifier.unwrap());
    for program in [&generator, &verifier] {
        if program.format != PROGRAM_FORMAT_TAG {
            return Err(OracleError::WrongProgramType(program.format.clone()));
        }
    }

    let mut meta: BTreeMap<String, Value> = match obj.get("meta") {
        Some(Value::Object(entries)) => {
            entries.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
        }
        _ => BTreeMap::new(),
    };
    meta.insert("seed_id".to_string(), Value::String(seed.id.clone()));

    Ok(TeacherPayload {
        language_wrapper: language_wrapper.unwrap(),
        slots,
        generator,
        verifier,
        hardness_rationale: hardness_rationale.unwrap(),
        notes: str_field(obj, "notes"),
        meta,
        base_assignment,
        carriers,
    })
}

/// The last nonempty line, trimmed, must be exactly `True` or `False`.
pub fn parse_judge_verdict(raw: &str) -> Result<bool, OracleError> {
    let line = raw
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .ok_or_else(|| OracleError::MalformedVerdict(raw.trim().to_string()))?;
    match line {
        "True" => Ok(true),
        "False" => Ok(false),
        other => Err(OracleError::MalformedVerdict(other.to_string())),
    }
}

fn last_boxed(raw: &str) -> Option<String> {
    let mut found = None;
    let mut search = 0;
    while let Some(pos) = raw[search..].find("\\boxed{") {
        let open = search + pos + "\\boxed{".len() - 1;
        let mut depth = 0usize;
        for (offset, c) in raw[open..].char_indices() {
            match c {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        found = Some(raw[open + 1..open + offset].to_string());
                        break;
                    }
                }
                _ => {}
            }
        }
        search = open + 1;
    }
    found
}

fn last_numeric_token(raw: &str) -> Option<&str> {
    static TOKEN: OnceLock<Regex> = OnceLock::new();
    let token = TOKEN.get_or_init(|| Regex::new(r"[+-]?[0-9]+(?:/[0-9]+|\.[0-9]+)?").unwrap());
    token.find_iter(raw).last().map(|m| m.as_str())
}

/// Extract a final answer from free-form student text: the last
/// `\boxed{…}` wins, then the last numeric token (decimal or `p/q`), and
/// otherwise the trimmed raw text stands as a non-numeric answer.
pub fn parse_student_answer(raw: &str) -> Answer {
    if let Some(inner) = last_boxed(raw) {
        if let Ok(answer) = normalize_answer(&inner) {
            return answer;
        }
    }
    if let Some(token) = last_numeric_token(raw) {
        if let Ok(answer) = normalize_answer(token) {
            return answer;
        }
    }
    normalize_answer(raw).unwrap_or(Answer { text: String::new(), numeric: None })
}
