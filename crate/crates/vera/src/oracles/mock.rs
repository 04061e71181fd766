//! Deterministic, network-free oracle implementations. They make the whole
//! pipeline reproducible on a desk: scripted teachers replay canned
//! payloads, mock judges consult a noted reference answer instead of a
//! model, and scripted students answer from a table.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

use crate::model::{answers_match, Answer, Mode, SeedProblem};
use crate::oracles::{
    JudgeOracle, OracleError, RankerCandidate, RankerOracle, StudentOracle, TeacherOracle,
};

/// Replays canned raw replies per seed, in order, repeating the last one
/// once the script runs out.
pub struct ScriptedTeacher {
    scripts: BTreeMap<String, Vec<String>>,
    cursor: Mutex<BTreeMap<String, usize>>,
}

impl ScriptedTeacher {
    pub fn new(scripts: BTreeMap<String, Vec<String>>) -> Self {
        ScriptedTeacher { scripts, cursor: Mutex::new(BTreeMap::new()) }
    }

    /// One reply for one seed.
    pub fn single(seed_id: &str, reply: &str) -> Self {
        Self::new(BTreeMap::from([(seed_id.to_string(), vec![reply.to_string()])]))
    }

    /// Load scripts from a JSON file shaped `{seed_id: [reply, ...]}`.
    /// Replies may be raw strings or payload objects (serialized verbatim).
    pub fn from_file(path: &Path) -> Result<Self, OracleError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OracleError::Unavailable(format!("{}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| OracleError::Unavailable(format!("{}: {e}", path.display())))?;
        let obj = value.as_object().ok_or(OracleError::NotJson)?;
        let mut scripts = BTreeMap::new();
        for (seed_id, entries) in obj {
            let list = entries.as_array().ok_or(OracleError::NotJson)?;
            let replies = list
                .iter()
                .map(|entry| match entry {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            scripts.insert(seed_id.clone(), replies);
        }
        Ok(Self::new(scripts))
    }
}

impl TeacherOracle for ScriptedTeacher {
    fn propose(
        &self,
        seed: &SeedProblem,
        _mode: Mode,
        _feedback: Option<&str>,
    ) -> Result<String, OracleError> {
        let script = self
            .scripts
            .get(&seed.id)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| OracleError::Unavailable(format!("no script for seed '{}'", seed.id)))?;
        let mut cursor = self.cursor.lock().expect("cursor poisoned");
        let index = cursor.entry(seed.id.clone()).or_insert(0);
        let reply = script[(*index).min(script.len() - 1)].clone();
        *index += 1;
        Ok(reply)
    }
}

/// Replies with confident prose and no JSON, every time.
pub struct GarbageTeacher;

impl TeacherOracle for GarbageTeacher {
    fn propose(
        &self,
        _seed: &SeedProblem,
        _mode: Mode,
        _feedback: Option<&str>,
    ) -> Result<String, OracleError> {
        Ok("I believe the answer is probably 42, but writing a generator sounds hard. Good luck!"
            .to_string())
    }
}

/// Calls True exactly when the candidate matches the noted reference.
pub struct PerfectJudge {
    memo: Mutex<BTreeMap<String, Answer>>,
}

impl PerfectJudge {
    pub fn new() -> Self {
        PerfectJudge { memo: Mutex::new(BTreeMap::new()) }
    }
}

impl Default for PerfectJudge {
    fn default() -> Self {
        Self::new()
    }
}

impl JudgeOracle for PerfectJudge {
    fn note_reference(&self, question: &str, correct: &Answer) {
        self.memo.lock().expect("memo poisoned").insert(question.to_string(), correct.clone());
    }

    fn judge(&self, question: &str, candidate: &Answer) -> Result<bool, OracleError> {
        let memo = self.memo.lock().expect("memo poisoned");
        let correct = memo
            .get(question)
            .ok_or_else(|| OracleError::Unavailable("no reference noted for question".into()))?;
        Ok(answers_match(candidate, correct, 1e-9))
    }
}

/// Rubber stamp: every candidate is True.
pub struct AlwaysTrueJudge;

impl JudgeOracle for AlwaysTrueJudge {
    fn judge(&self, _question: &str, _candidate: &Answer) -> Result<bool, OracleError> {
        Ok(true)
    }
}

/// Cannot tell small perturbations apart: True whenever the candidate is
/// within `eps` of the noted reference (exact text match when either side
/// is non-numeric).
pub struct NoiseBlindJudge {
    eps: f64,
    memo: Mutex<BTreeMap<String, Answer>>,
}

impl NoiseBlindJudge {
    pub fn new(eps: f64) -> Self {
        NoiseBlindJudge { eps, memo: Mutex::new(BTreeMap::new()) }
    }
}

impl JudgeOracle for NoiseBlindJudge {
    fn note_reference(&self, question: &str, correct: &Answer) {
        self.memo.lock().expect("memo poisoned").insert(question.to_string(), correct.clone());
    }

    fn judge(&self, question: &str, candidate: &Answer) -> Result<bool, OracleError> {
        let memo = self.memo.lock().expect("memo poisoned");
        let correct = memo
            .get(question)
            .ok_or_else(|| OracleError::Unavailable("no reference noted for question".into()))?;
        match (candidate.numeric, correct.numeric) {
            (Some(c), Some(r)) => Ok((c - r).abs() <= self.eps),
            _ => Ok(candidate.text.trim() == correct.text.trim()),
        }
    }
}

/// Transport that never succeeds; exercises error paths.
pub struct FailingJudge;

impl JudgeOracle for FailingJudge {
    fn judge(&self, _question: &str, _candidate: &Answer) -> Result<bool, OracleError> {
        Err(OracleError::Unavailable("judge offline".to_string()))
    }
}

/// Answers from a table keyed by item, with one entry per run (the last
/// entry repeats when runs exceed the script).
pub struct ScriptedStudent {
    scripts: BTreeMap<String, Vec<String>>,
}

impl ScriptedStudent {
    pub fn new(scripts: BTreeMap<String, Vec<String>>) -> Self {
        ScriptedStudent { scripts }
    }

    /// Load scripts from a JSON file shaped `{item_id: reply | [reply, ...]}`.
    pub fn from_file(path: &Path) -> Result<Self, OracleError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OracleError::Unavailable(format!("{}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| OracleError::Unavailable(format!("{}: {e}", path.display())))?;
        let obj = value.as_object().ok_or(OracleError::NotJson)?;
        let mut scripts = BTreeMap::new();
        for (item_id, entry) in obj {
            let replies = match entry {
                serde_json::Value::String(s) => vec![s.clone()],
                serde_json::Value::Array(list) => list
                    .iter()
                    .map(|v| match v {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect(),
                other => vec![other.to_string()],
            };
            scripts.insert(item_id.clone(), replies);
        }
        Ok(Self::new(scripts))
    }
}

impl StudentOracle for ScriptedStudent {
    fn answer(&self, item_id: &str, run: u32, _question: &str) -> Result<String, OracleError> {
        let script = self
            .scripts
            .get(item_id)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| OracleError::Unavailable(format!("no script for item '{item_id}'")))?;
        let index = (run.max(1) as usize - 1).min(script.len() - 1);
        Ok(script[index].clone())
    }
}

/// Gives the same reply to every question.
pub struct ConstantStudent {
    pub text: String,
}

impl ConstantStudent {
    pub fn new(text: &str) -> Self {
        ConstantStudent { text: text.to_string() }
    }
}

impl StudentOracle for ConstantStudent {
    fn answer(&self, _item_id: &str, _run: u32, _question: &str) -> Result<String, OracleError> {
        Ok(self.text.clone())
    }
}

/// Always names the same variant id, whether or not it exists.
pub struct ScriptedRanker {
    reply: String,
}

impl ScriptedRanker {
    pub fn new(reply: &str) -> Self {
        ScriptedRanker { reply: reply.to_string() }
    }
}

impl RankerOracle for ScriptedRanker {
    fn hardest(&self, _members: &[RankerCandidate]) -> Result<String, OracleError> {
        Ok(self.reply.clone())
    }
}

/// Deterministic difficulty heuristic: the longest question text wins, with
/// ties broken toward the smallest id.
pub struct LongestRanker;

impl RankerOracle for LongestRanker {
    fn hardest(&self, members: &[RankerCandidate]) -> Result<String, OracleError> {
        members
            .iter()
            .max_by(|a, b| a.text.len().cmp(&b.text.len()).then_with(|| b.id.cmp(&a.id)))
            .map(|m| m.id.clone())
            .ok_or_else(|| OracleError::Unavailable("empty candidate pool".to_string()))
    }
}
