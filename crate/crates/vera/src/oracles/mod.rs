//! The four oracle roles the pipeline talks to — Teacher, Judge, Student,
//! and Ranker — plus payload/verdict/answer parsing, prompt construction,
//! a retrying HTTP client, and fully deterministic mock implementations.

mod parse;
mod prompts;
mod remote;

pub mod mock;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Answer, Mode, SeedProblem, SlotKind, SlotSpec};

pub use parse::{
    extract_first_json_object, parse_judge_verdict, parse_student_answer, parse_teacher_payload,
    slot_value_from_json,
};
pub use prompts::{build_judge_prompt, build_ranker_prompt, build_teacher_prompt};
pub use remote::{
    remote_oracle_call, HttpTransport, RemoteJudge, RemoteRanker, RemoteStudent, RemoteTeacher,
    Transport,
};

/// Program-format tag every teacher payload must carry on its generator and
/// verifier blocks.
pub const PROGRAM_FORMAT_TAG: &str = "speclang-v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("no JSON object found in the reply")]
    NotJson,
    #[error("Missing required fields: {}", .0.join(", "))]
    MissingRequiredFields(Vec<String>),
    #[error("program type must be 'speclang-v1', got '{0}'")]
    WrongProgramType(String),
    #[error("malformed judge verdict: {0:?}")]
    MalformedVerdict(String),
    #[error("oracle unavailable: {0}")]
    Unavailable(String),
}

/// One program block inside a teacher payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramSource {
    #[serde(rename = "type")]
    pub format: String,
    pub code: String,
}

/// Slot declaration as it appears in payload JSON (the slot name is the map
/// key, so it is not repeated inside).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayloadSlot {
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

/// Structured teacher reply: a template, slot declarations, a generator and
/// a verifier program, and the rationale. Equivalent-mode payloads also
/// carry the base assignment that reproduces the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeacherPayload {
    pub language_wrapper: String,
    pub slots: BTreeMap<String, PayloadSlot>,
    pub generator: ProgramSource,
    pub verifier: ProgramSource,
    pub hardness_rationale: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_assignment: Option<BTreeMap<String, serde_json::Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carriers: Option<Vec<String>>,
}

impl TeacherPayload {
    /// Slot declarations in model form, named after their map keys.
    pub fn slot_specs(&self) -> Vec<SlotSpec> {
        self.slots
            .iter()
            .map(|(name, slot)| SlotSpec {
                name: name.clone(),
                kind: slot.kind,
                bounds: slot.bounds,
                choices: slot.choices.clone(),
                description: slot.description.clone(),
                harder_than_seed: slot.harder_than_seed,
            })
            .collect()
    }
}

/// Connection settings for a remote oracle service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleEndpoint {
    pub base_url: String,
    pub model_name: String,
    pub timeout_sec: f64,
    pub max_retries: u32,
    pub backoff_initial_sec: f64,
    pub backoff_multiplier: f64,
}

impl Default for OracleEndpoint {
    fn default() -> Self {
        OracleEndpoint {
            base_url: "http://localhost:8000/v1".to_string(),
            model_name: "oracle".to_string(),
            timeout_sec: 120.0,
            max_retries: 3,
            backoff_initial_sec: 0.5,
            backoff_multiplier: 2.0,
        }
    }
}

impl OracleEndpoint {
    pub fn validate(&self) -> Result<(), OracleError> {
        if !(self.timeout_sec > 0.0) {
            return Err(OracleError::Unavailable("endpoint timeout must be positive".into()));
        }
        if self.backoff_initial_sec < 0.0 || self.backoff_multiplier < 1.0 {
            return Err(OracleError::Unavailable("endpoint backoff is malformed".into()));
        }
        Ok(())
    }
}

/// Proposes executable specifications for a seed problem. Implementations
/// return the raw reply text; callers parse it with [`parse_teacher_payload`].
pub trait TeacherOracle: Send + Sync {
    fn propose(
        &self,
        seed: &SeedProblem,
        mode: Mode,
        feedback: Option<&str>,
    ) -> Result<String, OracleError>;
}

/// Calls a candidate answer True or False for a question. The
/// `note_reference` hook hands mock judges the ground truth; remote judges
/// ignore it.
pub trait JudgeOracle: Send + Sync {
    fn note_reference(&self, _question: &str, _correct: &Answer) {}

    fn judge(&self, question: &str, candidate: &Answer) -> Result<bool, OracleError>;
}

/// Answers questions. `item_id` and `run` form a deterministic request tag
/// so repeated evaluations are comparable.
pub trait StudentOracle: Send + Sync {
    fn answer(&self, item_id: &str, run: u32, question: &str) -> Result<String, OracleError>;
}

/// One entry in a hardest-variant ranking request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankerCandidate {
    pub id: String,
    pub text: String,
}

/// Orders already-verified variants by difficulty and names the hardest.
pub trait RankerOracle: Send + Sync {
    fn hardest(&self, members: &[RankerCandidate]) -> Result<String, OracleError>;
}
