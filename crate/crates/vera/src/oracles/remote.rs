//! Remote oracle plumbing: a retrying call wrapper over a pluggable
//! transport, an HTTP chat transport with a concurrency cap, and the four
//! remote oracle roles built on top of it.

use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::Duration;

use crate::model::{Answer, Mode, SeedProblem};
use crate::oracles::{
    build_judge_prompt, build_ranker_prompt, build_teacher_prompt, extract_first_json_object,
    parse_judge_verdict, JudgeOracle, OracleEndpoint, OracleError, RankerCandidate, RankerOracle,
    StudentOracle, TeacherOracle,
};

/// Environment variable holding the bearer token for the HTTP transport.
pub const API_KEY_ENV: &str = "VERA_API_KEY";

/// Sends one prompt to a remote service and returns the raw reply text.
pub trait Transport: Send + Sync {
    fn send(&self, endpoint: &OracleEndpoint, prompt: &str) -> Result<String, OracleError>;
}

/// Issue a prompt with retries. After a failed attempt the call sleeps for
/// the endpoint's current backoff and the backoff grows geometrically; the
/// total number of attempts is `max_retries + 1`.
pub fn remote_oracle_call(
    endpoint: &OracleEndpoint,
    transport: &dyn Transport,
    prompt: &str,
) -> Result<String, OracleError> {
    endpoint.validate()?;
    let mut backoff = endpoint.backoff_initial_sec;
    let mut last_error = String::new();
    for attempt in 0..=endpoint.max_retries {
        if attempt > 0 {
            if backoff > 0.0 {
                thread::sleep(Duration::from_secs_f64(backoff));
            }
            backoff *= endpoint.backoff_multiplier;
        }
        match transport.send(endpoint, prompt) {
            Ok(reply) => return Ok(reply),
            Err(err) => last_error = err.to_string(),
        }
    }
    Err(OracleError::Unavailable(format!(
        "gave up after {} attempts: {last_error}",
        endpoint.max_retries + 1
    )))
}

struct InFlightGate {
    permits: Mutex<usize>,
    freed: Condvar,
}

impl InFlightGate {
    fn new(cap: usize) -> Self {
        InFlightGate { permits: Mutex::new(cap.max(1)), freed: Condvar::new() }
    }

    fn acquire(&self) -> InFlightPermit<'_> {
        let mut permits = self.permits.lock().expect("gate poisoned");
        while *permits == 0 {
            permits = self.freed.wait(permits).expect("gate poisoned");
        }
        *permits -= 1;
        InFlightPermit { gate: self }
    }
}

struct InFlightPermit<'a> {
    gate: &'a InFlightGate,
}

impl Drop for InFlightPermit<'_> {
    fn drop(&mut self) {
        *self.gate.permits.lock().expect("gate poisoned") += 1;
        self.gate.freed.notify_one();
    }
}

/// Provider-agnostic chat transport: one user message per prompt, JSON in
/// and out, at most `max_in_flight` concurrent requests. The API key is
/// read from `VERA_API_KEY` when present.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    api_key: Option<String>,
    gate: InFlightGate,
}

impl HttpTransport {
    pub fn new(max_in_flight: usize) -> Result<Self, OracleError> {
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| OracleError::Unavailable(e.to_string()))?;
        Ok(HttpTransport {
            client,
            api_key: std::env::var(API_KEY_ENV).ok(),
            gate: InFlightGate::new(max_in_flight),
        })
    }
}

impl Transport for HttpTransport {
    fn send(&self, endpoint: &OracleEndpoint, prompt: &str) -> Result<String, OracleError> {
        let _permit = self.gate.acquire();
        let url = format!("{}/chat/completions", endpoint.base_url.trim_end_matches('/'));
        let body = serde_json::json!({
            "model": endpoint.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0.0,
        });
        let mut request = self
            .client
            .post(url)
            .timeout(Duration::from_secs_f64(endpoint.timeout_sec))
            .json(&body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|e| OracleError::Unavailable(e.to_string()))?;
        if !response.status().is_success() {
            return Err(OracleError::Unavailable(format!("HTTP {}", response.status())));
        }
        let value: serde_json::Value =
            response.json().map_err(|e| OracleError::Unavailable(e.to_string()))?;
        let content = value["choices"][0]["message"]["content"].as_str().unwrap_or_default();
        Ok(content.to_string())
    }
}

/// Remote Teacher: builds the proposal prompt and returns the raw reply.
pub struct RemoteTeacher {
    pub endpoint: OracleEndpoint,
    transport: Arc<dyn Transport>,
}

impl RemoteTeacher {
    pub fn new(endpoint: OracleEndpoint, transport: Arc<dyn Transport>) -> Self {
        RemoteTeacher { endpoint, transport }
    }
}

impl TeacherOracle for RemoteTeacher {
    fn propose(
        &self,
        seed: &SeedProblem,
        mode: Mode,
        feedback: Option<&str>,
    ) -> Result<String, OracleError> {
        let prompt = build_teacher_prompt(seed, mode, feedback);
        remote_oracle_call(&self.endpoint, self.transport.as_ref(), &prompt)
    }
}

/// Remote Judge: prompts for and parses an exact True/False verdict.
pub struct RemoteJudge {
    pub endpoint: OracleEndpoint,
    transport: Arc<dyn Transport>,
}

impl RemoteJudge {
    pub fn new(endpoint: OracleEndpoint, transport: Arc<dyn Transport>) -> Self {
        RemoteJudge { endpoint, transport }
    }
}

impl JudgeOracle for RemoteJudge {
    fn judge(&self, question: &str, candidate: &Answer) -> Result<bool, OracleError> {
        let prompt = build_judge_prompt(question, &candidate.text);
        let reply = remote_oracle_call(&self.endpoint, self.transport.as_ref(), &prompt)?;
        parse_judge_verdict(&reply)
    }
}

/// Remote Student: forwards the question verbatim and returns the raw reply
/// for answer extraction.
pub struct RemoteStudent {
    pub endpoint: OracleEndpoint,
    transport: Arc<dyn Transport>,
}

impl RemoteStudent {
    pub fn new(endpoint: OracleEndpoint, transport: Arc<dyn Transport>) -> Self {
        RemoteStudent { endpoint, transport }
    }
}

impl StudentOracle for RemoteStudent {
    fn answer(&self, _item_id: &str, _run: u32, question: &str) -> Result<String, OracleError> {
        remote_oracle_call(&self.endpoint, self.transport.as_ref(), question)
    }
}

/// Remote Ranker: asks for the hardest variant and parses the returned id.
pub struct RemoteRanker {
    pub endpoint: OracleEndpoint,
    transport: Arc<dyn Transport>,
}

impl RemoteRanker {
    pub fn new(endpoint: OracleEndpoint, transport: Arc<dyn Transport>) -> Self {
        RemoteRanker { endpoint, transport }
    }
}

impl RankerOracle for RemoteRanker {
    fn hardest(&self, members: &[RankerCandidate]) -> Result<String, OracleError> {
        let prompt = build_ranker_prompt(members);
        let reply = remote_oracle_call(&self.endpoint, self.transport.as_ref(), &prompt)?;
        let value = extract_first_json_object(&reply)?;
        value["hardest_variant"]
            .as_str()
            .map(str::to_string)
            .ok_or(OracleError::NotJson)
    }
}
