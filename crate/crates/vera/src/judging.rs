//! Gates that separate robust specifications from fragile ones: the
//! noise-discrimination judge gate, the repeated-arbitration gate, and
//! hardest-variant selection for paired hard sets.

use thiserror::Error;

use crate::model::{answers_match, Answer, GenerationConfig, JudgeTrial, VariantRecord};
use crate::oracles::{parse_student_answer, JudgeOracle, RankerCandidate, RankerOracle, StudentOracle};
use crate::runtime::SpecRng;

/// Noise candidates must clear this margin from the correct answer so they
/// can never collide with it under any sane evaluation tolerance.
pub const NOISE_EQUALITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JudgeError {
    #[error("the correct answer has no numeric value to perturb")]
    NonNumericAnswer,
    #[error("arbitration needs an odd trial count of at least 3, got {0}")]
    ArbitrationSize(u32),
}

/// The shuffled trial schedule for one judge gate run.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePlan {
    /// `(candidate, expected verdict, is_noise)` in presentation order.
    pub trials: Vec<(Answer, bool, bool)>,
}

/// Produce `count` plausible-but-wrong answers near `correct`.
///
/// Integer answers move by a die roll of 1..=9 (downward moves clamp at
/// zero); real answers move by a uniform offset between 5% and 100% of a
/// span of `max(1, |v| / 10)`. Draw order is fixed: offset first, then
/// direction. Candidates that land on the correct answer are redrawn.
pub fn gen_noise(
    correct: &Answer,
    count: u32,
    rng: &mut SpecRng,
) -> Result<Vec<Answer>, JudgeError> {
    let v = correct.numeric.ok_or(JudgeError::NonNumericAnswer)?;
    let is_integer = (v - v.round()).abs() < NOISE_EQUALITY_TOL
        && v.round() >= i64::MIN as f64
        && v.round() < i64::MAX as f64;
    let mut out = Vec::with_capacity(count as usize);
    while out.len() < count as usize {
        if is_integer {
            let delta = rng.randint(1, 9).expect("static bounds");
            let upward = rng.random() < 0.5;
            let base = v.round() as i64;
            let candidate = if upward {
                match base.checked_add(delta) {
                    Some(c) => c,
                    None => continue,
                }
            } else {
                (base - delta).max(0)
            };
            if candidate == base {
                continue;
            }
            out.push(Answer::from_int(candidate));
        } else {
            let span = (v.abs() * 0.1).max(1.0);
            let delta = rng.uniform(0.05 * span, span);
            let upward = rng.random() < 0.5;
            let candidate = if upward { v + delta } else { v - delta };
            if (candidate - v).abs() <= NOISE_EQUALITY_TOL || !candidate.is_finite() {
                continue;
            }
            out.push(Answer::from_real(candidate));
        }
    }
    Ok(out)
}

/// Build the seeded 2-correct + 3-noise (per config) trial schedule.
pub fn noise_plan(
    correct: &Answer,
    cfg: &GenerationConfig,
    rng: &mut SpecRng,
) -> Result<NoisePlan, JudgeError> {
    let noise = gen_noise(correct, cfg.judge_noise_trials, rng)?;
    let mut trials: Vec<(Answer, bool, bool)> = Vec::new();
    for _ in 0..cfg.judge_correct_trials {
        trials.push((correct.clone(), true, false));
    }
    for candidate in noise {
        trials.push((candidate, false, true));
    }
    rng.shuffle(&mut trials);
    Ok(NoisePlan { trials })
}

/// Run the noise-discrimination gate: the judge sees correct and noise
/// candidates in a seeded order and must call each one. The instance
/// passes when successes reach the consistency threshold. Transport
/// failures record the opposite of the expected verdict and never count
/// as successes.
pub fn judge_instance(
    question: &str,
    correct: &Answer,
    judge: &dyn JudgeOracle,
    cfg: &GenerationConfig,
    rng: &mut SpecRng,
) -> Result<(bool, Vec<JudgeTrial>), JudgeError> {
    judge.note_reference(question, correct);
    let plan = noise_plan(correct, cfg, rng)?;
    let mut trials = Vec::with_capacity(plan.trials.len());
    let mut successes = 0u32;
    for (candidate, expected, is_noise) in plan.trials {
        let (observed, success) = match judge.judge(question, &candidate) {
            Ok(observed) => (observed, observed == expected),
            Err(_) => (!expected, false),
        };
        if success {
            successes += 1;
        }
        trials.push(JudgeTrial { candidate, expected, is_noise, observed, success });
    }
    Ok((successes >= cfg.judge_consistency_threshold, trials))
}

/// Majority-agreement gate: ask the student `k` times (runs are numbered
/// from 1) and pass when strictly more than half of the parsed answers
/// match. Transport failures count as non-matching attempts.
pub fn arbitration_filter(
    question: &str,
    expected: &Answer,
    student: &dyn StudentOracle,
    k: u32,
    tol: f64,
) -> Result<bool, JudgeError> {
    if k < 3 || k % 2 == 0 {
        return Err(JudgeError::ArbitrationSize(k));
    }
    let mut matches = 0u32;
    for run in 1..=k {
        if let Ok(raw) = student.answer(question, run, question) {
            if answers_match(&parse_student_answer(&raw), expected, tol) {
                matches += 1;
            }
        }
    }
    Ok(matches * 2 > k)
}

/// Pick the hardest member of a verified candidate pool. The ranker never
/// defines labels; it only orders already-verified variants. An unknown
/// or failing ranker reply falls back to the lexicographically smallest
/// `(seed_id, generator_id, sample_index)` candidate and marks it.
/// Returns `None` only for an empty pool.
pub fn select_hardest(
    candidates: &[VariantRecord],
    ranker: &dyn RankerOracle,
) -> Option<VariantRecord> {
    let first = candidates.first()?;
    let mut chosen = if candidates.len() == 1 {
        first.clone()
    } else {
        let members: Vec<RankerCandidate> = candidates
            .iter()
            .map(|c| RankerCandidate { id: c.variant_id(), text: c.question_text.clone() })
            .collect();
        let picked = match ranker.hardest(&members) {
            Ok(id) => candidates.iter().find(|c| c.variant_id() == id).cloned(),
            Err(_) => None,
        };
        match picked {
            Some(record) => record,
            None => {
                let mut fallback = candidates
                    .iter()
                    .min_by(|a, b| {
                        (&a.seed_id, &a.generator_id, a.sample_index).cmp(&(
                            &b.seed_id,
                            &b.generator_id,
                            b.sample_index,
                        ))
                    })
                    .expect("nonempty pool")
                    .clone();
                fallback.metadata.insert("pro_fallback".to_string(), "true".to_string());
                fallback
            }
        }
    };
    chosen.metadata.insert("pro_selected".to_string(), "true".to_string());
    Some(chosen)
}
