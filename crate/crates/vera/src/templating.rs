//! Question rendering and drift scoring.
//!
//! Templates and carriers are plain strings with `{name}` placeholders;
//! rendering substitutes each placeholder with the slot value's canonical
//! text. [`perturbation_score`] measures how far a sampled assignment and
//! its rendered text drift from the seed realization.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use crate::model::{Assignment, ExecSpec, GenerationConfig, SlotValue};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("carrier index {index} out of range for {count} carriers")]
    CarrierIndex { index: usize, count: usize },
    #[error("no value for placeholder '{0}'")]
    MissingSlot(String),
    #[error("placeholder '{0}' does not name a declared slot")]
    UnknownPlaceholder(String),
}

/// A fully substituted question text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedInstance {
    pub text: String,
    pub carrier_index: usize,
    /// Placeholder names that appeared in the carrier (each counted once).
    pub used_slots: BTreeSet<String>,
}

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([A-Za-z_][A-Za-z0-9_]*)\}").expect("valid regex"))
}

/// The set of `{name}` placeholders in a template. Braces whose contents
/// are not a plain identifier are not placeholders.
pub fn placeholders(template: &str) -> BTreeSet<String> {
    placeholder_re()
        .captures_iter(template)
        .map(|c| c[1].to_string())
        .collect()
}

/// Substitute every placeholder of the chosen carrier with canonical value
/// text.
pub fn render(
    spec: &ExecSpec,
    assignment: &Assignment,
    carrier_index: usize,
) -> Result<RenderedInstance, TemplateError> {
    let carrier = spec.carriers.get(carrier_index).ok_or(TemplateError::CarrierIndex {
        index: carrier_index,
        count: spec.carriers.len(),
    })?;
    let re = placeholder_re();
    let mut text = String::with_capacity(carrier.len());
    let mut used = BTreeSet::new();
    let mut last = 0;
    for caps in re.captures_iter(carrier) {
        let whole = caps.get(0).expect("match present");
        let name = caps.get(1).expect("group present").as_str();
        if !spec.slots.iter().any(|s| s.name == name) {
            return Err(TemplateError::UnknownPlaceholder(name.to_string()));
        }
        let value = assignment
            .get(name)
            .ok_or_else(|| TemplateError::MissingSlot(name.to_string()))?;
        text.push_str(&carrier[last..whole.start()]);
        text.push_str(&value.canonical_text());
        used.insert(name.to_string());
        last = whole.end();
    }
    text.push_str(&carrier[last..]);
    Ok(RenderedInstance { text, carrier_index, used_slots: used })
}

/// Drift between the seed realization and a sampled variant, in `[0, 1]`:
/// `0.5 * numeric + 0.5 * textual`. The numeric part averages, over all
/// slots, `min(1, |v - v0| / (|v0| + 1))` for numeric slots and a 0/1
/// change indicator for categorical slots. The textual part is the
/// token-level Levenshtein distance between the two texts divided by the
/// larger token count.
pub fn perturbation_score(
    spec: &ExecSpec,
    base: &Assignment,
    sampled: &Assignment,
    base_text: &str,
    text: &str,
) -> f64 {
    let numeric = if spec.slots.is_empty() {
        0.0
    } else {
        let total: f64 = spec
            .slots
            .iter()
            .map(|slot| slot_distance(base.get(&slot.name), sampled.get(&slot.name)))
            .sum();
        total / spec.slots.len() as f64
    };
    0.5 * numeric + 0.5 * textual_distance(base_text, text)
}

fn slot_distance(base: Option<&SlotValue>, sampled: Option<&SlotValue>) -> f64 {
    match (base, sampled) {
        (Some(SlotValue::Str(b)), Some(SlotValue::Str(s))) => {
            if b == s {
                0.0
            } else {
                1.0
            }
        }
        (Some(b), Some(s)) => match (b.numeric(), s.numeric()) {
            (Some(v0), Some(v)) => ((v - v0).abs() / (v0.abs() + 1.0)).min(1.0),
            _ => 1.0,
        },
        // A slot absent on either side counts as fully changed.
        _ => 1.0,
    }
}

/// Token-level Levenshtein distance divided by the larger token count.
fn textual_distance(a: &str, b: &str) -> f64 {
    let xs: Vec<&str> = a.split_whitespace().collect();
    let ys: Vec<&str> = b.split_whitespace().collect();
    let denom = xs.len().max(ys.len());
    if denom == 0 {
        return 0.0;
    }
    let mut prev: Vec<usize> = (0..=ys.len()).collect();
    let mut cur = vec![0usize; ys.len() + 1];
    for (i, x) in xs.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in ys.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[ys.len()] as f64 / denom as f64
}

/// Apply the optional perturbation budget from the configuration.
pub fn within_budget(score: f64, cfg: &GenerationConfig) -> bool {
    match cfg.perturbation_budget {
        None => true,
        Some(budget) => score <= budget,
    }
}
