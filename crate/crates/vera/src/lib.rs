//! Deterministic augmentation of math benchmark problems through executable
//! specifications.
//!
//! A seed problem is compiled (by a teacher oracle) into a small executable
//! specification: a templated problem statement, a slot schema, a generator
//! program that samples slot values, and a verifier program that checks an
//! assignment and produces the gold answer. Variants sampled from a
//! specification are gated before release: equivalent-mode specs must
//! reproduce the seed's answer on a base assignment, hardened-mode variants
//! must survive a judge that is also shown deliberately perturbed answers.
//! Every accepted variant carries a machine-checkable label, and the whole
//! pipeline is reproducible bit-for-bit from a base seed.
//!
//! The fastest way in is the `examples/` directory, one runnable program per
//! capability:
//!
//! - `compile_and_sample` parses a specification and samples deterministic
//!   variants from it (`cargo run --example compile_and_sample`)
//! - `seeded_streams` shows the hash-derived seeding scheme and the raw RNG
//!   primitives behind every sample
//! - `equivalent_pipeline` runs the full augmentation loop in equivalent
//!   mode with mock oracles, including the seed-anchored verifier gate
//! - `hardened_pipeline` runs hardened mode, where candidate answers are
//!   mixed with generated noise and a judge must tell them apart
//! - `paired_hardest` builds a hardened pool per seed and selects the single
//!   hardest variant through a ranking oracle
//! - `evaluate_oracle` scores an answering oracle on a dataset and prints
//!   the reproducible report with aggregate statistics
//!
//! The same functionality is reachable from the thin `vera` binary
//! (`vera prepare`, `vera eval`) for shell pipelines.

pub mod cli;
pub mod datasets;
pub mod evalkit;
pub mod judging;
pub mod model;
pub mod oracles;
pub mod runtime;
pub mod speclang;
pub mod synthesis;
pub mod templating;

pub use model::{
    Answer, Assignment, AugmentationSummary, ExecSpec, GenerationConfig, JudgeTrial, Mode,
    SeedProblem, SlotKind, SlotSpec, SlotValue, VariantRecord,
};
