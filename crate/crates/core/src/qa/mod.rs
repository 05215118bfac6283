//! QA annotation workflow against an abstract text-generation provider:
//! prompt assembly, drafting, multi-span routing, guardrail scoring,
//! cross-page linking and answer grounding.

mod generate;
mod ground;
mod guardrail;
mod link;
mod pipeline;
mod prompt;
mod provider;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use generate::{discriminate_multispan, generate_qa, AnswerType, DraftQA};
pub use ground::{locate_answer, locate_in_lines, GROUNDING_THRESHOLD};
pub use guardrail::{
    filter_batch, parse_score, score_guardrails, BatchOutcome, Criterion, GuardrailVerdict, Retained,
    PASS_ABOVE,
};
pub use link::{link_pages, LINK_THRESHOLD, MAX_LINKED_PAGES};
pub use pipeline::{run_qagen, QASample, QaConfig, QaFailure, QaRun, Scores};
pub use prompt::{
    build_prompt, builtin_pools, parse_pool, Example, ExampleSource, PromptContent, PromptKind, PromptSpec,
    EXAMPLES_PER_POOL,
};
pub use provider::{
    ChatMessage, ChatRequest, ChatResponse, HttpProvider, MockProvider, MockRule, Provider, Purpose,
    DEFAULT_PASS_RATE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QaError {
    #[error("provider failure: {0}")]
    ProviderFailure(String),
    #[error("unparsable provider response: {0}")]
    UnparsableResponse(String),
    #[error("answer `{0}` does not occur in the located context")]
    AnswerNotInContext(String),
    #[error("the quoted context does not occur in the source content")]
    ContextNotLocated,
    #[error("context is empty")]
    EmptyContext,
    #[error("no score in 1..=5 for {criterion}: {response}")]
    ScoreOutOfRange { criterion: &'static str, response: String },
    #[error("{pool} pool has {available} {kind} examples, need 4")]
    InsufficientExamples {
        kind: &'static str,
        pool: &'static str,
        available: usize,
    },
    #[error("answer `{0}` could not be grounded on the page")]
    NoGrounding(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{0}")]
    Io(String),
}

/// Child seed for a named sub-task, stable across platforms.
pub fn derive_seed(seed: u64, parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}
