//! Five-criterion quality scoring and the retention rule.

use serde::{Deserialize, Serialize};

use super::generate::DraftQA;
use super::prompt::{fill, GUARDRAIL_TEMPLATE};
use super::provider::{ChatMessage, ChatRequest, Provider, Purpose};
use super::QaError;

/// Scores strictly above this pass.
pub const PASS_ABOVE: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Completeness,
    Consistency,
    Conciseness,
    Clarity,
    Inference,
}

impl Criterion {
    pub const ALL: [Criterion; 5] = [
        Criterion::Completeness,
        Criterion::Consistency,
        Criterion::Conciseness,
        Criterion::Clarity,
        Criterion::Inference,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Completeness => "completeness",
            Criterion::Consistency => "consistency",
            Criterion::Conciseness => "conciseness",
            Criterion::Clarity => "clarity",
            Criterion::Inference => "inference",
        }
    }

    fn description(self) -> &'static str {
        match self {
            Criterion::Completeness => {
                "The answer contains every essential element the question asks for."
            }
            Criterion::Consistency => "The answer agrees with the facts stated in the source.",
            Criterion::Conciseness => "The answer carries no redundant information.",
            Criterion::Clarity => {
                "Question and answer avoid ambiguous references such as \"this year\" or \"here\"."
            }
            Criterion::Inference => "Any calculation or logical step behind the answer is correct.",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardrailVerdict {
    pub completeness: u8,
    pub consistency: u8,
    pub conciseness: u8,
    pub clarity: u8,
    pub inference: u8,
    pub retained: bool,
}

impl GuardrailVerdict {
    /// Scores in [`Criterion::ALL`] order.
    pub fn from_scores(s: [u8; 5]) -> Self {
        Self {
            completeness: s[0],
            consistency: s[1],
            conciseness: s[2],
            clarity: s[3],
            inference: s[4],
            retained: s.iter().all(|&v| v > PASS_ABOVE),
        }
    }

    pub fn scores(&self) -> [u8; 5] {
        [
            self.completeness,
            self.consistency,
            self.conciseness,
            self.clarity,
            self.inference,
        ]
    }
}

/// First integer token in `text` that is not glued to letters or digits,
/// if it lies in 1..=5.
pub fn parse_score(text: &str) -> Option<u8> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let glued_before = start > 0 && (chars[start - 1].is_alphanumeric() || chars[start - 1] == '.');
            let glued_after = i < chars.len()
                && (chars[i].is_alphanumeric()
                    || (chars[i] == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())));
            if !glued_before && !glued_after {
                let token: String = chars[start..i].iter().collect();
                return token.parse::<u8>().ok().filter(|v| (1..=5).contains(v));
            }
        } else {
            i += 1;
        }
    }
    None
}

/// Text identifying a sample; the mock keys its per-sample decisions on it.
fn sample_key(draft: &DraftQA) -> String {
    format!("{}\n{}\n{}", draft.question, draft.answers.join("\u{1f}"), draft.context)
}

/// One provider call per criterion, each retried up to `retries` times when
/// the reply has no usable score.
pub fn score_guardrails(
    draft: &DraftQA,
    source: &str,
    provider: &dyn Provider,
    seed: u64,
    retries: u32,
) -> Result<GuardrailVerdict, QaError> {
    let key = sample_key(draft);
    let answers = serde_json::to_string(&draft.answers).expect("strings serialize");
    let reasoning = draft.reasoning_chain.as_deref().unwrap_or("(none)");
    let mut scores = [0u8; 5];
    for (slot, criterion) in scores.iter_mut().zip(Criterion::ALL) {
        let body = fill(
            GUARDRAIL_TEMPLATE,
            &[
                ("criterion", criterion.as_str()),
                ("criterion_text", criterion.description()),
                ("document", source),
                ("evidence", &draft.context),
                ("question", &draft.question),
                ("answers", &answers),
                ("reasoning", reasoning),
            ],
        );
        let mut req = ChatRequest::new(Purpose::Guardrail(criterion), vec![ChatMessage::user(body)], key.clone())
            .with_seed(seed);
        let mut last = String::new();
        let mut parsed = None;
        for attempt in 0..=retries {
            req.attempt = attempt;
            let resp = provider.complete(&req)?;
            parsed = parse_score(&resp.text);
            if parsed.is_some() {
                break;
            }
            last = resp.text;
        }
        *slot = parsed.ok_or(QaError::ScoreOutOfRange {
            criterion: criterion.as_str(),
            response: last,
        })?;
    }
    Ok(GuardrailVerdict::from_scores(scores))
}

pub trait Retained {
    fn retained(&self) -> bool;
}

impl Retained for GuardrailVerdict {
    fn retained(&self) -> bool {
        self.retained
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome<T> {
    pub retained: Vec<T>,
    pub rejected: Vec<T>,
    /// Retained over total; absent for an empty batch.
    pub ratio: Option<f64>,
}

pub fn filter_batch<T: Retained>(samples: Vec<T>) -> BatchOutcome<T> {
    let total = samples.len();
    let (retained, rejected): (Vec<T>, Vec<T>) = samples.into_iter().partition(|s| s.retained());
    let ratio = (total > 0).then(|| retained.len() as f64 / total as f64);
    BatchOutcome {
        retained,
        rejected,
        ratio,
    }
}
