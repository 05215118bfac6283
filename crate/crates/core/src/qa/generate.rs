//! Draft generation and multi-span discrimination.

use serde::{Deserialize, Serialize};

use super::prompt::{fill, PromptKind, PromptSpec, DISCRIMINATOR_TEMPLATE};
use super::provider::{ChatMessage, ChatRequest, Provider, Purpose};
use super::QaError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerType {
    Single,
    Multi,
    Table,
    Chart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DraftQA {
    pub summary: String,
    pub question: String,
    /// Evidence as it appears in the source.
    pub context: String,
    /// Char range of `context` in the source text.
    pub context_span: (usize, usize),
    pub answers: Vec<String>,
    pub answer_type: AnswerType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning_chain: Option<String>,
}

#[derive(Deserialize)]
struct RawDraft {
    #[serde(default)]
    summary: String,
    question: String,
    context: String,
    answers: Vec<String>,
    #[serde(default)]
    reasoning: Option<String>,
}

/// The outermost `{...}` of a reply, which may be wrapped in prose or a
/// code fence.
fn json_object(text: &str) -> Option<&str> {
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    (end > start).then(|| &text[start..=end])
}

/// Finds `needle` in `hay` ignoring whitespace on both sides; returns the
/// char range in `hay` from the first to the last matched character.
pub(crate) fn find_ignoring_whitespace(hay: &str, needle: &str) -> Option<(usize, usize)> {
    let hay_chars: Vec<char> = hay.chars().collect();
    let (dense, pos): (Vec<char>, Vec<usize>) = hay_chars
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_whitespace())
        .map(|(i, c)| (*c, i))
        .unzip();
    let pat: Vec<char> = needle.chars().filter(|c| !c.is_whitespace()).collect();
    if pat.is_empty() || pat.len() > dense.len() {
        return None;
    }
    let at = dense.windows(pat.len()).position(|w| w == pat.as_slice())?;
    Some((pos[at], pos[at + pat.len() - 1] + 1))
}

fn contains_ignoring_whitespace(hay: &str, needle: &str) -> bool {
    find_ignoring_whitespace(hay, needle).is_some()
}

/// Runs the summary, question, context and answer workflow through one
/// provider call, then checks that the context occurs in `content` and that
/// every answer occurs in the context.
pub fn generate_qa(
    content: &str,
    prompt: &PromptSpec,
    provider: &dyn Provider,
    seed: u64,
    temperature: f64,
) -> Result<DraftQA, QaError> {
    let purpose = if prompt.kind == PromptKind::Reasoning {
        Purpose::MultiSpan
    } else {
        Purpose::Generate
    };
    let req = ChatRequest::new(purpose, prompt.render(), content)
        .with_seed(seed)
        .with_temperature(temperature);
    let resp = provider.complete(&req)?;
    let raw: RawDraft = json_object(&resp.text)
        .and_then(|j| serde_json::from_str(j).ok())
        .ok_or_else(|| QaError::UnparsableResponse(resp.text.clone()))?;
    let answers: Vec<String> = raw
        .answers
        .into_iter()
        .map(|a| a.trim().to_string())
        .filter(|a| !a.is_empty())
        .collect();
    if raw.question.trim().is_empty() || answers.is_empty() {
        return Err(QaError::UnparsableResponse(resp.text));
    }
    let span = find_ignoring_whitespace(content, &raw.context).ok_or(QaError::ContextNotLocated)?;
    let context: String = content.chars().skip(span.0).take(span.1 - span.0).collect();
    if let Some(missing) = answers.iter().find(|a| !contains_ignoring_whitespace(&context, a)) {
        return Err(QaError::AnswerNotInContext(missing.clone()));
    }
    let answer_type = match prompt.kind {
        PromptKind::Table => AnswerType::Table,
        PromptKind::Chart => AnswerType::Chart,
        _ if answers.len() >= 2 => AnswerType::Multi,
        _ => AnswerType::Single,
    };
    Ok(DraftQA {
        summary: raw.summary.trim().to_string(),
        question: raw.question.trim().to_string(),
        context,
        context_span: span,
        answers,
        answer_type,
        reasoning_chain: raw.reasoning.filter(|r| !r.trim().is_empty()),
    })
}

fn parse_yes_no(text: &str) -> Option<bool> {
    text.split(|c: char| !c.is_alphanumeric())
        .find_map(|w| match w.to_ascii_lowercase().as_str() {
            "yes" => Some(true),
            "no" => Some(false),
            _ => None,
        })
        .or_else(|| {
            let t = text.trim_start();
            if t.starts_with('是') {
                Some(true)
            } else if t.starts_with('否') {
                Some(false)
            } else {
                None
            }
        })
}

/// Whether `context` supports questions that reason across sentences.
pub fn discriminate_multispan(context: &str, provider: &dyn Provider, seed: u64) -> Result<bool, QaError> {
    if context.trim().is_empty() {
        return Err(QaError::EmptyContext);
    }
    let messages = vec![ChatMessage::user(fill(DISCRIMINATOR_TEMPLATE, &[("content", context)]))];
    let req = ChatRequest::new(Purpose::Discriminate, messages, context).with_seed(seed);
    let resp = provider.complete(&req)?;
    parse_yes_no(&resp.text).ok_or(QaError::UnparsableResponse(resp.text))
}
