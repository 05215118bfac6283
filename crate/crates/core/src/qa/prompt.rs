//! Prompt construction from editable templates and example pools.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::provider::ChatMessage;
use super::QaError;

const TEXT_TEMPLATE: &str = include_str!("../../assets/prompts/text.txt");
const REASONING_TEMPLATE: &str = include_str!("../../assets/prompts/reasoning.txt");
const TABLE_TEMPLATE: &str = include_str!("../../assets/prompts/table.txt");
const CHART_TEMPLATE: &str = include_str!("../../assets/prompts/chart.txt");
const OUTPUT_FORMAT: &str = include_str!("../../assets/prompts/output_format.txt");
pub(crate) const DISCRIMINATOR_TEMPLATE: &str = include_str!("../../assets/prompts/discriminator.txt");
pub(crate) const GUARDRAIL_TEMPLATE: &str = include_str!("../../assets/prompts/guardrail.txt");
const SIMILARITY_TEMPLATE: &str = include_str!("../../assets/prompts/similarity.txt");

const CURATED_POOL: &str = include_str!("../../assets/examples/curated.jsonl");
const DATASET_POOL: &str = include_str!("../../assets/examples/dataset.jsonl");

/// Examples drawn from each pool per prompt.
pub const EXAMPLES_PER_POOL: usize = 4;

const SYSTEM: &str = "You annotate documents. Answer only from the material you are given.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptKind {
    Text,
    Table,
    Chart,
    Reasoning,
}

impl PromptKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptKind::Text => "text",
            PromptKind::Table => "table",
            PromptKind::Chart => "chart",
            PromptKind::Reasoning => "reasoning",
        }
    }

    fn template(self) -> &'static str {
        match self {
            PromptKind::Text => TEXT_TEMPLATE,
            PromptKind::Table => TABLE_TEMPLATE,
            PromptKind::Chart => CHART_TEMPLATE,
            PromptKind::Reasoning => REASONING_TEMPLATE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExampleSource {
    Curated,
    Dataset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub kind: PromptKind,
    pub content: String,
    pub question: String,
    pub answers: Vec<String>,
}

/// Parses a JSONL example pool.
pub fn parse_pool(jsonl: &str) -> Result<Vec<Example>, QaError> {
    crate::model::read_records(jsonl.as_bytes()).map_err(|e| QaError::Io(e.to_string()))
}

/// The pools shipped with the crate: `(curated, dataset)`.
pub fn builtin_pools() -> (Vec<Example>, Vec<Example>) {
    (
        parse_pool(CURATED_POOL).expect("shipped curated pool parses"),
        parse_pool(DATASET_POOL).expect("shipped dataset pool parses"),
    )
}

/// Material a prompt is about. Tables carry HTML and an image reference,
/// charts an image reference; `text` holds the extracted text in all cases.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PromptContent {
    pub text: String,
    pub layout_category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub html: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
}

impl PromptContent {
    pub fn text(text: impl Into<String>, category: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            layout_category: category.into(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub kind: PromptKind,
    pub instructions: String,
    /// Filled by the model as the first workflow step.
    pub summary_slot: String,
    pub content: PromptContent,
    pub output_format: String,
    /// Curated examples first, then dataset examples.
    pub examples: Vec<(ExampleSource, Example)>,
}

/// Replaces `{name}` placeholders in one pass, so substituted text is never
/// re-expanded.
pub(crate) fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let map: HashMap<&str, &str> = values.iter().copied().collect();
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) if map.contains_key(&after[..close]) => {
                out.push_str(map[&after[..close]]);
                rest = &after[close + 1..];
            }
            _ => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

fn draw(
    pool: &[Example],
    kind: PromptKind,
    source: ExampleSource,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(ExampleSource, Example)>, QaError> {
    let matching: Vec<&Example> = pool.iter().filter(|e| e.kind == kind).collect();
    if matching.len() < EXAMPLES_PER_POOL {
        return Err(QaError::InsufficientExamples {
            kind: kind.as_str(),
            pool: match source {
                ExampleSource::Curated => "curated",
                ExampleSource::Dataset => "dataset",
            },
            available: matching.len(),
        });
    }
    let mut picked: Vec<usize> = sample(rng, matching.len(), EXAMPLES_PER_POOL).into_vec();
    picked.sort_unstable();
    Ok(picked
        .into_iter()
        .map(|i| (source, matching[i].clone()))
        .collect())
}

/// Assembles a prompt with four examples from each pool, sampled without
/// replacement by a generator seeded from `seed`.
pub fn build_prompt(
    content: &PromptContent,
    kind: PromptKind,
    curated: &[Example],
    dataset: &[Example],
    seed: u64,
) -> Result<PromptSpec, QaError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut examples = draw(curated, kind, ExampleSource::Curated, &mut rng)?;
    examples.extend(draw(dataset, kind, ExampleSource::Dataset, &mut rng)?);
    Ok(PromptSpec {
        kind,
        instructions: SYSTEM.to_string(),
        summary_slot: String::new(),
        content: content.clone(),
        output_format: OUTPUT_FORMAT.trim_end().to_string(),
        examples,
    })
}

impl PromptSpec {
    pub fn render(&self) -> Vec<ChatMessage> {
        let examples = self
            .examples
            .iter()
            .enumerate()
            .map(|(i, (_, e))| {
                format!(
                    "[{}] Input: {}\nQuestion: {}\nAnswers: {}",
                    i + 1,
                    e.content,
                    e.question,
                    serde_json::to_string(&e.answers).expect("strings serialize")
                )
            })
            .collect::<Vec<_>>()
            .join("\n\n");
        let user = fill(
            self.kind.template(),
            &[
                ("category", &self.content.layout_category),
                ("content", &self.content.text),
                ("html", self.content.html.as_deref().unwrap_or("(none)")),
                ("image", self.content.image_ref.as_deref().unwrap_or("(none)")),
                ("examples", &examples),
                ("format", &self.output_format),
            ],
        );
        vec![ChatMessage::system(&self.instructions), ChatMessage::user(user)]
    }
}

pub fn similarity_prompt(a: &str, b: &str) -> Vec<ChatMessage> {
    vec![
        ChatMessage::system(SYSTEM),
        ChatMessage::user(fill(SIMILARITY_TEMPLATE, &[("a", a), ("b", b)])),
    ]
}
