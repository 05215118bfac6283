//! Text-generation providers: an OpenAI-style HTTP client and a
//! deterministic mock for tests and offline runs.

use std::fmt;
use std::path::Path;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::guardrail::Criterion;
use super::QaError;
use crate::text::trigram_jaccard;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: "system".into(),
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: "user".into(),
            content: content.into(),
        }
    }
}

/// What a request is for. The HTTP provider ignores it; the mock uses it to
/// pick a built-in behaviour, and scripts can match on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Generate,
    MultiSpan,
    Discriminate,
    Guardrail(Criterion),
    Similarity,
}

impl fmt::Display for Purpose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Purpose::Generate => f.write_str("generate"),
            Purpose::MultiSpan => f.write_str("multispan"),
            Purpose::Discriminate => f.write_str("discriminate"),
            Purpose::Guardrail(c) => write!(f, "guardrail:{}", c.as_str()),
            Purpose::Similarity => f.write_str("similarity"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub seed: u64,
    pub purpose: Purpose,
    /// Source material the messages were built from, kept verbatim.
    pub context: String,
    /// 0 for the first try, incremented on retries.
    pub attempt: u32,
}

impl ChatRequest {
    pub fn new(purpose: Purpose, messages: Vec<ChatMessage>, context: impl Into<String>) -> Self {
        Self {
            messages,
            temperature: 0.0,
            seed: 0,
            purpose,
            context: context.into(),
            attempt: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_temperature(mut self, t: f64) -> Self {
        self.temperature = t;
        self
    }

    fn transcript(&self) -> String {
        self.messages
            .iter()
            .map(|m| m.content.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    pub finish_reason: String,
}

impl ChatResponse {
    pub fn stop(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            finish_reason: "stop".into(),
        }
    }
}

pub trait Provider: Send + Sync {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, QaError>;

    /// Semantic similarity of two page texts in [0, 1]. The default asks the
    /// model for a number.
    fn similarity(&self, a: &str, b: &str, seed: u64) -> Result<f64, QaError> {
        let prompt = super::prompt::similarity_prompt(a, b);
        let req = ChatRequest::new(Purpose::Similarity, prompt, format!("{a}\n{b}")).with_seed(seed);
        let resp = self.complete(&req)?;
        parse_unit_float(&resp.text)
            .ok_or_else(|| QaError::UnparsableResponse(format!("no similarity in `{}`", resp.text)))
    }
}

fn parse_unit_float(s: &str) -> Option<f64> {
    s.split(|c: char| !(c.is_ascii_digit() || c == '.'))
        .filter(|t| !t.is_empty())
        .find_map(|t| t.parse::<f64>().ok())
        .filter(|v| (0.0..=1.0).contains(v))
}

/// Chat-completions client for OpenAI-compatible endpoints.
pub struct HttpProvider {
    client: reqwest::blocking::Client,
    base_url: String,
    model: String,
    api_key: Option<String>,
    retries: u32,
}

impl HttpProvider {
    pub fn new(
        base_url: &str,
        model: &str,
        api_key: Option<String>,
        timeout: Duration,
        retries: u32,
    ) -> Result<Self, QaError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| QaError::ProviderFailure(e.to_string()))?;
        Ok(Self {
            client,
            base_url: base_url.trim_end_matches('/').to_string(),
            model: model.to_string(),
            api_key,
            retries,
        })
    }

    fn call_once(&self, req: &ChatRequest) -> Result<ChatResponse, QaError> {
        let body = serde_json::json!({
            "model": self.model,
            "messages": req.messages,
            "temperature": req.temperature,
            "seed": req.seed,
        });
        let mut call = self
            .client
            .post(format!("{}/chat/completions", self.base_url))
            .json(&body);
        if let Some(key) = &self.api_key {
            call = call.bearer_auth(key);
        }
        let resp = call
            .send()
            .and_then(|r| r.error_for_status())
            .map_err(|e| QaError::ProviderFailure(e.to_string()))?;
        let value: serde_json::Value = resp
            .json()
            .map_err(|e| QaError::ProviderFailure(e.to_string()))?;
        let choice = &value["choices"][0];
        let text = choice["message"]["content"]
            .as_str()
            .ok_or_else(|| QaError::UnparsableResponse("response has no message content".into()))?;
        Ok(ChatResponse {
            text: text.to_string(),
            finish_reason: choice["finish_reason"].as_str().unwrap_or("unknown").to_string(),
        })
    }
}

impl Provider for HttpProvider {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, QaError> {
        let mut last = None;
        for _ in 0..=self.retries {
            match self.call_once(req) {
                Ok(r) => return Ok(r),
                Err(e @ QaError::ProviderFailure(_)) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }
}

/// One scripted reply. Every present matcher field must match; the first
/// matching rule in file order answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purpose: Option<String>,
    /// Substring of the concatenated message contents.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contains: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attempt: Option<u32>,
    #[serde(default)]
    pub response: String,
    #[serde(default = "default_finish")]
    pub finish_reason: String,
    /// Simulate an unreachable provider instead of answering.
    #[serde(default)]
    pub fail: bool,
}

fn default_finish() -> String {
    "stop".into()
}

impl MockRule {
    pub fn reply(purpose: &str, response: &str) -> Self {
        Self {
            purpose: Some(purpose.into()),
            contains: None,
            attempt: None,
            response: response.into(),
            finish_reason: default_finish(),
            fail: false,
        }
    }

    fn matches(&self, req: &ChatRequest, purpose: &str, transcript: &str) -> bool {
        self.purpose.as_deref().is_none_or(|p| p == purpose)
            && self.attempt.is_none_or(|a| a == req.attempt)
            && self.contains.as_deref().is_none_or(|c| transcript.contains(c))
    }
}

pub const DEFAULT_PASS_RATE: f64 = 0.88;

/// Deterministic provider: a pure function of the request (which carries
/// its seed). Scripted rules are consulted first; otherwise built-in
/// behaviours derive answers from the request's source material.
#[derive(Debug, Clone)]
pub struct MockProvider {
    rules: Vec<MockRule>,
    pass_rate: f64,
}

impl Default for MockProvider {
    fn default() -> Self {
        Self {
            rules: Vec::new(),
            pass_rate: DEFAULT_PASS_RATE,
        }
    }
}

fn digest(parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().into()
}

fn rng_for(parts: &[&[u8]]) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(digest(parts))
}

fn unit_for(parts: &[&[u8]]) -> f64 {
    let d = digest(parts);
    let v = u64::from_le_bytes(d[..8].try_into().expect("8 bytes"));
    (v >> 11) as f64 / (1u64 << 53) as f64
}

const CJK_NUMERALS: &str = "一二三四五六七八九十百千万";
const SENTENCE_END: &[char] = &['.', '!', '?', '。', '！', '？'];
const TRIM: &[char] = &[
    '.', ',', ';', ':', '!', '?', '"', '\'', '(', ')', '。', '，', '；', '：', '！', '？', '、', '“',
    '”', '（', '）',
];

/// Byte ranges of sentences in `text`, trimmed of surrounding whitespace.
fn sentences(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if SENTENCE_END.contains(&c) {
            let ascii = c.is_ascii();
            let at_break = iter.peek().is_none_or(|&(_, n)| n.is_whitespace());
            if !ascii || at_break {
                let end = i + c.len_utf8();
                push_trimmed(text, start, end, &mut out);
                start = end;
            }
        }
    }
    push_trimmed(text, start, text.len(), &mut out);
    out
}

fn push_trimmed(text: &str, start: usize, end: usize, out: &mut Vec<(usize, usize)>) {
    let s = &text[start..end];
    let lead = s.len() - s.trim_start().len();
    let trail = s.len() - s.trim_end().len();
    if lead + trail < s.len() {
        out.push((start + lead, end - trail));
    }
}

/// A short phrase lifted verbatim from `sentence`.
fn pick_phrase(sentence: &str, rng: &mut ChaCha8Rng) -> String {
    let words: Vec<&str> = sentence.split_whitespace().collect();
    let phrase = if words.len() >= 2 {
        let k = rng.gen_range(1..=3.min(words.len()));
        let at = rng.gen_range(0..=words.len() - k);
        // Rebuild from the source so inner spacing is preserved.
        let first = words[at].as_ptr() as usize - sentence.as_ptr() as usize;
        let last = words[at + k - 1];
        let end = last.as_ptr() as usize - sentence.as_ptr() as usize + last.len();
        sentence[first..end].trim_matches(TRIM).to_string()
    } else {
        let chars: Vec<char> = sentence.chars().filter(|c| !TRIM.contains(c)).collect();
        let body: String = chars.iter().collect();
        if !sentence.contains(&body) || chars.len() <= 2 {
            sentence.trim_matches(TRIM).to_string()
        } else {
            let k = rng.gen_range(2..=4.min(chars.len()));
            let at = rng.gen_range(0..=chars.len() - k);
            chars[at..at + k].iter().collect()
        }
    };
    if phrase.is_empty() {
        sentence.to_string()
    } else {
        phrase
    }
}

impl MockProvider {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_rules(mut self, rules: Vec<MockRule>) -> Self {
        self.rules = rules;
        self
    }

    pub fn with_pass_rate(mut self, p: f64) -> Self {
        self.pass_rate = p;
        self
    }

    pub fn from_script(path: &Path) -> Result<Self, QaError> {
        let file = std::fs::File::open(path).map_err(|e| QaError::Io(e.to_string()))?;
        let rules = crate::model::read_records(std::io::BufReader::new(file))
            .map_err(|e| QaError::Io(e.to_string()))?;
        Ok(Self::new().with_rules(rules))
    }

    fn generate(&self, req: &ChatRequest, multi: bool) -> String {
        let mut rng = rng_for(&[
            b"generate",
            &req.seed.to_le_bytes(),
            req.context.as_bytes(),
            &[u8::from(multi)],
        ]);
        let text = &req.context;
        let sents = sentences(text);
        if sents.is_empty() {
            return "I could not find any content.".into();
        }
        let i = rng.gen_range(0..sents.len());
        let (context, answers, reasoning) = if multi && sents.len() >= 2 {
            let i = i.min(sents.len() - 2);
            let (a, b) = (sents[i], sents[i + 1]);
            let first = pick_phrase(&text[a.0..a.1], &mut rng);
            let second = pick_phrase(&text[b.0..b.1], &mut rng);
            let mut answers = vec![first];
            if !answers.contains(&second) {
                answers.push(second);
            }
            (
                &text[a.0..b.1],
                answers,
                Some("Each answer is stated in one of two adjacent sentences.".to_string()),
            )
        } else {
            let (s, e) = sents[i];
            (&text[s..e], vec![pick_phrase(&text[s..e], &mut rng)], None)
        };
        let first_sentence = &text[sents[0].0..sents[0].1];
        let summary: String = first_sentence.chars().take(80).collect();
        let question = format!(
            "Which words complete this statement from the document: \"{}\"?",
            context.replacen(answers[0].as_str(), "____", 1)
        );
        serde_json::json!({
            "summary": summary,
            "question": question,
            "context": context,
            "answers": answers,
            "reasoning": reasoning,
        })
        .to_string()
    }

    fn discriminate(&self, req: &ChatRequest) -> String {
        let text = &req.context;
        let numeric = text.chars().any(|c| c.is_ascii_digit() || CJK_NUMERALS.contains(c));
        if numeric {
            "Yes. The passage combines several facts, including figures.".into()
        } else {
            "No. A single fact is stated.".into()
        }
    }

    /// Every sample passes all criteria with probability `pass_rate`; a
    /// failing sample gets one low score on a criterion chosen per sample.
    fn guardrail(&self, req: &ChatRequest, criterion: Criterion) -> String {
        let seed = req.seed.to_le_bytes();
        let key = req.context.as_bytes();
        let passes = unit_for(&[b"pass", &seed, key]) < self.pass_rate;
        let failing = Criterion::ALL[rng_for(&[b"which", &seed, key]).gen_range(0..5)];
        let mut rng = rng_for(&[b"score", &seed, key, criterion.as_str().as_bytes()]);
        let score = if !passes && criterion == failing {
            rng.gen_range(1..=3)
        } else {
            *[4, 5].choose(&mut rng).expect("non-empty")
        };
        format!("Following the evaluation steps for {}.\nScore: {score}", criterion.as_str())
    }
}

impl Provider for MockProvider {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, QaError> {
        let purpose = req.purpose.to_string();
        if !self.rules.is_empty() {
            let transcript = req.transcript();
            if let Some(rule) = self.rules.iter().find(|r| r.matches(req, &purpose, &transcript)) {
                if rule.fail {
                    return Err(QaError::ProviderFailure(format!("scripted failure for {purpose}")));
                }
                return Ok(ChatResponse {
                    text: rule.response.clone(),
                    finish_reason: rule.finish_reason.clone(),
                });
            }
        }
        let text = match req.purpose {
            Purpose::Generate => self.generate(req, false),
            Purpose::MultiSpan => self.generate(req, true),
            Purpose::Discriminate => self.discriminate(req),
            Purpose::Guardrail(c) => self.guardrail(req, c),
            Purpose::Similarity => {
                let (a, b) = req.context.split_once('\n').unwrap_or((&req.context, ""));
                format!("{:.4}", trigram_jaccard(a, b))
            }
        };
        Ok(ChatResponse::stop(text))
    }

    fn similarity(&self, a: &str, b: &str, seed: u64) -> Result<f64, QaError> {
        if self.rules.iter().any(|r| r.purpose.as_deref() == Some("similarity")) {
            let prompt = super::prompt::similarity_prompt(a, b);
            let req = ChatRequest::new(Purpose::Similarity, prompt, format!("{a}\n{b}")).with_seed(seed);
            let resp = self.complete(&req)?;
            return parse_unit_float(&resp.text).ok_or_else(|| {
                QaError::UnparsableResponse(format!("no similarity in `{}`", resp.text))
            });
        }
        Ok(trigram_jaccard(a, b))
    }
}
