//! Batch QA annotation over pages: link, generate, discriminate, score,
//! ground.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{discriminate_multispan, generate_qa, AnswerType, DraftQA};
use super::ground::{locate_in_lines, GROUNDING_THRESHOLD};
use super::guardrail::{score_guardrails, GuardrailVerdict, Retained};
use super::link::{link_pages, LINK_THRESHOLD, MAX_LINKED_PAGES};
use super::prompt::{build_prompt, Example, PromptContent, PromptKind};
use super::provider::Provider;
use super::{derive_seed, QaError};
use crate::model::{BBox, Language, PageDocument, TextLine};

#[derive(Debug, Clone, PartialEq)]
pub struct QaConfig {
    pub seed: u64,
    /// Single-span drafts attempted per logical document.
    pub samples_per_document: usize,
    pub link_threshold: f64,
    pub max_pages: usize,
    pub temperature: f64,
    pub retries: u32,
    /// Logical documents processed concurrently.
    pub in_flight: usize,
}

impl Default for QaConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples_per_document: 2,
            link_threshold: LINK_THRESHOLD,
            max_pages: MAX_LINKED_PAGES,
            temperature: 0.7,
            retries: 1,
            in_flight: 4,
        }
    }
}

impl QaConfig {
    pub fn validate(&self) -> Result<(), QaError> {
        let bad = |m: &str| Err(QaError::InvalidConfig(m.to_string()));
        if !(0.0..=1.0).contains(&self.link_threshold) {
            return bad("link_threshold must be in [0, 1]");
        }
        if self.max_pages == 0 {
            return bad("max_pages must be at least 1");
        }
        if self.in_flight == 0 {
            return bad("in_flight must be at least 1");
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return bad("temperature must be in [0, 2]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scores {
    pub completeness: u8,
    pub consistency: u8,
    pub conciseness: u8,
    pub clarity: u8,
    pub inference: u8,
}

impl From<&GuardrailVerdict> for Scores {
    fn from(v: &GuardrailVerdict) -> Self {
        Self {
            completeness: v.completeness,
            consistency: v.consistency,
            conciseness: v.conciseness,
            clarity: v.clarity,
            inference: v.inference,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QASample {
    pub id: String,
    pub doc_id: String,
    pub pages: Vec<u32>,
    pub question: String,
    pub answers: Vec<String>,
    pub answer_type: AnswerType,
    pub evidence: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<String>,
    pub grounding: Vec<BBox>,
    /// Page of each grounding box.
    pub grounding_pages: Vec<u32>,
    pub scores: Scores,
    pub retained: bool,
}

impl Retained for QASample {
    fn retained(&self) -> bool {
        self.retained
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaFailure {
    pub doc_id: String,
    pub pages: Vec<u32>,
    pub stage: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QaRun {
    /// Every scored sample, retained or not, in input order.
    pub samples: Vec<QASample>,
    pub failures: Vec<QaFailure>,
    pub logical_documents: usize,
}

struct Unit<'a> {
    doc_id: String,
    pages: Vec<&'a PageDocument>,
}

fn ordered_lines<'a>(page: &'a PageDocument, orders: &HashMap<String, Vec<String>>) -> Vec<&'a TextLine> {
    match orders.get(&page.key()) {
        Some(seq) => seq.iter().filter_map(|id| page.line(id)).collect(),
        None => page.lines.iter().collect(),
    }
}

fn join_lines(lines: &[&TextLine], language: Language) -> String {
    let sep = if language == Language::Zh { "" } else { " " };
    lines.iter().map(|l| l.text.as_str()).collect::<Vec<_>>().join(sep)
}

fn dominant_category(pages: &[&PageDocument]) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for p in pages {
        for b in &p.blocks {
            *counts.entry(b.category.as_str()).or_default() += b.line_ids.len();
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(a.0)))
        .map_or_else(|| "paragraph".to_string(), |(c, _)| c.to_string())
}

struct Context<'a> {
    provider: &'a dyn Provider,
    curated: &'a [Example],
    dataset: &'a [Example],
    cfg: &'a QaConfig,
    orders: &'a HashMap<String, Vec<String>>,
}

impl Context<'_> {
    fn process(&self, unit: &Unit) -> (Vec<QASample>, Vec<QaFailure>) {
        let page_ids: Vec<u32> = unit.pages.iter().map(|p| p.page_index).collect();
        let fail = |stage: &str, e: QaError| QaFailure {
            doc_id: unit.doc_id.clone(),
            pages: page_ids.clone(),
            stage: stage.to_string(),
            error: e.to_string(),
        };
        let mut lines: Vec<(&TextLine, u32)> = Vec::new();
        let mut parts = Vec::new();
        for p in &unit.pages {
            let ls = ordered_lines(p, self.orders);
            parts.push(join_lines(&ls, p.language));
            lines.extend(ls.into_iter().map(|l| (l, p.page_index)));
        }
        let sep = if unit.pages[0].language == Language::Zh { "" } else { " " };
        let content = parts.join(sep);
        let mut samples = Vec::new();
        let mut failures = Vec::new();
        if content.trim().is_empty() {
            return (samples, failures);
        }
        let prompt_content = PromptContent::text(content.as_str(), dominant_category(&unit.pages));
        let base = format!("{}-p{}", unit.doc_id, page_ids[0]);

        for n in 0..self.cfg.samples_per_document {
            let seed = derive_seed(self.cfg.seed, &[base.as_bytes(), &(n as u64).to_le_bytes()]);
            let draft = build_prompt(&prompt_content, PromptKind::Text, self.curated, self.dataset, seed)
                .and_then(|prompt| generate_qa(&content, &prompt, self.provider, seed, self.cfg.temperature));
            let draft = match draft {
                Ok(d) => d,
                Err(e) => {
                    failures.push(fail("generate", e));
                    continue;
                }
            };
            let mut drafts = vec![(format!("{base}-{n}"), draft)];
            match discriminate_multispan(&drafts[0].1.context, self.provider, seed) {
                Ok(true) => {
                    let multi = build_prompt(&prompt_content, PromptKind::Reasoning, self.curated, self.dataset, seed)
                        .and_then(|p| generate_qa(&content, &p, self.provider, seed, self.cfg.temperature));
                    match multi {
                        Ok(d) => drafts.push((format!("{base}-{n}m"), d)),
                        Err(e) => failures.push(fail("multispan", e)),
                    }
                }
                Ok(false) => {}
                Err(e) => failures.push(fail("discriminate", e)),
            }
            for (id, draft) in drafts {
                match self.finish(id, &unit.doc_id, &page_ids, &content, &lines, draft, seed) {
                    Ok(s) => samples.push(s),
                    Err((stage, e)) => failures.push(fail(stage, e)),
                }
            }
        }
        (samples, failures)
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        id: String,
        doc_id: &str,
        pages: &[u32],
        content: &str,
        lines: &[(&TextLine, u32)],
        draft: DraftQA,
        seed: u64,
    ) -> Result<QASample, (&'static str, QaError)> {
        let verdict = score_guardrails(&draft, content, self.provider, seed, self.cfg.retries)
            .map_err(|e| ("guardrail", e))?;
        let refs: Vec<&TextLine> = lines.iter().map(|(l, _)| *l).collect();
        let mut covered: Vec<usize> = Vec::new();
        for a in &draft.answers {
            let run = locate_in_lines(a, &refs, GROUNDING_THRESHOLD).map_err(|e| ("ground", e))?;
            covered.extend(run);
        }
        covered.sort_unstable();
        covered.dedup();
        Ok(QASample {
            id,
            doc_id: doc_id.to_string(),
            pages: pages.to_vec(),
            question: draft.question,
            answers: draft.answers,
            answer_type: draft.answer_type,
            evidence: draft.context,
            reasoning: draft.reasoning_chain,
            grounding: covered.iter().map(|&i| lines[i].0.bbox).collect(),
            grounding_pages: covered.iter().map(|&i| lines[i].1).collect(),
            scores: Scores::from(&verdict),
            retained: verdict.retained,
        })
    }
}

/// Runs the annotation workflow over `pages`.
///
/// Pages are grouped by document (first-appearance order) and sorted by
/// page index; consecutive pages are linked into logical documents, and each
/// logical document yields up to `samples_per_document` single-span samples
/// plus a multi-span sample for every draft the discriminator accepts.
/// `orders` maps page keys to line sequences; pages without an entry use
/// their stored line order. Failures are collected, never fatal.
pub fn run_qagen(
    pages: &[PageDocument],
    orders: &HashMap<String, Vec<String>>,
    provider: &dyn Provider,
    curated: &[Example],
    dataset: &[Example],
    cfg: &QaConfig,
) -> Result<QaRun, QaError> {
    cfg.validate()?;
    let mut by_doc: Vec<(String, Vec<&PageDocument>)> = Vec::new();
    for p in pages {
        match by_doc.iter_mut().find(|(d, _)| *d == p.doc_id) {
            Some((_, v)) => v.push(p),
            None => by_doc.push((p.doc_id.clone(), vec![p])),
        }
    }
    let mut run = QaRun::default();
    let mut units = Vec::new();
    for (doc_id, mut doc_pages) in by_doc {
        doc_pages.sort_by_key(|p| p.page_index);
        let texts: Vec<String> = doc_pages
            .iter()
            .map(|p| join_lines(&ordered_lines(p, orders), p.language))
            .collect();
        let seed = derive_seed(cfg.seed, &[doc_id.as_bytes(), b"link"]);
        match link_pages(&texts, provider, cfg.link_threshold, cfg.max_pages, seed) {
            Ok(groups) => units.extend(groups.into_iter().map(|g| Unit {
                doc_id: doc_id.clone(),
                pages: g.into_iter().map(|i| doc_pages[i]).collect(),
            })),
            Err(e) => run.failures.push(QaFailure {
                doc_id: doc_id.clone(),
                pages: doc_pages.iter().map(|p| p.page_index).collect(),
                stage: "link".into(),
                error: e.to_string(),
            }),
        }
    }
    run.logical_documents = units.len();

    let ctx = Context {
        provider,
        curated,
        dataset,
        cfg,
        orders,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.in_flight)
        .build()
        .map_err(|e| QaError::InvalidConfig(e.to_string()))?;
    let results: Vec<(Vec<QASample>, Vec<QaFailure>)> =
        pool.install(|| units.par_iter().map(|u| ctx.process(u)).collect());
    for (samples, failures) in results {
        run.samples.extend(samples);
        run.failures.extend(failures);
    }
    Ok(run)
}
