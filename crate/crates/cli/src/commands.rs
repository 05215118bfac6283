//! Stage drivers. Each reads its inputs, runs the stage over pages on a
//! bounded worker pool, and hands results to a single collector in input
//! order.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use vrdoc::align::{align_page, AlignConfig, AlignmentRecord};
use vrdoc::fusion::{fuse_page_with_stats, CandidateRecord, EngineWeights, OcrCandidate};
use vrdoc::metrics::{render_table, score_corpus, GroundTruthRecord, PredictionOutput, PredictionRecord, Task};
use vrdoc::model::{has_errors, load_pages, read_records, save_pages, validate_page, HtmlArticle, Language, PageDocument};
use vrdoc::order::raster::{GrayImage, SeparatorParams};
use vrdoc::order::{
    filter_page_order, layout_complexity_bleu, order_by_segmentation, order_from_alignment, order_with_hierarchy,
    ColumnConfig, FilterDecision, GeometricFilterConfig, ReadingOrder, ReadingOrderRecord, RuleSet, SegmentConfig,
};
use vrdoc::qa::{
    builtin_pools, parse_pool, run_qagen, HttpProvider, MockProvider, Provider, QaConfig, DEFAULT_PASS_RATE,
};

use crate::config::RunConfig;
use crate::manifest::Collector;

/// How a command ended when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Complete,
    /// Some pages or samples failed; they are reported in the outputs.
    Partial,
}

impl Status {
    fn from_failures(n: usize) -> Self {
        if n == 0 {
            Status::Complete
        } else {
            Status::Partial
        }
    }
}

pub struct Ctx {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub seed: u64,
    pool: rayon::ThreadPool,
}

impl Ctx {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        let out = cfg.path("out").unwrap_or_else(|| PathBuf::from("vrdoc-out"));
        let seed = cfg.int("seed", 0) as u64;
        let jobs = cfg.int("jobs", 4) as usize;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
        Ok(Self { cfg, out, seed, pool })
    }

    fn input(&self, key: &str, default_name: &str) -> PathBuf {
        self.cfg.path(key).unwrap_or_else(|| self.out.join(default_name))
    }

    fn finish(&self, c: Collector, command: &str) -> Result<()> {
        c.finish(command, self.seed, &self.cfg.snapshot())
    }
}

#[derive(Debug, Serialize)]
struct PageFailure {
    page: String,
    error: String,
}

fn read_pages(c: &mut Collector, path: &Path) -> Result<Vec<PageDocument>> {
    let bytes = c.read(path)?;
    load_pages(bytes.as_slice()).with_context(|| format!("invalid page file {}", path.display()))
}

fn read_jsonl<T: serde::de::DeserializeOwned>(c: &mut Collector, path: &Path) -> Result<Vec<T>> {
    let bytes = c.read(path)?;
    read_records(bytes.as_slice()).with_context(|| format!("invalid records in {}", path.display()))
}

fn line_sep(lang: Language) -> &'static str {
    match lang {
        Language::En => " ",
        Language::Zh => "",
    }
}

// ---------------------------------------------------------------- fuse

#[derive(Debug, Serialize, Default)]
struct FuseSummary {
    pages: usize,
    lines_fused: usize,
    ties: usize,
    changed: usize,
    failures: Vec<PageFailure>,
}

pub fn fuse(ctx: &Ctx) -> Result<Status> {
    let mut c = Collector::new(&ctx.out);
    let pages = read_pages(&mut c, &ctx.cfg.require_path("pages")?)?;
    let records: Vec<CandidateRecord> = read_jsonl(&mut c, &ctx.cfg.require_path("candidates")?)?;
    let weights = EngineWeights(ctx.cfg.engine_weights().into_iter().collect());

    let mut per_page: HashMap<String, HashMap<String, Vec<OcrCandidate>>> = HashMap::new();
    for r in records {
        let mut cands = r.candidates;
        weights.apply(&mut cands);
        per_page
            .entry(vrdoc::model::page_key(&r.doc_id, r.page_index))
            .or_default()
            .entry(r.line_id)
            .or_default()
            .extend(cands);
    }
    let mut summary = FuseSummary {
        pages: pages.len(),
        ..FuseSummary::default()
    };
    for key in per_page.keys() {
        if !pages.iter().any(|p| &p.key() == key) {
            summary.failures.push(PageFailure {
                page: key.clone(),
                error: "candidates for a page that is not in the page file".into(),
            });
        }
    }
    summary.failures.sort_by(|a, b| a.page.cmp(&b.page));

    let empty = HashMap::new();
    let results: Vec<_> = ctx.pool.install(|| {
        pages
            .par_iter()
            .map(|p| fuse_page_with_stats(p, per_page.get(&p.key()).unwrap_or(&empty)))
            .collect()
    });
    let mut fused = Vec::with_capacity(pages.len());
    for (page, r) in pages.iter().zip(results) {
        match r {
            Ok((f, s)) => {
                summary.lines_fused += s.lines_fused;
                summary.ties += s.ties;
                summary.changed += s.changed;
                fused.push(f);
            }
            Err(e) => {
                summary.failures.push(PageFailure {
                    page: page.key(),
                    error: e.to_string(),
                });
                fused.push(page.clone());
            }
        }
    }
    let predictions: Vec<PredictionRecord> = fused
        .iter()
        .map(|p| PredictionRecord {
            id: p.key(),
            task: Task::Ocr,
            output: PredictionOutput::Text(
                p.lines.iter().map(|l| l.text.as_str()).collect::<Vec<_>>().join("\n"),
            ),
        })
        .collect();

    let mut bytes = Vec::new();
    save_pages(&mut bytes, &fused)?;
    c.add("fused.jsonl", bytes);
    c.add_jsonl("predictions_ocr.jsonl", &predictions);
    c.add_json("fuse_stats.json", &summary);
    ctx.finish(c, "fuse")?;
    println!(
        "fuse: {} pages, {} lines fused, {} ties, {} changed, {} failures",
        summary.pages,
        summary.lines_fused,
        summary.ties,
        summary.changed,
        summary.failures.len()
    );
    Ok(Status::from_failures(summary.failures.len()))
}

// ---------------------------------------------------------------- align

fn align_config(cfg: &RunConfig) -> Result<AlignConfig> {
    let d = AlignConfig::default();
    let a = AlignConfig {
        text_sim_threshold: cfg.float("align.text_sim_threshold", d.text_sim_threshold),
        spatial_tolerance: cfg.opt_float("align.spatial_tolerance"),
        context_threshold: cfg.float("align.context_threshold", d.context_threshold),
    };
    a.validate()?;
    Ok(a)
}

#[derive(Debug, Serialize)]
struct AlignPageStats {
    page: String,
    lines: usize,
    matched: usize,
    unmatched: usize,
}

#[derive(Debug, Serialize)]
struct AlignSummary {
    pages: usize,
    lines: usize,
    matched: usize,
    unmatched: usize,
    unmatched_ratio: f64,
    per_page: Vec<AlignPageStats>,
    failures: Vec<PageFailure>,
}

pub fn align(ctx: &Ctx) -> Result<Status> {
    let acfg = align_config(&ctx.cfg)?;
    let mut c = Collector::new(&ctx.out);
    let pages = read_pages(&mut c, &ctx.input("align.pages", "fused.jsonl"))?;
    let articles: Vec<HtmlArticle> = read_jsonl(&mut c, &ctx.cfg.require_path("html")?)?;
    let by_id: HashMap<&str, &HtmlArticle> = articles.iter().map(|a| (a.article_id.as_str(), a)).collect();

    // Articles are looked up by page key first, then by document id.
    let results: Vec<_> = ctx.pool.install(|| {
        pages
            .par_iter()
            .map(|p| {
                let article = by_id.get(p.key().as_str()).or_else(|| by_id.get(p.doc_id.as_str()));
                let blocks = article.map(|a| a.blocks.as_slice()).unwrap_or(&[]);
                (article.is_some(), align_page(p, blocks, &acfg))
            })
            .collect()
    });
    let mut records = Vec::new();
    let mut per_page = Vec::new();
    let mut failures = Vec::new();
    for (p, (found, aligned)) in pages.iter().zip(results) {
        if !found {
            failures.push(PageFailure {
                page: p.key(),
                error: "no HTML article for this page".into(),
            });
        }
        per_page.push(AlignPageStats {
            page: p.key(),
            lines: aligned.total_lines(),
            matched: aligned.matched_count(),
            unmatched: aligned.unmatched.len(),
        });
        records.push(AlignmentRecord {
            doc_id: p.doc_id.clone(),
            page_index: p.page_index,
            aligned,
        });
    }
    let lines: usize = per_page.iter().map(|s| s.lines).sum();
    let matched: usize = per_page.iter().map(|s| s.matched).sum();
    let unmatched: usize = per_page.iter().map(|s| s.unmatched).sum();
    let summary = AlignSummary {
        pages: pages.len(),
        lines,
        matched,
        unmatched,
        unmatched_ratio: if lines == 0 { 0.0 } else { unmatched as f64 / lines as f64 },
        per_page,
        failures,
    };
    c.add_jsonl("alignment.jsonl", &records);
    c.add_json("align_stats.json", &summary);
    ctx.finish(c, "align")?;
    println!(
        "align: {} pages, {} lines, {} matched, {} unmatched (ratio {:.4}), {} failures",
        summary.pages,
        summary.lines,
        summary.matched,
        summary.unmatched,
        summary.unmatched_ratio,
        summary.failures.len()
    );
    Ok(Status::from_failures(summary.failures.len()))
}

// ---------------------------------------------------------------- order

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Html,
    Hierarchy,
    Segment,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "html" => Ok(Strategy::Html),
            "hierarchy" => Ok(Strategy::Hierarchy),
            "segment" => Ok(Strategy::Segment),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

fn segment_config(cfg: &RunConfig) -> SegmentConfig {
    let d = SegmentConfig::default();
    SegmentConfig {
        threshold: cfg.int("segment.threshold", i64::from(d.threshold)) as u8,
        separators: SeparatorParams {
            min_run_fraction: cfg.float("segment.min_run_fraction", d.separators.min_run_fraction),
            dilation_radius: cfg.int("segment.dilation", d.separators.dilation_radius as i64) as usize,
            erosion_radius: cfg.int("segment.erosion", d.separators.erosion_radius as i64) as usize,
        },
        columns: ColumnConfig {
            gap_factor: cfg.float("segment.gap_factor", d.columns.gap_factor),
            word_gap_ratio: cfg.float("segment.word_gap_ratio", d.columns.word_gap_ratio),
            headline_factor: cfg.float("segment.headline_factor", d.columns.headline_factor),
        },
    }
}

fn filter_config(cfg: &RunConfig, width: u32) -> GeometricFilterConfig {
    let d = GeometricFilterConfig::for_page_width(width);
    GeometricFilterConfig {
        t1: cfg.float("order.t1", d.t1),
        theta1_deg: cfg.float("order.theta1", d.theta1_deg),
        max_invalid: cfg.int("order.max_invalid", d.max_invalid as i64) as usize,
    }
}

/// File name of a page raster inside the image directory.
pub fn image_name(doc_id: &str, page_index: u32) -> String {
    format!("{doc_id}_{page_index}.pgm")
}

#[derive(Debug, Serialize)]
struct OrderPageStats {
    page: String,
    kept: bool,
    invalid_links: usize,
    /// Cumulative BLEU-1..4 of the naive top-left sort against the predicted order.
    complexity: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct OrderSummary {
    strategy: String,
    pages: usize,
    kept: usize,
    discarded: usize,
    mean_complexity: Vec<f64>,
    per_page: Vec<OrderPageStats>,
    failures: Vec<PageFailure>,
}

fn segment_texts(page: &PageDocument, order: &ReadingOrder) -> (Vec<String>, Vec<String>) {
    let lines = order
        .line_sequence
        .iter()
        .filter_map(|id| page.line(id).map(|l| l.text.clone()))
        .collect();
    let paras = order
        .para_sequence
        .iter()
        .map(|b| {
            page.block_lines(b)
                .iter()
                .map(|l| l.text.as_str())
                .collect::<Vec<_>>()
                .join(line_sep(page.language))
        })
        .filter(|t| !t.is_empty())
        .collect();
    (lines, paras)
}

pub fn order(ctx: &Ctx, strategy: Strategy) -> Result<Status> {
    let name = match strategy {
        Strategy::Html => "html",
        Strategy::Hierarchy => "hierarchy",
        Strategy::Segment => "segment",
    };
    let rules = match ctx.cfg.get("order.rules") {
        Some(s) => RuleSet::parse_list(s)?,
        None => RuleSet::default(),
    };
    rules.closure()?;
    for p in [100, 1000] {
        filter_config(&ctx.cfg, p).validate()?;
    }
    let seg_cfg = segment_config(&ctx.cfg);

    let mut c = Collector::new(&ctx.out);
    let pages = read_pages(&mut c, &ctx.input("order.pages", "fused.jsonl"))?;

    // Per-page source for the chosen strategy, read up front so digests are recorded.
    let mut alignments: HashMap<String, AlignmentRecord> = HashMap::new();
    let mut images: HashMap<String, Result<GrayImage, String>> = HashMap::new();
    match strategy {
        Strategy::Html | Strategy::Hierarchy => {
            let recs: Vec<AlignmentRecord> = read_jsonl(&mut c, &ctx.input("order.alignment", "alignment.jsonl"))?;
            for r in recs {
                alignments.insert(vrdoc::model::page_key(&r.doc_id, r.page_index), r);
            }
        }
        Strategy::Segment => {
            let dir = ctx.cfg.require_path("images")?;
            if !dir.is_dir() {
                bail!("image directory {} does not exist", dir.display());
            }
            for p in &pages {
                let path = dir.join(image_name(&p.doc_id, p.page_index));
                let img = match c.read(&path) {
                    Ok(bytes) => GrayImage::from_pgm(&bytes).map_err(|e| e.to_string()),
                    Err(e) => Err(format!("{e:#}")),
                };
                images.insert(p.key(), img);
            }
        }
    }

    let results: Vec<Result<ReadingOrder, String>> = ctx.pool.install(|| {
        pages
            .par_iter()
            .map(|p| match strategy {
                Strategy::Html => alignments
                    .get(&p.key())
                    .map(|a| order_from_alignment(&a.aligned))
                    .ok_or_else(|| "no alignment for this page".to_string()),
                Strategy::Hierarchy => {
                    let a = alignments.get(&p.key()).ok_or_else(|| "no alignment for this page".to_string())?;
                    let html_seq = order_from_alignment(&a.aligned).para_sequence;
                    order_with_hierarchy(&p.blocks, &html_seq, &rules).map_err(|e| e.to_string())
                }
                Strategy::Segment => match &images[&p.key()] {
                    Ok(img) => Ok(order_by_segmentation(p, img, &seg_cfg)),
                    Err(e) => Err(e.clone()),
                },
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut rop_line = Vec::new();
    let mut rop_para = Vec::new();
    let mut per_page = Vec::new();
    let mut failures = Vec::new();
    for (p, r) in pages.iter().zip(results) {
        let order = match r {
            Ok(o) => o,
            Err(e) => {
                failures.push(PageFailure { page: p.key(), error: e });
                continue;
            }
        };
        let outcome = filter_page_order(&order, p, &filter_config(&ctx.cfg, p.width));
        let complexity = layout_complexity_bleu(&order.line_sequence, &p.lines, 4).cumulative;
        per_page.push(OrderPageStats {
            page: p.key(),
            kept: outcome.decision == FilterDecision::Keep,
            invalid_links: outcome.invalid_links,
            complexity,
        });
        let (lines, paras) = segment_texts(p, &order);
        rop_line.push(PredictionRecord {
            id: p.key(),
            task: Task::RopLine,
            output: PredictionOutput::List(lines),
        });
        rop_para.push(PredictionRecord {
            id: p.key(),
            task: Task::RopPara,
            output: PredictionOutput::List(paras),
        });
        records.push(ReadingOrderRecord::new(p, &outcome));
    }
    let kept = per_page.iter().filter(|s| s.kept).count();
    let mut mean_complexity = vec![0.0; 4];
    for s in &per_page {
        for (m, v) in mean_complexity.iter_mut().zip(&s.complexity) {
            *m += v / per_page.len() as f64;
        }
    }
    let summary = OrderSummary {
        strategy: name.to_string(),
        pages: pages.len(),
        kept,
        discarded: per_page.len() - kept,
        mean_complexity,
        per_page,
        failures,
    };
    c.add_jsonl("orders.jsonl", &records);
    c.add_jsonl("predictions_rop_line.jsonl", &rop_line);
    c.add_jsonl("predictions_rop_para.jsonl", &rop_para);
    c.add_json("order_stats.json", &summary);
    ctx.finish(c, "order")?;
    let bleu: Vec<String> = summary.mean_complexity.iter().map(|v| format!("{v:.4}")).collect();
    println!(
        "order ({name}): {} pages, {} kept, {} discarded, {} failures, mean complexity BLEU-1..4 [{}]",
        summary.pages,
        summary.kept,
        summary.discarded,
        summary.failures.len(),
        bleu.join(", ")
    );
    Ok(Status::from_failures(summary.failures.len()))
}

// ---------------------------------------------------------------- qagen

fn provider(cfg: &RunConfig) -> Result<Box<dyn Provider>> {
    match cfg.text("provider.kind", "mock") {
        "mock" => {
            let mock = match cfg.path("provider.script") {
                Some(p) => MockProvider::from_script(&p)?,
                None => MockProvider::new(),
            };
            Ok(Box::new(mock.with_pass_rate(cfg.float("provider.pass_rate", DEFAULT_PASS_RATE))))
        }
        _ => {
            let base = cfg
                .get("provider.base_url")
                .ok_or_else(|| anyhow!("provider.kind = http needs provider.base_url"))?;
            let model = cfg
                .get("provider.model")
                .ok_or_else(|| anyhow!("provider.kind = http needs provider.model"))?;
            let key = cfg
                .get("provider.api_key_env")
                .and_then(|var| std::env::var(var).ok());
            Ok(Box::new(HttpProvider::new(
                base,
                model,
                key,
                Duration::from_secs(cfg.int("provider.timeout_secs", 60) as u64),
                cfg.int("provider.retries", 2) as u32,
            )?))
        }
    }
}

#[derive(Debug, Serialize)]
struct QaSummary {
    logical_documents: usize,
    samples: usize,
    retained: usize,
    rejected: usize,
    retention_ratio: Option<f64>,
    multi_span: usize,
    failures: usize,
    failures_by_stage: BTreeMap<String, usize>,
}

pub fn qagen(ctx: &Ctx) -> Result<Status> {
    let d = QaConfig::default();
    let qcfg = QaConfig {
        seed: ctx.seed,
        samples_per_document: ctx.cfg.int("qa.samples_per_document", d.samples_per_document as i64) as usize,
        link_threshold: ctx.cfg.float("qa.link_threshold", d.link_threshold),
        max_pages: ctx.cfg.int("qa.max_pages", d.max_pages as i64) as usize,
        temperature: ctx.cfg.float("qa.temperature", d.temperature),
        retries: ctx.cfg.int("qa.retries", i64::from(d.retries)) as u32,
        in_flight: ctx.cfg.int("qa.in_flight", ctx.cfg.int("jobs", d.in_flight as i64)) as usize,
    };
    qcfg.validate()?;
    let provider = provider(&ctx.cfg)?;

    let mut c = Collector::new(&ctx.out);
    let pages = read_pages(&mut c, &ctx.input("qagen.pages", "fused.jsonl"))?;
    let orders_path = ctx.input("qagen.orders", "orders.jsonl");
    let mut orders = HashMap::new();
    if ctx.cfg.get("qagen.orders").is_some() || orders_path.exists() {
        let recs: Vec<ReadingOrderRecord> = read_jsonl(&mut c, &orders_path)?;
        for r in recs {
            orders.insert(vrdoc::model::page_key(&r.doc_id, r.page_index), r.line_sequence);
        }
    }
    let (mut curated, mut dataset) = builtin_pools();
    for (key, pool) in [("examples.curated", &mut curated), ("examples.dataset", &mut dataset)] {
        if let Some(p) = ctx.cfg.path(key) {
            let bytes = c.read(&p)?;
            *pool = parse_pool(&String::from_utf8_lossy(&bytes))?;
        }
    }

    let run = run_qagen(&pages, &orders, provider.as_ref(), &curated, &dataset, &qcfg)?;
    let retained = run.samples.iter().filter(|s| s.retained).count();
    let mut by_stage = BTreeMap::new();
    for f in &run.failures {
        *by_stage.entry(f.stage.clone()).or_insert(0) += 1;
    }
    let summary = QaSummary {
        logical_documents: run.logical_documents,
        samples: run.samples.len(),
        retained,
        rejected: run.samples.len() - retained,
        retention_ratio: (!run.samples.is_empty()).then(|| retained as f64 / run.samples.len() as f64),
        multi_span: run
            .samples
            .iter()
            .filter(|s| s.answer_type == vrdoc::qa::AnswerType::Multi)
            .count(),
        failures: run.failures.len(),
        failures_by_stage: by_stage,
    };
    c.add_jsonl("qa_samples.jsonl", &run.samples);
    c.add_jsonl("qa_failures.jsonl", &run.failures);
    c.add_json("qa_stats.json", &summary);
    ctx.finish(c, "qagen")?;
    println!(
        "qagen: {} logical documents, {} samples, {} retained ({}), {} failures",
        summary.logical_documents,
        summary.samples,
        summary.retained,
        summary
            .retention_ratio
            .map_or("n/a".to_string(), |r| format!("{:.1}%", 100.0 * r)),
        summary.failures
    );
    Ok(Status::from_failures(summary.failures))
}

// ---------------------------------------------------------------- eval

pub fn eval(ctx: &Ctx) -> Result<Status> {
    let task: Task = ctx
        .cfg
        .get("eval.task")
        .ok_or_else(|| anyhow!("eval needs a task (--task or eval.task)"))?
        .parse()
        .map_err(|e: String| anyhow!(e))?;
    let mut c = Collector::new(&ctx.out);
    let gt: Vec<GroundTruthRecord> = read_jsonl(&mut c, &ctx.cfg.require_path("ground_truth")?)?;
    let pred_path = ctx.input("eval.predictions", &format!("predictions_{}.jsonl", task.as_str()));
    // Layout complexity needs no predictions.
    let preds: Vec<PredictionRecord> = if task == Task::Complexity && !pred_path.exists() {
        Vec::new()
    } else {
        read_jsonl(&mut c, &pred_path)?
    };
    let report = score_corpus(&preds, &gt, task)?;
    let table = render_table(&report);
    c.add_json(&format!("report_{}.json", task.as_str()), &report);
    c.add(&format!("report_{}.txt", task.as_str()), table.clone().into_bytes());
    ctx.finish(c, &format!("eval_{}", task.as_str()))?;
    print!("{table}");
    Ok(Status::Complete)
}

// ---------------------------------------------------------------- stats

#[derive(Debug, Serialize, Default)]
struct PageStats {
    pages: usize,
    documents: usize,
    lines: usize,
    blocks: usize,
    languages: BTreeMap<String, usize>,
    categories: BTreeMap<String, usize>,
    /// Mean cumulative BLEU-1..4 of the naive sort against the stored line order.
    stored_order_complexity: Vec<f64>,
    validation_errors: usize,
    validation_warnings: usize,
}

pub fn stats(ctx: &Ctx) -> Result<Status> {
    let mut c = Collector::new(&ctx.out);
    let path = ctx.input("pages", "fused.jsonl");
    let pages = read_pages(&mut c, &path)?;
    let mut s = PageStats {
        pages: pages.len(),
        stored_order_complexity: vec![0.0; 4],
        ..PageStats::default()
    };
    let mut docs = std::collections::BTreeSet::new();
    let mut invalid = false;
    for p in &pages {
        docs.insert(p.doc_id.as_str());
        s.lines += p.lines.len();
        s.blocks += p.blocks.len();
        let lang = serde_json::to_value(p.language)?.as_str().unwrap_or("?").to_string();
        *s.languages.entry(lang).or_insert(0) += 1;
        for b in &p.blocks {
            *s.categories.entry(b.category.clone()).or_insert(0) += 1;
        }
        let issues = validate_page(p);
        invalid |= has_errors(&issues);
        for i in &issues {
            match i.severity {
                vrdoc::model::Severity::Error => s.validation_errors += 1,
                vrdoc::model::Severity::Warn => s.validation_warnings += 1,
            }
            eprintln!("{}: {}: {}", p.key(), i.path, i.message);
        }
        let ids: Vec<String> = p.lines.iter().map(|l| l.line_id.clone()).collect();
        let bleu = layout_complexity_bleu(&ids, &p.lines, 4).cumulative;
        for (m, v) in s.stored_order_complexity.iter_mut().zip(bleu) {
            *m += v / pages.len() as f64;
        }
    }
    s.documents = docs.len();
    c.add_json("stats.json", &s);
    ctx.finish(c, "stats")?;
    println!(
        "stats: {} pages in {} documents, {} lines, {} blocks, {} validation errors, {} warnings",
        s.pages, s.documents, s.lines, s.blocks, s.validation_errors, s.validation_warnings
    );
    for (k, v) in &s.categories {
        println!("  {k:<12} {v}");
    }
    Ok(if invalid { Status::Partial } else { Status::Complete })
}

// ---------------------------------------------------------------- synth

const RUN_CONF: &str = "\
# Run configuration for the synthetic corpus.
seed = 7
jobs = 4
pages = pages.jsonl
candidates = candidates.jsonl
html = html.jsonl
images = images
ground_truth = ground_truth.jsonl
order.strategy = segment
# Rasters are at quarter scale, where text lines sit 5 px apart.
segment.dilation = 1
segment.erosion = 1
# The default link length (a tenth of the page width) flags the step from a
# short closing line to the next paragraph on these narrow columns.
order.t1 = 300
qa.samples_per_document = 2
provider.kind = mock
";

/// Writes the seeded synthetic corpus into `dir`.
pub fn synth(dir: &Path, seed: u64) -> Result<()> {
    let corpus = vrdoc::synth::generate(seed);
    std::fs::create_dir_all(dir.join("images"))?;
    let jsonl = |name: &str, f: &dyn Fn(&mut Vec<u8>) -> Result<()>| -> Result<()> {
        let mut bytes = Vec::new();
        f(&mut bytes)?;
        std::fs::write(dir.join(name), bytes).with_context(|| format!("cannot write {name}"))
    };
    jsonl("pages.jsonl", &|b| Ok(save_pages(b, &corpus.pages)?))?;
    jsonl("candidates.jsonl", &|b| Ok(vrdoc::model::write_records(b, &corpus.candidates)?))?;
    jsonl("html.jsonl", &|b| Ok(vrdoc::model::write_records(b, &corpus.html)?))?;
    jsonl("ground_truth.jsonl", &|b| Ok(vrdoc::model::write_records(b, &corpus.ground_truth())?))?;
    jsonl("predictions_vqa.jsonl", &|b| Ok(vrdoc::model::write_records(b, &corpus.vqa_predictions(seed))?))?;
    for (name, img) in &corpus.images {
        let mut bytes = Vec::new();
        img.write_pgm(&mut bytes)?;
        std::fs::write(dir.join("images").join(name), bytes)?;
    }
    std::fs::write(dir.join("run.conf"), RUN_CONF.replace("seed = 7", &format!("seed = {seed}")))?;
    println!("synth: {} pages written to {}", corpus.pages.len(), dir.display());
    Ok(())
}
