//! Seeded synthetic corpus: bilingual newspaper-like pages with per-engine
//! OCR noise, the matching HTML articles, page rasters and ground truth.
//!
//! Everything is a pure function of the seed.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fusion::{CandidateRecord, OcrCandidate};
use crate::metrics::{GroundTruthRecord, GtLine, PredictionOutput, PredictionRecord, Task};
use crate::model::{page_key, BBox, HtmlArticle, HtmlBlock, Language, LayoutBlock, PageDocument, TextLine};
use crate::order::raster::GrayImage;

pub const PAGE_WIDTH: u32 = 1000;
pub const PAGE_HEIGHT: u32 = 1400;
/// Page pixels per raster pixel.
pub const IMAGE_SCALE: u32 = 4;

/// `(engine id, weight, confidence range, chance of corrupting a line)`.
pub const ENGINES: [(&str, f64, (f64, f64), f64); 3] = [
    ("alpha", 0.5, (0.85, 0.99), 0.1),
    ("beta", 0.3, (0.70, 0.95), 0.35),
    ("gamma", 0.2, (0.60, 0.90), 0.5),
];

const LINE_PITCH: i64 = 22;
const TEXT_HEIGHT: i64 = 16;
const MARGIN: i64 = 60;
const COLUMN_X: [i64; 2] = [60, 520];
const COLUMN_WIDTH: i64 = 420;
const BODY_TOP: i64 = 140;
const BODY_BOTTOM: i64 = 1300;
const RULE_Y: i64 = 110;
const GUTTER_X: i64 = 498;

const EN_SUBJECTS: &[&str] = &[
    "The city council",
    "Local farmers",
    "The harbour authority",
    "Researchers at the institute",
    "The regional museum",
    "Transport officials",
    "A group of volunteers",
    "The school board",
    "Bridge engineers",
    "The youth orchestra",
    "Hospital managers",
    "The weather bureau",
];
const EN_VERBS: &[&str] = &[
    "approved", "reported", "announced", "completed", "reviewed", "delayed", "expanded", "funded",
    "measured", "unveiled",
];
const EN_OBJECTS: &[&str] = &[
    "a budget of {n} million",
    "{n} new bus routes",
    "the river crossing",
    "plans for {n} homes",
    "a survey of {n} households",
    "the northern rail link",
    "repairs to {n} bridges",
    "a festival lasting {n} days",
    "the water treatment plant",
    "{n} hectares of parkland",
    "a grant for {n} students",
    "the coastal flood barrier",
];
const EN_TAILS: &[&str] = &[
    "on Monday.",
    "after a long debate.",
    "ahead of schedule.",
    "despite heavy rain.",
    "for the coming year.",
    "in the spring.",
    "with support from residents.",
    "earlier than expected.",
    "at a packed meeting.",
    "following a public vote.",
];
const EN_TITLES: &[&str] = &[
    "Council Backs River Plan",
    "Rail Link Moves Ahead",
    "Harbour Gets New Funding",
    "Museum Opens East Wing",
    "Farmers Report Record Year",
    "Schools Plan Major Repairs",
    "Festival Returns to Town",
    "Floods Prompt New Barrier",
];
const EN_CAPTIONS: &[&str] = &[
    "Figure: visitors at the opening of the new wing",
    "Figure: the harbour seen from the northern pier",
    "Figure: volunteers planting trees along the river",
];

const ZH_SUBJECTS: &[&str] = &[
    "市政府",
    "研究人员",
    "当地农民",
    "交通部门",
    "博物馆",
    "志愿者团队",
    "教育局",
    "工程师们",
    "气象部门",
    "医院管理层",
];
const ZH_VERBS: &[&str] = &["宣布了", "完成了", "批准了", "公布了", "启动了", "评估了", "扩大了", "资助了"];
const ZH_OBJECTS: &[&str] = &[
    "{n}项新的建设计划",
    "城市北部的铁路工程",
    "{n}条公交线路的调整方案",
    "河道整治项目",
    "{n}所学校的改造工作",
    "新的环保标准",
    "{n}公顷公园绿地的规划",
    "沿海防洪设施的建设",
];
const ZH_TAILS: &[&str] = &[
    "预计明年完工。",
    "受到市民广泛关注。",
    "将分阶段实施。",
    "比原计划提前。",
    "得到居民支持。",
    "经过多轮讨论。",
];
const ZH_TITLES: &[&str] = &["城市铁路建设提速", "河道整治全面启动", "学校改造计划公布", "公园绿地规划出炉"];
const ZH_NOISE: &[char] = &['未', '末', '己', '已', '日', '曰', '人', '入', '土', '士', '大', '太'];

/// What the generator knows about one page.
#[derive(Debug, Clone, PartialEq)]
pub struct PageTruth {
    pub key: String,
    /// True text of every line, garbage included.
    pub text: BTreeMap<String, String>,
    /// Reading order of article lines (garbage excluded).
    pub order: Vec<String>,
    /// Reading order of article blocks.
    pub para_order: Vec<String>,
    /// HTML block index of each article line.
    pub block_of: BTreeMap<String, usize>,
    /// Lines with no HTML counterpart.
    pub garbage: Vec<String>,
    pub question: String,
    pub answers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    /// Pages carrying the noisiest engine's text.
    pub pages: Vec<PageDocument>,
    pub candidates: Vec<CandidateRecord>,
    /// One article per page, keyed by the page key.
    pub html: Vec<HtmlArticle>,
    /// `(file name, raster)` per page, at 1/[`IMAGE_SCALE`] resolution.
    pub images: Vec<(String, GrayImage)>,
    pub truth: Vec<PageTruth>,
}

pub fn image_name(doc_id: &str, page_index: u32) -> String {
    format!("{doc_id}_{page_index}.pgm")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    TwoColumn,
    Feature,
}

/// `(doc id, language, layout, pages)`.
const DOCUMENTS: [(&str, Language, Layout, u32); 3] = [
    ("gazette", Language::En, Layout::TwoColumn, 4),
    ("ribao", Language::Zh, Layout::TwoColumn, 4),
    ("review", Language::En, Layout::Feature, 2),
];

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs[rng.gen_range(0..xs.len())]
}

/// One sentence plus the object phrase it contains.
fn sentence(rng: &mut ChaCha8Rng, lang: Language) -> (String, String, String) {
    let n = rng.gen_range(2..100).to_string();
    match lang {
        Language::En => {
            let subject = pick(rng, EN_SUBJECTS);
            let verb = pick(rng, EN_VERBS);
            let object = pick(rng, EN_OBJECTS).replace("{n}", &n);
            let tail = pick(rng, EN_TAILS);
            (
                format!("{subject} {verb} {object} {tail}"),
                format!("What was {verb} by {}?", subject.to_lowercase()),
                object,
            )
        }
        Language::Zh => {
            let subject = pick(rng, ZH_SUBJECTS);
            let verb = pick(rng, ZH_VERBS);
            let object = pick(rng, ZH_OBJECTS).replace("{n}", &n);
            let tail = pick(rng, ZH_TAILS);
            (
                format!("{subject}{verb}{object}，{tail}"),
                format!("{subject}{verb}什么？"),
                object,
            )
        }
    }
}

fn paragraph(rng: &mut ChaCha8Rng, lang: Language, sentences: usize) -> (String, Vec<(String, String)>) {
    let mut parts = Vec::new();
    let mut qa = Vec::new();
    for _ in 0..sentences {
        let (s, q, a) = sentence(rng, lang);
        parts.push(s);
        qa.push((q, a));
    }
    let sep = if lang == Language::En { " " } else { "" };
    (parts.join(sep), qa)
}

fn greedy_wrap(text: &str, lang: Language, max: usize) -> Vec<String> {
    let mut lines = Vec::new();
    match lang {
        Language::En => {
            let mut cur = String::new();
            for w in text.split(' ') {
                if !cur.is_empty() && cur.chars().count() + 1 + w.chars().count() > max {
                    lines.push(std::mem::take(&mut cur));
                }
                if !cur.is_empty() {
                    cur.push(' ');
                }
                cur.push_str(w);
            }
            if !cur.is_empty() {
                lines.push(cur);
            }
        }
        Language::Zh => {
            let chars: Vec<char> = text.chars().collect();
            lines.extend(chars.chunks(max).map(|c| c.iter().collect()));
        }
    }
    lines
}

/// Wraps to at most `max` chars per line, narrowing the measure when the
/// last line would be too short to identify its paragraph.
fn wrap(text: &str, lang: Language, max: usize) -> Vec<String> {
    let min_tail = if lang == Language::En { 16 } else { 6 };
    let mut width = max;
    loop {
        let lines = greedy_wrap(text, lang, width);
        let short = lines.len() > 1 && lines.last().is_some_and(|l| l.chars().count() < min_tail);
        if !short || width <= max / 2 {
            return lines;
        }
        width -= 2;
    }
}

fn char_width(lang: Language) -> i64 {
    match lang {
        Language::En => 9,
        Language::Zh => 20,
    }
}

/// Corrupts `text` with 1..=`max_edits` character edits; never returns
/// `text` itself or an empty string.
fn corrupt(text: &str, lang: Language, max_edits: usize, rng: &mut ChaCha8Rng) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    let edits = rng.gen_range(1..=max_edits.max(1));
    for _ in 0..edits {
        let noise = |rng: &mut ChaCha8Rng, c: Option<char>| match lang {
            Language::En => match c {
                Some('l') => '1',
                Some('o') => '0',
                Some('e') => 'c',
                Some('i') => 'l',
                Some('s') => '5',
                Some('n') => 'm',
                _ => char::from(b'a' + rng.gen_range(0..26u8)),
            },
            Language::Zh => ZH_NOISE[rng.gen_range(0..ZH_NOISE.len())],
        };
        let op = rng.gen_range(0..20);
        if chars.is_empty() || op < 3 {
            let at = rng.gen_range(0..=chars.len());
            let c = noise(rng, None);
            chars.insert(at, c);
        } else if op < 6 && chars.len() > 1 {
            let at = rng.gen_range(0..chars.len());
            chars.remove(at);
        } else {
            let at = rng.gen_range(0..chars.len());
            let c = noise(rng, Some(chars[at]));
            chars[at] = c;
        }
    }
    let out: String = chars.into_iter().collect();
    if out == text || out.trim().is_empty() {
        format!("{text}~")
    } else {
        out
    }
}

struct PageBuilder {
    lang: Language,
    lines: Vec<TextLine>,
    blocks: Vec<LayoutBlock>,
    html: Vec<HtmlBlock>,
    order: Vec<String>,
    garbage: Vec<String>,
    block_of: BTreeMap<String, usize>,
    strokes: Vec<(BBox, u8)>,
    qa: Vec<(String, String)>,
}

impl PageBuilder {
    fn new(lang: Language) -> Self {
        Self {
            lang,
            lines: Vec::new(),
            blocks: Vec::new(),
            html: Vec::new(),
            order: Vec::new(),
            garbage: Vec::new(),
            block_of: BTreeMap::new(),
            strokes: Vec::new(),
            qa: Vec::new(),
        }
    }

    fn next_line_id(&self) -> String {
        format!("l{:03}", self.lines.len())
    }

    /// Adds a block of lines starting at `(x, y)`; returns the y below it.
    #[allow(clippy::too_many_arguments)]
    fn block(
        &mut self,
        category: &str,
        element: Option<&str>,
        texts: &[String],
        x: i64,
        y: i64,
        font: f64,
        pitch: i64,
        glyph: i64,
    ) -> i64 {
        let block_id = format!("b{}", self.blocks.len());
        let mut ids = Vec::new();
        let mut bbox: Option<BBox> = None;
        let j = self.html.len();
        let cw = (char_width(self.lang) as f64 * font / 11.0).round() as i64;
        for (k, text) in texts.iter().enumerate() {
            let id = self.next_line_id();
            let y0 = y + k as i64 * pitch;
            let b = BBox::new(x, y0, x + cw * text.chars().count() as i64, y0 + glyph);
            bbox = Some(match bbox {
                None => b,
                Some(u) => BBox::new(u.x0.min(b.x0), u.y0.min(b.y0), u.x1.max(b.x1), u.y1.max(b.y1)),
            });
            self.lines.push(TextLine {
                line_id: id.clone(),
                text: text.clone(),
                bbox: b,
                font_size: Some(font),
                font_style: None,
                block_id: block_id.clone(),
            });
            self.strokes.push((b, 60));
            match element {
                Some(_) => {
                    self.order.push(id.clone());
                    self.block_of.insert(id.clone(), j);
                }
                None => self.garbage.push(id.clone()),
            }
            ids.push(id);
        }
        let bbox = bbox.expect("blocks have lines");
        if let Some(element) = element {
            let sep = if self.lang == Language::En { " " } else { "" };
            self.html.push(HtmlBlock {
                index: j,
                text: texts.join(sep),
                element_type: element.to_string(),
                bbox: Some(bbox),
            });
        }
        self.blocks.push(LayoutBlock {
            block_id,
            category: category.to_string(),
            bbox,
            line_ids: ids,
        });
        y + texts.len() as i64 * pitch
    }

    fn figure(&mut self, rect: BBox) {
        self.blocks.push(LayoutBlock {
            block_id: format!("b{}", self.blocks.len()),
            category: "figure".into(),
            bbox: rect,
            line_ids: Vec::new(),
        });
        self.strokes.push((rect, 200));
    }
}

fn two_column_page(rng: &mut ChaCha8Rng, lang: Language, title: &str) -> PageBuilder {
    let mut p = PageBuilder::new(lang);
    p.block("title", Some("h1"), &[title.to_string()], MARGIN, 60, 24.0, 40, 32);
    let max = (COLUMN_WIDTH / char_width(lang)) as usize;
    let mut column = 0;
    let mut y = BODY_TOP;
    loop {
        let sentences = rng.gen_range(2..=3);
        let (text, qa) = paragraph(rng, lang, sentences);
        let lines = wrap(&text, lang, max);
        let height = lines.len() as i64 * LINE_PITCH;
        if y + height > BODY_BOTTOM - rng.gen_range(0..200) {
            if column == 1 {
                break;
            }
            column = 1;
            y = BODY_TOP;
        }
        y = p.block("paragraph", Some("p"), &lines, COLUMN_X[column], y, 11.0, LINE_PITCH, TEXT_HEIGHT) + 18;
        p.qa.extend(qa);
    }
    let ad = match lang {
        Language::En => format!("Advertisement call 555-0{} for offers", rng.gen_range(100..999)),
        Language::Zh => format!("广告 热线 555-0{}", rng.gen_range(100..999)),
    };
    p.block("footer", None, &[ad], MARGIN, 1350, 8.0, LINE_PITCH, 12);
    p.strokes.push((BBox::new(10, RULE_Y, 990, RULE_Y + 4), 0));
    p.strokes.push((BBox::new(GUTTER_X, 116, GUTTER_X + 4, 1390), 0));
    p
}

fn feature_page(rng: &mut ChaCha8Rng, title: &str, caption: &str) -> PageBuilder {
    let lang = Language::En;
    let mut p = PageBuilder::new(lang);
    let mut y = p.block("title", Some("h1"), &[title.to_string()], MARGIN, 60, 24.0, 40, 32) + 40;
    let max = ((PAGE_WIDTH as i64 - 2 * MARGIN) / char_width(lang)) as usize;
    for k in 0..4 {
        let sentences = rng.gen_range(2..=4);
        let (text, qa) = paragraph(rng, lang, sentences);
        let lines = wrap(&text, lang, max);
        y = p.block("paragraph", Some("p"), &lines, MARGIN, y, 11.0, LINE_PITCH, TEXT_HEIGHT) + 18;
        p.qa.extend(qa);
        if k == 1 {
            let rect = BBox::new(MARGIN, y, PAGE_WIDTH as i64 - MARGIN, y + 300);
            p.figure(rect);
            y = p.block("caption", Some("figcaption"), &[caption.to_string()], MARGIN, y + 310, 9.0, 20, 14) + 24;
        }
    }
    let ad = format!("Subscribe today {}", rng.gen_range(1000..9999));
    p.block("footer", None, &[ad], MARGIN, 1350, 8.0, LINE_PITCH, 12);
    p
}

fn rasterize(p: &PageBuilder) -> GrayImage {
    let s = IMAGE_SCALE as i64;
    let mut img = GrayImage::filled((PAGE_WIDTH / IMAGE_SCALE) as usize, (PAGE_HEIGHT / IMAGE_SCALE) as usize, 255);
    // Figures first so strokes drawn on top stay dark.
    let mut strokes = p.strokes.clone();
    strokes.sort_by_key(|(_, v)| std::cmp::Reverse(*v));
    for (b, v) in strokes {
        let (x0, x1) = ((b.x0 / s) as usize, (b.x1 / s).max(b.x0 / s + 1) as usize);
        let (y0, y1) = if v == 60 {
            // Text: a thin stroke through the middle of the line box.
            let mid = (b.y0 + b.y1) / 2 / s;
            ((mid - 1).max(0) as usize, (mid + 1) as usize)
        } else {
            ((b.y0 / s) as usize, (b.y1 / s).max(b.y0 / s + 1) as usize)
        };
        img.fill_rect(x0, y0, x1, y1, v);
    }
    img
}

fn engine_candidates(truth: &str, lang: Language, rng: &mut ChaCha8Rng) -> Vec<OcrCandidate> {
    ENGINES
        .iter()
        .map(|&(id, weight, (lo, hi), p_err)| {
            let text = if rng.gen_bool(p_err) {
                corrupt(truth, lang, 2, rng)
            } else {
                truth.to_string()
            };
            let conf = (rng.gen_range(lo..hi) * 100.0_f64).round() / 100.0;
            OcrCandidate::new(id, &text, weight, conf)
        })
        .collect()
}

/// Builds the ten-page corpus for `seed`.
pub fn generate(seed: u64) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = SynthCorpus {
        pages: Vec::new(),
        candidates: Vec::new(),
        html: Vec::new(),
        images: Vec::new(),
        truth: Vec::new(),
    };
    for (doc, lang, layout, n_pages) in DOCUMENTS {
        let mut titles: Vec<&str> = match lang {
            Language::En => EN_TITLES.to_vec(),
            Language::Zh => ZH_TITLES.to_vec(),
        };
        titles.shuffle(&mut rng);
        for idx in 0..n_pages {
            let title = titles[idx as usize % titles.len()];
            let builder = match layout {
                Layout::TwoColumn => two_column_page(&mut rng, lang, title),
                Layout::Feature => {
                    let caption = EN_CAPTIONS[rng.gen_range(0..EN_CAPTIONS.len())];
                    feature_page(&mut rng, title, caption)
                }
            };
            let key = page_key(doc, idx);
            let mut noisy_lines = Vec::new();
            for line in &builder.lines {
                let cands = engine_candidates(&line.text, lang, &mut rng);
                noisy_lines.push(TextLine {
                    text: cands[2].text.clone(),
                    ..line.clone()
                });
                corpus.candidates.push(CandidateRecord {
                    doc_id: doc.to_string(),
                    page_index: idx,
                    line_id: line.line_id.clone(),
                    candidates: cands,
                });
            }
            // OCR engines emit lines top to bottom, left to right.
            noisy_lines.sort_by(|a, b| (a.bbox.y0, a.bbox.x0).cmp(&(b.bbox.y0, b.bbox.x0)));
            let (question, answer) = builder.qa[rng.gen_range(0..builder.qa.len())].clone();
            let mut para_order: Vec<String> = Vec::new();
            for id in &builder.order {
                let b = &builder.lines.iter().find(|l| &l.line_id == id).expect("own line").block_id;
                if para_order.last() != Some(b) {
                    para_order.push(b.clone());
                }
            }
            corpus.truth.push(PageTruth {
                key: key.clone(),
                text: builder.lines.iter().map(|l| (l.line_id.clone(), l.text.clone())).collect(),
                order: builder.order.clone(),
                para_order,
                block_of: builder.block_of.clone(),
                garbage: builder.garbage.clone(),
                question,
                answers: vec![answer],
            });
            corpus.images.push((image_name(doc, idx), rasterize(&builder)));
            corpus.html.push(HtmlArticle {
                article_id: key,
                blocks: builder.html.clone(),
            });
            corpus.pages.push(PageDocument {
                doc_id: doc.to_string(),
                page_index: idx,
                width: PAGE_WIDTH,
                height: PAGE_HEIGHT,
                language: lang,
                lines: noisy_lines,
                blocks: builder.blocks,
            });
        }
    }
    corpus
}

impl SynthCorpus {
    /// Ground truth for every task. Ids are page keys.
    pub fn ground_truth(&self) -> Vec<GroundTruthRecord> {
        let mut out = Vec::new();
        for (page, truth) in self.pages.iter().zip(&self.truth) {
            let bbox_of = |id: &str| page.line(id).map(|l| l.bbox);
            let record = |task| GroundTruthRecord {
                id: truth.key.clone(),
                task,
                answers: Vec::new(),
                text: String::new(),
                lines: Vec::new(),
                order: Vec::new(),
            };
            out.push(GroundTruthRecord {
                answers: truth.answers.clone(),
                ..record(Task::Vqa)
            });
            out.push(GroundTruthRecord {
                text: page
                    .lines
                    .iter()
                    .map(|l| truth.text[&l.line_id].as_str())
                    .collect::<Vec<_>>()
                    .join("\n"),
                ..record(Task::Ocr)
            });
            let article_lines: Vec<GtLine> = truth
                .order
                .iter()
                .map(|id| GtLine {
                    id: id.clone(),
                    text: truth.text[id].clone(),
                    bbox: bbox_of(id),
                })
                .collect();
            out.push(GroundTruthRecord {
                lines: article_lines.clone(),
                order: truth.order.clone(),
                ..record(Task::RopLine)
            });
            let sep = if page.language == Language::En { " " } else { "" };
            out.push(GroundTruthRecord {
                lines: truth
                    .para_order
                    .iter()
                    .map(|b| {
                        let block = page.block(b).expect("own block");
                        GtLine {
                            id: b.clone(),
                            text: block
                                .line_ids
                                .iter()
                                .map(|l| truth.text[l].as_str())
                                .collect::<Vec<_>>()
                                .join(sep),
                            bbox: Some(block.bbox),
                        }
                    })
                    .collect(),
                order: truth.para_order.clone(),
                ..record(Task::RopPara)
            });
            out.push(GroundTruthRecord {
                lines: article_lines,
                order: truth.order.clone(),
                ..record(Task::Complexity)
            });
        }
        out
    }

    /// Stand-in model answers for the VQA task: mostly exact, some with a
    /// typo, a few wrong, one page left unanswered.
    pub fn vqa_predictions(&self, seed: u64) -> Vec<PredictionRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_a5);
        let skip = rng.gen_range(0..self.truth.len().max(1));
        self.truth
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .map(|(_, t)| {
                let lang = if t.key.starts_with("ribao") { Language::Zh } else { Language::En };
                let roll = rng.gen_range(0..20);
                let output = t
                    .answers
                    .iter()
                    .map(|a| match roll {
                        0..=11 => a.clone(),
                        12..=16 => corrupt(a, lang, 1, &mut rng),
                        _ => "not stated".to_string(),
                    })
                    .collect();
                PredictionRecord {
                    id: t.key.clone(),
                    task: Task::Vqa,
                    output: PredictionOutput::List(output),
                }
            })
            .collect()
    }
}

/// A single page for alignment checks: article lines from English and
/// Chinese blocks with up to two edits each, plus garbage lines.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentFixture {
    pub page: PageDocument,
    pub html: Vec<HtmlBlock>,
    /// True HTML block per line; `None` for garbage.
    pub expected: BTreeMap<String, Option<usize>>,
}

pub const FIXTURE_ARTICLE_LINES: usize = 30;

pub fn alignment_fixture(seed: u64) -> AlignmentFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = PageBuilder::new(Language::En);
    let mut y = 60;
    let mut column = 0;
    let mut count = 0;
    let mut k = 0;
    while count < FIXTURE_ARTICLE_LINES {
        let lang = if k % 2 == 0 { Language::En } else { Language::Zh };
        k += 1;
        p.lang = lang;
        let (text, _) = paragraph(&mut rng, lang, 2);
        let max = (COLUMN_WIDTH / char_width(lang)) as usize;
        let mut lines = wrap(&text, lang, max);
        lines.truncate(FIXTURE_ARTICLE_LINES - count);
        count += lines.len();
        if y + lines.len() as i64 * LINE_PITCH > BODY_BOTTOM {
            column = 1;
            y = 60;
        }
        y = p.block("paragraph", Some("p"), &lines, COLUMN_X[column], y, 11.0, LINE_PITCH, TEXT_HEIGHT) + 18;
    }
    p.lang = Language::En;
    let junk = ["Page 7 of 12", "Advertisement call 555-0199 today", "广告 热线 555-0188"];
    for (i, g) in junk.iter().enumerate() {
        p.block("footer", None, &[g.to_string()], MARGIN + 300 * i as i64, 1350, 8.0, LINE_PITCH, 12);
    }
    let mut expected = BTreeMap::new();
    let mut lines = Vec::new();
    for line in &p.lines {
        expected.insert(line.line_id.clone(), p.block_of.get(&line.line_id).copied());
        let text = if p.block_of.contains_key(&line.line_id) && rng.gen_bool(0.7) {
            let lang = if line.text.is_ascii() { Language::En } else { Language::Zh };
            corrupt(&line.text, lang, 2, &mut rng)
        } else {
            line.text.clone()
        };
        lines.push(TextLine { text, ..line.clone() });
    }
    AlignmentFixture {
        page: PageDocument {
            doc_id: "fixture".into(),
            page_index: 0,
            width: PAGE_WIDTH,
            height: PAGE_HEIGHT,
            language: Language::En,
            lines,
            blocks: p.blocks,
        },
        html: p.html,
        expected,
    }
}
