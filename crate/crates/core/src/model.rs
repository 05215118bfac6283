//! Page, line, block and HTML-block types plus line-delimited record IO.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::de::{self, DeserializeOwned, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::text::normalize;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("malformed record at line {line_no}: {reason}")]
    MalformedRecord { line_no: usize, reason: String },
    #[error("duplicate page id {doc_id}#{page_index}")]
    DuplicatePageId { doc_id: String, page_index: u32 },
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Axis-aligned box in rendered page pixels. `x0 <= x1` and `y0 <= y1`
/// are checked by [`validate_page`], not by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BBox {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl BBox {
    pub const fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> i64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> i64 {
        self.y1 - self.y0
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x0 + self.x1) as f64 / 2.0,
            (self.y0 + self.y1) as f64 / 2.0,
        )
    }

    pub fn is_ordered(&self) -> bool {
        self.x0 <= self.x1 && self.y0 <= self.y1
    }

    /// Euclidean gap between two boxes; zero when they touch or overlap.
    pub fn distance_to(&self, other: &BBox) -> f64 {
        let dx = (other.x0 - self.x1).max(self.x0 - other.x1).max(0) as f64;
        let dy = (other.y0 - self.y1).max(self.y0 - other.y1).max(0) as f64;
        dx.hypot(dy)
    }
}

/// Rounds half-up to the integer pixel grid.
fn round_half_up(v: f64) -> i64 {
    (v + 0.5).floor() as i64
}

impl Serialize for BBox {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.x0, self.y0, self.x1, self.y1].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BBox {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct BoxVisitor;

        impl<'de> Visitor<'de> for BoxVisitor {
            type Value = BBox;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array [x0, y0, x1, y1] of finite numbers")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<BBox, A::Error> {
                let mut v = [0i64; 4];
                for (i, slot) in v.iter_mut().enumerate() {
                    let x: f64 = seq
                        .next_element()?
                        .ok_or_else(|| de::Error::invalid_length(i, &self))?;
                    if !x.is_finite() {
                        return Err(de::Error::custom("non-finite coordinate"));
                    }
                    *slot = round_half_up(x);
                }
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(5, &self));
                }
                Ok(BBox::new(v[0], v[1], v[2], v[3]))
            }
        }

        deserializer.deserialize_seq(BoxVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Zh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextLine {
    pub line_id: String,
    pub text: String,
    pub bbox: BBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub font_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub font_style: Option<String>,
    pub block_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutBlock {
    pub block_id: String,
    pub category: String,
    pub bbox: BBox,
    pub line_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageDocument {
    pub doc_id: String,
    pub page_index: u32,
    pub width: u32,
    pub height: u32,
    pub language: Language,
    pub lines: Vec<TextLine>,
    pub blocks: Vec<LayoutBlock>,
}

impl PageDocument {
    pub fn line(&self, line_id: &str) -> Option<&TextLine> {
        self.lines.iter().find(|l| l.line_id == line_id)
    }

    pub fn block(&self, block_id: &str) -> Option<&LayoutBlock> {
        self.blocks.iter().find(|b| b.block_id == block_id)
    }

    /// Lines of `block_id` in the block's declared order; ids that do not
    /// resolve are skipped.
    pub fn block_lines(&self, block_id: &str) -> Vec<&TextLine> {
        let index: HashMap<&str, &TextLine> =
            self.lines.iter().map(|l| (l.line_id.as_str(), l)).collect();
        self.block(block_id)
            .map(|b| {
                b.line_ids
                    .iter()
                    .filter_map(|id| index.get(id.as_str()).copied())
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn key(&self) -> String {
        page_key(&self.doc_id, self.page_index)
    }

    pub fn diagonal(&self) -> f64 {
        f64::from(self.width).hypot(f64::from(self.height))
    }

    fn normalize_text(&mut self) {
        for line in &mut self.lines {
            line.text = normalize(&line.text);
        }
    }
}

/// Canonical `doc_id#page_index` key used to join records across files.
pub fn page_key(doc_id: &str, page_index: u32) -> String {
    format!("{doc_id}#{page_index}")
}

/// One crawled HTML block. `index` is its position in the article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HtmlBlock {
    pub index: usize,
    pub text: String,
    pub element_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<BBox>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HtmlArticle {
    pub article_id: String,
    pub blocks: Vec<HtmlBlock>,
}

/// Layout label set. Defaults to a 13-label magazine taxonomy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutTaxonomy {
    labels: Vec<String>,
}

pub const DEFAULT_LAYOUT_LABELS: [&str; 13] = [
    "title",
    "subtitle",
    "subhead",
    "byline",
    "lead",
    "paragraph",
    "caption",
    "figure",
    "table",
    "chart",
    "header",
    "footer",
    "page_number",
];

impl Default for LayoutTaxonomy {
    fn default() -> Self {
        Self::new(DEFAULT_LAYOUT_LABELS.iter().map(|s| s.to_string()))
    }
}

impl LayoutTaxonomy {
    pub fn new(labels: impl IntoIterator<Item = String>) -> Self {
        Self {
            labels: labels.into_iter().collect(),
        }
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warn,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub path: String,
    pub message: String,
}

impl ValidationIssue {
    fn error(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            path: path.into(),
            message: message.into(),
        }
    }
}

pub fn has_errors(issues: &[ValidationIssue]) -> bool {
    issues.iter().any(|i| i.severity == Severity::Error)
}

/// Checks every page invariant against the default taxonomy.
pub fn validate_page(page: &PageDocument) -> Vec<ValidationIssue> {
    validate_page_with(page, &LayoutTaxonomy::default())
}

pub fn validate_page_with(page: &PageDocument, taxonomy: &LayoutTaxonomy) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    let (w, h) = (i64::from(page.width), i64::from(page.height));
    let check_box = |path: String, b: &BBox, issues: &mut Vec<ValidationIssue>| {
        if !b.is_ordered() {
            issues.push(ValidationIssue::error(path, format!("inverted box {b:?}")));
        } else if b.x0 < 0 || b.y0 < 0 || b.x1 > w || b.y1 > h {
            issues.push(ValidationIssue::error(
                path,
                format!("box {b:?} outside page {w}x{h}"),
            ));
        }
    };

    let block_ids: HashSet<&str> = page.blocks.iter().map(|b| b.block_id.as_str()).collect();
    let mut seen_lines = HashSet::new();
    for (i, line) in page.lines.iter().enumerate() {
        let path = format!("lines[{i}]");
        if !seen_lines.insert(line.line_id.as_str()) {
            issues.push(ValidationIssue::error(
                format!("{path}.line_id"),
                format!("duplicate line id {}", line.line_id),
            ));
        }
        if normalize(&line.text).is_empty() {
            issues.push(ValidationIssue::error(
                format!("{path}.text"),
                "empty text after normalization",
            ));
        }
        check_box(format!("{path}.bbox"), &line.bbox, &mut issues);
        if !block_ids.contains(line.block_id.as_str()) {
            issues.push(ValidationIssue::error(
                format!("{path}.block_id"),
                format!("unknown block {}", line.block_id),
            ));
        }
        if let Some(fs) = line.font_size {
            if !(fs.is_finite() && fs > 0.0) {
                issues.push(ValidationIssue::error(
                    format!("{path}.font_size"),
                    format!("font size {fs} not positive"),
                ));
            }
        }
    }

    let mut seen_blocks = HashSet::new();
    for (i, block) in page.blocks.iter().enumerate() {
        let path = format!("blocks[{i}]");
        if !seen_blocks.insert(block.block_id.as_str()) {
            issues.push(ValidationIssue::error(
                format!("{path}.block_id"),
                format!("duplicate block id {}", block.block_id),
            ));
        }
        if !taxonomy.contains(&block.category) {
            issues.push(ValidationIssue::error(
                format!("{path}.category"),
                format!("category {:?} not in taxonomy", block.category),
            ));
        }
        check_box(format!("{path}.bbox"), &block.bbox, &mut issues);
        for (k, id) in block.line_ids.iter().enumerate() {
            if !seen_lines.contains(id.as_str()) {
                issues.push(ValidationIssue::error(
                    format!("{path}.line_ids[{k}]"),
                    format!("unknown line {id}"),
                ));
            }
        }
    }
    issues
}

/// Reads one JSON value per non-blank line.
pub fn read_records<T: DeserializeOwned, R: BufRead>(reader: R) -> Result<Vec<T>, ModelError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| ModelError::MalformedRecord {
            line_no: i + 1,
            reason: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Writes one compact JSON value per line.
pub fn write_records<T: Serialize, W: Write>(mut writer: W, records: &[T]) -> Result<(), ModelError> {
    for rec in records {
        serde_json::to_writer(&mut writer, rec).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

/// Loads pages, normalizing line text and rejecting repeated `(doc_id, page_index)`.
pub fn load_pages<R: BufRead>(reader: R) -> Result<Vec<PageDocument>, ModelError> {
    let mut pages: Vec<PageDocument> = read_records(reader)?;
    let mut seen = HashSet::new();
    for page in &mut pages {
        if !seen.insert((page.doc_id.clone(), page.page_index)) {
            return Err(ModelError::DuplicatePageId {
                doc_id: page.doc_id.clone(),
                page_index: page.page_index,
            });
        }
        page.normalize_text();
    }
    Ok(pages)
}

pub fn save_pages<W: Write>(writer: W, pages: &[PageDocument]) -> Result<(), ModelError> {
    write_records(writer, pages)
}
