//! Line- and paragraph-level reading orders.
//!
//! Three strategies are provided: the HTML sequence recovered by alignment,
//! HTML sequence combined with layout precedence rules, and raster
//! segmentation into guillotine blocks ordered by column heuristics. Orders
//! are then screened for long near-horizontal links.

mod columns;
mod complexity;
mod filter;
mod hierarchy;
pub mod raster;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::align::AlignedStructure;
use crate::model::PageDocument;

pub use columns::{order_within_block, ColumnConfig};
pub use complexity::{layout_complexity_bleu, naive_linearize, ngram_precision, ComplexityScore};
pub use filter::{
    filter_page_order, invalid_link, FilterDecision, FilterOutcome, GeometricFilterConfig,
    ANGLE_EPS_DEG,
};
pub use hierarchy::{order_with_hierarchy, parse_rule, PrecedenceRule, RuleSet};
pub use raster::{order_by_segmentation, SegmentConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OrderError {
    #[error("precedence rules contain a cycle through {0:?}")]
    CyclicRules(Vec<String>),
    #[error("link endpoints share the same center")]
    CoincidentCenters,
    #[error("malformed precedence rule {0:?}")]
    BadRule(String),
    #[error("invalid image: {0}")]
    BadImage(String),
    #[error("{0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub from: String,
    pub to: String,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReadingOrder {
    pub line_sequence: Vec<String>,
    pub para_sequence: Vec<String>,
    /// Consecutive line pairs of `line_sequence`.
    pub links: Vec<Link>,
}

impl ReadingOrder {
    /// Builds an order with every link marked valid.
    pub fn new(line_sequence: Vec<String>, para_sequence: Vec<String>) -> Self {
        let links = line_sequence
            .windows(2)
            .map(|w| Link {
                from: w[0].clone(),
                to: w[1].clone(),
                valid: true,
            })
            .collect();
        Self {
            line_sequence,
            para_sequence,
            links,
        }
    }

    /// Paragraph order induced by the first appearance of each line's block.
    pub fn from_lines(line_sequence: Vec<String>, page: &PageDocument) -> Self {
        let owner: HashMap<&str, &str> = page
            .lines
            .iter()
            .map(|l| (l.line_id.as_str(), l.block_id.as_str()))
            .collect();
        let paras = first_appearance(line_sequence.iter().filter_map(|l| owner.get(l.as_str()).copied()));
        Self::new(line_sequence, paras)
    }

    pub fn invalid_links(&self) -> usize {
        self.links.iter().filter(|l| !l.valid).count()
    }

    /// Duplicate-free sequences whose ids all resolve on `page`.
    pub fn is_consistent_with(&self, page: &PageDocument) -> bool {
        let lines: HashSet<&str> = page.lines.iter().map(|l| l.line_id.as_str()).collect();
        let blocks: HashSet<&str> = page.blocks.iter().map(|b| b.block_id.as_str()).collect();
        let unique = |s: &[String]| s.iter().collect::<HashSet<_>>().len() == s.len();
        unique(&self.line_sequence)
            && unique(&self.para_sequence)
            && self.line_sequence.iter().all(|l| lines.contains(l.as_str()))
            && self.para_sequence.iter().all(|b| blocks.contains(b.as_str()))
            && self.links.len() == self.line_sequence.len().saturating_sub(1)
    }
}

fn first_appearance<'a>(ids: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen = HashSet::new();
    ids.filter(|id| seen.insert(*id)).map(str::to_string).collect()
}

/// Orders matched lines by HTML block index, then by their offset inside the
/// HTML text. Unmatched lines are left out.
pub fn order_from_alignment(aligned: &AlignedStructure) -> ReadingOrder {
    let mut keyed: Vec<((usize, usize, usize, usize), &str, &str)> = Vec::new();
    for (e, entry) in aligned.entries.iter().enumerate() {
        for (k, line) in entry.line_ids.iter().enumerate() {
            let offset = entry.offsets.get(k).copied().unwrap_or(0);
            keyed.push(((entry.j, offset, e, k), line.as_str(), entry.block_id.as_str()));
        }
    }
    keyed.sort_by_key(|(key, _, _)| *key);
    let paras = first_appearance(keyed.iter().map(|(_, _, b)| *b));
    ReadingOrder::new(keyed.into_iter().map(|(_, l, _)| l.to_string()).collect(), paras)
}

/// Record stored in the reading-order output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadingOrderRecord {
    pub doc_id: String,
    pub page_index: u32,
    pub line_sequence: Vec<String>,
    pub para_sequence: Vec<String>,
    pub links: Vec<Link>,
    /// Geometric filter verdict for the page.
    #[serde(default = "default_true")]
    pub kept: bool,
    #[serde(default)]
    pub invalid_links: usize,
}

fn default_true() -> bool {
    true
}

impl ReadingOrderRecord {
    pub fn new(page: &PageDocument, outcome: &FilterOutcome) -> Self {
        Self {
            doc_id: page.doc_id.clone(),
            page_index: page.page_index,
            line_sequence: outcome.order.line_sequence.clone(),
            para_sequence: outcome.order.para_sequence.clone(),
            links: outcome.order.links.clone(),
            kept: outcome.decision == FilterDecision::Keep,
            invalid_links: outcome.invalid_links,
        }
    }

    pub fn order(&self) -> ReadingOrder {
        ReadingOrder {
            line_sequence: self.line_sequence.clone(),
            para_sequence: self.para_sequence.clone(),
            links: self.links.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::AlignedEntry;

    fn entry(j: usize, block: &str, lines: &[&str], offsets: &[usize]) -> AlignedEntry {
        AlignedEntry {
            j,
            tau: "paragraph".into(),
            block_id: block.into(),
            line_ids: lines.iter().map(|s| s.to_string()).collect(),
            offsets: offsets.to_vec(),
        }
    }

    #[test]
    fn alignment_order_by_block_then_offset() {
        let aligned = AlignedStructure {
            entries: vec![
                entry(0, "pb0", &["b0l1", "b0l0"], &[30, 0]),
                entry(1, "pb1", &["b1l0", "b1l1"], &[0, 25]),
            ],
            unmatched: vec!["junk".into()],
        };
        let order = order_from_alignment(&aligned);
        assert_eq!(order.line_sequence, vec!["b0l0", "b0l1", "b1l0", "b1l1"]);
        assert_eq!(order.para_sequence, vec!["pb0", "pb1"]);
        assert_eq!(order.links.len(), 3);
        assert!(order.links.iter().all(|l| l.valid));
    }

    #[test]
    fn all_unmatched_gives_empty_order() {
        let aligned = AlignedStructure {
            entries: vec![],
            unmatched: vec!["a".into(), "b".into()],
        };
        let order = order_from_alignment(&aligned);
        assert!(order.line_sequence.is_empty());
        assert!(order.links.is_empty());
    }

    #[test]
    fn single_line_order() {
        let aligned = AlignedStructure {
            entries: vec![entry(4, "b", &["only"], &[0])],
            unmatched: vec![],
        };
        let order = order_from_alignment(&aligned);
        assert_eq!(order.line_sequence, vec!["only"]);
        assert!(order.links.is_empty());
    }
}
