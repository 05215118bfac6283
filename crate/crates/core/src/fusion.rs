//! Weighted voting over candidate transcriptions from several OCR engines.
//!
//! Each distinct candidate string `t` scores `sum_i w_i * p_i * [s_i == t]`
//! and the highest-scoring string wins. Ties fall back to the largest single
//! `w_i * p_i` contribution, then to lexicographic order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::model::PageDocument;
use crate::text::normalize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FusionError {
    #[error("no candidates to fuse")]
    EmptyCandidateSet,
    #[error("candidate from {engine_id}: {field} {value} outside [0, 1]")]
    OutOfRange {
        engine_id: String,
        field: &'static str,
        value: f64,
    },
    #[error("line {0} not found on page")]
    UnknownLineId(String),
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcrCandidate {
    pub engine_id: String,
    pub text: String,
    /// Engine reliability. Missing in input means the uniform default.
    #[serde(default = "default_weight")]
    pub weight: f64,
    pub confidence: f64,
}

impl OcrCandidate {
    pub fn new(engine_id: &str, text: &str, weight: f64, confidence: f64) -> Self {
        Self {
            engine_id: engine_id.into(),
            text: text.into(),
            weight,
            confidence,
        }
    }

    fn check(&self) -> Result<(), FusionError> {
        for (field, value) in [("weight", self.weight), ("confidence", self.confidence)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(FusionError::OutOfRange {
                    engine_id: self.engine_id.clone(),
                    field,
                    value,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vote {
    pub text: String,
    pub score: f64,
    pub best_single: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusedText {
    pub text: String,
    pub total_score: f64,
    /// One entry per distinct candidate string, best first.
    pub votes: Vec<Vote>,
    /// Whether the tie-break rule decided the winner.
    pub tie_broken: bool,
}

/// Per-engine weight overrides; engines not listed keep their own weight.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EngineWeights(pub HashMap<String, f64>);

impl EngineWeights {
    pub fn apply(&self, candidates: &mut [OcrCandidate]) {
        for c in candidates {
            if let Some(w) = self.0.get(&c.engine_id) {
                c.weight = *w;
            }
        }
    }
}

fn rank(a: &Vote, b: &Vote) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(b.best_single.total_cmp(&a.best_single))
        .then_with(|| a.text.cmp(&b.text))
}

pub fn fuse_candidates(candidates: &[OcrCandidate]) -> Result<FusedText, FusionError> {
    if candidates.is_empty() {
        return Err(FusionError::EmptyCandidateSet);
    }
    let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for c in candidates {
        c.check()?;
        groups
            .entry(c.text.as_str())
            .or_default()
            .push(c.weight * c.confidence);
    }
    let mut votes: Vec<Vote> = groups
        .into_iter()
        .map(|(text, mut parts)| {
            // Summation order is fixed so the score does not depend on input order.
            parts.sort_by(|a, b| b.total_cmp(a));
            Vote {
                text: text.to_string(),
                score: parts.iter().sum(),
                best_single: parts[0],
                support: parts.len(),
            }
        })
        .collect();
    votes.sort_by(rank);
    let tie_broken = votes.len() > 1 && votes[0].score == votes[1].score;
    Ok(FusedText {
        text: votes[0].text.clone(),
        total_score: votes[0].score,
        votes,
        tie_broken,
    })
}

/// Statistics from one [`fuse_page`] call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FuseStats {
    pub lines_fused: usize,
    pub ties: usize,
    pub changed: usize,
}

/// Replaces the text of every line that has candidates with the fused string.
pub fn fuse_page(
    page: &PageDocument,
    per_line: &HashMap<String, Vec<OcrCandidate>>,
) -> Result<PageDocument, FusionError> {
    fuse_page_with_stats(page, per_line).map(|(p, _)| p)
}

pub fn fuse_page_with_stats(
    page: &PageDocument,
    per_line: &HashMap<String, Vec<OcrCandidate>>,
) -> Result<(PageDocument, FuseStats), FusionError> {
    let mut ids: Vec<&String> = per_line.keys().collect();
    ids.sort();
    if let Some(missing) = ids.iter().find(|id| page.line(id).is_none()) {
        return Err(FusionError::UnknownLineId((*missing).clone()));
    }
    let mut out = page.clone();
    let mut stats = FuseStats::default();
    for line in &mut out.lines {
        let Some(cands) = per_line.get(&line.line_id) else {
            continue;
        };
        let normalized: Vec<OcrCandidate> = cands
            .iter()
            .map(|c| OcrCandidate {
                text: normalize(&c.text),
                ..c.clone()
            })
            .collect();
        let fused = fuse_candidates(&normalized)?;
        stats.lines_fused += 1;
        stats.ties += usize::from(fused.tie_broken);
        if fused.text != line.text {
            stats.changed += 1;
            line.text = fused.text;
        }
    }
    Ok((out, stats))
}

/// One record of the candidate file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub doc_id: String,
    pub page_index: u32,
    pub line_id: String,
    pub candidates: Vec<OcrCandidate>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BBox, Language, LayoutBlock, TextLine};

    #[test]
    fn weighted_vote_picks_cat() {
        let fused = fuse_candidates(&[
            OcrCandidate::new("a", "cat", 0.5, 0.9),
            OcrCandidate::new("b", "cat", 0.3, 0.8),
            OcrCandidate::new("c", "cot", 0.2, 0.99),
        ])
        .unwrap();
        assert_eq!(fused.text, "cat");
        assert!((fused.total_score - 0.69).abs() < 1e-12);
        assert!((fused.votes[1].score - 0.198).abs() < 1e-12);
        assert!(!fused.tie_broken);
    }

    #[test]
    fn unanimous_and_singleton() {
        let c = OcrCandidate::new("e", "报纸", 1.0, 0.7);
        let fused = fuse_candidates(&[c.clone(), c.clone(), c.clone()]).unwrap();
        assert_eq!(fused.text, "报纸");
        assert_eq!(fused.votes.len(), 1);
        assert_eq!(fuse_candidates(&[c]).unwrap().text, "报纸");
    }

    #[test]
    fn empty_set_is_error() {
        assert_eq!(fuse_candidates(&[]), Err(FusionError::EmptyCandidateSet));
    }

    #[test]
    fn out_of_range_weight_is_error() {
        let err = fuse_candidates(&[OcrCandidate::new("a", "x", 1.5, 0.5)]).unwrap_err();
        assert!(matches!(err, FusionError::OutOfRange { field: "weight", .. }));
    }

    #[test]
    fn ties_use_best_single_then_lexicographic() {
        // 0.5 + 0.25 vs a single 0.75: same total, larger single contributor wins.
        let fused = fuse_candidates(&[
            OcrCandidate::new("a", "foo", 1.0, 0.5),
            OcrCandidate::new("b", "foo", 1.0, 0.25),
            OcrCandidate::new("c", "bar", 1.0, 0.75),
        ])
        .unwrap();
        assert!(fused.tie_broken);
        assert_eq!(fused.text, "bar");
        let fused = fuse_candidates(&[
            OcrCandidate::new("a", "zed", 1.0, 0.5),
            OcrCandidate::new("b", "abc", 1.0, 0.5),
        ])
        .unwrap();
        assert_eq!(fused.text, "abc");
    }

    #[test]
    fn engine_weight_override() {
        let mut cands = vec![
            OcrCandidate::new("a", "x", 1.0, 0.9),
            OcrCandidate::new("b", "y", 1.0, 0.8),
        ];
        EngineWeights([("a".to_string(), 0.1)].into_iter().collect()).apply(&mut cands);
        assert_eq!(cands[0].weight, 0.1);
        assert_eq!(fuse_candidates(&cands).unwrap().text, "y");
    }

    fn page() -> PageDocument {
        let line = |id: &str, text: &str, y: i64| TextLine {
            line_id: id.into(),
            text: text.into(),
            bbox: BBox::new(0, y, 100, y + 10),
            font_size: None,
            font_style: None,
            block_id: "b".into(),
        };
        PageDocument {
            doc_id: "d".into(),
            page_index: 0,
            width: 200,
            height: 200,
            language: Language::En,
            lines: vec![line("l1", "cot", 0), line("l2", "dog", 20)],
            blocks: vec![LayoutBlock {
                block_id: "b".into(),
                category: "paragraph".into(),
                bbox: BBox::new(0, 0, 100, 30),
                line_ids: vec!["l1".into(), "l2".into()],
            }],
        }
    }

    #[test]
    fn fuse_page_updates_only_covered_lines() {
        let p = page();
        assert_eq!(fuse_page(&p, &HashMap::new()).unwrap(), p);

        let mut map = HashMap::new();
        map.insert(
            "l1".to_string(),
            vec![
                OcrCandidate::new("a", "cat", 0.5, 0.9),
                OcrCandidate::new("b", "cat", 0.3, 0.8),
                OcrCandidate::new("c", "cot", 0.2, 0.99),
            ],
        );
        let (fused, stats) = fuse_page_with_stats(&p, &map).unwrap();
        assert_eq!(fused.lines[0].text, "cat");
        assert_eq!(fused.lines[1], p.lines[1]);
        assert_eq!(stats, FuseStats { lines_fused: 1, ties: 0, changed: 1 });
    }

    #[test]
    fn foreign_line_id_rejected() {
        let mut map = HashMap::new();
        map.insert("zz".to_string(), vec![OcrCandidate::new("a", "x", 1.0, 1.0)]);
        assert_eq!(
            fuse_page(&page(), &map),
            Err(FusionError::UnknownLineId("zz".into()))
        );
    }
}
