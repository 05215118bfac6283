//! Reading-order scoring over consecutive line pairs.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::text::{normalize, similarity};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(c: PairCounts) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(c.hits, c.predicted);
        let recall = ratio(c.hits, c.reference);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            precision,
            recall,
            f1,
        }
    }
}

/// Pair tallies, summable across documents for micro averaging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairCounts {
    pub hits: usize,
    pub predicted: usize,
    pub reference: usize,
}

impl std::ops::Add for PairCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            hits: self.hits + o.hits,
            predicted: self.predicted + o.predicted,
            reference: self.reference + o.reference,
        }
    }
}

fn pairs(seq: &[String]) -> HashSet<(&str, &str)> {
    seq.windows(2).map(|w| (w[0].as_str(), w[1].as_str())).collect()
}

pub fn pair_counts(pred: &[String], gt: &[String]) -> PairCounts {
    let p = pairs(pred);
    let g = pairs(gt);
    PairCounts {
        hits: p.intersection(&g).count(),
        predicted: p.len(),
        reference: g.len(),
    }
}

/// Precision, recall and F1 of the consecutive ordered pairs of `pred`
/// against those of `gt`.
pub fn rop_f1(pred: &[String], gt: &[String]) -> Prf {
    Prf::from_counts(pair_counts(pred, gt))
}

/// Greedy one-to-one matching of predicted text segments to ground-truth
/// lines, best similarity first (ties: lower segment index, then lower line
/// index). Pairs below `threshold` are never matched.
pub fn match_pred_lines(
    segments: &[String],
    gt_lines: &[(String, String)],
    threshold: f64,
) -> BTreeMap<usize, String> {
    let segs: Vec<String> = segments.iter().map(|s| normalize(s)).collect();
    let lines: Vec<String> = gt_lines.iter().map(|(_, t)| normalize(t)).collect();
    let mut scored = Vec::new();
    for (i, s) in segs.iter().enumerate() {
        for (k, t) in lines.iter().enumerate() {
            let sim = similarity(s, t);
            if sim >= threshold {
                scored.push((sim, i, k));
            }
        }
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_seg = HashSet::new();
    let mut used_line = HashSet::new();
    let mut out = BTreeMap::new();
    for (_, i, k) in scored {
        if used_seg.contains(&i) || used_line.contains(&k) {
            continue;
        }
        used_seg.insert(i);
        used_line.insert(k);
        out.insert(i, gt_lines[k].0.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identical_orders() {
        let gt = ids(&["1", "2", "3", "4"]);
        let s = rop_f1(&gt, &gt);
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn prefix_prediction() {
        let s = rop_f1(&ids(&["1", "2"]), &ids(&["1", "2", "3", "4"]));
        assert_eq!(s.precision, 1.0);
        assert!((s.recall - 1.0 / 3.0).abs() < 1e-12);
        assert!((s.f1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn reversed_pair() {
        let s = rop_f1(&ids(&["2", "1"]), &ids(&["1", "2"]));
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn empty_sequences() {
        assert_eq!(rop_f1(&[], &[]), Prf::default());
        assert_eq!(rop_f1(&ids(&["1"]), &ids(&["1", "2"])).f1, 0.0);
    }

    fn gt() -> Vec<(String, String)> {
        vec![
            ("g1".into(), "The council approved the budget".into()),
            ("g2".into(), "after a long debate on Monday".into()),
            ("g3".into(), "Opposition members walked out".into()),
        ]
    }

    #[test]
    fn exact_segments_map_identically() {
        let segs: Vec<String> = gt().into_iter().map(|(_, t)| t).collect();
        let m = match_pred_lines(&segs, &gt(), 0.85);
        assert_eq!(m.values().cloned().collect::<Vec<_>>(), ids(&["g1", "g2", "g3"]));
    }

    #[test]
    fn one_typo_per_line_still_maps() {
        let segs = ids(&[
            "The councl approved the budget",
            "after a long debate on Mondy",
            "Oposition members walked out",
        ]);
        let m = match_pred_lines(&segs, &gt(), 0.85);
        assert_eq!(m.len(), 3);
        assert_eq!(m[&1], "g2");
    }

    #[test]
    fn unrelated_text_maps_nothing() {
        let m = match_pred_lines(&ids(&["zzzz qqqq", "12345"]), &gt(), 0.85);
        assert!(m.is_empty());
    }

    #[test]
    fn each_line_used_once() {
        let segs = ids(&["Opposition members walked out", "Opposition members walked out"]);
        let m = match_pred_lines(&segs, &gt(), 0.85);
        assert_eq!(m.len(), 1);
        assert_eq!(m[&0], "g3");
    }
}
