//! Layout complexity: how far a naive top-left sort of the lines is from
//! the true reading order, measured with BLEU over line identifiers.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::model::TextLine;

/// Sorts lines top-to-bottom, then left-to-right, then by id.
pub fn naive_linearize(lines: &[TextLine]) -> Vec<String> {
    let mut sorted: Vec<&TextLine> = lines.iter().collect();
    sorted.sort_by(|a, b| {
        (a.bbox.y0, a.bbox.x0, &a.line_id).cmp(&(b.bbox.y0, b.bbox.x0, &b.line_id))
    });
    sorted.into_iter().map(|l| l.line_id.clone()).collect()
}

fn ngram_counts<T: AsRef<str>>(tokens: &[T], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for w in tokens.windows(n) {
        *counts
            .entry(w.iter().map(AsRef::as_ref).collect())
            .or_insert(0) += 1;
    }
    counts
}

/// Modified (clipped) n-gram precision of `candidate` against `reference`.
/// A candidate too short to contain any n-gram scores 1.0 when it equals
/// the reference and 0.0 otherwise.
pub fn ngram_precision<T: AsRef<str>>(candidate: &[T], reference: &[T], n: usize) -> f64 {
    let cand = ngram_counts(candidate, n);
    let total: usize = cand.values().sum();
    if total == 0 {
        let same = candidate.len() == reference.len()
            && candidate.iter().zip(reference).all(|(a, b)| a.as_ref() == b.as_ref());
        return if same { 1.0 } else { 0.0 };
    }
    let refc = ngram_counts(reference, n);
    let clipped: usize = cand
        .iter()
        .map(|(g, c)| (*c).min(refc.get(g).copied().unwrap_or(0)))
        .sum();
    clipped as f64 / total as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityScore {
    /// Modified n-gram precision for n = 1..=max_n.
    pub precisions: Vec<f64>,
    /// Cumulative BLEU-n: geometric mean of the first n precisions.
    pub cumulative: Vec<f64>,
}

/// Compares the naive linearization of `lines` (candidate) with `gt_order`
/// (reference). No brevity penalty: both are permutations of the same ids.
pub fn layout_complexity_bleu(gt_order: &[String], lines: &[TextLine], max_n: usize) -> ComplexityScore {
    let naive = naive_linearize(lines);
    let precisions: Vec<f64> = (1..=max_n)
        .map(|n| ngram_precision(&naive, gt_order, n))
        .collect();
    let cumulative = (1..=max_n)
        .map(|n| {
            let ps = &precisions[..n];
            if ps.iter().any(|&p| p == 0.0) {
                0.0
            } else {
                (ps.iter().map(|p| p.ln()).sum::<f64>() / n as f64).exp()
            }
        })
        .collect();
    ComplexityScore {
        precisions,
        cumulative,
    }
}
