//! Evaluation metrics: answer-list similarity with optimal matching,
//! character recognition rates and reading-order F1.

mod assignment;
mod corpus;
mod ocr;
mod rop;

use crate::text::{levenshtein_chars, normalize};

pub use corpus::{
    render_table, score_corpus, Aggregate, DocumentScore, GroundTruthRecord, GtLine, MetricError,
    MetricReport, PredictionOutput, PredictionRecord, Task,
};
pub use ocr::{char_alignment, crr, ocrr};
pub use rop::{match_pred_lines, pair_counts, rop_f1, PairCounts, Prf};

/// Edit distance that does not penalize verbose but correct answers.
///
/// Cases are checked in order: a prediction more than three times longer
/// than the ground truth costs `|G|`; a prediction containing the ground
/// truth as a substring costs 0; an empty prediction costs `|G|`; anything
/// else falls back to the classical distance.
pub fn levenshtein_modified(gt: &str, pred: &str) -> usize {
    let g: Vec<char> = gt.chars().collect();
    let p: Vec<char> = pred.chars().collect();
    levenshtein_modified_chars(&g, &p)
}

fn levenshtein_modified_chars(g: &[char], p: &[char]) -> usize {
    if p.len() > 3 * g.len() {
        return g.len();
    }
    if contains(p, g) {
        return 0;
    }
    if p.is_empty() {
        return g.len();
    }
    levenshtein_chars(g, p)
}

fn contains(hay: &[char], needle: &[char]) -> bool {
    needle.is_empty() || hay.windows(needle.len()).any(|w| w == needle)
}

/// Normalized Levenshtein similarity on whitespace-normalized strings;
/// 1 when both are empty.
pub fn nls(gt: &str, pred: &str) -> f64 {
    let (num, den) = nls_parts(gt, pred);
    if den == 0 {
        1.0
    } else {
        1.0 - num as f64 / den as f64
    }
}

/// `(LD, max(|G|, |P|))` after normalization.
fn nls_parts(gt: &str, pred: &str) -> (usize, usize) {
    let g: Vec<char> = normalize(gt).chars().collect();
    let p: Vec<char> = normalize(pred).chars().collect();
    (levenshtein_modified_chars(&g, &p), g.len().max(p.len()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchAssignment {
    /// `(gt_index, pred_index)`, sorted by ground-truth index.
    pub pairs: Vec<(usize, usize)>,
    /// `sum (1 - NLS)` over the pairs.
    pub cost: f64,
    /// Total similarity of the matched pairs.
    pub similarity: f64,
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Upper bound on the common denominator for the exact integer path.
const EXACT_DENOMINATOR_LIMIT: u128 = 1 << 80;

/// Minimum-cost injective matching between two lists under `1 - NLS`.
///
/// Costs are rationals `LD / max_len`; they are scaled to a common integer
/// denominator so the solver works exactly. Very long strings whose
/// denominators do not fit fall back to floating point.
pub fn optimal_match(gt: &[String], pred: &[String]) -> MatchAssignment {
    let (m, n) = (gt.len(), pred.len());
    if m == 0 || n == 0 {
        return MatchAssignment {
            pairs: Vec::new(),
            cost: 0.0,
            similarity: 0.0,
        };
    }
    let parts: Vec<Vec<(usize, usize)>> = gt
        .iter()
        .map(|g| pred.iter().map(|p| nls_parts(g, p)).collect())
        .collect();
    let size = m.max(n);

    let mut denom: u128 = 1;
    for &(_, d) in parts.iter().flatten() {
        if d > 0 {
            denom = denom / gcd(denom, d as u128) * d as u128;
            if denom > EXACT_DENOMINATOR_LIMIT {
                break;
            }
        }
    }

    let pairs_of = |assign: Vec<usize>| -> Vec<(usize, usize)> {
        assign
            .into_iter()
            .enumerate()
            .filter(|&(i, j)| i < m && j < n)
            .collect()
    };

    if denom <= EXACT_DENOMINATOR_LIMIT {
        let scaled = |(num, den): (usize, usize)| -> i128 {
            if den == 0 {
                0
            } else {
                num as i128 * (denom / den as u128) as i128
            }
        };
        let mut matrix = vec![vec![0i128; size]; size];
        for i in 0..m {
            for j in 0..n {
                matrix[i][j] = scaled(parts[i][j]);
            }
        }
        let pairs = pairs_of(assignment::solve(&matrix));
        let total: i128 = pairs.iter().map(|&(i, j)| matrix[i][j]).sum();
        let d = denom as f64;
        let k = pairs.len() as f64;
        MatchAssignment {
            cost: total as f64 / d,
            similarity: k - total as f64 / d,
            pairs,
        }
    } else {
        let cost_of = |(num, den): (usize, usize)| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let mut matrix = vec![vec![0.0f64; size]; size];
        for i in 0..m {
            for j in 0..n {
                matrix[i][j] = cost_of(parts[i][j]);
            }
        }
        let pairs = pairs_of(assignment::solve(&matrix));
        let cost: f64 = pairs.iter().map(|&(i, j)| matrix[i][j]).sum();
        MatchAssignment {
            similarity: pairs.iter().map(|&(i, j)| 1.0 - matrix[i][j]).sum(),
            cost,
            pairs,
        }
    }
}

/// Average normalized Levenshtein similarity for answer lists: the matched
/// similarity mass divided by the longer list's length. An empty prediction
/// list scores 0.
pub fn anlsl(gt: &[String], pred: &[String]) -> f64 {
    if gt.is_empty() || pred.is_empty() {
        return 0.0;
    }
    optimal_match(gt, pred).similarity / gt.len().max(pred.len()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn modified_ld_cases() {
        assert_eq!(levenshtein_modified("kitten", "sitting"), 3);
        assert_eq!(levenshtein_modified("ab", "zab"), 0);
        assert_eq!(levenshtein_modified("ab", "abcdefg"), 2);
        assert_eq!(levenshtein_modified("abc", ""), 3);
        assert_eq!(levenshtein_modified("", ""), 0);
        assert_eq!(levenshtein_modified("", "x"), 0);
    }

    #[test]
    fn nls_values() {
        assert_eq!(nls("abc", "abc"), 1.0);
        assert!((nls("abc", "abd") - (1.0 - 1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(nls("abc", ""), 0.0);
        assert_eq!(nls("", ""), 1.0);
        // Formatting-only differences are normalized away.
        assert_eq!(nls("New  York", " New York"), 1.0);
    }

    #[test]
    fn long_prediction_early_exit() {
        // |P| = 7 > 6: LD = |G| = 2, NLS = 1 - 2/7.
        assert!((nls("ab", "abcdefg") - (1.0 - 2.0 / 7.0)).abs() < 1e-12);
    }

    #[test]
    fn match_examples() {
        let m = optimal_match(&v(&["a"]), &v(&["a"]));
        assert_eq!((m.pairs, m.cost), (vec![(0, 0)], 0.0));
        let m = optimal_match(&v(&["ab", "cd"]), &v(&["cd", "ab"]));
        assert_eq!((m.pairs, m.cost), (vec![(0, 1), (1, 0)], 0.0));
        let m = optimal_match(&v(&["ab", "cd"]), &v(&["ab"]));
        assert_eq!((m.pairs, m.cost), (vec![(0, 0)], 0.0));
    }

    #[test]
    fn anlsl_examples() {
        assert_eq!(anlsl(&v(&["x"]), &v(&["x"])), 1.0);
        assert_eq!(anlsl(&v(&["ab", "cd"]), &v(&["cd", "ab"])), 1.0);
        assert_eq!(anlsl(&v(&["ab", "cd"]), &v(&["ab"])), 0.5);
        assert_eq!(anlsl(&v(&["ab"]), &[]), 0.0);
    }

    #[test]
    fn long_strings_match() {
        let gt: Vec<String> = (100..120).map(|n| "a".repeat(n)).collect();
        let pred: Vec<String> = (121..141).map(|n| "a".repeat(n)).collect();
        let m = optimal_match(&gt, &pred);
        assert_eq!(m.pairs.len(), 20);
        assert_eq!(m.cost, 0.0);
    }
}
