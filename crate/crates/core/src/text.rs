//! String normalization and edit-distance primitives shared by alignment,
//! grounding and scoring.

use std::collections::HashSet;

use unicode_normalization::UnicodeNormalization;

/// NFC-normalizes `s`, drops control characters and collapses whitespace
/// runs into a single ASCII space. Leading/trailing whitespace is removed.
///
/// The function is idempotent.
pub fn normalize(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pending_space = false;
    for ch in s.nfc() {
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if ch.is_control() {
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.push(ch);
    }
    out
}

/// Removes every whitespace character. Used where line breaks and word
/// spacing must not influence matching (e.g. CJK text split across lines).
pub fn strip_whitespace(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Classical Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - LD(a, b) / max(|a|, |b|)`, with two empty strings scoring 1.
pub fn similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein_chars(&a, &b) as f64 / longest as f64
}

/// Best approximate occurrence of a pattern inside a longer text.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowMatch {
    /// Char offset of the matched window inside the text.
    pub start: usize,
    /// Exclusive char end of the matched window.
    pub end: usize,
    pub cost: usize,
    pub similarity: f64,
}

/// Semi-global alignment of `pattern` against every window of `text`.
///
/// The window with minimal edit cost is selected (leftmost end, then the
/// longest window for that end); its similarity is
/// `1 - cost / max(|pattern|, |window|)`, which equals [`similarity`] when
/// the window is the whole text. Returns `None` when either side is empty.
pub fn best_window(pattern: &[char], text: &[char]) -> Option<WindowMatch> {
    let m = pattern.len();
    let n = text.len();
    if m == 0 || n == 0 {
        return None;
    }
    // cost[i][j]: best cost aligning pattern[..i] to a window ending at j.
    // start[i][j]: where that window starts.
    let width = n + 1;
    let mut cost = vec![0usize; (m + 1) * width];
    let mut start = vec![0usize; (m + 1) * width];
    for j in 0..=n {
        start[j] = j;
    }
    for i in 1..=m {
        cost[i * width] = i;
        start[i * width] = 0;
        for j in 1..=n {
            let diag = (i - 1) * width + (j - 1);
            let up = (i - 1) * width + j;
            let left = i * width + (j - 1);
            let sub = cost[diag] + usize::from(pattern[i - 1] != text[j - 1]);
            let del = cost[up] + 1;
            let ins = cost[left] + 1;
            // Prefer diagonal, then deletion from the pattern, then insertion.
            let (c, s) = if sub <= del && sub <= ins {
                (sub, start[diag])
            } else if del <= ins {
                (del, start[up])
            } else {
                (ins, start[left])
            };
            cost[i * width + j] = c;
            start[i * width + j] = s;
        }
    }
    let last = m * width;
    let (end, best) = (1..=n)
        .map(|j| (j, cost[last + j]))
        .min_by_key(|&(j, c)| (c, j))
        .expect("text is non-empty");
    let begin = start[last + end];
    let window_len = end - begin;
    let denom = m.max(window_len) as f64;
    Some(WindowMatch {
        start: begin,
        end,
        cost: best,
        similarity: 1.0 - best as f64 / denom,
    })
}

/// Symmetric fuzzy-containment similarity: the shorter string is aligned
/// against its best window in the longer one.
pub fn partial_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let (short, long) = if a.len() <= b.len() { (&a, &b) } else { (&b, &a) };
    best_window(short, long).map_or(0.0, |w| w.similarity)
}

/// Character n-grams of `chars`, in order of occurrence (with repeats).
pub fn char_ngrams(chars: &[char], n: usize) -> Vec<String> {
    if n == 0 || chars.len() < n {
        return Vec::new();
    }
    chars.windows(n).map(|w| w.iter().collect()).collect()
}

/// Jaccard index of the character trigram sets of two strings.
pub fn trigram_jaccard(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let sa: HashSet<String> = char_ngrams(&a, 3).into_iter().collect();
    let sb: HashSet<String> = char_ngrams(&b, 3).into_iter().collect();
    if sa.is_empty() && sb.is_empty() {
        return if a == b { 1.0 } else { 0.0 };
    }
    let inter = sa.intersection(&sb).count();
    let union = sa.union(&sb).count();
    inter as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn normalize_collapses_and_strips() {
        assert_eq!(normalize("  a \t\n b\u{0007}c  "), "a bc");
        assert_eq!(normalize("e\u{0301}"), "\u{00e9}");
        assert_eq!(normalize(""), "");
        assert_eq!(normalize("报纸  新闻"), "报纸 新闻");
    }

    #[test]
    fn classic_distances() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("报纸", "报告"), 1);
    }

    #[test]
    fn similarity_of_typo() {
        let s = similarity("Helo world", "Hello world");
        assert!((s - 10.0 / 11.0).abs() < 1e-12);
        assert_eq!(similarity("", ""), 1.0);
    }

    #[test]
    fn window_finds_substring() {
        let w = best_window(&chars("world"), &chars("hello world again")).unwrap();
        assert_eq!((w.start, w.end, w.cost), (6, 11, 0));
        assert_eq!(w.similarity, 1.0);
    }

    #[test]
    fn window_of_whole_text_matches_plain_similarity() {
        let w = best_window(&chars("Helo world"), &chars("Hello world")).unwrap();
        assert_eq!(w.cost, 1);
        assert!((w.similarity - similarity("Helo world", "Hello world")).abs() < 1e-12);
    }

    #[test]
    fn partial_similarity_is_symmetric() {
        let a = "quick brown";
        let b = "the quick brown fox";
        assert_eq!(partial_similarity(a, b), 1.0);
        assert_eq!(partial_similarity(b, a), 1.0);
        assert_eq!(partial_similarity("", "abc"), 0.0);
    }

    #[test]
    fn jaccard_basics() {
        assert_eq!(trigram_jaccard("abcd", "abcd"), 1.0);
        assert_eq!(trigram_jaccard("abc", "xyz"), 0.0);
        assert!((trigram_jaccard("abcd", "abce") - 1.0 / 3.0).abs() < 1e-12);
    }
}
