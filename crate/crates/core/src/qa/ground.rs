//! Mapping answer text back to line boxes.

use crate::model::{BBox, PageDocument, TextLine};
use crate::text::{best_window, normalize};

use super::QaError;

/// Minimum window similarity for a fuzzy grounding.
pub const GROUNDING_THRESHOLD: f64 = 0.85;

/// Indices into `lines` of the shortest consecutive run whose
/// whitespace-free concatenation contains `answer`; when there is no exact
/// occurrence, the run covering the best approximate window is used if its
/// similarity reaches `threshold`.
pub fn locate_in_lines(answer: &str, lines: &[&TextLine], threshold: f64) -> Result<Vec<usize>, QaError> {
    let pattern: Vec<char> = normalize(answer).chars().filter(|c| !c.is_whitespace()).collect();
    let no_grounding = || QaError::NoGrounding(answer.to_string());
    if pattern.is_empty() {
        return Err(no_grounding());
    }
    let mut text: Vec<char> = Vec::new();
    // owner[k]: line index of text[k].
    let mut owner: Vec<usize> = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        for c in line.text.chars().filter(|c| !c.is_whitespace()) {
            text.push(c);
            owner.push(i);
        }
    }

    if let Some(run) = shortest_exact_run(&pattern, &text, &owner) {
        return Ok(run);
    }
    let w = best_window(&pattern, &text).ok_or_else(no_grounding)?;
    if w.similarity < threshold || w.end <= w.start {
        return Err(no_grounding());
    }
    let (first, last) = (owner[w.start], owner[w.end - 1]);
    Ok((first..=last).collect())
}

fn shortest_exact_run(pattern: &[char], text: &[char], owner: &[usize]) -> Option<Vec<usize>> {
    if pattern.len() > text.len() {
        return None;
    }
    text.windows(pattern.len())
        .enumerate()
        .filter(|(_, w)| *w == pattern)
        .map(|(s, _)| (owner[s], owner[s + pattern.len() - 1]))
        .min_by_key(|&(a, b)| (b - a, a))
        .map(|(a, b)| (a..=b).collect())
}

/// Boxes of the lines of `page` that ground `answer`, in line order.
pub fn locate_answer(answer: &str, page: &PageDocument) -> Result<Vec<BBox>, QaError> {
    let lines: Vec<&TextLine> = page.lines.iter().collect();
    let run = locate_in_lines(answer, &lines, GROUNDING_THRESHOLD)?;
    Ok(run.into_iter().map(|i| lines[i].bbox).collect())
}
