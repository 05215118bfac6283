//! Merging consecutive pages of one article into a logical document.

use super::provider::Provider;
use super::QaError;

pub const LINK_THRESHOLD: f64 = 0.8;
pub const MAX_LINKED_PAGES: usize = 4;

/// Greedy left-to-right chaining over `pages` (texts in page order): page
/// `i` joins the running group when its similarity to page `i - 1` exceeds
/// `threshold` and the group still has room. Returns groups of indices.
pub fn link_pages(
    pages: &[String],
    provider: &dyn Provider,
    threshold: f64,
    max_pages: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, QaError> {
    if max_pages == 0 {
        return Err(QaError::InvalidConfig("max_pages must be at least 1".into()));
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..pages.len() {
        if let Some(current) = groups.last_mut() {
            if current.len() < max_pages {
                let score = provider.similarity(&pages[i - 1], &pages[i], seed)?;
                if score > threshold {
                    current.push(i);
                    continue;
                }
            }
        }
        groups.push(vec![i]);
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qa::provider::{MockProvider, MockRule};

    fn pages(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("page {i}")).collect()
    }

    fn fixed(score: &str) -> MockProvider {
        MockProvider::new().with_rules(vec![MockRule::reply("similarity", score)])
    }

    fn sizes(g: &[Vec<usize>]) -> Vec<usize> {
        g.iter().map(Vec::len).collect()
    }

    #[test]
    fn two_pages_above_threshold() {
        let g = link_pages(&pages(2), &fixed("0.85"), LINK_THRESHOLD, MAX_LINKED_PAGES, 0).unwrap();
        assert_eq!(g, vec![vec![0, 1]]);
    }

    #[test]
    fn five_page_chain_caps_at_four() {
        let g = link_pages(&pages(5), &fixed("0.9"), LINK_THRESHOLD, MAX_LINKED_PAGES, 0).unwrap();
        assert_eq!(sizes(&g), vec![4, 1]);
    }

    #[test]
    fn threshold_is_strict() {
        let g = link_pages(&pages(2), &fixed("0.8"), LINK_THRESHOLD, MAX_LINKED_PAGES, 0).unwrap();
        assert_eq!(sizes(&g), vec![1, 1]);
        let g = link_pages(&pages(2), &fixed("0.5"), LINK_THRESHOLD, MAX_LINKED_PAGES, 0).unwrap();
        assert_eq!(sizes(&g), vec![1, 1]);
    }

    #[test]
    fn jaccard_mock_links_similar_pages() {
        let texts = vec![
            "the river festival draws crowds to the river bank".to_string(),
            "the river festival draws crowds to the river banks".to_string(),
            "quarterly earnings beat analyst forecasts".to_string(),
        ];
        let g = link_pages(&texts, &MockProvider::new(), LINK_THRESHOLD, MAX_LINKED_PAGES, 0).unwrap();
        assert_eq!(g, vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn empty_and_invalid() {
        assert!(link_pages(&[], &fixed("1"), 0.8, 4, 0).unwrap().is_empty());
        assert!(matches!(
            link_pages(&pages(2), &fixed("1"), 0.8, 0, 0),
            Err(QaError::InvalidConfig(_))
        ));
    }
}
