//! Maps extracted page lines onto crawled HTML blocks.
//!
//! Every line is cleaned, matched against an indexed pool of HTML texts by
//! fuzzy containment (and spatial proximity when the HTML block carries a
//! box), and then:
//!
//! * accepted directly when exactly one candidate survives;
//! * resolved by context when several survive: each candidate's HTML text is
//!   joined with the neighbouring PDF block texts and compared with the
//!   line's own block text, and the best one is accepted only if its score
//!   exceeds the context threshold;
//! * otherwise placed in the unmatched bin.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::model::{BBox, HtmlBlock, PageDocument, TextLine};
use crate::text::{best_window, char_ngrams, normalize, partial_similarity};

const GRAM: usize = 3;

/// Element type recorded for lines that did not match any HTML block.
pub const UNMATCHED_TYPE: &str = "OtherText";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlignError {
    #[error("{name} = {value} outside {range}")]
    InvalidConfig {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignConfig {
    /// Minimum fuzzy-containment similarity for a block to become a candidate.
    pub text_sim_threshold: f64,
    /// Maximum gap in pixels between a line box and an HTML block box.
    /// `None` means 5% of the page diagonal.
    pub spatial_tolerance: Option<f64>,
    /// A context-resolved candidate must score strictly above this.
    pub context_threshold: f64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        Self {
            text_sim_threshold: 0.75,
            spatial_tolerance: None,
            context_threshold: 0.3,
        }
    }
}

pub const DEFAULT_SPATIAL_FRACTION: f64 = 0.05;

impl AlignConfig {
    pub fn validate(&self) -> Result<(), AlignError> {
        let unit = |name, value: f64| {
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(AlignError::InvalidConfig {
                    name,
                    value,
                    range: "[0, 1]",
                })
            }
        };
        unit("text_sim_threshold", self.text_sim_threshold)?;
        unit("context_threshold", self.context_threshold)?;
        if let Some(tol) = self.spatial_tolerance {
            if !(tol.is_finite() && tol >= 0.0) {
                return Err(AlignError::InvalidConfig {
                    name: "spatial_tolerance",
                    value: tol,
                    range: "[0, inf)",
                });
            }
        }
        Ok(())
    }

    pub fn spatial_tolerance_for(&self, page: &PageDocument) -> f64 {
        self.spatial_tolerance
            .unwrap_or(DEFAULT_SPATIAL_FRACTION * page.diagonal())
    }
}

fn is_bullet(c: char) -> bool {
    matches!(
        c,
        '•' | '·' | '●' | '○' | '■' | '□' | '◆' | '◇' | '▪' | '▫' | '►' | '▶' | '‣' | '⁃'
            | '-' | '–' | '—' | '*' | '★' | '☆' | '※'
    )
}

fn is_cjk_numeral(c: char) -> bool {
    "一二三四五六七八九十百".contains(c)
}

/// Length in chars of a list-number prefix such as `3.`, `(2)`, `（四）` or
/// `一、`, including trailing whitespace. Zero when there is none.
fn numbered_prefix_len(chars: &[char]) -> usize {
    let digits = |from: usize, pred: fn(char) -> bool| {
        chars[from..].iter().take_while(|c| pred(**c)).count()
    };
    let ascii = |c: char| c.is_ascii_digit();
    let any_num = |c: char| c.is_ascii_digit() || is_cjk_numeral(c);

    let mut end = 0;
    if matches!(chars.first(), Some('(' | '（')) {
        let n = digits(1, any_num);
        if (1..=3).contains(&n) && matches!(chars.get(1 + n), Some(')' | '）')) {
            end = n + 2;
        }
    } else {
        let n = digits(0, ascii);
        if (1..=3).contains(&n) {
            match chars.get(n) {
                Some('.' | ')' | '．') if !chars.get(n + 1).is_some_and(|c| c.is_ascii_digit()) => {
                    end = n + 1
                }
                Some('、') => end = n + 1,
                _ => {}
            }
        } else {
            let n = digits(0, is_cjk_numeral);
            if n >= 1 && chars.get(n) == Some(&'、') {
                end = n + 1;
            }
        }
    }
    if end == 0 {
        return 0;
    }
    end + chars[end..].iter().take_while(|c| c.is_whitespace()).count()
}

/// Normalizes `s` and drops bullet markers and list numbering at its start.
pub fn clean_text(s: &str) -> String {
    let norm = normalize(s);
    let chars: Vec<char> = norm.chars().collect();
    let mut start = chars.iter().take_while(|c| is_bullet(**c)).count();
    if start > 0 {
        start += chars[start..].iter().take_while(|c| c.is_whitespace()).count();
    }
    start += numbered_prefix_len(&chars[start..]);
    chars[start..].iter().collect()
}

/// Cleans a line and the text of its owning block with the same rules as the pool.
pub fn prepare_texts(line: &TextLine, block_text: &str) -> (String, String) {
    (clean_text(&line.text), clean_text(block_text))
}

#[derive(Debug, Clone)]
struct PoolEntry {
    block: HtmlBlock,
    clean: String,
    chars: Vec<char>,
}

/// Cleaned HTML texts with a character-trigram inverted index.
#[derive(Debug, Clone, Default)]
pub struct CandidatePool {
    entries: Vec<PoolEntry>,
    index: HashMap<String, Vec<usize>>,
}

pub fn build_pool(html_blocks: &[HtmlBlock]) -> CandidatePool {
    let mut entries = Vec::with_capacity(html_blocks.len());
    let mut index: HashMap<String, Vec<usize>> = HashMap::new();
    for (k, block) in html_blocks.iter().enumerate() {
        let clean = clean_text(&block.text);
        let chars: Vec<char> = clean.chars().collect();
        let grams: HashSet<String> = char_ngrams(&chars, GRAM).into_iter().collect();
        for g in grams {
            index.entry(g).or_default().push(k);
        }
        entries.push(PoolEntry {
            block: block.clone(),
            clean,
            chars,
        });
    }
    CandidatePool { entries, index }
}

impl CandidatePool {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Indices (pool positions) of non-empty blocks containing `gram`.
    pub fn lookup(&self, gram: &str) -> &[usize] {
        self.index.get(gram).map_or(&[], Vec::as_slice)
    }

    pub fn cleaned(&self, k: usize) -> &str {
        &self.entries[k].clean
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    /// HTML block index.
    pub j: usize,
    pub element_type: String,
    /// Cleaned HTML block text.
    pub text: String,
    pub similarity: f64,
    /// Char offset of the matched window inside the HTML text.
    pub offset: usize,
}

fn score_entry(line: &[char], entry: &PoolEntry) -> Option<(f64, usize)> {
    if entry.chars.is_empty() || line.is_empty() {
        return None;
    }
    if line.len() <= entry.chars.len() {
        best_window(line, &entry.chars).map(|w| (w.similarity, w.start))
    } else {
        best_window(&entry.chars, line).map(|w| (w.similarity, 0))
    }
}

fn accept(
    k: usize,
    line: &[char],
    bbox: Option<&BBox>,
    pool: &CandidatePool,
    cfg: &AlignConfig,
    spatial_tolerance: f64,
) -> Option<Candidate> {
    let entry = &pool.entries[k];
    let (similarity, offset) = score_entry(line, entry)?;
    if similarity < cfg.text_sim_threshold {
        return None;
    }
    if let (Some(lb), Some(hb)) = (bbox, entry.block.bbox.as_ref()) {
        if lb.distance_to(hb) > spatial_tolerance {
            return None;
        }
    }
    Some(Candidate {
        j: entry.block.index,
        element_type: entry.block.element_type.clone(),
        text: entry.clean.clone(),
        similarity,
        offset,
    })
}

/// Pool positions that may reach `threshold`; everything else is provably
/// below it by the q-gram counting bound, so the shortlist is lossless.
fn shortlist(line: &[char], pool: &CandidatePool, threshold: f64) -> Vec<usize> {
    let m = line.len();
    let exhaustive = || (0..pool.entries.len()).collect::<Vec<_>>();
    if threshold <= 0.0 || m < GRAM {
        return exhaustive();
    }
    // cost <= (1 - t) * max(m, |window|) and |window| <= m + cost.
    let max_cost = ((1.0 - threshold) * m as f64 / threshold + 1e-9).floor() as i64;
    let need = (m - GRAM + 1) as i64 - GRAM as i64 * max_cost;
    if need <= 0 {
        return exhaustive();
    }
    let mut hits = vec![0i64; pool.entries.len()];
    for gram in char_ngrams(line, GRAM) {
        for &k in pool.lookup(&gram) {
            hits[k] += 1;
        }
    }
    (0..pool.entries.len())
        .filter(|&k| {
            let len = pool.entries[k].chars.len();
            // The counting bound only holds when the line is the pattern.
            len < m || hits[k] >= need
        })
        .collect()
}

/// Candidates for one cleaned line, in HTML index order.
pub fn find_candidates(
    clean_line: &str,
    bbox: Option<&BBox>,
    pool: &CandidatePool,
    cfg: &AlignConfig,
    spatial_tolerance: f64,
) -> Vec<Candidate> {
    let line: Vec<char> = clean_line.chars().collect();
    let mut out: Vec<Candidate> = shortlist(&line, pool, cfg.text_sim_threshold)
        .into_iter()
        .filter_map(|k| accept(k, &line, bbox, pool, cfg, spatial_tolerance))
        .collect();
    out.sort_by_key(|c| c.j);
    out
}

/// Reference path for [`find_candidates`] that scores every pool entry.
pub fn find_candidates_exhaustive(
    clean_line: &str,
    bbox: Option<&BBox>,
    pool: &CandidatePool,
    cfg: &AlignConfig,
    spatial_tolerance: f64,
) -> Vec<Candidate> {
    let line: Vec<char> = clean_line.chars().collect();
    let mut out: Vec<Candidate> = (0..pool.entries.len())
        .filter_map(|k| accept(k, &line, bbox, pool, cfg, spatial_tolerance))
        .collect();
    out.sort_by_key(|c| c.j);
    out
}

fn join(a: &str, b: &str) -> String {
    match (a.is_empty(), b.is_empty()) {
        (true, _) => b.to_string(),
        (_, true) => a.to_string(),
        _ => format!("{a} {b}"),
    }
}

/// Context score of one candidate against the line's block text.
pub fn context_score(cand: &Candidate, prev: &str, next: &str, block_text: &str) -> f64 {
    let with_prev = partial_similarity(&join(prev, &cand.text), block_text);
    let with_next = partial_similarity(&join(&cand.text, next), block_text);
    with_prev.max(with_next)
}

/// Picks the candidate with the highest context score (first on ties) if
/// that score is strictly above `cfg.context_threshold`.
pub fn disambiguate<'a>(
    cands: &'a [Candidate],
    prev: &str,
    next: &str,
    block_text: &str,
    cfg: &AlignConfig,
) -> Option<&'a Candidate> {
    let mut best: Option<(&Candidate, f64)> = None;
    for c in cands {
        let s = context_score(c, prev, next, block_text);
        if best.map_or(true, |(_, b)| s > b) {
            best = Some((c, s));
        }
    }
    best.filter(|(_, s)| *s > cfg.context_threshold)
        .map(|(c, _)| c)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedEntry {
    pub j: usize,
    pub tau: String,
    pub block_id: String,
    pub line_ids: Vec<String>,
    /// Char offset of each line's match inside the HTML block text.
    pub offsets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AlignedStructure {
    /// Sorted by `(j, tau, block_id)`.
    pub entries: Vec<AlignedEntry>,
    /// Lines assigned to the bin after the last HTML block.
    pub unmatched: Vec<String>,
}

impl AlignedStructure {
    pub fn matched_count(&self) -> usize {
        self.entries.iter().map(|e| e.line_ids.len()).sum()
    }

    pub fn total_lines(&self) -> usize {
        self.matched_count() + self.unmatched.len()
    }

    /// Where each matched line went: `line_id -> (j, block_id)`.
    pub fn placements(&self) -> HashMap<&str, (usize, &str)> {
        self.entries
            .iter()
            .flat_map(|e| e.line_ids.iter().map(move |l| (l.as_str(), (e.j, e.block_id.as_str()))))
            .collect()
    }
}

/// Aligns all lines of `page` against the HTML blocks of its article.
pub fn align_page(page: &PageDocument, html_blocks: &[HtmlBlock], cfg: &AlignConfig) -> AlignedStructure {
    let pool = build_pool(html_blocks);
    let tolerance = cfg.spatial_tolerance_for(page);

    let block_texts: HashMap<&str, String> = page
        .blocks
        .iter()
        .map(|b| {
            let joined = page
                .block_lines(&b.block_id)
                .iter()
                .map(|l| l.text.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            (b.block_id.as_str(), clean_text(&joined))
        })
        .collect();
    let block_pos: HashMap<&str, usize> = page
        .blocks
        .iter()
        .enumerate()
        .map(|(i, b)| (b.block_id.as_str(), i))
        .collect();
    let neighbour = |pos: Option<usize>| -> &str {
        pos.and_then(|p| page.blocks.get(p))
            .and_then(|b| block_texts.get(b.block_id.as_str()))
            .map_or("", String::as_str)
    };

    let mut bins: BTreeMap<(usize, String, String), (Vec<String>, Vec<usize>)> = BTreeMap::new();
    let mut unmatched = Vec::new();
    for line in &page.lines {
        let block_text = block_texts
            .get(line.block_id.as_str())
            .cloned()
            .unwrap_or_default();
        let (clean_line, clean_block) = prepare_texts(line, &block_text);
        let cands = find_candidates(&clean_line, Some(&line.bbox), &pool, cfg, tolerance);
        let chosen = match cands.len() {
            0 => None,
            1 => Some(&cands[0]),
            _ => {
                let pos = block_pos.get(line.block_id.as_str()).copied();
                let prev = neighbour(pos.and_then(|p| p.checked_sub(1)));
                let next = neighbour(pos.map(|p| p + 1));
                disambiguate(&cands, prev, next, &clean_block, cfg)
            }
        };
        match chosen {
            Some(c) => {
                let bin = bins
                    .entry((c.j, c.element_type.clone(), line.block_id.clone()))
                    .or_default();
                bin.0.push(line.line_id.clone());
                bin.1.push(c.offset);
            }
            None => unmatched.push(line.line_id.clone()),
        }
    }

    AlignedStructure {
        entries: bins
            .into_iter()
            .map(|((j, tau, block_id), (line_ids, offsets))| AlignedEntry {
                j,
                tau,
                block_id,
                line_ids,
                offsets,
            })
            .collect(),
        unmatched,
    }
}

/// One record of the alignment output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentRecord {
    pub doc_id: String,
    pub page_index: u32,
    #[serde(flatten)]
    pub aligned: AlignedStructure,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Language, LayoutBlock};

    fn html(texts: &[(&str, &str)]) -> Vec<HtmlBlock> {
        texts
            .iter()
            .enumerate()
            .map(|(i, (t, ty))| HtmlBlock {
                index: i,
                text: t.to_string(),
                element_type: ty.to_string(),
                bbox: None,
            })
            .collect()
    }

    fn cfg() -> AlignConfig {
        AlignConfig::default()
    }

    #[test]
    fn prefix_rules() {
        assert_eq!(clean_text("• Hello"), "Hello");
        assert_eq!(clean_text("Hello"), "Hello");
        assert_eq!(clean_text("3. 引言"), "引言");
        assert_eq!(clean_text("一、总则"), "总则");
        assert_eq!(clean_text("(2) second"), "second");
        assert_eq!(clean_text("（四）结语"), "结语");
        assert_eq!(clean_text("3.5 million"), "3.5 million");
        assert_eq!(clean_text("2024 budget"), "2024 budget");
        assert_eq!(clean_text("— quote"), "quote");
    }

    #[test]
    fn empty_pool() {
        let pool = build_pool(&[]);
        assert!(pool.is_empty());
        assert!(find_candidates("anything", None, &pool, &cfg(), 10.0).is_empty());
    }

    #[test]
    fn shared_trigram_retrieves_both() {
        let pool = build_pool(&html(&[("the cat", "p"), ("a cathedral", "p"), ("dog", "p")]));
        assert_eq!(pool.lookup("cat"), &[0, 1]);
        assert_eq!(pool.lookup("dog"), &[2]);
    }

    #[test]
    fn whitespace_block_never_retrieved() {
        let pool = build_pool(&html(&[("   \t ", "p"), ("x", "p")]));
        assert_eq!(pool.cleaned(0), "");
        let lax = AlignConfig {
            text_sim_threshold: 0.0,
            ..cfg()
        };
        let got = find_candidates("x", None, &pool, &lax, 0.0);
        assert_eq!(got.iter().map(|c| c.j).collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn exact_match_dominates() {
        let pool = build_pool(&html(&[("Alpha beta gamma", "p"), ("Delta epsilon", "p")]));
        let got = find_candidates("Delta epsilon", None, &pool, &cfg(), 0.0);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].j, 1);
        assert_eq!(got[0].similarity, 1.0);
    }

    #[test]
    fn typo_retained_at_point_eight() {
        let pool = build_pool(&html(&[("Hello world", "p")]));
        let c = AlignConfig {
            text_sim_threshold: 0.8,
            ..cfg()
        };
        let got = find_candidates("Helo world", None, &pool, &c, 0.0);
        assert_eq!(got.len(), 1);
        assert!((got[0].similarity - 10.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn garbage_has_no_candidates() {
        let pool = build_pool(&html(&[("Hello world", "p"), ("Quarterly results", "p")]));
        assert!(find_candidates("zqxv jkwp", None, &pool, &cfg(), 0.0).is_empty());
    }

    #[test]
    fn spatial_filter_applies_when_both_boxes_exist() {
        let mut blocks = html(&[("Hello world", "p")]);
        blocks[0].bbox = Some(BBox::new(0, 0, 100, 20));
        let pool = build_pool(&blocks);
        let near = BBox::new(0, 25, 100, 40);
        let far = BBox::new(0, 500, 100, 520);
        assert_eq!(find_candidates("Hello world", Some(&near), &pool, &cfg(), 10.0).len(), 1);
        assert!(find_candidates("Hello world", Some(&far), &pool, &cfg(), 10.0).is_empty());
        assert_eq!(find_candidates("Hello world", None, &pool, &cfg(), 10.0).len(), 1);
    }

    fn cand(j: usize, text: &str) -> Candidate {
        Candidate {
            j,
            element_type: "p".into(),
            text: text.into(),
            similarity: 1.0,
            offset: 0,
        }
    }

    #[test]
    fn context_picks_concatenation_match() {
        let cands = [cand(0, "market news"), cand(1, "weather today")];
        let block = "Morning briefing weather today";
        let got = disambiguate(&cands, "Morning briefing", "", block, &cfg()).unwrap();
        assert_eq!(got.j, 1);
        assert_eq!(context_score(&cands[1], "Morning briefing", "", block), 1.0);
    }

    #[test]
    fn low_context_scores_give_none() {
        let cands = [cand(0, "aaaa"), cand(1, "bbbb")];
        for c in &cands {
            assert!(context_score(c, "", "", "zzzzzzzzzzzz") <= 0.3);
        }
        assert!(disambiguate(&cands, "", "", "zzzzzzzzzzzz", &cfg()).is_none());
    }

    #[test]
    fn identical_candidates_pick_first() {
        let cands = [cand(3, "same text"), cand(7, "same text")];
        let got = disambiguate(&cands, "", "", "same text", &cfg()).unwrap();
        assert_eq!(got.j, 3);
    }

    fn page(lines: &[(&str, &str, &str)]) -> PageDocument {
        let mut blocks: Vec<LayoutBlock> = Vec::new();
        let mut text_lines = Vec::new();
        for (i, (id, text, block)) in lines.iter().enumerate() {
            let y = 20 * i as i64;
            text_lines.push(TextLine {
                line_id: id.to_string(),
                text: text.to_string(),
                bbox: BBox::new(0, y, 400, y + 15),
                font_size: None,
                font_style: None,
                block_id: block.to_string(),
            });
            match blocks.iter_mut().find(|b| b.block_id == *block) {
                Some(b) => b.line_ids.push(id.to_string()),
                None => blocks.push(LayoutBlock {
                    block_id: block.to_string(),
                    category: "paragraph".into(),
                    bbox: BBox::new(0, 0, 400, 400),
                    line_ids: vec![id.to_string()],
                }),
            }
        }
        PageDocument {
            doc_id: "d".into(),
            page_index: 0,
            width: 1000,
            height: 1000,
            language: Language::En,
            lines: text_lines,
            blocks,
        }
    }

    #[test]
    fn exact_lines_match_their_blocks() {
        let p = page(&[("l1", "Budget passes senate", "b1"), ("l2", "Rain expected tomorrow", "b2")]);
        let h = html(&[("Budget passes senate", "title"), ("Rain expected tomorrow", "paragraph")]);
        let a = align_page(&p, &h, &cfg());
        assert!(a.unmatched.is_empty());
        assert_eq!(a.entries.len(), 2);
        assert_eq!((a.entries[0].j, a.entries[0].tau.as_str()), (0, "title"));
        assert_eq!(a.entries[0].line_ids, vec!["l1"]);
        assert_eq!((a.entries[1].j, a.entries[1].tau.as_str()), (1, "paragraph"));
    }

    #[test]
    fn noisy_line_matches_nearby_block() {
        // Hand trace: "Rain expectd tomorow" vs block 1 costs 2 edits over 22
        // chars (similarity 0.909); block 0 shares no wording.
        let p = page(&[("l1", "Rain expectd tomorow", "b1")]);
        let mut h = html(&[("Budget passes senate", "title"), ("Rain expected tomorrow", "paragraph")]);
        h[1].bbox = Some(BBox::new(0, 0, 400, 30));
        let a = align_page(&p, &h, &cfg());
        assert_eq!(a.entries.len(), 1);
        assert_eq!(a.entries[0].j, 1);
    }

    #[test]
    fn advertisement_goes_to_unmatched_bin() {
        let p = page(&[("l1", "Budget passes senate", "b1"), ("ad", "BUY CHEAP WATCHES NOW", "b2")]);
        let h = html(&[("Budget passes senate", "title")]);
        let a = align_page(&p, &h, &cfg());
        assert_eq!(a.unmatched, vec!["ad"]);
        assert_eq!(a.total_lines(), 2);
    }

    #[test]
    fn lines_within_a_paragraph_record_offsets() {
        let p = page(&[
            ("l1", "The council met on Monday", "b1"),
            ("l2", "to discuss the new budget.", "b1"),
        ]);
        let h = html(&[("The council met on Monday to discuss the new budget.", "paragraph")]);
        let a = align_page(&p, &h, &cfg());
        assert_eq!(a.entries.len(), 1);
        assert_eq!(a.entries[0].line_ids, vec!["l1", "l2"]);
        assert_eq!(a.entries[0].offsets, vec![0, 26]);
    }

    #[test]
    fn ambiguous_line_resolved_by_block_context() {
        // "Photo: staff" occurs in two captions; the surrounding block text
        // only fits the second one.
        let p = page(&[
            ("l1", "Flooded streets downtown", "cap"),
            ("l2", "Photo: staff", "cap"),
        ]);
        let h = html(&[
            ("Mayor visits school Photo: staff", "caption"),
            ("Flooded streets downtown Photo: staff", "caption"),
        ]);
        let a = align_page(&p, &h, &cfg());
        let placed = a.placements();
        assert_eq!(placed["l2"].0, 1);
        assert_eq!(placed["l1"].0, 1);
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        let bad = AlignConfig {
            text_sim_threshold: 1.2,
            ..cfg()
        };
        assert!(bad.validate().is_err());
        let bad = AlignConfig {
            spatial_tolerance: Some(-1.0),
            ..cfg()
        };
        assert!(bad.validate().is_err());
    }
}
