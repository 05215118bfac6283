use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use super::{OrderError, ReadingOrder};
use crate::model::LayoutBlock;

/// `before_category` blocks are read before `after_category` blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrecedenceRule {
    pub before_category: String,
    pub after_category: String,
}

impl PrecedenceRule {
    pub fn new(before: &str, after: &str) -> Self {
        Self {
            before_category: before.into(),
            after_category: after.into(),
        }
    }
}

/// Parses `"title<paragraph"` (whitespace around names is ignored).
pub fn parse_rule(s: &str) -> Result<PrecedenceRule, OrderError> {
    match s.split_once('<') {
        Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() && !b.contains('<') => {
            Ok(PrecedenceRule::new(a.trim(), b.trim()))
        }
        _ => Err(OrderError::BadRule(s.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet(pub Vec<PrecedenceRule>);

impl Default for RuleSet {
    fn default() -> Self {
        Self(vec![
            PrecedenceRule::new("title", "paragraph"),
            PrecedenceRule::new("figure", "caption"),
        ])
    }
}

impl RuleSet {
    pub fn parse_list(s: &str) -> Result<Self, OrderError> {
        s.split(',')
            .filter(|r| !r.trim().is_empty())
            .map(parse_rule)
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }

    /// Category pairs `(a, b)` such that `a` must precede `b`, closed under
    /// transitivity. Fails when the rule digraph has a cycle.
    pub fn closure(&self) -> Result<BTreeSet<(String, String)>, OrderError> {
        let mut succ: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for r in &self.0 {
            succ.entry(&r.before_category)
                .or_default()
                .insert(&r.after_category);
            succ.entry(&r.after_category).or_default();
        }
        let mut closure = BTreeSet::new();
        for &start in succ.keys() {
            let mut stack: Vec<&str> = succ[start].iter().copied().collect();
            let mut seen = BTreeSet::new();
            while let Some(node) = stack.pop() {
                if node == start {
                    return Err(OrderError::CyclicRules(vec![start.to_string()]));
                }
                if seen.insert(node) {
                    closure.insert((start.to_string(), node.to_string()));
                    stack.extend(succ[node].iter().copied());
                }
            }
        }
        Ok(closure)
    }
}

/// Topological block order that satisfies every rule between the categories
/// present, breaking ties by position in `html_sequence` (block ids) and then
/// by block id. Blocks absent from `html_sequence` sort after those present.
pub fn order_with_hierarchy(
    blocks: &[LayoutBlock],
    html_sequence: &[String],
    rules: &RuleSet,
) -> Result<ReadingOrder, OrderError> {
    let closure = rules.closure()?;
    let html_pos: HashMap<&str, usize> = html_sequence
        .iter()
        .enumerate()
        .map(|(i, b)| (b.as_str(), i))
        .collect();
    let key = |i: usize| {
        let b = &blocks[i];
        (
            html_pos.get(b.block_id.as_str()).copied().unwrap_or(usize::MAX),
            b.block_id.clone(),
            i,
        )
    };

    let n = blocks.len();
    let mut succ = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for a in 0..n {
        for b in 0..n {
            if a != b
                && closure.contains(&(blocks[a].category.clone(), blocks[b].category.clone()))
            {
                succ[a].push(b);
                indegree[b] += 1;
            }
        }
    }
    let mut ready: BinaryHeap<Reverse<_>> = (0..n)
        .filter(|&i| indegree[i] == 0)
        .map(|i| Reverse(key(i)))
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((_, _, i))) = ready.pop() {
        order.push(i);
        for &s in &succ[i] {
            indegree[s] -= 1;
            if indegree[s] == 0 {
                ready.push(Reverse(key(s)));
            }
        }
    }
    // The block graph inherits acyclicity from the rule closure.
    debug_assert_eq!(order.len(), n);

    let lines = order
        .iter()
        .flat_map(|&i| blocks[i].line_ids.iter().cloned())
        .collect();
    let paras = order.iter().map(|&i| blocks[i].block_id.clone()).collect();
    Ok(ReadingOrder::new(lines, paras))
}
