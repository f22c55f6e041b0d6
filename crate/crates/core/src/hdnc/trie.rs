use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::scheme::NumberingScheme;
use crate::error::{Error, Result};

const SCORE_EPS: f64 = 1e-9;

/// Widths used to slice the numeric suffix into per-level codes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SplitStrategy {
    pub widths: Vec<usize>,
}

impl SplitStrategy {
    pub fn new(widths: Vec<usize>) -> Self {
        SplitStrategy { widths }
    }

    pub fn depth(&self) -> usize {
        self.widths.len()
    }

    /// Cuts `digits` into one code per level.
    pub fn slices<'a>(&self, digits: &'a str) -> Vec<&'a str> {
        let mut at = 0;
        self.widths
            .iter()
            .map(|w| {
                let s = &digits[at..at + w];
                at += w;
                s
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyNode {
    pub level: usize,
    pub code: String,
    pub label: Vec<String>,
    pub member_page_ids: BTreeSet<String>,
    pub children: Vec<HierarchyNode>,
}

impl HierarchyNode {
    pub fn size(&self) -> usize {
        self.member_page_ids.len()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Depth-first walk yielding each node with its code path from the root.
    pub fn walk<'a>(&'a self, path: &mut Vec<&'a str>, f: &mut dyn FnMut(&[&'a str], &'a HierarchyNode)) {
        path.push(&self.code);
        f(path, self);
        for c in &self.children {
            c.walk(path, f);
        }
        path.pop();
    }
}

/// Every composition of `suffix_len` into 1..=4 parts drawn from {1,2,3},
/// in lexicographic order of the width lists.
pub fn enumerate_strategies(suffix_len: usize) -> Result<Vec<SplitStrategy>> {
    if !(1..=12).contains(&suffix_len) {
        return Err(Error::invalid(format!("suffix length {suffix_len} not in 1..=12")));
    }
    fn go(left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        if cur.len() == 4 {
            return;
        }
        for w in 1..=3.min(left) {
            cur.push(w);
            go(left - w, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(suffix_len, &mut Vec::new(), &mut out);
    out.sort();
    Ok(out.into_iter().map(SplitStrategy::new).collect())
}

#[derive(Default)]
struct Builder {
    members: BTreeSet<String>,
    children: BTreeMap<String, Builder>,
}

impl Builder {
    fn finish(self, level: usize, code: String) -> HierarchyNode {
        HierarchyNode {
            level,
            code,
            label: Vec::new(),
            member_page_ids: self.members,
            children: self
                .children
                .into_iter()
                .map(|(c, b)| b.finish(level + 1, c))
                .collect(),
        }
    }
}

/// Builds the code trie. A page is placed by the first of its drawings so
/// that leaf member sets partition the pages.
pub fn build_trie<N: AsRef<str>, P: AsRef<str>>(
    conforming: &[(N, P)],
    scheme: &NumberingScheme,
    strategy: &SplitStrategy,
) -> Vec<HierarchyNode> {
    let mut root = Builder::default();
    let mut placed: HashSet<&str> = HashSet::new();
    for (number, page) in conforming {
        let (number, page) = (number.as_ref(), page.as_ref());
        let Some((_, digits)) = scheme.parse(number) else {
            continue;
        };
        if !placed.insert(page) {
            continue;
        }
        let mut node = &mut root;
        for code in strategy.slices(digits) {
            node = node.children.entry(code.to_string()).or_default();
            node.members.insert(page.to_string());
        }
    }
    root.children
        .into_iter()
        .map(|(c, b)| b.finish(1, c))
        .collect()
}

fn normalized_entropy(sizes: &[usize]) -> f64 {
    if sizes.len() < 2 {
        return 0.0;
    }
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let h: f64 = sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / total;
            -p * p.ln()
        })
        .sum();
    h / (sizes.len() as f64).ln()
}

/// Balance in [0,1]: for each level, the member-weighted mean over parents of
/// the normalized entropy of the parent's child sizes (a single child scores
/// 0), averaged over levels. A single level-1 node scores 0 overall.
pub fn score_balance(roots: &[HierarchyNode]) -> f64 {
    if roots.len() < 2 {
        return 0.0;
    }
    let mut per_level: Vec<f64> = Vec::new();
    let mut parents: Vec<Vec<&HierarchyNode>> = vec![roots.iter().collect()];
    while !parents.is_empty() {
        let total: usize = parents.iter().flatten().map(|n| n.size()).sum();
        let mut level_score = 0.0;
        for siblings in &parents {
            let sizes: Vec<usize> = siblings.iter().map(|n| n.size()).collect();
            let weight = sizes.iter().sum::<usize>() as f64 / total.max(1) as f64;
            level_score += weight * normalized_entropy(&sizes);
        }
        per_level.push(level_score);
        parents = parents
            .iter()
            .flatten()
            .filter(|n| !n.children.is_empty())
            .map(|n| n.children.iter().collect())
            .collect();
    }
    per_level.iter().sum::<f64>() / per_level.len() as f64
}

/// Picks the most balanced split. Ties prefer more levels, then the
/// lexicographically smaller width list.
pub fn select_strategy<N: AsRef<str>, P: AsRef<str>>(
    conforming: &[(N, P)],
    scheme: &NumberingScheme,
) -> Result<(SplitStrategy, Vec<HierarchyNode>)> {
    if conforming.is_empty() {
        return Err(Error::invalid("no conforming drawings"));
    }
    let mut best: Option<(f64, SplitStrategy, Vec<HierarchyNode>)> = None;
    for strategy in enumerate_strategies(scheme.suffix_len)? {
        let roots = build_trie(conforming, scheme, &strategy);
        let score = score_balance(&roots);
        let better = match &best {
            None => true,
            Some((s, b, _)) => {
                score > s + SCORE_EPS
                    || ((score - s).abs() <= SCORE_EPS
                        && (strategy.depth() > b.depth()
                            || (strategy.depth() == b.depth() && strategy.widths < b.widths)))
            }
        };
        if better {
            best = Some((score, strategy, roots));
        }
    }
    let (_, s, r) = best.expect("at least one strategy for suffix_len >= 1");
    Ok((s, r))
}
