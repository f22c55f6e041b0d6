//! Hierarchical drawing-number clustering.
//!
//! The project prefix is found by longest common prefix, the numeric suffix is
//! sliced under every candidate width list, and the most balanced code trie
//! becomes the hierarchy. Group labels come from words shared by member
//! titles and each group is checked by comparing within-group and cross-group
//! title overlap.

mod labels;
mod scheme;
mod trie;

pub use labels::{
    infer_labels, jaccard, validate_jaccard, GroupCheck, JaccardReport, BOILERPLATE_SHARE,
    GROUP_SUPPORT, MAX_LABEL_TOKENS, PASS_FLOOR,
};
pub use scheme::{discover_scheme, NumberingScheme};
pub use trie::{
    build_trie, enumerate_strategies, score_balance, select_strategy, HierarchyNode, SplitStrategy,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::DrawingEntry;
use crate::error::{Error, Result};

pub const DEFAULT_JACCARD_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HdncHierarchy {
    pub scheme: NumberingScheme,
    pub strategy: SplitStrategy,
    pub roots: Vec<HierarchyNode>,
    pub labels_by_page: BTreeMap<String, Vec<String>>,
    /// Drawings whose numbers do not follow the scheme; they keep no labels.
    pub non_conforming: Vec<DrawingEntry>,
}

impl HdncHierarchy {
    /// Number of nodes at each level, level 1 first.
    pub fn level_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.strategy.depth()];
        for r in &self.roots {
            r.walk(&mut Vec::new(), &mut |_, n| counts[n.level - 1] += 1);
        }
        counts
    }

    /// Leaf member sets keyed by their code path.
    pub fn leaf_partition(&self) -> BTreeMap<Vec<String>, Vec<String>> {
        let mut out = BTreeMap::new();
        for r in &self.roots {
            r.walk(&mut Vec::new(), &mut |path, n| {
                if n.is_leaf() {
                    out.insert(
                        path.iter().map(|s| s.to_string()).collect(),
                        n.member_page_ids.iter().cloned().collect(),
                    );
                }
            });
        }
        out
    }
}

/// Runs scheme discovery, split selection, labelling and validation.
pub fn run_hdnc(entries: &[DrawingEntry]) -> Result<(HdncHierarchy, JaccardReport)> {
    if entries.len() < 2 {
        return Err(Error::invalid("hierarchy induction needs at least 2 drawings"));
    }
    let numbers: Vec<&str> = entries.iter().map(|e| e.drawing_number.as_str()).collect();
    let scheme = discover_scheme(&numbers)?;

    let (conforming, non_conforming): (Vec<&DrawingEntry>, Vec<&DrawingEntry>) =
        entries.iter().partition(|e| scheme.conforms(&e.drawing_number));
    let pairs: Vec<(&str, &str)> = conforming
        .iter()
        .map(|e| (e.drawing_number.as_str(), e.page_id.as_str()))
        .collect();
    let (strategy, mut roots) = select_strategy(&pairs, &scheme)?;

    let mut titles_by_page: BTreeMap<String, String> = BTreeMap::new();
    for e in entries {
        let slot = titles_by_page.entry(e.page_id.clone()).or_default();
        if !slot.is_empty() {
            slot.push(' ');
        }
        slot.push_str(&e.title);
    }

    let labels_by_page = infer_labels(&mut roots, &titles_by_page);
    let report = validate_jaccard(&roots, &titles_by_page, DEFAULT_JACCARD_SEED);
    Ok((
        HdncHierarchy {
            scheme,
            strategy,
            roots,
            labels_by_page,
            non_conforming: non_conforming.into_iter().cloned().collect(),
        },
        report,
    ))
}
