//! Group labels from title co-occurrence and Jaccard validation of groups.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::index;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::trie::HierarchyNode;
use crate::text::{is_stopword, title_tokens};

pub const GROUP_SUPPORT: f64 = 0.6;
pub const BOILERPLATE_SHARE: f64 = 0.6;
pub const MAX_LABEL_TOKENS: usize = 5;
pub const CROSS_SAMPLES: usize = 100;
pub const PASS_FLOOR: f64 = 0.15;

fn token_set(title: &str) -> BTreeSet<String> {
    title_tokens(title).into_iter().collect()
}

/// |a ∩ b| / |a ∪ b|; two empty sets score 0.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Annotates every node with a label and returns each page's root-to-leaf
/// label path (deduplicated, root first).
pub fn infer_labels(
    roots: &mut [HierarchyNode],
    titles_by_page: &BTreeMap<String, String>,
) -> BTreeMap<String, Vec<String>> {
    let sets: HashMap<&str, BTreeSet<String>> = titles_by_page
        .iter()
        .map(|(p, t)| (p.as_str(), token_set(t)))
        .collect();
    let mut global: HashMap<&str, usize> = HashMap::new();
    for s in sets.values() {
        for t in s {
            *global.entry(t.as_str()).or_default() += 1;
        }
    }
    let n_titles = sets.len().max(1) as f64;

    let label_for = |node: &HierarchyNode| -> Vec<String> {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for p in &node.member_page_ids {
            if let Some(s) = sets.get(p.as_str()) {
                for t in s {
                    *counts.entry(t.as_str()).or_default() += 1;
                }
            }
        }
        let size = node.size().max(1) as f64;
        let mut scored: Vec<(f64, &str)> = counts
            .into_iter()
            .filter(|(t, _)| !is_stopword(t))
            .filter_map(|(t, c)| {
                let group = c as f64 / size;
                let glob = global.get(t).copied().unwrap_or(0) as f64 / n_titles;
                (group >= GROUP_SUPPORT && glob < BOILERPLATE_SHARE && glob > 0.0)
                    .then_some((group / glob, t))
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        scored
            .into_iter()
            .take(MAX_LABEL_TOKENS)
            .map(|(_, t)| t.to_string())
            .collect()
    };

    fn annotate(node: &mut HierarchyNode, f: &dyn Fn(&HierarchyNode) -> Vec<String>) {
        node.label = f(node);
        for c in &mut node.children {
            annotate(c, f);
        }
    }
    for r in roots.iter_mut() {
        annotate(r, &label_for);
    }

    let mut by_page = BTreeMap::new();
    fn collect(node: &HierarchyNode, acc: &mut Vec<String>, out: &mut BTreeMap<String, Vec<String>>) {
        let before = acc.len();
        for t in &node.label {
            if !acc.contains(t) {
                acc.push(t.clone());
            }
        }
        if node.is_leaf() {
            for p in &node.member_page_ids {
                out.insert(p.clone(), acc.clone());
            }
        }
        for c in &node.children {
            collect(c, acc, out);
        }
        acc.truncate(before);
    }
    for r in roots.iter() {
        collect(r, &mut Vec::new(), &mut by_page);
    }
    by_page
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupCheck {
    /// Codes from the root down to the group node.
    pub path: Vec<String>,
    pub size: usize,
    pub within_mean: f64,
    pub cross_mean: f64,
    pub passed: bool,
    /// Single-member group that passes without a comparison.
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JaccardReport {
    /// Hierarchy level whose nodes were validated as groups.
    pub group_level: usize,
    pub per_group: Vec<GroupCheck>,
    pub pass_rate: f64,
}

/// The validated groups are the nodes of the deepest level that has a node
/// with two or more members. When the leaves are single sheets this is the
/// level directly above them.
fn group_level(roots: &[HierarchyNode]) -> usize {
    let mut deepest_multi = 0;
    let mut deepest = 0;
    for r in roots {
        r.walk(&mut Vec::new(), &mut |_, n| {
            deepest = deepest.max(n.level);
            if n.size() >= 2 {
                deepest_multi = deepest_multi.max(n.level);
            }
        });
    }
    if deepest_multi == 0 {
        deepest
    } else {
        deepest_multi
    }
}

pub fn validate_jaccard(
    roots: &[HierarchyNode],
    titles_by_page: &BTreeMap<String, String>,
    rng_seed: u64,
) -> JaccardReport {
    let level = group_level(roots);
    let mut groups: Vec<(Vec<String>, Vec<&str>)> = Vec::new();
    for r in roots {
        r.walk(&mut Vec::new(), &mut |path, n| {
            if n.level == level {
                groups.push((
                    path.iter().map(|s| s.to_string()).collect(),
                    n.member_page_ids.iter().map(String::as_str).collect(),
                ));
            }
        });
    }

    let all_pages: Vec<&str> = groups.iter().flat_map(|(_, m)| m.iter().copied()).collect();
    let sets: HashMap<&str, BTreeSet<String>> = all_pages
        .iter()
        .map(|p| (*p, titles_by_page.get(*p).map(|t| token_set(t)).unwrap_or_default()))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut per_group = Vec::with_capacity(groups.len());
    for (path, members) in &groups {
        if members.len() < 2 {
            per_group.push(GroupCheck {
                path: path.clone(),
                size: members.len(),
                within_mean: 0.0,
                cross_mean: 0.0,
                passed: true,
                vacuous: true,
            });
            continue;
        }
        let mut within = 0.0;
        let mut pairs = 0usize;
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                within += jaccard(&sets[members[i]], &sets[members[j]]);
                pairs += 1;
            }
        }
        let within_mean = within / pairs as f64;

        let outside: Vec<&str> = all_pages
            .iter()
            .copied()
            .filter(|p| !members.contains(p))
            .collect();
        let available = members.len() * outside.len();
        let cross_mean = if available == 0 {
            0.0
        } else {
            let picks = index::sample(&mut rng, available, available.min(CROSS_SAMPLES));
            let mut sum = 0.0;
            for k in picks.iter() {
                let (a, b) = (members[k / outside.len()], outside[k % outside.len()]);
                sum += jaccard(&sets[a], &sets[b]);
            }
            sum / picks.len() as f64
        };
        per_group.push(GroupCheck {
            path: path.clone(),
            size: members.len(),
            within_mean,
            cross_mean,
            passed: within_mean >= (2.0 * cross_mean).max(PASS_FLOOR),
            vacuous: false,
        });
    }
    let passed = per_group.iter().filter(|g| g.passed).count();
    JaccardReport {
        group_level: level,
        pass_rate: if per_group.is_empty() {
            0.0
        } else {
            passed as f64 / per_group.len() as f64
        },
        per_group,
    }
}
