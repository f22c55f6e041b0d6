use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{tokenize, PostingsIndex};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
    pub top_k: usize,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params {
            k1: 1.5,
            b: 0.75,
            top_k: 3,
        }
    }
}

impl Bm25Params {
    pub fn with_top_k(top_k: usize) -> Self {
        Bm25Params {
            top_k,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k1.is_nan() || self.k1 < 0.0 || !(0.0..=1.0).contains(&self.b) || self.top_k == 0 {
            return Err(Error::invalid(format!(
                "bm25 parameters out of range: k1={} b={} top_k={}",
                self.k1, self.b, self.top_k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub rank: usize,
    pub page_id: String,
    pub score: f64,
}

/// Non-negative BM25 idf: `ln(1 + (N - df + 0.5) / (df + 0.5))`.
pub fn idf(n_docs: usize, df: usize) -> f64 {
    let (n, df) = (n_docs as f64, df as f64);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

/// Scores every document with at least one query term; repeated query terms
/// count once per occurrence.
pub fn score_all(query: &str, index: &PostingsIndex, params: &Bm25Params) -> HashMap<u32, f64> {
    let mut scores: HashMap<u32, f64> = HashMap::new();
    let n = index.doc_count();
    if n == 0 {
        return scores;
    }
    let avgdl = if index.avg_doc_length > 0.0 { index.avg_doc_length } else { 1.0 };
    for term in tokenize(query) {
        let Some(list) = index.postings.get(&term) else {
            continue;
        };
        let w = idf(n, list.len());
        for p in list {
            let tf = p.tf as f64;
            let dl = index.doc_lengths[p.doc as usize] as f64;
            let norm = tf + params.k1 * (1.0 - params.b + params.b * dl / avgdl);
            *scores.entry(p.doc).or_default() += w * tf * (params.k1 + 1.0) / norm;
        }
    }
    scores
}

/// Top-k pages by BM25; ties go to the lower page number, zero scores are dropped.
pub fn search(query: &str, index: &PostingsIndex, params: &Bm25Params) -> Vec<SearchHit> {
    let mut scored: Vec<(u32, f64)> = score_all(query, index, params)
        .into_iter()
        .filter(|(_, s)| *s > 0.0)
        .collect();
    scored.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| index.page_nos[a.0 as usize].cmp(&index.page_nos[b.0 as usize]))
            .then_with(|| a.0.cmp(&b.0))
    });
    scored
        .into_iter()
        .take(params.top_k)
        .enumerate()
        .map(|(i, (doc, score))| SearchHit {
            rank: i + 1,
            page_id: index.doc_ids[doc as usize].clone(),
            score,
        })
        .collect()
}
