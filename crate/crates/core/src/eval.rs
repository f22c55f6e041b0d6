//! Retrieval and end-to-end metrics, answer matching and head-to-head counts.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::CorpusManifest;
use crate::error::{Error, Result};
use crate::retrieval::tokenize;
use crate::text::is_stopword;

/// Relative tolerance for numeric answers.
pub const NUMERIC_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalMetrics {
    pub page_r_at: BTreeMap<usize, f64>,
    pub mrr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub img_r_at: Option<BTreeMap<usize, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_r_at: Option<BTreeMap<usize, f64>>,
    pub query_count: usize,
}

fn first_hit(ranked: &[String], gold: &HashSet<&str>) -> Option<usize> {
    ranked.iter().position(|p| gold.contains(p.as_str()))
}

fn rate(hits: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        hits as f64 / n as f64
    }
}

/// `results` maps query ids to ranked page ids. MRR uses the full ranked list.
pub fn retrieval_metrics(
    results: &BTreeMap<String, Vec<String>>,
    manifest: &CorpusManifest,
    ks: &[usize],
) -> Result<RetrievalMetrics> {
    let pages = manifest.page_index();
    let mut page_hits = vec![0usize; ks.len()];
    let mut img_hits = vec![0usize; ks.len()];
    let mut unit_hits = vec![0usize; ks.len()];
    let (mut img_n, mut unit_n) = (0usize, 0usize);
    let mut rr_sum = 0.0;

    for (qid, ranked) in results {
        let q = manifest
            .query(qid)
            .ok_or_else(|| Error::invalid(format!("unknown query_id {qid:?}")))?;
        let gold: HashSet<&str> = q.gold_page_ids.iter().map(String::as_str).collect();
        let rank = first_hit(ranked, &gold);
        if let Some(r) = rank {
            rr_sum += 1.0 / (r + 1) as f64;
        }
        for (i, &k) in ks.iter().enumerate() {
            if rank.is_some_and(|r| r < k) {
                page_hits[i] += 1;
            }
        }

        let gold_imgs: HashSet<&str> = q
            .gold_page_ids
            .iter()
            .filter_map(|p| pages.get(p.as_str()).and_then(|r| r.image_ref.as_deref()))
            .collect();
        if !gold_imgs.is_empty() {
            img_n += 1;
            let img_rank = ranked.iter().position(|p| {
                pages
                    .get(p.as_str())
                    .and_then(|r| r.image_ref.as_deref())
                    .is_some_and(|i| gold_imgs.contains(i))
            });
            for (i, &k) in ks.iter().enumerate() {
                if img_rank.is_some_and(|r| r < k) {
                    img_hits[i] += 1;
                }
            }
        }

        if let Some(unit) = q.gold_unit_id.as_deref() {
            unit_n += 1;
            let unit_rank = ranked.iter().position(|p| {
                pages.get(p.as_str()).and_then(|r| r.unit_id.as_deref()) == Some(unit)
            });
            for (i, &k) in ks.iter().enumerate() {
                if unit_rank.is_some_and(|r| r < k) {
                    unit_hits[i] += 1;
                }
            }
        }
    }

    let n = results.len();
    let table = |hits: &[usize], denom: usize| -> BTreeMap<usize, f64> {
        ks.iter().zip(hits).map(|(&k, &h)| (k, rate(h, denom))).collect()
    };
    Ok(RetrievalMetrics {
        page_r_at: table(&page_hits, n),
        mrr: if n == 0 { 0.0 } else { rr_sum / n as f64 },
        img_r_at: (img_n > 0).then(|| table(&img_hits, img_n)),
        unit_r_at: (unit_n > 0).then(|| table(&unit_hits, unit_n)),
        query_count: n,
    })
}

static NUMBER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"-?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?|-?\.\d+").unwrap());

/// First numeric literal not glued to a preceding letter ("B3" is a token, not a number).
pub fn first_number(s: &str) -> Option<f64> {
    NUMBER.find_iter(s).find_map(|m| {
        let glued = s[..m.start()].chars().next_back().is_some_and(char::is_alphabetic);
        if glued {
            return None;
        }
        m.as_str().replace(',', "").parse().ok()
    })
}

fn keywords(s: &str) -> Vec<String> {
    tokenize(s).into_iter().filter(|t| !is_stopword(t)).collect()
}

/// Numeric comparison when both sides carry a number, keyword containment otherwise.
pub fn match_answer(predicted: &str, gold: &str) -> bool {
    if let (Some(p), Some(g)) = (first_number(predicted), first_number(gold)) {
        return if g == 0.0 {
            p == 0.0
        } else {
            (p - g).abs() <= NUMERIC_TOLERANCE * g.abs()
        };
    }
    let gold_kw = keywords(gold);
    if gold_kw.is_empty() {
        let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        return norm(predicted) == norm(gold);
    }
    let pred: HashSet<String> = keywords(predicted).into_iter().collect();
    gold_kw.iter().all(|t| pred.contains(t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeAccuracy {
    pub count: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaMetrics {
    pub accuracy: f64,
    pub by_type: BTreeMap<String, TypeAccuracy>,
    /// Accuracy over queries whose top-k retrieval contained a gold page.
    pub conversion_rate: f64,
    pub hit_count: usize,
    pub query_count: usize,
}

/// Per-query correctness of `answers` against the manifest gold answers.
pub fn correctness(
    answers: &BTreeMap<String, String>,
    manifest: &CorpusManifest,
) -> Result<BTreeMap<String, bool>> {
    answers
        .iter()
        .map(|(qid, a)| {
            let q = manifest
                .query(qid)
                .ok_or_else(|| Error::invalid(format!("unknown query_id {qid:?}")))?;
            Ok((qid.clone(), match_answer(a, &q.gold_answer)))
        })
        .collect()
}

pub fn qa_metrics(
    answers: &BTreeMap<String, String>,
    retrieval: &BTreeMap<String, Vec<String>>,
    manifest: &CorpusManifest,
    k: usize,
) -> Result<QaMetrics> {
    let correct = correctness(answers, manifest)?;
    let mut by_type: BTreeMap<String, TypeAccuracy> = BTreeMap::new();
    let (mut n_correct, mut hits, mut hit_correct) = (0, 0, 0);
    for (qid, &ok) in &correct {
        let q = manifest.query(qid).expect("checked by correctness");
        let e = by_type.entry(q.question_type.as_str().to_string()).or_insert(TypeAccuracy {
            count: 0,
            correct: 0,
            accuracy: 0.0,
        });
        e.count += 1;
        if ok {
            e.correct += 1;
            n_correct += 1;
        }
        let gold: HashSet<&str> = q.gold_page_ids.iter().map(String::as_str).collect();
        let hit = retrieval
            .get(qid)
            .and_then(|r| first_hit(r, &gold))
            .is_some_and(|r| r < k);
        if hit {
            hits += 1;
            if ok {
                hit_correct += 1;
            }
        }
    }
    for e in by_type.values_mut() {
        e.accuracy = rate(e.correct, e.count);
    }
    Ok(QaMetrics {
        accuracy: rate(n_correct, correct.len()),
        by_type,
        conversion_rate: rate(hit_correct, hits),
        hit_count: hits,
        query_count: correct.len(),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadToHead {
    pub both_correct: usize,
    pub only_a: usize,
    pub only_b: usize,
    pub both_wrong: usize,
}

impl HeadToHead {
    pub fn total(&self) -> usize {
        self.both_correct + self.only_a + self.only_b + self.both_wrong
    }
}

pub fn head_to_head(a: &BTreeMap<String, bool>, b: &BTreeMap<String, bool>) -> Result<HeadToHead> {
    let ka: BTreeSet<&String> = a.keys().collect();
    let kb: BTreeSet<&String> = b.keys().collect();
    if ka != kb {
        let diff: Vec<_> = ka.symmetric_difference(&kb).take(5).collect();
        return Err(Error::invalid(format!("head-to-head key sets differ, e.g. {diff:?}")));
    }
    let mut h = HeadToHead::default();
    for (qid, &x) in a {
        match (x, b[qid]) {
            (true, true) => h.both_correct += 1,
            (true, false) => h.only_a += 1,
            (false, true) => h.only_b += 1,
            (false, false) => h.both_wrong += 1,
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub retrieval: RetrievalMetrics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qa: Option<QaMetrics>,
    pub vlm_calls: u64,
    /// Preprocessing calls: page descriptions for PI, zero for DVI.
    pub index_calls: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub corpus_id: String,
    pub k: usize,
    pub methods: Vec<MethodReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head_to_head: Option<HeadToHead>,
}

impl EvalReport {
    pub fn summary(&self) -> String {
        let mut s = format!("corpus {} (k={})\n", self.corpus_id, self.k);
        for m in &self.methods {
            let pr = m.retrieval.page_r_at.get(&self.k).copied().unwrap_or(0.0);
            let _ = write!(
                s,
                "  {:<4} PageR@{} {:>6.1}%  MRR {:.4}  queries {}",
                m.method,
                self.k,
                100.0 * pr,
                m.retrieval.mrr,
                m.retrieval.query_count
            );
            if let Some(qa) = &m.qa {
                let _ = write!(
                    s,
                    "  accuracy {:.1}%  conversion {:.1}%",
                    100.0 * qa.accuracy,
                    100.0 * qa.conversion_rate
                );
            }
            let _ = writeln!(s, "  vlm calls {} (index {})", m.vlm_calls, m.index_calls);
        }
        if let Some(h) = &self.head_to_head {
            let _ = writeln!(
                s,
                "  head-to-head: both {} / only {} {} / only {} {} / neither {}",
                h.both_correct,
                self.methods.first().map_or("a", |m| m.method.as_str()),
                h.only_a,
                self.methods.get(1).map_or("b", |m| m.method.as_str()),
                h.only_b,
                h.both_wrong
            );
        }
        s
    }
}
