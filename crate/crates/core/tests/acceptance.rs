//! Acceptance criteria AC-1..AC-10, one PASS/FAIL line each.
//! Runs as a plain binary (`harness = false`) and exits non-zero on any failure.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dvi_core::corpus::{
    generate_synthetic_catalog, generate_synthetic_corpus, CatalogSpec, CorpusManifest, SynthSpec, TextMode,
};
use dvi_core::eval::{head_to_head, qa_metrics, retrieval_metrics, HeadToHead};
use dvi_core::hdnc::run_hdnc;
use dvi_core::indexer::{build_index, BuildOptions, FusionMode, FusionPolicy, IndexBundle, IndexMode};
use dvi_core::pipeline::{
    build_pi_index, pi_search, run_queries, CountingEmbedder, CountingVlm, DescriberMode, Embedder,
    MockDescriber, MockEmbedder, MockRenderer, MockVlm, MockVlmMode, VlmClient,
};
use dvi_core::retrieval::{build_postings, score_all, search, Bm25Params, PostingsIndex, SearchHit};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

// ---------------------------------------------------------------- helpers

fn bundle(m: &CorpusManifest, mode: IndexMode, fusion: FusionMode, exclude_toc_page: bool) -> IndexBundle {
    let hierarchy = match mode {
        IndexMode::Hdnc => Some(run_hdnc(&m.drawings).expect("hdnc").0),
        _ => None,
    };
    build_index(m, hierarchy.as_ref(), FusionPolicy::new(fusion), mode, BuildOptions { exclude_toc_page })
        .expect("index")
}

fn page_ids(hits: &[SearchHit]) -> Vec<String> {
    hits.iter().map(|h| h.page_id.clone()).collect()
}

fn ranked_bm25(m: &CorpusManifest, b: &IndexBundle) -> BTreeMap<String, Vec<String>> {
    let idx = build_postings(b);
    let params = Bm25Params::default();
    m.queries
        .iter()
        .map(|q| (q.query_id.clone(), page_ids(&search(&q.question, &idx, &params))))
        .collect()
}

fn page_r3(m: &CorpusManifest, ranked: &BTreeMap<String, Vec<String>>) -> f64 {
    retrieval_metrics(ranked, m, &[3]).expect("metrics").page_r_at[&3]
}

fn pct(x: f64) -> String {
    format!("{:.1}%", 100.0 * x)
}

// ---------------------------------------------------------------- AC-1

/// Reference tokenizer written from the rule: ASCII alphanumeric runs, then
/// each hyphen-joined run of two or more segments once more as a whole.
fn ref_tokens(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut out = Vec::new();
    for chunk in lower.split(|c: char| !(c.is_ascii_alphanumeric() || c == '-')) {
        let segs: Vec<&str> = chunk.split('-').filter(|s| !s.is_empty()).collect();
        out.extend(segs.iter().map(|s| s.to_string()));
        if segs.len() >= 2 {
            out.push(segs.join("-"));
        }
    }
    out
}

fn brute_bm25(docs: &[Vec<String>], query: &[String]) -> Vec<f64> {
    let (k1, b) = (1.5, 0.75);
    let n = docs.len() as f64;
    let avgdl = docs.iter().map(|t| t.len() as f64).sum::<f64>() / n;
    let avgdl = if avgdl > 0.0 { avgdl } else { 1.0 };
    let mut scores = vec![0.0; docs.len()];
    for q in query {
        let df = docs.iter().filter(|t| t.contains(q)).count() as f64;
        if df == 0.0 {
            continue;
        }
        let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
        for (i, t) in docs.iter().enumerate() {
            let tf = t.iter().filter(|x| *x == q).count() as f64;
            if tf > 0.0 {
                let dl = t.len() as f64;
                scores[i] += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl));
            }
        }
    }
    scores
}

fn ac1() -> Outcome {
    let words = [
        "pier", "deck", "abutment", "elevation", "plan", "section", "rebar", "grade", "bearing", "cap",
        "PRJ-0101", "PRJ-0102", "Bridge-A", "Bridge-B", "a", "b", "3", "500", "Pier-3", "x-y-z",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst, mut rank_mismatch, mut queries) = (0.0f64, 0, 0);
    for _ in 0..50 {
        let n_docs = rng.gen_range(1..=100);
        let docs: Vec<String> = (0..n_docs)
            .map(|_| {
                let len = rng.gen_range(0..40);
                (0..len).map(|_| *words.choose(&mut rng).unwrap()).collect::<Vec<_>>().join(" ")
            })
            .collect();
        let ids: Vec<String> = (0..n_docs).map(|i| format!("d{i}")).collect();
        let idx = PostingsIndex::from_texts(
            ids.iter().zip(&docs).enumerate().map(|(i, (id, d))| (id.as_str(), i as u32 + 1, d.clone())),
        );
        let ref_docs: Vec<Vec<String>> = docs.iter().map(|d| ref_tokens(d)).collect();
        for _ in 0..5 {
            queries += 1;
            let qlen = rng.gen_range(1..=5);
            let query = (0..qlen).map(|_| *words.choose(&mut rng).unwrap()).collect::<Vec<_>>().join(" ");
            let want = brute_bm25(&ref_docs, &ref_tokens(&query));
            let got = score_all(&query, &idx, &Bm25Params::default());
            for (i, w) in want.iter().enumerate() {
                let g = got.get(&(i as u32)).copied().unwrap_or(0.0);
                worst = worst.max((g - w).abs());
            }
            let mut order: Vec<usize> = (0..n_docs).filter(|&i| want[i] > 0.0).collect();
            order.sort_by(|&a, &b| want[b].total_cmp(&want[a]).then(a.cmp(&b)));
            order.truncate(3);
            let got_order: Vec<usize> = search(&query, &idx, &Bm25Params::default())
                .iter()
                .map(|h| h.page_id[1..].parse().unwrap())
                .collect();
            let same = got_order.len() == order.len()
                && got_order.iter().zip(&order).all(|(&g, &w)| g == w || (want[g] - want[w]).abs() < 1e-9);
            if !same {
                rank_mismatch += 1;
            }
        }
    }
    outcome(
        worst <= 1e-9 && rank_mismatch == 0,
        format!("max |engine - reference| = {worst:.1e} over {queries} queries on 50 corpora, {rank_mismatch} ranking mismatches"),
    )
}

// ---------------------------------------------------------------- AC-2

fn ac2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    for run in 0..20u64 {
        let depth = rng.gen_range(1..=3);
        let widths: Vec<usize> = (0..depth).map(|_| rng.gen_range(1..=3)).collect();
        let branches: Vec<usize> = widths
            .iter()
            .map(|&w| if w == 1 { rng.gen_range(3..=9) } else { rng.gen_range(3..=12) })
            .collect();
        let mut spec = SynthSpec::new("PRJ-ST-", &widths, &branches);
        spec.query_count = 0;
        let m = generate_synthetic_corpus(&spec, run).expect("generate");
        let (h, jac) = run_hdnc(&m.drawings).expect("hdnc");

        // generating partition: cut each suffix by the generating widths
        let mut truth: BTreeMap<Vec<String>, BTreeSet<String>> = BTreeMap::new();
        for d in &m.drawings {
            let digits = &d.drawing_number[spec.prefix.len()..];
            let mut at = 0;
            let key: Vec<String> = widths
                .iter()
                .map(|w| {
                    at += w;
                    digits[at - w..at].to_string()
                })
                .collect();
            truth.entry(key).or_default().insert(d.page_id.clone());
        }
        let got: BTreeMap<Vec<String>, BTreeSet<String>> = h
            .leaf_partition()
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().collect()))
            .collect();
        if h.strategy.widths != widths || got != truth || jac.pass_rate != 1.0 {
            failures.push(format!(
                "run {run}: widths {widths:?} branches {branches:?} -> {:?}, partition {}, pass_rate {}",
                h.strategy.widths,
                if got == truth { "ok" } else { "differs" },
                jac.pass_rate
            ));
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "20/20 corpora: widths, leaf partition and Jaccard pass_rate 1.0 recovered".to_string()
        } else {
            failures.join("; ")
        },
    )
}

// ---------------------------------------------------------------- AC-3

fn ac3() -> Outcome {
    let mut spec = SynthSpec::new("PROJID-GRP-PKG-ST-", &[2, 2, 2], &[10, 10, 10]);
    spec.query_count = 0;
    let m = generate_synthetic_corpus(&spec, 3).expect("generate");
    let start = Instant::now();
    let (h, _) = run_hdnc(&m.drawings).expect("hdnc");
    let secs = start.elapsed().as_secs_f64();
    let ok = m.drawings.len() == 1000 && h.scheme.suffix_len == 6 && secs < 1.0;
    outcome(ok, format!("{} drawings, suffix_len {}, {secs:.3}s", m.drawings.len(), h.scheme.suffix_len))
}

// ---------------------------------------------------------------- AC-4

fn bridge_spec() -> SynthSpec {
    let mut spec = SynthSpec::new("PROJID-GRP-PKG-ST-", &[2, 2, 2], &[5, 5, 8]);
    spec.query_count = 80;
    spec.title_dropout = 0.4;
    spec.query_context = 1.0;
    spec
}

/// Queries that name only part of the group path; 83% quote the drawing
/// number, which only the page text carries.
fn loose_query_spec() -> SynthSpec {
    let mut spec = bridge_spec();
    spec.query_context = 0.5;
    spec
}

fn ac4() -> Outcome {
    let m = generate_synthetic_corpus(&bridge_spec(), 11).expect("generate");
    let with_labels = bundle(&m, IndexMode::Hdnc, FusionMode::Never, false);
    let mut title_only = with_labels.clone();
    for d in &mut title_only.documents {
        d.labels_field.clear();
    }
    let a = page_r3(&m, &ranked_bm25(&m, &with_labels));
    let b = page_r3(&m, &ranked_bm25(&m, &title_only));
    outcome(
        m.drawings.len() == 200 && a >= b + 0.10,
        format!(
            "{} drawings, {} queries: PageR@3 labels {} vs title-only {} ({:+.1}pp)",
            m.drawings.len(),
            m.queries.len(),
            pct(a),
            pct(b),
            100.0 * (a - b)
        ),
    )
}

// ---------------------------------------------------------------- AC-5

fn ac5() -> Outcome {
    let mut clean_spec = loose_query_spec();
    clean_spec.query_count = 200;
    let clean = generate_synthetic_corpus(&clean_spec, 5).expect("generate");
    let c_fused = page_r3(&clean, &ranked_bm25(&clean, &bundle(&clean, IndexMode::Hdnc, FusionMode::Always, false)));
    let c_struct = page_r3(&clean, &ranked_bm25(&clean, &bundle(&clean, IndexMode::Hdnc, FusionMode::Never, false)));

    let mut garbled_spec = clean_spec.clone();
    garbled_spec.text_mode = TextMode::Garbled(0.4);
    let garbled = generate_synthetic_corpus(&garbled_spec, 5).expect("generate");
    let g_fused = page_r3(&garbled, &ranked_bm25(&garbled, &bundle(&garbled, IndexMode::Hdnc, FusionMode::Always, false)));
    let g_struct = page_r3(&garbled, &ranked_bm25(&garbled, &bundle(&garbled, IndexMode::Hdnc, FusionMode::Never, false)));

    outcome(
        c_fused >= c_struct + 0.10 && g_struct >= g_fused + 0.10,
        format!(
            "clean: fused {} vs structure-only {} ({:+.1}pp); garbled(0.4): fused {} vs structure-only {} ({:+.1}pp)",
            pct(c_fused),
            pct(c_struct),
            100.0 * (c_fused - c_struct),
            pct(g_fused),
            pct(g_struct),
            100.0 * (g_fused - g_struct)
        ),
    )
}

// ---------------------------------------------------------------- AC-6

fn steel_spec(text_mode: TextMode) -> CatalogSpec {
    let mut spec = CatalogSpec::new(26, [2, 5]);
    spec.text_mode = text_mode;
    spec.query_count = 186;
    spec
}

fn ac6() -> Outcome {
    let m = generate_synthetic_catalog(&steel_spec(TextMode::Garbled(0.4)), 6).expect("generate");
    let toc_id = m.pages[0].page_id.clone();
    let with_toc = ranked_bm25(&m, &bundle(&m, IndexMode::TocOnly, FusionMode::Always, false));
    let without = ranked_bm25(&m, &bundle(&m, IndexMode::TocOnly, FusionMode::Always, true));
    let crowded = with_toc.values().filter(|r| r.iter().take(3).any(|p| *p == toc_id)).count();
    let share = crowded as f64 / m.queries.len() as f64;
    let (a, b) = (page_r3(&m, &with_toc), page_r3(&m, &without));
    outcome(
        share >= 0.5 && b > a,
        format!(
            "TOC page in top-3 for {crowded}/{} queries ({}); PageR@3 {} -> {} with --exclude-toc-page",
            m.queries.len(),
            pct(share),
            pct(a),
            pct(b)
        ),
    )
}

// ---------------------------------------------------------------- AC-7

fn e2e(m: &CorpusManifest, b: &IndexBundle, vlm: &dyn VlmClient) -> (f64, f64) {
    let idx = build_postings(b);
    let params = Bm25Params::default();
    let results = run_queries(&m.queries, |q| Ok(search(q, &idx, &params)), &MockRenderer, Some(vlm), 4)
        .expect("run");
    let ranked: BTreeMap<String, Vec<String>> =
        results.iter().map(|r| (r.query_id.clone(), page_ids(&r.retrieved))).collect();
    let answers: BTreeMap<String, String> = results.iter().map(|r| (r.query_id.clone(), r.answer.clone())).collect();
    let qa = qa_metrics(&answers, &ranked, m, 3).expect("qa");
    (qa.accuracy, page_r3(m, &ranked))
}

fn ac7() -> Outcome {
    let mut spec = loose_query_spec();
    spec.query_count = 600;
    let m = generate_synthetic_corpus(&spec, 7).expect("generate");
    let b = bundle(&m, IndexMode::Hdnc, FusionMode::Adaptive, false);
    let oracle = MockVlm::new(MockVlmMode::Oracle, 7, &m).unwrap();
    let lossy = MockVlm::new(MockVlmMode::Lossy(0.93), 7, &m).unwrap();
    let (acc_o, pr) = e2e(&m, &b, &oracle);
    let (acc_l, _) = e2e(&m, &b, &lossy);
    let target = 0.93 * pr;
    outcome(
        acc_o == pr && (acc_l - target).abs() <= 0.04,
        format!(
            "{} queries, PageR@3 {}: oracle accuracy {}; lossy(0.93) accuracy {} (target {} +- 4pp)",
            m.queries.len(),
            pct(pr),
            pct(acc_o),
            pct(acc_l),
            pct(target)
        ),
    )
}

// ---------------------------------------------------------------- AC-8

fn ac8() -> Outcome {
    let mut spec = SynthSpec::new("PROJID-GRP-PKG-ST-", &[2, 2, 2], &[5, 9, 10]);
    spec.toc_page = false;
    let m = generate_synthetic_corpus(&spec, 8).expect("generate");
    let catalog = generate_synthetic_catalog(&steel_spec(TextMode::Clean), 8).expect("generate");

    let vlm = CountingVlm::new(MockVlm::new(MockVlmMode::Oracle, 0, &m).unwrap());
    let embedder = CountingEmbedder::new(MockEmbedder::new(0));
    for fusion in [FusionMode::Always, FusionMode::Never, FusionMode::Adaptive] {
        for mode in [IndexMode::Hdnc, IndexMode::FulltextOnly] {
            bundle(&m, mode, fusion, false);
        }
        bundle(&catalog, IndexMode::TocOnly, fusion, false);
        bundle(&catalog, IndexMode::TocOnly, fusion, true);
    }
    let dvi_calls = vlm.calls() + embedder.calls();

    let describer = CountingVlm::new(MockDescriber::new(DescriberMode::Blind, &m));
    let pi = build_pi_index(&m, &describer, &embedder).expect("pi");
    let ok = dvi_calls == 0 && m.pages.len() == 450 && describer.calls() == 450 && pi.entries.len() == 450;
    outcome(
        ok,
        format!(
            "DVI builds (9 configurations): {dvi_calls} VLM/embedder calls; PI build on {} pages: {} describer calls",
            m.pages.len(),
            describer.calls()
        ),
    )
}

// ---------------------------------------------------------------- AC-9

fn hand_fixture() -> (CorpusManifest, BTreeMap<String, Vec<String>>) {
    let mut m = CorpusManifest { corpus_id: "hand".into(), ..Default::default() };
    let raw = (1..=6)
        .map(|i| format!(r#"{{"kind":"page","page_id":"p{i}","page_no":{i},"text_source":"none"}}"#))
        .chain((1..=5).map(|i| {
            format!(
                r#"{{"kind":"query","query_id":"q{i}","question":"?","gold_page_ids":["p{i}"],"question_type":"other","gold_answer":"x"}}"#
            )
        }))
        .collect::<Vec<_>>()
        .join("\n");
    let parsed = dvi_core::corpus::parse_manifest(&raw, "hand").expect("fixture");
    m.pages = parsed.pages;
    m.queries = parsed.queries;
    // gold ranks 1, 2, 3, absent, 1
    let lists = [
        ["p1", "p6", "p2"],
        ["p6", "p2", "p1"],
        ["p6", "p5", "p3"],
        ["p6", "p5", "p1"],
        ["p5", "p6", "p1"],
    ];
    let ranked = lists
        .iter()
        .enumerate()
        .map(|(i, l)| (format!("q{}", i + 1), l.iter().map(|s| s.to_string()).collect()))
        .collect();
    (m, ranked)
}

fn ac9() -> Outcome {
    let (m, ranked) = hand_fixture();
    let r = retrieval_metrics(&ranked, &m, &[1, 2, 3]).expect("metrics");
    let expect_mrr = (1.0 + 0.5 + 1.0 / 3.0 + 0.0 + 1.0) / 5.0;
    let metrics_ok = (r.mrr - 0.5667).abs() <= 1e-4
        && (r.mrr - expect_mrr).abs() < 1e-12
        && r.page_r_at[&1] == 2.0 / 5.0
        && r.page_r_at[&2] == 3.0 / 5.0
        && r.page_r_at[&3] == 4.0 / 5.0;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = 0;
    for _ in 0..100 {
        let n = rng.gen_range(0..=100);
        let a: BTreeMap<String, bool> = (0..n).map(|i| (format!("q{i}"), rng.gen())).collect();
        let b: BTreeMap<String, bool> = (0..n).map(|i| (format!("q{i}"), rng.gen())).collect();
        let mut brute = HeadToHead::default();
        for k in a.keys() {
            let slot = match (a[k], b[k]) {
                (true, true) => &mut brute.both_correct,
                (true, false) => &mut brute.only_a,
                (false, true) => &mut brute.only_b,
                (false, false) => &mut brute.both_wrong,
            };
            *slot += 1;
        }
        match head_to_head(&a, &b) {
            Ok(h) if h == brute && h.total() == n => {}
            _ => bad += 1,
        }
    }
    outcome(
        metrics_ok && bad == 0,
        format!(
            "MRR {:.4}, PageR@1/2/3 {}/{}/{}; head-to-head mismatches {bad}/100",
            r.mrr, r.page_r_at[&1], r.page_r_at[&2], r.page_r_at[&3]
        ),
    )
}

// ---------------------------------------------------------------- AC-10

fn ac10() -> Outcome {
    let m = generate_synthetic_corpus(&bridge_spec(), 10).expect("generate");
    let dvi = page_r3(&m, &ranked_bm25(&m, &bundle(&m, IndexMode::Hdnc, FusionMode::Adaptive, false)));
    let embedder = MockEmbedder::new(10);
    let pi = build_pi_index(&m, &MockDescriber::new(DescriberMode::Homogenized, &m), &embedder).expect("pi");
    let e: &dyn Embedder = &embedder;
    let ranked: BTreeMap<String, Vec<String>> = m
        .queries
        .iter()
        .map(|q| (q.query_id.clone(), page_ids(&pi_search(&q.question, &pi, e, 3).unwrap())))
        .collect();
    let pi_r = page_r3(&m, &ranked);
    outcome(
        dvi >= pi_r + 0.20,
        format!("DVI PageR@3 {} vs PI (homogenized) {} ({:+.1}pp)", pct(dvi), pct(pi_r), 100.0 * (dvi - pi_r)),
    )
}

type Check = (&'static str, &'static str, fn() -> Outcome);

fn main() {
    let checks: [Check; 10] = [
        ("AC-1", "BM25 oracle equivalence", ac1),
        ("AC-2", "HDNC recovery", ac2),
        ("AC-3", "HDNC performance", ac3),
        ("AC-4", "index ablation direction", ac4),
        ("AC-5", "fusion sign flip", ac5),
        ("AC-6", "TOC crowding", ac6),
        ("AC-7", "conversion decomposition", ac7),
        ("AC-8", "zero preprocessing calls", ac8),
        ("AC-9", "metric oracles", ac9),
        ("AC-10", "DVI vs PI direction", ac10),
    ];
    let limits = [("AC-1", 5.0), ("AC-2", 10.0)];
    let mut failed = 0;
    for (id, name, check) in checks {
        let start = Instant::now();
        let mut o = check();
        let secs = start.elapsed().as_secs_f64();
        if let Some((_, limit)) = limits.iter().find(|(l, _)| *l == id) {
            if secs >= *limit {
                o.pass = false;
                o.detail.push_str(&format!(" (over {limit}s budget)"));
            }
        }
        if !o.pass {
            failed += 1;
        }
        println!("{id} {} {name}: {} [{secs:.2}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {}/{} passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
