//! Tokenization and Okapi BM25 page ranking.

mod bm25;
mod postings;
mod tokenizer;

pub use bm25::{idf, score_all, search, Bm25Params, SearchHit};
pub use postings::{build_postings, Posting, PostingsIndex};
pub use tokenizer::tokenize;

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent quadratic reference: recount tf/df from token lists.
    fn brute_scores(docs: &[&str], query: &str, k1: f64, b: f64) -> Vec<f64> {
        let toks: Vec<Vec<String>> = docs.iter().map(|d| tokenize(d)).collect();
        let n = docs.len() as f64;
        let avgdl = toks.iter().map(|t| t.len() as f64).sum::<f64>() / n;
        toks.iter()
            .map(|d| {
                let mut s = 0.0;
                for q in tokenize(query) {
                    let df = toks.iter().filter(|t| t.contains(&q)).count() as f64;
                    if df == 0.0 {
                        continue;
                    }
                    let tf = d.iter().filter(|t| **t == q).count() as f64;
                    let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
                    s += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * d.len() as f64 / avgdl));
                }
                s
            })
            .collect()
    }

    fn index_of(docs: &[&str]) -> PostingsIndex {
        PostingsIndex::from_texts(
            docs.iter()
                .enumerate()
                .map(|(i, d)| (DOC_IDS[i], (i + 1) as u32, d.to_string())),
        )
    }

    const DOC_IDS: [&str; 5] = ["d1", "d2", "d3", "d4", "d5"];

    const FIVE: [&str; 5] = [
        "Bridge-A Pier-3 Dimension Details pier details",
        "Bridge-A General Arrangement",
        "Bridge-B Pier-1 Reinforcement Details",
        "Deck Joint Details Bridge-C",
        "Post Tensioning Layout Bridge-A pier",
    ];

    #[test]
    fn five_doc_fixture_matches_reference() {
        let idx = index_of(&FIVE);
        let p = Bm25Params::default();
        let expect = brute_scores(&FIVE, "pier details", p.k1, p.b);
        let got = score_all("pier details", &idx, &p);
        for (i, e) in expect.iter().enumerate() {
            let g = got.get(&(i as u32)).copied().unwrap_or(0.0);
            assert!((g - e).abs() < 1e-9, "doc {i}: {g} vs {e}");
        }
        let hits = search("pier details", &idx, &Bm25Params::with_top_k(5));
        assert_eq!(hits[0].page_id, "d1");
        assert!(hits.windows(2).all(|w| w[0].score >= w[1].score));
        assert_eq!(hits.iter().map(|h| h.rank).collect::<Vec<_>>(), (1..=hits.len()).collect::<Vec<_>>());
    }

    #[test]
    fn shared_term_document_frequency() {
        let idx = index_of(&["pier a", "pier b", "pier c"]);
        assert_eq!(idx.doc_freq("pier"), 3);
        assert_eq!(idx.doc_freq("a"), 1);
    }

    #[test]
    fn postings_match_brute_counts() {
        let idx = index_of(&FIVE);
        for (term, df) in idx.vocabulary() {
            let brute = FIVE.iter().filter(|d| tokenize(d).iter().any(|t| t == term)).count();
            assert_eq!(df, brute, "{term}");
            for p in &idx.postings[term] {
                let tf = tokenize(FIVE[p.doc as usize]).iter().filter(|t| *t == term).count();
                assert_eq!(p.tf as usize, tf);
            }
        }
        let mean = FIVE.iter().map(|d| tokenize(d).len() as f64).sum::<f64>() / 5.0;
        assert!((idx.avg_doc_length - mean).abs() < 1e-12);
    }

    #[test]
    fn unique_identifier_ranks_first() {
        let docs = ["PRJ-010101 deck", "PRJ-010102 deck", "PRJ-010103 deck"];
        let idx = index_of(&docs);
        let hits = search("deck on PRJ-010102", &idx, &Bm25Params::default());
        assert_eq!(hits[0].page_id, "d2");
    }

    #[test]
    fn no_overlap_and_empty_query() {
        let idx = index_of(&FIVE);
        assert!(search("zebra", &idx, &Bm25Params::default()).is_empty());
        assert!(search("", &idx, &Bm25Params::default()).is_empty());
    }

    #[test]
    fn ties_break_by_page_number() {
        let idx = index_of(&["pier", "pier", "pier"]);
        let hits = search("pier", &idx, &Bm25Params::with_top_k(2));
        assert_eq!(hits.iter().map(|h| h.page_id.as_str()).collect::<Vec<_>>(), ["d1", "d2"]);
    }

    #[test]
    fn params_validation() {
        assert!(Bm25Params::default().validate().is_ok());
        assert!(Bm25Params { b: 1.5, ..Default::default() }.validate().is_err());
        assert!(Bm25Params { k1: -1.0, ..Default::default() }.validate().is_err());
        assert!(Bm25Params::with_top_k(0).validate().is_err());
    }
}
