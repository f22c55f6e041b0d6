use std::collections::HashMap;

use super::tokenize;
use crate::indexer::IndexBundle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

/// Inverted index over the flattened index documents.
#[derive(Debug, Clone, Default)]
pub struct PostingsIndex {
    pub postings: HashMap<String, Vec<Posting>>,
    pub doc_lengths: Vec<u32>,
    pub avg_doc_length: f64,
    pub doc_ids: Vec<String>,
    pub page_nos: Vec<u32>,
}

impl PostingsIndex {
    /// Builds from `(page_id, page_no, text)` triples; ordinals follow input order.
    pub fn from_texts<'a, I>(docs: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, u32, String)>,
    {
        let mut idx = PostingsIndex::default();
        for (ordinal, (page_id, page_no, text)) in docs.into_iter().enumerate() {
            let tokens = tokenize(&text);
            let mut tf: HashMap<String, u32> = HashMap::new();
            for t in &tokens {
                *tf.entry(t.clone()).or_default() += 1;
            }
            for (term, n) in tf {
                idx.postings.entry(term).or_default().push(Posting {
                    doc: ordinal as u32,
                    tf: n,
                });
            }
            idx.doc_lengths.push(tokens.len() as u32);
            idx.doc_ids.push(page_id.to_string());
            idx.page_nos.push(page_no);
        }
        let n = idx.doc_lengths.len();
        idx.avg_doc_length = if n == 0 {
            0.0
        } else {
            idx.doc_lengths.iter().map(|&l| l as f64).sum::<f64>() / n as f64
        };
        idx
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = (&str, usize)> {
        self.postings.iter().map(|(t, p)| (t.as_str(), p.len()))
    }
}

/// Postings over the searchable text of every document in the bundle.
pub fn build_postings(bundle: &IndexBundle) -> PostingsIndex {
    PostingsIndex::from_texts(
        bundle
            .documents
            .iter()
            .map(|d| (d.page_id.as_str(), d.page_no, d.searchable_text())),
    )
}
