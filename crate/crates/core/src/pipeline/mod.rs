//! Query answering: retrieve, render, ask the VLM. Also the pre-ingestion
//! baseline that describes and embeds every page up front.

mod pi;
mod vlm;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::QueryRecord;
use crate::error::{Error, Result};
use crate::retrieval::{search, Bm25Params, PostingsIndex, SearchHit};

pub use pi::{
    build_pi_index, cosine, pi_search, pi_search_vector, CountingEmbedder, DescriberMode, Embedder,
    MockDescriber, MockEmbedder, PiEntry, PiIndex, DESCRIBE_PROMPT, MOCK_EMBED_DIM,
};
pub use vlm::{
    CommandVlm, CountingVlm, HttpVlm, MockRenderer, MockVlm, MockVlmMode, Renderer, VlmClient,
    VlmRequest, VlmResponse, VlmSelector, ENV_VLM_CMD, ENV_VLM_URL, WRONG_MARKER,
};

pub const DEFAULT_MAX_INFLIGHT: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerResult {
    pub query_id: String,
    pub retrieved: Vec<SearchHit>,
    pub answer: String,
    pub vlm_called: bool,
    pub latency_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Renders the hit pages and asks the VLM once. Failures land in `error`;
/// the hits are kept either way.
pub fn answer_with_hits(
    query_id: &str,
    question: &str,
    hits: Vec<SearchHit>,
    renderer: &dyn Renderer,
    vlm: &dyn VlmClient,
) -> AnswerResult {
    let start = Instant::now();
    let mut res = AnswerResult {
        query_id: query_id.to_string(),
        retrieved: hits,
        answer: String::new(),
        vlm_called: false,
        latency_ms: 0,
        error: None,
    };
    if res.retrieved.is_empty() {
        return res;
    }
    let page_ids: Vec<String> = res.retrieved.iter().map(|h| h.page_id.clone()).collect();
    let outcome = page_ids
        .iter()
        .map(|p| renderer.render(p))
        .collect::<Result<Vec<_>>>()
        .and_then(|image_refs| {
            res.vlm_called = true;
            vlm.answer(&VlmRequest {
                question: question.to_string(),
                image_refs,
                page_ids,
            })
        });
    match outcome {
        Ok(r) => res.answer = r.answer,
        Err(e) => res.error = Some(e.to_string()),
    }
    res.latency_ms = start.elapsed().as_millis() as u64;
    res
}

pub fn answer_query(
    query_id: &str,
    question: &str,
    postings: &PostingsIndex,
    params: &Bm25Params,
    renderer: &dyn Renderer,
    vlm: &dyn VlmClient,
) -> AnswerResult {
    let hits = search(question, postings, params);
    answer_with_hits(query_id, question, hits, renderer, vlm)
}

/// Runs every query through `retrieve` and, when a VLM is given, answers it.
/// At most `max_inflight` queries (and so VLM calls) run at once. Output
/// order follows `queries`.
pub fn run_queries<F>(
    queries: &[QueryRecord],
    retrieve: F,
    renderer: &dyn Renderer,
    vlm: Option<&dyn VlmClient>,
    max_inflight: usize,
) -> Result<Vec<AnswerResult>>
where
    F: Fn(&str) -> Result<Vec<SearchHit>> + Sync,
{
    if max_inflight == 0 {
        return Err(Error::invalid("max_inflight must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(max_inflight)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| {
        queries
            .par_iter()
            .map(|q| {
                let hits = retrieve(&q.question)?;
                Ok(match vlm {
                    Some(v) => answer_with_hits(&q.query_id, &q.question, hits, renderer, v),
                    None => AnswerResult {
                        query_id: q.query_id.clone(),
                        retrieved: hits,
                        answer: String::new(),
                        vlm_called: false,
                        latency_ms: 0,
                        error: None,
                    },
                })
            })
            .collect()
    })
}
