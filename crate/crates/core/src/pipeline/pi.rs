use std::collections::HashMap;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::vlm::{fnv1a, VlmClient, VlmRequest, VlmResponse};
use crate::corpus::{CorpusManifest, PageRecord};
use crate::error::{Error, Result};
use crate::retrieval::{tokenize, SearchHit};
use crate::text::title_tokens;

pub const MOCK_EMBED_DIM: usize = 256;
pub const DESCRIBE_PROMPT: &str = "Describe this page.";
const BLIND_TEXT_TOKENS: usize = 50;

pub trait Embedder: Send + Sync {
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Vec<f64>>;
}

/// Sum of per-token pseudo-random +-1 vectors, L2-normalized. Empty text
/// embeds to the zero vector.
#[derive(Debug, Clone, Copy)]
pub struct MockEmbedder {
    pub dim: usize,
    pub seed: u64,
}

impl MockEmbedder {
    pub fn new(seed: u64) -> Self {
        MockEmbedder { dim: MOCK_EMBED_DIM, seed }
    }
}

impl Embedder for MockEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        let mut counts: HashMap<String, f64> = HashMap::new();
        for t in tokenize(text) {
            *counts.entry(t).or_default() += 1.0;
        }
        let mut v = vec![0.0; self.dim];
        for (tok, n) in counts {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(fnv1a(tok.as_bytes()));
            for x in v.iter_mut() {
                *x += if rng.gen::<bool>() { n } else { -n };
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        Ok(v)
    }
}

#[derive(Debug, Default)]
pub struct CountingEmbedder<E> {
    pub inner: E,
    calls: AtomicU64,
}

impl<E> CountingEmbedder<E> {
    pub fn new(inner: E) -> Self {
        CountingEmbedder { inner, calls: AtomicU64::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<E: Embedder> Embedder for CountingEmbedder<E> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.embed(text)
    }
}

impl Embedder for Box<dyn Embedder> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        (**self).embed(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriberMode {
    /// Title plus the first 50 text tokens.
    Blind,
    /// A long shared boilerplate plus the most common word of the page title,
    /// so every page looks alike.
    Homogenized,
}

impl FromStr for DescriberMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blind" | "mock:blind" => Ok(DescriberMode::Blind),
            "homogenized" | "mock:homogenized" => Ok(DescriberMode::Homogenized),
            _ => Err(Error::invalid(format!("unknown describer {s:?}"))),
        }
    }
}

const BOILERPLATE: &str = "This page is an engineering drawing sheet from a structural \
design package. It shows plan and section views with dimension lines, grid references, \
reinforcement callouts, general notes, a revision table and a standard title block with \
drawing number, project name, scale, sheet size, drafter, checker and approval stamps.";
const BOILERPLATE_REPEAT: usize = 3;

/// Describes pages from manifest content, answering describe requests by page id.
#[derive(Debug, Clone)]
pub struct MockDescriber {
    mode: DescriberMode,
    /// page id -> (title, text, most common title word)
    pages: HashMap<String, (String, String, String)>,
}

impl MockDescriber {
    pub fn new(mode: DescriberMode, manifest: &CorpusManifest) -> Self {
        let titles = manifest.titles_by_page();
        let mut df: HashMap<String, usize> = HashMap::new();
        for t in titles.values() {
            let uniq: std::collections::HashSet<String> = title_tokens(t).into_iter().collect();
            for w in uniq {
                *df.entry(w).or_default() += 1;
            }
        }
        let pages = manifest
            .pages
            .iter()
            .map(|p: &PageRecord| {
                let title = titles.get(&p.page_id).cloned().unwrap_or_default();
                let generic = title_tokens(&title)
                    .into_iter()
                    .rev()
                    .max_by_key(|w| df.get(w).copied().unwrap_or(0))
                    .unwrap_or_default();
                (p.page_id.clone(), (title, p.text.clone(), generic))
            })
            .collect();
        MockDescriber { mode, pages }
    }

    fn describe(&self, page_id: &str) -> Result<String> {
        let (title, text, generic) = self
            .pages
            .get(page_id)
            .ok_or_else(|| Error::Adapter(format!("describer has no page {page_id:?}")))?;
        Ok(match self.mode {
            DescriberMode::Blind => {
                let head: Vec<&str> = text.split_whitespace().take(BLIND_TEXT_TOKENS).collect();
                format!("{title} {}", head.join(" ")).trim().to_string()
            }
            // Names the kind of sheet, never which sheet it is.
            DescriberMode::Homogenized => {
                let mut s = [BOILERPLATE; BOILERPLATE_REPEAT].join(" ");
                if !generic.is_empty() {
                    s.push(' ');
                    s.push_str(generic);
                }
                s
            }
        })
    }
}

impl VlmClient for MockDescriber {
    fn answer(&self, req: &VlmRequest) -> Result<VlmResponse> {
        let pid = req
            .page_ids
            .first()
            .ok_or_else(|| Error::Adapter("describe request without a page".into()))?;
        let d = self.describe(pid)?;
        Ok(VlmResponse { raw: d.clone(), answer: d })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiEntry {
    pub page_id: String,
    pub page_no: u32,
    pub description: String,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiIndex {
    pub dim: usize,
    pub entries: Vec<PiEntry>,
    /// Describer invocations spent building the index.
    pub describer_calls: u64,
}

/// Describes and embeds every page. Any adapter failure aborts the build.
pub fn build_pi_index(
    manifest: &CorpusManifest,
    describer: &dyn VlmClient,
    embedder: &dyn Embedder,
) -> Result<PiIndex> {
    let mut entries = Vec::with_capacity(manifest.pages.len());
    for (i, p) in manifest.pages.iter().enumerate() {
        let req = VlmRequest {
            question: DESCRIBE_PROMPT.to_string(),
            image_refs: vec![p.image_ref.clone().unwrap_or_else(|| p.page_id.clone())],
            page_ids: vec![p.page_id.clone()],
        };
        let description = describer
            .answer(&req)
            .map_err(|e| Error::Adapter(format!("describing page index {i} ({}): {e}", p.page_id)))?
            .answer;
        let vector = embedder.embed(&description)?;
        if vector.len() != embedder.dim() {
            return Err(Error::Adapter(format!(
                "embedder returned {} dims, declared {}",
                vector.len(),
                embedder.dim()
            )));
        }
        entries.push(PiEntry {
            page_id: p.page_id.clone(),
            page_no: p.page_no,
            description,
            vector,
        });
    }
    Ok(PiIndex {
        dim: embedder.dim(),
        describer_calls: entries.len() as u64,
        entries,
    })
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Top-k pages by cosine similarity to the embedded query; ties by page_no.
pub fn pi_search(question: &str, index: &PiIndex, embedder: &dyn Embedder, k: usize) -> Result<Vec<SearchHit>> {
    let q = embedder.embed(question)?;
    if q.len() != index.dim {
        return Err(Error::invalid(format!(
            "query has {} dims, index has {}",
            q.len(),
            index.dim
        )));
    }
    pi_search_vector(&q, index, k)
}

pub fn pi_search_vector(q: &[f64], index: &PiIndex, k: usize) -> Result<Vec<SearchHit>> {
    if q.len() != index.dim {
        return Err(Error::invalid(format!("query has {} dims, index has {}", q.len(), index.dim)));
    }
    let mut scored: Vec<(f64, u32, &str)> = index
        .entries
        .iter()
        .map(|e| (cosine(q, &e.vector), e.page_no, e.page_id.as_str()))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(scored
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (score, _, pid))| SearchHit { rank: i + 1, page_id: pid.to_string(), score })
        .collect())
}
