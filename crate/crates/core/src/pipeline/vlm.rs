use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::process::{Command, Stdio};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::CorpusManifest;
use crate::error::{Error, Result};

pub const ENV_VLM_CMD: &str = "DVI_VLM_CMD";
pub const ENV_VLM_URL: &str = "DVI_VLM_URL";

/// Emitted by the lossy mock when it fumbles an answer.
pub const WRONG_MARKER: &str = "unanswerable";

/// One request on the adapter wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VlmRequest {
    pub question: String,
    pub image_refs: Vec<String>,
    pub page_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VlmResponse {
    pub answer: String,
    #[serde(default)]
    pub raw: String,
}

pub trait VlmClient: Send + Sync {
    fn answer(&self, req: &VlmRequest) -> Result<VlmResponse>;
}

/// Resolves a page to the image reference handed to the VLM.
pub trait Renderer: Send + Sync {
    fn render(&self, page_id: &str) -> Result<String>;
}

/// Identity renderer: the page id is the image ref.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockRenderer;

impl Renderer for MockRenderer {
    fn render(&self, page_id: &str) -> Result<String> {
        Ok(page_id.to_string())
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub enum MockVlmMode {
    Oracle,
    Lossy(f64),
    Fixed(String),
}

#[derive(Debug, Clone)]
struct KeyEntry {
    gold_pages: BTreeSet<String>,
    answer: String,
}

/// Answers from the manifest's gold answers, keyed by question text.
#[derive(Debug, Clone)]
pub struct MockVlm {
    mode: MockVlmMode,
    seed: u64,
    key: HashMap<String, Vec<KeyEntry>>,
}

impl MockVlm {
    pub fn new(mode: MockVlmMode, seed: u64, manifest: &CorpusManifest) -> Result<Self> {
        if let MockVlmMode::Lossy(c) = mode {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::invalid(format!("lossy rate {c} outside [0, 1]")));
            }
        }
        let mut key: HashMap<String, Vec<KeyEntry>> = HashMap::new();
        for q in &manifest.queries {
            key.entry(q.question.clone()).or_default().push(KeyEntry {
                gold_pages: q.gold_page_ids.iter().cloned().collect(),
                answer: q.gold_answer.clone(),
            });
        }
        Ok(MockVlm { mode, seed, key })
    }

    fn known_answer(&self, req: &VlmRequest) -> Option<&str> {
        self.key.get(&req.question)?.iter().find_map(|e| {
            req.page_ids
                .iter()
                .any(|p| e.gold_pages.contains(p))
                .then_some(e.answer.as_str())
        })
    }
}

impl VlmClient for MockVlm {
    fn answer(&self, req: &VlmRequest) -> Result<VlmResponse> {
        let answer = match &self.mode {
            MockVlmMode::Fixed(a) => a.clone(),
            MockVlmMode::Oracle => self.known_answer(req).unwrap_or(WRONG_MARKER).to_string(),
            MockVlmMode::Lossy(c) => {
                // keyed by question so the draw does not depend on call order
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(fnv1a(req.question.as_bytes()));
                let keep = rng.gen::<f64>() < *c;
                match self.known_answer(req) {
                    Some(a) if keep => a.to_string(),
                    _ => WRONG_MARKER.to_string(),
                }
            }
        };
        Ok(VlmResponse { raw: answer.clone(), answer })
    }
}

/// Runs an external command per request: JSON request on stdin, `{answer}` on stdout.
#[derive(Debug, Clone)]
pub struct CommandVlm {
    pub command: String,
}

impl CommandVlm {
    pub fn from_env() -> Result<Self> {
        let command = std::env::var(ENV_VLM_CMD)
            .ok()
            .filter(|c| !c.trim().is_empty())
            .ok_or_else(|| Error::Adapter(format!("{ENV_VLM_CMD} is not set")))?;
        Ok(CommandVlm { command })
    }
}

fn parse_response(raw: &str) -> Result<VlmResponse> {
    let mut r: VlmResponse = serde_json::from_str(raw.trim())
        .map_err(|e| Error::Adapter(format!("bad adapter response: {e}")))?;
    if r.raw.is_empty() {
        r.raw = raw.trim().to_string();
    }
    Ok(r)
}

impl VlmClient for CommandVlm {
    fn answer(&self, req: &VlmRequest) -> Result<VlmResponse> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Adapter(format!("cannot start {:?}: {e}", self.command)))?;
        let body = serde_json::to_vec(req)?;
        // A write error usually means the adapter exited early; its status says more.
        let written = child.stdin.take().expect("stdin is piped").write_all(&body);
        let out = child
            .wait_with_output()
            .map_err(|e| Error::Adapter(format!("adapter wait: {e}")))?;
        if !out.status.success() {
            return Err(Error::Adapter(format!("adapter exited with {}", out.status)));
        }
        written.map_err(|e| Error::Adapter(format!("write to adapter: {e}")))?;
        parse_response(&String::from_utf8_lossy(&out.stdout))
    }
}

/// POSTs the same request body to a URL (plain http).
#[derive(Debug, Clone)]
pub struct HttpVlm {
    pub url: String,
}

impl HttpVlm {
    pub fn from_env() -> Result<Self> {
        let url = std::env::var(ENV_VLM_URL)
            .ok()
            .filter(|c| !c.trim().is_empty())
            .ok_or_else(|| Error::Adapter(format!("{ENV_VLM_URL} is not set")))?;
        Ok(HttpVlm { url })
    }
}

impl VlmClient for HttpVlm {
    fn answer(&self, req: &VlmRequest) -> Result<VlmResponse> {
        let mut resp = ureq::post(&self.url)
            .send_json(req)
            .map_err(|e| Error::Adapter(format!("POST {}: {e}", self.url)))?;
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Error::Adapter(format!("read response: {e}")))?;
        parse_response(&text)
    }
}

/// Counts calls to the wrapped client.
#[derive(Debug, Default)]
pub struct CountingVlm<V> {
    pub inner: V,
    calls: AtomicU64,
}

impl<V> CountingVlm<V> {
    pub fn new(inner: V) -> Self {
        CountingVlm { inner, calls: AtomicU64::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<V: VlmClient> VlmClient for CountingVlm<V> {
    fn answer(&self, req: &VlmRequest) -> Result<VlmResponse> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.answer(req)
    }
}

impl VlmClient for Box<dyn VlmClient> {
    fn answer(&self, req: &VlmRequest) -> Result<VlmResponse> {
        (**self).answer(req)
    }
}

/// `mock:oracle`, `mock:lossy:<c>`, `mock:fixed:<answer>`, `cmd` or `http`.
#[derive(Debug, Clone, PartialEq)]
pub enum VlmSelector {
    Mock(MockVlmMode),
    Cmd,
    Http,
}

impl FromStr for VlmSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("unknown VLM selector {s:?}"));
        match s {
            "cmd" => return Ok(VlmSelector::Cmd),
            "http" => return Ok(VlmSelector::Http),
            "mock:oracle" => return Ok(VlmSelector::Mock(MockVlmMode::Oracle)),
            _ => {}
        }
        if let Some(c) = s.strip_prefix("mock:lossy:") {
            let c: f64 = c.parse().map_err(|_| bad())?;
            if !(0.0..=1.0).contains(&c) {
                return Err(bad());
            }
            return Ok(VlmSelector::Mock(MockVlmMode::Lossy(c)));
        }
        if let Some(a) = s.strip_prefix("mock:fixed:") {
            return Ok(VlmSelector::Mock(MockVlmMode::Fixed(a.to_string())));
        }
        Err(bad())
    }
}

impl VlmSelector {
    pub fn build(&self, manifest: &CorpusManifest, seed: u64) -> Result<Box<dyn VlmClient>> {
        Ok(match self {
            VlmSelector::Mock(mode) => Box::new(MockVlm::new(mode.clone(), seed, manifest)?),
            VlmSelector::Cmd => Box::new(CommandVlm::from_env()?),
            VlmSelector::Http => Box::new(HttpVlm::from_env()?),
        })
    }
}
