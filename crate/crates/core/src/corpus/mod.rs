//! Corpus data model: pages, drawing register, TOC ranges and evaluation queries.

mod manifest;
mod synth;
mod toc;

pub use manifest::{load_manifest, parse_manifest, save_manifest, write_manifest};
pub use synth::{
    generate_synthetic_catalog, generate_synthetic_corpus, CatalogSpec, CorpusSpec, SynthSpec,
    TextMode,
};
pub use toc::{parse_toc_text, TocParse};

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextSource {
    VectorPdf,
    Ocr,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRecord {
    pub page_id: String,
    pub page_no: u32,
    #[serde(default)]
    pub text: String,
    pub text_source: TextSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ocr_confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawingEntry {
    #[serde(rename = "number")]
    pub drawing_number: String,
    pub title: String,
    pub page_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TocEntry {
    pub category: String,
    pub page_start: u32,
    pub page_end: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionType {
    Dimension,
    Value,
    Identification,
    Specification,
    Count,
    Other,
}

impl QuestionType {
    pub const ALL: [QuestionType; 6] = [
        QuestionType::Dimension,
        QuestionType::Value,
        QuestionType::Identification,
        QuestionType::Specification,
        QuestionType::Count,
        QuestionType::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QuestionType::Dimension => "dimension",
            QuestionType::Value => "value",
            QuestionType::Identification => "identification",
            QuestionType::Specification => "specification",
            QuestionType::Count => "count",
            QuestionType::Other => "other",
        }
    }
}

impl std::str::FromStr for QuestionType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        QuestionType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown question type {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query_id: String,
    pub question: String,
    pub gold_page_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_unit_id: Option<String>,
    pub question_type: QuestionType,
    #[serde(default)]
    pub gold_answer: String,
}

/// One document set. `corpus_id` is not stored in the manifest file; it is
/// taken from the file stem on load.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusManifest {
    pub corpus_id: String,
    pub pages: Vec<PageRecord>,
    pub drawings: Vec<DrawingEntry>,
    pub toc: Vec<TocEntry>,
    pub queries: Vec<QueryRecord>,
}

impl CorpusManifest {
    pub fn drawing_count(&self) -> usize {
        self.drawings.len()
    }

    pub fn page(&self, page_id: &str) -> Option<&PageRecord> {
        self.pages.iter().find(|p| p.page_id == page_id)
    }

    pub fn page_index(&self) -> HashMap<&str, &PageRecord> {
        self.pages.iter().map(|p| (p.page_id.as_str(), p)).collect()
    }

    pub fn query(&self, query_id: &str) -> Option<&QueryRecord> {
        self.queries.iter().find(|q| q.query_id == query_id)
    }

    /// Drawing titles keyed by page; several drawings on one page are joined.
    pub fn titles_by_page(&self) -> BTreeMap<String, String> {
        let mut out: BTreeMap<String, String> = BTreeMap::new();
        for d in &self.drawings {
            let slot = out.entry(d.page_id.clone()).or_default();
            if !slot.is_empty() {
                slot.push(' ');
            }
            slot.push_str(&d.title);
        }
        out
    }

    /// Checks every record-level and cross-record invariant.
    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for p in &self.pages {
            if p.page_id.is_empty() {
                return Err(Error::Integrity("empty page_id".into()));
            }
            if !ids.insert(p.page_id.as_str()) {
                return Err(Error::Integrity(format!("duplicate page_id {:?}", p.page_id)));
            }
            if p.page_no < 1 {
                return Err(Error::Integrity(format!("page {:?}: page_no must be >= 1", p.page_id)));
            }
            match (p.text_source, p.ocr_confidence) {
                (TextSource::Ocr, None) => {
                    return Err(Error::Integrity(format!(
                        "page {:?}: ocr page without ocr_confidence",
                        p.page_id
                    )))
                }
                (TextSource::Ocr, Some(c)) if !(0.0..=1.0).contains(&c) => {
                    return Err(Error::Integrity(format!(
                        "page {:?}: ocr_confidence {c} outside [0,1]",
                        p.page_id
                    )))
                }
                (TextSource::VectorPdf | TextSource::None, Some(_)) => {
                    return Err(Error::Integrity(format!(
                        "page {:?}: ocr_confidence given for non-ocr page",
                        p.page_id
                    )))
                }
                _ => {}
            }
        }

        for d in &self.drawings {
            if d.drawing_number.trim().is_empty() {
                return Err(Error::Integrity("drawing with empty number".into()));
            }
            if !ids.contains(d.page_id.as_str()) {
                return Err(Error::Integrity(format!(
                    "drawing {:?} references unknown page_id {:?}",
                    d.drawing_number, d.page_id
                )));
            }
        }

        if !self.toc.is_empty() {
            let lo = self.pages.iter().map(|p| p.page_no).min().unwrap_or(0);
            let hi = self.pages.iter().map(|p| p.page_no).max().unwrap_or(0);
            for t in &self.toc {
                if t.page_start > t.page_end {
                    return Err(Error::Integrity(format!(
                        "toc {:?}: page_start {} > page_end {}",
                        t.category, t.page_start, t.page_end
                    )));
                }
                if t.page_start < lo || t.page_end > hi {
                    return Err(Error::Integrity(format!(
                        "toc {:?}: range {}-{} outside corpus pages {lo}-{hi}",
                        t.category, t.page_start, t.page_end
                    )));
                }
            }
        }

        let mut qids = HashSet::new();
        for q in &self.queries {
            if !qids.insert(q.query_id.as_str()) {
                return Err(Error::Integrity(format!("duplicate query_id {:?}", q.query_id)));
            }
            if q.gold_page_ids.is_empty() {
                return Err(Error::Integrity(format!("query {:?} has no gold pages", q.query_id)));
            }
            if let Some(missing) = q.gold_page_ids.iter().find(|g| !ids.contains(g.as_str())) {
                return Err(Error::Integrity(format!(
                    "query {:?} references unknown page_id {missing:?}",
                    q.query_id
                )));
            }
        }
        Ok(())
    }
}
