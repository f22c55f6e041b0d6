//! Per-page index documents: drawing titles, hierarchy labels, TOC categories
//! and (quality permitting) page text.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusManifest, PageRecord, TextSource};
use crate::error::{Error, Result};
use crate::hdnc::HdncHierarchy;
use crate::text::normalize_ws;

pub const BUNDLE_VERSION: u32 = 1;
pub const DEFAULT_OCR_THRESHOLD: f64 = 0.85;

/// Share of TOC categories (or drawing numbers) a page must mention to be
/// treated as the TOC page.
const TOC_PAGE_MENTION_SHARE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionMode {
    Always,
    Never,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionPolicy {
    pub mode: FusionMode,
    pub ocr_confidence_threshold: f64,
}

impl FusionPolicy {
    pub fn new(mode: FusionMode) -> Self {
        FusionPolicy {
            mode,
            ocr_confidence_threshold: DEFAULT_OCR_THRESHOLD,
        }
    }
}

impl Default for FusionPolicy {
    fn default() -> Self {
        FusionPolicy::new(FusionMode::Adaptive)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexMode {
    Hdnc,
    TocOnly,
    FulltextOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexDocument {
    pub page_id: String,
    pub page_no: u32,
    pub title_field: String,
    pub labels_field: String,
    pub text_field: String,
    pub toc_field: String,
    pub is_toc_page: bool,
}

impl IndexDocument {
    /// The flat string BM25 sees.
    pub fn searchable_text(&self) -> String {
        [&self.title_field, &self.labels_field, &self.toc_field, &self.text_field]
            .into_iter()
            .filter(|f| !f.is_empty())
            .map(String::as_str)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildStats {
    pub mode: IndexMode,
    pub fused_page_count: usize,
    /// Pages that had text but did not get it fused.
    pub skipped_page_count: usize,
    pub exclude_toc_page: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexBundle {
    pub version: u32,
    pub corpus_id: String,
    pub policy: FusionPolicy,
    pub documents: Vec<IndexDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<HdncHierarchy>,
    pub build_stats: BuildStats,
}

impl IndexBundle {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = serde_json::to_vec_pretty(self)?;
        buf.push(b'\n');
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&raw)
    }

    pub fn from_json(raw: &str) -> Result<Self> {
        let b: IndexBundle = serde_json::from_str(raw)?;
        if b.version != BUNDLE_VERSION {
            return Err(Error::invalid(format!(
                "unsupported index bundle version {} (expected {BUNDLE_VERSION})",
                b.version
            )));
        }
        Ok(b)
    }
}

/// Whether a page's extracted text joins its index document.
pub fn decide_fusion(page: &PageRecord, policy: &FusionPolicy) -> bool {
    match policy.mode {
        FusionMode::Always => true,
        FusionMode::Never => false,
        FusionMode::Adaptive => match page.text_source {
            TextSource::VectorPdf => true,
            TextSource::Ocr => page
                .ocr_confidence
                .is_some_and(|c| c >= policy.ocr_confidence_threshold),
            TextSource::None => false,
        },
    }
}

/// A TOC page mentions at least half of the TOC categories, or at least half
/// of the drawing numbers when there is no category list.
pub fn detect_toc_pages(manifest: &CorpusManifest) -> Vec<bool> {
    let needles: Vec<String> = if !manifest.toc.is_empty() {
        manifest.toc.iter().map(|t| normalize_ws(&t.category.to_lowercase())).collect()
    } else {
        manifest.drawings.iter().map(|d| d.drawing_number.to_lowercase()).collect()
    };
    if needles.len() < 2 {
        return vec![false; manifest.pages.len()];
    }
    manifest
        .pages
        .iter()
        .map(|p| {
            if p.text.is_empty() {
                return false;
            }
            let hay = normalize_ws(&p.text.to_lowercase());
            let hits = needles.iter().filter(|n| hay.contains(n.as_str())).count();
            hits as f64 >= TOC_PAGE_MENTION_SHARE * needles.len() as f64
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuildOptions {
    /// Index the detected TOC page as an empty document.
    pub exclude_toc_page: bool,
}

pub fn build_index(
    manifest: &CorpusManifest,
    hierarchy: Option<&HdncHierarchy>,
    policy: FusionPolicy,
    mode: IndexMode,
    options: BuildOptions,
) -> Result<IndexBundle> {
    match mode {
        IndexMode::Hdnc if hierarchy.is_none() => {
            return Err(Error::invalid("hdnc mode requires a hierarchy"));
        }
        IndexMode::TocOnly if manifest.toc.is_empty() => {
            return Err(Error::invalid("toc_only mode requires TOC entries"));
        }
        _ => {}
    }
    let titles = manifest.titles_by_page();
    let toc_pages = detect_toc_pages(manifest);

    let mut stats = BuildStats {
        mode,
        fused_page_count: 0,
        skipped_page_count: 0,
        exclude_toc_page: options.exclude_toc_page,
    };
    let mut documents = Vec::with_capacity(manifest.pages.len());
    for (page, &is_toc_page) in manifest.pages.iter().zip(&toc_pages) {
        let mut doc = IndexDocument {
            page_id: page.page_id.clone(),
            page_no: page.page_no,
            title_field: String::new(),
            labels_field: String::new(),
            text_field: String::new(),
            toc_field: String::new(),
            is_toc_page,
        };
        if is_toc_page && options.exclude_toc_page {
            if !page.text.trim().is_empty() {
                stats.skipped_page_count += 1;
            }
            documents.push(doc);
            continue;
        }
        match mode {
            IndexMode::Hdnc => {
                doc.title_field = normalize_ws(titles.get(&page.page_id).map_or("", String::as_str));
                if let Some(labels) = hierarchy.and_then(|h| h.labels_by_page.get(&page.page_id)) {
                    doc.labels_field = normalize_ws(&labels.join(" "));
                }
            }
            IndexMode::TocOnly => {
                let cats: Vec<&str> = manifest
                    .toc
                    .iter()
                    .filter(|t| (t.page_start..=t.page_end).contains(&page.page_no))
                    .map(|t| t.category.as_str())
                    .collect();
                doc.toc_field = normalize_ws(&cats.join(" "));
            }
            IndexMode::FulltextOnly => {}
        }
        let has_text = !page.text.trim().is_empty();
        if decide_fusion(page, &policy) && has_text {
            doc.text_field = normalize_ws(&page.text);
            stats.fused_page_count += 1;
        } else if has_text {
            stats.skipped_page_count += 1;
        }
        documents.push(doc);
    }

    Ok(IndexBundle {
        version: BUNDLE_VERSION,
        corpus_id: manifest.corpus_id.clone(),
        policy,
        documents,
        hierarchy: hierarchy.cloned(),
        build_stats: stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic_catalog, generate_synthetic_corpus, CatalogSpec, SynthSpec, TextMode};
    use crate::hdnc::run_hdnc;
    use crate::retrieval::{build_postings, search, Bm25Params};

    fn page(source: TextSource, conf: Option<f64>) -> PageRecord {
        PageRecord {
            page_id: "p".into(),
            page_no: 1,
            text: "text".into(),
            text_source: source,
            ocr_confidence: conf,
            unit_id: None,
            image_ref: None,
        }
    }

    #[test]
    fn fusion_decisions() {
        let adaptive = FusionPolicy::default();
        assert!(decide_fusion(&page(TextSource::VectorPdf, None), &adaptive));
        assert!(!decide_fusion(&page(TextSource::Ocr, Some(0.4)), &adaptive));
        assert!(decide_fusion(&page(TextSource::Ocr, Some(0.9)), &adaptive));
        assert!(decide_fusion(&page(TextSource::Ocr, Some(0.85)), &adaptive));
        assert!(!decide_fusion(&page(TextSource::None, None), &adaptive));
        assert!(decide_fusion(&page(TextSource::Ocr, Some(0.1)), &FusionPolicy::new(FusionMode::Always)));
        assert!(!decide_fusion(&page(TextSource::VectorPdf, None), &FusionPolicy::new(FusionMode::Never)));
    }

    fn bridge_like() -> CorpusManifest {
        let mut spec = SynthSpec::new("PRJ-BR-DR-", &[2, 2, 2], &[2, 3, 2]);
        spec.vocab = vec![
            vec!["details".into(), "general".into()],
            vec!["pier".into(), "deck".into(), "abutment".into()],
            vec!["elevation".into(), "reinforcement".into()],
        ];
        spec.title_dropout = 0.0;
        generate_synthetic_corpus(&spec, 4).unwrap()
    }

    #[test]
    fn labels_make_pier_details_match() {
        let m = bridge_like();
        let (h, _) = run_hdnc(&m.drawings).unwrap();
        let b = build_index(&m, Some(&h), FusionPolicy::new(FusionMode::Never), IndexMode::Hdnc, BuildOptions::default()).unwrap();
        let idx = build_postings(&b);
        let hits = search("pier details", &idx, &Bm25Params::default());
        // two drawings sit under details/pier; both must outrank everything else
        assert_eq!(hits.len(), 3);
        for hit in &hits[..2] {
            let d = b.documents.iter().find(|d| d.page_id == hit.page_id).unwrap();
            assert!(d.labels_field.contains("pier") && d.labels_field.contains("details"), "{d:?}");
        }
    }

    #[test]
    fn never_policy_fuses_nothing() {
        let m = bridge_like();
        let (h, _) = run_hdnc(&m.drawings).unwrap();
        let b = build_index(&m, Some(&h), FusionPolicy::new(FusionMode::Never), IndexMode::Hdnc, BuildOptions::default()).unwrap();
        assert_eq!(b.build_stats.fused_page_count, 0);
        assert!(b.documents.iter().all(|d| d.text_field.is_empty()));
        assert_eq!(b.documents.len(), m.pages.len());
    }

    #[test]
    fn policy_changes_only_text_field() {
        let m = bridge_like();
        let (h, _) = run_hdnc(&m.drawings).unwrap();
        let a = build_index(&m, Some(&h), FusionPolicy::new(FusionMode::Never), IndexMode::Hdnc, BuildOptions::default()).unwrap();
        let b = build_index(&m, Some(&h), FusionPolicy::new(FusionMode::Always), IndexMode::Hdnc, BuildOptions::default()).unwrap();
        for (x, y) in a.documents.iter().zip(&b.documents) {
            assert_eq!(x.title_field, y.title_field);
            assert_eq!(x.labels_field, y.labels_field);
            assert_eq!(x.toc_field, y.toc_field);
        }
        assert!(b.build_stats.fused_page_count > 0);
    }

    #[test]
    fn toc_only_expands_ranges() {
        let mut spec = CatalogSpec::new(3, [2, 3]);
        spec.category_names = vec!["Universal Beams".into(), "Channels".into(), "Equal Angles".into()];
        let m = generate_synthetic_catalog(&spec, 2).unwrap();
        let b = build_index(&m, None, FusionPolicy::new(FusionMode::Never), IndexMode::TocOnly, BuildOptions::default()).unwrap();
        for t in &m.toc {
            for d in &b.documents {
                let covered = (t.page_start..=t.page_end).contains(&d.page_no);
                assert_eq!(d.toc_field.contains(&t.category), covered, "{} on {}", t.category, d.page_no);
            }
        }
        assert!(b.documents[0].is_toc_page);
        assert!(b.documents[1..].iter().all(|d| !d.is_toc_page));
    }

    #[test]
    fn channels_range_fixture() {
        let mut m = CorpusManifest::default();
        for no in 1..=12 {
            m.pages.push(PageRecord { page_id: format!("p{no}"), page_no: no, ..page(TextSource::None, None) });
            m.pages.last_mut().unwrap().text.clear();
        }
        m.toc.push(crate::corpus::TocEntry { category: "CHANNELS".into(), page_start: 10, page_end: 12 });
        let b = build_index(&m, None, FusionPolicy::default(), IndexMode::TocOnly, BuildOptions::default()).unwrap();
        let with: Vec<u32> = b.documents.iter().filter(|d| d.toc_field == "CHANNELS").map(|d| d.page_no).collect();
        assert_eq!(with, vec![10, 11, 12]);
    }

    #[test]
    fn mode_preconditions() {
        let m = bridge_like();
        assert!(build_index(&m, None, FusionPolicy::default(), IndexMode::Hdnc, BuildOptions::default()).is_err());
        assert!(build_index(&m, None, FusionPolicy::default(), IndexMode::TocOnly, BuildOptions::default()).is_err());
        let b = build_index(&m, None, FusionPolicy::default(), IndexMode::FulltextOnly, BuildOptions::default()).unwrap();
        assert!(b.documents.iter().all(|d| d.title_field.is_empty() && d.labels_field.is_empty()));
    }

    #[test]
    fn excluded_toc_page_is_empty() {
        let m = bridge_like();
        let (h, _) = run_hdnc(&m.drawings).unwrap();
        let opts = BuildOptions { exclude_toc_page: true };
        let b = build_index(&m, Some(&h), FusionPolicy::new(FusionMode::Always), IndexMode::Hdnc, opts).unwrap();
        assert_eq!(b.documents.len(), m.pages.len());
        let toc: Vec<_> = b.documents.iter().filter(|d| d.is_toc_page).collect();
        assert_eq!(toc.len(), 1);
        assert!(toc[0].searchable_text().is_empty());
    }

    #[test]
    fn bundle_roundtrip_and_version_check() {
        let mut spec = SynthSpec::new("PRJ-", &[2, 2], &[2, 2]);
        spec.text_mode = TextMode::Garbled(0.3);
        let m = generate_synthetic_corpus(&spec, 1).unwrap();
        let (h, _) = run_hdnc(&m.drawings).unwrap();
        let b = build_index(&m, Some(&h), FusionPolicy::default(), IndexMode::Hdnc, BuildOptions::default()).unwrap();
        let json = serde_json::to_string(&b).unwrap();
        assert!(json.starts_with("{\"version\":1,"));
        assert_eq!(IndexBundle::from_json(&json).unwrap(), b);
        let bad = json.replacen("\"version\":1", "\"version\":2", 1);
        assert!(IndexBundle::from_json(&bad).is_err());
    }
}
