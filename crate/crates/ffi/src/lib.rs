//! C ABI over `dvi-core`.
//!
//! Every fallible call returns a [`DviStatus`]. On failure the message is kept
//! per thread and can be read with [`dvi_last_error`] until the next failing
//! call on that thread. Handles are opaque and must be released with their
//! matching `*_free` function; strings returned through `out_json` parameters
//! are released with [`dvi_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dvi_core::corpus::{load_manifest, parse_manifest, CorpusManifest, CorpusSpec};
use dvi_core::hdnc::run_hdnc;
use dvi_core::indexer::{build_index, BuildOptions, FusionMode, FusionPolicy, IndexBundle, IndexMode};
use dvi_core::pipeline::{answer_query, MockRenderer, VlmSelector};
use dvi_core::retrieval::{build_postings, search, Bm25Params, PostingsIndex};
use dvi_core::Error;
use serde_json::json;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DviStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Adapter = 3,
    Io = 4,
    Parse = 5,
    InvalidUtf8 = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DviIndexMode {
    Hdnc = 0,
    TocOnly = 1,
    FulltextOnly = 2,
}

impl From<DviIndexMode> for IndexMode {
    fn from(m: DviIndexMode) -> Self {
        match m {
            DviIndexMode::Hdnc => IndexMode::Hdnc,
            DviIndexMode::TocOnly => IndexMode::TocOnly,
            DviIndexMode::FulltextOnly => IndexMode::FulltextOnly,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DviFusionMode {
    Adaptive = 0,
    Always = 1,
    Never = 2,
}

impl From<DviFusionMode> for FusionMode {
    fn from(m: DviFusionMode) -> Self {
        match m {
            DviFusionMode::Adaptive => FusionMode::Adaptive,
            DviFusionMode::Always => FusionMode::Always,
            DviFusionMode::Never => FusionMode::Never,
        }
    }
}

/// A loaded or generated corpus manifest.
pub struct DviManifest {
    inner: CorpusManifest,
}

/// An index bundle together with its postings.
pub struct DviIndex {
    bundle: IndexBundle,
    postings: PostingsIndex,
}

impl DviIndex {
    fn new(bundle: IndexBundle) -> Self {
        let postings = build_postings(&bundle);
        DviIndex { bundle, postings }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(DviStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => DviStatus::Io,
            Error::Parse { .. } | Error::Json(_) => DviStatus::Parse,
            Error::Adapter(_) => DviStatus::Adapter,
            _ => DviStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> DviStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DviStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".to_string());
            DviStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(DviStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(DviStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

unsafe fn put_json(out: *mut *mut c_char, value: &serde_json::Value) -> FfiResult<()> {
    let s = serde_json::to_string(value).map_err(Error::from)?;
    *out = CString::new(s).map_err(|e| Failure(DviStatus::Parse, e.to_string()))?.into_raw();
    Ok(())
}

fn check_out<T>(out: *mut *mut T) -> FfiResult<()> {
    if out.is_null() {
        return Err(null("out"));
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dvi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dvi_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dvi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a line-delimited manifest from `path`.
///
/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dvi_manifest_load(path: *const c_char, out: *mut *mut DviManifest) -> DviStatus {
    guard(|| {
        check_out(out)?;
        let path = read_str(path, "path")?;
        let inner = load_manifest(path)?;
        put(out, DviManifest { inner });
        Ok(())
    })
}

/// Parses manifest text held in memory.
///
/// # Safety
/// `text` and `corpus_id` must be valid C strings and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dvi_manifest_parse(
    text: *const c_char,
    corpus_id: *const c_char,
    out: *mut *mut DviManifest,
) -> DviStatus {
    guard(|| {
        check_out(out)?;
        let text = read_str(text, "text")?;
        let corpus_id = read_str(corpus_id, "corpus_id")?;
        let inner = parse_manifest(text, corpus_id)?;
        put(out, DviManifest { inner });
        Ok(())
    })
}

/// Generates a synthetic corpus from a JSON spec.
///
/// # Safety
/// `spec_json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dvi_manifest_synth(
    spec_json: *const c_char,
    seed: u64,
    out: *mut *mut DviManifest,
) -> DviStatus {
    guard(|| {
        check_out(out)?;
        let raw = read_str(spec_json, "spec_json")?;
        let inner = CorpusSpec::from_json(raw)?.generate(seed)?;
        put(out, DviManifest { inner });
        Ok(())
    })
}

/// # Safety
/// `m` must be a valid manifest handle.
#[no_mangle]
pub unsafe extern "C" fn dvi_manifest_page_count(m: *const DviManifest) -> usize {
    m.as_ref().map_or(0, |m| m.inner.pages.len())
}

/// # Safety
/// `m` must be a valid manifest handle.
#[no_mangle]
pub unsafe extern "C" fn dvi_manifest_query_count(m: *const DviManifest) -> usize {
    m.as_ref().map_or(0, |m| m.inner.queries.len())
}

/// # Safety
/// `m` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn dvi_manifest_free(m: *mut DviManifest) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Runs drawing-number clustering and writes the hierarchy summary as JSON.
///
/// # Safety
/// `m` must be a valid manifest handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dvi_hdnc_inspect_json(m: *const DviManifest, out_json: *mut *mut c_char) -> DviStatus {
    guard(|| {
        check_out(out_json)?;
        let m = deref(m, "manifest")?;
        let (h, jac) = run_hdnc(&m.inner.drawings)?;
        put_json(
            out_json,
            &json!({
                "scheme": h.scheme,
                "strategy": h.strategy,
                "level_counts": h.level_counts(),
                "non_conforming": h.non_conforming,
                "labels_by_page": h.labels_by_page,
                "jaccard": jac,
            }),
        )
    })
}

/// Builds an index. `ocr_threshold` must lie in [0, 1].
///
/// # Safety
/// `m` must be a valid manifest handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dvi_index_build(
    m: *const DviManifest,
    mode: DviIndexMode,
    fusion: DviFusionMode,
    ocr_threshold: f64,
    exclude_toc_page: bool,
    out: *mut *mut DviIndex,
) -> DviStatus {
    guard(|| {
        check_out(out)?;
        let m = deref(m, "manifest")?;
        if !(0.0..=1.0).contains(&ocr_threshold) {
            return Err(Error::invalid(format!("ocr_threshold {ocr_threshold} outside [0, 1]")).into());
        }
        let policy = FusionPolicy {
            mode: fusion.into(),
            ocr_confidence_threshold: ocr_threshold,
        };
        let mode: IndexMode = mode.into();
        let hierarchy = match mode {
            IndexMode::Hdnc => Some(run_hdnc(&m.inner.drawings)?.0),
            _ => None,
        };
        let bundle = build_index(&m.inner, hierarchy.as_ref(), policy, mode, BuildOptions { exclude_toc_page })?;
        put(out, DviIndex::new(bundle));
        Ok(())
    })
}

/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dvi_index_load(path: *const c_char, out: *mut *mut DviIndex) -> DviStatus {
    guard(|| {
        check_out(out)?;
        let path = read_str(path, "path")?;
        put(out, DviIndex::new(IndexBundle::load(path)?));
        Ok(())
    })
}

/// # Safety
/// `idx` must be a valid index handle and `path` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn dvi_index_save(idx: *const DviIndex, path: *const c_char) -> DviStatus {
    guard(|| {
        let idx = deref(idx, "index")?;
        let path = read_str(path, "path")?;
        idx.bundle.save(path)?;
        Ok(())
    })
}

/// # Safety
/// `idx` must be a valid index handle.
#[no_mangle]
pub unsafe extern "C" fn dvi_index_document_count(idx: *const DviIndex) -> usize {
    idx.as_ref().map_or(0, |i| i.bundle.documents.len())
}

/// # Safety
/// `idx` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn dvi_index_free(idx: *mut DviIndex) {
    if !idx.is_null() {
        drop(Box::from_raw(idx));
    }
}

/// Top-`k` BM25 hits as a JSON array of `{rank, page_id, score}`.
///
/// # Safety
/// `idx` must be a valid index handle, `query` a valid C string and
/// `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dvi_search_json(
    idx: *const DviIndex,
    query: *const c_char,
    k: usize,
    out_json: *mut *mut c_char,
) -> DviStatus {
    guard(|| {
        check_out(out_json)?;
        let idx = deref(idx, "index")?;
        let query = read_str(query, "query")?;
        let params = Bm25Params::with_top_k(k);
        params.validate()?;
        let hits = search(query, &idx.postings, &params);
        put_json(out_json, &serde_json::to_value(hits).map_err(Error::from)?)
    })
}

/// Locates pages for `question` and hands them to the VLM named by `vlm`
/// (`mock:oracle`, `mock:lossy:<c>`, `mock:fixed:<text>`, `cmd`, `http`).
/// Mock VLMs take their answer key from `m`, which may be NULL otherwise.
/// Returns `DVI_STATUS_ADAPTER` when the VLM call fails.
///
/// # Safety
/// `idx` must be a valid index handle, `m` NULL or a valid manifest handle,
/// `question` and `vlm` valid C strings and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dvi_ask_json(
    idx: *const DviIndex,
    m: *const DviManifest,
    question: *const c_char,
    vlm: *const c_char,
    k: usize,
    seed: u64,
    out_json: *mut *mut c_char,
) -> DviStatus {
    guard(|| {
        check_out(out_json)?;
        let idx = deref(idx, "index")?;
        let question = read_str(question, "question")?;
        let sel: VlmSelector = read_str(vlm, "vlm")?.parse()?;
        let empty = CorpusManifest::default();
        let manifest = match (m.as_ref(), &sel) {
            (Some(m), _) => &m.inner,
            (None, VlmSelector::Mock(_)) => return Err(null("manifest (required by mock VLMs)")),
            (None, _) => &empty,
        };
        let params = Bm25Params::with_top_k(k);
        params.validate()?;
        let client = sel.build(manifest, seed)?;
        let res = answer_query("ask", question, &idx.postings, &params, &MockRenderer, &client);
        if let Some(e) = &res.error {
            return Err(Failure(DviStatus::Adapter, e.clone()));
        }
        put_json(out_json, &serde_json::to_value(res).map_err(Error::from)?)
    })
}
