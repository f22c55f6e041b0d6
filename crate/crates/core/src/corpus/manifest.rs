use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusManifest, DrawingEntry, PageRecord, QueryRecord, TocEntry};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Record {
    Page(PageRecord),
    Drawing(DrawingEntry),
    Toc(TocEntry),
    Query(QueryRecord),
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RecordRef<'a> {
    Page(&'a PageRecord),
    Drawing(&'a DrawingEntry),
    Toc(&'a TocEntry),
    Query(&'a QueryRecord),
}

/// Loads and validates a line-delimited manifest. The corpus id is the file stem.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<CorpusManifest> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let corpus_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_manifest(&raw, corpus_id)
}

pub fn parse_manifest(raw: &str, corpus_id: impl Into<String>) -> Result<CorpusManifest> {
    let mut m = CorpusManifest {
        corpus_id: corpus_id.into(),
        ..Default::default()
    };
    let mut seen = 0usize;
    for (i, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        seen += 1;
        match rec {
            Record::Page(p) => m.pages.push(p),
            Record::Drawing(d) => m.drawings.push(d),
            Record::Toc(t) => m.toc.push(t),
            Record::Query(q) => m.queries.push(q),
        }
    }
    if seen == 0 {
        return Err(Error::Empty);
    }
    m.validate()?;
    Ok(m)
}

/// Serializes pages, drawings, TOC entries and queries, one record per line.
pub fn write_manifest<W: Write>(m: &CorpusManifest, mut w: W) -> Result<()> {
    let records = m
        .pages
        .iter()
        .map(RecordRef::Page)
        .chain(m.drawings.iter().map(RecordRef::Drawing))
        .chain(m.toc.iter().map(RecordRef::Toc))
        .chain(m.queries.iter().map(RecordRef::Query));
    for r in records {
        serde_json::to_writer(&mut w, &r)?;
        w.write_all(b"\n").map_err(|e| Error::io("<manifest>", e))?;
    }
    Ok(())
}

pub fn save_manifest(m: &CorpusManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_manifest(m, &mut buf)?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}
