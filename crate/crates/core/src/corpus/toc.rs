use std::sync::OnceLock;

use regex::Regex;

use super::{DrawingEntry, PageRecord};
use crate::error::{Error, Result};
use crate::text::normalize_ws;

/// Result of scanning TOC text for drawing numbers.
///
/// Entries are emitted with an empty `page_id`; when the line ends in a page
/// number it is kept in `page_numbers` and [`TocParse::attach_pages`] resolves
/// it against the corpus pages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TocParse {
    pub entries: Vec<DrawingEntry>,
    pub page_numbers: Vec<Option<u32>>,
    pub skipped: usize,
}

impl TocParse {
    /// Fills `page_id` from trailing page numbers. Entries whose page number is
    /// missing or unknown are dropped.
    pub fn attach_pages(&self, pages: &[PageRecord]) -> Vec<DrawingEntry> {
        self.entries
            .iter()
            .zip(&self.page_numbers)
            .filter_map(|(e, no)| {
                let no = (*no)?;
                let page = pages.iter().find(|p| p.page_no == no)?;
                Some(DrawingEntry {
                    page_id: page.page_id.clone(),
                    ..e.clone()
                })
            })
            .collect()
    }
}

fn trailing_page_number() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // A page number needs dot leaders, a tab, or at least two spaces before it
    // so that titles such as "Pier 3" or "Pier-3" keep their digits.
    RE.get_or_init(|| Regex::new(r"(?:\s*(?:\.{2,}|…+)\s*|\s{2,}|\t+)(\d{1,5})\s*$").unwrap())
}

fn strip_separators(s: &str) -> &str {
    s.trim_matches(|c: char| {
        c.is_whitespace() || matches!(c, '.' | '-' | '–' | '—' | ':' | '|' | '·' | '…' | '_')
    })
}

/// Extracts `(number, title)` pairs from TOC lines. Lines without a match of
/// `number_pattern` are skipped and counted.
pub fn parse_toc_text<S: AsRef<str>>(lines: &[S], number_pattern: &str) -> Result<TocParse> {
    let re = Regex::new(number_pattern)
        .map_err(|e| Error::invalid(format!("invalid number pattern: {e}")))?;
    let mut out = TocParse {
        entries: Vec::new(),
        page_numbers: Vec::new(),
        skipped: 0,
    };

    for line in lines {
        let line = line.as_ref();
        let Some(m) = re.find(line).filter(|m| !m.as_str().is_empty()) else {
            out.skipped += 1;
            continue;
        };
        let number = m.as_str().trim().to_string();

        let mut rest = format!("{} {}", &line[..m.start()], &line[m.end()..]);
        while let Some(m) = re.find(&rest).filter(|m| !m.as_str().is_empty()) {
            rest.replace_range(m.range(), " ");
        }

        let mut page_no = None;
        let mut title = strip_separators(&rest).to_string();
        if let Some(c) = trailing_page_number().captures(&title) {
            page_no = c[1].parse().ok();
            let cut = c.get(0).unwrap().start();
            title.truncate(cut);
        }
        let title = normalize_ws(strip_separators(&title));

        out.entries.push(DrawingEntry {
            drawing_number: number,
            title,
            page_id: String::new(),
        });
        out.page_numbers.push(page_no);
    }

    if out.entries.is_empty() {
        return Err(Error::invalid(format!(
            "no line matched number pattern {number_pattern:?} ({} lines skipped)",
            out.skipped
        )));
    }
    Ok(out)
}
