//! Seeded synthetic corpora with known ground truth.
//!
//! Two layouts are produced: drawing sets whose numbers encode a hierarchy
//! (prefix + one fixed-width code per level), and catalogs with a TOC of
//! category page ranges and no numbering. Every random choice comes from a
//! ChaCha stream keyed by the seed, and separate streams are used for
//! structure, page text, garbling and queries so that text mode can change
//! without moving anything else.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    CorpusManifest, DrawingEntry, PageRecord, QueryRecord, QuestionType, TextSource, TocEntry,
};
use crate::error::{Error, Result};

const STREAM_STRUCTURE: u64 = 0;
const STREAM_TEXT: u64 = 1;
const STREAM_GARBLE: u64 = 2;
const STREAM_QUERY: u64 = 3;

/// OCR confidence reported for a readable scanned TOC page.
const CLEAN_OCR_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextMode {
    #[default]
    Clean,
    /// Each character is replaced with probability `p` (scanned pages).
    Garbled(f64),
    None,
}

fn default_query_count() -> usize {
    20
}
fn default_locating_fraction() -> f64 {
    0.83
}
fn default_one() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}

/// Drawing-set layout: numbers are `prefix [tag-] code_1 code_2 ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub prefix: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category_tag: Option<String>,
    pub widths: Vec<usize>,
    pub branches: Vec<usize>,
    /// Per-level vocabulary; generated pseudo-words are used when empty.
    #[serde(default)]
    pub vocab: Vec<Vec<String>>,
    #[serde(default)]
    pub text_mode: TextMode,
    #[serde(default = "default_query_count")]
    pub query_count: usize,
    /// Fraction of queries that quote the drawing number.
    #[serde(default = "default_locating_fraction")]
    pub locating_fraction: f64,
    /// Share of each ancestor group whose titles leave out the group's word.
    #[serde(default)]
    pub title_dropout: f64,
    /// Probability that a query mentions each ancestor-level word.
    #[serde(default = "default_one")]
    pub query_context: f64,
    /// Emit page 1 as a drawing register listing every number and title.
    #[serde(default = "default_true")]
    pub toc_page: bool,
}

impl SynthSpec {
    pub fn new(prefix: &str, widths: &[usize], branches: &[usize]) -> Self {
        SynthSpec {
            prefix: prefix.to_string(),
            category_tag: None,
            widths: widths.to_vec(),
            branches: branches.to_vec(),
            vocab: Vec::new(),
            text_mode: TextMode::Clean,
            query_count: default_query_count(),
            locating_fraction: default_locating_fraction(),
            title_dropout: 0.0,
            query_context: 1.0,
            toc_page: true,
        }
    }

    pub fn drawing_total(&self) -> usize {
        self.branches.iter().product()
    }

    fn validate(&self) -> Result<()> {
        if self.widths.is_empty() || self.widths.len() > 4 {
            return Err(Error::invalid("between 1 and 4 levels are required"));
        }
        if self.widths.len() != self.branches.len() {
            return Err(Error::invalid("widths and branches differ in length"));
        }
        for (level, (&w, &b)) in self.widths.iter().zip(&self.branches).enumerate() {
            if !(1..=3).contains(&w) {
                return Err(Error::invalid(format!("level {}: width {w} not in 1..=3", level + 1)));
            }
            if b == 0 {
                return Err(Error::invalid(format!("level {}: zero branches", level + 1)));
            }
            if b > 10usize.pow(w as u32) {
                return Err(Error::invalid(format!(
                    "level {}: {b} branches cannot be encoded in {w} digit(s)",
                    level + 1
                )));
            }
        }
        if !self.vocab.is_empty() {
            if self.vocab.len() != self.widths.len() {
                return Err(Error::invalid("vocab must have one word list per level"));
            }
            for (level, (words, &b)) in self.vocab.iter().zip(&self.branches).enumerate() {
                if words.len() < b {
                    return Err(Error::invalid(format!(
                        "level {}: {} vocabulary words for {b} branches",
                        level + 1,
                        words.len()
                    )));
                }
            }
        }
        if !(self.prefix.is_empty() || self.prefix.ends_with('-')) {
            return Err(Error::invalid("prefix must be empty or end with '-'"));
        }
        if let Some(tag) = &self.category_tag {
            if tag.is_empty() || !tag.split('-').all(|s| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphabetic())) {
                return Err(Error::invalid("category tag must be dash-joined alphabetic segments"));
            }
        }
        check_probability("title_dropout", self.title_dropout)?;
        check_probability("query_context", self.query_context)?;
        check_probability("locating_fraction", self.locating_fraction)?;
        if let TextMode::Garbled(p) = self.text_mode {
            check_probability("garbled", p)?;
        }
        Ok(())
    }
}

/// Catalog layout: categories spanning page ranges, listed on a TOC page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogSpec {
    pub categories: usize,
    #[serde(default)]
    pub category_names: Vec<String>,
    pub pages_per_category: [usize; 2],
    #[serde(default)]
    pub text_mode: TextMode,
    #[serde(default = "default_query_count")]
    pub query_count: usize,
    #[serde(default = "default_rows")]
    pub rows_per_page: usize,
}

fn default_rows() -> usize {
    8
}

impl CatalogSpec {
    pub fn new(categories: usize, pages_per_category: [usize; 2]) -> Self {
        CatalogSpec {
            categories,
            category_names: Vec::new(),
            pages_per_category,
            text_mode: TextMode::Clean,
            query_count: default_query_count(),
            rows_per_page: default_rows(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.categories == 0 {
            return Err(Error::invalid("catalog needs at least one category"));
        }
        let [lo, hi] = self.pages_per_category;
        if lo == 0 || lo > hi {
            return Err(Error::invalid("pages_per_category must satisfy 1 <= min <= max"));
        }
        if !self.category_names.is_empty() && self.category_names.len() != self.categories {
            return Err(Error::invalid("category_names length differs from categories"));
        }
        if self.rows_per_page == 0 {
            return Err(Error::invalid("rows_per_page must be positive"));
        }
        if let TextMode::Garbled(p) = self.text_mode {
            check_probability("garbled", p)?;
        }
        Ok(())
    }
}

/// Spec file accepted by the CLI: `{"layout": "drawings" | "catalog", ...}`.
/// A missing `layout` means drawings.
#[derive(Debug, Clone, PartialEq)]
pub enum CorpusSpec {
    Drawings(SynthSpec),
    Catalog(CatalogSpec),
}

impl CorpusSpec {
    pub fn from_json(raw: &str) -> Result<Self> {
        let mut value: serde_json::Value = serde_json::from_str(raw)?;
        let layout = value
            .as_object_mut()
            .and_then(|o| o.remove("layout"))
            .map(|v| v.as_str().map(str::to_owned).ok_or_else(|| Error::invalid("layout must be a string")))
            .transpose()?
            .unwrap_or_else(|| "drawings".to_string());
        match layout.as_str() {
            "drawings" => Ok(CorpusSpec::Drawings(serde_json::from_value(value)?)),
            "catalog" => Ok(CorpusSpec::Catalog(serde_json::from_value(value)?)),
            other => Err(Error::invalid(format!("unknown layout {other:?}"))),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<CorpusManifest> {
        match self {
            CorpusSpec::Drawings(s) => generate_synthetic_corpus(s, seed),
            CorpusSpec::Catalog(s) => generate_synthetic_catalog(s, seed),
        }
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {p} is not a probability")))
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

/// Engineering boilerplate used as page-text filler and question scaffolding.
const FILLER: &[&str] = &[
    "reinforcement", "concrete", "elevation", "section", "notes", "scale", "bearing", "cover",
    "typical", "setting", "out", "level", "grid", "joint", "drainage", "waterproofing", "detail",
    "plan", "schedule", "bar", "spacing", "anchor", "deck", "edge", "construction", "sequence",
];

/// Distinct pseudo-words (two or three consonant-vowel syllables).
struct WordMint {
    used: HashSet<String>,
}

impl WordMint {
    fn new() -> Self {
        let mut used: HashSet<String> = FILLER.iter().map(|s| s.to_string()).collect();
        used.extend(crate::text::STOPWORDS.iter().map(|s| s.to_string()));
        WordMint { used }
    }

    fn reserve(&mut self, w: &str) {
        self.used.insert(w.to_lowercase());
    }

    fn mint(&mut self, rng: &mut ChaCha8Rng) -> String {
        loop {
            let syllables = rng.gen_range(2..=3);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push(CONSONANTS[rng.gen_range(0..CONSONANTS.len())] as char);
                w.push(VOWELS[rng.gen_range(0..VOWELS.len())] as char);
            }
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Substitutes each character with probability `p` by a different character
/// from an OCR-noise alphabet.
fn garble(text: &str, p: f64, rng: &mut ChaCha8Rng) -> String {
    const NOISE: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789.,;:'|!/-_ ";
    text.chars()
        .map(|c| {
            if c == '\n' || !rng.gen_bool(p) {
                return c;
            }
            loop {
                let r = NOISE[rng.gen_range(0..NOISE.len())] as char;
                if r != c {
                    return r;
                }
            }
        })
        .collect()
}

fn content_source(mode: TextMode) -> (TextSource, Option<f64>) {
    match mode {
        TextMode::Clean => (TextSource::VectorPdf, None),
        TextMode::Garbled(p) => (TextSource::Ocr, Some(((1.0 - p) * 1000.0).round() / 1000.0)),
        TextMode::None => (TextSource::None, None),
    }
}

fn toc_source(mode: TextMode) -> (TextSource, Option<f64>) {
    match mode {
        TextMode::Clean => (TextSource::VectorPdf, None),
        TextMode::Garbled(_) => (TextSource::Ocr, Some(CLEAN_OCR_CONFIDENCE)),
        TextMode::None => (TextSource::None, None),
    }
}

/// Question-type mix of the engineering QA set this generator imitates.
const TYPE_WEIGHTS: [(QuestionType, u32); 5] = [
    (QuestionType::Dimension, 756),
    (QuestionType::Value, 258),
    (QuestionType::Identification, 147),
    (QuestionType::Specification, 134),
    (QuestionType::Count, 28),
];

fn pick_type(rng: &mut ChaCha8Rng) -> QuestionType {
    let total: u32 = TYPE_WEIGHTS.iter().map(|(_, w)| w).sum();
    let mut x = rng.gen_range(0..total);
    for (t, w) in TYPE_WEIGHTS {
        if x < w {
            return t;
        }
        x -= w;
    }
    QuestionType::Other
}

fn question_and_answer(t: QuestionType, subject: &str, rng: &mut ChaCha8Rng) -> (String, String) {
    match t {
        QuestionType::Dimension => {
            let what = ["length", "width", "depth", "thickness", "clear height"].choose(rng).unwrap();
            let v = rng.gen_range(100..20_000);
            (format!("What is the {what} shown for {subject}?"), format!("{v} mm"))
        }
        QuestionType::Value => {
            let v = rng.gen_range(10..5_000);
            (format!("What design load value is given for {subject}?"), format!("{v} kN"))
        }
        QuestionType::Identification => {
            let mark = format!("{}{}", (b'A' + rng.gen_range(0..26)) as char, rng.gen_range(1..40));
            (format!("Which bearing mark is used for {subject}?"), format!("mark {mark}"))
        }
        QuestionType::Specification => {
            let g = [250, 355, 460, 500].choose(rng).unwrap();
            (format!("What steel grade is specified for {subject}?"), format!("grade {g}"))
        }
        QuestionType::Count | QuestionType::Other => {
            let n = rng.gen_range(2..60);
            (format!("How many anchor bars appear in {subject}?"), n.to_string())
        }
    }
}

struct Sheet {
    number: String,
    /// One word per level, root first.
    path_words: Vec<String>,
    sheet_word: String,
    unit: String,
}

/// Generates a drawing set whose numbers encode the level codes of `spec`.
pub fn generate_synthetic_corpus(spec: &SynthSpec, seed: u64) -> Result<CorpusManifest> {
    spec.validate()?;
    let mut srng = rng(seed, STREAM_STRUCTURE);
    let mut trng = rng(seed, STREAM_TEXT);
    let mut grng = rng(seed, STREAM_GARBLE);
    let mut qrng = rng(seed, STREAM_QUERY);

    let mut mint = WordMint::new();
    for w in spec.vocab.iter().flatten() {
        mint.reserve(w);
    }
    let vocab: Vec<Vec<String>> = if spec.vocab.is_empty() {
        spec.branches
            .iter()
            .map(|&b| (0..b).map(|_| mint.mint(&mut srng)).collect())
            .collect()
    } else {
        spec.vocab.iter().map(|ws| ws.iter().map(|w| w.to_lowercase()).collect()).collect()
    };

    let number_head = match &spec.category_tag {
        Some(tag) => format!("{}{tag}-", spec.prefix),
        None => spec.prefix.clone(),
    };
    let code = |level: usize, ordinal: usize| {
        let w = spec.widths[level];
        let base = if spec.branches[level] < 10usize.pow(w as u32) { 1 } else { 0 };
        format!("{:0w$}", ordinal + base)
    };

    // Enumerate leaves in lexicographic code order.
    let mut sheets = Vec::with_capacity(spec.drawing_total());
    let mut path = vec![0usize; spec.widths.len()];
    loop {
        let number = format!(
            "{number_head}{}",
            path.iter().enumerate().map(|(l, &o)| code(l, o)).collect::<String>()
        );
        sheets.push(Sheet {
            number,
            path_words: path.iter().enumerate().map(|(l, &o)| vocab[l][o].clone()).collect(),
            sheet_word: mint.mint(&mut srng),
            unit: format!("U{}", code(0, path[0])),
        });
        // odometer increment
        let mut l = path.len();
        loop {
            if l == 0 {
                break;
            }
            l -= 1;
            path[l] += 1;
            if path[l] < spec.branches[l] {
                break;
            }
            path[l] = 0;
        }
        if path.iter().all(|&o| o == 0) {
            break;
        }
    }

    let depth = spec.widths.len();
    // Within every ancestor group the same share of titles leaves out the
    // group's word, so the word keeps a fixed support across groups.
    let mut dropped = vec![vec![false; depth]; sheets.len()];
    if spec.title_dropout > 0.0 {
        #[allow(clippy::needless_range_loop)]
        for l in 0..depth.saturating_sub(1) {
            let mut start = 0;
            while start < sheets.len() {
                let key = &sheets[start].path_words[..=l];
                let end = start + sheets[start..].iter().take_while(|s| &s.path_words[..=l] == key).count();
                let mut members: Vec<usize> = (start..end).collect();
                members.shuffle(&mut srng);
                let n_drop = (spec.title_dropout * members.len() as f64).floor() as usize;
                for &i in &members[..n_drop] {
                    dropped[i][l] = true;
                }
                start = end;
            }
        }
    }
    let titles: Vec<String> = sheets
        .iter()
        .zip(&dropped)
        .map(|(s, drop)| {
            let mut words = Vec::new();
            for (l, w) in s.path_words.iter().enumerate() {
                if !drop[l] {
                    words.push(capitalize(w));
                }
            }
            words.push(capitalize(&s.sheet_word));
            words.join(" ")
        })
        .collect();

    let offset = usize::from(spec.toc_page);
    let mut pages = Vec::with_capacity(sheets.len() + offset);
    if spec.toc_page {
        let (src, conf) = toc_source(spec.text_mode);
        let mut text = String::from("DRAWING REGISTER\n");
        if spec.text_mode != TextMode::None {
            for (i, (s, t)) in sheets.iter().zip(&titles).enumerate() {
                text.push_str(&format!("{}  {} ........ {}\n", s.number, t, i + 1 + offset));
            }
        } else {
            text.clear();
        }
        pages.push(PageRecord {
            page_id: page_id(1),
            page_no: 1,
            text,
            text_source: src,
            ocr_confidence: conf,
            unit_id: None,
            image_ref: Some(format!("img/{}.png", page_id(1))),
        });
    }

    let (src, conf) = content_source(spec.text_mode);
    let mut drawings = Vec::with_capacity(sheets.len());
    for (i, (s, title)) in sheets.iter().zip(&titles).enumerate() {
        let page_no = (i + 1 + offset) as u32;
        let pid = page_id(page_no);
        let clean = sheet_text(s, &mut trng);
        let text = match spec.text_mode {
            TextMode::Clean => clean,
            TextMode::Garbled(p) => garble(&clean, p, &mut grng),
            TextMode::None => String::new(),
        };
        pages.push(PageRecord {
            page_id: pid.clone(),
            page_no,
            text,
            text_source: src,
            ocr_confidence: conf,
            unit_id: Some(s.unit.clone()),
            image_ref: Some(format!("img/{pid}.png")),
        });
        drawings.push(DrawingEntry {
            drawing_number: s.number.clone(),
            title: title.clone(),
            page_id: pid,
        });
    }

    let mut queries = Vec::with_capacity(spec.query_count);
    let mut seen = HashSet::new();
    for qi in 0..spec.query_count {
        let (i, qtype, question, answer) = unique_draw(&mut seen, || {
            let i = qrng.gen_range(0..sheets.len());
            let s = &sheets[i];
            let mut words: Vec<&str> = Vec::new();
            for (l, w) in s.path_words.iter().enumerate() {
                if l + 1 == depth || qrng.gen_bool(spec.query_context) {
                    words.push(w);
                }
            }
            let mut subject = words.iter().map(|w| capitalize(w)).collect::<Vec<_>>().join(" ");
            if qrng.gen_bool(spec.locating_fraction) {
                subject.push_str(&format!(" on drawing {}", s.number));
            }
            let qtype = pick_type(&mut qrng);
            let (question, answer) = question_and_answer(qtype, &subject, &mut qrng);
            (i, qtype, question, answer)
        });
        let s = &sheets[i];
        queries.push(QueryRecord {
            query_id: format!("q{:04}", qi + 1),
            question,
            gold_page_ids: vec![drawings[i].page_id.clone()],
            gold_unit_id: Some(s.unit.clone()),
            question_type: qtype,
            gold_answer: answer,
        });
    }

    let manifest = CorpusManifest {
        corpus_id: format!("synth-drawings-{seed}"),
        pages,
        drawings,
        toc: Vec::new(),
        queries,
    };
    manifest.validate()?;
    Ok(manifest)
}

const QUESTION_REDRAWS: usize = 64;

/// Redraws until the question text (third field) is new, so a question
/// identifies its query. Gives up after a bounded number of attempts.
fn unique_draw<A, B, D>(seen: &mut HashSet<String>, mut draw: impl FnMut() -> (A, B, String, D)) -> (A, B, String, D) {
    let mut q = draw();
    for _ in 0..QUESTION_REDRAWS {
        if !seen.contains(&q.2) {
            break;
        }
        q = draw();
    }
    seen.insert(q.2.clone());
    q
}

fn page_id(page_no: u32) -> String {
    format!("p{page_no:04}")
}

/// Clean title-block and annotation text for one sheet.
fn sheet_text(s: &Sheet, rng: &mut ChaCha8Rng) -> String {
    let mut out = format!(
        "DRAWING NO {}\nTITLE {} {}\n",
        s.number,
        s.path_words.iter().map(|w| w.to_uppercase()).collect::<Vec<_>>().join(" "),
        s.sheet_word.to_uppercase()
    );
    let n = rng.gen_range(30..60);
    for i in 0..n {
        if i % 6 == 5 {
            out.push_str(&format!("{} ", rng.gen_range(50..12_000)));
        } else {
            out.push_str(FILLER.choose(rng).unwrap());
            out.push(' ');
        }
    }
    out.push('\n');
    out
}

/// Generates a catalog: page 1 lists categories and start pages, every other
/// page is a product table belonging to exactly one category.
pub fn generate_synthetic_catalog(spec: &CatalogSpec, seed: u64) -> Result<CorpusManifest> {
    spec.validate()?;
    let mut srng = rng(seed, STREAM_STRUCTURE);
    let mut trng = rng(seed, STREAM_TEXT);
    let mut grng = rng(seed, STREAM_GARBLE);
    let mut qrng = rng(seed, STREAM_QUERY);

    const SHAPES: &[&str] = &["beams", "columns", "channels", "angles", "tees", "piles", "hollows", "plates"];
    let mut mint = WordMint::new();
    for s in SHAPES {
        mint.reserve(s);
    }
    let names: Vec<String> = if spec.category_names.is_empty() {
        (0..spec.categories)
            .map(|i| format!("{} {}", mint.mint(&mut srng), SHAPES[i % SHAPES.len()]))
            .collect()
    } else {
        spec.category_names.clone()
    };

    let (csrc, cconf) = content_source(spec.text_mode);
    let mut pages = Vec::new();
    let mut toc = Vec::new();
    // (page index, designations on the page, category index)
    let mut tables: Vec<(usize, Vec<String>, usize)> = Vec::new();
    let mut next_page = 2u32;
    for (ci, name) in names.iter().enumerate() {
        let [lo, hi] = spec.pages_per_category;
        let n = srng.gen_range(lo..=hi) as u32;
        toc.push(TocEntry {
            category: name.to_uppercase(),
            page_start: next_page,
            page_end: next_page + n - 1,
        });
        for _ in 0..n {
            let page_no = next_page;
            next_page += 1;
            let mut designations = Vec::with_capacity(spec.rows_per_page);
            let mut text = format!("{} DIMENSIONS AND PROPERTIES\n", name.to_uppercase());
            text.push_str("DESIGNATION MASS DEPTH WIDTH WEB FLANGE AREA\n");
            for _ in 0..spec.rows_per_page {
                let d = format!(
                    "{}x{}x{}",
                    trng.gen_range(100..1000),
                    trng.gen_range(50..500),
                    trng.gen_range(10..400)
                );
                text.push_str(&format!(
                    "{d} {:.1} {:.1} {:.1} {:.1} {:.1} {:.1}\n",
                    trng.gen_range(10.0..400.0),
                    trng.gen_range(100.0..1000.0),
                    trng.gen_range(50.0..500.0),
                    trng.gen_range(4.0..30.0),
                    trng.gen_range(5.0..50.0),
                    trng.gen_range(10.0..500.0),
                ));
                designations.push(d);
            }
            let text = match spec.text_mode {
                TextMode::Clean => text,
                TextMode::Garbled(p) => garble(&text, p, &mut grng),
                TextMode::None => String::new(),
            };
            tables.push((pages.len() + 1, designations, ci));
            pages.push(PageRecord {
                page_id: page_id(page_no),
                page_no,
                text,
                text_source: csrc,
                ocr_confidence: cconf,
                unit_id: Some(name.to_uppercase()),
                image_ref: Some(format!("img/{}.png", page_id(page_no))),
            });
        }
    }

    let (tsrc, tconf) = toc_source(spec.text_mode);
    let toc_text = if spec.text_mode == TextMode::None {
        String::new()
    } else {
        let mut t = String::from("CONTENTS\n");
        for e in &toc {
            t.push_str(&format!("{} - DIMENSIONS AND PROPERTIES ........ {}\n", e.category, e.page_start));
        }
        t
    };
    pages.insert(
        0,
        PageRecord {
            page_id: page_id(1),
            page_no: 1,
            text: toc_text,
            text_source: tsrc,
            ocr_confidence: tconf,
            unit_id: None,
            image_ref: Some(format!("img/{}.png", page_id(1))),
        },
    );

    let mut queries = Vec::with_capacity(spec.query_count);
    let mut seen = HashSet::new();
    for qi in 0..spec.query_count {
        let (pi, ci, question, v) = unique_draw(&mut seen, || {
            let (pi, designations, ci) = &tables[qrng.gen_range(0..tables.len())];
            let d = designations.choose(&mut qrng).unwrap();
            let what = ["mass per metre", "depth", "flange thickness", "web thickness", "area"]
                .choose(&mut qrng)
                .unwrap();
            let v: f64 = qrng.gen_range(4.0..400.0);
            (pi, ci, format!("What is the {what} of {} {d}?", names[*ci]), v)
        });
        queries.push(QueryRecord {
            query_id: format!("q{:04}", qi + 1),
            question,
            gold_page_ids: vec![pages[*pi].page_id.clone()],
            gold_unit_id: Some(names[*ci].to_uppercase()),
            question_type: QuestionType::Dimension,
            gold_answer: format!("{v:.1}"),
        });
    }

    let manifest = CorpusManifest {
        corpus_id: format!("synth-catalog-{seed}"),
        pages,
        drawings: Vec::new(),
        toc,
        queries,
    };
    manifest.validate()?;
    Ok(manifest)
}
