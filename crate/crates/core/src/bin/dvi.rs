use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use dvi_core::corpus::{load_manifest, parse_toc_text, save_manifest, CorpusManifest, CorpusSpec};
use dvi_core::eval::{correctness, head_to_head, qa_metrics, retrieval_metrics, EvalReport, MethodReport};
use dvi_core::hdnc::run_hdnc;
use dvi_core::indexer::{build_index, BuildOptions, FusionMode, FusionPolicy, IndexBundle, IndexMode};
use dvi_core::pipeline::{
    answer_query, build_pi_index, pi_search, run_queries, AnswerResult, CountingEmbedder, CountingVlm,
    DescriberMode, Embedder, MockDescriber, MockEmbedder, MockRenderer, VlmClient, VlmSelector,
    DEFAULT_MAX_INFLIGHT,
};
use dvi_core::retrieval::{build_postings, search, Bm25Params};
use dvi_core::{Error, Result};

#[derive(Parser)]
#[command(name = "dvi", version, about = "Deferred visual ingestion: index drawing sets without a VLM, ask it only at query time")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Corpus manifests.
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Hierarchy discovery from drawing numbers.
    #[command(subcommand)]
    Hdnc(HdncCmd),
    /// Build an index bundle from a manifest.
    Index(IndexArgs),
    /// BM25 search over an index bundle.
    Search(SearchArgs),
    /// Retrieve, then ask the VLM.
    Ask(AskArgs),
    /// Retrieval and QA metrics over the manifest's queries.
    Eval(EvalArgs),
}

#[derive(Subcommand)]
enum CorpusCmd {
    /// Generate a synthetic corpus from a JSON spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse drawing numbers and titles out of TOC text.
    Toc {
        #[arg(long)]
        text: PathBuf,
        /// Regex matching one drawing number.
        #[arg(long)]
        pattern: String,
        /// Attach entries to this manifest's pages and replace its drawings.
        #[arg(long, requires = "out")]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum HdncCmd {
    /// Print the discovered scheme, split, level counts and Jaccard check.
    Inspect {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Hdnc,
    #[value(name = "toc_only", alias = "toc-only")]
    TocOnly,
    #[value(name = "fulltext_only", alias = "fulltext-only")]
    FulltextOnly,
}

impl From<ModeArg> for IndexMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Hdnc => IndexMode::Hdnc,
            ModeArg::TocOnly => IndexMode::TocOnly,
            ModeArg::FulltextOnly => IndexMode::FulltextOnly,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FusionArg {
    Always,
    Never,
    Adaptive,
}

impl From<FusionArg> for FusionMode {
    fn from(f: FusionArg) -> Self {
        match f {
            FusionArg::Always => FusionMode::Always,
            FusionArg::Never => FusionMode::Never,
            FusionArg::Adaptive => FusionMode::Adaptive,
        }
    }
}

#[derive(Args)]
struct BuildFlags {
    #[arg(long, value_enum, default_value = "hdnc")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "adaptive")]
    fusion: FusionArg,
    #[arg(long, default_value_t = dvi_core::indexer::DEFAULT_OCR_THRESHOLD)]
    ocr_threshold: f64,
    /// Index the TOC page as an empty document.
    #[arg(long)]
    exclude_toc_page: bool,
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    build: BuildFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    query: String,
    #[arg(long, default_value_t = 3)]
    k: usize,
}

#[derive(Args)]
struct AskArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    question: String,
    /// mock:oracle | mock:lossy:<c> | mock:fixed:<answer> | cmd | http
    #[arg(long, default_value = "cmd")]
    vlm: String,
    /// Needed by the mock VLMs for their answer key.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Dvi,
    Pi,
    Both,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Prebuilt bundle for the dvi method; built from the manifest otherwise.
    #[arg(long)]
    index: Option<PathBuf>,
    #[command(flatten)]
    build: BuildFlags,
    #[arg(long, value_enum, default_value = "dvi")]
    method: MethodArg,
    /// Answer with this VLM; retrieval metrics only when absent.
    #[arg(long)]
    vlm: Option<String>,
    /// Page describer for pi: mock:blind | mock:homogenized | cmd | http
    #[arg(long, default_value = "mock:blind")]
    describer: String,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_INFLIGHT)]
    max_inflight: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out).map_err(|e| Error::io("<stdout>", e))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut buf = serde_json::to_vec_pretty(v)?;
    buf.push(b'\n');
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

fn policy(b: &BuildFlags) -> Result<FusionPolicy> {
    if !(0.0..=1.0).contains(&b.ocr_threshold) {
        return Err(Error::invalid(format!("--ocr-threshold {} outside [0, 1]", b.ocr_threshold)));
    }
    Ok(FusionPolicy {
        mode: b.fusion.into(),
        ocr_confidence_threshold: b.ocr_threshold,
    })
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("--k must be at least 1"));
    }
    Ok(())
}

fn make_bundle(m: &CorpusManifest, b: &BuildFlags) -> Result<IndexBundle> {
    let policy = policy(b)?;
    let mode: IndexMode = b.mode.into();
    let hierarchy = match mode {
        IndexMode::Hdnc => Some(run_hdnc(&m.drawings)?.0),
        _ => None,
    };
    build_index(m, hierarchy.as_ref(), policy, mode, BuildOptions { exclude_toc_page: b.exclude_toc_page })
}

fn cmd_corpus(c: CorpusCmd) -> Result<()> {
    match c {
        CorpusCmd::Synth { spec, seed, out } => {
            let raw = fs::read_to_string(&spec).map_err(|e| Error::io(&spec, e))?;
            let mut m = CorpusSpec::from_json(&raw)?.generate(seed)?;
            if let Some(stem) = out.file_stem() {
                m.corpus_id = stem.to_string_lossy().into_owned();
            }
            save_manifest(&m, &out)?;
            eprintln!(
                "wrote {}: {} pages, {} drawings, {} queries",
                out.display(),
                m.pages.len(),
                m.drawings.len(),
                m.queries.len()
            );
        }
        CorpusCmd::Toc { text, pattern, manifest, out } => {
            let raw = fs::read_to_string(&text).map_err(|e| Error::io(&text, e))?;
            let lines: Vec<&str> = raw.lines().collect();
            let parsed = parse_toc_text(&lines, &pattern)?;
            let entries: Vec<_> = parsed
                .entries
                .iter()
                .zip(&parsed.page_numbers)
                .map(|(e, no)| json!({"number": e.drawing_number, "title": e.title, "page_no": no}))
                .collect();
            let mut report = json!({"entries": entries, "skipped": parsed.skipped});
            if let Some(mpath) = manifest {
                let mut m = load_manifest(&mpath)?;
                m.drawings = parsed.attach_pages(&m.pages);
                m.validate()?;
                let out = out.expect("clap requires --out with --manifest");
                save_manifest(&m, &out)?;
                report["attached"] = json!(m.drawings.len());
            } else if let Some(out) = out {
                write_json(&out, &report)?;
            }
            eprintln!("{} entries, {} lines skipped", parsed.entries.len(), parsed.skipped);
            print_json(&report)?;
        }
    }
    Ok(())
}

fn cmd_hdnc(c: HdncCmd) -> Result<()> {
    let HdncCmd::Inspect { manifest } = c;
    let m = load_manifest(&manifest)?;
    let (h, jac) = run_hdnc(&m.drawings)?;
    eprintln!(
        "prefix {:?}, split {:?}, levels {:?}, jaccard pass rate {:.3}",
        h.scheme.common_prefix,
        h.strategy.widths,
        h.level_counts(),
        jac.pass_rate
    );
    print_json(&json!({
        "scheme": h.scheme,
        "strategy": h.strategy,
        "level_counts": h.level_counts(),
        "non_conforming": h.non_conforming,
        "labels_by_page": h.labels_by_page,
        "jaccard": jac,
    }))
}

fn cmd_index(a: IndexArgs) -> Result<()> {
    let m = load_manifest(&a.manifest)?;
    let bundle = make_bundle(&m, &a.build)?;
    bundle.save(&a.out)?;
    let level_counts = bundle.hierarchy.as_ref().map(|h| h.level_counts());
    eprintln!(
        "indexed {} pages ({} fused, {} skipped) into {}",
        bundle.documents.len(),
        bundle.build_stats.fused_page_count,
        bundle.build_stats.skipped_page_count,
        a.out.display()
    );
    print_json(&json!({
        "corpus_id": bundle.corpus_id,
        "build_stats": bundle.build_stats,
        "policy": bundle.policy,
        "document_count": bundle.documents.len(),
        "level_counts": level_counts,
        "strategy": bundle.hierarchy.as_ref().map(|h| &h.strategy),
        "toc_pages": bundle.documents.iter().filter(|d| d.is_toc_page).map(|d| &d.page_id).collect::<Vec<_>>(),
    }))
}

fn cmd_search(a: SearchArgs) -> Result<()> {
    check_k(a.k)?;
    let bundle = IndexBundle::load(&a.index)?;
    let idx = build_postings(&bundle);
    let hits = search(&a.query, &idx, &Bm25Params::with_top_k(a.k));
    eprintln!("{} hits", hits.len());
    print_json(&hits)
}

fn manifest_for_mock(sel: &VlmSelector, path: Option<&Path>) -> Result<CorpusManifest> {
    match (sel, path) {
        (_, Some(p)) => load_manifest(p),
        (VlmSelector::Mock(_), None) => Err(Error::invalid("mock VLMs need --manifest for their answer key")),
        _ => Ok(CorpusManifest::default()),
    }
}

fn cmd_ask(a: AskArgs) -> Result<()> {
    check_k(a.k)?;
    let sel: VlmSelector = a.vlm.parse()?;
    let m = manifest_for_mock(&sel, a.manifest.as_deref())?;
    let bundle = IndexBundle::load(&a.index)?;
    let vlm = sel.build(&m, a.seed)?;
    let idx = build_postings(&bundle);
    let res = answer_query("ask", &a.question, &idx, &Bm25Params::with_top_k(a.k), &MockRenderer, &vlm);
    print_json(&res)?;
    if res.retrieved.is_empty() {
        eprintln!("no pages located");
    } else if let Some(e) = &res.error {
        return Err(Error::Adapter(e.clone()));
    } else {
        eprintln!("{}", res.answer);
    }
    Ok(())
}

fn describer(spec: &str, m: &CorpusManifest, seed: u64) -> Result<Box<dyn VlmClient>> {
    match spec {
        "cmd" | "http" => spec.parse::<VlmSelector>()?.build(m, seed),
        other => Ok(Box::new(MockDescriber::new(other.parse::<DescriberMode>()?, m))),
    }
}

struct MethodRun {
    report: MethodReport,
    correct: Option<BTreeMap<String, bool>>,
    adapter_errors: usize,
}

fn evaluate(
    name: &str,
    m: &CorpusManifest,
    results: Vec<AnswerResult>,
    answered: bool,
    k: usize,
    vlm_calls: u64,
    index_calls: u64,
) -> Result<MethodRun> {
    let ranked: BTreeMap<String, Vec<String>> = results
        .iter()
        .map(|r| (r.query_id.clone(), r.retrieved.iter().map(|h| h.page_id.clone()).collect()))
        .collect();
    let mut ks: Vec<usize> = vec![1, 3, 5, k];
    ks.sort_unstable();
    ks.dedup();
    ks.retain(|&x| x <= k);
    let retrieval = retrieval_metrics(&ranked, m, &ks)?;
    let (qa, correct) = if answered {
        let answers: BTreeMap<String, String> =
            results.iter().map(|r| (r.query_id.clone(), r.answer.clone())).collect();
        (Some(qa_metrics(&answers, &ranked, m, k)?), Some(correctness(&answers, m)?))
    } else {
        (None, None)
    };
    Ok(MethodRun {
        report: MethodReport {
            method: name.to_string(),
            retrieval,
            qa,
            vlm_calls,
            index_calls,
        },
        correct,
        adapter_errors: results.iter().filter(|r| r.error.is_some()).count(),
    })
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    check_k(a.k)?;
    let m = load_manifest(&a.manifest)?;
    let sel = a.vlm.as_deref().map(str::parse::<VlmSelector>).transpose()?;
    let vlm = sel.as_ref().map(|s| s.build(&m, a.seed)).transpose()?.map(CountingVlm::new);
    let vlm_ref = vlm.as_ref().map(|v| v as &dyn VlmClient);
    let params = Bm25Params::with_top_k(a.k);
    let mut runs = Vec::new();

    if matches!(a.method, MethodArg::Dvi | MethodArg::Both) {
        let bundle = match &a.index {
            Some(p) => IndexBundle::load(p)?,
            None => make_bundle(&m, &a.build)?,
        };
        let idx = build_postings(&bundle);
        let before = vlm.as_ref().map_or(0, |v| v.calls());
        let results = run_queries(&m.queries, |q| Ok(search(q, &idx, &params)), &MockRenderer, vlm_ref, a.max_inflight)?;
        let calls = vlm.as_ref().map_or(0, |v| v.calls()) - before;
        runs.push(evaluate("dvi", &m, results, vlm.is_some(), a.k, calls, 0)?);
    }
    if matches!(a.method, MethodArg::Pi | MethodArg::Both) {
        let d = CountingVlm::new(describer(&a.describer, &m, a.seed)?);
        let embedder = CountingEmbedder::new(MockEmbedder::new(a.seed));
        let pi = build_pi_index(&m, &d, &embedder)?;
        let e: &dyn Embedder = &embedder;
        let before = vlm.as_ref().map_or(0, |v| v.calls());
        let results = run_queries(&m.queries, |q| pi_search(q, &pi, e, a.k), &MockRenderer, vlm_ref, a.max_inflight)?;
        let calls = vlm.as_ref().map_or(0, |v| v.calls()) - before;
        runs.push(evaluate("pi", &m, results, vlm.is_some(), a.k, calls, d.calls())?);
    }

    let h2h = match runs.as_slice() {
        [x, y] => match (&x.correct, &y.correct) {
            (Some(cx), Some(cy)) => Some(head_to_head(cx, cy)?),
            _ => None,
        },
        _ => None,
    };
    let adapter_errors: usize = runs.iter().map(|r| r.adapter_errors).sum();
    let report = EvalReport {
        corpus_id: m.corpus_id.clone(),
        k: a.k,
        methods: runs.into_iter().map(|r| r.report).collect(),
        head_to_head: h2h,
    };
    if let Some(out) = &a.out {
        write_json(out, &report)?;
    }
    print_json(&report)?;
    eprint!("{}", report.summary());
    if adapter_errors > 0 {
        return Err(Error::Adapter(format!("{adapter_errors} queries failed in the VLM adapter")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Corpus(c) => cmd_corpus(c),
        Cmd::Hdnc(c) => cmd_hdnc(c),
        Cmd::Index(a) => cmd_index(a),
        Cmd::Search(a) => cmd_search(a),
        Cmd::Ask(a) => cmd_ask(a),
        Cmd::Eval(a) => cmd_eval(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Adapter(_) => 3,
                _ => 2,
            })
        }
    }
}
