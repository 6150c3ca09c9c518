//! `lda`: command-line front door of the language design assistant.
//!
//! Exit codes: 0 success, 1 domain error (violations, conflicts, type or
//! runtime errors), 2 usage or I/O error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lda_client::{Client, ClientError};
use lda_core::api::{self, ApiError, CheckReport, FinalizeRequest, FinalizeResult};
use lda_core::canonical::{to_canonical_file, to_canonical_string};
use lda_core::knowledge::{load_kb, query_kb, validate_kb, ConceptId, ConceptKind, Direction, KnowledgeBase, Query};
use lda_core::metalang::{BoxExpr, LanguageDescription};
use lda_core::ppbe::{self, CoverageReport, InferenceConflict, LayoutObservation};
use lda_core::session::{self, Action, Decision, DesignSession, SessionUpdate};
use lda_core::toolgen::{self, Parser as LangParser, Term};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "lda", version, about = "Language design assistant")]
struct Cli {
    /// Print canonical JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Knowledge base file.
    #[arg(long, global = true, env = "LDA_KB", default_value = "kb/core.kb.json")]
    kb: PathBuf,
    /// Evaluation fuel (premise steps).
    #[arg(long, global = true, default_value_t = toolgen::DEFAULT_FUEL)]
    fuel: u64,
    /// Talk to a running service instead of working in-process.
    #[arg(long, global = true, env = "LDA_SERVER")]
    server: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Browse and check the knowledge base.
    #[command(subcommand)]
    Kb(KbCommand),
    /// Make and check design decisions stored in a decision log.
    #[command(subcommand)]
    Design(DesignCommand),
    /// Run the generated tools of a compiled language.
    #[command(subcommand)]
    Run(RunCommand),
    /// Infer formatting rules from example programs.
    #[command(subcommand)]
    Ppbe(PpbeCommand),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Subcommand)]
enum KbCommand {
    /// List concepts.
    List {
        #[arg(long, value_parser = parse_kind)]
        kind: Option<ConceptKind>,
    },
    /// Query concepts; given filters are combined with "and".
    Query(QueryArgs),
    /// Validate a knowledge base file (defaults to --kb).
    Validate { file: Option<PathBuf> },
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: Option<ConceptKind>,
    /// Case-insensitive text in id or description.
    #[arg(long)]
    text: Option<String>,
    /// Concepts related to this id.
    #[arg(long, requires = "relation")]
    related: Option<String>,
    #[arg(long)]
    relation: Option<String>,
    #[arg(long, value_enum, default_value = "outgoing")]
    direction: DirectionArg,
    /// A query as JSON, e.g. '{"by-kind":"attribute"}'.
    #[arg(long, conflicts_with_all = ["kind", "text", "related"])]
    expr: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Outgoing,
    Incoming,
}

#[derive(Subcommand)]
enum DesignCommand {
    /// Start an empty decision log.
    New {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Append one decision to a log and show what changed.
    Apply {
        log: PathBuf,
        #[command(subcommand)]
        action: ActionArg,
    },
    /// Replay a log and report violations, pending consequences and advice.
    Check { log: PathBuf },
    /// Finalize and compile a log into a language description.
    Finalize {
        log: PathBuf,
        #[arg(long, default_value = "lang")]
        name: String,
        #[arg(long, default_value = api::DEFAULT_START)]
        start: String,
        /// Write the description here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ActionArg {
    /// Add a concept to the design
    Select { concept: String },
    /// Drop a concept; nothing else is deselected with it
    Deselect { concept: String },
    /// Take over a pending consequence
    Accept { concept: String },
    /// Choose a value for a concept parameter
    SetParam { concept: String, param: String, value: String },
    /// Respell one of a block's literal tokens
    Rename { concept: String, slot: String, spelling: String },
}

#[derive(Subcommand)]
enum RunCommand {
    Parse(ProgramArgs),
    Format(ProgramArgs),
    Typecheck(ProgramArgs),
    Eval(ProgramArgs),
}

#[derive(Args)]
struct ProgramArgs {
    /// Compiled language description (.desc.json).
    #[arg(long)]
    lang: PathBuf,
    program: PathBuf,
}

#[derive(Subcommand)]
enum PpbeCommand {
    /// Show the layout observations of a directory of `.ex` examples.
    Collect(CorpusArgs),
    /// Infer Box rules from a directory of `.ex` examples.
    Infer {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Write the description with inferred rules filling its gaps.
        #[arg(long)]
        overlay: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    lang: PathBuf,
    dir: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:7878")]
    addr: String,
    /// Persist decision logs here and restore them on start.
    #[arg(long)]
    snapshot_dir: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<ConceptKind, String> {
    ConceptKind::from_name(s).ok_or_else(|| {
        let all: Vec<&str> = ConceptKind::ALL.iter().map(|k| k.name()).collect();
        format!("expected one of {}", all.join(", "))
    })
}

/// A failed command: exit code plus the error to report.
struct Fail {
    code: u8,
    error: ApiError,
}

fn usage(code: &str, message: impl Into<String>) -> Fail {
    Fail { code: 2, error: ApiError::new(code, message) }
}

fn domain(error: ApiError) -> Fail {
    Fail { code: 1, error }
}

fn io_fail(path: &Path, e: std::io::Error) -> Fail {
    usage("io-error", format!("{}: {e}", path.display()))
}

impl From<ClientError> for Fail {
    fn from(e: ClientError) -> Self {
        match e {
            ClientError::Api { status, error } if status == 409 || status == 422 => domain(error),
            ClientError::Api { error, .. } => usage(&error.code.clone(), error.message),
            other => usage("service-unavailable", other.to_string()),
        }
    }
}

/// What a successful command prints and its exit code (1 when the result
/// itself reports problems, as `design check` does).
struct Output {
    text: String,
    code: u8,
}

impl Output {
    fn new(text: String) -> Self {
        Output { text, code: 0 }
    }
}

struct Ctx {
    json: bool,
    kb_path: PathBuf,
    fuel: u64,
    server: Option<Client>,
}

impl Ctx {
    fn kb(&self) -> Result<KnowledgeBase, Fail> {
        let text = std::fs::read_to_string(&self.kb_path).map_err(|e| io_fail(&self.kb_path, e))?;
        load_kb(&text).map_err(|e| usage("bad-kb", format!("{}: {e}", self.kb_path.display())))
    }

    /// JSON when asked, otherwise the given text.
    fn show<T: Serialize>(&self, data: &T, text: impl FnOnce() -> String) -> Output {
        if self.json {
            Output::new(to_canonical_file(data))
        } else {
            Output::new(text())
        }
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| io_fail(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), Fail> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_fail(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_fail(path, e))
}

fn read_log(path: &Path) -> Result<Vec<Decision>, Fail> {
    serde_json::from_str(&read(path)?).map_err(|e| usage("bad-log", format!("{}: {e}", path.display())))
}

fn read_desc(path: &Path) -> Result<LanguageDescription, Fail> {
    LanguageDescription::from_json(&read(path)?).map_err(|e| usage("bad-description", format!("{}: {e}", path.display())))
}

fn lines<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|i| format!("{i}\n")).collect()
}

async fn kb_command(ctx: &Ctx, cmd: KbCommand) -> Result<Output, Fail> {
    match cmd {
        KbCommand::List { kind } => {
            let mut all = match &ctx.server {
                Some(c) => c.concepts().await?,
                None => api::concepts(&ctx.kb()?),
            };
            all.retain(|c| kind.is_none_or(|k| c.kind == k));
            Ok(ctx.show(&all, || lines(all.iter().map(|c| format!("{}\t{}\t{}", c.id, c.kind, c.description)))))
        }
        KbCommand::Query(args) => {
            let q = build_query(args)?;
            let ids = match &ctx.server {
                Some(c) => c.query(&q).await?,
                None => query_kb(&ctx.kb()?, &q).map_err(|e| domain(ApiError::domain(&e)))?,
            };
            Ok(ctx.show(&ids, || lines(&ids)))
        }
        KbCommand::Validate { file } => {
            let path = file.unwrap_or_else(|| ctx.kb_path.clone());
            let doc: KnowledgeBase = serde_json::from_str(&read(&path)?)
                .map_err(|e| domain(ApiError::new("kb-parse-error", format!("{}: {e}", path.display()))))?;
            let report = validate_kb(&doc);
            let mut out = ctx.show(&report, || {
                if report.is_empty() {
                    format!("{}: valid, {} concepts\n", path.display(), doc.concepts.len())
                } else {
                    lines(&report.issues)
                }
            });
            out.code = u8::from(!report.is_empty());
            Ok(out)
        }
    }
}

fn build_query(args: QueryArgs) -> Result<Query, Fail> {
    if let Some(expr) = args.expr {
        return serde_json::from_str(&expr).map_err(|e| usage("bad-query", e.to_string()));
    }
    let mut parts = Vec::new();
    if let Some(k) = args.kind {
        parts.push(Query::ByKind(k));
    }
    if let Some(t) = args.text {
        parts.push(Query::ByText(t));
    }
    if let (Some(id), Some(rel)) = (args.related, args.relation) {
        let dir = match args.direction {
            DirectionArg::Outgoing => Direction::Outgoing,
            DirectionArg::Incoming => Direction::Incoming,
        };
        parts.push(Query::related(&id, &rel, dir));
    }
    parts
        .into_iter()
        .reduce(Query::and)
        .ok_or_else(|| usage("bad-query", "give at least one of --kind, --text, --related or --expr"))
}

/// Replays a log, in-process or on the service.
async fn replay(ctx: &Ctx, log: &[Decision]) -> Result<(Option<String>, DesignSession), Fail> {
    match &ctx.server {
        Some(c) => {
            let view = c.replay(log).await?;
            Ok((Some(view.session_id), view.session))
        }
        None => {
            let kb = ctx.kb()?;
            let s = session::replay(&kb, log).map_err(|e| domain(ApiError::domain(&e.error)))?;
            Ok((None, s))
        }
    }
}

fn session_text(s: &DesignSession) -> String {
    let mut out = format!("state-hash {}\n", s.state_hash);
    out += &format!("selected: {}\n", s.selected.iter().map(ConceptId::as_str).collect::<Vec<_>>().join(", "));
    if !s.pending.is_empty() {
        out += &format!("pending: {}\n", s.pending.iter().map(ConceptId::as_str).collect::<Vec<_>>().join(", "));
    }
    for v in &s.violations {
        out += &format!("violation {v}\n");
    }
    out
}

fn check_text(r: &CheckReport) -> String {
    let d = &r.diagnostics;
    let mut out = String::new();
    for v in &d.violations {
        out += &format!("violation {v}\n");
    }
    if !d.pending.is_empty() {
        out += &format!("pending: {}\n", d.pending.iter().map(ConceptId::as_str).collect::<Vec<_>>().join(", "));
    }
    for a in &d.advice {
        out += &format!("advice [{}] {}: {}\n", a.severity.name(), a.id, a.message);
    }
    out += &format!(
        "{} violation(s), {} pending, {} advice; state-hash {}\n",
        d.violations.len(),
        d.pending.len(),
        d.advice.len(),
        r.state_hash
    );
    out
}

async fn design_command(ctx: &Ctx, cmd: DesignCommand) -> Result<Output, Fail> {
    match cmd {
        DesignCommand::New { out } => {
            let (_, s) = replay(ctx, &[]).await?;
            if let Some(p) = &out {
                write(p, &to_canonical_file(&s.log))?;
            }
            Ok(ctx.show(&s, || session_text(&s)))
        }
        DesignCommand::Apply { log: path, action } => {
            let mut log = if path.exists() { read_log(&path)? } else { Vec::new() };
            let (id, s) = replay(ctx, &log).await?;
            let action = match action {
                ActionArg::Select { concept } => Action::Select { concept: concept.as_str().into() },
                ActionArg::Deselect { concept } => Action::Deselect { concept: concept.as_str().into() },
                ActionArg::Accept { concept } => Action::AcceptConsequence { concept: concept.as_str().into() },
                ActionArg::SetParam { concept, param, value } => {
                    Action::SetParam { concept: concept.as_str().into(), param, value }
                }
                ActionArg::Rename { concept, slot, spelling } => {
                    Action::RenameToken { concept: concept.as_str().into(), slot, spelling }
                }
            };
            let decision = Decision::new(log.len() as u64 + 1, action);
            let update = match (&ctx.server, id) {
                (Some(c), Some(id)) => {
                    let out = c.decide(&id, &decision).await?;
                    SessionUpdate { session: out.session, delta: out.delta }
                }
                _ => session::apply_decision(&ctx.kb()?, &s, decision.clone())
                    .map_err(|e| domain(ApiError::domain(&e)))?,
            };
            log.push(decision);
            write(&path, &to_canonical_file(&log))?;
            Ok(ctx.show(&update, || {
                let d = &update.delta;
                let mut out = session_text(&update.session);
                for p in &d.newly_pending {
                    out += &format!("new consequence: {p}\n");
                }
                for v in &d.newly_violated {
                    out += &format!("new violation {v}\n");
                }
                for a in &d.newly_advised {
                    out += &format!("new advice [{}] {}: {}\n", a.severity.name(), a.id, a.message);
                }
                out
            }))
        }
        DesignCommand::Check { log } => {
            let log = read_log(&log)?;
            let report = match &ctx.server {
                Some(c) => {
                    let view = c.replay(&log).await?;
                    c.diagnostics(&view.session_id).await?
                }
                None => {
                    let kb = ctx.kb()?;
                    let s = session::replay(&kb, &log).map_err(|e| domain(ApiError::domain(&e.error)))?;
                    CheckReport::new(&s, session::diagnostics(&kb, &s))
                }
            };
            let mut out = ctx.show(&report, || check_text(&report));
            out.code = u8::from(report.needs_attention());
            Ok(out)
        }
        DesignCommand::Finalize { log, name, start, out } => {
            let log = read_log(&log)?;
            let req = FinalizeRequest { name, start };
            let result: FinalizeResult = match &ctx.server {
                Some(c) => {
                    let view = c.replay(&log).await?;
                    c.finalize(&view.session_id, &req).await?
                }
                None => {
                    let kb = ctx.kb()?;
                    let s = session::replay(&kb, &log).map_err(|e| domain(ApiError::domain(&e.error)))?;
                    api::finalize_session(&kb, &s, &req).map_err(domain)?
                }
            };
            let desc_text = result.description.to_json();
            match &out {
                Some(p) => {
                    write(p, &desc_text)?;
                    Ok(ctx.show(&result, || {
                        format!(
                            "wrote {} ({} productions, {} blocks)\n",
                            p.display(),
                            result.description.grammar.productions.len(),
                            result.design.blocks.len()
                        )
                    }))
                }
                None => Ok(ctx.show(&result, || desc_text.clone())),
            }
        }
    }
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct FormatOut {
    formatted: String,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct TypeOut {
    r#type: String,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct EvalOut {
    value: toolgen::Value,
    store: toolgen::Store,
}

fn run_command(ctx: &Ctx, cmd: RunCommand) -> Result<Output, Fail> {
    let (args, which) = match cmd {
        RunCommand::Parse(a) => (a, 0),
        RunCommand::Format(a) => (a, 1),
        RunCommand::Typecheck(a) => (a, 2),
        RunCommand::Eval(a) => (a, 3),
    };
    let desc = read_desc(&args.lang)?;
    let text = read(&args.program)?;
    let term: Term = LangParser::new(&desc.grammar).parse(&text).map_err(|e| domain(ApiError::domain(&e)))?;
    match which {
        0 => Ok(ctx.show(&term, || format!("{}\n", term))),
        1 => {
            let formatted = toolgen::format_term(&desc, &term).map_err(|e| domain(ApiError::domain(&e)))?;
            let shown = formatted.clone();
            Ok(ctx.show(&FormatOut { formatted }, || shown))
        }
        2 => {
            let ty = toolgen::typecheck(&desc, &term).map_err(|e| {
                let mut err = ApiError::domain(&e);
                if let toolgen::TypecheckError::TypeErrors { errors } = &e {
                    err.message = errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
                }
                domain(err)
            })?;
            Ok(ctx.show(&TypeOut { r#type: ty.name().to_string() }, || format!("{ty}\n")))
        }
        _ => {
            if ctx.fuel == 0 {
                return Err(usage("bad-fuel", "--fuel must be at least 1"));
            }
            let (value, store) =
                toolgen::evaluate(&desc, &term, ctx.fuel).map_err(|e| domain(ApiError::domain(&e)))?;
            let out = EvalOut { value, store };
            Ok(ctx.show(&out, || {
                if out.store.output.is_empty() {
                    format!("{}\n", out.value)
                } else {
                    lines(&out.store.output)
                }
            }))
        }
    }
}

fn corpus(dir: &Path) -> Result<Vec<(String, String)>, Fail> {
    let entries = std::fs::read_dir(dir).map_err(|e| io_fail(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| io_fail(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "ex") {
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            out.push((name, read(&path)?));
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct InferOut {
    rules: BTreeMap<String, String>,
    conflicts: Vec<InferenceConflict>,
    coverage: CoverageReport,
}

fn ppbe_command(ctx: &Ctx, cmd: PpbeCommand) -> Result<Output, Fail> {
    let (args, overlay) = match cmd {
        PpbeCommand::Collect(a) => (a, None),
        PpbeCommand::Infer { corpus, overlay } => (corpus, Some(overlay)),
    };
    let desc = read_desc(&args.lang)?;
    let examples = corpus(&args.dir)?;
    let obs: Vec<LayoutObservation> =
        ppbe::collect_layouts(&desc.grammar, &examples).map_err(|e| domain(ApiError::domain(&e)))?;
    let Some(overlay) = overlay else {
        return Ok(ctx.show(&obs, || {
            lines(obs.iter().map(|o| {
                let gaps: Vec<String> = o.gaps().iter().map(|g| g.map_or("/".into(), |g| g.to_string())).collect();
                format!("{}\t{}@{}\tgaps [{}]", o.label, o.instance.example, o.instance.span.start, gaps.join(","))
            }))
        }));
    };
    let coverage = ppbe::coverage(&desc.grammar, &obs);
    let (rules, conflicts): (BTreeMap<String, BoxExpr>, _) = match ppbe::infer_rules(&obs) {
        Ok(r) => (r, Vec::new()),
        Err(c) => (BTreeMap::new(), c),
    };
    if let (Some(path), true) = (&overlay, conflicts.is_empty()) {
        write(path, &ppbe::overlay(&desc, &rules).to_json())?;
    }
    let out = InferOut {
        rules: rules.iter().map(|(l, b)| (l.clone(), b.to_string())).collect(),
        conflicts,
        coverage,
    };
    let mut o = ctx.show(&out, || {
        let mut t = ppbe::rules_text(&rules);
        for c in &out.conflicts {
            t += &format!("conflict {c}\n");
        }
        if !out.coverage.missing.is_empty() {
            t += &format!("no examples for: {}\n", out.coverage.missing.join(", "));
        }
        t
    });
    o.code = u8::from(!out.conflicts.is_empty());
    Ok(o)
}

async fn serve(ctx: &Ctx, args: ServeArgs) -> Result<Output, Fail> {
    let kb = ctx.kb()?;
    let state = lda_service::AppState::new(kb, args.snapshot_dir);
    let restored = state.restore().await.map_err(|e| usage("snapshot-error", e.to_string()))?;
    let listener = tokio::net::TcpListener::bind(&args.addr)
        .await
        .map_err(|e| usage("bind-failed", format!("{}: {e}", args.addr)))?;
    let addr = listener.local_addr().map_err(|e| usage("bind-failed", e.to_string()))?;
    eprintln!("lda service listening on http://{addr} ({restored} session(s) restored)");
    lda_service::serve(listener, state).await.map_err(|e| usage("serve-failed", e.to_string()))?;
    Ok(Output::new(String::new()))
}

async fn dispatch(ctx: &Ctx, cmd: Command) -> Result<Output, Fail> {
    match cmd {
        Command::Kb(c) => kb_command(ctx, c).await,
        Command::Design(c) => design_command(ctx, c).await,
        Command::Run(c) => run_command(ctx, c),
        Command::Ppbe(c) => ppbe_command(ctx, c),
        Command::Serve(a) => serve(ctx, a).await,
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_env("LDA_LOG"))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let ctx = Ctx { json: cli.json, kb_path: cli.kb, fuel: cli.fuel, server: cli.server.map(Client::new) };
    match dispatch(&ctx, cli.command).await {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.code)
        }
        Err(fail) => {
            if ctx.json {
                eprintln!("{}", to_canonical_string(&fail.error));
            } else {
                eprintln!("error: {}", fail.error.message);
            }
            ExitCode::from(fail.code)
        }
    }
}
