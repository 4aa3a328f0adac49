use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use chemsearch::views::{self, QueryParams, SearchPayload};
use chemsearch::{ApiError, AppState, StaticDirs};
use chemsearch_core::corpus::{Corpus, CorpusError};
use chemsearch_core::linker::{LinkerError, MentionPatterns};
use chemsearch_core::par::Execution;
use chemsearch_core::querylang::FragmentVocabulary;
use chemsearch_core::search::{Engine, EngineConfig, SearchError};
use chemsearch_core::snapshot::{self, SnapshotError};

const DEFAULT_SNAPSHOT_NAME: &str = "chemsearch.snapshot";

#[derive(Parser)]
#[command(name = "chemsearch", version, about = "Multimodal search over chemistry literature passages")]
struct Cli {
    /// Run every scan on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Index management.
    Index {
        #[command(subcommand)]
        command: IndexCommand,
    },
    /// Run one query and print the grouped results.
    Search {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        text: Option<String>,
        /// Comma-separated SMILES.
        #[arg(long)]
        smiles: Option<String>,
        /// Reaction SMARTS, `reactants>agents>products`.
        #[arg(long)]
        reaction: Option<String>,
        #[arg(short = 'k', long = "k")]
        k: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Print corpus statistics.
    Stats {
        #[arg(long)]
        snapshot: PathBuf,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Built UI bundle, served under /assets.
        #[arg(long)]
        ui: Option<PathBuf>,
        /// Directory of source PDFs, served under /assets/documents.
        #[arg(long)]
        documents: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum IndexCommand {
    /// Validate a corpus directory, link mentions and write a snapshot.
    Build {
        #[arg(long)]
        corpus: PathBuf,
        /// Defaults to `chemsearch.snapshot` inside the corpus directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fragment vocabulary for systematic-name tokenization, one word per line.
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Mention patterns, one regular expression per line.
        #[arg(long)]
        patterns: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Query(ApiError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Linker(#[from] LinkerError),
    #[error(transparent)]
    Index(#[from] SearchError),
    #[error("cannot read {path}: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("server failed: {0}")]
    Serve(std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Query(e) if e.is_client_error() => 1,
            _ => 2,
        }
    }
}

impl From<ApiError> for CliError {
    fn from(e: ApiError) -> Self {
        CliError::Query(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match run(cli.command, exec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Query(api) = &e {
                if let Some(c) = &api.component {
                    eprintln!("  offending component: {c}");
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command, exec: Execution) -> Result<(), CliError> {
    match command {
        Command::Index {
            command: IndexCommand::Build {
                corpus,
                out,
                vocab,
                patterns,
            },
        } => {
            let out = out.unwrap_or_else(|| corpus.join(DEFAULT_SNAPSHOT_NAME));
            build_index(&corpus, &out, vocab.as_deref(), patterns.as_deref(), exec)
        }
        Command::Search {
            snapshot: path,
            text,
            smiles,
            reaction,
            k,
            format,
        } => {
            let engine = snapshot::load(&path, exec)?;
            let params = QueryParams {
                text,
                smiles,
                reaction_smarts: reaction,
                k,
            };
            let payload = views::run_search(&engine, params)?;
            match format {
                Format::Json => println!("{}", to_json(&payload)),
                Format::Table => print!("{}", render_table(&payload)),
            }
            Ok(())
        }
        Command::Stats { snapshot: path } => {
            let engine = snapshot::load(&path, exec)?;
            println!("{}", to_json(&views::stats(&engine)));
            Ok(())
        }
        Command::Serve {
            snapshot: path,
            port,
            host,
            ui,
            documents,
        } => {
            let state = AppState::from_snapshot(&path, exec)?;
            serve(state, SocketAddr::new(host, port), StaticDirs { ui, documents })
        }
    }
}

fn build_index(
    corpus_dir: &Path,
    out: &Path,
    vocab: Option<&Path>,
    patterns: Option<&Path>,
    exec: Execution,
) -> Result<(), CliError> {
    let corpus = Corpus::load(corpus_dir)?;
    let mut config = EngineConfig::default();
    if let Some(path) = vocab {
        config.vocabulary = FragmentVocabulary::from_file(path).map_err(|source| CliError::Config {
            path: path.to_path_buf(),
            source,
        })?;
    }
    if let Some(path) = patterns {
        config.linker.patterns = MentionPatterns::from_file(path)?;
    }
    let engine = Engine::build(corpus, config, exec)?;
    snapshot::save(&engine, out)?;
    let s = engine.stats();
    eprintln!(
        "indexed {} of {} passages, {} compounds, {} reactions, {} links -> {}",
        s.passages_indexed,
        s.passages_extracted,
        s.unique_compounds,
        s.reactions,
        s.links,
        out.display()
    );
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("payload serializes")
}

fn excerpt(text: &str, max: usize) -> String {
    let mut s: String = text.chars().take(max).collect();
    if text.chars().count() > max {
        s.push_str("...");
    }
    s
}

fn render_table(payload: &SearchPayload) -> String {
    let mut out = format!(
        "{} results from {} candidates\n{:>4}  {:>7}  {:>5}  {:>5}  {:<16} {:>4}  text\n",
        payload.total_results, payload.candidates, "rank", "bm25", "norm", "match", "passage", "page"
    );
    for group in &payload.documents {
        out.push_str(&format!("== {} ({})\n", group.title, group.doc_id));
        for v in &group.results {
            let r = &v.result;
            out.push_str(&format!(
                "{:>4}  {:>7.4}  {:>5.3}  {:>5}  {:<16} {:>4}  {}\n",
                r.rank,
                r.text_score,
                r.normalized_text_score,
                r.matched_smiles.len(),
                r.passage_id,
                r.page,
                excerpt(&r.text, 60)
            ));
            for s in &v.reaction_summaries {
                out.push_str(&format!("{:>46}{}: {}\n", "", s.reaction_id, s.scheme));
            }
        }
    }
    out
}

fn serve(state: AppState, addr: SocketAddr, dirs: StaticDirs) -> Result<(), CliError> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(CliError::Serve)?;
    rt.block_on(async move {
        let app = chemsearch::router(state.clone(), &dirs);
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(CliError::Serve)?;
        log::warn!("listening on http://{}", listener.local_addr().map_err(CliError::Serve)?);
        #[cfg(unix)]
        tokio::spawn(reload_on_hangup(state));
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(CliError::Serve)
    })
}

/// SIGHUP reloads the snapshot file in place.
#[cfg(unix)]
async fn reload_on_hangup(state: AppState) {
    use tokio::signal::unix::{signal, SignalKind};
    let Ok(mut hup) = signal(SignalKind::hangup()) else {
        return;
    };
    while hup.recv().await.is_some() {
        let s = state.clone();
        match tokio::task::spawn_blocking(move || s.reload()).await {
            Ok(Ok(())) => {}
            Ok(Err(e)) => log::error!("reload failed, keeping current index: {e}"),
            Err(e) => log::error!("reload task failed: {e}"),
        }
    }
}
