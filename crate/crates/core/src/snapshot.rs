//! On-disk index snapshots.
//!
//! A snapshot is a UTF-8 file: one header line `chemsearch-snapshot <version>`
//! followed by a JSON object with the corpus records, engine configuration,
//! resolved links and the BM25 index. Loading revalidates the corpus and
//! rebuilds the in-memory structure index.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, CorpusRecords};
use crate::linker::CompoundLink;
use crate::par::Execution;
use crate::search::{Engine, EngineConfig, SearchError};
use crate::textindex::TextIndex;

pub const SNAPSHOT_MAGIC: &str = "chemsearch-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("cannot access snapshot {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a snapshot file (missing '{SNAPSHOT_MAGIC}' header)")]
    BadHeader,
    #[error("snapshot version {found} is not supported (expected {SNAPSHOT_VERSION})")]
    UnsupportedVersion { found: String },
    #[error("malformed snapshot body: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Engine(#[from] SearchError),
}

#[derive(Serialize)]
struct BodyRef<'a> {
    config: &'a EngineConfig,
    corpus: CorpusRecords,
    links: &'a [CompoundLink],
    text_index: &'a TextIndex,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Body {
    config: EngineConfig,
    corpus: CorpusRecords,
    links: Vec<CompoundLink>,
    text_index: TextIndex,
}

pub fn to_string(engine: &Engine) -> String {
    let body = BodyRef {
        config: engine.config(),
        corpus: engine.corpus().to_records(),
        links: engine.links(),
        text_index: engine.text_index(),
    };
    format!(
        "{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}\n{}\n",
        serde_json::to_string(&body).expect("snapshot serializes")
    )
}

pub fn from_str(s: &str, exec: Execution) -> Result<Engine, SnapshotError> {
    let (header, body) = s.split_once('\n').ok_or(SnapshotError::BadHeader)?;
    let version = header
        .strip_prefix(SNAPSHOT_MAGIC)
        .and_then(|v| v.strip_prefix(' '))
        .ok_or(SnapshotError::BadHeader)?;
    if version.trim() != SNAPSHOT_VERSION.to_string() {
        return Err(SnapshotError::UnsupportedVersion {
            found: version.trim().to_string(),
        });
    }
    let body: Body = serde_json::from_str(body)?;
    let corpus = Corpus::from_records(body.corpus)?;
    Ok(Engine::from_parts(corpus, body.config, body.links, body.text_index, exec)?)
}

pub fn save(engine: &Engine, path: &Path) -> Result<(), SnapshotError> {
    fs::write(path, to_string(engine)).map_err(|source| SnapshotError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load(path: &Path, exec: Execution) -> Result<Engine, SnapshotError> {
    let s = fs::read_to_string(path).map_err(|source| SnapshotError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_str(&s, exec)
}
