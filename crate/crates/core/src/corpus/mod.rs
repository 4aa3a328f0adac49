//! The pre-extracted corpus: documents, passages, reaction records,
//! diagrams and the name dictionary.
//!
//! A corpus directory holds five UTF-8 files:
//!
//! | file              | content                                   |
//! |-------------------|-------------------------------------------|
//! | `documents.jsonl` | one [`Document`] per line                 |
//! | `passages.jsonl`  | one [`Passage`] per line                  |
//! | `reactions.jsonl` | one [`ReactionRecord`] per line           |
//! | `diagrams.jsonl`  | one [`Diagram`] per line                  |
//! | `names.json`      | object mapping compound name → SMILES     |
//!
//! Unknown fields are rejected. Loading is all-or-nothing.

mod model;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linker::CompoundLink;
use crate::molgraph::{canonical_smiles, parse_smiles, SmilesError};

pub use model::{
    BoundingBox, ChemEntity, Diagram, Document, Passage, PassageKind, ReactionRecord,
};

pub const DOCUMENTS_FILE: &str = "documents.jsonl";
pub const PASSAGES_FILE: &str = "passages.jsonl";
pub const REACTIONS_FILE: &str = "reactions.jsonl";
pub const DIAGRAMS_FILE: &str = "diagrams.jsonl";
pub const NAMES_FILE: &str = "names.json";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("missing corpus file {}", path.display())]
    MissingFile { path: PathBuf },
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    SchemaViolation {
        file: String,
        line: usize,
        message: String,
    },
    #[error("{file}: record '{id}': {message}")]
    InvalidRecord {
        file: &'static str,
        id: String,
        message: String,
    },
    #[error("{file}: duplicate id '{id}'")]
    DuplicateId { file: &'static str, id: String },
    #[error("{file}: record '{id}' field {field} references unknown '{target}'")]
    DanglingReference {
        file: &'static str,
        id: String,
        field: &'static str,
        target: String,
    },
    #[error("{file}: record '{id}' has unparsable SMILES '{smiles}': {source}")]
    SmilesParseFailure {
        file: &'static str,
        id: String,
        smiles: String,
        #[source]
        source: SmilesError,
    },
    #[error("corpus contains no documents")]
    EmptyCorpus,
}

/// Raw records in file form; the serialized body of a corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusRecords {
    pub documents: Vec<Document>,
    pub passages: Vec<Passage>,
    pub reactions: Vec<ReactionRecord>,
    pub diagrams: Vec<Diagram>,
    pub names: BTreeMap<String, String>,
}

/// A validated corpus. Immutable after construction.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    documents: BTreeMap<String, Document>,
    passages: BTreeMap<String, Passage>,
    reactions: BTreeMap<String, ReactionRecord>,
    diagrams: BTreeMap<String, Diagram>,
    names: BTreeMap<String, String>,
    name_canonical: BTreeMap<String, String>,
}

fn canonicalize(file: &'static str, id: &str, smiles: &str) -> Result<String, CorpusError> {
    parse_smiles(smiles)
        .map(|g| canonical_smiles(&g))
        .map_err(|source| CorpusError::SmilesParseFailure {
            file,
            id: id.to_string(),
            smiles: smiles.to_string(),
            source,
        })
}

fn invalid(file: &'static str, id: &str, message: impl Into<String>) -> CorpusError {
    CorpusError::InvalidRecord {
        file,
        id: id.to_string(),
        message: message.into(),
    }
}

fn keyed<T>(
    file: &'static str,
    items: Vec<T>,
    key: impl Fn(&T) -> &str,
) -> Result<BTreeMap<String, T>, CorpusError> {
    let mut map = BTreeMap::new();
    for item in items {
        let id = key(&item).to_string();
        if id.trim().is_empty() {
            return Err(invalid(file, &id, "empty id"));
        }
        if map.contains_key(&id) {
            return Err(CorpusError::DuplicateId { file, id });
        }
        map.insert(id, item);
    }
    Ok(map)
}

impl Corpus {
    /// Validates records, resolves references and canonicalizes every SMILES.
    pub fn from_records(records: CorpusRecords) -> Result<Corpus, CorpusError> {
        let CorpusRecords {
            documents,
            passages,
            reactions,
            diagrams,
            names,
        } = records;
        if documents.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        let documents = keyed(DOCUMENTS_FILE, documents, |d| &d.doc_id)?;
        for d in documents.values() {
            if d.num_pages == 0 {
                return Err(invalid(DOCUMENTS_FILE, &d.doc_id, "num_pages must be positive"));
            }
        }

        let mut name_canonical = BTreeMap::new();
        for (name, smiles) in &names {
            if name.trim().is_empty() {
                return Err(invalid(NAMES_FILE, name, "empty compound name"));
            }
            name_canonical.insert(name.clone(), canonicalize(NAMES_FILE, name, smiles)?);
        }

        let mut reactions = keyed(REACTIONS_FILE, reactions, |r| &r.reaction_id)?;
        let passages = keyed(PASSAGES_FILE, passages, |p| &p.passage_id)?;

        for p in passages.values() {
            let id = &p.passage_id;
            let Some(doc) = documents.get(&p.doc_id) else {
                return Err(CorpusError::DanglingReference {
                    file: PASSAGES_FILE,
                    id: id.clone(),
                    field: "doc_id",
                    target: p.doc_id.clone(),
                });
            };
            if p.page == 0 || p.page > doc.num_pages {
                return Err(invalid(
                    PASSAGES_FILE,
                    id,
                    format!("page {} outside 1..={}", p.page, doc.num_pages),
                ));
            }
            if p.text.trim().is_empty() {
                return Err(invalid(PASSAGES_FILE, id, "empty text"));
            }
            if p.boxes.iter().any(|b| !b.is_valid()) {
                return Err(invalid(PASSAGES_FILE, id, "invalid bounding box"));
            }
            if p.compound_names.iter().any(|n| n.trim().is_empty()) {
                return Err(invalid(PASSAGES_FILE, id, "empty compound name"));
            }
            match (&p.kind, &p.reaction_id) {
                (PassageKind::Reaction, None) => {
                    return Err(invalid(PASSAGES_FILE, id, "reaction passage without reaction_id"))
                }
                (_, Some(rid)) => match reactions.get(rid) {
                    None => {
                        return Err(CorpusError::DanglingReference {
                            file: PASSAGES_FILE,
                            id: id.clone(),
                            field: "reaction_id",
                            target: rid.clone(),
                        })
                    }
                    Some(r) if r.passage_id != *id => {
                        return Err(invalid(
                            PASSAGES_FILE,
                            id,
                            format!("reaction '{rid}' belongs to passage '{}'", r.passage_id),
                        ))
                    }
                    Some(_) => {}
                },
                (PassageKind::General, None) => {}
            }
        }

        for r in reactions.values_mut() {
            let id = r.reaction_id.clone();
            if !passages.contains_key(&r.passage_id) {
                return Err(CorpusError::DanglingReference {
                    file: REACTIONS_FILE,
                    id,
                    field: "passage_id",
                    target: r.passage_id.clone(),
                });
            }
            if r.reactants.is_empty() && r.products.is_empty() {
                return Err(invalid(REACTIONS_FILE, &id, "no reactants or products"));
            }
            if let Some(y) = r.yield_pct {
                if !(0.0..=100.0).contains(&y) {
                    return Err(invalid(REACTIONS_FILE, &id, format!("yield {y} outside [0, 100]")));
                }
            }
            r.for_each_entity_mut(|e| {
                if e.name.as_deref().is_none_or(|n| n.trim().is_empty()) && e.smiles.is_none() {
                    return Err(invalid(REACTIONS_FILE, &id, "entity without name or smiles"));
                }
                e.canonical = match &e.smiles {
                    Some(s) => Some(canonicalize(REACTIONS_FILE, &id, s)?),
                    None => None,
                };
                Ok(())
            })?;
        }

        let mut diagrams = keyed(DIAGRAMS_FILE, diagrams, |d| &d.diagram_id)?;
        for d in diagrams.values_mut() {
            let id = &d.diagram_id;
            let Some(doc) = documents.get(&d.doc_id) else {
                return Err(CorpusError::DanglingReference {
                    file: DIAGRAMS_FILE,
                    id: id.clone(),
                    field: "doc_id",
                    target: d.doc_id.clone(),
                });
            };
            if d.page == 0 || d.page > doc.num_pages {
                return Err(invalid(DIAGRAMS_FILE, id, format!("page {} outside 1..={}", d.page, doc.num_pages)));
            }
            if !d.bbox.is_valid() {
                return Err(invalid(DIAGRAMS_FILE, id, "invalid bounding box"));
            }
            if let Some(label) = &d.label {
                if label.is_empty() || label.chars().any(char::is_whitespace) {
                    return Err(invalid(DIAGRAMS_FILE, id, "label must be a non-empty token"));
                }
            }
            d.canonical = canonicalize(DIAGRAMS_FILE, id, &d.smiles)?;
        }

        Ok(Corpus {
            documents,
            passages,
            reactions,
            diagrams,
            names,
            name_canonical,
        })
    }

    /// Reads and validates the five ingestion files in `dir`.
    pub fn load(dir: &Path) -> Result<Corpus, CorpusError> {
        let records = CorpusRecords {
            documents: read_jsonl(dir, DOCUMENTS_FILE)?,
            passages: read_jsonl(dir, PASSAGES_FILE)?,
            reactions: read_jsonl(dir, REACTIONS_FILE)?,
            diagrams: read_jsonl(dir, DIAGRAMS_FILE)?,
            names: read_names(dir)?,
        };
        log::debug!(
            "read {} documents, {} passages, {} reactions, {} diagrams from {}",
            records.documents.len(),
            records.passages.len(),
            records.reactions.len(),
            records.diagrams.len(),
            dir.display()
        );
        Corpus::from_records(records)
    }

    /// Writes the corpus back out in ingestion form, sorted by id.
    pub fn save(&self, dir: &Path) -> Result<(), CorpusError> {
        let io = |path: PathBuf| move |source| CorpusError::Io { path, source };
        fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
        write_jsonl(dir, DOCUMENTS_FILE, self.documents.values())?;
        write_jsonl(dir, PASSAGES_FILE, self.passages.values())?;
        write_jsonl(dir, REACTIONS_FILE, self.reactions.values())?;
        write_jsonl(dir, DIAGRAMS_FILE, self.diagrams.values())?;
        let path = dir.join(NAMES_FILE);
        let body = serde_json::to_string_pretty(&self.names).expect("names serialize");
        fs::write(&path, body + "\n").map_err(io(path.clone()))
    }

    pub fn to_records(&self) -> CorpusRecords {
        CorpusRecords {
            documents: self.documents.values().cloned().collect(),
            passages: self.passages.values().cloned().collect(),
            reactions: self.reactions.values().cloned().collect(),
            diagrams: self.diagrams.values().cloned().collect(),
            names: self.names.clone(),
        }
    }

    pub fn documents(&self) -> impl Iterator<Item = &Document> {
        self.documents.values()
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.documents.get(id)
    }

    /// Passages in `passage_id` order.
    pub fn passages(&self) -> impl Iterator<Item = &Passage> {
        self.passages.values()
    }

    pub fn passage(&self, id: &str) -> Option<&Passage> {
        self.passages.get(id)
    }

    pub fn reactions(&self) -> impl Iterator<Item = &ReactionRecord> {
        self.reactions.values()
    }

    pub fn reaction(&self, id: &str) -> Option<&ReactionRecord> {
        self.reactions.get(id)
    }

    /// Reactions whose record points at `passage_id`.
    pub fn reactions_for_passage<'a>(
        &'a self,
        passage_id: &'a str,
    ) -> impl Iterator<Item = &'a ReactionRecord> + 'a {
        self.reactions
            .values()
            .filter(move |r| r.passage_id == passage_id)
    }

    pub fn diagrams(&self) -> impl Iterator<Item = &Diagram> {
        self.diagrams.values()
    }

    pub fn diagram(&self, id: &str) -> Option<&Diagram> {
        self.diagrams.get(id)
    }

    pub fn diagrams_in_document<'a>(&'a self, doc_id: &'a str) -> impl Iterator<Item = &'a Diagram> + 'a {
        self.diagrams.values().filter(move |d| d.doc_id == doc_id)
    }

    pub fn name_dictionary(&self) -> &BTreeMap<String, String> {
        &self.names
    }

    /// Canonical SMILES of a dictionary name (exact, case-sensitive match).
    pub fn resolve_name(&self, name: &str) -> Option<&str> {
        self.name_canonical.get(name).map(String::as_str)
    }

    /// SMILES of a dictionary name as written in the dictionary.
    pub fn name_smiles(&self, name: &str) -> Option<&str> {
        self.names.get(name).map(String::as_str)
    }

    /// Structure of an entity: its own SMILES, else its dictionary name.
    pub fn entity_canonical<'a>(&'a self, e: &'a ChemEntity) -> Option<&'a str> {
        e.canonical
            .as_deref()
            .or_else(|| e.name.as_deref().and_then(|n| self.resolve_name(n)))
    }

    pub fn entity_smiles<'a>(&'a self, e: &'a ChemEntity) -> Option<&'a str> {
        e.smiles
            .as_deref()
            .or_else(|| e.name.as_deref().and_then(|n| self.name_smiles(n)))
    }

    /// Compounds annotated on a passage without diagram links: resolved
    /// compound names plus every entity of its reaction records.
    pub fn annotated_compounds(&self, passage: &Passage) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = passage
            .compound_names
            .iter()
            .filter_map(|n| self.resolve_name(n))
            .map(str::to_string)
            .collect();
        for r in self.reactions_for_passage(&passage.passage_id) {
            out.extend(r.entities().filter_map(|e| self.entity_canonical(e)).map(str::to_string));
        }
        out
    }
}

/// Distinct canonical SMILES over diagrams, reaction entities and
/// dictionary-resolved passage names, sorted.
pub fn unique_compounds(corpus: &Corpus) -> Vec<String> {
    let mut set: BTreeSet<&str> = corpus.diagrams().map(|d| d.canonical.as_str()).collect();
    for r in corpus.reactions() {
        set.extend(r.entities().filter_map(|e| corpus.entity_canonical(e)));
    }
    for p in corpus.passages() {
        set.extend(p.compound_names.iter().filter_map(|n| corpus.resolve_name(n)));
    }
    set.into_iter().map(str::to_string).collect()
}

/// Passages kept for retrieval: those tied to a reaction, naming at least
/// one compound, or carrying at least one diagram link.
pub fn indexable_passages<'a>(corpus: &'a Corpus, links: &[CompoundLink]) -> Vec<&'a Passage> {
    let linked: BTreeSet<&str> = links.iter().map(|l| l.mention.passage_id.as_str()).collect();
    corpus
        .passages()
        .filter(|p| {
            p.reaction_id.is_some()
                || corpus.reactions_for_passage(&p.passage_id).next().is_some()
                || !p.compound_names.is_empty()
                || linked.contains(p.passage_id.as_str())
        })
        .collect()
}

fn open(dir: &Path, file: &str) -> Result<String, CorpusError> {
    let path = dir.join(file);
    if !path.is_file() {
        return Err(CorpusError::MissingFile { path });
    }
    fs::read_to_string(&path).map_err(|source| CorpusError::Io { path, source })
}

fn read_jsonl<T: DeserializeOwned>(dir: &Path, file: &str) -> Result<Vec<T>, CorpusError> {
    let body = open(dir, file)?;
    let mut out = Vec::new();
    for (i, line) in body.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|e| CorpusError::SchemaViolation {
            file: file.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

fn read_names(dir: &Path) -> Result<BTreeMap<String, String>, CorpusError> {
    let body = open(dir, NAMES_FILE)?;
    serde_json::from_str(&body).map_err(|e| CorpusError::SchemaViolation {
        file: NAMES_FILE.to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}

fn write_jsonl<'a, T: Serialize + 'a>(
    dir: &Path,
    file: &str,
    records: impl Iterator<Item = &'a T>,
) -> Result<(), CorpusError> {
    let mut body = String::new();
    for r in records {
        body.push_str(&serde_json::to_string(r).expect("record serializes"));
        body.push('\n');
    }
    let path = dir.join(file);
    fs::write(&path, body).map_err(|source| CorpusError::Io { path, source })
}
