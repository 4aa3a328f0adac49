//! The search engine: structure search, multimodal fusion, result
//! assembly and per-document reaction navigation.

mod fusion;
mod structure;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{indexable_passages, unique_compounds, BoundingBox, Corpus, Passage, ReactionRecord};
use crate::linker::{detect_mentions, resolve_links, CompoundLink, LinkerConfig, Mention};
use crate::molgraph::{canonical_smiles, parse_smiles, MolecularGraph, SmilesError};
use crate::par::{self, Execution};
use crate::querylang::{FragmentVocabulary, MultimodalQuery, QueryError};
use crate::textindex::{build_text_index, tokenize_with_spans, Bm25Params, TextIndex};

pub use fusion::{fuse, min_max_normalize, Candidate, Fused};
pub use structure::{CompoundEntry, MatchMode, Source, SourceKind, StructureHit, StructureIndex};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("invalid SMILES '{smiles}': {source}")]
    InvalidSmiles {
        smiles: String,
        #[source]
        source: SmilesError,
    },
    #[error("unknown document '{0}'")]
    UnknownDocument(String),
    #[error("unknown passage '{0}'")]
    UnknownPassage(String),
    #[error("no passage qualifies for indexing")]
    NothingToIndex,
    #[error("index does not match corpus: {0}")]
    InconsistentIndex(String),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EngineConfig {
    pub linker: LinkerConfig,
    pub bm25: Bm25Params,
    pub vocabulary: FragmentVocabulary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HighlightKind {
    Term,
    Compound,
}

/// Character range of the passage text to highlight.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Highlight {
    pub start: usize,
    pub end: usize,
    pub kind: HighlightKind,
}

/// A passage compound matching one query compound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedCompound {
    pub query: String,
    pub canonical: String,
    pub diagram_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub rank: usize,
    pub passage_id: String,
    pub doc_id: String,
    pub page: u32,
    pub boxes: Vec<BoundingBox>,
    pub text: String,
    pub text_score: f64,
    pub normalized_text_score: f64,
    /// Canonical query compounds found among the passage's compounds.
    pub matched_smiles: Vec<String>,
    pub matched_compounds: Vec<MatchedCompound>,
    pub reactions: Vec<String>,
    pub highlights: Vec<Highlight>,
}

/// Per query compound: its canonical form, nearest corpus compounds and the
/// number of corpus compounds containing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryCompound {
    pub input: String,
    pub canonical: String,
    pub similar: Vec<StructureHit>,
    pub superstructures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub query_compounds: Vec<QueryCompound>,
    pub candidates: usize,
    pub results: Vec<SearchResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactionEntry {
    pub reaction: ReactionRecord,
    pub passage_id: String,
    pub page: u32,
    pub boxes: Vec<BoundingBox>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub documents: usize,
    pub passages_extracted: usize,
    pub passages_indexed: usize,
    pub unique_compounds: usize,
    pub reactions: usize,
    pub links: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassageDetail {
    pub passage: Passage,
    pub indexed: bool,
    pub links: Vec<CompoundLink>,
    pub reactions: Vec<ReactionRecord>,
}

#[derive(Debug, Clone, Default)]
struct PassageInfo {
    ordinal: Option<usize>,
    /// Canonical SMILES → ids of linked diagrams showing it.
    compounds: BTreeMap<String, BTreeSet<String>>,
    reactions: Vec<String>,
    /// Mentions with the canonical structures they denote.
    mentions: Vec<(Mention, BTreeSet<String>)>,
}

/// An immutable, queryable view of one corpus.
#[derive(Debug, Clone)]
pub struct Engine {
    corpus: Corpus,
    config: EngineConfig,
    links: Vec<CompoundLink>,
    text_index: TextIndex,
    indexed: Vec<String>,
    passages: BTreeMap<String, PassageInfo>,
    structures: StructureIndex,
    exec: Execution,
}

/// Passage text plus, for passages with reaction records, the names of
/// every reaction entity.
pub fn indexed_text(corpus: &Corpus, p: &Passage) -> String {
    let mut text = p.text.clone();
    for r in corpus.reactions_for_passage(&p.passage_id) {
        for name in r.entities().filter_map(|e| e.name.as_deref()) {
            text.push(' ');
            text.push_str(name);
        }
    }
    text
}

fn parse_query_smiles(s: &str) -> Result<MolecularGraph, SearchError> {
    parse_smiles(s).map_err(|source| SearchError::InvalidSmiles {
        smiles: s.to_string(),
        source,
    })
}

impl Engine {
    /// Links mentions, selects indexable passages and builds all indexes.
    pub fn build(corpus: Corpus, config: EngineConfig, exec: Execution) -> Result<Engine, SearchError> {
        let links = resolve_links(&corpus, &config.linker, exec);
        Engine::assemble(corpus, config, links, None, exec)
    }

    /// Rebuilds derived structures around previously computed links and
    /// text index, as stored in a snapshot.
    pub fn from_parts(
        corpus: Corpus,
        config: EngineConfig,
        links: Vec<CompoundLink>,
        text_index: TextIndex,
        exec: Execution,
    ) -> Result<Engine, SearchError> {
        Engine::assemble(corpus, config, links, Some(text_index), exec)
    }

    fn assemble(
        corpus: Corpus,
        config: EngineConfig,
        links: Vec<CompoundLink>,
        text_index: Option<TextIndex>,
        exec: Execution,
    ) -> Result<Engine, SearchError> {
        for l in &links {
            if corpus.passage(&l.mention.passage_id).is_none() || corpus.diagram(&l.diagram_id).is_none() {
                return Err(SearchError::InconsistentIndex(format!(
                    "link {} -> {} references unknown records",
                    l.mention.passage_id, l.diagram_id
                )));
            }
        }
        let indexed: Vec<String> = indexable_passages(&corpus, &links)
            .into_iter()
            .map(|p| p.passage_id.clone())
            .collect();
        if indexed.is_empty() {
            return Err(SearchError::NothingToIndex);
        }
        let text_index = match text_index {
            Some(idx) if idx.passage_count() == indexed.len() => idx,
            Some(idx) => {
                return Err(SearchError::InconsistentIndex(format!(
                    "text index holds {} passages, corpus qualifies {}",
                    idx.passage_count(),
                    indexed.len()
                )))
            }
            None => {
                let texts: Vec<String> = indexed
                    .iter()
                    .map(|id| indexed_text(&corpus, corpus.passage(id).expect("indexed id")))
                    .collect();
                build_text_index(&texts, &config.vocabulary, config.bm25)
                    .map_err(|_| SearchError::NothingToIndex)?
            }
        };

        let mut passages: BTreeMap<String, PassageInfo> = BTreeMap::new();
        for (ordinal, id) in indexed.iter().enumerate() {
            let p = corpus.passage(id).expect("indexed id");
            let mut info = PassageInfo {
                ordinal: Some(ordinal),
                ..Default::default()
            };
            for c in corpus.annotated_compounds(p) {
                info.compounds.entry(c).or_default();
            }
            let mut reactions: BTreeSet<String> = p.reaction_id.iter().cloned().collect();
            reactions.extend(corpus.reactions_for_passage(id).map(|r| r.reaction_id.clone()));
            info.reactions = reactions.into_iter().collect();
            let mut denoted: BTreeMap<(usize, usize), BTreeSet<String>> = BTreeMap::new();
            for l in links.iter().filter(|l| &l.mention.passage_id == id) {
                let canonical = &corpus.diagram(&l.diagram_id).expect("checked above").canonical;
                info.compounds
                    .entry(canonical.clone())
                    .or_default()
                    .insert(l.diagram_id.clone());
                denoted
                    .entry((l.mention.span.start, l.mention.span.end))
                    .or_default()
                    .insert(canonical.clone());
            }
            for m in detect_mentions(&corpus, p, &config.linker.patterns) {
                let mut set = denoted.remove(&(m.span.start, m.span.end)).unwrap_or_default();
                set.extend(m.resolved_smiles.iter().cloned());
                if !set.is_empty() {
                    info.mentions.push((m, set));
                }
            }
            passages.insert(id.clone(), info);
        }
        for p in corpus.passages() {
            passages.entry(p.passage_id.clone()).or_default();
        }
        let structures = StructureIndex::build(&corpus, config.linker.radius, config.linker.width);
        log::info!(
            "indexed {} of {} passages, {} links, {} distinct compounds",
            indexed.len(),
            corpus.passages().count(),
            links.len(),
            structures.len()
        );
        Ok(Engine {
            corpus,
            config,
            links,
            text_index,
            indexed,
            passages,
            structures,
            exec,
        })
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn links(&self) -> &[CompoundLink] {
        &self.links
    }

    pub fn text_index(&self) -> &TextIndex {
        &self.text_index
    }

    pub fn structures(&self) -> &StructureIndex {
        &self.structures
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    /// Passage ids in text-index ordinal order.
    pub fn indexed_passages(&self) -> &[String] {
        &self.indexed
    }

    pub fn stats(&self) -> Stats {
        Stats {
            documents: self.corpus.documents().count(),
            passages_extracted: self.corpus.passages().count(),
            passages_indexed: self.indexed.len(),
            unique_compounds: unique_compounds(&self.corpus).len(),
            reactions: self.corpus.reactions().count(),
            links: self.links.len(),
        }
    }

    pub fn search_similarity(&self, smiles: &str, k: usize) -> Result<Vec<StructureHit>, SearchError> {
        let g = parse_query_smiles(smiles)?;
        Ok(self.structures.similarity(&g, k, self.exec))
    }

    pub fn search_substructure(&self, smiles: &str) -> Result<Vec<StructureHit>, SearchError> {
        let g = parse_query_smiles(smiles)?;
        Ok(self.structures.substructure(&g, self.exec))
    }

    pub fn search_exact(&self, smiles: &str) -> Result<Option<StructureHit>, SearchError> {
        let g = parse_query_smiles(smiles)?;
        Ok(self.structures.exact(&g))
    }

    /// Ranked passages for a combined text and structure query.
    pub fn search(&self, q: &MultimodalQuery) -> Result<SearchResponse, SearchError> {
        // Distinct query compounds in first-seen order.
        let mut query_graphs: Vec<(String, String, MolecularGraph)> = Vec::new();
        for s in q.structure_queries() {
            let g = parse_query_smiles(s)?;
            let canonical = canonical_smiles(&g);
            if !query_graphs.iter().any(|(_, c, _)| *c == canonical) {
                query_graphs.push((s.to_string(), canonical, g));
            }
        }

        // Corpus compounds containing each query compound.
        let supersets: Vec<BTreeSet<String>> = query_graphs
            .iter()
            .map(|(_, _, g)| {
                self.structures
                    .substructure(g, self.exec)
                    .into_iter()
                    .map(|h| h.canonical)
                    .collect()
            })
            .collect();
        let query_compounds: Vec<QueryCompound> = query_graphs
            .iter()
            .zip(&supersets)
            .map(|((input, canonical, g), sup)| QueryCompound {
                input: input.clone(),
                canonical: canonical.clone(),
                similar: self.structures.similarity(g, q.k, self.exec),
                superstructures: sup.len(),
            })
            .collect();

        let terms = q
            .text
            .as_deref()
            .map(|t| self.text_index.query_terms(t))
            .unwrap_or_default();
        let text_hits: BTreeMap<usize, f64> = self.text_index.score_all(&terms).into_iter().collect();

        let matches_of = |info: &PassageInfo| -> Vec<usize> {
            (0..query_graphs.len())
                .filter(|&i| info.compounds.keys().any(|c| supersets[i].contains(c)))
                .collect()
        };
        let per_passage: Vec<(usize, Vec<usize>)> = par::filter_map(self.exec, &self.indexed, |id| {
            let info = &self.passages[id];
            let ordinal = info.ordinal.expect("indexed passage");
            let matched = matches_of(info);
            (text_hits.contains_key(&ordinal) || !matched.is_empty()).then_some((ordinal, matched))
        });
        let candidates = per_passage.len();
        let matched_by_ordinal: BTreeMap<usize, Vec<usize>> = per_passage.into_iter().collect();

        let fused = fuse(
            matched_by_ordinal
                .iter()
                .map(|(&ordinal, matched)| Candidate {
                    key: ordinal,
                    text_score: text_hits.get(&ordinal).copied().unwrap_or(0.0),
                    matched: matched.len(),
                })
                .collect(),
        );

        let results = fused
            .into_iter()
            .take(q.k)
            .enumerate()
            .map(|(i, f)| {
                let id = &self.indexed[f.key];
                let matched = &matched_by_ordinal[&f.key];
                self.assemble_result(i + 1, id, f, matched, &query_graphs, &supersets, &terms)
            })
            .collect();
        Ok(SearchResponse {
            query_compounds,
            candidates,
            results,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble_result(
        &self,
        rank: usize,
        id: &str,
        f: Fused<usize>,
        matched: &[usize],
        query_graphs: &[(String, String, MolecularGraph)],
        supersets: &[BTreeSet<String>],
        terms: &[String],
    ) -> SearchResult {
        let p = self.corpus.passage(id).expect("indexed id");
        let info = &self.passages[id];
        let mut matched_smiles = Vec::new();
        let mut matched_compounds = Vec::new();
        let mut hit_compounds: BTreeSet<&str> = BTreeSet::new();
        for &qi in matched {
            matched_smiles.push(query_graphs[qi].1.clone());
            for (canonical, diagrams) in &info.compounds {
                if supersets[qi].contains(canonical) {
                    hit_compounds.insert(canonical);
                    matched_compounds.push(MatchedCompound {
                        query: query_graphs[qi].1.clone(),
                        canonical: canonical.clone(),
                        diagram_ids: diagrams.iter().cloned().collect(),
                    });
                }
            }
        }
        matched_smiles.sort();

        let mut highlights: BTreeSet<Highlight> = BTreeSet::new();
        for (m, denoted) in &info.mentions {
            if denoted.iter().any(|c| hit_compounds.contains(c.as_str())) {
                highlights.insert(Highlight {
                    start: m.span.start,
                    end: m.span.end,
                    kind: HighlightKind::Compound,
                });
            }
        }
        if !terms.is_empty() {
            let len = p.text.chars().count();
            for t in tokenize_with_spans(&p.text, self.text_index.vocabulary()) {
                if t.span.end <= len && terms.contains(&t.text) {
                    highlights.insert(Highlight {
                        start: t.span.start,
                        end: t.span.end,
                        kind: HighlightKind::Term,
                    });
                }
            }
        }

        SearchResult {
            rank,
            passage_id: id.to_string(),
            doc_id: p.doc_id.clone(),
            page: p.page,
            boxes: p.boxes.clone(),
            text: p.text.clone(),
            text_score: f.text_score,
            normalized_text_score: f.normalized,
            matched_smiles,
            matched_compounds,
            reactions: info.reactions.clone(),
            highlights: highlights.into_iter().collect(),
        }
    }

    /// Reactions of a document in reading order: page, top of the first
    /// box, then reaction id.
    pub fn list_reactions(&self, doc_id: &str) -> Result<Vec<ReactionEntry>, SearchError> {
        if self.corpus.document(doc_id).is_none() {
            return Err(SearchError::UnknownDocument(doc_id.to_string()));
        }
        let mut entries: Vec<ReactionEntry> = self
            .corpus
            .reactions()
            .filter_map(|r| {
                let p = self.corpus.passage(&r.passage_id)?;
                (p.doc_id == doc_id).then(|| ReactionEntry {
                    reaction: r.clone(),
                    passage_id: p.passage_id.clone(),
                    page: p.page,
                    boxes: p.boxes.clone(),
                })
            })
            .collect();
        let top = |e: &ReactionEntry| e.boxes.first().map_or(f64::INFINITY, |b| b.y0);
        entries.sort_by(|a, b| {
            a.page
                .cmp(&b.page)
                .then(top(a).total_cmp(&top(b)))
                .then(a.reaction.reaction_id.cmp(&b.reaction.reaction_id))
        });
        Ok(entries)
    }

    pub fn passage_detail(&self, passage_id: &str) -> Result<PassageDetail, SearchError> {
        let p = self
            .corpus
            .passage(passage_id)
            .ok_or_else(|| SearchError::UnknownPassage(passage_id.to_string()))?;
        Ok(PassageDetail {
            passage: p.clone(),
            indexed: self.passages.get(passage_id).is_some_and(|i| i.ordinal.is_some()),
            links: self
                .links
                .iter()
                .filter(|l| l.mention.passage_id == passage_id)
                .cloned()
                .collect(),
            reactions: self.corpus.reactions_for_passage(passage_id).cloned().collect(),
        })
    }
}
