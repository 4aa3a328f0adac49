//! JSON payloads shared by the HTTP API and the `search`/`stats` commands.

use serde::Serialize;

use chemsearch_core::corpus::{ChemEntity, Document, Passage, ReactionRecord};
use chemsearch_core::linker::CompoundLink;
use chemsearch_core::querylang::MultimodalQuery;
use chemsearch_core::search::{Engine, QueryCompound, ReactionEntry, SearchResponse, SearchResult, Stats};

use crate::error::ApiError;
use crate::API_VERSION;

/// Raw query parameters as received from the CLI or the query string.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct QueryParams {
    pub text: Option<String>,
    pub smiles: Option<String>,
    pub reaction_smarts: Option<String>,
    pub k: Option<usize>,
}

impl QueryParams {
    pub fn parse(&self) -> Result<MultimodalQuery, ApiError> {
        Ok(chemsearch_core::querylang::parse_query(
            self.text.as_deref(),
            self.smiles.as_deref(),
            self.reaction_smarts.as_deref(),
            self.k,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReactionSummary {
    pub reaction_id: String,
    pub passage_id: String,
    /// `reactants >> products` using names where known.
    pub scheme: String,
    pub reactants: Vec<String>,
    pub products: Vec<String>,
    pub catalysts: Vec<String>,
    pub solvents: Vec<String>,
    pub temperature: Option<String>,
    pub yield_pct: Option<f64>,
}

fn entity_label(e: &ChemEntity) -> String {
    e.name
        .clone()
        .or_else(|| e.smiles.clone())
        .unwrap_or_else(|| "?".to_string())
}

impl From<&ReactionRecord> for ReactionSummary {
    fn from(r: &ReactionRecord) -> Self {
        let labels = |v: &[ChemEntity]| v.iter().map(entity_label).collect::<Vec<_>>();
        let reactants = labels(&r.reactants);
        let products = labels(&r.products);
        ReactionSummary {
            reaction_id: r.reaction_id.clone(),
            passage_id: r.passage_id.clone(),
            scheme: format!("{} >> {}", reactants.join(" + "), products.join(" + ")),
            reactants,
            products,
            catalysts: labels(&r.catalysts),
            solvents: labels(&r.solvents),
            temperature: r.temperature.clone(),
            yield_pct: r.yield_pct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultView {
    #[serde(flatten)]
    pub result: SearchResult,
    pub reaction_summaries: Vec<ReactionSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocumentGroup {
    pub doc_id: String,
    pub title: String,
    pub source_path: Option<String>,
    pub results: Vec<ResultView>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchPayload {
    pub api_version: u32,
    pub query: QueryParams,
    pub candidates: usize,
    pub total_results: usize,
    pub query_compounds: Vec<QueryCompound>,
    pub documents: Vec<DocumentGroup>,
}

/// Groups ranked results by document. Documents appear in order of their
/// best-ranked passage; results within a document keep rank order.
pub fn group_results(engine: &Engine, query: QueryParams, response: SearchResponse) -> SearchPayload {
    let corpus = engine.corpus();
    let total_results = response.results.len();
    let mut documents: Vec<DocumentGroup> = Vec::new();
    for result in response.results {
        let reaction_summaries = result
            .reactions
            .iter()
            .filter_map(|id| corpus.reaction(id))
            .map(ReactionSummary::from)
            .collect();
        let view = ResultView {
            result,
            reaction_summaries,
        };
        match documents.iter_mut().find(|g| g.doc_id == view.result.doc_id) {
            Some(g) => g.results.push(view),
            None => {
                let doc = corpus.document(&view.result.doc_id);
                documents.push(DocumentGroup {
                    doc_id: view.result.doc_id.clone(),
                    title: doc.map(|d| d.title.clone()).unwrap_or_default(),
                    source_path: doc.and_then(|d| d.source_path.clone()),
                    results: vec![view],
                });
            }
        }
    }
    SearchPayload {
        api_version: API_VERSION,
        query,
        candidates: response.candidates,
        total_results,
        query_compounds: response.query_compounds,
        documents,
    }
}

/// Parses and runs a query. The echoed parameters carry the effective `k`.
pub fn run_search(engine: &Engine, mut params: QueryParams) -> Result<SearchPayload, ApiError> {
    let query = params.parse()?;
    params.k = Some(query.k);
    let response = engine.search(&query)?;
    Ok(group_results(engine, params, response))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsPayload {
    pub api_version: u32,
    #[serde(flatten)]
    pub stats: Stats,
}

pub fn stats(engine: &Engine) -> StatsPayload {
    StatsPayload {
        api_version: API_VERSION,
        stats: engine.stats(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReactionListPayload {
    pub api_version: u32,
    pub doc_id: String,
    pub reactions: Vec<ReactionEntry>,
}

pub fn reactions(engine: &Engine, doc_id: &str) -> Result<ReactionListPayload, ApiError> {
    Ok(ReactionListPayload {
        api_version: API_VERSION,
        doc_id: doc_id.to_string(),
        reactions: engine.list_reactions(doc_id)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocumentPayload {
    pub api_version: u32,
    #[serde(flatten)]
    pub document: Document,
    pub passages: usize,
    pub reactions: usize,
    pub diagrams: usize,
}

pub fn document(engine: &Engine, doc_id: &str) -> Result<DocumentPayload, ApiError> {
    let corpus = engine.corpus();
    let doc = corpus
        .document(doc_id)
        .ok_or_else(|| chemsearch_core::search::SearchError::UnknownDocument(doc_id.to_string()))?;
    Ok(DocumentPayload {
        api_version: API_VERSION,
        document: doc.clone(),
        passages: corpus.passages().filter(|p| p.doc_id == doc_id).count(),
        reactions: engine.list_reactions(doc_id)?.len(),
        diagrams: corpus.diagrams_in_document(doc_id).count(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassagePayload {
    pub api_version: u32,
    #[serde(flatten)]
    pub passage: Passage,
    pub indexed: bool,
    pub links: Vec<CompoundLink>,
    /// Present only for reaction passages.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reaction: Option<ReactionRecord>,
}

pub fn passage(engine: &Engine, passage_id: &str) -> Result<PassagePayload, ApiError> {
    let detail = engine.passage_detail(passage_id)?;
    let reaction = detail.reactions.into_iter().next();
    Ok(PassagePayload {
        api_version: API_VERSION,
        passage: detail.passage,
        indexed: detail.indexed,
        links: detail.links,
        reaction,
    })
}
