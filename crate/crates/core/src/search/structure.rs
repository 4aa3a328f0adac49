use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::fingerprint::{morgan_fingerprint, tanimoto, Fingerprint, SimilarityScore};
use crate::molgraph::{parse_smiles, MolecularGraph};
use crate::par::{self, Execution};
use crate::substruct::has_substructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Diagram,
    ReactionEntity,
    Name,
}

/// Where a compound was seen: a diagram id, a reaction id or a name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Source {
    pub kind: SourceKind,
    pub id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    Exact,
    Similarity,
    Substructure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureHit {
    pub canonical: String,
    pub score: SimilarityScore,
    pub mode: MatchMode,
    pub sources: Vec<Source>,
}

#[derive(Debug, Clone)]
pub struct CompoundEntry {
    pub canonical: String,
    pub graph: MolecularGraph,
    pub fingerprint: Fingerprint,
    pub sources: Vec<Source>,
}

/// Every distinct corpus compound, sorted by canonical SMILES.
#[derive(Debug, Clone, Default)]
pub struct StructureIndex {
    compounds: Vec<CompoundEntry>,
    radius: usize,
    width: usize,
}

impl StructureIndex {
    pub fn build(corpus: &Corpus, radius: usize, width: usize) -> StructureIndex {
        let mut sources: BTreeMap<String, Vec<Source>> = BTreeMap::new();
        let mut add = |canonical: &str, kind, id: &str| {
            let list = sources.entry(canonical.to_string()).or_default();
            let s = Source { kind, id: id.to_string() };
            if !list.contains(&s) {
                list.push(s);
            }
        };
        for d in corpus.diagrams() {
            add(&d.canonical, SourceKind::Diagram, &d.diagram_id);
        }
        for r in corpus.reactions() {
            for e in r.entities() {
                if let Some(c) = corpus.entity_canonical(e) {
                    add(c, SourceKind::ReactionEntity, &r.reaction_id);
                }
            }
        }
        for p in corpus.passages() {
            for name in &p.compound_names {
                if let Some(c) = corpus.resolve_name(name) {
                    add(c, SourceKind::Name, name);
                }
            }
        }
        let compounds = sources
            .into_iter()
            .map(|(canonical, mut sources)| {
                sources.sort();
                let graph = parse_smiles(&canonical).expect("canonical SMILES parses");
                let fingerprint = morgan_fingerprint(&graph, radius, width);
                CompoundEntry {
                    canonical,
                    graph,
                    fingerprint,
                    sources,
                }
            })
            .collect();
        StructureIndex {
            compounds,
            radius,
            width,
        }
    }

    pub fn len(&self) -> usize {
        self.compounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.compounds.is_empty()
    }

    pub fn compounds(&self) -> &[CompoundEntry] {
        &self.compounds
    }

    pub fn get(&self, canonical: &str) -> Option<&CompoundEntry> {
        self.compounds
            .binary_search_by(|c| c.canonical.as_str().cmp(canonical))
            .ok()
            .map(|i| &self.compounds[i])
    }

    pub fn fingerprint(&self, g: &MolecularGraph) -> Fingerprint {
        morgan_fingerprint(g, self.radius, self.width)
    }

    /// Top `k` compounds by Tanimoto to `query`, ties by canonical string.
    pub fn similarity(&self, query: &MolecularGraph, k: usize, exec: Execution) -> Vec<StructureHit> {
        let fp = self.fingerprint(query);
        let q_canonical = crate::molgraph::canonical_smiles(query);
        let scores = par::map(exec, &self.compounds, |c| {
            tanimoto(&fp, &c.fingerprint).unwrap_or(SimilarityScore::ZERO)
        });
        let mut order: Vec<usize> = (0..self.compounds.len()).collect();
        // Compounds are already in canonical order, so a stable sort on
        // score alone leaves ties by canonical string.
        order.sort_by(|&a, &b| scores[b].value().total_cmp(&scores[a].value()));
        order.truncate(k);
        order
            .into_iter()
            .map(|i| {
                let c = &self.compounds[i];
                let exact = c.canonical == q_canonical;
                StructureHit {
                    canonical: c.canonical.clone(),
                    score: if exact { SimilarityScore::ONE } else { scores[i] },
                    mode: if exact { MatchMode::Exact } else { MatchMode::Similarity },
                    sources: c.sources.clone(),
                }
            })
            .collect()
    }

    /// Every compound containing `query`, in canonical order.
    pub fn substructure(&self, query: &MolecularGraph, exec: Execution) -> Vec<StructureHit> {
        par::filter_map(exec, &self.compounds, |c| {
            has_substructure(query, &c.graph).then(|| StructureHit {
                canonical: c.canonical.clone(),
                score: SimilarityScore::ONE,
                mode: MatchMode::Substructure,
                sources: c.sources.clone(),
            })
        })
    }

    /// The compound whose canonical form equals the query's.
    pub fn exact(&self, query: &MolecularGraph) -> Option<StructureHit> {
        let canonical = crate::molgraph::canonical_smiles(query);
        self.get(&canonical).map(|c| StructureHit {
            canonical: c.canonical.clone(),
            score: SimilarityScore::ONE,
            mode: MatchMode::Exact,
            sources: c.sources.clone(),
        })
    }
}
