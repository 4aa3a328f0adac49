//! Compound mentions in passages and their links to molecular diagrams.
//!
//! A mention carries a label token (`compound 5`), a resolved structure
//! (a dictionary name or reaction entity), or both. Label tokens are matched
//! against diagram labels by indel ratio; structures by Tanimoto similarity.
//! When both strategies produce a link the higher score wins, text on ties.

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Diagram, Passage, PassageKind};
use crate::fingerprint::{morgan_fingerprint, tanimoto, Fingerprint, DEFAULT_RADIUS, DEFAULT_WIDTH};
use crate::molgraph::parse_smiles;
use crate::par::{self, Execution};

const DEFAULT_PATTERNS: &str = include_str!("../data/mention_patterns.txt");

/// Splits a captured label list such as `4b, 5 and 7`.
static LABEL_SEPARATOR: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\s*(?:,|&|/|\band\b|\bor\b)\s*|\s+").unwrap());

/// A parenthesised label directly after a compound name: `benzene (3a)`.
static TRAILING_LABEL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*\(\s*(\d+[A-Za-z]?)\s*\)").unwrap());

#[derive(Debug, Error)]
pub enum LinkerError {
    #[error("pattern line {line}: {source}")]
    InvalidPattern {
        line: usize,
        #[source]
        source: regex::Error,
    },
    #[error("pattern file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no mention patterns configured")]
    NoPatterns,
}

/// Ordered set of label-detection regexes. A pattern's `labels` named group
/// (else group 1, else the whole match) holds one or more labels.
#[derive(Debug, Clone)]
pub struct MentionPatterns {
    sources: Vec<String>,
    compiled: Vec<Regex>,
}

impl PartialEq for MentionPatterns {
    fn eq(&self, other: &Self) -> bool {
        self.sources == other.sources
    }
}

impl Default for MentionPatterns {
    fn default() -> Self {
        MentionPatterns::parse(DEFAULT_PATTERNS).expect("built-in patterns compile")
    }
}

impl MentionPatterns {
    /// One regex per line; blank lines and lines starting with `#` skipped.
    pub fn parse(text: &str) -> Result<Self, LinkerError> {
        let mut sources = Vec::new();
        let mut compiled = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            compiled.push(
                Regex::new(line).map_err(|source| LinkerError::InvalidPattern { line: i + 1, source })?,
            );
            sources.push(line.to_string());
        }
        if compiled.is_empty() {
            return Err(LinkerError::NoPatterns);
        }
        Ok(MentionPatterns { sources, compiled })
    }

    pub fn from_file(path: &Path) -> Result<Self, LinkerError> {
        let text = std::fs::read_to_string(path).map_err(|source| LinkerError::Io {
            path: path.display().to_string(),
            source,
        })?;
        MentionPatterns::parse(&text)
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }
}

impl Serialize for MentionPatterns {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.sources.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MentionPatterns {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let sources = Vec::<String>::deserialize(d)?;
        MentionPatterns::parse(&sources.join("\n")).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkerConfig {
    pub patterns: MentionPatterns,
    pub text_threshold: f64,
    pub structure_threshold: f64,
    pub radius: usize,
    pub width: usize,
}

impl Default for LinkerConfig {
    fn default() -> Self {
        LinkerConfig {
            patterns: MentionPatterns::default(),
            text_threshold: 0.5,
            structure_threshold: 0.5,
            radius: DEFAULT_RADIUS,
            width: DEFAULT_WIDTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mention {
    pub passage_id: String,
    pub span: Range<usize>,
    pub surface: String,
    pub label_token: Option<String>,
    /// Canonical SMILES when the mention names a known compound.
    pub resolved_smiles: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkMethod {
    Text,
    Structure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompoundLink {
    pub mention: Mention,
    pub diagram_id: String,
    pub method: LinkMethod,
    pub score: f64,
}

/// Indel similarity: `(|a| + |b| - d) / (|a| + |b|)` with substitution
/// costing 2. Both empty gives 1.0.
pub fn levenshtein_ratio(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + if ca == cb { 0 } else { 2 };
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    (total - prev[b.len()]) as f64 / total as f64
}

fn char_offsets(text: &str) -> Vec<usize> {
    let mut offsets: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
    offsets.push(text.len());
    offsets
}

fn to_char(offsets: &[usize], byte: usize) -> usize {
    offsets.partition_point(|&b| b < byte)
}

fn slice_chars(text: &str, span: &Range<usize>) -> String {
    text.chars().skip(span.start).take(span.end - span.start).collect()
}

/// Label mentions found by the pattern set, left to right, non-overlapping.
pub fn detect_label_mentions(p: &Passage, patterns: &MentionPatterns) -> Vec<Mention> {
    let text = &p.text;
    let offsets = char_offsets(text);
    let mut found: Vec<(Range<usize>, String)> = Vec::new();
    for re in &patterns.compiled {
        for caps in re.captures_iter(text) {
            let group = caps
                .name("labels")
                .or_else(|| caps.get(1))
                .or_else(|| caps.get(0))
                .expect("group 0 always present");
            let mut at = group.start();
            for piece in LABEL_SEPARATOR.split(group.as_str()) {
                let start = at + group.as_str()[at - group.start()..].find(piece).unwrap_or(0);
                at = start + piece.len();
                if piece.is_empty() {
                    continue;
                }
                found.push((start..start + piece.len(), piece.to_string()));
            }
        }
    }
    found.sort_by(|a, b| a.0.start.cmp(&b.0.start).then(b.0.end.cmp(&a.0.end)));
    let mut out: Vec<Mention> = Vec::new();
    let mut last_end = 0;
    for (bytes, label) in found {
        if bytes.start < last_end {
            continue;
        }
        last_end = bytes.end;
        let span = to_char(&offsets, bytes.start)..to_char(&offsets, bytes.end);
        out.push(Mention {
            passage_id: p.passage_id.clone(),
            span,
            surface: label.clone(),
            label_token: Some(label),
            resolved_smiles: None,
        });
    }
    out
}

/// Names a passage refers to: its compound names, or for reaction passages
/// the reactant and product entities of its reaction records.
fn candidate_names(corpus: &Corpus, p: &Passage) -> Vec<(String, Option<String>)> {
    let mut names: Vec<(String, Option<String>)> = Vec::new();
    let mut push = |name: &str, canonical: Option<&str>| {
        if !names.iter().any(|(n, _)| n == name) {
            names.push((name.to_string(), canonical.map(str::to_string)));
        }
    };
    match p.kind {
        PassageKind::Reaction => {
            for r in corpus.reactions_for_passage(&p.passage_id) {
                for e in r.linkable_entities() {
                    if let Some(name) = e.name.as_deref() {
                        push(name, corpus.entity_canonical(e));
                    }
                }
            }
        }
        PassageKind::General => {
            for name in &p.compound_names {
                push(name, corpus.resolve_name(name));
            }
        }
    }
    names
}

/// Name mentions: first case-insensitive occurrence of each candidate name.
/// A parenthesised label right after the name joins the same mention.
pub fn detect_name_mentions(corpus: &Corpus, p: &Passage) -> Vec<Mention> {
    let text = &p.text;
    let lower = text.to_lowercase();
    // Lowercasing can change byte lengths outside ASCII; only search when
    // the byte layout is preserved.
    let searchable = lower.len() == text.len();
    let offsets = char_offsets(text);
    let mut out = Vec::new();
    for (name, canonical) in candidate_names(corpus, p) {
        let needle = name.to_lowercase();
        let hit = if searchable { lower.find(&needle) } else { text.find(&name) };
        let Some(start) = hit else { continue };
        let mut end = start + needle.len();
        let mut label = None;
        if let Some(c) = TRAILING_LABEL.captures(&text[end..]) {
            label = Some(c[1].to_string());
            end += c.get(0).unwrap().end();
        }
        let span = to_char(&offsets, start)..to_char(&offsets, end);
        out.push(Mention {
            passage_id: p.passage_id.clone(),
            surface: text[start..end].to_string(),
            span,
            label_token: label,
            resolved_smiles: canonical,
        });
    }
    out
}

/// All mentions of a passage sorted by span. Label mentions inside a name
/// mention's span are dropped.
pub fn detect_mentions(corpus: &Corpus, p: &Passage, patterns: &MentionPatterns) -> Vec<Mention> {
    let mut names = detect_name_mentions(corpus, p);
    names.sort_by(|a, b| a.span.start.cmp(&b.span.start).then(b.span.end.cmp(&a.span.end)));
    let mut kept: Vec<Mention> = Vec::new();
    for m in names {
        if kept.iter().all(|k| m.span.start >= k.span.end || m.span.end <= k.span.start) {
            kept.push(m);
        }
    }
    for m in detect_label_mentions(p, patterns) {
        if kept.iter().all(|k| m.span.start >= k.span.end || m.span.end <= k.span.start) {
            kept.push(m);
        }
    }
    kept.sort_by(|a, b| a.span.start.cmp(&b.span.start).then(a.span.end.cmp(&b.span.end)));
    debug_assert!(kept.iter().all(|m| slice_chars(&p.text, &m.span) == m.surface));
    kept
}

/// Best label match among the labeled diagrams of the passage's document.
pub fn link_by_label(
    m: &Mention,
    diagrams: &[&Diagram],
    passage: &Passage,
    threshold: f64,
) -> Option<CompoundLink> {
    let token = m.label_token.as_deref()?;
    let anchor = passage.boxes.first();
    let key = |d: &Diagram| {
        let same_page = d.page == passage.page;
        let distance = match anchor {
            Some(b) if same_page => b.center_distance(&d.bbox),
            _ => f64::INFINITY,
        };
        (!same_page, distance)
    };
    diagrams
        .iter()
        .filter(|d| d.doc_id == passage.doc_id)
        .filter_map(|d| d.label.as_deref().map(|l| (*d, levenshtein_ratio(token, l))))
        .filter(|(_, ratio)| *ratio >= threshold)
        .min_by(|(da, ra), (db, rb)| {
            let (pa, dist_a) = key(da);
            let (pb, dist_b) = key(db);
            rb.total_cmp(ra)
                .then(pa.cmp(&pb))
                .then(dist_a.total_cmp(&dist_b))
                .then(da.diagram_id.cmp(&db.diagram_id))
        })
        .map(|(d, ratio)| CompoundLink {
            mention: m.clone(),
            diagram_id: d.diagram_id.clone(),
            method: LinkMethod::Text,
            score: ratio,
        })
}

/// A diagram with its precomputed fingerprint.
#[derive(Debug, Clone)]
pub struct FingerprintedDiagram<'a> {
    pub diagram: &'a Diagram,
    pub fingerprint: Fingerprint,
}

pub fn fingerprint_diagrams<'a>(
    diagrams: &[&'a Diagram],
    config: &LinkerConfig,
) -> Vec<FingerprintedDiagram<'a>> {
    diagrams
        .iter()
        .map(|d| {
            let g = parse_smiles(&d.canonical).expect("diagram canonical SMILES parses");
            FingerprintedDiagram {
                diagram: d,
                fingerprint: morgan_fingerprint(&g, config.radius, config.width),
            }
        })
        .collect()
}

/// Most similar diagram to the mention's resolved structure.
pub fn link_by_structure(
    m: &Mention,
    diagrams: &[FingerprintedDiagram<'_>],
    config: &LinkerConfig,
) -> Option<CompoundLink> {
    let smiles = m.resolved_smiles.as_deref()?;
    let g = parse_smiles(smiles).ok()?;
    let fp = morgan_fingerprint(&g, config.radius, config.width);
    diagrams
        .iter()
        .map(|d| {
            let score = tanimoto(&fp, &d.fingerprint).map_or(0.0, |s| s.value());
            (d.diagram, score)
        })
        .filter(|(_, s)| *s >= config.structure_threshold)
        .min_by(|(da, sa), (db, sb)| sb.total_cmp(sa).then(da.diagram_id.cmp(&db.diagram_id)))
        .map(|(d, score)| CompoundLink {
            mention: m.clone(),
            diagram_id: d.diagram_id.clone(),
            method: LinkMethod::Structure,
            score,
        })
}

/// Keeps the strictly higher-scoring candidate; text wins ties.
pub fn choose_link(text: Option<CompoundLink>, structure: Option<CompoundLink>) -> Option<CompoundLink> {
    match (text, structure) {
        (Some(t), Some(s)) => Some(if s.score > t.score { s } else { t }),
        (t, s) => t.or(s),
    }
}

/// Links for every mention of every passage, sorted by passage then span.
pub fn resolve_links(corpus: &Corpus, config: &LinkerConfig, exec: Execution) -> Vec<CompoundLink> {
    let mut by_doc: BTreeMap<&str, Vec<&Diagram>> = BTreeMap::new();
    for d in corpus.diagrams() {
        by_doc.entry(d.doc_id.as_str()).or_default().push(d);
    }
    let fingerprinted: BTreeMap<&str, Vec<FingerprintedDiagram<'_>>> = by_doc
        .iter()
        .map(|(doc, ds)| (*doc, fingerprint_diagrams(ds, config)))
        .collect();
    let passages: Vec<&Passage> = corpus.passages().collect();
    let per_passage = par::map(exec, &passages, |p| {
        let Some(diagrams) = by_doc.get(p.doc_id.as_str()) else {
            return Vec::new();
        };
        let fps = &fingerprinted[p.doc_id.as_str()];
        detect_mentions(corpus, p, &config.patterns)
            .into_iter()
            .filter_map(|m| {
                let text = link_by_label(&m, diagrams, p, config.text_threshold);
                let structure = link_by_structure(&m, fps, config);
                choose_link(text, structure)
            })
            .collect::<Vec<_>>()
    });
    let mut links: Vec<CompoundLink> = per_passage.into_iter().flatten().collect();
    links.sort_by(|a, b| {
        a.mention.passage_id
            .cmp(&b.mention.passage_id)
            .then(a.mention.span.start.cmp(&b.mention.span.start))
            .then(a.mention.span.end.cmp(&b.mention.span.end))
    });
    links
}
