//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use chemsearch_core::molgraph::{parse_smiles, Atom, Bond, BondOrder, Element, MolecularGraph};
use proptest::prelude::*;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn mini_corpus_dir() -> PathBuf {
    fixtures_dir().join("mini_corpus")
}

/// `(smiles, name)` pairs from the 50-molecule reference set.
pub fn reference_molecules() -> Vec<(String, String)> {
    let text = std::fs::read_to_string(fixtures_dir().join("molecules.smi")).unwrap();
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (smiles, name) = l.split_once('\t').expect("tab-separated");
            (smiles.to_string(), name.to_string())
        })
        .collect()
}

pub fn reference_graphs() -> Vec<(String, MolecularGraph)> {
    reference_molecules()
        .into_iter()
        .map(|(s, name)| (name, parse_smiles(&s).unwrap()))
        .collect()
}

fn atom_ok(p: &Atom, t: &Atom) -> bool {
    p.element == t.element
        && p.aromatic == t.aromatic
        && (p.formal_charge == 0 || p.formal_charge == t.formal_charge)
}

/// Counts injective maps pattern → target that preserve atom labels and
/// map every pattern bond onto a target bond of the same order. Plain
/// enumeration in pattern index order with no size filters.
pub fn brute_force_embeddings(p: &MolecularGraph, t: &MolecularGraph) -> usize {
    fn go(p: &MolecularGraph, t: &MolecularGraph, i: usize, map: &mut Vec<usize>, used: &mut [bool]) -> usize {
        if i == p.atom_count() {
            let ok = p.bonds().iter().all(|b| {
                t.bonds().iter().any(|tb| {
                    tb.order == b.order
                        && ((tb.a == map[b.a] && tb.b == map[b.b]) || (tb.a == map[b.b] && tb.b == map[b.a]))
                })
            });
            return ok as usize;
        }
        let mut n = 0;
        for j in 0..t.atom_count() {
            if used[j] || !atom_ok(p.atom(i), t.atom(j)) {
                continue;
            }
            used[j] = true;
            map.push(j);
            n += go(p, t, i + 1, map, used);
            map.pop();
            used[j] = false;
        }
        n
    }
    if p.atom_count() == 0 {
        return 0;
    }
    go(p, t, 0, &mut Vec::new(), &mut vec![false; t.atom_count()])
}

/// Full-matrix indel distance (insert 1, delete 1, substitute 2).
pub fn indel_ratio_oracle(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = if a[i - 1] == b[j - 1] { 0 } else { 2 };
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + sub);
        }
    }
    let total = a.len() + b.len();
    if total == 0 {
        1.0
    } else {
        (total - d[a.len()][b.len()]) as f64 / total as f64
    }
}

/// BM25 of one passage written out term by term, for cross-checking.
pub fn bm25_oracle(query: &[&str], doc: &[&str], docs: &[Vec<&str>], k1: f64, b: f64) -> f64 {
    let n = docs.len() as f64;
    let avgdl = docs.iter().map(|d| d.len() as f64).sum::<f64>() / n;
    let mut seen = Vec::new();
    let mut score = 0.0;
    for &term in query {
        if seen.contains(&term) {
            continue;
        }
        seen.push(term);
        let df = docs.iter().filter(|d| d.contains(&term)).count() as f64;
        let tf = doc.iter().filter(|&&w| w == term).count() as f64;
        if tf == 0.0 {
            continue;
        }
        let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
        score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * doc.len() as f64 / avgdl));
    }
    score
}

/// Random connected molecules: a spanning tree over C/N/O/S/Cl atoms plus
/// up to two ring-closing bonds, respecting each element's largest valence.
pub fn arb_molecule(max_atoms: usize) -> impl Strategy<Value = MolecularGraph> {
    let elements = prop::sample::select(vec![Element::C, Element::C, Element::C, Element::N, Element::O, Element::S, Element::CL]);
    (1..=max_atoms)
        .prop_flat_map(move |n| {
            (
                prop::collection::vec(elements.clone(), n),
                prop::collection::vec(any::<prop::sample::Index>(), n),
                prop::collection::vec(prop::bool::weighted(0.2), n),
                prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>()), 0..=2),
            )
        })
        .prop_map(|(elements, parents, doubles, extra)| build(elements, parents, doubles, extra))
}

fn build(
    elements: Vec<Element>,
    parents: Vec<prop::sample::Index>,
    doubles: Vec<bool>,
    extra: Vec<(prop::sample::Index, prop::sample::Index)>,
) -> MolecularGraph {
    let n = elements.len();
    let max_valence = |e: Element| *e.default_valences().first().unwrap_or(&4) as u32;
    let mut used = vec![0u32; n];
    let mut bonds: Vec<Bond> = Vec::new();
    let has_bond = |bonds: &[Bond], a: usize, b: usize| {
        bonds.iter().any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a))
    };
    for i in 1..n {
        // Prefer an earlier atom with spare valence; stay connected anyway.
        let start = parents[i].index(i);
        let p = (0..i)
            .map(|k| (start + k) % i)
            .find(|&p| used[p] < max_valence(elements[p]))
            .unwrap_or(start);
        let spare = |x: usize| max_valence(elements[x]).saturating_sub(used[x]);
        let order = if doubles[i] && spare(p) >= 2 && spare(i) >= 2 {
            BondOrder::Double
        } else {
            BondOrder::Single
        };
        let v = if order == BondOrder::Double { 2 } else { 1 };
        used[p] += v;
        used[i] += v;
        bonds.push(Bond { a: p, b: i, order });
    }
    for (x, y) in extra {
        let (a, b) = (x.index(n), y.index(n));
        if a == b || has_bond(&bonds, a, b) {
            continue;
        }
        if used[a] < max_valence(elements[a]) && used[b] < max_valence(elements[b]) {
            used[a] += 1;
            used[b] += 1;
            bonds.push(Bond { a, b, order: BondOrder::Single });
        }
    }
    let atoms = elements
        .into_iter()
        .enumerate()
        .map(|(index, element)| Atom {
            element,
            aromatic: false,
            formal_charge: 0,
            implicit_h: 0,
            bracket: false,
            index,
        })
        .collect();
    MolecularGraph::new(atoms, bonds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldLink {
    pub passage_id: String,
    pub span: std::ops::Range<usize>,
    pub surface: String,
    pub diagram_id: String,
    pub method: String,
    pub score: f64,
}

pub fn gold_links() -> Vec<GoldLink> {
    let text = std::fs::read_to_string(fixtures_dir().join("mini_corpus_gold_links.tsv")).unwrap();
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            let (s, e) = f[1].split_once("..").unwrap();
            GoldLink {
                passage_id: f[0].into(),
                span: s.parse().unwrap()..e.parse().unwrap(),
                surface: f[2].into(),
                diagram_id: f[3].into(),
                method: f[4].into(),
                score: f[5].parse().unwrap(),
            }
        })
        .collect()
}

/// Small random corpus: one document, passages built from a fixed word
/// list, each naming a random subset of a compound dictionary.
pub fn random_corpus(seed: u64, passages: usize) -> chemsearch_core::corpus::Corpus {
    use chemsearch_core::corpus::*;
    use rand::{Rng, SeedableRng};

    const WORDS: &[&str] = &[
        "coupling", "yield", "palladium", "boronic", "acid", "heated", "reflux", "suzuki", "aryl",
        "bromide", "ligand", "base", "solvent", "product", "burke", "group",
    ];
    const DICT: &[(&str, &str)] = &[
        ("benzene", "c1ccccc1"),
        ("toluene", "Cc1ccccc1"),
        ("phenol", "Oc1ccccc1"),
        ("bromobenzene", "Brc1ccccc1"),
        ("biphenyl", "c1ccc(-c2ccccc2)cc1"),
        ("ethanol", "CCO"),
        ("acetic acid", "CC(=O)O"),
        ("pyridine", "c1ccncc1"),
        ("anisole", "COc1ccccc1"),
        ("cyclohexane", "C1CCCCC1"),
    ];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut records = CorpusRecords {
        documents: vec![Document {
            doc_id: "doc".into(),
            title: "random".into(),
            source_path: None,
            num_pages: 1,
        }],
        names: DICT.iter().map(|(n, s)| (n.to_string(), s.to_string())).collect(),
        ..Default::default()
    };
    for i in 0..passages {
        let len = rng.random_range(3..15);
        let mut words: Vec<String> = (0..len)
            .map(|_| WORDS[rng.random_range(0..WORDS.len())].to_string())
            .collect();
        let mut names = Vec::new();
        for (name, _) in DICT {
            if rng.random_bool(0.2) {
                names.push(name.to_string());
                words.push(name.to_string());
            }
        }
        records.passages.push(Passage {
            passage_id: format!("p{i:03}"),
            doc_id: "doc".into(),
            kind: PassageKind::General,
            text: words.join(" "),
            page: 1,
            boxes: vec![],
            compound_names: names,
            reaction_id: None,
        });
    }
    Corpus::from_records(records).unwrap()
}

pub const RANDOM_QUERY_SMILES: &[&str] = &["c1ccccc1", "Cc1ccccc1", "Brc1ccccc1", "CCO", "O", "c1ccncc1", "C1CCCCC1", "CC(=O)O"];
