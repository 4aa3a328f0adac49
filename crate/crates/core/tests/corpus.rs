mod common;

use chemsearch_core::corpus::{indexable_passages, unique_compounds, Corpus, CorpusError};
use chemsearch_core::linker::{resolve_links, LinkerConfig};
use chemsearch_core::par::Execution;

fn fixture() -> Corpus {
    Corpus::load(&common::mini_corpus_dir()).unwrap()
}

#[test]
fn fixture_counts() {
    let c = fixture();
    assert_eq!(c.documents().count(), 3);
    assert_eq!(c.passages().count(), 12);
    assert_eq!(c.reactions().count(), 5);
    assert_eq!(c.diagrams().count(), 6);
    assert_eq!(unique_compounds(&c).len(), 9);
}

#[test]
fn two_passages_are_filtered() {
    let c = fixture();
    let links = resolve_links(&c, &LinkerConfig::default(), Execution::Sequential);
    let kept: Vec<&str> = indexable_passages(&c, &links).iter().map(|p| p.passage_id.as_str()).collect();
    assert_eq!(kept.len(), 10);
    assert!(!kept.contains(&"burke-p01"));
    assert!(!kept.contains(&"thio-p04"));
    // review-p02 qualifies only through its diagram link.
    assert!(kept.contains(&"review-p02"));
    let without_links: Vec<_> = indexable_passages(&c, &[]).iter().map(|p| p.passage_id.clone()).collect();
    assert!(!without_links.contains(&"review-p02".to_string()));
    // Reaction passages qualify with no links at all.
    assert!(without_links.contains(&"burke-p04".to_string()));
}

#[test]
fn canonical_forms_computed_on_load() {
    let c = fixture();
    let d = c.diagram("burke-fig1-3").unwrap();
    assert_eq!(d.smiles, "c1ccc(cc1)-c1ccccc1");
    assert_eq!(d.canonical, c.resolve_name("biphenyl").unwrap());
    let r = c.reaction("rxn-review-a").unwrap();
    assert!(r.reactants[0].canonical.is_none());
    assert_eq!(c.entity_canonical(&r.reactants[0]), c.resolve_name("4-bromoanisole"));
}

#[test]
fn save_and_reload() {
    let c = fixture();
    let dir = tempfile::tempdir().unwrap();
    c.save(dir.path()).unwrap();
    assert_eq!(Corpus::load(dir.path()).unwrap(), c);
}

#[test]
fn broken_line_is_reported_with_its_number() {
    let dir = tempfile::tempdir().unwrap();
    fixture().save(dir.path()).unwrap();
    let path = dir.path().join("diagrams.jsonl");
    let mut body = std::fs::read_to_string(&path).unwrap();
    body.push_str("{\"diagram_id\": 7}\n");
    std::fs::write(&path, body).unwrap();
    match Corpus::load(dir.path()) {
        Err(CorpusError::SchemaViolation { file, line, .. }) => {
            assert_eq!(file, "diagrams.jsonl");
            assert_eq!(line, 7);
        }
        other => panic!("{other:?}"),
    }
}
