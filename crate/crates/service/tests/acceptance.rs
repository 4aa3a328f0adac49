//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Set `UPDATE_GOLDEN=1` to rewrite the end-to-end golden files.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use serde_json::Value;
use tower::ServiceExt;

use chemsearch::{router, AppState, StaticDirs};
use chemsearch_core::corpus::Corpus;
use chemsearch_core::fingerprint::{default_fingerprint, tanimoto};
use chemsearch_core::linker::{resolve_links, LinkMethod, LinkerConfig};
use chemsearch_core::molgraph::{canonical_smiles, parse_smiles, randomized_smiles};
use chemsearch_core::par::Execution;
use chemsearch_core::querylang::{parse_query, parse_reaction_smarts, tokenize_iupac, FragmentVocabulary, QueryError};
use chemsearch_core::search::{indexed_text, Engine, EngineConfig};
use chemsearch_core::substruct::has_substructure;
use chemsearch_core::textindex::{build_text_index, tokenize_text, Bm25Params};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn smiles_round_trip() -> Outcome {
    let graphs = common::reference_graphs();
    check!(graphs.len() == 50, "reference set has {} molecules", graphs.len());
    let mut failures = Vec::new();
    let mut renderings = 0;
    for (name, g) in &graphs {
        let c = canonical_smiles(g);
        let back = match parse_smiles(&c) {
            Ok(b) => b,
            Err(e) => {
                failures.push(format!("{name}: {c}: {e}"));
                continue;
            }
        };
        // Equal sizes plus embeddings both ways means isomorphic.
        let iso = back.atom_count() == g.atom_count()
            && back.bond_count() == g.bond_count()
            && has_substructure(g, &back)
            && has_substructure(&back, g);
        if !iso {
            failures.push(format!("{name}: {c} not isomorphic to input"));
        }
        for seed in 0..50 {
            renderings += 1;
            let r = randomized_smiles(g, seed);
            match parse_smiles(&r) {
                Ok(h) if canonical_smiles(&h) == c => {}
                _ => failures.push(format!("{name} seed {seed}: {r}")),
            }
        }
    }
    check!(failures.is_empty(), "{} failures, first: {}", failures.len(), failures[0]);
    Ok(format!("50 molecules, {renderings} randomized renderings, 0 failures"))
}

fn fingerprint_suite() -> Outcome {
    let start = Instant::now();
    let graphs = common::reference_graphs();
    let fps: Vec<_> = graphs.iter().map(|(_, g)| default_fingerprint(g)).collect();
    let mut failures = 0;
    let mut pairs = 0;
    for (i, a) in fps.iter().enumerate() {
        if tanimoto(a, a).map(|s| s.value()) != Ok(1.0) {
            failures += 1;
        }
        let sa: BTreeSet<usize> = a.ones().collect();
        for b in &fps {
            pairs += 1;
            let ab = tanimoto(a, b).unwrap().value();
            let ba = tanimoto(b, a).unwrap().value();
            let sb: BTreeSet<usize> = b.ones().collect();
            let union = sa.union(&sb).count();
            let expected = if union == 0 { 0.0 } else { sa.intersection(&sb).count() as f64 / union as f64 };
            if ab != ba || !(0.0..=1.0).contains(&ab) || ab != expected {
                failures += 1;
            }
        }
        for seed in 0..20 {
            let r = parse_smiles(&randomized_smiles(&graphs[i].1, seed)).unwrap();
            if default_fingerprint(&r) != *a {
                failures += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    check!(failures == 0, "{failures} failures over {pairs} pairs");
    check!(elapsed < 5.0, "took {elapsed:.2}s");
    Ok(format!("{pairs} pairs, 1000 reorderings, 0 failures, {elapsed:.2}s"))
}

fn substructure_oracle() -> Outcome {
    let graphs = common::reference_graphs();
    let mut pairs = 0;
    let mut disagreements = Vec::new();
    for (pn, p) in &graphs {
        for (tn, t) in graphs.iter().filter(|(_, g)| g.atom_count() <= 8) {
            pairs += 1;
            if has_substructure(p, t) != (common::brute_force_embeddings(p, t) > 0) {
                disagreements.push(format!("{pn} in {tn}"));
            }
        }
    }
    check!(disagreements.is_empty(), "{} disagreements, first: {}", disagreements.len(), disagreements[0]);
    let benzene = parse_smiles("c1ccccc1").unwrap();
    let toluene = parse_smiles("Cc1ccccc1").unwrap();
    check!(has_substructure(&benzene, &toluene), "benzene not found in toluene");
    check!(!has_substructure(&toluene, &benzene), "toluene found in benzene");
    Ok(format!("{pairs} pairs, 100% agreement; benzene in toluene, not the reverse"))
}

fn bm25_exactness() -> Outcome {
    let vocab = FragmentVocabulary::default();
    let params = Bm25Params::default();
    let idx = build_text_index(&["a b", "a"], &vocab, params).unwrap();
    let hits = idx.search_text("b", 10);
    check!(hits.len() == 1, "expected one hit, got {}", hits.len());
    let score = hits[0].1;
    let oracle = common::bm25_oracle(&["b"], &["a", "b"], &[vec!["a", "b"], vec!["a"]], params.k1, params.b);
    check!((score - 0.6100).abs() < 1e-4, "two-document score {score:.6}");
    check!((score - oracle).abs() < 1e-12, "engine {score} vs oracle {oracle}");

    // 1000 postings of one term in passages of equal length.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000);
    const LEN: usize = 24;
    let tfs: Vec<usize> = (0..1000).map(|_| rng.random_range(1..=LEN)).collect();
    let docs: Vec<Vec<&str>> = tfs
        .iter()
        .map(|&tf| (0..LEN).map(|i| if i < tf { "x" } else { "y" }).collect())
        .collect();
    let texts: Vec<String> = docs.iter().map(|d| d.join(" ")).collect();
    let idx = build_text_index(&texts, &vocab, params).unwrap();
    let hits = idx.search_text("x", usize::MAX);
    check!(hits.len() == 1000, "{} postings hit", hits.len());
    let mut by_tf: Vec<(usize, f64)> = hits.iter().map(|&(o, s)| (tfs[o], s)).collect();
    for &(o, s) in hits.iter().step_by(10) {
        let expected = common::bm25_oracle(&["x"], &docs[o], &docs, params.k1, params.b);
        check!((s - expected).abs() < 1e-9, "posting {o}: {s} vs oracle {expected}");
    }
    by_tf.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    for w in by_tf.windows(2) {
        let ok = if w[0].0 == w[1].0 { w[0].1 == w[1].1 } else { w[0].1 < w[1].1 };
        check!(ok, "tf {} scores {} but tf {} scores {}", w[0].0, w[0].1, w[1].0, w[1].1);
    }
    Ok(format!("two-document score {score:.4}; tf-monotone over 1000 postings"))
}

fn iupac_example() -> Outcome {
    let tokens = tokenize_iupac("N-((E)-2-bromo-2-phenylvinyl)-cinnamamide", &FragmentVocabulary::default());
    let joined = tokens.join(" ");
    check!(joined == "N E 2 bromo 2 phenyl vinyl cinnamamide", "got '{joined}'");
    Ok(format!("'{joined}'"))
}

fn reaction_smarts() -> Outcome {
    let r = parse_reaction_smarts("CC(=O)O.OCC>[H+]>CC(=O)OCC").map_err(|e| e.to_string())?;
    check!(
        r.reactants == ["CC(=O)O", "OCC"] && r.agents == ["[H+]"] && r.products == ["CC(=O)OCC"],
        "three-section split: {r:?}"
    );
    let r = parse_reaction_smarts(">>C").map_err(|e| e.to_string())?;
    check!(r.reactants.is_empty() && r.agents.is_empty() && r.products == ["C"], ">>C split: {r:?}");
    for (s, found) in [("C>C", 1), ("CC", 0), ("C>C>C>C", 3)] {
        let got = parse_reaction_smarts(s);
        check!(got == Err(QueryError::WrongSeparatorCount { found }), "{s}: {got:?}");
    }
    Ok("three-section, '>>C' and WrongSeparatorCount cases".into())
}

fn linking_gold() -> Outcome {
    let corpus = Corpus::load(&common::mini_corpus_dir()).map_err(|e| e.to_string())?;
    let links = resolve_links(&corpus, &LinkerConfig::default(), Execution::Parallel);
    let gold = common::gold_links();
    check!(links.len() == gold.len(), "{} links vs {} gold", links.len(), gold.len());
    let mut structure_case = false;
    let mut text_exact = false;
    for (l, g) in links.iter().zip(&gold) {
        let method = match l.method {
            LinkMethod::Text => "text",
            LinkMethod::Structure => "structure",
        };
        let same = l.mention.passage_id == g.passage_id
            && l.mention.span == g.span
            && l.mention.surface == g.surface
            && l.diagram_id == g.diagram_id
            && method == g.method
            && (l.score - g.score).abs() < 1e-9;
        check!(same, "{} {:?}: got {} via {method} ({})", g.passage_id, g.span, l.diagram_id, l.score);
        if l.method == LinkMethod::Structure && (l.score - 0.9).abs() < 1e-9 {
            let label = l.mention.label_token.as_deref().unwrap_or("");
            let label_score = corpus
                .diagrams_in_document(&corpus.passage(&l.mention.passage_id).unwrap().doc_id)
                .filter_map(|d| d.label.as_deref())
                .map(|dl| common::indel_ratio_oracle(label, dl))
                .fold(0.0, f64::max);
            structure_case |= (label_score - 2.0 / 3.0).abs() < 1e-9;
        }
        text_exact |= l.method == LinkMethod::Text && l.score == 1.0;
    }
    check!(structure_case, "no structure-over-label case at 0.9 vs 0.667");
    check!(text_exact, "no exact label link");
    Ok(format!("{} gold links reproduced; structure 0.9 beats label 0.667; exact label at 1.0", gold.len()))
}

fn fusion_dominance() -> Outcome {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let pool = common::RANDOM_QUERY_SMILES;
    for trial in 0..100 {
        let e = Engine::build(common::random_corpus(trial, 30), EngineConfig::default(), Execution::Parallel)
            .map_err(|e| e.to_string())?;
        let n = rng.random_range(1..=3);
        let smiles: Vec<&str> = (0..n).map(|_| pool[rng.random_range(0..pool.len())]).collect();
        let text = ["coupling yield", "burke group", "palladium", "acid base"][rng.random_range(0..4)];
        let q = parse_query(Some(text), Some(&smiles.join(",")), None, Some(1000)).map_err(|e| e.to_string())?;
        let results = e.search(&q).map_err(|e| e.to_string())?.results;
        // Recount matches independently: query compounds contained in the
        // passage's named compounds.
        let queries: Vec<_> = smiles.iter().map(|s| parse_smiles(s).unwrap()).collect();
        let counts: Vec<usize> = results
            .iter()
            .map(|r| {
                let p = e.corpus().passage(&r.passage_id).unwrap();
                let compounds: Vec<_> = p
                    .compound_names
                    .iter()
                    .filter_map(|n| e.corpus().name_smiles(n))
                    .map(|s| parse_smiles(s).unwrap())
                    .collect();
                let distinct: BTreeSet<String> = queries.iter().map(canonical_smiles).collect();
                distinct
                    .iter()
                    .filter(|c| {
                        let q = parse_smiles(c).unwrap();
                        compounds.iter().any(|t| has_substructure(&q, t))
                    })
                    .count()
            })
            .collect();
        for (i, a) in counts.iter().enumerate() {
            check!(
                counts[i + 1..].iter().all(|b| b <= a),
                "trial {trial}: {} ranked above a passage with more matches",
                results[i].passage_id
            );
        }

        // Text only: same bytes as the BM25 ranking, and the same order as
        // an independent scoring of the indexed texts.
        let r = e.search(&parse_query(Some(text), None, None, Some(1000)).unwrap()).unwrap();
        let engine_json = serde_json::to_string(
            &r.results.iter().map(|x| (&x.passage_id, x.text_score)).collect::<Vec<_>>(),
        )
        .unwrap();
        let bm25_json = serde_json::to_string(
            &e.text_index()
                .search_text(text, 1000)
                .iter()
                .map(|&(o, s)| (&e.indexed_passages()[o], s))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        check!(engine_json == bm25_json, "trial {trial}: text-only order differs from BM25");
        let vocab = FragmentVocabulary::default();
        let tokens: Vec<Vec<String>> = e
            .indexed_passages()
            .iter()
            .map(|id| tokenize_text(&indexed_text(e.corpus(), e.corpus().passage(id).unwrap()), &vocab))
            .collect();
        let docs: Vec<Vec<&str>> = tokens.iter().map(|t| t.iter().map(String::as_str).collect()).collect();
        let qt = tokenize_text(text, &vocab);
        let qt: Vec<&str> = qt.iter().map(String::as_str).collect();
        let mut oracle: Vec<(usize, f64)> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| (i, common::bm25_oracle(&qt, d, &docs, 1.2, 0.75)))
            .filter(|&(_, s)| s > 0.0)
            .collect();
        oracle.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let oracle_ids: Vec<&String> = oracle.iter().map(|&(i, _)| &e.indexed_passages()[i]).collect();
        let got_ids: Vec<&String> = r.results.iter().map(|x| &x.passage_id).collect();
        check!(oracle_ids == got_ids, "trial {trial}: text-only order differs from the written-out formula");
    }
    Ok("100 randomized corpora, no inversions; text-only output byte-identical to BM25".into())
}

struct Canned {
    name: &'static str,
    args: &'static [&'static str],
}

const CANNED: &[Canned] = &[
    Canned {
        name: "text_only",
        args: &["--text", "phenylboronic acid coupling"],
    },
    Canned {
        name: "smiles_only",
        args: &["--smiles", "c1ccc(-c2ccccc2)cc1"],
    },
    Canned {
        name: "smarts_only",
        args: &["--reaction", "COc1ccc(Br)cc1.OB(O)c1ccccc1>>COc1ccc(-c2ccccc2)cc1"],
    },
    Canned {
        name: "multimodal",
        args: &[
            "--text",
            "Burke group",
            "--reaction",
            "Brc1ccccc1.OB(O)c1ccccc1>>c1ccc(-c2ccccc2)cc1",
        ],
    },
    Canned {
        name: "derivative",
        args: &["--smiles", "c1ccc2c(c1)sc1ccccc12"],
    },
];

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_chemsearch"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn api_stats(snapshot: &Path) -> Result<Value, String> {
    let state = AppState::from_snapshot(snapshot, Execution::Parallel).map_err(|e| e.to_string())?;
    let app = router(state, &StaticDirs::default());
    let rt = tokio::runtime::Builder::new_current_thread().build().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let res = app
            .oneshot(Request::get("/api/stats").body(Body::empty()).unwrap())
            .await
            .map_err(|e| e.to_string())?;
        let bytes = res.into_body().collect().await.map_err(|e| e.to_string())?.to_bytes();
        serde_json::from_slice(&bytes).map_err(|e| e.to_string())
    })
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let snapshot = dir.path().join("fixture.snapshot");
    let corpus = common::mini_corpus_dir();
    run_cli(&["index", "build", "--corpus", corpus.to_str().unwrap(), "--out", snapshot.to_str().unwrap()])?;
    let snap = snapshot.to_str().unwrap();
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut outputs = Vec::new();
    for c in CANNED {
        let mut args = vec!["search", "--snapshot", snap];
        args.extend_from_slice(c.args);
        let got = run_cli(&args)?;
        let path = golden_dir().join(format!("{}.json", c.name));
        if update {
            std::fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
            std::fs::write(&path, &got).map_err(|e| e.to_string())?;
        }
        let want = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        check!(got == want, "{} differs from {}", c.name, path.display());
        outputs.push(serde_json::from_str::<Value>(&got).map_err(|e| e.to_string())?);
    }

    // Spot checks that do not depend on the goldens being right.
    let first = |v: &Value| v["documents"][0]["results"][0]["passage_id"].as_str().map(str::to_string);
    check!(first(&outputs[3]).as_deref() == Some("burke-p02"), "multimodal top hit {:?}", first(&outputs[3]));
    let derivative_hit = outputs[4]["query_compounds"][0]["similar"]
        .as_array()
        .into_iter()
        .flatten()
        .find(|h| h["canonical"] == "B(c1cc2ccccc2s1)(O)O")
        .and_then(|h| h["score"].as_f64());
    check!(
        derivative_hit.is_some_and(|s| s > 0.0 && s < 1.0),
        "boronic acid derivative not among similar hits: {derivative_hit:?}"
    );

    let expected = [
        ("documents", 3),
        ("passages_extracted", 12),
        ("passages_indexed", 10),
        ("unique_compounds", 9),
        ("reactions", 5),
    ];
    let stats = api_stats(&snapshot)?;
    let cli_stats: Value = serde_json::from_str(&run_cli(&["stats", "--snapshot", snap])?).map_err(|e| e.to_string())?;
    for (field, n) in expected {
        check!(stats[field] == n, "/api/stats {field} = {}", stats[field]);
        check!(cli_stats[field] == n, "stats command {field} = {}", cli_stats[field]);
    }
    Ok(format!(
        "{} golden queries match{}; /api/stats {{3, 12, 10, 9, 5}}",
        CANNED.len(),
        if update { " (rewritten)" } else { "" }
    ))
}

fn main() {
    let criteria: &[Criterion] = &[
        ("smiles round trip", smiles_round_trip),
        ("fingerprint and tanimoto suite", fingerprint_suite),
        ("substructure oracle", substructure_oracle),
        ("bm25 exactness", bm25_exactness),
        ("systematic name tokenizer", iupac_example),
        ("reaction smarts", reaction_smarts),
        ("mention linking", linking_gold),
        ("fusion dominance", fusion_dominance),
        ("end to end", end_to_end),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name:<32} {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name:<32} {detail} [{secs:.2}s]");
            }
        }
    }
    let total = start.elapsed().as_secs_f64();
    let within = total < 60.0;
    println!(
        "{}  {:<32} {} of {} passed in {total:.1}s (limit 60s)",
        if failed == 0 && within { "PASS" } else { "FAIL" },
        "acceptance total",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 || !within {
        std::process::exit(1);
    }
}
