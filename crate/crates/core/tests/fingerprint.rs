mod common;

use chemsearch_core::fingerprint::{default_fingerprint, morgan_fingerprint, tanimoto, Fingerprint, FingerprintError};
use chemsearch_core::molgraph::{parse_smiles, randomized_smiles};
use proptest::prelude::*;

fn fps() -> Vec<(String, Fingerprint)> {
    common::reference_graphs()
        .into_iter()
        .map(|(n, g)| (n, default_fingerprint(&g)))
        .collect()
}

#[test]
fn pairwise_properties() {
    let fps = fps();
    for (na, a) in &fps {
        assert_eq!(tanimoto(a, a).unwrap().value(), 1.0, "{na}");
        for (nb, b) in &fps {
            let ab = tanimoto(a, b).unwrap().value();
            assert!((0.0..=1.0).contains(&ab), "{na} {nb}");
            assert_eq!(ab, tanimoto(b, a).unwrap().value(), "{na} {nb}");
            // Independent count over the bit lists.
            let sa: std::collections::BTreeSet<usize> = a.ones().collect();
            let sb: std::collections::BTreeSet<usize> = b.ones().collect();
            let union = sa.union(&sb).count();
            let expected = if union == 0 { 0.0 } else { sa.intersection(&sb).count() as f64 / union as f64 };
            assert_eq!(ab, expected, "{na} {nb}");
        }
    }
}

#[test]
fn order_invariance() {
    for (name, g) in common::reference_graphs() {
        let fp = default_fingerprint(&g);
        for seed in 0..20 {
            let r = parse_smiles(&randomized_smiles(&g, seed)).unwrap();
            assert_eq!(default_fingerprint(&r), fp, "{name} seed {seed}");
        }
    }
}

#[test]
fn nitrogen_changes_bits() {
    let benzene = default_fingerprint(&parse_smiles("c1ccccc1").unwrap());
    let pyridine = default_fingerprint(&parse_smiles("c1ccncc1").unwrap());
    assert_ne!(benzene, pyridine);
    assert!(tanimoto(&benzene, &pyridine).unwrap().value() < 1.0);
}

#[test]
fn width_and_radius() {
    let g = parse_smiles("CCOc1ccccc1").unwrap();
    let small = morgan_fingerprint(&g, 2, 64);
    assert_eq!(small.width(), 64);
    assert!(matches!(
        tanimoto(&small, &default_fingerprint(&g)),
        Err(FingerprintError::WidthMismatch(..))
    ));
    // A larger radius only adds environments.
    let r1: Vec<_> = morgan_fingerprint(&g, 1, 2048).ones().collect();
    let r2: Vec<_> = morgan_fingerprint(&g, 2, 2048).ones().collect();
    assert!(r1.iter().all(|b| r2.contains(b)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn random_molecules(a in common::arb_molecule(12), b in common::arb_molecule(12), seed in any::<u64>()) {
        let fa = default_fingerprint(&a);
        let fb = default_fingerprint(&b);
        let s = tanimoto(&fa, &fb).unwrap().value();
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s, tanimoto(&fb, &fa).unwrap().value());
        prop_assert_eq!(tanimoto(&fa, &fa).unwrap().value(), 1.0);
        let shuffled = parse_smiles(&randomized_smiles(&a, seed)).unwrap();
        prop_assert_eq!(default_fingerprint(&shuffled), fa);
    }
}
