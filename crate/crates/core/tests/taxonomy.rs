use std::path::Path;

use proptest::prelude::*;
use topictaxo::taxo::{canonicalize_concept, compare_taxonomies, Taxonomy};

#[test]
fn reference_fixture_loads() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/planted40_reference.json");
    let t = Taxonomy::load(&path).unwrap();
    assert_eq!(t.len(), 4);
    assert!(t.themes.iter().all(|th| !th.concepts.is_empty()));
}

#[test]
fn inflections_share_a_canonical_form() {
    for group in [
        &["memristor", "memristors", "Memristors"][..],
        &["neural network", "neural-networks", "Neural Networks"],
        &["reasoning", "reasoned", "reason"],
    ] {
        let forms: Vec<String> = group.iter().map(|c| canonicalize_concept(c)).collect();
        assert!(forms.windows(2).all(|w| w[0] == w[1]), "{forms:?}");
    }
}

#[test]
fn larger_side_counts_unmatched_slots() {
    let g = Taxonomy::from_lists(&[("a", &["spike", "neuron"][..])]);
    let r = Taxonomy::from_lists(&[("x", &["spikes", "neurons"][..]), ("y", &["agent"][..])]);
    let rep = compare_taxonomies(&g, &r).unwrap();
    assert_eq!(rep.average, 0.5);
    assert_eq!(rep.unmatched_themes, vec![1]);
}

fn lists() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(prop::collection::vec("[a-f]{1,2}", 1..5), 1..6)
}

fn taxonomy(sets: &[Vec<String>]) -> Taxonomy {
    let names: Vec<String> = (0..sets.len()).map(|i| format!("t{i}")).collect();
    let pairs: Vec<(&str, &[String])> = names.iter().zip(sets).map(|(n, s)| (n.as_str(), s.as_slice())).collect();
    Taxonomy::from_lists(&pairs)
}

proptest! {
    #[test]
    fn average_is_symmetric_and_bounded(a in lists(), b in lists()) {
        let ab = compare_taxonomies(&taxonomy(&a), &taxonomy(&b)).unwrap();
        let ba = compare_taxonomies(&taxonomy(&b), &taxonomy(&a)).unwrap();
        prop_assert!((0.0..=1.0).contains(&ab.average));
        prop_assert!((ab.average - ba.average).abs() < 1e-12);
    }

    #[test]
    fn self_comparison_is_perfect(a in lists()) {
        let t = taxonomy(&a);
        let canon = t.canonical_sets();
        let distinct = canon.iter().collect::<std::collections::BTreeSet<_>>().len() == canon.len();
        let rep = compare_taxonomies(&t, &t).unwrap();
        prop_assert!(!distinct || (rep.average - 1.0).abs() < 1e-12);
    }
}
