use topictaxo::stem::{porter_stem, stem_to_fixed_point};

const REFERENCE: &str = include_str!("fixtures/porter_reference.tsv");

fn pairs() -> impl Iterator<Item = (&'static str, &'static str)> {
    REFERENCE
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split_once('\t').expect("word<TAB>stem"))
}

#[test]
fn matches_reference_vocabulary() {
    let mismatches: Vec<String> = pairs()
        .filter(|(w, s)| porter_stem(w) != *s)
        .map(|(w, s)| format!("{w}: got {}, want {s}", porter_stem(w)))
        .collect();
    assert!(pairs().count() > 2000);
    assert!(mismatches.is_empty(), "{}", mismatches.join("\n"));
}

#[test]
fn fixed_point_is_stable_on_reference_words() {
    for (w, _) in pairs() {
        let s = stem_to_fixed_point(w);
        assert_eq!(porter_stem(&s), s, "{w}");
    }
}
