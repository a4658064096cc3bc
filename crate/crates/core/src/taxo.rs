//! Concept-set canonicalization and Jaccard comparison of taxonomies.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stem::stem_to_fixed_point;

/// Largest side for which the assignment is searched exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 8;

/// Lowercase, split on non-alphanumerics, stem each token and rejoin with `_`.
pub fn canonicalize_concept(concept: &str) -> String {
    concept
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(stem_to_fixed_point)
        .collect::<Vec<_>>()
        .join("_")
}

pub fn canonicalize_concepts<S: AsRef<str>>(concepts: &[S]) -> BTreeSet<String> {
    concepts
        .iter()
        .map(|c| canonicalize_concept(c.as_ref()))
        .filter(|c| !c.is_empty())
        .collect()
}

/// `|A ∩ B| / |A ∪ B|`.
pub fn jaccard_similarity(a: &BTreeSet<String>, b: &BTreeSet<String>) -> Result<f64> {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return Err(Error::EmptyUnion);
    }
    Ok(inter as f64 / union as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theme {
    pub name: String,
    pub concepts: Vec<String>,
}

/// Named concept sets. Serializes as `{"themes": [{"name", "concepts"}]}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    pub themes: Vec<Theme>,
}

impl Taxonomy {
    pub fn from_lists<S: AsRef<str>>(lists: &[(&str, &[S])]) -> Self {
        Self {
            themes: lists
                .iter()
                .map(|(name, concepts)| Theme {
                    name: name.to_string(),
                    concepts: concepts.iter().map(|c| c.as_ref().to_string()).collect(),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.themes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.themes.is_empty()
    }

    pub fn canonical_sets(&self) -> Vec<BTreeSet<String>> {
        self.themes.iter().map(|t| canonicalize_concepts(&t.concepts)).collect()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicMatch {
    pub topic: usize,
    pub topic_name: String,
    /// Matched reference theme; `None` when the reference has fewer themes.
    pub theme: Option<usize>,
    pub theme_name: Option<String>,
    pub jaccard: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyReport {
    /// One entry per generated topic, in topic order.
    pub assignment: Vec<TopicMatch>,
    pub per_topic_jaccard: Vec<f64>,
    /// Mean over `max(|generated|, |reference|)` slots; unmatched slots count 0.
    pub average: f64,
    pub exhaustive: bool,
    pub unmatched_topics: Vec<usize>,
    pub unmatched_themes: Vec<usize>,
}

fn safe_jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    jaccard_similarity(a, b).unwrap_or(0.0)
}

/// Best injective map from the smaller side into the larger, by total score.
/// Ties go to the lexicographically smallest assignment.
fn exhaustive_assignment(score: &[Vec<f64>]) -> Vec<usize> {
    let rows = score.len();
    let cols = score.first().map_or(0, Vec::len);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut current = Vec::with_capacity(rows);
    let mut used = vec![false; cols];
    fn go(
        score: &[Vec<f64>],
        current: &mut Vec<usize>,
        used: &mut [bool],
        acc: f64,
        best: &mut (f64, Vec<usize>),
    ) {
        if current.len() == score.len() {
            if acc > best.0 + 1e-12 {
                *best = (acc, current.clone());
            }
            return;
        }
        let r = current.len();
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                current.push(c);
                go(score, current, used, acc + score[r][c], best);
                current.pop();
                used[c] = false;
            }
        }
    }
    go(score, &mut current, &mut used, 0.0, &mut best);
    best.1
}

fn greedy_assignment(score: &[Vec<f64>]) -> Vec<usize> {
    let rows = score.len();
    let cols = score.first().map_or(0, Vec::len);
    let mut cells: Vec<(usize, usize)> = (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).collect();
    cells.sort_by(|&(r1, c1), &(r2, c2)| score[r2][c2].total_cmp(&score[r1][c1]).then((r1, c1).cmp(&(r2, c2))));
    let mut out = vec![usize::MAX; rows];
    let mut used = vec![false; cols];
    for (r, c) in cells {
        if out[r] == usize::MAX && !used[c] {
            out[r] = c;
            used[c] = true;
        }
    }
    out
}

/// Per-topic Jaccard under the topic-to-theme assignment maximizing the total.
pub fn compare_taxonomies(generated: &Taxonomy, reference: &Taxonomy) -> Result<TaxonomyReport> {
    if generated.is_empty() || reference.is_empty() {
        return Err(Error::InvalidConfig("taxonomies must be nonempty".into()));
    }
    let gen_sets = generated.canonical_sets();
    let ref_sets = reference.canonical_sets();
    let transpose = gen_sets.len() > ref_sets.len();
    let (small, large) = if transpose { (&ref_sets, &gen_sets) } else { (&gen_sets, &ref_sets) };
    let score: Vec<Vec<f64>> = small
        .iter()
        .map(|a| large.iter().map(|b| safe_jaccard(a, b)).collect())
        .collect();
    let exhaustive = small.len() <= EXHAUSTIVE_LIMIT;
    let map = if exhaustive {
        exhaustive_assignment(&score)
    } else {
        greedy_assignment(&score)
    };

    let mut theme_of = vec![None; gen_sets.len()];
    for (s, &l) in map.iter().enumerate() {
        if transpose {
            theme_of[l] = Some(s);
        } else {
            theme_of[s] = Some(l);
        }
    }
    let assignment: Vec<TopicMatch> = theme_of
        .iter()
        .enumerate()
        .map(|(t, th)| TopicMatch {
            topic: t,
            topic_name: generated.themes[t].name.clone(),
            theme: *th,
            theme_name: th.map(|r| reference.themes[r].name.clone()),
            jaccard: th.map_or(0.0, |r| safe_jaccard(&gen_sets[t], &ref_sets[r])),
        })
        .collect();
    let per_topic_jaccard: Vec<f64> = assignment.iter().map(|m| m.jaccard).collect();
    let slots = gen_sets.len().max(ref_sets.len());
    let average = per_topic_jaccard.iter().sum::<f64>() / slots as f64;
    let unmatched_topics = (0..gen_sets.len()).filter(|&t| theme_of[t].is_none()).collect();
    let unmatched_themes = (0..ref_sets.len())
        .filter(|r| !theme_of.contains(&Some(*r)))
        .collect();
    Ok(TaxonomyReport {
        assignment,
        per_topic_jaccard,
        average,
        exhaustive,
        unmatched_topics,
        unmatched_themes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canonicalize_concept("running"), "run");
        assert_eq!(canonicalize_concept("spike"), "spike");
        assert_eq!(canonicalize_concept("Cognitive Informatics"), "cognit_informat");
        assert_eq!(canonicalize_concepts(&["Networks", "network"]).len(), 1);
    }

    #[test]
    fn jaccard_units() {
        let a = set(&["a", "b", "c"]);
        assert_eq!(jaccard_similarity(&a, &a).unwrap(), 1.0);
        assert_eq!(jaccard_similarity(&a, &set(&["x"])).unwrap(), 0.0);
        assert_eq!(jaccard_similarity(&a, &set(&["b", "c", "d"])).unwrap(), 0.5);
        assert!(matches!(jaccard_similarity(&set(&[]), &set(&[])), Err(Error::EmptyUnion)));
    }

    #[test]
    fn assignment_absorbs_order() {
        let g = Taxonomy::from_lists(&[("t0", &["alpha", "beta"][..]), ("t1", &["gamma", "delta"][..])]);
        let r = Taxonomy::from_lists(&[("x", &["gamma", "delta"][..]), ("y", &["beta", "alpha"][..])]);
        let rep = compare_taxonomies(&g, &r).unwrap();
        assert_eq!(rep.average, 1.0);
        assert_eq!(rep.assignment[0].theme, Some(1));
    }

    #[test]
    fn hand_case_three_quarters() {
        let g = Taxonomy::from_lists(&[("t0", &["a", "b"][..]), ("t1", &["c", "d"][..])]);
        let r = Taxonomy::from_lists(&[("x", &["a", "b"][..]), ("y", &["c"][..])]);
        assert!((compare_taxonomies(&g, &r).unwrap().average - 0.75).abs() < 1e-12);
    }

    #[test]
    fn size_mismatch_flags_unmatched() {
        let g = Taxonomy::from_lists(&[("t0", &["a"][..]), ("t1", &["b"][..]), ("t2", &["c"][..])]);
        let r = Taxonomy::from_lists(&[("x", &["b"][..])]);
        let rep = compare_taxonomies(&g, &r).unwrap();
        assert_eq!(rep.unmatched_topics, vec![0, 2]);
        assert!((rep.average - 1.0 / 3.0).abs() < 1e-12);
    }

    fn random_scores() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1usize..6).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0.0f64..1.0, n), n))
    }

    proptest! {
        #[test]
        fn exhaustive_dominates_greedy(score in random_scores()) {
            let total = |m: &[usize]| m.iter().enumerate().map(|(r, &c)| score[r][c]).sum::<f64>();
            prop_assert!(total(&exhaustive_assignment(&score)) >= total(&greedy_assignment(&score)) - 1e-12);
        }

        #[test]
        fn jaccard_symmetric_and_bounded(
            a in prop::collection::btree_set("[a-e]", 0..5),
            b in prop::collection::btree_set("[a-e]", 1..5),
        ) {
            let j = jaccard_similarity(&a, &b).unwrap();
            prop_assert_eq!(j, jaccard_similarity(&b, &a).unwrap());
            prop_assert!((0.0..=1.0).contains(&j));
        }
    }
}
