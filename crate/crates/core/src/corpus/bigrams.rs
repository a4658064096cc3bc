use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::preprocess::TokenizedCorpus;
use crate::error::{Error, Result};

/// Collocation detection thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BigramPolicy {
    pub min_count: u64,
    pub threshold: f64,
    /// Keep the two unigrams next to the merged token instead of replacing them.
    pub keep_unigrams: bool,
}

impl Default for BigramPolicy {
    fn default() -> Self {
        Self {
            min_count: 5,
            threshold: 10.0,
            keep_unigrams: false,
        }
    }
}

impl BigramPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.min_count < 1 {
            return Err(Error::InvalidConfig("bigram min_count must be >= 1".into()));
        }
        if self.threshold.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::InvalidConfig("bigram threshold must be > 0".into()));
        }
        Ok(())
    }
}

/// `(count(ab) - min_count) * N / (count(a) * count(b))`.
pub fn bigram_score(count_ab: u64, count_a: u64, count_b: u64, total: u64, min_count: u64) -> f64 {
    if count_a == 0 || count_b == 0 {
        return 0.0;
    }
    (count_ab as f64 - min_count as f64) * total as f64 / (count_a as f64 * count_b as f64)
}

/// Merge high-scoring adjacent pairs into `a_b` tokens, one greedy
/// left-to-right pass per document. Counts come from the input corpus.
pub fn detect_bigrams(corpus: &TokenizedCorpus, policy: &BigramPolicy) -> TokenizedCorpus {
    let mut unigram: HashMap<&str, u64> = HashMap::new();
    let mut pairs: HashMap<(&str, &str), u64> = HashMap::new();
    for doc in &corpus.docs {
        for t in &doc.tokens {
            *unigram.entry(t).or_default() += 1;
        }
        for w in doc.tokens.windows(2) {
            *pairs.entry((&w[0], &w[1])).or_default() += 1;
        }
    }
    let total = corpus.total_tokens() as u64;
    let merges = |a: &str, b: &str| -> bool {
        let ab = pairs.get(&(a, b)).copied().unwrap_or(0);
        if ab < policy.min_count {
            return false;
        }
        bigram_score(ab, unigram[a], unigram[b], total, policy.min_count) >= policy.threshold
    };

    let mut out = corpus.clone();
    for doc in &mut out.docs {
        let src = std::mem::take(&mut doc.tokens);
        let mut merged = Vec::with_capacity(src.len());
        let mut i = 0;
        while i < src.len() {
            if i + 1 < src.len() && merges(&src[i], &src[i + 1]) {
                if policy.keep_unigrams {
                    merged.push(src[i].clone());
                    merged.push(src[i + 1].clone());
                }
                merged.push(format!("{}_{}", src[i], src[i + 1]));
                i += 2;
            } else {
                merged.push(src[i].clone());
                i += 1;
            }
        }
        doc.tokens = merged;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TokenizedDoc;
    use proptest::prelude::*;

    fn corpus(docs: Vec<Vec<&str>>) -> TokenizedCorpus {
        TokenizedCorpus {
            docs: docs
                .into_iter()
                .enumerate()
                .map(|(i, toks)| TokenizedDoc {
                    id: i.to_string(),
                    tokens: toks.into_iter().map(String::from).collect(),
                    sentences: vec![],
                })
                .collect(),
        }
    }

    #[test]
    fn hand_computed_score() {
        assert_eq!(bigram_score(50, 50, 50, 1000, 5), 18.0);
    }

    #[test]
    fn frequent_pair_merges() {
        // 50 "a b" pairs in a 1000-token corpus: score (50 - 5) * 1000 / 2500 = 18.
        let mut toks = Vec::new();
        for _ in 0..50 {
            toks.extend(["a", "b"]);
        }
        let filler: Vec<String> = (0..900).map(|i| format!("f{i}")).collect();
        let mut all: Vec<&str> = toks;
        all.extend(filler.iter().map(String::as_str));
        let c = corpus(vec![all]);
        let out = detect_bigrams(&c, &BigramPolicy::default());
        assert_eq!(out.docs[0].tokens.iter().filter(|t| *t == "a_b").count(), 50);
        assert_eq!(out.docs[0].tokens.len(), 950);
    }

    #[test]
    fn rare_pair_never_merges() {
        let c = corpus(vec![vec!["x", "y", "z"]]);
        let out = detect_bigrams(&c, &BigramPolicy::default());
        assert_eq!(out, c);
    }

    #[test]
    fn invalid_policy() {
        let p = BigramPolicy { min_count: 0, ..Default::default() };
        assert!(p.validate().is_err());
        let p = BigramPolicy { threshold: 0.0, ..Default::default() };
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn each_merge_shortens_by_one(
            docs in proptest::collection::vec(proptest::collection::vec(0u8..4, 0..40), 1..6),
            min_count in 1u64..4,
            threshold in 0.1f64..3.0,
        ) {
            let names = ["p", "q", "r", "s"];
            let c = corpus(docs.iter().map(|d| d.iter().map(|&t| names[t as usize]).collect()).collect());
            let out = detect_bigrams(&c, &BigramPolicy { min_count, threshold, keep_unigrams: false });
            for (a, b) in c.docs.iter().zip(&out.docs) {
                let merges = b.tokens.iter().filter(|t| t.contains('_')).count();
                prop_assert_eq!(a.tokens.len() - merges, b.tokens.len());
            }
        }
    }
}
