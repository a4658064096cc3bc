use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::models::TopicModel;

pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Boolean sliding-window occurrence counts for a fixed set of words.
///
/// A document no longer than the window contributes exactly one window
/// (itself); a longer document of length `L` contributes `L - window + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceStats {
    pub window: usize,
    pub epsilon: f64,
    pub total_windows: u64,
    words: Vec<u32>,
    index: HashMap<u32, usize>,
    counts: Vec<u64>,
    /// Dense symmetric `m x m` joint counts over `words`.
    pair_counts: Vec<u64>,
}

impl CooccurrenceStats {
    pub fn from_docs(docs: &[Vec<u32>], words: &[u32], window: usize, epsilon: f64) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidConfig("window must be at least 1".into()));
        }
        let words: Vec<u32> = words.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let m = words.len();
        let index: HashMap<u32, usize> = words.iter().enumerate().map(|(i, &w)| (w, i)).collect();
        let mut counts = vec![0u64; m];
        let mut pair_counts = vec![0u64; m * m];
        let mut total_windows = 0u64;

        let mut in_window = vec![0u32; m];
        let mut present: BTreeSet<usize> = BTreeSet::new();
        let record = |present: &BTreeSet<usize>, counts: &mut [u64], pair_counts: &mut [u64]| {
            let p: Vec<usize> = present.iter().copied().collect();
            for (x, &i) in p.iter().enumerate() {
                counts[i] += 1;
                for &j in &p[x + 1..] {
                    pair_counts[i * m + j] += 1;
                    pair_counts[j * m + i] += 1;
                }
            }
        };

        for doc in docs {
            if doc.is_empty() {
                continue;
            }
            let ids: Vec<Option<usize>> = doc.iter().map(|w| index.get(w).copied()).collect();
            let span = window.min(ids.len());
            in_window.iter_mut().for_each(|c| *c = 0);
            present.clear();
            for &slot in ids[..span].iter().flatten() {
                in_window[slot] += 1;
                present.insert(slot);
            }
            record(&present, &mut counts, &mut pair_counts);
            total_windows += 1;
            for start in 1..=ids.len() - span {
                if let Some(out) = ids[start - 1] {
                    in_window[out] -= 1;
                    if in_window[out] == 0 {
                        present.remove(&out);
                    }
                }
                if let Some(inc) = ids[start + span - 1] {
                    in_window[inc] += 1;
                    present.insert(inc);
                }
                record(&present, &mut counts, &mut pair_counts);
                total_windows += 1;
            }
        }
        if total_windows == 0 {
            return Err(Error::DegenerateCorpus("no windows to count".into()));
        }
        Ok(Self {
            window,
            epsilon,
            total_windows,
            words,
            index,
            counts,
            pair_counts,
        })
    }

    pub fn words(&self) -> &[u32] {
        &self.words
    }

    /// Number of windows containing `w`.
    pub fn count(&self, w: u32) -> u64 {
        self.index.get(&w).map_or(0, |&i| self.counts[i])
    }

    /// Number of windows containing both `a` and `b`.
    pub fn pair_count(&self, a: u32, b: u32) -> u64 {
        if a == b {
            return self.count(a);
        }
        match (self.index.get(&a), self.index.get(&b)) {
            (Some(&i), Some(&j)) => self.pair_counts[i * self.counts.len() + j],
            _ => 0,
        }
    }

    pub fn npmi(&self, a: u32, b: u32) -> f64 {
        let n = self.total_windows as f64;
        npmi(
            self.count(a) as f64 / n,
            self.count(b) as f64 / n,
            self.pair_count(a, b) as f64 / n,
            self.epsilon,
        )
    }
}

/// Normalized PMI `ln((p_ab + eps) / (p_a p_b)) / -ln(p_ab + eps)`, clamped to [-1, 1].
///
/// Zero marginals give 0; a pair present in every window gives 1.
pub fn npmi(p_a: f64, p_b: f64, p_ab: f64, epsilon: f64) -> f64 {
    if p_a <= 0.0 || p_b <= 0.0 {
        return 0.0;
    }
    let joint = p_ab + epsilon;
    let denom = -joint.ln();
    if denom <= 0.0 {
        return 1.0;
    }
    ((joint / (p_a * p_b)).ln() / denom).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub score: f64,
    pub per_topic: Vec<f64>,
    /// Topics with fewer than two top words in the reference corpus.
    pub flagged_topics: Vec<usize>,
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// C_v coherence of each topic's `top_n` words against `corpus`.
///
/// Each top word becomes its NPMI vector against the topic's top-word set;
/// the topic scores the mean cosine between those vectors and their sum.
/// The model score is the mean over topics.
pub fn coherence_cv(model: &TopicModel, corpus: &Corpus, top_n: usize, window: usize) -> Result<CoherenceReport> {
    let mut topic_words = Vec::with_capacity(model.num_topics());
    for t in 0..model.num_topics() {
        let words: Vec<u32> = model
            .top_terms(t, top_n)?
            .iter()
            .filter_map(|w| corpus.vocab().id(w))
            .collect();
        topic_words.push(words);
    }
    let all: Vec<u32> = topic_words.iter().flatten().copied().collect();
    let stats = CooccurrenceStats::from_docs(corpus.docs(), &all, window, DEFAULT_EPSILON)?;

    let mut per_topic = Vec::with_capacity(topic_words.len());
    let mut flagged = Vec::new();
    for (t, words) in topic_words.iter().enumerate() {
        if words.len() < 2 {
            per_topic.push(0.0);
            flagged.push(t);
            continue;
        }
        per_topic.push(topic_cv(&stats, words));
    }
    let score = if per_topic.is_empty() {
        0.0
    } else {
        per_topic.iter().sum::<f64>() / per_topic.len() as f64
    };
    Ok(CoherenceReport {
        score,
        per_topic,
        flagged_topics: flagged,
    })
}

pub(crate) fn topic_cv(stats: &CooccurrenceStats, words: &[u32]) -> f64 {
    let vectors: Vec<Vec<f64>> = words
        .iter()
        .map(|&wi| words.iter().map(|&wj| stats.npmi(wi, wj)).collect())
        .collect();
    let mut total = vec![0.0; words.len()];
    for v in &vectors {
        for (t, x) in total.iter_mut().zip(v) {
            *t += x;
        }
    }
    vectors.iter().map(|v| cosine(v, &total)).sum::<f64>() / vectors.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{LdaConfig, ModelConfig, ModelKind};

    fn model_with_top(vocab: &[&str], rows: Vec<Vec<f64>>) -> TopicModel {
        let k = rows.len();
        TopicModel {
            kind: ModelKind::Lda,
            config: ModelConfig::Lda(LdaConfig::with_topics(k)),
            vocab: vocab.iter().map(|s| s.to_string()).collect(),
            phi: rows,
            theta: vec![],
            topic_marginal: vec![1.0 / k as f64; k],
            singular_values: None,
            degenerate_components: vec![],
        }
    }

    #[test]
    fn perfect_cooccurrence_scores_one() {
        let docs: Vec<Vec<&str>> = (0..6).map(|_| vec!["a", "b", "c"]).collect();
        let c = Corpus::from_token_docs(&docs, 1).unwrap();
        let m = model_with_top(&["a", "b", "c"], vec![vec![0.4, 0.3, 0.3]]);
        let r = coherence_cv(&m, &c, 10, 110).unwrap();
        assert!((r.score - 1.0).abs() < 1e-12, "{}", r.score);
    }

    #[test]
    fn window_longer_than_doc_counts_documents() {
        let docs = vec![vec![1u32, 2, 3], vec![2, 3], vec![1]];
        let s = CooccurrenceStats::from_docs(&docs, &[1, 2, 3], 110, DEFAULT_EPSILON).unwrap();
        assert_eq!(s.total_windows, 3);
        assert_eq!(s.count(2), 2);
        assert_eq!(s.pair_count(1, 2), 1);
        assert_eq!(s.pair_count(2, 3), 2);
    }

    #[test]
    fn sliding_windows_over_long_doc() {
        let docs = vec![vec![1u32, 9, 9, 2]];
        let s = CooccurrenceStats::from_docs(&docs, &[1, 2], 2, DEFAULT_EPSILON).unwrap();
        assert_eq!(s.total_windows, 3);
        assert_eq!(s.count(1), 1);
        assert_eq!(s.count(2), 1);
        assert_eq!(s.pair_count(1, 2), 0);
    }

    #[test]
    fn npmi_limits() {
        assert_eq!(npmi(0.0, 0.5, 0.0, DEFAULT_EPSILON), 0.0);
        assert_eq!(npmi(1.0, 1.0, 1.0, DEFAULT_EPSILON), 1.0);
        assert!((npmi(0.5, 0.5, 0.5, 0.0) - 1.0).abs() < 1e-12);
        let expected = (1e-12f64 / 0.25).ln() / -(1e-12f64).ln();
        assert!((npmi(0.5, 0.5, 0.0, DEFAULT_EPSILON) - expected).abs() < 1e-12);
    }

    #[test]
    fn short_topic_flagged() {
        let docs: Vec<Vec<&str>> = (0..3).map(|_| vec!["a", "b"]).collect();
        let c = Corpus::from_token_docs(&docs, 1).unwrap();
        let m = model_with_top(&["a", "b", "zz"], vec![vec![0.1, 0.1, 0.8], vec![0.5, 0.5, 0.0]]);
        let r = coherence_cv(&m, &c, 2, 110).unwrap();
        assert_eq!(r.flagged_topics, vec![0]);
        assert_eq!(r.per_topic[0], 0.0);
    }
}
