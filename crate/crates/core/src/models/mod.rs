//! Topic model training: collapsed Gibbs LDA (plain or on a bigram-merged
//! corpus) and LSI via TF-IDF plus randomized truncated SVD.

mod lda;
mod lsi;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lda::{infer_doc_topics, train_lda, FoldInConfig, LdaConfig};
pub use lsi::{lsi_components, tfidf_matrix, train_lsi, LsiConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "LDA")]
    Lda,
    #[serde(rename = "BiLDA")]
    BiLda,
    #[serde(rename = "LSI")]
    Lsi,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Lda => "LDA",
            ModelKind::BiLda => "BiLDA",
            ModelKind::Lsi => "LSI",
        }
    }

    /// Bigram LDA belongs to the LDA family.
    pub fn family(self) -> &'static str {
        match self {
            ModelKind::Lda | ModelKind::BiLda => "LDA",
            ModelKind::Lsi => "LSI",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "lda" => Some(ModelKind::Lda),
            "bilda" | "bigramlda" => Some(ModelKind::BiLda),
            "lsi" => Some(ModelKind::Lsi),
            _ => None,
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelConfig {
    Lda(LdaConfig),
    Lsi(LsiConfig),
}

/// A trained topic model: `phi[t][w] = p(w|t)`, `theta[d][t] = p(t|d)` and
/// the token-mass-weighted topic prevalence `p(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub kind: ModelKind,
    pub config: ModelConfig,
    pub vocab: Vec<String>,
    pub phi: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub topic_marginal: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singular_values: Option<Vec<f64>>,
    /// Components with no support (LSI asked for more components than the rank).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate_components: Vec<usize>,
}

impl TopicModel {
    pub fn num_topics(&self) -> usize {
        self.phi.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn term_id(&self, term: &str) -> Option<usize> {
        self.vocab.binary_search_by(|t| t.as_str().cmp(term)).ok().or_else(|| {
            self.vocab.iter().position(|t| t == term)
        })
    }

    /// The `n` most probable terms of topic `t`, ties broken by token string.
    pub fn top_terms(&self, t: usize, n: usize) -> Result<Vec<String>> {
        Ok(self
            .top_term_ids(t, n)?
            .into_iter()
            .map(|w| self.vocab[w].clone())
            .collect())
    }

    pub fn top_term_ids(&self, t: usize, n: usize) -> Result<Vec<usize>> {
        let row = self.phi.get(t).ok_or(Error::TopicOutOfRange {
            topic: t,
            k: self.num_topics(),
        })?;
        let mut ids: Vec<usize> = (0..row.len()).collect();
        ids.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then_with(|| self.vocab[a].cmp(&self.vocab[b])));
        ids.truncate(n);
        Ok(ids)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// `p(t) = sum_d N_d theta[d][t] / sum_d N_d`; uniform when the corpus is empty.
pub(crate) fn token_mass_marginal(theta: &[Vec<f64>], doc_lengths: &[usize], k: usize) -> Vec<f64> {
    let total: usize = doc_lengths.iter().sum();
    if total == 0 {
        return vec![1.0 / k as f64; k];
    }
    let mut p = vec![0.0; k];
    for (row, &n) in theta.iter().zip(doc_lengths) {
        for (pt, &x) in p.iter_mut().zip(row) {
            *pt += n as f64 * x;
        }
    }
    normalize(&mut p);
    p
}

/// Scale to sum 1; an all-zero vector becomes uniform.
pub(crate) fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 && s.is_finite() {
        v.iter_mut().for_each(|x| *x /= s);
    } else if !v.is_empty() {
        let u = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|x| *x = u);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(phi: Vec<Vec<f64>>, vocab: &[&str]) -> TopicModel {
        let k = phi.len();
        TopicModel {
            kind: ModelKind::Lda,
            config: ModelConfig::Lda(LdaConfig::with_topics(k)),
            vocab: vocab.iter().map(|s| s.to_string()).collect(),
            phi,
            theta: vec![],
            topic_marginal: vec![1.0 / k as f64; k],
            singular_values: None,
            degenerate_components: vec![],
        }
    }

    #[test]
    fn top_terms_sorted_with_lexicographic_ties() {
        let m = model(vec![vec![0.2, 0.5, 0.3]], &["c", "a", "b"]);
        assert_eq!(m.top_terms(0, 2).unwrap(), ["a", "b"]);
        let m = model(vec![vec![0.5, 0.5]], &["b", "a"]);
        assert_eq!(m.top_terms(0, 2).unwrap(), ["a", "b"]);
    }

    #[test]
    fn top_terms_clamps_and_checks_range() {
        let m = model(vec![vec![0.25; 4]], &["a", "b", "c", "d"]);
        assert_eq!(m.top_terms(0, 10).unwrap().len(), 4);
        assert!(matches!(m.top_terms(1, 3), Err(Error::TopicOutOfRange { .. })));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in [ModelKind::Lda, ModelKind::BiLda, ModelKind::Lsi] {
            assert_eq!(ModelKind::parse(k.name()), Some(k));
        }
        assert_eq!(ModelKind::BiLda.family(), "LDA");
    }
}
