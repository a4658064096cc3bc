//! Term saliency and relevance, per-topic concept selection and the
//! inter-topic distance map.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Mat};
use crate::models::TopicModel;

/// Size of the per-topic saliency candidate pool.
pub const SALIENCY_POOL: usize = 30;
pub const DEFAULT_LAMBDA: f64 = 0.33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelevanceFormula {
    /// `lambda p(w|t) + (1 - lambda) p(w|t) / p(w)`
    #[default]
    Linear,
    /// `lambda ln p(w|t) + (1 - lambda) ln(p(w|t) / p(w))`
    Log,
}

pub fn relevance_score(p_w_given_t: f64, p_w: f64, lambda: f64, formula: RelevanceFormula) -> f64 {
    let lift = p_w_given_t / p_w;
    match formula {
        RelevanceFormula::Linear => lambda * p_w_given_t + (1.0 - lambda) * lift,
        RelevanceFormula::Log => lambda * p_w_given_t.ln() + (1.0 - lambda) * lift.ln(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermScore {
    pub term: String,
    pub frequency: u64,
    pub p_w: f64,
    /// `p(w|t)` per topic.
    pub p_w_given_t: Vec<f64>,
    /// `p(t|w)` per topic.
    pub p_t_given_w: Vec<f64>,
    pub lift: Vec<f64>,
    pub saliency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermTable {
    pub topic_marginal: Vec<f64>,
    pub terms: Vec<TermScore>,
}

/// `frequency(w) * sum_t p(t|w) ln(p(t|w) / p(t))` with `p(t|w)` from Bayes
/// over the model's topic prevalence. Zero posteriors contribute nothing.
pub fn saliency_value(frequency: f64, p_t_given_w: &[f64], p_t: &[f64]) -> f64 {
    let kl: f64 = p_t_given_w
        .iter()
        .zip(p_t)
        .filter(|(&q, &p)| q > 0.0 && p > 0.0)
        .map(|(&q, &p)| q * (q / p).ln())
        .sum();
    frequency * kl.max(0.0)
}

fn posterior(model: &TopicModel, w: usize) -> Vec<f64> {
    let mut post: Vec<f64> = (0..model.num_topics())
        .map(|t| model.phi[t][w] * model.topic_marginal[t])
        .collect();
    let s: f64 = post.iter().sum();
    if s > 0.0 {
        post.iter_mut().for_each(|x| *x /= s);
    } else {
        post = model.topic_marginal.clone();
    }
    post
}

pub fn term_saliency(model: &TopicModel, corpus: &Corpus) -> Result<TermTable> {
    if model.vocab.as_slice() != corpus.vocab().tokens() {
        return Err(Error::VocabularyMismatch);
    }
    let n = corpus.total_tokens().max(1) as f64;
    let k = model.num_topics();
    let terms = (0..model.vocab_size())
        .map(|w| {
            let frequency = corpus.frequency(w as u32);
            let p_w = frequency as f64 / n;
            let p_w_given_t: Vec<f64> = (0..k).map(|t| model.phi[t][w]).collect();
            let p_t_given_w = posterior(model, w);
            let lift = p_w_given_t
                .iter()
                .map(|&p| if p_w > 0.0 { p / p_w } else { 0.0 })
                .collect();
            let saliency = saliency_value(frequency as f64, &p_t_given_w, &model.topic_marginal);
            TermScore {
                term: model.vocab[w].clone(),
                frequency,
                p_w,
                p_w_given_t,
                p_t_given_w,
                lift,
                saliency,
            }
        })
        .collect();
    Ok(TermTable {
        topic_marginal: model.topic_marginal.clone(),
        terms,
    })
}

impl TermTable {
    pub fn num_topics(&self) -> usize {
        self.topic_marginal.len()
    }

    pub fn find(&self, term: &str) -> Option<usize> {
        self.terms.iter().position(|s| s.term == term)
    }

    pub fn relevance(&self, w: usize, t: usize, lambda: f64, formula: RelevanceFormula) -> Result<f64> {
        if t >= self.num_topics() {
            return Err(Error::TopicOutOfRange {
                topic: t,
                k: self.num_topics(),
            });
        }
        let s = &self.terms[w];
        if s.p_w <= 0.0 {
            return Err(Error::TermAbsent(s.term.clone()));
        }
        Ok(relevance_score(s.p_w_given_t[t], s.p_w, lambda, formula))
    }
}

/// Relevance of `term` to topic `t` at weight `lambda` (linear formula).
pub fn term_relevance(table: &TermTable, term: &str, t: usize, lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidConfig("lambda must lie in [0, 1]".into()));
    }
    let w = table.find(term).ok_or_else(|| Error::TermAbsent(term.into()))?;
    table.relevance(w, t, lambda, RelevanceFormula::Linear)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptScore {
    pub term: String,
    pub saliency: f64,
    pub relevance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub topic: usize,
    pub top_concepts: Vec<ConceptScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Set when the pool ran out before `n` distinct concepts were found.
    #[serde(default)]
    pub short: bool,
}

/// The `topics.json` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicsDocument {
    pub lambda: f64,
    pub formula: RelevanceFormula,
    pub topics: Vec<TopicSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConceptSelection {
    pub lambda: f64,
    pub n: usize,
    pub pool: usize,
    pub formula: RelevanceFormula,
}

impl Default for ConceptSelection {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            n: 10,
            pool: SALIENCY_POOL,
            formula: RelevanceFormula::Linear,
        }
    }
}

/// Pick up to `n` distinct concepts per topic.
///
/// Each topic's pool is its `max(pool, n)` most salient terms among those the
/// topic over-represents (`p(t|w) >= 1/K`). Pools are ranked by relevance; a
/// term wanted by several topics goes to the one where its relevance is
/// highest and the others move on to their next candidates.
pub fn select_topic_concepts(model: &TopicModel, corpus: &Corpus, opts: &ConceptSelection) -> Result<Vec<TopicSummary>> {
    if !(0.0..=1.0).contains(&opts.lambda) {
        return Err(Error::InvalidConfig("lambda must lie in [0, 1]".into()));
    }
    let table = term_saliency(model, corpus)?;
    let k = model.num_topics();
    let pool_size = opts.pool.max(opts.n);
    let uniform = 1.0 / k as f64;

    let mut by_saliency: Vec<usize> = (0..table.terms.len()).filter(|&w| table.terms[w].p_w > 0.0).collect();
    by_saliency.sort_by(|&a, &b| {
        table.terms[b]
            .saliency
            .total_cmp(&table.terms[a].saliency)
            .then_with(|| table.terms[a].term.cmp(&table.terms[b].term))
    });

    struct Candidate {
        topic: usize,
        term: usize,
        relevance: f64,
    }
    let mut candidates = Vec::new();
    for t in 0..k {
        let pool = by_saliency
            .iter()
            .copied()
            .filter(|&w| table.terms[w].p_t_given_w[t] >= uniform - 1e-12)
            .take(pool_size);
        for w in pool {
            candidates.push(Candidate {
                topic: t,
                term: w,
                relevance: table.relevance(w, t, opts.lambda, opts.formula)?,
            });
        }
    }
    candidates.sort_by(|a, b| {
        b.relevance
            .total_cmp(&a.relevance)
            .then(a.topic.cmp(&b.topic))
            .then_with(|| table.terms[a.term].term.cmp(&table.terms[b.term].term))
    });

    let mut taken: HashSet<usize> = HashSet::new();
    let mut lists: Vec<Vec<ConceptScore>> = vec![Vec::new(); k];
    for c in candidates {
        if lists[c.topic].len() >= opts.n || taken.contains(&c.term) {
            continue;
        }
        taken.insert(c.term);
        lists[c.topic].push(ConceptScore {
            term: table.terms[c.term].term.clone(),
            saliency: table.terms[c.term].saliency,
            relevance: c.relevance,
        });
    }
    Ok(lists
        .into_iter()
        .enumerate()
        .map(|(topic, top_concepts)| TopicSummary {
            topic,
            short: top_concepts.len() < opts.n,
            top_concepts,
            label: None,
        })
        .collect())
}

/// Jensen-Shannon divergence with natural logs; lies in `[0, ln 2]`.
pub fn jensen_shannon(p: &[f64], q: &[f64]) -> f64 {
    let kl_half = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .filter(|(&x, _)| x > 0.0)
            .map(|(&x, &y)| {
                let m = 0.5 * (x + y);
                x * (x / m).ln()
            })
            .sum()
    };
    (0.5 * kl_half(p, q) + 0.5 * kl_half(q, p)).clamp(0.0, std::f64::consts::LN_2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicMapData {
    pub coords: Vec<[f64; 2]>,
    pub proportions: Vec<f64>,
    pub distance_matrix: Vec<Vec<f64>>,
}

/// Classical MDS of a distance matrix into two dimensions.
pub fn classical_mds_2d(dist: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let k = dist.len();
    if k == 1 {
        return vec![[0.0, 0.0]];
    }
    let mut b = Mat::zeros(k, k);
    let sq: Vec<Vec<f64>> = dist.iter().map(|r| r.iter().map(|d| d * d).collect()).collect();
    let row_mean: Vec<f64> = sq.iter().map(|r| r.iter().sum::<f64>() / k as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / k as f64;
    for i in 0..k {
        for j in 0..k {
            b[(i, j)] = -0.5 * (sq[i][j] - row_mean[i] - row_mean[j] + grand);
        }
    }
    let eig = symmetric_eigen(&b);
    let scale: Vec<f64> = eig.values.iter().take(2).map(|&l| l.max(0.0).sqrt()).collect();
    (0..k)
        .map(|i| {
            let x = eig.vectors[(i, 0)] * scale[0];
            let y = if k > 1 { eig.vectors[(i, 1)] * scale.get(1).copied().unwrap_or(0.0) } else { 0.0 };
            [x, y]
        })
        .collect()
}

/// Pairwise topic JSD, its 2-D classical MDS embedding and topic prevalence.
pub fn topic_map(model: &TopicModel) -> Result<TopicMapData> {
    let k = model.num_topics();
    if k == 0 {
        return Err(Error::InvalidConfig("model has no topics".into()));
    }
    let mut distance_matrix = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let d = jensen_shannon(&model.phi[i], &model.phi[j]);
            distance_matrix[i][j] = d;
            distance_matrix[j][i] = d;
        }
    }
    Ok(TopicMapData {
        coords: classical_mds_2d(&distance_matrix),
        proportions: model.topic_marginal.clone(),
        distance_matrix,
    })
}

/// Concept -> owning topic for every selected concept.
pub fn concept_topics(summaries: &[TopicSummary]) -> HashMap<String, usize> {
    summaries
        .iter()
        .flat_map(|s| s.top_concepts.iter().map(move |c| (c.term.clone(), s.topic)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{LdaConfig, ModelConfig, ModelKind};

    fn model(phi: Vec<Vec<f64>>, p_t: Vec<f64>, vocab: &[&str]) -> TopicModel {
        TopicModel {
            kind: ModelKind::Lda,
            config: ModelConfig::Lda(LdaConfig::with_topics(phi.len())),
            vocab: vocab.iter().map(|s| s.to_string()).collect(),
            phi,
            theta: vec![],
            topic_marginal: p_t,
            singular_values: None,
            degenerate_components: vec![],
        }
    }

    #[test]
    fn saliency_zero_when_posterior_equals_prior() {
        assert_eq!(saliency_value(7.0, &[0.3, 0.7], &[0.3, 0.7]), 0.0);
    }

    #[test]
    fn saliency_exclusive_term() {
        let s = saliency_value(10.0, &[1.0, 0.0], &[0.5, 0.5]);
        assert!((s - 10.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert!((saliency_value(20.0, &[1.0, 0.0], &[0.5, 0.5]) - 2.0 * s).abs() < 1e-12);
    }

    #[test]
    fn relevance_hand_value() {
        let r = relevance_score(0.04, 0.01, 0.33, RelevanceFormula::Linear);
        assert!((r - 2.6932).abs() < 1e-12);
    }

    #[test]
    fn relevance_rejects_absent_term_and_bad_lambda() {
        let c = Corpus::from_token_docs(&[vec!["a", "b"], vec!["a"]], 1).unwrap();
        let m = model(vec![vec![0.5, 0.5]], vec![1.0], &["a", "b"]);
        let table = term_saliency(&m, &c).unwrap();
        assert!(term_relevance(&table, "a", 0, 1.5).is_err());
        assert!(matches!(term_relevance(&table, "zz", 0, 0.5), Err(Error::TermAbsent(_))));
        let mut t2 = table.clone();
        t2.terms[1].p_w = 0.0;
        assert!(matches!(t2.relevance(1, 0, 0.5, RelevanceFormula::Linear), Err(Error::TermAbsent(_))));
    }

    #[test]
    fn vocabulary_mismatch_detected() {
        let c = Corpus::from_token_docs(&[vec!["a", "b"]], 1).unwrap();
        let m = model(vec![vec![0.5, 0.5]], vec![1.0], &["a", "c"]);
        assert!(matches!(term_saliency(&m, &c), Err(Error::VocabularyMismatch)));
    }

    #[test]
    fn single_topic_keeps_every_term_in_relevance_order() {
        let c = Corpus::from_token_docs(&[vec!["a", "b", "b", "c", "c", "c"]], 1).unwrap();
        let m = model(vec![vec![0.2, 0.3, 0.5]], vec![1.0], &["a", "b", "c"]);
        let opts = ConceptSelection { n: 3, ..Default::default() };
        let s = select_topic_concepts(&m, &c, &opts).unwrap();
        let terms: Vec<&str> = s[0].top_concepts.iter().map(|c| c.term.as_str()).collect();
        // lift: a 0.2/(1/6) = 1.2, b 0.3/(2/6) = 0.9, c 0.5/(3/6) = 1.0
        assert_eq!(terms, ["a", "c", "b"]);
    }

    #[test]
    fn shared_term_lands_in_one_topic() {
        let docs = vec![vec!["a", "s", "b"], vec!["s", "c", "d"]];
        let c = Corpus::from_token_docs(&docs, 1).unwrap();
        let m = model(
            vec![vec![0.4, 0.3, 0.0, 0.0, 0.3], vec![0.0, 0.0, 0.35, 0.35, 0.3]],
            vec![0.5, 0.5],
            &["a", "b", "c", "d", "s"],
        );
        let s = select_topic_concepts(&m, &c, &ConceptSelection { n: 3, ..Default::default() }).unwrap();
        let count = s.iter().flat_map(|t| &t.top_concepts).filter(|c| c.term == "s").count();
        assert_eq!(count, 1);
    }

    #[test]
    fn jsd_bounds() {
        assert_eq!(jensen_shannon(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        let d = jensen_shannon(&[1.0, 0.0], &[0.0, 1.0]);
        assert!((d - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn two_topics_embed_at_their_distance() {
        let m = model(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.3, 0.6]], vec![0.5, 0.5], &["a", "b", "c"]);
        let map = topic_map(&m).unwrap();
        let d = map.distance_matrix[0][1];
        let [x0, y0] = map.coords[0];
        let [x1, y1] = map.coords[1];
        assert!((((x0 - x1).powi(2) + (y0 - y1).powi(2)).sqrt() - d).abs() < 1e-12);
    }

    #[test]
    fn single_topic_at_origin_and_identical_topics_coincide() {
        let m = model(vec![vec![0.5, 0.5]], vec![1.0], &["a", "b"]);
        let map = topic_map(&m).unwrap();
        assert_eq!(map.coords, vec![[0.0, 0.0]]);
        assert_eq!(map.proportions, vec![1.0]);
        let m = model(vec![vec![0.5, 0.5], vec![0.5, 0.5]], vec![0.5, 0.5], &["a", "b"]);
        let map = topic_map(&m).unwrap();
        assert_eq!(map.distance_matrix[0][1], 0.0);
        assert!((map.coords[0][0] - map.coords[1][0]).abs() < 1e-12);
    }
}
