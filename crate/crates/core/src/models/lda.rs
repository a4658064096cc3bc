use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{normalize, token_mass_marginal, ModelConfig, ModelKind, TopicModel};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::rng;

/// Collapsed Gibbs sampler settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub sample_lag: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self {
            k: 10,
            alpha: 0.1,
            beta: 0.01,
            iterations: 1000,
            burn_in: 200,
            sample_lag: 10,
            seed: 42,
        }
    }
}

impl LdaConfig {
    pub fn with_topics(k: usize) -> Self {
        Self { k, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::InvalidConfig("alpha and beta must be positive".into()));
        }
        if self.iterations <= self.burn_in {
            return Err(Error::InvalidConfig("iterations must exceed burn_in".into()));
        }
        if self.sample_lag == 0 {
            return Err(Error::InvalidConfig("sample_lag must be at least 1".into()));
        }
        Ok(())
    }
}

/// Train LDA by collapsed Gibbs sampling.
///
/// Documents are swept in doc-id order and each document draws from its own
/// stream keyed by `(seed, doc id)`, so the result does not depend on the
/// order documents appear in the corpus. `phi` and `theta` are posterior
/// means averaged over the samples taken every `sample_lag` sweeps after
/// burn-in.
pub fn train_lda(corpus: &Corpus, cfg: &LdaConfig, kind: ModelKind) -> Result<TopicModel> {
    cfg.validate()?;
    let v = corpus.vocab_size();
    let k = cfg.k;
    if k > v {
        return Err(Error::KExceedsVocabulary { k, vocab: v });
    }
    if corpus.total_tokens() == 0 {
        return Err(Error::DegenerateCorpus("no tokens to train on".into()));
    }
    let d_count = corpus.num_docs();
    let docs = corpus.docs();

    let mut order: Vec<usize> = (0..d_count).collect();
    order.sort_by(|&a, &b| corpus.doc_ids()[a].cmp(&corpus.doc_ids()[b]));
    let mut rngs: Vec<_> = (0..d_count)
        .map(|d| rng::stream(cfg.seed, corpus.doc_ids()[d].as_bytes()))
        .collect();

    // word-major topic counts: n_wt[w * k + t]
    let mut n_wt = vec![0u32; v * k];
    let mut n_t = vec![0u32; k];
    let mut n_dt = vec![vec![0u32; k]; d_count];
    let mut z: Vec<Vec<u16>> = Vec::with_capacity(d_count);
    for d in 0..d_count {
        z.push(vec![0; docs[d].len()]);
    }
    for &d in &order {
        for (i, &w) in docs[d].iter().enumerate() {
            let t = rngs[d].random_range(0..k);
            z[d][i] = t as u16;
            n_wt[w as usize * k + t] += 1;
            n_t[t] += 1;
            n_dt[d][t] += 1;
        }
    }

    let vbeta = v as f64 * cfg.beta;
    let mut probs = vec![0.0f64; k];
    let mut phi_acc = vec![0.0f64; k * v];
    let mut theta_acc = vec![vec![0.0f64; k]; d_count];
    let mut samples = 0usize;

    for sweep in 0..cfg.iterations {
        for &d in &order {
            let rng = &mut rngs[d];
            let ndt = &mut n_dt[d];
            for (i, &w) in docs[d].iter().enumerate() {
                let w = w as usize;
                let old = z[d][i] as usize;
                n_wt[w * k + old] -= 1;
                n_t[old] -= 1;
                ndt[old] -= 1;

                let row = &n_wt[w * k..(w + 1) * k];
                let mut total = 0.0;
                for t in 0..k {
                    total += (ndt[t] as f64 + cfg.alpha) * (row[t] as f64 + cfg.beta)
                        / (n_t[t] as f64 + vbeta);
                    probs[t] = total;
                }
                let u = rng.random::<f64>() * total;
                let new = probs.iter().position(|&c| u < c).unwrap_or(k - 1);

                z[d][i] = new as u16;
                n_wt[w * k + new] += 1;
                n_t[new] += 1;
                ndt[new] += 1;
            }
        }
        if sweep >= cfg.burn_in && (sweep - cfg.burn_in) % cfg.sample_lag == 0 {
            samples += 1;
            for t in 0..k {
                let denom = n_t[t] as f64 + vbeta;
                for w in 0..v {
                    phi_acc[t * v + w] += (n_wt[w * k + t] as f64 + cfg.beta) / denom;
                }
            }
            let kalpha = k as f64 * cfg.alpha;
            for d in 0..d_count {
                let denom = docs[d].len() as f64 + kalpha;
                for t in 0..k {
                    theta_acc[d][t] += (n_dt[d][t] as f64 + cfg.alpha) / denom;
                }
            }
        }
    }

    let scale = 1.0 / samples as f64;
    let phi: Vec<Vec<f64>> = (0..k)
        .map(|t| {
            let mut row: Vec<f64> = phi_acc[t * v..(t + 1) * v].iter().map(|x| x * scale).collect();
            normalize(&mut row);
            row
        })
        .collect();
    let theta: Vec<Vec<f64>> = theta_acc
        .into_iter()
        .map(|mut row| {
            row.iter_mut().for_each(|x| *x *= scale);
            normalize(&mut row);
            row
        })
        .collect();
    let lengths: Vec<usize> = docs.iter().map(Vec::len).collect();
    let topic_marginal = token_mass_marginal(&theta, &lengths, k);

    Ok(TopicModel {
        kind,
        config: ModelConfig::Lda(cfg.clone()),
        vocab: corpus.vocab().tokens().to_vec(),
        phi,
        theta,
        topic_marginal,
        singular_values: None,
        degenerate_components: vec![],
    })
}

/// Fold-in Gibbs settings for held-out documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldInConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub sample_lag: usize,
    pub seed: u64,
}

impl Default for FoldInConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            burn_in: 50,
            sample_lag: 5,
            seed: 42,
        }
    }
}

fn model_alpha(model: &TopicModel) -> f64 {
    match &model.config {
        ModelConfig::Lda(c) => c.alpha,
        ModelConfig::Lsi(_) => 0.1,
    }
}

/// Estimate `theta` for an unseen document with `phi` frozen.
///
/// `tokens` are ids into the model vocabulary; ids outside it are skipped.
/// The random stream is keyed by the document's content, so identical
/// documents always receive identical estimates.
pub fn infer_doc_topics(model: &TopicModel, tokens: &[u32], cfg: &FoldInConfig) -> Result<Vec<f64>> {
    if model.kind == ModelKind::Lsi {
        return Err(Error::InferenceUndefined);
    }
    if cfg.iterations <= cfg.burn_in || cfg.sample_lag == 0 {
        return Err(Error::InvalidConfig("fold-in iterations must exceed burn_in".into()));
    }
    let k = model.num_topics();
    let v = model.vocab_size() as u32;
    let alpha = model_alpha(model);
    let doc: Vec<usize> = tokens.iter().filter(|&&w| w < v).map(|&w| w as usize).collect();
    if doc.is_empty() {
        return Ok(vec![1.0 / k as f64; k]);
    }
    let mut rng = rng::stream_for_tokens(cfg.seed, tokens);
    let mut ndt = vec![0u32; k];
    let mut z = Vec::with_capacity(doc.len());
    for _ in &doc {
        let t = rng.random_range(0..k);
        ndt[t] += 1;
        z.push(t);
    }
    let mut probs = vec![0.0; k];
    let mut acc = vec![0.0; k];
    let mut samples = 0usize;
    let denom = doc.len() as f64 + k as f64 * alpha;
    for sweep in 0..cfg.iterations {
        for (i, &w) in doc.iter().enumerate() {
            ndt[z[i]] -= 1;
            let mut total = 0.0;
            for t in 0..k {
                total += (ndt[t] as f64 + alpha) * model.phi[t][w];
                probs[t] = total;
            }
            let u = rng.random::<f64>() * total;
            let new = probs.iter().position(|&c| u < c).unwrap_or(k - 1);
            z[i] = new;
            ndt[new] += 1;
        }
        if sweep >= cfg.burn_in && (sweep - cfg.burn_in) % cfg.sample_lag == 0 {
            samples += 1;
            for t in 0..k {
                acc[t] += (ndt[t] as f64 + alpha) / denom;
            }
        }
    }
    acc.iter_mut().for_each(|x| *x /= samples as f64);
    normalize(&mut acc);
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(k: usize, seed: u64) -> LdaConfig {
        LdaConfig {
            k,
            iterations: 60,
            burn_in: 20,
            sample_lag: 5,
            seed,
            ..LdaConfig::default()
        }
    }

    #[test]
    fn single_symbol() {
        let c = Corpus::from_token_docs(&[vec!["a", "a", "a"]], 1).unwrap();
        let m = train_lda(&c, &quick(1, 1), ModelKind::Lda).unwrap();
        assert_eq!(m.phi, vec![vec![1.0]]);
        assert_eq!(m.theta, vec![vec![1.0]]);
        assert_eq!(m.topic_marginal, vec![1.0]);
    }

    #[test]
    fn k_exceeding_vocabulary() {
        let c = Corpus::from_token_docs(&[vec!["a", "b"]], 1).unwrap();
        assert!(matches!(
            train_lda(&c, &quick(3, 1), ModelKind::Lda),
            Err(Error::KExceedsVocabulary { k: 3, vocab: 2 })
        ));
    }

    #[test]
    fn invalid_configs() {
        let base = quick(2, 0);
        assert!(LdaConfig { k: 0, ..base.clone() }.validate().is_err());
        assert!(LdaConfig { alpha: 0.0, ..base.clone() }.validate().is_err());
        assert!(LdaConfig { burn_in: 60, ..base.clone() }.validate().is_err());
        assert!(base.validate().is_ok());
    }

    #[test]
    fn empty_doc_fold_in_is_uniform() {
        let c = Corpus::from_token_docs(&[vec!["a", "b", "c", "a"], vec!["b", "c"]], 1).unwrap();
        let m = train_lda(&c, &quick(3, 5), ModelKind::Lda).unwrap();
        let theta = infer_doc_topics(&m, &[], &FoldInConfig::default()).unwrap();
        assert_eq!(theta, vec![1.0 / 3.0; 3]);
        let skipped = infer_doc_topics(&m, &[99, 100], &FoldInConfig::default()).unwrap();
        assert_eq!(skipped, vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn lsi_models_refuse_inference() {
        let c = Corpus::from_token_docs(&[vec!["a", "b"], vec!["b", "c"]], 1).unwrap();
        let mut m = train_lda(&c, &quick(2, 5), ModelKind::Lda).unwrap();
        m.kind = ModelKind::Lsi;
        assert!(matches!(
            infer_doc_topics(&m, &[0], &FoldInConfig::default()),
            Err(Error::InferenceUndefined)
        ));
    }
}
