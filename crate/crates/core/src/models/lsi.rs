use serde::{Deserialize, Serialize};

use super::{normalize, token_mass_marginal, ModelConfig, ModelKind, TopicModel};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::linalg::{randomized_svd, Mat};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsiConfig {
    pub k: usize,
    pub oversampling: usize,
    pub power_iters: usize,
    pub seed: u64,
}

impl Default for LsiConfig {
    fn default() -> Self {
        Self {
            k: 10,
            oversampling: 10,
            power_iters: 4,
            seed: 42,
        }
    }
}

impl LsiConfig {
    pub fn validate(&self, docs: usize, vocab: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        if self.k > docs.min(vocab) {
            return Err(Error::InvalidConfig(format!(
                "K = {} exceeds min(D, V) = {}",
                self.k,
                docs.min(vocab)
            )));
        }
        Ok(())
    }
}

/// TF-IDF with `idf = ln(D / df)` and L2-normalized rows. All-zero rows stay zero.
pub fn tfidf_matrix(corpus: &Corpus) -> Mat {
    let d_count = corpus.num_docs();
    let v = corpus.vocab_size();
    let mut df = vec![0usize; v];
    for row in corpus.doc_term() {
        for &(w, _) in row {
            df[w as usize] += 1;
        }
    }
    let idf: Vec<f64> = df
        .iter()
        .map(|&n| if n == 0 { 0.0 } else { (d_count as f64 / n as f64).ln() })
        .collect();
    let mut m = Mat::zeros(d_count, v);
    for (d, row) in corpus.doc_term().iter().enumerate() {
        for &(w, c) in row {
            m[(d, w as usize)] = c as f64 * idf[w as usize];
        }
        let norm: f64 = (0..v).map(|w| m[(d, w)] * m[(d, w)]).sum::<f64>().sqrt();
        if norm > 0.0 {
            for w in 0..v {
                m[(d, w)] /= norm;
            }
        }
    }
    m
}

/// Latent semantic indexing over the TF-IDF matrix.
///
/// Components are signed; `phi` rows are the absolute right-singular-vector
/// loadings scaled to sum 1, and `theta` rows the absolute `U * S` loadings
/// scaled the same way. Components beyond the matrix rank get uniform rows
/// and are listed in `degenerate_components`.
pub fn train_lsi(corpus: &Corpus, cfg: &LsiConfig) -> Result<TopicModel> {
    cfg.validate(corpus.num_docs(), corpus.vocab_size())?;
    let a = tfidf_matrix(corpus);
    let mut stream = rng::stream(cfg.seed, b"lsi-sketch");
    let svd = randomized_svd(&a, cfg.k, cfg.oversampling, cfg.power_iters, &mut stream);

    let tiny = svd.s.first().copied().unwrap_or(0.0) * 1e-10;
    let degenerate: Vec<usize> = (0..cfg.k).filter(|&j| !(svd.s[j] > tiny && svd.s[j] > 0.0)).collect();

    let v = corpus.vocab_size();
    let phi: Vec<Vec<f64>> = (0..cfg.k)
        .map(|j| {
            let mut row: Vec<f64> = if degenerate.contains(&j) {
                vec![0.0; v]
            } else {
                (0..v).map(|w| svd.vt[(j, w)].abs()).collect()
            };
            normalize(&mut row);
            row
        })
        .collect();
    let theta: Vec<Vec<f64>> = (0..corpus.num_docs())
        .map(|d| {
            let mut row: Vec<f64> = (0..cfg.k).map(|j| (svd.u[(d, j)] * svd.s[j]).abs()).collect();
            normalize(&mut row);
            row
        })
        .collect();
    let lengths: Vec<usize> = corpus.docs().iter().map(Vec::len).collect();
    let topic_marginal = token_mass_marginal(&theta, &lengths, cfg.k);

    Ok(TopicModel {
        kind: ModelKind::Lsi,
        config: ModelConfig::Lsi(cfg.clone()),
        vocab: corpus.vocab().tokens().to_vec(),
        phi,
        theta,
        topic_marginal,
        singular_values: Some(svd.s),
        degenerate_components: degenerate,
    })
}

/// Signed right singular vectors of the TF-IDF matrix (rows), for diagnostics.
pub fn lsi_components(corpus: &Corpus, cfg: &LsiConfig) -> Result<(Vec<f64>, Mat)> {
    cfg.validate(corpus.num_docs(), corpus.vocab_size())?;
    let a = tfidf_matrix(corpus);
    let mut stream = rng::stream(cfg.seed, b"lsi-sketch");
    let svd = randomized_svd(&a, cfg.k, cfg.oversampling, cfg.power_iters, &mut stream);
    Ok((svd.s, svd.vt))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_nonzero_document_is_rank_one() {
        let docs = vec![vec!["a", "a", "b", "c"], vec![], vec![]];
        let c = Corpus::from_token_docs(&docs, 1).unwrap();
        let cfg = LsiConfig { k: 2, ..LsiConfig::default() };
        let (s, vt) = lsi_components(&c, &cfg).unwrap();
        assert!(s[1].abs() < 1e-12);
        let row = tfidf_matrix(&c).to_rows()[0].clone();
        // both unit-norm, so parallel means |cos| = 1
        let dot: f64 = row.iter().zip(&vt.to_rows()[0]).map(|(a, b)| a * b).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-12);

        let m = train_lsi(&c, &cfg).unwrap();
        assert_eq!(m.degenerate_components, vec![1]);
        for row in m.phi.iter().chain(&m.theta) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn k_larger_than_dimensions_rejected() {
        let c = Corpus::from_token_docs(&[vec!["a", "b"], vec!["b", "c"]], 1).unwrap();
        assert!(train_lsi(&c, &LsiConfig { k: 3, ..LsiConfig::default() }).is_err());
    }
}
