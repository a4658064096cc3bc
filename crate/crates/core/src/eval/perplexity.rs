use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{infer_doc_topics, FoldInConfig, TopicModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerplexityScore {
    pub perplexity: f64,
    pub log_likelihood_per_word: f64,
    pub scored_tokens: usize,
}

/// Held-out perplexity `exp(-LL / N)` with `theta` estimated by fold-in.
///
/// Tokens outside the model vocabulary are skipped.
pub fn perplexity(model: &TopicModel, heldout: &[Vec<String>], fold: &FoldInConfig) -> Result<PerplexityScore> {
    let mut total_ll = 0.0;
    let mut n = 0usize;
    for doc in heldout {
        let ids: Vec<u32> = doc
            .iter()
            .filter_map(|t| model.term_id(t))
            .map(|w| w as u32)
            .collect();
        if ids.is_empty() {
            continue;
        }
        let theta = infer_doc_topics(model, &ids, fold)?;
        let mut ll = 0.0;
        for &w in &ids {
            let p: f64 = theta
                .iter()
                .zip(&model.phi)
                .map(|(th, row)| th * row[w as usize])
                .sum();
            ll += p.ln();
        }
        total_ll += ll;
        n += ids.len();
    }
    if n == 0 {
        return Err(Error::NoScorableTokens);
    }
    let per_word = total_ll / n as f64;
    Ok(PerplexityScore {
        perplexity: (-per_word).exp(),
        log_likelihood_per_word: per_word,
        scored_tokens: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{LdaConfig, ModelConfig, ModelKind};

    fn fixed_model(phi: Vec<Vec<f64>>, vocab: Vec<String>) -> TopicModel {
        let k = phi.len();
        TopicModel {
            kind: ModelKind::Lda,
            config: ModelConfig::Lda(LdaConfig::with_topics(k)),
            vocab,
            phi,
            theta: vec![],
            topic_marginal: vec![1.0 / k as f64; k],
            singular_values: None,
            degenerate_components: vec![],
        }
    }

    #[test]
    fn uniform_model_perplexity_is_vocab_size() {
        let vocab: Vec<String> = (0..50).map(|i| format!("w{i:02}")).collect();
        let m = fixed_model(vec![vec![1.0 / 50.0; 50]; 3], vocab.clone());
        let docs = vec![vocab[..7].to_vec(), vec![vocab[3].clone(); 4]];
        let p = perplexity(&m, &docs, &FoldInConfig::default()).unwrap();
        assert!((p.perplexity - 50.0).abs() < 1e-9, "{}", p.perplexity);
    }

    #[test]
    fn hand_case_two_root_two() {
        let m = fixed_model(vec![vec![0.5, 0.25, 0.25]], vec!["a".into(), "b".into(), "c".into()]);
        let p = perplexity(&m, &[vec!["a".into(), "b".into()]], &FoldInConfig::default()).unwrap();
        assert!((p.perplexity - 2.0 * 2f64.sqrt()).abs() < 1e-9);
        assert!((p.log_likelihood_per_word + 1.0397207708399179).abs() < 1e-12);
    }

    #[test]
    fn no_scorable_tokens() {
        let m = fixed_model(vec![vec![1.0]], vec!["a".into()]);
        assert!(matches!(
            perplexity(&m, &[vec!["zzz".into()]], &FoldInConfig::default()),
            Err(Error::NoScorableTokens)
        ));
    }
}
