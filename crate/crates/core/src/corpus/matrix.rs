use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::preprocess::{TokenizedCorpus, TokenizedDoc};
use crate::error::{Error, Result};

/// Bidirectional token <-> id map. Ids follow lexicographic token order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(tokens: Vec<String>) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self { tokens, index }
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// A surface word of a sentence and its normalized form, if it survived filtering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceWord {
    pub surface: String,
    pub stem: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub doc: usize,
    pub text: String,
    pub words: Vec<SentenceWord>,
    /// Ids of the in-vocabulary stems, in order.
    pub tokens: Vec<u32>,
}

/// The normalized corpus every later stage reads. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    doc_ids: Vec<String>,
    docs: Vec<Vec<u32>>,
    sentences: Vec<Sentence>,
    vocab: Vocabulary,
    /// Row `d`: `(token id, count)` sorted by id.
    doc_term: Vec<Vec<(u32, u32)>>,
    term_freq: Vec<u64>,
    total_tokens: usize,
}

/// Drop tokens found in fewer than `min_doc_freq` documents and index the rest.
pub fn build_doc_term_matrix(staging: &TokenizedCorpus, min_doc_freq: usize) -> Result<Corpus> {
    let mut doc_freq: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in &staging.docs {
        let mut seen: Vec<&str> = doc.tokens.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *doc_freq.entry(t).or_default() += 1;
        }
    }
    let kept: Vec<String> = doc_freq
        .into_iter()
        .filter(|&(_, df)| df >= min_doc_freq.max(1))
        .map(|(t, _)| t.to_string())
        .collect();
    if kept.is_empty() {
        return Err(Error::DegenerateCorpus(format!(
            "no token occurs in at least {min_doc_freq} documents"
        )));
    }
    Ok(Corpus::assemble(&staging.docs, Vocabulary::from(kept)))
}

impl Corpus {
    fn assemble(docs: &[TokenizedDoc], vocab: Vocabulary) -> Self {
        let doc_ids = docs.iter().map(|d| d.id.clone()).collect();
        let token_docs: Vec<Vec<u32>> = docs
            .iter()
            .map(|d| d.tokens.iter().filter_map(|t| vocab.id(t)).collect())
            .collect();
        let mut sentences = Vec::new();
        for (d, doc) in docs.iter().enumerate() {
            for (text, words) in &doc.sentences {
                let tokens = words
                    .iter()
                    .filter_map(|w| w.stem.as_deref().and_then(|s| vocab.id(s)))
                    .collect();
                sentences.push(Sentence {
                    doc: d,
                    text: text.clone(),
                    words: words.clone(),
                    tokens,
                });
            }
        }
        Self::from_parts(doc_ids, token_docs, sentences, vocab)
    }

    fn from_parts(
        doc_ids: Vec<String>,
        docs: Vec<Vec<u32>>,
        sentences: Vec<Sentence>,
        vocab: Vocabulary,
    ) -> Self {
        let mut term_freq = vec![0u64; vocab.len()];
        let doc_term = docs
            .iter()
            .map(|doc| {
                let mut row: BTreeMap<u32, u32> = BTreeMap::new();
                for &w in doc {
                    *row.entry(w).or_default() += 1;
                    term_freq[w as usize] += 1;
                }
                row.into_iter().collect()
            })
            .collect();
        let total_tokens = docs.iter().map(Vec::len).sum();
        Self {
            doc_ids,
            docs,
            sentences,
            vocab,
            doc_term,
            term_freq,
            total_tokens,
        }
    }

    /// Build directly from already-normalized token lists (no sentence index).
    pub fn from_token_docs<S: AsRef<str>>(docs: &[Vec<S>], min_doc_freq: usize) -> Result<Self> {
        let staging = TokenizedCorpus {
            docs: docs
                .iter()
                .enumerate()
                .map(|(i, toks)| TokenizedDoc {
                    id: format!("doc{i:06}"),
                    tokens: toks.iter().map(|t| t.as_ref().to_string()).collect(),
                    sentences: vec![],
                })
                .collect(),
        };
        build_doc_term_matrix(&staging, min_doc_freq)
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn docs(&self) -> &[Vec<u32>] {
        &self.docs
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn doc_term(&self) -> &[Vec<(u32, u32)>] {
        &self.doc_term
    }

    /// Corpus-wide count of token `w` (a column sum of the doc-term matrix).
    pub fn frequency(&self, w: u32) -> u64 {
        self.term_freq[w as usize]
    }

    pub fn term_frequencies(&self) -> &[u64] {
        &self.term_freq
    }

    pub fn total_tokens(&self) -> usize {
        self.total_tokens
    }

    pub fn doc_tokens_as_strings(&self, d: usize) -> Vec<String> {
        self.docs[d]
            .iter()
            .map(|&w| self.vocab.token(w).to_string())
            .collect()
    }

    /// Hold out `fraction` of the documents by seeded shuffle.
    ///
    /// The training corpus keeps the full vocabulary so ids stay comparable.
    /// Returns the training corpus and the held-out documents as token strings.
    pub fn split_heldout(&self, fraction: f64, seed: u64) -> (Corpus, Vec<Vec<String>>) {
        let n = self.num_docs();
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = crate::rng::stream(seed, b"heldout-split");
        order.shuffle(&mut rng);
        let n_held = if n < 2 {
            0
        } else {
            ((n as f64 * fraction).round() as usize).clamp(1, n - 1)
        };
        let mut held: Vec<usize> = order[..n_held].to_vec();
        held.sort_unstable();
        let is_held: Vec<bool> = (0..n).map(|d| held.binary_search(&d).is_ok()).collect();

        let mut remap = vec![usize::MAX; n];
        let mut ids = Vec::new();
        let mut docs = Vec::new();
        for d in (0..n).filter(|&d| !is_held[d]) {
            remap[d] = docs.len();
            ids.push(self.doc_ids[d].clone());
            docs.push(self.docs[d].clone());
        }
        let sentences = self
            .sentences
            .iter()
            .filter(|s| !is_held[s.doc])
            .map(|s| Sentence {
                doc: remap[s.doc],
                ..s.clone()
            })
            .collect();
        let train = Corpus::from_parts(ids, docs, sentences, self.vocab.clone());
        let heldout = held.iter().map(|&d| self.doc_tokens_as_strings(d)).collect();
        (train, heldout)
    }
}
