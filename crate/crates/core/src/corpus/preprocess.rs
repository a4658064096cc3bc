use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::matrix::SentenceWord;
use super::records::Staging;
use super::sentences::split_sentences;
use crate::error::{Error, Result};
use crate::stem::stem_to_fixed_point;

const ENGLISH_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");
const PUBLICATION_STOPWORDS: &str = include_str!("../../data/stopwords_publication.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StemmerKind {
    Porter,
    None,
}

/// Which characters are treated as separators and discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StripPattern {
    /// Keep ASCII letters only; digits and punctuation split words.
    NonAlphabetic,
    /// Keep ASCII letters and digits.
    NonAlphanumeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessRules {
    pub stopwords: BTreeSet<String>,
    pub min_token_len: usize,
    pub strip_pattern: StripPattern,
    pub stemmer: StemmerKind,
}

impl Default for PreprocessRules {
    fn default() -> Self {
        let mut stopwords = parse_stopword_list(ENGLISH_STOPWORDS).expect("bundled list");
        stopwords.extend(parse_stopword_list(PUBLICATION_STOPWORDS).expect("bundled list"));
        Self {
            stopwords,
            min_token_len: 3,
            strip_pattern: StripPattern::NonAlphabetic,
            stemmer: StemmerKind::Porter,
        }
    }
}

impl PreprocessRules {
    /// The general English list alone, used by the relation heuristic to skip
    /// auxiliaries and function words.
    pub fn english_stopwords() -> BTreeSet<String> {
        parse_stopword_list(ENGLISH_STOPWORDS).expect("bundled list")
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_token_len == 0 {
            return Err(Error::InvalidConfig("min_token_len must be at least 1".into()));
        }
        Ok(())
    }

    pub fn stem(&self, word: &str) -> String {
        match self.stemmer {
            StemmerKind::Porter => stem_to_fixed_point(word),
            StemmerKind::None => word.to_string(),
        }
    }

    /// Normalize one surface word; `None` when the word is filtered out.
    pub fn normalize_word(&self, word: &str) -> Option<String> {
        if word.len() < self.min_token_len || self.stopwords.contains(word) {
            return None;
        }
        if word.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let stem = self.stem(word);
        if stem.len() < self.min_token_len || self.stopwords.contains(&stem) {
            return None;
        }
        Some(stem)
    }

    fn keeps(&self, c: char) -> bool {
        match self.strip_pattern {
            StripPattern::NonAlphabetic => c.is_ascii_alphabetic(),
            StripPattern::NonAlphanumeric => c.is_ascii_alphanumeric(),
        }
    }
}

/// Parse a stopword list: one surface form per line, `#` starts a comment.
pub fn parse_stopword_list(text: &str) -> Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.split_whitespace().count() > 1 {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected one stopword, found \"{line}\""),
            });
        }
        out.insert(line.to_lowercase());
    }
    Ok(out)
}

/// Lowercased words of `text` after stripping, before any filtering.
pub fn surface_words(text: &str, rules: &PreprocessRules) -> Vec<String> {
    let lower = text.to_lowercase();
    lower
        .split(|c: char| !rules.keeps(c))
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

/// Lowercase, strip, drop stopwords and short tokens, stem the rest.
pub fn preprocess_tokens(text: &str, rules: &PreprocessRules) -> Vec<String> {
    surface_words(text, rules)
        .iter()
        .filter_map(|w| rules.normalize_word(w))
        .collect()
}

/// A document after normalization: its token stream plus per-sentence words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedDoc {
    pub id: String,
    pub tokens: Vec<String>,
    pub sentences: Vec<(String, Vec<SentenceWord>)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenizedCorpus {
    pub docs: Vec<TokenizedDoc>,
}

impl TokenizedCorpus {
    pub fn from_staging(staging: &Staging, rules: &PreprocessRules) -> Self {
        Self {
            docs: staging
                .docs
                .iter()
                .map(|d| preprocess_document(&d.id, &d.text, rules))
                .collect(),
        }
    }

    pub fn total_tokens(&self) -> usize {
        self.docs.iter().map(|d| d.tokens.len()).sum()
    }
}

pub fn preprocess_document(id: &str, text: &str, rules: &PreprocessRules) -> TokenizedDoc {
    let mut tokens = Vec::new();
    let mut sentences = Vec::new();
    for sentence in split_sentences(text) {
        let words: Vec<SentenceWord> = surface_words(&sentence, rules)
            .into_iter()
            .map(|surface| {
                let stem = rules.normalize_word(&surface);
                SentenceWord { surface, stem }
            })
            .collect();
        tokens.extend(words.iter().filter_map(|w| w.stem.clone()));
        sentences.push((sentence, words));
    }
    TokenizedDoc {
        id: id.to_string(),
        tokens,
        sentences,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn noise_only_text_is_empty() {
        let r = PreprocessRules::default();
        assert!(preprocess_tokens("Springer Journal article, 2019!", &r).is_empty());
        assert!(preprocess_tokens("", &r).is_empty());
    }

    #[test]
    fn stems_survivors() {
        let r = PreprocessRules::default();
        assert_eq!(
            preprocess_tokens("Neuromorphic chips emulate neurons.", &r),
            ["neuromorph", "chip", "emul", "neuron"]
        );
    }

    #[test]
    fn stopword_file_comments_and_errors() {
        let set = parse_stopword_list("# header\nFoo\n\nbar # trailing\n").unwrap();
        assert_eq!(set.into_iter().collect::<Vec<_>>(), ["bar", "foo"]);
        match parse_stopword_list("ok\ntwo words\n").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn bundled_lists_include_publication_noise() {
        let r = PreprocessRules::default();
        for w in ["journal", "international", "springer", "article", "page", "february", "london"] {
            assert!(r.stopwords.contains(w), "{w}");
        }
    }

    #[test]
    fn sentence_words_agree_with_tokens() {
        let r = PreprocessRules::default();
        let doc = preprocess_document("d", "Spiking neurons fire. Chips learn fast!", &r);
        assert_eq!(doc.sentences.len(), 2);
        assert_eq!(doc.tokens, preprocess_tokens("Spiking neurons fire. Chips learn fast!", &r));
    }

    proptest! {
        #[test]
        fn idempotent_on_own_output(text in "[A-Za-z ,.!?0-9-]{0,200}") {
            let r = PreprocessRules::default();
            let once = preprocess_tokens(&text, &r);
            let twice = preprocess_tokens(&once.join(" "), &r);
            prop_assert_eq!(once, twice);
        }
    }
}
