use std::collections::{BTreeSet, HashSet};

use crate::corpus::PreprocessRules;

const BUNDLED_VERBS: &str = include_str!("../../data/verbs.txt");

/// Lexicon-plus-suffix verb recognizer used to label relations.
#[derive(Debug, Clone)]
pub struct VerbLexicon {
    verbs: HashSet<String>,
    skip: BTreeSet<String>,
}

impl Default for VerbLexicon {
    fn default() -> Self {
        Self::bundled()
    }
}

impl VerbLexicon {
    pub fn bundled() -> Self {
        Self::new(
            BUNDLED_VERBS
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string),
            PreprocessRules::english_stopwords(),
        )
    }

    pub fn new(verbs: impl IntoIterator<Item = String>, skip: BTreeSet<String>) -> Self {
        Self {
            verbs: verbs.into_iter().collect(),
            skip,
        }
    }

    pub fn len(&self) -> usize {
        self.verbs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verbs.is_empty()
    }

    fn morphological(word: &str) -> bool {
        word.len() > 5 && ["ate", "ize", "ise", "ify"].iter().any(|s| word.ends_with(s))
    }

    fn known(&self, base: &str) -> bool {
        self.verbs.contains(base) || Self::morphological(base)
    }

    /// Base form of `word` if it reads as a verb: a lexicon entry, an
    /// `-ate/-ize/-ise/-ify` form, or an `-s/-es/-ies/-ed/-ied` inflection of one.
    pub fn base_form(&self, word: &str) -> Option<String> {
        if word.len() < 3 || self.skip.contains(word) {
            return None;
        }
        if self.known(word) {
            return Some(word.to_string());
        }
        let mut candidates: Vec<String> = Vec::new();
        if let Some(stem) = word.strip_suffix("ies") {
            candidates.push(format!("{stem}y"));
        }
        if let Some(stem) = word.strip_suffix("ied") {
            candidates.push(format!("{stem}y"));
        }
        if let Some(stem) = word.strip_suffix("es") {
            candidates.push(stem.to_string());
        }
        if let Some(stem) = word.strip_suffix('s') {
            if !word.ends_with("ss") {
                candidates.push(stem.to_string());
            }
        }
        if let Some(stem) = word.strip_suffix('d') {
            if word.ends_with("ed") {
                candidates.push(stem.to_string());
            }
        }
        if let Some(stem) = word.strip_suffix("ed") {
            candidates.push(stem.to_string());
            let b = stem.as_bytes();
            if b.len() >= 2 && b[b.len() - 1] == b[b.len() - 2] {
                candidates.push(stem[..stem.len() - 1].to_string());
            }
        }
        candidates
            .into_iter()
            .find(|c| c.len() >= 2 && self.known(c))
    }
}
