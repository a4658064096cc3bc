//! Porter stemmer, original 1980 rule set.
//!
//! Operates on lowercase ASCII words. Anything else (or words of two
//! letters or fewer) is returned unchanged.

/// Stem a single lowercase word with one pass of the Porter rules.
pub fn porter_stem(word: &str) -> String {
    if word.len() <= 2 || !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return word.to_string();
    }
    let mut s = Stemmer {
        b: word.as_bytes().to_vec(),
    };
    s.step1a();
    s.step1b();
    s.step1c();
    s.step2();
    s.step3();
    s.step4();
    s.step5a();
    s.step5b();
    String::from_utf8(s.b).expect("ascii in, ascii out")
}

/// Apply [`porter_stem`] until the output stops changing.
///
/// A single Porter pass is not idempotent (`agreed -> agre -> agr`), so
/// every canonical form used by the pipeline is a fixed point of the
/// stemmer.
pub fn stem_to_fixed_point(word: &str) -> String {
    let mut current = porter_stem(word);
    for _ in 0..8 {
        let next = porter_stem(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

struct Stemmer {
    b: Vec<u8>,
}

impl Stemmer {
    fn is_consonant(&self, i: usize) -> bool {
        match self.b[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.is_consonant(i - 1),
            _ => true,
        }
    }

    /// Measure of `b[..len]`: the number of VC sequences.
    fn measure(&self, len: usize) -> usize {
        let mut m = 0;
        let mut i = 0;
        while i < len && self.is_consonant(i) {
            i += 1;
        }
        loop {
            while i < len && !self.is_consonant(i) {
                i += 1;
            }
            if i >= len {
                return m;
            }
            while i < len && self.is_consonant(i) {
                i += 1;
            }
            m += 1;
            if i >= len {
                return m;
            }
        }
    }

    fn has_vowel(&self, len: usize) -> bool {
        (0..len).any(|i| !self.is_consonant(i))
    }

    fn ends_double_consonant(&self, len: usize) -> bool {
        len >= 2 && self.b[len - 1] == self.b[len - 2] && self.is_consonant(len - 1)
    }

    /// cvc where the final c is not w, x or y.
    fn ends_cvc(&self, len: usize) -> bool {
        if len < 3 {
            return false;
        }
        if !self.is_consonant(len - 1) || self.is_consonant(len - 2) || !self.is_consonant(len - 3) {
            return false;
        }
        !matches!(self.b[len - 1], b'w' | b'x' | b'y')
    }

    fn ends_with(&self, suffix: &str) -> bool {
        self.b.ends_with(suffix.as_bytes())
    }

    fn stem_len(&self, suffix: &str) -> usize {
        self.b.len() - suffix.len()
    }

    fn replace_suffix(&mut self, suffix: &str, replacement: &str) {
        let n = self.stem_len(suffix);
        self.b.truncate(n);
        self.b.extend_from_slice(replacement.as_bytes());
    }

    /// Find the longest listed suffix; replace it when the stem's measure
    /// exceeds `min_measure`. Returns whether any suffix matched.
    fn replace_longest(&mut self, rules: &[(&str, &str)], min_measure: usize) -> bool {
        let hit = rules
            .iter()
            .filter(|(suffix, _)| self.ends_with(suffix) && self.b.len() > suffix.len())
            .max_by_key(|(suffix, _)| suffix.len());
        match hit {
            Some(&(suffix, replacement)) => {
                if self.measure(self.stem_len(suffix)) > min_measure {
                    self.replace_suffix(suffix, replacement);
                }
                true
            }
            None => false,
        }
    }

    fn step1a(&mut self) {
        if self.ends_with("sses") {
            self.replace_suffix("sses", "ss");
        } else if self.ends_with("ies") {
            self.replace_suffix("ies", "i");
        } else if self.ends_with("ss") {
        } else if self.ends_with("s") {
            self.replace_suffix("s", "");
        }
    }

    fn step1b(&mut self) {
        if self.ends_with("eed") {
            if self.measure(self.stem_len("eed")) > 0 {
                self.replace_suffix("eed", "ee");
            }
            return;
        }
        let removed = if self.ends_with("ed") && self.has_vowel(self.stem_len("ed")) {
            self.replace_suffix("ed", "");
            true
        } else if self.ends_with("ing") && self.has_vowel(self.stem_len("ing")) {
            self.replace_suffix("ing", "");
            true
        } else {
            false
        };
        if !removed {
            return;
        }
        if self.ends_with("at") {
            self.replace_suffix("at", "ate");
        } else if self.ends_with("bl") {
            self.replace_suffix("bl", "ble");
        } else if self.ends_with("iz") {
            self.replace_suffix("iz", "ize");
        } else if self.ends_double_consonant(self.b.len()) {
            if !matches!(self.b[self.b.len() - 1], b'l' | b's' | b'z') {
                self.b.pop();
            }
        } else if self.measure(self.b.len()) == 1 && self.ends_cvc(self.b.len()) {
            self.b.push(b'e');
        }
    }

    fn step1c(&mut self) {
        if self.ends_with("y") && self.has_vowel(self.stem_len("y")) {
            self.replace_suffix("y", "i");
        }
    }

    fn step2(&mut self) {
        const RULES: &[(&str, &str)] = &[
            ("ational", "ate"),
            ("tional", "tion"),
            ("enci", "ence"),
            ("anci", "ance"),
            ("izer", "ize"),
            ("abli", "able"),
            ("alli", "al"),
            ("entli", "ent"),
            ("eli", "e"),
            ("ousli", "ous"),
            ("ization", "ize"),
            ("ation", "ate"),
            ("ator", "ate"),
            ("alism", "al"),
            ("iveness", "ive"),
            ("fulness", "ful"),
            ("ousness", "ous"),
            ("aliti", "al"),
            ("iviti", "ive"),
            ("biliti", "ble"),
        ];
        self.replace_longest(RULES, 0);
    }

    fn step3(&mut self) {
        const RULES: &[(&str, &str)] = &[
            ("icate", "ic"),
            ("ative", ""),
            ("alize", "al"),
            ("iciti", "ic"),
            ("ical", "ic"),
            ("ful", ""),
            ("ness", ""),
        ];
        self.replace_longest(RULES, 0);
    }

    fn step4(&mut self) {
        const SUFFIXES: &[&str] = &[
            "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent", "ion",
            "ou", "ism", "ate", "iti", "ous", "ive", "ize",
        ];
        let hit = SUFFIXES
            .iter()
            .filter(|suffix| self.ends_with(suffix) && self.b.len() > suffix.len())
            .max_by_key(|suffix| suffix.len());
        let Some(&suffix) = hit else { return };
        let stem = self.stem_len(suffix);
        if self.measure(stem) <= 1 {
            return;
        }
        if suffix == "ion" && !matches!(self.b[stem - 1], b's' | b't') {
            return;
        }
        self.b.truncate(stem);
    }

    fn step5a(&mut self) {
        if !self.ends_with("e") {
            return;
        }
        let stem = self.stem_len("e");
        let m = self.measure(stem);
        if m > 1 || (m == 1 && !self.ends_cvc(stem)) {
            self.b.truncate(stem);
        }
    }

    fn step5b(&mut self) {
        let n = self.b.len();
        if self.measure(n) > 1 && self.ends_double_consonant(n) && self.b[n - 1] == b'l' {
            self.b.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_cases() {
        for (w, s) in [
            ("caresses", "caress"),
            ("ponies", "poni"),
            ("running", "run"),
            ("hopping", "hop"),
            ("filing", "file"),
            ("relational", "relat"),
            ("generalization", "gener"),
            ("neuromorphic", "neuromorph"),
            ("emulate", "emul"),
        ] {
            assert_eq!(porter_stem(w), s, "{w}");
        }
    }

    #[test]
    fn short_and_non_ascii_pass_through() {
        assert_eq!(porter_stem("ai"), "ai");
        assert_eq!(porter_stem("naïve"), "naïve");
    }

    #[test]
    fn fixed_point_is_stable() {
        assert_eq!(porter_stem("agreed"), "agre");
        assert_eq!(stem_to_fixed_point("agreed"), "agr");
        let s = stem_to_fixed_point("generalizations");
        assert_eq!(porter_stem(&s), s);
    }
}
