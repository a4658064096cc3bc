/// Split text into sentences at `.`, `!` or `?` followed by whitespace.
///
/// A period directly after a single-letter initial (`E.g.`, `J. Smith`)
/// does not end a sentence. Returned sentences are trimmed; order is kept.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0;
    for (i, &(pos, c)) in chars.iter().enumerate() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let followed_by_space = chars.get(i + 1).is_some_and(|&(_, n)| n.is_whitespace());
        if !followed_by_space {
            continue;
        }
        if c == '.' && ends_with_initial(&text[start..pos]) {
            continue;
        }
        let end = pos + c.len_utf8();
        push_trimmed(&mut out, &text[start..end]);
        start = end;
    }
    push_trimmed(&mut out, &text[start..]);
    out
}

/// Whether the text before a period ends in a lone letter such as the `g` of `E.g`.
fn ends_with_initial(before: &str) -> bool {
    let word = before.rsplit(char::is_whitespace).next().unwrap_or("");
    let last = word.rsplit('.').next().unwrap_or("");
    let mut letters = last.chars();
    matches!((letters.next(), letters.next()), (Some(c), None) if c.is_alphabetic())
}

fn push_trimmed(out: &mut Vec<String>, s: &str) {
    let t = s.trim();
    if !t.is_empty() {
        out.push(t.to_string());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_terminals() {
        assert_eq!(split_sentences("A ends. B starts."), ["A ends.", "B starts."]);
    }

    #[test]
    fn no_terminal() {
        assert_eq!(split_sentences("No terminal here"), ["No terminal here"]);
    }

    #[test]
    fn abbreviation_guard() {
        assert_eq!(
            split_sentences("E.g. spikes fire. Done."),
            ["E.g. spikes fire.", "Done."]
        );
    }

    #[test]
    fn question_and_exclamation() {
        assert_eq!(split_sentences("Why? Because!  Yes"), ["Why?", "Because!", "Yes"]);
        assert_eq!(split_sentences("version 2.5 is out."), ["version 2.5 is out."]);
    }

    proptest! {
        #[test]
        fn preserves_non_whitespace(text in "[A-Za-z.!? \n]{0,120}") {
            let joined: String = split_sentences(&text).concat();
            let strip = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
            prop_assert_eq!(strip(&joined), strip(&text));
        }
    }
}
