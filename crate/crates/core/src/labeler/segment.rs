use crate::corpus::{Report, Sentence};

/// Tokens ending in '.' that never close a sentence.
const ABBREVIATIONS: &[&str] =
    &["dr.", "mr.", "mrs.", "ms.", "a.m.", "p.m.", "e.g.", "i.e.", "vs.", "approx."];

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Splits raw report text into sentences.
///
/// A run of `.`, `!` or `?` closes a sentence when it is followed by
/// whitespace or the end of input. Decimals ("1.2") never split because the
/// period is followed by a digit; a period ending one of a fixed list of
/// abbreviations ("Dr.", "a.m.", ...) does not split either.
pub fn segment(text: &str) -> Report {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (_, c) = chars[i];
        if !is_terminal(c) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < chars.len() && is_terminal(chars[j + 1].1) {
            j += 1;
        }
        let end = chars.get(j + 1).map_or(text.len(), |&(b, _)| b);
        let at_boundary = j + 1 == chars.len() || chars[j + 1].1.is_whitespace();
        if at_boundary && !(j + 1 < chars.len() && ends_with_abbreviation(&text[start..end])) {
            if let Some(s) = Sentence::new(&text[start..end]) {
                sentences.push(s);
            }
            start = end;
        }
        i = j + 1;
    }
    if let Some(s) = Sentence::new(&text[start..]) {
        sentences.push(s);
    }
    Report::new(sentences)
}

fn ends_with_abbreviation(fragment: &str) -> bool {
    let last = fragment.split_whitespace().last().unwrap_or("");
    let last = last.trim_start_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
    ABBREVIATIONS.contains(&last.as_str())
}
