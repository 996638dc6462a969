//! Whitespace tokenization with terminal-punctuation splitting.
//!
//! Inputs that arrive pre-tokenized (CoNLL) bypass this module entirely; it
//! exists for raw `Text` fields whose spans are given as character offsets.

use crate::corpus::Token;

/// Abbreviations whose trailing period is part of the token.
const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "mx.", "dr.", "prof.", "st.", "jr.", "sr.", "rev.", "fr.", "hon.",
    "sgt.", "capt.", "lt.", "col.", "gen.", "messrs.", "mmes.", "mlle.", "mme.", "no.", "etc.",
    "vs.", "inc.", "ltd.", "co.",
];

const TERMINAL_PUNCT: &[char] = &[',', '.', '!', '?', ';', ':'];

fn keeps_trailing_period(chunk: &str) -> bool {
    debug_assert!(chunk.ends_with('.'));
    let lower = chunk.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    let stem: Vec<char> = chunk.chars().collect();
    // Single-letter initials: "B.", "M."
    if stem.len() == 2 && stem[0].is_alphabetic() && stem[0].is_uppercase() {
        return true;
    }
    // Internal periods: "U.S.", "Ph.D."
    chunk[..chunk.len() - 1].contains('.')
}

/// Splits `text` into tokens, recording the character range of each token.
///
/// Whitespace delimits chunks; terminal punctuation is peeled off the end of
/// a chunk ("Bobbitt," becomes "Bobbitt" and ",") unless the period belongs
/// to an abbreviation or initial. Possessive clitics stay attached.
pub fn tokenize(text: &str) -> (Vec<Token>, Vec<std::ops::Range<usize>>) {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens: Vec<(String, std::ops::Range<usize>, bool)> = Vec::new();

    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let followed_by_space = i < chars.len();
        let chunk: String = chars[start..i].iter().collect();

        // Peel terminal punctuation from the right.
        let mut pieces: Vec<(String, std::ops::Range<usize>)> = Vec::new();
        let mut end = start + chunk.chars().count();
        let mut rest = chunk;
        while let Some(last) = rest.chars().last() {
            let n = rest.chars().count();
            if n > 1 && TERMINAL_PUNCT.contains(&last) {
                if last == '.' && keeps_trailing_period(&rest) {
                    break;
                }
                pieces.push((last.to_string(), end - 1..end));
                rest.pop();
                end -= 1;
            } else {
                break;
            }
        }
        pieces.push((rest, start..end));
        for (k, (surface, range)) in pieces.into_iter().rev().enumerate() {
            // Only the last piece of a chunk is followed by whitespace.
            let _ = k;
            tokens.push((surface, range, false));
        }
        if let Some(last) = tokens.last_mut() {
            last.2 = followed_by_space;
        }
    }

    let mut out = Vec::with_capacity(tokens.len());
    let mut ranges = Vec::with_capacity(tokens.len());
    let n = tokens.len();
    for (idx, (surface, range, trailing)) in tokens.into_iter().enumerate() {
        out.push(Token {
            index: idx,
            surface,
            pos_tag: None,
            trailing_space: trailing && idx + 1 < n,
        });
        ranges.push(range);
    }
    (out, ranges)
}
