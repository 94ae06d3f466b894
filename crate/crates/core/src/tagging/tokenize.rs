use serde::{Deserialize, Serialize};

/// Half-open interval of character (not byte) offsets into a source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

fn joins_word(c: char, prev: char, next: char) -> bool {
    match c {
        '-' | '\'' | '\u{2019}' => prev.is_alphanumeric() && next.is_alphanumeric(),
        '.' | ',' => prev.is_ascii_digit() && next.is_ascii_digit(),
        _ => false,
    }
}

/// Splits text into word and punctuation spans.
///
/// Words are runs of alphanumeric characters; a hyphen or apostrophe
/// between two alphanumerics stays inside the word, as does a decimal point
/// or thousands separator between digits. Every other non-whitespace
/// character is its own token.
pub fn tokenize(text: &str) -> Vec<Span> {
    let chars: Vec<char> = text.chars().collect();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if !c.is_alphanumeric() {
            spans.push(Span::new(i, i + 1));
            i += 1;
            continue;
        }
        let start = i;
        i += 1;
        while i < chars.len() {
            let c = chars[i];
            if c.is_alphanumeric() {
                i += 1;
            } else if i + 1 < chars.len() && joins_word(c, chars[i - 1], chars[i + 1]) {
                i += 2;
            } else {
                break;
            }
        }
        spans.push(Span::new(start, i));
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(text: &str) -> Vec<String> {
        let chars: Vec<char> = text.chars().collect();
        tokenize(text)
            .into_iter()
            .map(|s| chars[s.start..s.end].iter().collect())
            .collect()
    }

    #[test]
    fn sentence_with_final_period() {
        assert_eq!(
            words("Foodborne illnesses influence status."),
            ["Foodborne", "illnesses", "influence", "status", "."]
        );
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  \n\t").is_empty());
    }

    #[test]
    fn spaced_hyphen_is_separate() {
        assert_eq!(words("ultra - processed"), ["ultra", "-", "processed"]);
    }

    #[test]
    fn hyphenated_and_contracted_words_stay_whole() {
        assert_eq!(words("agri-food don't"), ["agri-food", "don't"]);
        assert_eq!(words("'holes'"), ["'", "holes", "'"]);
        assert_eq!(words("3.5 and 1,000."), ["3.5", "and", "1,000", "."]);
    }

    #[test]
    fn offsets_are_characters() {
        let spans = tokenize("café, ok");
        assert_eq!(spans, vec![Span::new(0, 4), Span::new(4, 5), Span::new(6, 8)]);
    }
}
