use serde::{Deserialize, Serialize};

use super::porter;

/// Lowercase word tokens and their Porter stems, index-aligned.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    tokens: Vec<String>,
    stems: Vec<String>,
}

impl TokenStream {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn stems(&self) -> &[String] {
        &self.stems
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits text into lowercase runs of Unicode letters. An apostrophe is kept
/// only when it sits between two letters (`i'm`, `don't`); typographic
/// apostrophes are normalized to `'`.
pub fn tokenize_words(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphabetic() {
            current.extend(c.to_lowercase());
        } else if is_apostrophe(c)
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphabetic())
        {
            current.push('\'');
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

pub fn tokenize(text: &str) -> TokenStream {
    let tokens = tokenize_words(text);
    let stems = tokens.iter().map(|t| porter::stem(t)).collect();
    TokenStream { tokens, stems }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentence_with_contraction() {
        let ts = tokenize("I'm worried about money.");
        assert_eq!(ts.tokens(), ["i'm", "worried", "about", "money"]);
        assert_eq!(ts.stems(), ["i'm", "worri", "about", "monei"]);
    }

    #[test]
    fn empty_text() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  ... 123 !!").is_empty());
    }

    #[test]
    fn stems_collapse_inflections() {
        assert_eq!(tokenize("Struggling struggles").stems(), ["struggl", "struggl"]);
    }

    #[test]
    fn apostrophes_only_between_letters() {
        assert_eq!(tokenize_words("'quoted' rock'n'roll don\u{2019}t"), ["quoted", "rock'n'roll", "don't"]);
        assert_eq!(tokenize_words("parents' house"), ["parents", "house"]);
    }

    #[test]
    fn unicode_letters_and_digits() {
        assert_eq!(tokenize_words("Café COVID-19 niño"), ["café", "covid", "niño"]);
    }
}
