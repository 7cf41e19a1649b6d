//! Tokenization shared by the sparse retrievers and the hashing embedder.
//!
//! Text is split on every non-alphanumeric character, then each word is cut
//! at identifier boundaries (`getUserName`, `HTTPServer`, `bm25`), lowercased
//! and filtered by length and, optionally, a built-in English stopword list.

use alloc::string::String;
use alloc::vec::Vec;

/// Tokenizer switches. Serialized inside the run configuration and embedded
/// in persisted indexes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub split_identifiers: bool,
    /// Tokens with fewer characters are dropped. Never zero.
    pub min_token_len: usize,
    /// Drop built-in stopwords from every tokenized text.
    pub stopwords: bool,
    /// Drop built-in stopwords from queries only; documents keep them.
    pub query_stopwords: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            split_identifiers: true,
            min_token_len: 2,
            stopwords: false,
            query_stopwords: false,
        }
    }
}

impl TokenizerConfig {
    /// The configuration applied to query text: identical to the document
    /// configuration except that `query_stopwords` turns stopword removal on.
    pub fn for_queries(&self) -> TokenizerConfig {
        TokenizerConfig {
            stopwords: self.stopwords || self.query_stopwords,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), crate::ArgumentError> {
        if self.min_token_len == 0 {
            return Err(crate::ArgumentError::new(
                "min_token_len must be at least 1",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Upper,
    Lower,
    Digit,
}

fn class_of(c: char) -> CharClass {
    if c.is_numeric() {
        CharClass::Digit
    } else if c.is_uppercase() && !c.to_lowercase().eq(core::iter::once(c)) {
        CharClass::Upper
    } else {
        // Lowercase and uncased letters behave the same at boundaries, and so
        // do capitals without a lowercase form (U+1D546), which would
        // otherwise start a new word only until lowercased.
        CharClass::Lower
    }
}

/// Splits one alphanumeric word at camelCase, acronym and digit/letter
/// boundaries.
fn split_identifier<'a>(word: &'a str, out: &mut Vec<&'a str>) {
    let chars: Vec<(usize, char)> = word.char_indices().collect();
    let mut start = 0;
    for i in 1..chars.len() {
        let prev = class_of(chars[i - 1].1);
        let cur = class_of(chars[i].1);
        let boundary = match (prev, cur) {
            (CharClass::Digit, CharClass::Digit) => false,
            (CharClass::Digit, _) | (_, CharClass::Digit) => true,
            (CharClass::Lower, CharClass::Upper) => true,
            // "HTTPServer": cut before the 'S' that starts a capitalized word.
            (CharClass::Upper, CharClass::Upper) => chars
                .get(i + 1)
                .is_some_and(|&(_, next)| class_of(next) == CharClass::Lower),
            _ => false,
        };
        if boundary {
            out.push(&word[start..chars[i].0]);
            start = chars[i].0;
        }
    }
    if start < word.len() {
        out.push(&word[start..]);
    }
}

/// Tokenizes `text` under `config`. Empty input yields an empty list.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    let mut pieces: Vec<&str> = Vec::new();
    for word in text.split(|c: char| !c.is_alphanumeric()) {
        if word.is_empty() {
            continue;
        }
        if config.split_identifiers {
            split_identifier(word, &mut pieces);
        } else {
            pieces.push(word);
        }
    }

    let min_len = config.min_token_len.max(1);
    let mut tokens = Vec::with_capacity(pieces.len());
    for piece in pieces {
        let token: String = if config.lowercase {
            // Some lowercase mappings emit combining marks; keep only what the
            // splitter would keep so re-tokenizing output is a fixed point.
            piece
                .chars()
                .flat_map(char::to_lowercase)
                .filter(|c| c.is_alphanumeric())
                .collect()
        } else {
            String::from(piece)
        };
        if token.chars().count() < min_len {
            continue;
        }
        if config.stopwords && is_stopword(&token) {
            continue;
        }
        tokens.push(token);
    }
    tokens
}

/// Built-in English stopword list, sorted for binary search.
#[rustfmt::skip]
pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
    "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
    "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she",
    "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them", "themselves",
    "then", "there", "these", "they", "this", "those", "through", "to", "too", "under", "until",
    "up", "very", "was", "we", "were", "what", "when", "where", "which", "while", "who", "whom",
    "why", "will", "with", "would", "you", "your", "yours", "yourself", "yourselves",
];

/// Case-insensitive membership in [`STOPWORDS`].
pub fn is_stopword(token: &str) -> bool {
    if token.chars().any(char::is_uppercase) {
        let lowered: String = token.chars().flat_map(char::to_lowercase).collect();
        STOPWORDS.binary_search(&lowered.as_str()).is_ok()
    } else {
        STOPWORDS.binary_search(&token).is_ok()
    }
}
