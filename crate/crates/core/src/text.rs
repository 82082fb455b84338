//! Predicate normalization and extraction.
//!
//! Descriptions are treated as conjunctions of one-word predicates: tokenize,
//! lower-case, drop stopwords, stem, deduplicate. Annotation strings use the
//! same tokenizer and stemmer without stopword removal.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Reduces a lower-cased token to its stem.
pub trait Stemmer {
    fn stem(&self, token: &str) -> String;
}

/// Leaves tokens untouched. Useful for pre-stemmed synthetic vocabularies.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityStemmer;

impl Stemmer for IdentityStemmer {
    fn stem(&self, token: &str) -> String {
        String::from(token)
    }
}

/// A small English stopword list (articles, pronouns, auxiliaries,
/// prepositions and conjunctions).
pub const ENGLISH_STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "all", "also", "am", "an", "and", "any", "are", "as",
    "at", "be", "been", "being", "below", "between", "both", "but", "by", "can", "could", "did",
    "do", "does", "doing", "down", "during", "each", "few", "for", "from", "further", "had", "has",
    "have", "having", "he", "her", "here", "hers", "him", "his", "how", "i", "if", "in", "into",
    "is", "it", "its", "itself", "just", "me", "more", "most", "my", "no", "nor", "not", "now", "of",
    "off", "on", "once", "one", "only", "or", "other", "our", "out", "over", "own", "same", "she",
    "should", "so", "some", "such", "than", "that", "the", "their", "them", "then", "there",
    "these", "they", "this", "those", "through", "to", "too", "under", "until", "up", "very", "was",
    "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with",
    "would", "you", "your",
];

/// Splits on anything that is not alphanumeric and lower-cases the pieces.
/// Special characters therefore never survive into a token.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.chars().flat_map(char::to_lowercase).collect())
}

/// Stopword list plus stemmer.
#[derive(Clone, Copy)]
pub struct PredicateExtractor<'a> {
    pub stopwords: &'a [&'a str],
    pub stemmer: &'a dyn Stemmer,
}

impl<'a> PredicateExtractor<'a> {
    pub fn new(stopwords: &'a [&'a str], stemmer: &'a dyn Stemmer) -> Self {
        Self { stopwords, stemmer }
    }

    fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(&token)
    }

    /// Ordered, deduplicated predicates of a free-text description.
    pub fn extract(&self, description: &str) -> Result<Vec<String>> {
        let mut out: Vec<String> = Vec::new();
        for token in tokenize(description) {
            if self.is_stopword(&token) {
                continue;
            }
            let stem = self.stemmer.stem(&token);
            if !stem.is_empty() && !out.contains(&stem) {
                out.push(stem);
            }
        }
        if out.is_empty() {
            return Err(Error::EmptyDescription);
        }
        Ok(out)
    }

    /// Normalized predicates of one annotation string. `"Red Box!"` yields
    /// `red` and `box`. Stopwords are kept: an annotation is a label, not prose.
    pub fn normalize_annotation(&self, annotation: &str) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for token in tokenize(annotation) {
            let stem = self.stemmer.stem(&token);
            if !stem.is_empty() && !out.contains(&stem) {
                out.push(stem);
            }
        }
        out
    }
}

pub fn extract_predicates(
    description: &str,
    stopwords: &[&str],
    stemmer: &dyn Stemmer,
) -> Result<Vec<String>> {
    PredicateExtractor::new(stopwords, stemmer).extract(description)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Strips a trailing plural `s`; enough to show the stemmer is applied.
    struct PluralStemmer;
    impl Stemmer for PluralStemmer {
        fn stem(&self, token: &str) -> String {
            String::from(token.strip_suffix('s').unwrap_or(token))
        }
    }

    #[test]
    fn extracts_description_predicates() {
        let got = extract_predicates("the red box", ENGLISH_STOPWORDS, &IdentityStemmer).unwrap();
        assert_eq!(got, ["red", "box"]);
    }

    #[test]
    fn all_stopwords_is_an_error() {
        let err = extract_predicates("a the of", ENGLISH_STOPWORDS, &IdentityStemmer).unwrap_err();
        assert_eq!(err, Error::EmptyDescription);
    }

    #[test]
    fn duplicates_collapse() {
        let got = extract_predicates("red red red", ENGLISH_STOPWORDS, &IdentityStemmer).unwrap();
        assert_eq!(got, ["red"]);
        let got = extract_predicates("Cups and cup", ENGLISH_STOPWORDS, &PluralStemmer).unwrap();
        assert_eq!(got, ["cup"]);
    }

    #[test]
    fn annotation_normalization_strips_specials() {
        let ex = PredicateExtractor::new(ENGLISH_STOPWORDS, &IdentityStemmer);
        assert_eq!(ex.normalize_annotation("Red Box!"), ["red", "box"]);
        assert_eq!(ex.normalize_annotation("  --  "), Vec::<String>::new());
    }
}
