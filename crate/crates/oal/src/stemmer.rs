use oal_core::text::{PredicateExtractor, Stemmer, ENGLISH_STOPWORDS};
use rust_stemmers::Algorithm;

/// English Snowball (Porter 2) stemmer.
pub struct PorterStemmer(rust_stemmers::Stemmer);

impl Default for PorterStemmer {
    fn default() -> Self {
        Self(rust_stemmers::Stemmer::create(Algorithm::English))
    }
}

impl Stemmer for PorterStemmer {
    fn stem(&self, word: &str) -> String {
        self.0.stem(word).into_owned()
    }
}

/// Stopword-filtering, stemming extractor for English annotations.
pub fn english_extractor(stemmer: &PorterStemmer) -> PredicateExtractor<'_> {
    PredicateExtractor::new(ENGLISH_STOPWORDS, stemmer)
}
