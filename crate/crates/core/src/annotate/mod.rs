//! Review-level attributes (category, length bucket, rating, sentiment) and
//! per-token keyword symbols.

pub mod keywords;
pub mod sentiment;

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{contract, Error, Result};
use crate::text::{LengthBucketizer, ReviewRecord};

pub use keywords::{KeywordDictionary, KeywordSymbol, Topic, KEYWORD_SYMBOLS};
pub use sentiment::{
    review_score, review_sentiment, score_sentence, sentence_sentiment, split_sentences, SentimentLexicon,
};

/// Number of rating values.
pub const RATING_VALUES: usize = 5;
/// Number of sentiment values (`-5..=5`).
pub const SENTIMENT_VALUES: usize = 11;

/// Sorted list of app categories; indices are 1-based.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryIndex {
    names: Vec<String>,
}

impl CategoryIndex {
    pub fn from_names<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Self {
        let mut names: Vec<String> = names.into_iter().map(|s| s.as_ref().to_string()).collect();
        names.sort();
        names.dedup();
        CategoryIndex { names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, category: &str) -> Option<usize> {
        self.names
            .binary_search_by(|n| n.as_str().cmp(category))
            .ok()
            .map(|i| i + 1)
    }
}

/// A record with its derived conditioning signals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedReview {
    pub record: ReviewRecord,
    /// App category, `1..=N_Γ`.
    pub category_index: usize,
    /// Review length bucket, `1..=N_L`.
    pub length_bucket: usize,
    /// Star rating, `1..=5`.
    pub rating: u8,
    /// Review sentiment, `-5..=5`.
    pub sentiment: i8,
    /// One symbol per review token.
    pub keyword_symbols: Vec<KeywordSymbol>,
}

impl AnnotatedReview {
    /// Sentiment as a 1-based category index in `1..=11`.
    pub fn sentiment_index(&self) -> usize {
        (i16::from(self.sentiment) + 6) as usize
    }
}

/// Bundles the resources needed to annotate records.
#[derive(Debug, Clone)]
pub struct Annotator {
    pub lexicon: SentimentLexicon,
    pub dictionary: KeywordDictionary,
    pub buckets: LengthBucketizer,
    pub categories: CategoryIndex,
}

impl Annotator {
    pub fn annotate(&self, record: &ReviewRecord) -> Result<AnnotatedReview> {
        if !(1..=5).contains(&record.rating) {
            return Err(contract(alloc::format!("rating {} outside 1..=5", record.rating)));
        }
        let category_index = self.categories.index(&record.category).ok_or(Error::Index {
            what: "category",
            index: self.categories.len() + 1,
            size: self.categories.len(),
        })?;
        Ok(AnnotatedReview {
            category_index,
            length_bucket: self.buckets.bucketize(record.review_tokens.len()),
            rating: record.rating,
            sentiment: review_score(&record.review_tokens, &self.lexicon),
            keyword_symbols: self.dictionary.tag(&record.review_tokens),
            record: record.clone(),
        })
    }
}
