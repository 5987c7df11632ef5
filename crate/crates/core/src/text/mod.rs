//! Corpus records, normalization, vocabulary, length buckets and splitting.

mod buckets;
pub mod normalize;
mod split;
mod vocab;

use alloc::string::String;
use alloc::vec::Vec;

pub use buckets::{LengthBucketizer, DEFAULT_BUCKETS};
pub use normalize::{is_placeholder, lemmatize, squeeze, Normalizer, Placeholder, Substitution};
pub use split::{split_dataset, split_indices, split_sizes, SplitIndices};
pub use vocab::{Vocabulary, BOS, BOS_ID, DEFAULT_MAX_SIZE, EOS, EOS_ID, PAD, PAD_ID, RESERVED, UNK, UNK_ID};

/// Maximum number of tokens fed to the encoder or produced by the decoder.
pub const MAX_SEQUENCE_LEN: usize = 200;

/// One review and its developer response.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReviewRecord {
    pub app_id: String,
    pub category: String,
    pub rating: u8,
    pub review_raw: String,
    pub response_raw: String,
    pub review_tokens: Vec<String>,
    pub response_tokens: Vec<String>,
}

/// Whether a normalized review survives filtering: it must be non-empty and
/// must not consist of a single alphabetic character.
pub fn keep_review<S: AsRef<str>>(tokens: &[S]) -> bool {
    match tokens {
        [] => false,
        [only] => {
            let mut chars = only.as_ref().chars();
            !matches!((chars.next(), chars.next()), (Some(c), None) if c.is_alphabetic())
        }
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_letter_reviews_are_dropped() {
        assert!(!keep_review::<&str>(&[]));
        assert!(!keep_review(&["a"]));
        assert!(keep_review(&["ok"]));
        assert!(keep_review(&["!"]));
        assert!(keep_review(&["a", "b"]));
    }
}
