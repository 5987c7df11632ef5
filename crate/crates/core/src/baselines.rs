//! Retrieval baselines: a random training response, and nearest-neighbour
//! retrieval over bag-of-words review vectors with a BLEU re-rank.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{contract, Result};
use crate::metrics::sentence_bleu_smoothed;
use crate::text::{Vocabulary, UNK_ID};

/// Cosine candidates kept before the re-rank.
pub const NNGEN_TOP_K: usize = 5;
/// Smoothing for zero n-gram counts in the re-rank.
pub const NNGEN_EPSILON: f64 = 0.1;

/// Picks a training response uniformly at random. The pick depends only on
/// `(seed, test_index)`.
pub fn random_response<T>(test_index: usize, pool: &[T], seed: u64) -> Result<&T> {
    if pool.is_empty() {
        return Err(contract("random baseline needs a non-empty response pool"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(test_index as u64);
    Ok(&pool[rng.gen_range(0..pool.len())])
}

/// Sparse term-frequency vector over vocabulary ids.
pub type TermFrequencies = BTreeMap<u32, u32>;

/// Term frequencies of `ids`, split into known-token counts and the `<unk>` count.
pub fn term_frequencies(ids: &[u32]) -> (TermFrequencies, u32) {
    let mut tf = TermFrequencies::new();
    let mut unk = 0;
    for &id in ids {
        if id == UNK_ID {
            unk += 1;
        } else {
            *tf.entry(id).or_insert(0) += 1;
        }
    }
    (tf, unk)
}

fn dot(a: &TermFrequencies, b: &TermFrequencies) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small
        .iter()
        .filter_map(|(k, &x)| large.get(k).map(|&y| f64::from(x) * f64::from(y)))
        .sum()
}

fn norm(a: &TermFrequencies) -> f64 {
    libm::sqrt(a.values().map(|&x| f64::from(x) * f64::from(x)).sum())
}

/// Cosine similarity of two term-frequency vectors; 0 when either is zero.
pub fn cosine(a: &TermFrequencies, b: &TermFrequencies) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot(a, b) / (na * nb)
    }
}

/// Bag-of-words index over the training reviews.
#[derive(Debug, Clone, PartialEq)]
pub struct BowIndex {
    vocab_fingerprint: u64,
    vectors: Vec<TermFrequencies>,
    unk_counts: Vec<u32>,
    norms: Vec<f64>,
    reviews: Vec<Vec<String>>,
    responses: Vec<Vec<String>>,
}

/// Outcome of an NNGen query.
#[derive(Debug, Clone, PartialEq)]
pub struct NnGenMatch {
    /// Training index of the chosen pair.
    pub index: usize,
    pub cosine: f64,
    /// Smoothed sentence BLEU-4 between the query and the chosen review.
    pub bleu: f64,
    /// Set when the query shares no vocabulary with any training review.
    pub degenerate: bool,
}

impl BowIndex {
    /// Indexes aligned training reviews and responses (normalized tokens).
    pub fn build(vocab: &Vocabulary, reviews: Vec<Vec<String>>, responses: Vec<Vec<String>>) -> Result<Self> {
        if reviews.len() != responses.len() {
            return Err(contract(alloc::format!(
                "{} reviews but {} responses",
                reviews.len(),
                responses.len()
            )));
        }
        let mut vectors = Vec::with_capacity(reviews.len());
        let mut unk_counts = Vec::with_capacity(reviews.len());
        for r in &reviews {
            let (tf, unk) = term_frequencies(&vocab.encode_all(r));
            vectors.push(tf);
            unk_counts.push(unk);
        }
        let norms = vectors.iter().map(norm).collect();
        Ok(BowIndex {
            vocab_fingerprint: vocab.fingerprint(),
            vectors,
            unk_counts,
            norms,
            reviews,
            responses,
        })
    }

    /// Rebuilds an index from stored parts, recomputing the norms.
    pub fn from_parts(
        vocab_fingerprint: u64,
        vectors: Vec<TermFrequencies>,
        unk_counts: Vec<u32>,
        reviews: Vec<Vec<String>>,
        responses: Vec<Vec<String>>,
    ) -> Result<Self> {
        let n = vectors.len();
        if unk_counts.len() != n || reviews.len() != n || responses.len() != n {
            return Err(contract("index parts have different lengths"));
        }
        let norms = vectors.iter().map(norm).collect();
        Ok(BowIndex {
            vocab_fingerprint,
            vectors,
            unk_counts,
            norms,
            reviews,
            responses,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vocab_fingerprint(&self) -> u64 {
        self.vocab_fingerprint
    }

    pub fn vectors(&self) -> &[TermFrequencies] {
        &self.vectors
    }

    pub fn unk_counts(&self) -> &[u32] {
        &self.unk_counts
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn reviews(&self) -> &[Vec<String>] {
        &self.reviews
    }

    pub fn responses(&self) -> &[Vec<String>] {
        &self.responses
    }

    fn cosines(&self, query: &TermFrequencies, query_unk: u32) -> (Vec<f64>, bool) {
        let qn = norm(query);
        if qn > 0.0 {
            let scores = self
                .vectors
                .iter()
                .zip(&self.norms)
                .map(|(v, &n)| if n == 0.0 { 0.0 } else { dot(query, v) / (qn * n) })
                .collect();
            return (scores, false);
        }
        // Only <unk> tokens: cosine in the one-dimensional <unk> subspace.
        let scores: Vec<f64> = self
            .unk_counts
            .iter()
            .map(|&u| if query_unk > 0 && u > 0 { 1.0 } else { 0.0 })
            .collect();
        let degenerate = scores.iter().all(|&s| s == 0.0);
        (scores, degenerate)
    }

    /// Nearest-neighbour response for a normalized test review.
    ///
    /// Takes the five most cosine-similar training reviews (ties to the lower
    /// index) and returns the one with the highest smoothed sentence BLEU-4
    /// against the query (ties to the lower index).
    pub fn nngen(&self, vocab: &Vocabulary, review: &[String]) -> Result<NnGenMatch> {
        if self.is_empty() {
            return Err(contract("NNGen index is empty"));
        }
        if vocab.fingerprint() != self.vocab_fingerprint {
            return Err(contract("NNGen index was built with a different vocabulary"));
        }
        let (query, unk) = term_frequencies(&vocab.encode_all(review));
        let (scores, degenerate) = self.cosines(&query, unk);
        if degenerate {
            log::warn!("NNGen query shares no tokens with the index; returning candidate 0");
            let bleu = sentence_bleu_smoothed(review, &self.reviews[0], NNGEN_EPSILON)?;
            return Ok(NnGenMatch {
                index: 0,
                cosine: 0.0,
                bleu,
                degenerate: true,
            });
        }
        let mut ranked: Vec<usize> = (0..scores.len()).collect();
        ranked.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        ranked.truncate(NNGEN_TOP_K);
        let mut best: Option<NnGenMatch> = None;
        for &i in &ranked {
            let bleu = sentence_bleu_smoothed(review, &self.reviews[i], NNGEN_EPSILON)?;
            let better = match &best {
                None => true,
                Some(b) => bleu > b.bleu || (bleu == b.bleu && i < b.index),
            };
            if better {
                best = Some(NnGenMatch {
                    index: i,
                    cosine: scores[i],
                    bleu,
                    degenerate: false,
                });
            }
        }
        Ok(best.expect("at least one candidate"))
    }

    /// The response text NNGen retrieves for `review`.
    pub fn nngen_response(&self, vocab: &Vocabulary, review: &[String]) -> Result<(&[String], NnGenMatch)> {
        let m = self.nngen(vocab, review)?;
        Ok((&self.responses[m.index], m))
    }
}
