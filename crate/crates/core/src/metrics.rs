//! Corpus BLEU-4 with brevity penalty, and a smoothed sentence-level variant.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{contract, Result};

/// Highest n-gram order.
pub const MAX_ORDER: usize = 4;

/// Corpus BLEU with its sufficient statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BleuReport {
    /// BLEU-4 in `[0, 100]`.
    pub bleu4: f64,
    /// Clipped n-gram matches for n = 1..4.
    pub matches: [u64; MAX_ORDER],
    /// Hypothesis n-gram totals for n = 1..4.
    pub totals: [u64; MAX_ORDER],
    /// Modified precisions in percent.
    pub precisions: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    /// Total hypothesis length `c`.
    pub hyp_len: u64,
    /// Total reference length `r`.
    pub ref_len: u64,
}

fn ngram_counts<T: Ord>(tokens: &[T], n: usize) -> BTreeMap<&[T], u64> {
    let mut counts = BTreeMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped matches and hypothesis totals for one pair, n = 1..4.
pub fn pair_stats<T: Ord>(hyp: &[T], reference: &[T]) -> ([u64; MAX_ORDER], [u64; MAX_ORDER]) {
    let mut matches = [0; MAX_ORDER];
    let mut totals = [0; MAX_ORDER];
    for n in 1..=MAX_ORDER {
        let h = ngram_counts(hyp, n);
        let r = ngram_counts(reference, n);
        matches[n - 1] = h.iter().map(|(g, &c)| c.min(r.get(g).copied().unwrap_or(0))).sum();
        totals[n - 1] = hyp.len().saturating_sub(n - 1) as u64;
    }
    (matches, totals)
}

/// `min(1, exp(1 − r/c))`; zero when the hypotheses are empty but the
/// references are not.
pub fn brevity_penalty(hyp_len: u64, ref_len: u64) -> f64 {
    if hyp_len == 0 {
        return if ref_len == 0 { 1.0 } else { 0.0 };
    }
    if hyp_len >= ref_len {
        1.0
    } else {
        libm::exp(1.0 - ref_len as f64 / hyp_len as f64)
    }
}

/// Corpus BLEU-4 over aligned hypothesis/reference pairs (one reference each).
///
/// Counts are pooled over the corpus before the precisions are formed. The
/// score is zero if any order has no matches.
pub fn corpus_bleu<T: Ord>(pairs: &[(&[T], &[T])]) -> Result<BleuReport> {
    if pairs.is_empty() {
        return Err(contract("BLEU needs at least one pair"));
    }
    let mut matches = [0u64; MAX_ORDER];
    let mut totals = [0u64; MAX_ORDER];
    let (mut c, mut r) = (0u64, 0u64);
    for (hyp, reference) in pairs {
        let (m, t) = pair_stats(hyp, reference);
        for n in 0..MAX_ORDER {
            matches[n] += m[n];
            totals[n] += t[n];
        }
        c += hyp.len() as u64;
        r += reference.len() as u64;
    }
    Ok(report(matches, totals, c, r))
}

fn report(matches: [u64; MAX_ORDER], totals: [u64; MAX_ORDER], c: u64, r: u64) -> BleuReport {
    let mut precisions = [0.0; MAX_ORDER];
    for n in 0..MAX_ORDER {
        if totals[n] > 0 {
            precisions[n] = 100.0 * matches[n] as f64 / totals[n] as f64;
        }
    }
    let bp = brevity_penalty(c, r);
    let bleu4 = if matches.contains(&0) {
        0.0
    } else {
        let log_mean = (0..MAX_ORDER)
            .map(|n| libm::log(matches[n] as f64 / totals[n] as f64))
            .sum::<f64>()
            / MAX_ORDER as f64;
        100.0 * bp * libm::exp(log_mean)
    };
    BleuReport {
        bleu4,
        matches,
        totals,
        precisions,
        brevity_penalty: bp,
        hyp_len: c,
        ref_len: r,
    }
}

/// Corpus BLEU over parallel hypothesis and reference lists.
pub fn corpus_bleu_owned<T: Ord>(hyps: &[Vec<T>], refs: &[Vec<T>]) -> Result<BleuReport> {
    if hyps.len() != refs.len() {
        return Err(contract(format!(
            "{} hypotheses but {} references",
            hyps.len(),
            refs.len()
        )));
    }
    let pairs: Vec<(&[T], &[T])> = hyps.iter().zip(refs).map(|(h, r)| (&h[..], &r[..])).collect();
    corpus_bleu(&pairs)
}

/// Sentence BLEU-4 in `[0, 100]` where zero match counts are replaced by
/// `epsilon` (denominators are at least 1). An empty hypothesis scores 0.
pub fn sentence_bleu_smoothed<T: Ord>(hyp: &[T], reference: &[T], epsilon: f64) -> Result<f64> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(contract(format!("smoothing epsilon must be positive, got {epsilon}")));
    }
    if hyp.is_empty() {
        return Ok(0.0);
    }
    let (m, t) = pair_stats(hyp, reference);
    let log_mean = (0..MAX_ORDER)
        .map(|n| {
            let num = if m[n] == 0 { epsilon } else { m[n] as f64 };
            libm::log(num / t[n].max(1) as f64)
        })
        .sum::<f64>()
        / MAX_ORDER as f64;
    Ok(100.0 * brevity_penalty(hyp.len() as u64, reference.len() as u64) * libm::exp(log_mean))
}
