use alloc::vec::Vec;

use crate::error::{contract, Result};

/// Default number of review-length buckets.
pub const DEFAULT_BUCKETS: usize = 5;

/// Quantile binning of review token counts into categories `1..=N_L`.
///
/// Bucket `k` covers `(edge[k-2], edge[k-1]]`; lengths above the last edge go
/// to the final bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthBucketizer {
    edges: Vec<f64>,
}

fn quantile(sorted: &[usize], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] as f64 + frac * (sorted[hi] as f64 - sorted[lo] as f64)
}

impl LengthBucketizer {
    /// Fits `bucket_count` quantile buckets, linearly interpolating between
    /// order statistics. Duplicate edges and edges at the maximum length are
    /// dropped, which lowers the effective bucket count.
    pub fn fit(lengths: &[usize], bucket_count: usize) -> Result<Self> {
        if bucket_count < 2 {
            return Err(contract("bucket_count must be at least 2"));
        }
        if lengths.is_empty() {
            return Err(contract("cannot fit length buckets on an empty corpus"));
        }
        let mut sorted = lengths.to_vec();
        sorted.sort_unstable();
        let max = *sorted.last().unwrap() as f64;
        let mut edges: Vec<f64> = Vec::new();
        for k in 1..bucket_count {
            let e = quantile(&sorted, k as f64 / bucket_count as f64);
            if e < max && edges.last().is_none_or(|&last| e > last) {
                edges.push(e);
            }
        }
        if edges.len() + 1 < bucket_count {
            log::warn!(
                "length buckets: {} requested, {} effective after merging duplicate edges",
                bucket_count,
                edges.len() + 1
            );
        }
        Ok(LengthBucketizer { edges })
    }

    pub fn from_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.windows(2).any(|w| w[0] >= w[1]) || edges.iter().any(|e| !e.is_finite()) {
            return Err(contract("bucket edges must be finite and strictly ascending"));
        }
        Ok(LengthBucketizer { edges })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Effective number of buckets.
    pub fn bucket_count(&self) -> usize {
        self.edges.len() + 1
    }

    /// Bucket of `length`, in `1..=bucket_count()`.
    pub fn bucketize(&self, length: usize) -> usize {
        1 + self.edges.iter().filter(|&&e| e < length as f64).count()
    }
}
