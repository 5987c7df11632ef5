use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{contract, Result};

/// Record indices of the train/validation/test partition.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

/// Partition sizes for `n` records: `⌊8n/10⌋`, `⌊n/10⌋`, and the remainder.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let train = n * 8 / 10;
    let valid = n / 10;
    (train, valid, n - train - valid)
}

/// Seeded shuffle of `0..n`, cut 8:1:1 with floor rounding (see [`split_sizes`]).
pub fn split_indices(n: usize, seed: u64) -> Result<SplitIndices> {
    if n < 10 {
        return Err(contract("at least 10 pairs are required to split 8:1:1"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train, valid, _) = split_sizes(n);
    let test = order.split_off(train + valid);
    let valid = order.split_off(train);
    Ok(SplitIndices {
        train: order,
        valid,
        test,
    })
}

/// Splits `pairs` into (train, validation, test).
pub fn split_dataset<T: Clone>(pairs: &[T], seed: u64) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let idx = split_indices(pairs.len(), seed)?;
    let pick = |ix: &[usize]| ix.iter().map(|&i| pairs[i].clone()).collect();
    Ok((pick(&idx.train), pick(&idx.valid), pick(&idx.test)))
}
