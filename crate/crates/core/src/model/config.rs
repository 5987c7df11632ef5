use crate::annotate::{KEYWORD_SYMBOLS, RATING_VALUES, SENTIMENT_VALUES};
use crate::error::{contract, Result};
use crate::nn::GruParams;
use crate::text::{DEFAULT_BUCKETS, DEFAULT_MAX_SIZE, MAX_SEQUENCE_LEN, RESERVED};

/// Which conditioning signals feed the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Toggles {
    pub category: bool,
    pub length: bool,
    pub rating: bool,
    pub sentiment: bool,
    pub keywords: bool,
}

impl Toggles {
    pub const ALL: Toggles = Toggles {
        category: true,
        length: true,
        rating: true,
        sentiment: true,
        keywords: true,
    };

    /// Plain attentional encoder-decoder.
    pub const NONE: Toggles = Toggles {
        category: false,
        length: false,
        rating: false,
        sentiment: false,
        keywords: false,
    };

    pub fn enabled_attributes(&self) -> usize {
        [self.category, self.length, self.rating, self.sentiment]
            .iter()
            .filter(|&&b| b)
            .count()
    }
}

impl Default for Toggles {
    fn default() -> Self {
        Toggles::ALL
    }
}

/// Network dimensions, table sizes and conditioning toggles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    /// Word embedding size `d_w`.
    pub word_dim: usize,
    /// GRU hidden units per direction `d_h`.
    pub hidden_dim: usize,
    /// Attribute and keyword embedding size `d_a`.
    pub attr_dim: usize,
    pub vocab_size: usize,
    pub max_len: usize,
    /// Number of app categories `N_Γ`.
    pub categories: usize,
    /// Number of review-length buckets `N_L`.
    pub length_buckets: usize,
    pub toggles: Toggles,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            word_dim: 100,
            hidden_dim: 200,
            attr_dim: 90,
            vocab_size: DEFAULT_MAX_SIZE + RESERVED.len(),
            max_len: MAX_SEQUENCE_LEN,
            categories: 15,
            length_buckets: DEFAULT_BUCKETS,
            toggles: Toggles::ALL,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("word_dim", self.word_dim),
            ("hidden_dim", self.hidden_dim),
            ("attr_dim", self.attr_dim),
            ("max_len", self.max_len),
            ("categories", self.categories),
            ("length_buckets", self.length_buckets),
        ];
        if let Some((name, _)) = dims.iter().find(|(_, v)| *v == 0) {
            return Err(contract(alloc::format!("{name} must be at least 1")));
        }
        if self.vocab_size <= RESERVED.len() {
            return Err(contract("vocab_size must exceed the reserved entries"));
        }
        Ok(())
    }

    /// Rows of each attribute table in (category, length, rating, sentiment) order.
    pub fn attribute_sizes(&self) -> [usize; 4] {
        [self.categories, self.length_buckets, RATING_VALUES, SENTIMENT_VALUES]
    }

    /// Width of the vector fused into the context: `d_h + enabled · d_a`.
    pub fn fused_width(&self) -> usize {
        self.hidden_dim + self.toggles.enabled_attributes() * self.attr_dim
    }

    /// Number of scalar weights this configuration allocates.
    pub fn parameter_count(&self) -> usize {
        let (dw, dh, da, v) = (self.word_dim, self.hidden_dim, self.attr_dim, self.vocab_size);
        let t = self.toggles;
        let mut n = v * dw;
        for (on, rows) in [t.category, t.length, t.rating, t.sentiment]
            .into_iter()
            .zip(self.attribute_sizes())
        {
            if on {
                n += rows * da + da * da;
            }
        }
        if t.keywords {
            n += KEYWORD_SYMBOLS * da + da * da + dw * (da + dw);
        }
        n += 2 * GruParams::count(dw, dh);
        n += dh * 2 * dh;
        if t.enabled_attributes() > 0 {
            n += dh * self.fused_width();
        }
        n += GruParams::count(dw + 2 * dh, dh);
        n += dh * dh + 2 * dh * dh + dh;
        n += v * 3 * dh;
        n
    }
}
