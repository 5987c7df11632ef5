//! Review response generation: an attentional GRU encoder-decoder conditioned
//! on review attributes and keyword topics, plus the surrounding text pipeline,
//! retrieval baselines, BLEU evaluation and response post-processing.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, configuration
//! and the command-line tool live in the companion `rrgen` crate.

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod adam;
pub mod annotate;
pub mod baselines;
pub mod error;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod postprocess;
pub mod tape;
pub mod tensor;
pub mod text;

pub use error::{Error, Result};
pub use tape::{Tape, Var};
pub use tensor::{ParamGrads, ParamId, ParamSet, Tensor};
