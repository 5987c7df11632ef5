//! Forward computation: attribute embeddings, keyword-fused bidirectional
//! GRU encoder, additive attention and the attentional GRU decoder.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::annotate::{AnnotatedReview, KeywordSymbol, KEYWORD_SYMBOLS};
use crate::error::{contract, Error, Result};
use crate::model::config::ModelConfig;
use crate::nn::{gru_cell, tanh_proj, uniform, xavier, GruParams, GruVars};
use crate::tape::{softmax_slice, Tape, Var};
use crate::tensor::{ParamSet, Tensor};
use crate::text::{Vocabulary, BOS_ID, EOS_ID};

const EMBED_SCALE: f64 = 0.1;

/// Attribute names in fusion order.
pub const ATTRIBUTES: [&str; 4] = ["category", "length", "rating", "sentiment"];

/// One review-response pair encoded to indices.
///
/// Attribute indices are 1-based, as in [`AnnotatedReview`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub source: Vec<u32>,
    pub keywords: Vec<KeywordSymbol>,
    pub category: usize,
    pub length_bucket: usize,
    pub rating: usize,
    pub sentiment: usize,
    pub target: Vec<u32>,
}

impl Example {
    /// Encodes an annotated pair, truncating both sides to `max_len` tokens.
    pub fn from_annotated(review: &AnnotatedReview, vocab: &Vocabulary, max_len: usize) -> Self {
        let n = review.record.review_tokens.len().min(max_len);
        let m = review.record.response_tokens.len().min(max_len);
        Example {
            source: vocab.encode_all(&review.record.review_tokens[..n]),
            keywords: review.keyword_symbols[..n].to_vec(),
            category: review.category_index,
            length_bucket: review.length_bucket,
            rating: review.rating as usize,
            sentiment: review.sentiment_index(),
            target: vocab.encode_all(&review.record.response_tokens[..m]),
        }
    }

    fn attribute(&self, i: usize) -> usize {
        [self.category, self.length_bucket, self.rating, self.sentiment][i]
    }
}

/// Allocates and initializes every weight `config` needs.
pub fn init_params(config: &ModelConfig) -> Result<ParamSet> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let rng = &mut rng;
    let (dw, dh, da, v) = (config.word_dim, config.hidden_dim, config.attr_dim, config.vocab_size);
    let t = config.toggles;
    let mut p = ParamSet::new();
    p.insert("embedding", uniform(v, dw, EMBED_SCALE, rng)?)?;
    let enabled = [t.category, t.length, t.rating, t.sentiment];
    for ((name, on), rows) in ATTRIBUTES.iter().zip(enabled).zip(config.attribute_sizes()) {
        if on {
            p.insert(&format!("attr.{name}.table"), uniform(rows, da, EMBED_SCALE, rng)?)?;
            p.insert(&format!("attr.{name}.proj"), xavier(da, da, rng)?)?;
        }
    }
    if t.keywords {
        p.insert("keyword.table", uniform(KEYWORD_SYMBOLS, da, EMBED_SCALE, rng)?)?;
        p.insert("keyword.proj", xavier(da, da, rng)?)?;
        p.insert("keyword.fuse", xavier(dw, da + dw, rng)?)?;
    }
    GruParams::init(&mut p, "encoder.fwd", dw, dh, rng)?;
    GruParams::init(&mut p, "encoder.bwd", dw, dh, rng)?;
    p.insert("encoder.bridge", xavier(dh, 2 * dh, rng)?)?;
    if t.enabled_attributes() > 0 {
        p.insert("context.fuse", xavier(dh, config.fused_width(), rng)?)?;
    }
    GruParams::init(&mut p, "decoder", dw + 2 * dh, dh, rng)?;
    p.insert("attention.query", xavier(dh, dh, rng)?)?;
    p.insert("attention.key", xavier(2 * dh, dh, rng)?)?;
    p.insert(
        "attention.score",
        Tensor::vector(uniform(1, dh, EMBED_SCALE, rng)?.data().to_vec())?,
    )?;
    p.insert("output.proj", xavier(v, 3 * dh, rng)?)?;
    Ok(p)
}

/// Checks that `params` holds exactly the tensors `config` describes.
pub fn check_params(config: &ModelConfig, params: &ParamSet) -> Result<()> {
    let reference = init_params(config)?;
    if reference.len() != params.len() {
        return Err(contract(format!(
            "expected {} parameter tensors, found {}",
            reference.len(),
            params.len()
        )));
    }
    for (name, t) in reference.iter() {
        let got = params.by_name(name).ok_or_else(|| Error::UnknownParam(name.into()))?;
        if got.shape() != t.shape() {
            return Err(Error::Shape {
                op: "check_params",
                lhs: t.shape().to_vec(),
                rhs: got.shape().to_vec(),
            });
        }
    }
    Ok(())
}

struct AttrVars {
    slot: usize,
    table: Var,
    proj: Var,
}

struct KeywordVars {
    table: Var,
    proj: Var,
    fuse: Var,
}

/// Weights of one configuration bound to a tape.
pub struct Network<'c> {
    config: &'c ModelConfig,
    embedding: Var,
    attrs: Vec<AttrVars>,
    keywords: Option<KeywordVars>,
    enc_fwd: GruVars,
    enc_bwd: GruVars,
    bridge: Var,
    fuse: Option<Var>,
    decoder: GruVars,
    att_query: Var,
    att_key: Var,
    att_score: Var,
    output: Var,
}

/// Encoder states and fused context for one review.
#[derive(Debug, Clone)]
pub struct EncoderOutput {
    /// Per-token `[forward_t; backward_t]` states.
    pub states: Vec<Var>,
    /// The states stacked as a `T_x × 2d_h` matrix.
    pub matrix: Var,
    /// Attention keys, `T_x × d_h`.
    pub keys: Var,
    /// Context `c` before attribute fusion.
    pub raw_context: Var,
    /// Fused context `c′`, the decoder's initial state.
    pub context: Var,
}

/// One decoder step's outputs.
#[derive(Debug, Clone, Copy)]
pub struct DecodeStep {
    pub logits: Var,
    pub state: Var,
    pub attention: Var,
}

impl<'c> Network<'c> {
    /// Binds the weights used by `config` from the tape's parameter set.
    /// Tensors of disabled components are ignored even when present.
    pub fn bind(tape: &mut Tape<'_>, config: &'c ModelConfig, params: &ParamSet) -> Result<Self> {
        let t = config.toggles;
        let mut p = |name: &str| params.require(name).map(|id| tape.param(id));
        let embedding = p("embedding")?;
        let mut attrs = Vec::new();
        for (slot, (name, on)) in ATTRIBUTES
            .iter()
            .zip([t.category, t.length, t.rating, t.sentiment])
            .enumerate()
        {
            if on {
                attrs.push(AttrVars {
                    slot,
                    table: p(&format!("attr.{name}.table"))?,
                    proj: p(&format!("attr.{name}.proj"))?,
                });
            }
        }
        let keywords = if t.keywords {
            Some(KeywordVars {
                table: p("keyword.table")?,
                proj: p("keyword.proj")?,
                fuse: p("keyword.fuse")?,
            })
        } else {
            None
        };
        let bridge = p("encoder.bridge")?;
        let fuse = if t.enabled_attributes() > 0 {
            Some(p("context.fuse")?)
        } else {
            None
        };
        let att_query = p("attention.query")?;
        let att_key = p("attention.key")?;
        let att_score = p("attention.score")?;
        let output = p("output.proj")?;
        let enc_fwd = GruParams::lookup(params, "encoder.fwd")?.vars(tape);
        let enc_bwd = GruParams::lookup(params, "encoder.bwd")?.vars(tape);
        let decoder = GruParams::lookup(params, "decoder")?.vars(tape);
        Ok(Network {
            config,
            embedding,
            attrs,
            keywords,
            enc_fwd,
            enc_bwd,
            bridge,
            fuse,
            decoder,
            att_query,
            att_key,
            att_score,
            output,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        self.config
    }

    /// `h_• = tanh(W^• · table_•[index])` for each enabled attribute, in
    /// (category, length, rating, sentiment) order.
    pub fn embed_attributes(&self, tape: &mut Tape<'_>, ex: &Example) -> Result<Vec<Var>> {
        let sizes = self.config.attribute_sizes();
        self.attrs
            .iter()
            .map(|a| {
                let index = ex.attribute(a.slot);
                if index == 0 || index > sizes[a.slot] {
                    return Err(Error::Index {
                        what: ATTRIBUTES[a.slot],
                        index,
                        size: sizes[a.slot],
                    });
                }
                let row = tape.row(a.table, index - 1)?;
                tanh_proj(tape, a.proj, row)
            })
            .collect()
    }

    fn token_inputs(&self, tape: &mut Tape<'_>, ex: &Example) -> Result<Vec<Var>> {
        if ex.source.is_empty() {
            return Err(contract("cannot encode an empty review"));
        }
        if self.keywords.is_some() && ex.keywords.len() != ex.source.len() {
            return Err(contract("keyword sequence length differs from review length"));
        }
        let mut out = Vec::with_capacity(ex.source.len());
        for (t, &tok) in ex.source.iter().enumerate() {
            let w = tape.row(self.embedding, tok as usize)?;
            let v = match &self.keywords {
                Some(k) => {
                    let kr = tape.row(k.table, ex.keywords[t].index())?;
                    let kt = tanh_proj(tape, k.proj, kr)?;
                    let joined = tape.concat(&[kt, w])?;
                    tanh_proj(tape, k.fuse, joined)?
                }
                None => w,
            };
            out.push(v);
        }
        Ok(out)
    }

    /// Runs the bidirectional encoder and fuses the enabled attributes into
    /// the context: `c′ = tanh(W^H [c; h_τ; h_l; h_r; h_s])`, or `c′ = c`
    /// when every attribute is disabled.
    pub fn encode(&self, tape: &mut Tape<'_>, ex: &Example) -> Result<EncoderOutput> {
        let inputs = self.token_inputs(tape, ex)?;
        let dh = self.config.hidden_dim;
        let zero = tape.constant(vec![dh], vec![0.0; dh])?;
        let mut fwd = Vec::with_capacity(inputs.len());
        let mut h = zero;
        for &x in &inputs {
            h = gru_cell(tape, x, h, &self.enc_fwd)?;
            fwd.push(h);
        }
        let mut bwd = vec![zero; inputs.len()];
        let mut h = zero;
        for (t, &x) in inputs.iter().enumerate().rev() {
            h = gru_cell(tape, x, h, &self.enc_bwd)?;
            bwd[t] = h;
        }
        let states = fwd
            .iter()
            .zip(&bwd)
            .map(|(&f, &b)| tape.concat(&[f, b]))
            .collect::<Result<Vec<_>>>()?;
        let (matrix, keys) = self.attention_memory(tape, &states)?;
        let ends = tape.concat(&[*fwd.last().unwrap(), bwd[0]])?;
        let raw_context = tanh_proj(tape, self.bridge, ends)?;
        let context = match self.fuse {
            Some(w) => {
                let mut parts = vec![raw_context];
                parts.extend(self.embed_attributes(tape, ex)?);
                let joined = tape.concat(&parts)?;
                tanh_proj(tape, w, joined)?
            }
            None => raw_context,
        };
        Ok(EncoderOutput {
            states,
            matrix,
            keys,
            raw_context,
            context,
        })
    }

    /// Stacks encoder states into the attended matrix and projects its keys.
    pub fn attention_memory(&self, tape: &mut Tape<'_>, states: &[Var]) -> Result<(Var, Var)> {
        let matrix = tape.stack_rows(states)?;
        let keys = tape.matmul(matrix, self.att_key)?;
        Ok((matrix, keys))
    }

    /// Additive attention: `score_j = vᵀ tanh(W_q s + W_k h_j)`,
    /// `α = softmax(score)`, `a = Σ_j α_j h_j`. Returns `(a, α)`.
    pub fn attention_step(&self, tape: &mut Tape<'_>, state: Var, enc: &EncoderOutput) -> Result<(Var, Var)> {
        let q = tape.matvec(self.att_query, state)?;
        let e = tape.add_row(enc.keys, q)?;
        let e = tape.tanh(e);
        let scores = tape.matvec(e, self.att_score)?;
        let alpha = tape.softmax(scores)?;
        let context = tape.vecmat(alpha, enc.matrix)?;
        Ok((context, alpha))
    }

    /// Feeds `[E(y_prev); a_t]` to the decoder GRU and projects
    /// `[h′_t; a_t]` to vocabulary logits.
    pub fn decode_step(&self, tape: &mut Tape<'_>, y_prev: u32, state: Var, enc: &EncoderOutput) -> Result<DecodeStep> {
        let (context, attention) = self.attention_step(tape, state, enc)?;
        let emb = tape.row(self.embedding, y_prev as usize)?;
        let input = tape.concat(&[emb, context])?;
        let state = gru_cell(tape, input, state, &self.decoder)?;
        let out_in = tape.concat(&[state, context])?;
        let logits = tape.matvec(self.output, out_in)?;
        Ok(DecodeStep {
            logits,
            state,
            attention,
        })
    }

    /// Teacher-forced token-level mean cross-entropy over a batch.
    pub fn batch_loss(&self, tape: &mut Tape<'_>, batch: &[Example]) -> Result<Var> {
        if batch.is_empty() {
            return Err(contract("empty batch"));
        }
        let mut rows = Vec::new();
        let mut targets = Vec::new();
        for ex in batch {
            let enc = self.encode(tape, ex)?;
            let mut state = enc.context;
            let mut prev = BOS_ID;
            for &y in ex.target.iter().chain(core::iter::once(&EOS_ID)) {
                let step = self.decode_step(tape, prev, state, &enc)?;
                rows.push(step.logits);
                targets.push(y as usize);
                state = step.state;
                prev = y;
            }
        }
        let logits = tape.stack_rows(&rows)?;
        let padding = vec![false; targets.len()];
        tape.cross_entropy(logits, &targets, &padding)
    }
}

/// Greedy decoding output.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationResult {
    /// Generated token ids, without `</s>`.
    pub tokens: Vec<u32>,
    /// One attention row over the source per generated token (`T_y × T_x`).
    pub attention: Vec<Vec<f64>>,
    /// Log-probability of each generated token.
    pub log_probs: Vec<f64>,
}

/// Index of the largest value; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Greedy decoding from `<s>` until `</s>` or `config.max_len` tokens.
pub fn generate(config: &ModelConfig, params: &ParamSet, ex: &Example) -> Result<GenerationResult> {
    let mut tape = Tape::with_params(params);
    let net = Network::bind(&mut tape, config, params)?;
    let enc = net.encode(&mut tape, ex)?;
    let mut state = enc.context;
    let mut prev = BOS_ID;
    let mut out = GenerationResult {
        tokens: Vec::new(),
        attention: Vec::new(),
        log_probs: Vec::new(),
    };
    while out.tokens.len() < config.max_len {
        let step = net.decode_step(&mut tape, prev, state, &enc)?;
        let logits = tape.value(step.logits);
        let next = argmax(logits);
        if next as u32 == EOS_ID {
            break;
        }
        let probs = softmax_slice(logits);
        out.log_probs.push(libm::log(probs[next]));
        out.attention.push(tape.value(step.attention).to_vec());
        out.tokens.push(next as u32);
        state = step.state;
        prev = next as u32;
    }
    Ok(out)
}
