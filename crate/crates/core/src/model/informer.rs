use crate::data::{NormalizationParams, WindowSample};
use crate::nn::{linear, ForwardCtx, Leaves, ParamSet};
use crate::rng::seeded;
use crate::tensor::{Tensor, TensorError, TensorResult};

use super::attention::{attention_weights, causal_mask, probsparse_weights};
use super::config::{AttentionKind, ModelConfig};

const LN_EPS: f64 = 1e-5;

/// Fixed sinusoidal positional encoding, `len × d`.
pub fn positional_encoding(len: usize, d: usize) -> Vec<f64> {
    let mut pe = vec![0.0; len * d];
    for pos in 0..len {
        for i in 0..d {
            let rate = 10_000f64.powf((2 * (i / 2)) as f64 / d as f64);
            let angle = pos as f64 / rate;
            pe[pos * d + i] = if i % 2 == 0 { angle.sin() } else { angle.cos() };
        }
    }
    pe
}

fn push_attention(set: &mut ParamSet, prefix: &str, cfg: &ModelConfig, rng: &mut impl rand::Rng) {
    let (d, dh) = (cfg.d_model, cfg.head_dim());
    for h in 0..cfg.n_heads {
        for w in ["wq", "wk", "wv"] {
            set.push_uniform(format!("{prefix}.h{h}.{w}"), vec![d, dh], rng);
        }
    }
    set.push_uniform(format!("{prefix}.wo"), vec![cfg.n_heads * dh, d], rng);
    set.push_fill(format!("{prefix}.ln.g"), vec![d], 1.0);
    set.push_fill(format!("{prefix}.ln.b"), vec![d], 0.0);
}

fn push_feed_forward(set: &mut ParamSet, prefix: &str, cfg: &ModelConfig, rng: &mut impl rand::Rng) {
    let (d, f) = (cfg.d_model, cfg.d_ff);
    set.push_uniform(format!("{prefix}.w1"), vec![d, f], rng);
    set.push_fill(format!("{prefix}.b1"), vec![f], 0.0);
    set.push_uniform(format!("{prefix}.w2"), vec![f, d], rng);
    set.push_fill(format!("{prefix}.b2"), vec![d], 0.0);
    set.push_fill(format!("{prefix}.ln.g"), vec![d], 1.0);
    set.push_fill(format!("{prefix}.ln.b"), vec![d], 0.0);
}

/// Freshly initialised parameters for `cfg`.
///
/// Layout: `enc.embed.{w,b}`; per encoder layer `enc{l}.self.*` and
/// `enc{l}.ff.*`; `dec.embed.{w,b}`; per decoder layer `dec{l}.self.*`,
/// `dec{l}.cross.*`, `dec{l}.ff.*`; `head.{w,b}`. Attention blocks hold
/// `h{h}.{wq,wk,wv}`, `wo` and `ln.{g,b}`; feed-forward blocks hold
/// `w1, b1, w2, b2` and `ln.{g,b}`.
pub fn init_params(cfg: &ModelConfig, seed: u64) -> ParamSet {
    let mut rng = seeded(seed);
    let mut set = ParamSet::new();
    let d = cfg.d_model;
    set.push_uniform("enc.embed.w", vec![cfg.n_features, d], &mut rng);
    set.push_fill("enc.embed.b", vec![d], 0.0);
    for l in 0..cfg.n_encoder_layers {
        push_attention(&mut set, &format!("enc{l}.self"), cfg, &mut rng);
        push_feed_forward(&mut set, &format!("enc{l}.ff"), cfg, &mut rng);
    }
    set.push_uniform("dec.embed.w", vec![1, d], &mut rng);
    set.push_fill("dec.embed.b", vec![d], 0.0);
    for l in 0..cfg.n_decoder_layers {
        push_attention(&mut set, &format!("dec{l}.self"), cfg, &mut rng);
        push_attention(&mut set, &format!("dec{l}.cross"), cfg, &mut rng);
        push_feed_forward(&mut set, &format!("dec{l}.ff"), cfg, &mut rng);
    }
    set.push_uniform("head.w", vec![d, 1], &mut rng);
    set.push_fill("head.b", vec![1], 0.0);
    set
}

/// Token projection plus positional encoding, then dropout. `prefix` is
/// `enc.embed` or `dec.embed`.
pub fn embed(
    p: &Leaves,
    prefix: &str,
    tokens: &Tensor,
    cfg: &ModelConfig,
    ctx: &mut ForwardCtx,
) -> TensorResult<Tensor> {
    let w = p.get(&format!("{prefix}.w"))?;
    let (t, f) = tokens.dims2("embed")?;
    if f != w.shape()[0] {
        return Err(TensorError::Shape {
            op: "embed",
            detail: format!("{f} features for a projection expecting {}", w.shape()[0]),
        });
    }
    let pe = Tensor::constant(vec![t, cfg.d_model], positional_encoding(t, cfg.d_model))?;
    let x = linear(tokens, w, p.get(&format!("{prefix}.b"))?)?.add(&pe)?;
    let seed = ctx.next_seed();
    x.dropout(cfg.dropout, seed, ctx.training())
}

fn residual_norm(
    p: &Leaves,
    prefix: &str,
    x: &Tensor,
    sub: Tensor,
    cfg: &ModelConfig,
    ctx: &mut ForwardCtx,
) -> TensorResult<Tensor> {
    let seed = ctx.next_seed();
    let sub = sub.dropout(cfg.dropout, seed, ctx.training())?;
    x.add(&sub)?.layer_norm(p.get(&format!("{prefix}.ln.g"))?, p.get(&format!("{prefix}.ln.b"))?, LN_EPS)
}

/// Multi-head attention sub-layer with residual connection and layer norm.
/// `causal` masks key `j > i` for query `i` (self-attention only).
#[allow(clippy::too_many_arguments)]
pub fn multi_head_attention(
    p: &Leaves,
    prefix: &str,
    x_q: &Tensor,
    x_kv: &Tensor,
    cfg: &ModelConfig,
    kind: AttentionKind,
    causal: bool,
    ctx: &mut ForwardCtx,
) -> TensorResult<Tensor> {
    let (l_q, _) = x_q.dims2("multi_head_attention")?;
    let (l_k, _) = x_kv.dims2("multi_head_attention")?;
    let mask = causal.then(|| causal_mask(l_q, l_k));
    let mut heads = Vec::with_capacity(cfg.n_heads);
    for h in 0..cfg.n_heads {
        let q = x_q.matmul(p.get(&format!("{prefix}.h{h}.wq"))?)?;
        let k = x_kv.matmul(p.get(&format!("{prefix}.h{h}.wk"))?)?;
        let v = x_kv.matmul(p.get(&format!("{prefix}.h{h}.wv"))?)?;
        let out = match kind {
            AttentionKind::Full => {
                let (out, w) = attention_weights(&q, &k, &v, mask.as_deref())?;
                ctx.record(prefix, h, causal, || (0..l_q).map(|i| w.row(i).to_vec()).collect());
                out
            }
            AttentionKind::ProbSparse => {
                let seed = ctx.next_seed();
                let (out, w) = probsparse_weights(&q, &k, &v, cfg.factor, seed, causal)?;
                ctx.record(prefix, h, causal, || w);
                out
            }
        };
        heads.push(out);
    }
    let merged = Tensor::cat(&heads, 1)?.matmul(p.get(&format!("{prefix}.wo"))?)?;
    residual_norm(p, prefix, x_q, merged, cfg, ctx)
}

/// Position-wise `ReLU(x·W₁ + b₁)·W₂ + b₂` with residual connection and
/// layer norm.
pub fn feed_forward(
    p: &Leaves,
    prefix: &str,
    x: &Tensor,
    cfg: &ModelConfig,
    ctx: &mut ForwardCtx,
) -> TensorResult<Tensor> {
    let g = |n: &str| p.get(&format!("{prefix}.{n}"));
    let hidden = linear(x, g("w1")?, g("b1")?)?.relu()?;
    let sub = linear(&hidden, g("w2")?, g("b2")?)?;
    residual_norm(p, prefix, x, sub, cfg, ctx)
}

/// Halve the time axis by stride-2 max pooling.
pub fn distill(x: &Tensor) -> TensorResult<Tensor> {
    x.max_pool_1d()
}

/// Encoder stack over a `T_x × F` input, returning `E_t`.
pub fn encode(p: &Leaves, input: &Tensor, cfg: &ModelConfig, ctx: &mut ForwardCtx) -> TensorResult<Tensor> {
    let mut x = embed(p, "enc.embed", input, cfg, ctx)?;
    for l in 0..cfg.n_encoder_layers {
        x = multi_head_attention(p, &format!("enc{l}.self"), &x, &x, cfg, cfg.attention_kind, false, ctx)?;
        x = feed_forward(p, &format!("enc{l}.ff"), &x, cfg, ctx)?;
        if cfg.distilling {
            x = distill(&x)?;
        }
    }
    Ok(x)
}

/// Decoder input: the known values followed by `t_y` zero placeholders.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderInput {
    pub values: Vec<f64>,
    /// `true` at known positions, `false` at placeholders.
    pub known: Vec<bool>,
}

impl DecoderInput {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn tensor(&self) -> TensorResult<Tensor> {
        Tensor::constant(vec![self.values.len(), 1], self.values.clone())
    }
}

pub fn build_decoder_input(known: &[f64], t_y: usize) -> DecoderInput {
    let mut values = known.to_vec();
    values.resize(known.len() + t_y, 0.0);
    let mut mask = vec![true; known.len()];
    mask.resize(known.len() + t_y, false);
    DecoderInput { values, known: mask }
}

/// Decoder stack and output head; returns the `T_y` forecast (normalised).
pub fn decode(
    p: &Leaves,
    enc: &Tensor,
    dec: &DecoderInput,
    cfg: &ModelConfig,
    ctx: &mut ForwardCtx,
) -> TensorResult<Tensor> {
    let n = dec.len();
    decode_positions(p, enc, dec, cfg, ctx)?.slice_rows(n - cfg.t_y, n)?.reshape(vec![cfg.t_y])
}

/// Head output at every decoder position, `(T_label + T_y) × 1`.
pub fn decode_positions(
    p: &Leaves,
    enc: &Tensor,
    dec: &DecoderInput,
    cfg: &ModelConfig,
    ctx: &mut ForwardCtx,
) -> TensorResult<Tensor> {
    if dec.len() < cfg.t_y {
        return Err(TensorError::Shape {
            op: "decode",
            detail: format!("decoder input of length {} for horizon {}", dec.len(), cfg.t_y),
        });
    }
    let mut x = embed(p, "dec.embed", &dec.tensor()?, cfg, ctx)?;
    for l in 0..cfg.n_decoder_layers {
        x = multi_head_attention(p, &format!("dec{l}.self"), &x, &x, cfg, cfg.attention_kind, true, ctx)?;
        x = multi_head_attention(p, &format!("dec{l}.cross"), &x, enc, cfg, AttentionKind::Full, false, ctx)?;
        x = feed_forward(p, &format!("dec{l}.ff"), &x, cfg, ctx)?;
    }
    linear(&x, p.get("head.w")?, p.get("head.b")?)
}

fn matrix(rows: &[[f64; crate::data::N_FEATURES]]) -> TensorResult<Tensor> {
    let data: Vec<f64> = rows.iter().flatten().copied().collect();
    Tensor::constant(vec![rows.len(), crate::data::N_FEATURES], data)
}

/// Full forward pass on a normalised sample.
pub fn forward_graph(
    p: &Leaves,
    sample: &WindowSample,
    cfg: &ModelConfig,
    ctx: &mut ForwardCtx,
) -> TensorResult<Tensor> {
    if !sample.is_normalized() {
        return Err(TensorError::Invalid { op: "forward", detail: "sample is not normalised".into() });
    }
    if sample.encoder_input.len() != cfg.t_x
        || sample.target.len() != cfg.t_y
        || sample.decoder_known.len() != cfg.t_label
    {
        return Err(TensorError::Shape {
            op: "forward",
            detail: format!(
                "sample has T_x={}, T_label={}, T_y={}; model expects {}, {}, {}",
                sample.encoder_input.len(),
                sample.decoder_known.len(),
                sample.target.len(),
                cfg.t_x,
                cfg.t_label,
                cfg.t_y
            ),
        });
    }
    let enc = encode(p, &matrix(&sample.encoder_input)?, cfg, ctx)?;
    decode(p, &enc, &build_decoder_input(&sample.decoder_known, cfg.t_y), cfg, ctx)
}

/// A forecast in normalised and in price units.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub normalized: Vec<f64>,
    pub prices: Vec<f64>,
}

impl Prediction {
    pub fn new(normalized: Vec<f64>, norm: &NormalizationParams) -> Self {
        let prices = normalized.iter().map(|&z| norm.inverse_target(z)).collect();
        Self { normalized, prices }
    }
}
