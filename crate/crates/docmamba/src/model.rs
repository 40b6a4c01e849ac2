//! The document encoder: token + 2-D position embeddings, a stack of
//! bidirectional Mamba blocks, and the MLM / BIO-tagging heads.
//!
//! There is no learned 1-D position table anywhere in the model — sequence
//! order enters only through the scans — so any input length is valid at
//! inference regardless of the lengths seen in training.

use rand_distr::{Distribution, Normal};

use crate::block::{
    bimamba_block, bimamba_block_backward, bimamba_block_cached, normalize, normalize_backward,
    BlockCache, BlockConfig, BlockParams, NormKind,
};
use crate::real::Real;
use crate::rng;
use crate::ssm::{xavier_uniform, SsmDims};
use crate::tensor::{matvec_backward_input, matvec_backward_weight, Tensor};
use crate::{Error, Result};

/// Label value meaning "no loss at this position".
pub const IGNORE_LABEL: u32 = u32::MAX;

/// Model hyperparameters. Defaults give the full-size encoder; tests and the
/// desk-scale training runs shrink `hidden`/`layers`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub hidden: usize,
    pub layers: usize,
    pub d_inner: usize,
    pub n_state: usize,
    pub vocab_size: usize,
    pub coord_bins: usize,
    pub num_coord_types: usize,
    pub dropout_rate: f64,
    pub conv_width: usize,
    pub norm: NormKind,
    pub num_entity_types: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden: 768,
            layers: 24,
            d_inner: 1536,
            n_state: 16,
            vocab_size: crate::tokenizer::BYTE_VOCAB_SIZE,
            coord_bins: 1001,
            num_coord_types: 8,
            dropout_rate: 0.1,
            conv_width: 4,
            norm: NormKind::Rms,
            num_entity_types: 4,
        }
    }
}

impl ModelConfig {
    /// A small configuration for tests and desk-scale training.
    pub fn tiny() -> Self {
        ModelConfig {
            hidden: 32,
            layers: 2,
            d_inner: 64,
            n_state: 8,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.hidden.is_multiple_of(8) {
            return Err(Error::contract(format!(
                "hidden={} must be divisible by 8 for the 2-D embedding concat",
                self.hidden
            )));
        }
        if self.num_coord_types != 8 {
            return Err(Error::contract("num_coord_types must be 8 (quad vertices)"));
        }
        if self.hidden == 0 || self.layers == 0 || self.d_inner == 0 || self.vocab_size == 0 {
            return Err(Error::contract("model dimensions must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::contract("dropout_rate must be in [0, 1)"));
        }
        Ok(())
    }

    /// Width of one coordinate sub-embedding.
    pub fn sub_width(&self) -> usize {
        self.hidden / 8
    }

    /// BIO tag count: B-/I- per entity type plus O.
    pub fn num_tags(&self) -> usize {
        2 * self.num_entity_types + 1
    }

    pub fn ssm_dims(&self) -> SsmDims {
        SsmDims {
            d_inner: self.d_inner,
            n_state: self.n_state,
            dt_rank: self.d_inner.div_ceil(16),
        }
    }

    pub fn block_config(&self) -> BlockConfig {
        BlockConfig {
            hidden: self.hidden,
            conv_width: self.conv_width,
            norm: self.norm,
            ssm: self.ssm_dims(),
        }
    }
}

/// One encoder input token: vocabulary id plus its quad, already normalized
/// to the [0, 1000] page grid, clockwise from the upper-left vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenRecord {
    pub token_id: u32,
    pub poly: [u16; 8],
    pub segment_id: u32,
}

impl TokenRecord {
    pub fn new(token_id: u32, poly: [u16; 8], segment_id: u32) -> Self {
        TokenRecord {
            token_id,
            poly,
            segment_id,
        }
    }

    /// The classification token: all-zero coordinates.
    pub fn cls(cls_id: u32) -> Self {
        TokenRecord {
            token_id: cls_id,
            poly: [0; 8],
            segment_id: 0,
        }
    }
}

/// Scales a page-unit quad onto the [0, 1000] grid: x by 1000/page_w, y by
/// 1000/page_h, rounded half-up and clamped.
pub fn normalize_box(quad: &[f64; 8], page_w: f64, page_h: f64) -> Result<[u16; 8]> {
    if !page_w.is_finite() || !page_h.is_finite() || page_w <= 0.0 || page_h <= 0.0 {
        return Err(Error::domain(format!(
            "page dimensions must be positive and finite, got {page_w}x{page_h}"
        )));
    }
    let mut out = [0u16; 8];
    for (i, v) in quad.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::domain(format!("quad coordinate {i} is not finite")));
        }
        let scale = if i % 2 == 0 { 1000.0 / page_w } else { 1000.0 / page_h };
        out[i] = (v * scale).round().clamp(0.0, 1000.0) as u16;
    }
    Ok(out)
}

/// All model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    /// (vocab, hidden); also the tied MLM classifier weight.
    pub word_table: Tensor<T>,
    /// (coord_bins, hidden/8); one table shared by X and Y lookups.
    pub coord_value_table: Tensor<T>,
    /// (8, hidden/8).
    pub coord_type_table: Tensor<T>,
    pub blocks: Vec<BlockParams<T>>,
    /// (hidden); closes the pre-norm residual stack.
    pub final_norm_weight: Tensor<T>,
    /// (vocab).
    pub mlm_bias: Tensor<T>,
    /// (num_tags, hidden).
    pub tag_head_w: Tensor<T>,
    /// (num_tags).
    pub tag_head_b: Tensor<T>,
}

impl<T: Real> ModelParams<T> {
    pub fn zeros(cfg: &ModelConfig) -> Self {
        let sub = cfg.sub_width();
        let bc = cfg.block_config();
        ModelParams {
            word_table: Tensor::zeros(&[cfg.vocab_size, cfg.hidden]),
            coord_value_table: Tensor::zeros(&[cfg.coord_bins, sub]),
            coord_type_table: Tensor::zeros(&[8, sub]),
            blocks: (0..cfg.layers).map(|_| BlockParams::zeros(&bc)).collect(),
            final_norm_weight: Tensor::zeros(&[cfg.hidden]),
            mlm_bias: Tensor::zeros(&[cfg.vocab_size]),
            tag_head_w: Tensor::zeros(&[cfg.num_tags(), cfg.hidden]),
            tag_head_b: Tensor::zeros(&[cfg.num_tags()]),
        }
    }

    /// Embedding tables ~ N(0, 0.02), Xavier projections, zero head biases.
    pub fn init(cfg: &ModelConfig, seed: u64) -> Self {
        let mut r = rng::seeded(seed, rng::stream::PARAM_INIT);
        let normal = Normal::new(0.0f64, 0.02).expect("valid stddev");
        let mut p = Self::zeros(cfg);
        for t in [
            &mut p.word_table,
            &mut p.coord_value_table,
            &mut p.coord_type_table,
        ] {
            for v in t.data.iter_mut() {
                *v = T::of(normal.sample(&mut r));
            }
        }
        let bc = cfg.block_config();
        for b in p.blocks.iter_mut() {
            *b = BlockParams::init(&bc, &mut r);
        }
        p.final_norm_weight.fill(T::one());
        xavier_uniform(&mut p.tag_head_w, &mut r);
        p
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn tensors(&self) -> Vec<(String, &Tensor<T>)> {
        let mut out: Vec<(String, &Tensor<T>)> = vec![
            ("word_table".into(), &self.word_table),
            ("coord_value_table".into(), &self.coord_value_table),
            ("coord_type_table".into(), &self.coord_type_table),
        ];
        for (i, b) in self.blocks.iter().enumerate() {
            for (name, t) in b.tensors() {
                out.push((format!("blocks.{i}.{name}"), t));
            }
        }
        out.push(("final_norm_weight".into(), &self.final_norm_weight));
        out.push(("mlm_bias".into(), &self.mlm_bias));
        out.push(("tag_head_w".into(), &self.tag_head_w));
        out.push(("tag_head_b".into(), &self.tag_head_b));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor<T>)> {
        let mut out: Vec<(String, &mut Tensor<T>)> = vec![
            ("word_table".into(), &mut self.word_table),
            ("coord_value_table".into(), &mut self.coord_value_table),
            ("coord_type_table".into(), &mut self.coord_type_table),
        ];
        for (i, b) in self.blocks.iter_mut().enumerate() {
            for (name, t) in b.tensors_mut() {
                out.push((format!("blocks.{i}.{name}"), t));
            }
        }
        out.push(("final_norm_weight".into(), &mut self.final_norm_weight));
        out.push(("mlm_bias".into(), &mut self.mlm_bias));
        out.push(("tag_head_w".into(), &mut self.tag_head_w));
        out.push(("tag_head_b".into(), &mut self.tag_head_b));
        out
    }

    pub fn scale(&mut self, factor: T) {
        for (_, t) in self.tensors_mut() {
            for v in t.data.iter_mut() {
                *v *= factor;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.all_finite())
    }
}

/// 2-D position embedding: for each of the 8 coordinates, shared value-table
/// row + type-table row, concatenated to the full hidden width.
pub fn embed_2d_position<T: Real>(
    poly: &[u16; 8],
    params: &ModelParams<T>,
    cfg: &ModelConfig,
    out: &mut [T],
) -> Result<()> {
    let sub = cfg.sub_width();
    for (k, &coord) in poly.iter().enumerate() {
        if coord as usize >= cfg.coord_bins {
            return Err(Error::contract(format!(
                "coordinate {coord} out of range for {} bins",
                cfg.coord_bins
            )));
        }
        let val_row = params.coord_value_table.row(coord as usize);
        let type_row = params.coord_type_table.row(k);
        let dst = &mut out[k * sub..(k + 1) * sub];
        for i in 0..sub {
            dst[i] = val_row[i] + type_row[i];
        }
    }
    Ok(())
}

/// Word embedding plus 2-D position embedding. No 1-D position term.
pub fn embed_token<T: Real>(
    rec: &TokenRecord,
    params: &ModelParams<T>,
    cfg: &ModelConfig,
    out: &mut [T],
) -> Result<()> {
    if rec.token_id as usize >= cfg.vocab_size {
        return Err(Error::contract(format!(
            "token_id {} out of range for vocab {}",
            rec.token_id, cfg.vocab_size
        )));
    }
    embed_2d_position(&rec.poly, params, cfg, out)?;
    let word = params.word_table.row(rec.token_id as usize);
    for (o, w) in out.iter_mut().zip(word) {
        *o += *w;
    }
    Ok(())
}

/// Embeds a whole sequence, (L, hidden) row-major.
pub fn embed_sequence<T: Real>(
    records: &[TokenRecord],
    params: &ModelParams<T>,
    cfg: &ModelConfig,
) -> Result<Vec<T>> {
    let h = cfg.hidden;
    let mut out = vec![T::zero(); records.len() * h];
    for (t, rec) in records.iter().enumerate() {
        embed_token(rec, params, cfg, &mut out[t * h..(t + 1) * h])?;
    }
    Ok(out)
}

fn final_normalize<T: Real>(states: &mut [T], weight: &[T], cfg: &ModelConfig) {
    let h = cfg.hidden;
    let mut buf = vec![T::zero(); h];
    for chunk in states.chunks_mut(h) {
        normalize(cfg.norm, chunk, weight, &mut buf);
        chunk.copy_from_slice(&buf);
    }
}

/// Runs the full encoder: embeddings, `layers` blocks, final normalization.
pub fn encode<T: Real>(
    records: &[TokenRecord],
    params: &ModelParams<T>,
    cfg: &ModelConfig,
) -> Result<Vec<T>> {
    if records.is_empty() {
        return Err(Error::contract("encode requires a non-empty sequence"));
    }
    let mut states = embed_sequence(records, params, cfg)?;
    let bc = cfg.block_config();
    for block in &params.blocks {
        states = bimamba_block(&states, block, &bc)?;
    }
    final_normalize(&mut states, &params.final_norm_weight.data, cfg);
    Ok(states)
}

/// Forward activations for [`encode_backward`].
pub struct EncodeCache<T> {
    pub embeddings: Vec<T>,
    block_caches: Vec<BlockCache<T>>,
    /// Input to the final norm (output of the last block).
    pre_final: Vec<T>,
}

pub fn encode_cached<T: Real>(
    records: &[TokenRecord],
    params: &ModelParams<T>,
    cfg: &ModelConfig,
) -> Result<(Vec<T>, EncodeCache<T>)> {
    if records.is_empty() {
        return Err(Error::contract("encode requires a non-empty sequence"));
    }
    let embeddings = embed_sequence(records, params, cfg)?;
    let bc = cfg.block_config();
    let mut states = embeddings.clone();
    let mut block_caches = Vec::with_capacity(params.blocks.len());
    for block in &params.blocks {
        let (next, cache) = bimamba_block_cached(&states, block, &bc)?;
        block_caches.push(cache);
        states = next;
    }
    let pre_final = states.clone();
    final_normalize(&mut states, &params.final_norm_weight.data, cfg);
    Ok((
        states,
        EncodeCache {
            embeddings,
            block_caches,
            pre_final,
        },
    ))
}

/// Adjoint of [`encode_cached`]: walks the stack in reverse and scatters the
/// embedding gradients into the tables.
pub fn encode_backward<T: Real>(
    records: &[TokenRecord],
    cache: &EncodeCache<T>,
    params: &ModelParams<T>,
    cfg: &ModelConfig,
    grad_states: &[T],
    grads: &mut ModelParams<T>,
) -> Result<()> {
    let h = cfg.hidden;
    let len = records.len();
    if grad_states.len() != len * h {
        return Err(Error::contract("encode_backward gradient shape mismatch"));
    }

    // final norm backward, token by token
    let mut grad = vec![T::zero(); len * h];
    for t in 0..len {
        normalize_backward(
            cfg.norm,
            &cache.pre_final[t * h..(t + 1) * h],
            &params.final_norm_weight.data,
            &grad_states[t * h..(t + 1) * h],
            &mut grad[t * h..(t + 1) * h],
            &mut grads.final_norm_weight.data,
        );
    }

    let bc = cfg.block_config();
    for (i, block) in params.blocks.iter().enumerate().rev() {
        grad =
            bimamba_block_backward(&cache.block_caches[i], block, &bc, &grad, &mut grads.blocks[i])?;
    }

    // scatter into embedding tables
    let sub = cfg.sub_width();
    for (t, rec) in records.iter().enumerate() {
        let g = &grad[t * h..(t + 1) * h];
        let wrow = grads.word_table.row_mut(rec.token_id as usize);
        for (w, gv) in wrow.iter_mut().zip(g) {
            *w += *gv;
        }
        for k in 0..8 {
            let gk = &g[k * sub..(k + 1) * sub];
            let vrow = grads.coord_value_table.row_mut(rec.poly[k] as usize);
            for (v, gv) in vrow.iter_mut().zip(gk) {
                *v += *gv;
            }
            let trow = grads.coord_type_table.row_mut(k);
            for (v, gv) in trow.iter_mut().zip(gk) {
                *v += *gv;
            }
        }
    }
    Ok(())
}

/// Vocabulary logits for every position: tied word table plus bias.
pub fn mlm_logits<T: Real>(hidden: &[T], params: &ModelParams<T>, cfg: &ModelConfig) -> Vec<T> {
    let h = cfg.hidden;
    let v = cfg.vocab_size;
    let len = hidden.len() / h;
    let mut out = vec![T::zero(); len * v];
    for t in 0..len {
        let ht = &hidden[t * h..(t + 1) * h];
        let dst = &mut out[t * v..(t + 1) * v];
        for (i, o) in dst.iter_mut().enumerate() {
            let row = params.word_table.row(i);
            let mut acc = params.mlm_bias.data[i];
            for (a, b) in row.iter().zip(ht) {
                acc += *a * *b;
            }
            *o = acc;
        }
    }
    out
}

/// Softmax cross-entropy for one position; returns the loss and writes
/// `softmax − onehot(target)` into `grad_logits`.
pub fn cross_entropy<T: Real>(logits: &[T], target: usize, grad_logits: &mut [T]) -> T {
    let max = logits.iter().fold(T::neg_infinity(), |m, v| m.max(*v));
    let mut sum = T::zero();
    for (g, z) in grad_logits.iter_mut().zip(logits) {
        let e = (*z - max).exp();
        *g = e;
        sum += e;
    }
    let lse = sum.ln() + max;
    for g in grad_logits.iter_mut() {
        *g /= sum;
    }
    grad_logits[target] -= T::one();
    lse - logits[target]
}

/// Forward-only masked-LM loss: summed cross-entropy over labeled positions.
/// Returns (loss_sum, labeled_count); an empty mask reports (0, 0).
pub fn mlm_loss<T: Real>(
    records: &[TokenRecord],
    labels: &[u32],
    params: &ModelParams<T>,
    cfg: &ModelConfig,
) -> Result<(f64, usize)> {
    if labels.len() != records.len() {
        return Err(Error::contract("labels length must match sequence length"));
    }
    let hidden = encode(records, params, cfg)?;
    let h = cfg.hidden;
    let v = cfg.vocab_size;
    let mut logits = vec![T::zero(); v];
    let mut scratch = vec![T::zero(); v];
    let mut loss_sum = 0.0;
    let mut count = 0usize;
    for (t, &label) in labels.iter().enumerate() {
        if label == IGNORE_LABEL {
            continue;
        }
        let ht = &hidden[t * h..(t + 1) * h];
        for (i, o) in logits.iter_mut().enumerate() {
            let row = params.word_table.row(i);
            let mut acc = params.mlm_bias.data[i];
            for (a, b) in row.iter().zip(ht) {
                acc += *a * *b;
            }
            *o = acc;
        }
        loss_sum += cross_entropy(&logits, label as usize, &mut scratch).f64();
        count += 1;
    }
    Ok((loss_sum, count))
}

/// One training sequence of masked-LM: accumulates parameter gradients of the
/// summed cross-entropy into `grads` and returns (loss_sum, labeled_count).
pub fn mlm_step<T: Real>(
    records: &[TokenRecord],
    labels: &[u32],
    params: &ModelParams<T>,
    cfg: &ModelConfig,
    grads: &mut ModelParams<T>,
) -> Result<(f64, usize)> {
    if labels.len() != records.len() {
        return Err(Error::contract("labels length must match sequence length"));
    }
    let (hidden, cache) = encode_cached(records, params, cfg)?;
    let h = cfg.hidden;
    let v = cfg.vocab_size;
    let mut grad_hidden = vec![T::zero(); hidden.len()];
    let mut logits = vec![T::zero(); v];
    let mut dlogits = vec![T::zero(); v];
    let mut loss_sum = 0.0;
    let mut count = 0usize;
    for (t, &label) in labels.iter().enumerate() {
        if label == IGNORE_LABEL {
            continue;
        }
        let ht = &hidden[t * h..(t + 1) * h];
        for (i, o) in logits.iter_mut().enumerate() {
            let row = params.word_table.row(i);
            let mut acc = params.mlm_bias.data[i];
            for (a, b) in row.iter().zip(ht) {
                acc += *a * *b;
            }
            *o = acc;
        }
        loss_sum += cross_entropy(&logits, label as usize, &mut dlogits).f64();
        count += 1;

        // logits = word_table · h + bias (tied weights)
        for (gb, dz) in grads.mlm_bias.data.iter_mut().zip(&dlogits) {
            *gb += *dz;
        }
        let gh = &mut grad_hidden[t * h..(t + 1) * h];
        matvec_backward_input(&params.word_table, &dlogits, gh);
        matvec_backward_weight(&mut grads.word_table, &dlogits, ht);
    }
    if count > 0 {
        encode_backward(records, &cache, params, cfg, &grad_hidden, grads)?;
    }
    Ok((loss_sum, count))
}

/// Inference-time tag logits: linear head over the encoder output, dropout
/// disabled.
pub fn tag_logits<T: Real>(hidden: &[T], params: &ModelParams<T>, cfg: &ModelConfig) -> Vec<T> {
    let h = cfg.hidden;
    let k = cfg.num_tags();
    let len = hidden.len() / h;
    let mut out = vec![T::zero(); len * k];
    for t in 0..len {
        let ht = &hidden[t * h..(t + 1) * h];
        let dst = &mut out[t * k..(t + 1) * k];
        for (i, o) in dst.iter_mut().enumerate() {
            let row = params.tag_head_w.row(i);
            let mut acc = params.tag_head_b.data[i];
            for (a, b) in row.iter().zip(ht) {
                acc += *a * *b;
            }
            *o = acc;
        }
    }
    out
}

/// Samples an inverted-dropout mask: kept units scale by 1/(1−p).
pub fn dropout_mask<T: Real>(n: usize, rate: f64, rng: &mut impl rand::Rng) -> Vec<T> {
    if rate == 0.0 {
        return vec![T::one(); n];
    }
    let keep = T::of(1.0 / (1.0 - rate));
    (0..n)
        .map(|_| {
            if rng.gen::<f64>() < rate {
                T::zero()
            } else {
                keep
            }
        })
        .collect()
}

/// One training sequence of BIO tagging: dropout on the encoder output, then
/// the linear head and summed cross-entropy over labeled positions.
/// `dropout` carries the per-call random stream; `None` disables dropout.
pub fn tag_step<T: Real>(
    records: &[TokenRecord],
    labels: &[u32],
    params: &ModelParams<T>,
    cfg: &ModelConfig,
    dropout: Option<&mut rand_chacha::ChaCha8Rng>,
    grads: &mut ModelParams<T>,
    freeze_backbone: bool,
) -> Result<(f64, usize)> {
    if labels.len() != records.len() {
        return Err(Error::contract("labels length must match sequence length"));
    }
    let (hidden, cache) = encode_cached(records, params, cfg)?;
    let h = cfg.hidden;
    let k = cfg.num_tags();
    let len = records.len();

    let mask: Option<Vec<T>> = dropout.map(|rng| dropout_mask(len * h, cfg.dropout_rate, rng));
    let dropped: Vec<T> = match &mask {
        Some(m) => hidden.iter().zip(m).map(|(v, mv)| *v * *mv).collect(),
        None => hidden.clone(),
    };

    let mut grad_hidden = vec![T::zero(); len * h];
    let mut logits = vec![T::zero(); k];
    let mut dlogits = vec![T::zero(); k];
    let mut loss_sum = 0.0;
    let mut count = 0usize;
    for (t, &label) in labels.iter().enumerate() {
        if label == IGNORE_LABEL {
            continue;
        }
        let ht = &dropped[t * h..(t + 1) * h];
        for (i, o) in logits.iter_mut().enumerate() {
            let row = params.tag_head_w.row(i);
            let mut acc = params.tag_head_b.data[i];
            for (a, b) in row.iter().zip(ht) {
                acc += *a * *b;
            }
            *o = acc;
        }
        loss_sum += cross_entropy(&logits, label as usize, &mut dlogits).f64();
        count += 1;

        for (gb, dz) in grads.tag_head_b.data.iter_mut().zip(&dlogits) {
            *gb += *dz;
        }
        let gh = &mut grad_hidden[t * h..(t + 1) * h];
        matvec_backward_input(&params.tag_head_w, &dlogits, gh);
        matvec_backward_weight(&mut grads.tag_head_w, &dlogits, ht);
    }

    if count > 0 && !freeze_backbone {
        if let Some(m) = &mask {
            for (g, mv) in grad_hidden.iter_mut().zip(m) {
                *g *= *mv;
            }
        }
        encode_backward(records, &cache, params, cfg, &grad_hidden, grads)?;
    }
    Ok((loss_sum, count))
}

/// Greedy tag prediction (argmax per position), dropout disabled.
pub fn predict_tags<T: Real>(
    records: &[TokenRecord],
    params: &ModelParams<T>,
    cfg: &ModelConfig,
) -> Result<Vec<u32>> {
    let hidden = encode(records, params, cfg)?;
    let k = cfg.num_tags();
    let logits = tag_logits(&hidden, params, cfg);
    Ok((0..records.len())
        .map(|t| {
            let row = &logits[t * k..(t + 1) * k];
            let mut best = 0usize;
            for i in 1..k {
                if row[i] > row[best] {
                    best = i;
                }
            }
            best as u32
        })
        .collect())
}
