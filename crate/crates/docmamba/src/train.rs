//! Optimization: Adam with linear warmup/decay, the MLM pre-training loop,
//! BIO fine-tuning, and the finite-difference gradient-check harness.
//!
//! Everything is single-writer and sequential with fixed reduction order, so
//! one seed reproduces bit-identical parameters.

use std::time::Instant;

use crate::data::batch::{bucket_batches, BucketStats};
use crate::data::mask::{mask_sequence, MaskingPolicy};
use crate::data::prep::{document_to_sequences, ScanStrategy, Sequence};
use crate::data::Document;
use crate::metrics::{F1Accumulator, TagSet};
use crate::model::{mlm_step, predict_tags, tag_step, ModelConfig, ModelParams, IGNORE_LABEL};
use crate::real::Real;
use crate::rng;
use crate::tokenizer::ByteTokenizer;
use crate::{Error, Result};

/// Optimizer and schedule settings.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub lr: f64,
    pub warmup_fraction: f64,
    pub total_steps: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub weight_decay: f64,
    pub grad_clip_norm: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 5e-5,
            warmup_fraction: 0.1,
            total_steps: 1000,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            weight_decay: 0.01,
            grad_clip_norm: None,
            seed: 0,
        }
    }
}

/// Piecewise-linear multiplier: 0 → 1 over the warmup steps, then 1 → 0.
/// Exactly 1.0 at the warmup boundary, exactly 0.0 at `total_steps`.
pub fn lr_multiplier(step: usize, total_steps: usize, warmup_fraction: f64) -> f64 {
    let warmup = ((total_steps as f64 * warmup_fraction).round() as usize).max(1);
    if step <= warmup {
        step as f64 / warmup as f64
    } else if step >= total_steps {
        0.0
    } else {
        (total_steps - step) as f64 / (total_steps - warmup) as f64
    }
}

/// First-/second-moment state, one slot per parameter tensor.
pub struct AdamState<T> {
    m: ModelParams<T>,
    v: ModelParams<T>,
    /// Steps whose gradients were rejected as non-finite.
    pub rejected_steps: usize,
}

impl<T: Real> AdamState<T> {
    pub fn new(cfg: &ModelConfig) -> Self {
        AdamState {
            m: ModelParams::zeros(cfg),
            v: ModelParams::zeros(cfg),
            rejected_steps: 0,
        }
    }
}

fn decayed(name: &str) -> bool {
    // weight decay excludes norms and biases
    !(name.contains("norm") || name.contains("bias") || name.ends_with("_b"))
}

/// One Adam update with bias correction and the warmup/decay multiplier.
/// Non-finite gradients reject the whole step (counter incremented).
/// Returns whether the update was applied.
pub fn adam_step<T: Real>(
    params: &mut ModelParams<T>,
    grads: &ModelParams<T>,
    state: &mut AdamState<T>,
    cfg: &TrainConfig,
    step: usize,
) -> Result<bool> {
    if step == 0 {
        return Err(Error::contract("adam_step counts steps from 1"));
    }
    if !grads.all_finite() {
        state.rejected_steps += 1;
        return Ok(false);
    }
    let lr_t = T::of(cfg.lr * lr_multiplier(step, cfg.total_steps, cfg.warmup_fraction));
    let b1 = T::of(cfg.adam_beta1);
    let b2 = T::of(cfg.adam_beta2);
    let eps = T::of(cfg.adam_eps);
    let bc1 = T::one() - T::of(cfg.adam_beta1.powi(step as i32));
    let bc2 = T::one() - T::of(cfg.adam_beta2.powi(step as i32));
    let wd = T::of(cfg.weight_decay);

    let mut p_t = params.tensors_mut();
    let g_t = grads.tensors();
    let mut m_t = state.m.tensors_mut();
    let mut v_t = state.v.tensors_mut();
    for i in 0..p_t.len() {
        debug_assert_eq!(p_t[i].0, g_t[i].0);
        let apply_wd = decayed(&p_t[i].0);
        let p = &mut p_t[i].1.data;
        let g = &g_t[i].1.data;
        let m = &mut m_t[i].1.data;
        let v = &mut v_t[i].1.data;
        for j in 0..p.len() {
            m[j] = b1 * m[j] + (T::one() - b1) * g[j];
            v[j] = b2 * v[j] + (T::one() - b2) * g[j] * g[j];
            let m_hat = m[j] / bc1;
            let v_hat = v[j] / bc2;
            let mut upd = m_hat / (v_hat.sqrt() + eps);
            if apply_wd {
                upd += wd * p[j];
            }
            p[j] -= lr_t * upd;
        }
    }
    Ok(true)
}

/// Scales gradients so their global L2 norm is at most `max_norm`.
pub fn clip_grad_norm<T: Real>(grads: &mut ModelParams<T>, max_norm: f64) {
    let mut sq = 0.0f64;
    for (_, t) in grads.tensors() {
        for v in t.iter() {
            sq += v.f64() * v.f64();
        }
    }
    let norm = sq.sqrt();
    if norm > max_norm && norm > 0.0 {
        grads.scale(T::of(max_norm / norm));
    }
}

/// One line of the metrics stream.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StepMetric {
    pub step: usize,
    pub loss: f64,
    pub lr: f64,
    pub wall_time: f64,
}

/// Periodic checkpoint destination: (cadence in steps, sink).
pub type CheckpointSink<'a, T> = (usize, &'a mut dyn FnMut(usize, &ModelParams<T>) -> Result<()>);

/// Data-pipeline settings shared by pre-training and fine-tuning.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// Token budget k: every batch satisfies B × L ≤ k.
    pub token_budget: usize,
    pub bucket_width: usize,
    /// Documents longer than this are chunked (at segment boundaries).
    pub max_seq_len: usize,
    pub scan: ScanStrategy,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            token_budget: 20480,
            bucket_width: 64,
            max_seq_len: 2048,
            scan: ScanStrategy::Sfbs,
        }
    }
}

/// Result of a training run.
pub struct TrainRun<T> {
    pub params: ModelParams<T>,
    pub metrics: Vec<StepMetric>,
    pub rejected_steps: usize,
    pub bucket_stats: BucketStats,
    /// Entity F1 on the held-out split per evaluation pass (fine-tuning).
    pub f1_curve: Vec<(usize, f64)>,
    /// Entity F1 on the training split, when early stopping tracked it.
    pub train_f1_curve: Vec<(usize, f64)>,
}

/// Prepares ordered [CLS]-prefixed sequences for a document set.
pub fn prepare_sequences(
    docs: &[Document],
    tagset: &TagSet,
    pipeline: &PipelineConfig,
) -> Result<Vec<Sequence>> {
    let tok = ByteTokenizer;
    let mut seqs = Vec::new();
    for doc in docs {
        seqs.extend(document_to_sequences(
            doc,
            &tok,
            tagset,
            pipeline.scan,
            pipeline.max_seq_len,
        )?);
    }
    Ok(seqs)
}

fn default_tagset() -> TagSet {
    TagSet::new(&crate::data::synth::ENTITY_TYPES.map(|s| s))
}

/// Masked-LM pre-training over `docs`. `on_step` sees every metric record;
/// `checkpoint_every` invokes the sink with the live parameters.
#[allow(clippy::too_many_arguments)]
pub fn train_mlm<T: Real>(
    docs: &[Document],
    model_cfg: &ModelConfig,
    train_cfg: &TrainConfig,
    pipeline: &PipelineConfig,
    policy: &MaskingPolicy,
    mut on_step: Option<&mut dyn FnMut(&StepMetric)>,
    mut checkpoint_sink: Option<CheckpointSink<'_, T>>,
) -> Result<TrainRun<T>> {
    if docs.is_empty() {
        return Err(Error::contract("train_mlm requires a non-empty corpus"));
    }
    model_cfg.validate()?;
    policy.validate()?;
    let tok = ByteTokenizer;
    let tagset = default_tagset();
    let seqs = prepare_sequences(docs, &tagset, pipeline)?;

    let mut params = ModelParams::<T>::init(model_cfg, train_cfg.seed);
    let mut adam = AdamState::new(model_cfg);
    let mut mask_rng = rng::seeded(train_cfg.seed, rng::stream::MLM_MASK);
    let mut metrics = Vec::new();
    let mut bucket_stats = BucketStats::default();
    let start = Instant::now();

    let mut step = 0usize;
    let mut epoch = 0u64;
    'outer: loop {
        let (batches, stats) = bucket_batches(
            &seqs,
            pipeline.token_budget,
            pipeline.bucket_width,
            train_cfg.seed.wrapping_add(epoch),
        )?;
        if epoch == 0 {
            bucket_stats = stats;
            if batches.is_empty() {
                return Err(Error::contract("corpus produced no batches"));
            }
        }
        for batch in &batches {
            step += 1;
            let mut grads = ModelParams::<T>::zeros(model_cfg);
            let mut loss_sum = 0.0;
            let mut masked = 0usize;
            for seq in &batch.sequences {
                let (ids, labels) = mask_sequence(seq, policy, &tok, &mut mask_rng);
                let mut records = seq.records.clone();
                for (r, id) in records.iter_mut().zip(&ids) {
                    r.token_id = *id;
                }
                let (l, c) = mlm_step(&records, &labels, &params, model_cfg, &mut grads)?;
                loss_sum += l;
                masked += c;
            }
            if masked == 0 {
                // a batch with nothing masked carries no gradient
                continue;
            }
            grads.scale(T::of(1.0 / masked as f64));
            if let Some(c) = train_cfg.grad_clip_norm {
                clip_grad_norm(&mut grads, c);
            }
            adam_step(&mut params, &grads, &mut adam, train_cfg, step)?;

            let metric = StepMetric {
                step,
                loss: loss_sum / masked as f64,
                lr: train_cfg.lr * lr_multiplier(step, train_cfg.total_steps, train_cfg.warmup_fraction),
                wall_time: start.elapsed().as_secs_f64(),
            };
            if let Some(cb) = on_step.as_deref_mut() {
                cb(&metric);
            }
            metrics.push(metric);

            if let Some((every, sink)) = checkpoint_sink.as_mut() {
                if step.is_multiple_of(*every) {
                    sink(step, &params)?;
                }
            }
            if step >= train_cfg.total_steps {
                break 'outer;
            }
        }
        epoch += 1;
    }

    Ok(TrainRun {
        params,
        metrics,
        rejected_steps: adam.rejected_steps,
        bucket_stats,
        f1_curve: Vec::new(),
        train_f1_curve: Vec::new(),
    })
}

/// Held-out masked-LM loss (mean per masked token) at a fixed mask seed.
pub fn eval_mlm_loss<T: Real>(
    docs: &[Document],
    params: &ModelParams<T>,
    model_cfg: &ModelConfig,
    pipeline: &PipelineConfig,
    policy: &MaskingPolicy,
    mask_seed: u64,
) -> Result<f64> {
    let tok = ByteTokenizer;
    let tagset = default_tagset();
    let seqs = prepare_sequences(docs, &tagset, pipeline)?;
    let mut rng = rng::seeded(mask_seed, rng::stream::MLM_MASK);
    let mut loss_sum = 0.0;
    let mut count = 0usize;
    for seq in &seqs {
        let (ids, labels) = mask_sequence(seq, policy, &tok, &mut rng);
        let mut records = seq.records.clone();
        for (r, id) in records.iter_mut().zip(&ids) {
            r.token_id = *id;
        }
        let (l, c) = crate::model::mlm_loss(&records, &labels, params, model_cfg)?;
        loss_sum += l;
        count += c;
    }
    if count == 0 {
        return Err(Error::contract("evaluation produced no masked positions"));
    }
    Ok(loss_sum / count as f64)
}

/// Entity F1 of greedy predictions over prepared sequences.
pub fn eval_entity_f1<T: Real>(
    seqs: &[Sequence],
    params: &ModelParams<T>,
    model_cfg: &ModelConfig,
    tagset: &TagSet,
) -> Result<(f64, f64, f64)> {
    let mut acc = F1Accumulator::new();
    for seq in seqs {
        let pred = predict_tags(&seq.records, params, model_cfg)?;
        // position 0 is [CLS]; it carries no tag
        let gold: Vec<u32> = seq.bio_labels[1..]
            .iter()
            .map(|&l| if l == IGNORE_LABEL { 0 } else { l })
            .collect();
        acc.add(&pred[1..], &gold, tagset)?;
    }
    Ok(acc.scores())
}

/// Fine-tuning settings on top of the shared pipeline.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FinetuneOptions {
    pub freeze_backbone: bool,
    /// Fraction of documents held out for evaluation (split by position).
    pub eval_fraction: f64,
    /// Steps between held-out evaluations: 0 evaluates only at the end.
    pub eval_every: usize,
    /// Early stop once train-set entity F1 reaches this value (checked at
    /// the `eval_every` cadence).
    pub stop_at_train_f1: Option<f64>,
}

impl Default for FinetuneOptions {
    fn default() -> Self {
        FinetuneOptions {
            freeze_backbone: false,
            eval_fraction: 0.2,
            eval_every: 100,
            stop_at_train_f1: None,
        }
    }
}

/// BIO fine-tuning starting from `init` parameters (a pre-training
/// checkpoint, or fresh initialization).
#[allow(clippy::too_many_arguments)]
pub fn finetune_tagging<T: Real>(
    docs: &[Document],
    init: ModelParams<T>,
    model_cfg: &ModelConfig,
    train_cfg: &TrainConfig,
    pipeline: &PipelineConfig,
    opts: &FinetuneOptions,
    tagset: &TagSet,
    mut on_step: Option<&mut dyn FnMut(&StepMetric)>,
) -> Result<TrainRun<T>> {
    if docs.is_empty() {
        return Err(Error::contract("finetune_tagging requires documents"));
    }
    if tagset.num_entity_types() != model_cfg.num_entity_types {
        return Err(Error::contract(format!(
            "tag set has {} entity types, model config expects {}",
            tagset.num_entity_types(),
            model_cfg.num_entity_types
        )));
    }
    let n_eval = ((docs.len() as f64) * opts.eval_fraction).round() as usize;
    let n_train = docs.len() - n_eval;
    let (train_docs, eval_docs) = docs.split_at(n_train);
    // split hygiene: the doc_id sets must not overlap
    {
        let train_ids: std::collections::HashSet<&str> =
            train_docs.iter().map(|d| d.doc_id.as_str()).collect();
        for d in eval_docs {
            if train_ids.contains(d.doc_id.as_str()) {
                return Err(Error::contract(format!(
                    "doc_id {} appears in both train and eval splits",
                    d.doc_id
                )));
            }
        }
    }

    let train_seqs = prepare_sequences(train_docs, tagset, pipeline)?;
    let eval_seqs = prepare_sequences(eval_docs, tagset, pipeline)?;

    let mut params = init;
    let mut adam = AdamState::new(model_cfg);
    let mut dropout_rng = rng::seeded(train_cfg.seed, rng::stream::DROPOUT);
    let mut metrics = Vec::new();
    let mut f1_curve = Vec::new();
    let mut train_f1_curve = Vec::new();
    let mut bucket_stats = BucketStats::default();
    let start = Instant::now();

    let mut step = 0usize;
    let mut epoch = 0u64;
    'outer: loop {
        if train_cfg.total_steps == 0 {
            break;
        }
        let (batches, stats) = bucket_batches(
            &train_seqs,
            pipeline.token_budget,
            pipeline.bucket_width,
            train_cfg.seed.wrapping_add(epoch),
        )?;
        if epoch == 0 {
            bucket_stats = stats;
            if batches.is_empty() {
                return Err(Error::contract("corpus produced no batches"));
            }
        }
        for batch in &batches {
            step += 1;
            let mut grads = ModelParams::<T>::zeros(model_cfg);
            let mut loss_sum = 0.0;
            let mut labeled = 0usize;
            for seq in &batch.sequences {
                let (l, c) = tag_step(
                    &seq.records,
                    &seq.bio_labels,
                    &params,
                    model_cfg,
                    if model_cfg.dropout_rate > 0.0 {
                        Some(&mut dropout_rng)
                    } else {
                        None
                    },
                    &mut grads,
                    opts.freeze_backbone,
                )?;
                loss_sum += l;
                labeled += c;
            }
            if labeled == 0 {
                continue;
            }
            grads.scale(T::of(1.0 / labeled as f64));
            if let Some(c) = train_cfg.grad_clip_norm {
                clip_grad_norm(&mut grads, c);
            }
            adam_step(&mut params, &grads, &mut adam, train_cfg, step)?;

            let metric = StepMetric {
                step,
                loss: loss_sum / labeled as f64,
                lr: train_cfg.lr * lr_multiplier(step, train_cfg.total_steps, train_cfg.warmup_fraction),
                wall_time: start.elapsed().as_secs_f64(),
            };
            if let Some(cb) = on_step.as_deref_mut() {
                cb(&metric);
            }
            metrics.push(metric);

            if opts.eval_every > 0 && step.is_multiple_of(opts.eval_every) {
                if !eval_seqs.is_empty() {
                    let (_, _, f1) = eval_entity_f1(&eval_seqs, &params, model_cfg, tagset)?;
                    f1_curve.push((step, f1));
                }
                if let Some(target) = opts.stop_at_train_f1 {
                    let (_, _, f1) = eval_entity_f1(&train_seqs, &params, model_cfg, tagset)?;
                    train_f1_curve.push((step, f1));
                    if f1 >= target {
                        break 'outer;
                    }
                }
            }
            if step >= train_cfg.total_steps {
                break 'outer;
            }
        }
        epoch += 1;
    }

    if !eval_seqs.is_empty() {
        let (_, _, f1) = eval_entity_f1(&eval_seqs, &params, model_cfg, tagset)?;
        f1_curve.push((step, f1));
    }
    if opts.stop_at_train_f1.is_some() && train_f1_curve.last().map(|(s, _)| *s) != Some(step) {
        let (_, _, f1) = eval_entity_f1(&train_seqs, &params, model_cfg, tagset)?;
        train_f1_curve.push((step, f1));
    }

    Ok(TrainRun {
        params,
        metrics,
        rejected_steps: adam.rejected_steps,
        bucket_stats,
        f1_curve,
        train_f1_curve,
    })
}

/// Gradient-check report: the worst scaled error and a per-family breakdown.
/// The scaled error is |analytic − fd| / (1e-4 + max(|analytic|, |fd|)), so
/// values below 1e-4 satisfy "relative error < 1e-4 with a 1e-8 floor".
#[derive(Debug, Clone, serde::Serialize)]
pub struct GradcheckReport {
    pub max_rel_err: f64,
    pub worst_param: String,
    pub params_checked: usize,
    pub families: Vec<FamilyReport>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct FamilyReport {
    pub family: String,
    pub max_rel_err: f64,
    pub checked: usize,
}

fn family_of(name: &str) -> String {
    // blocks.3.scan_fwd.a_log → blocks.*.scan_fwd.a_log
    let mut parts: Vec<&str> = name.split('.').collect();
    for p in parts.iter_mut() {
        if p.chars().all(|c| c.is_ascii_digit()) {
            *p = "*";
        }
    }
    parts.join(".")
}

/// Compares analytic MLM-loss gradients against central differences
/// (step 1e-5) on a small double-precision model, sampling at least
/// `min_samples` parameters while touching every parameter family.
pub fn gradcheck(model_cfg: &ModelConfig, seed: u64, min_samples: usize) -> Result<GradcheckReport> {
    model_cfg.validate()?;
    let params = ModelParams::<f64>::init(model_cfg, seed);
    let mut r = rng::seeded(seed, rng::stream::GRADCHECK);

    // a short random sequence with ~25% masked positions
    use rand::Rng;
    let len = 24usize;
    let mut records = vec![crate::model::TokenRecord::cls(0)];
    let mut labels = vec![IGNORE_LABEL];
    for i in 0..len {
        let mut poly = [0u16; 8];
        for p in poly.iter_mut() {
            *p = r.gen_range(0..model_cfg.coord_bins as u16);
        }
        records.push(crate::model::TokenRecord::new(
            r.gen_range(0..model_cfg.vocab_size as u32),
            poly,
            (i / 6) as u32,
        ));
        labels.push(if r.gen::<f64>() < 0.25 {
            r.gen_range(0..model_cfg.vocab_size as u32)
        } else {
            IGNORE_LABEL
        });
    }
    if labels.iter().all(|l| *l == IGNORE_LABEL) {
        labels[1] = 0;
    }

    let mut grads = ModelParams::<f64>::zeros(model_cfg);
    mlm_step(&records, &labels, &params, model_cfg, &mut grads)?;

    let names: Vec<(String, usize)> = params
        .tensors()
        .iter()
        .map(|(n, t)| (n.clone(), t.len()))
        .collect();
    let total: usize = names.iter().map(|(_, l)| l).sum();
    let per_tensor: Vec<usize> = names
        .iter()
        .map(|(_, l)| ((min_samples * l).div_ceil(total)).clamp(1, *l))
        .collect();

    let eps = 1e-5;
    let mut report = GradcheckReport {
        max_rel_err: 0.0,
        worst_param: String::new(),
        params_checked: 0,
        families: Vec::new(),
    };
    let mut family_agg: std::collections::BTreeMap<String, (f64, usize)> = Default::default();

    for ((name, tlen), quota) in names.iter().zip(&per_tensor) {
        let stride = (tlen / quota).max(1);
        let offset = r.gen_range(0..stride.min(*tlen));
        for i in (offset..*tlen).step_by(stride) {
            let mut pp = params.clone();
            pp.tensors_mut().iter_mut().find(|(n, _)| n == name).unwrap().1.data[i] += eps;
            let (lp, _) = crate::model::mlm_loss(&records, &labels, &pp, model_cfg)?;
            let mut pm = params.clone();
            pm.tensors_mut().iter_mut().find(|(n, _)| n == name).unwrap().1.data[i] -= eps;
            let (lm, _) = crate::model::mlm_loss(&records, &labels, &pm, model_cfg)?;
            let fd = (lp - lm) / (2.0 * eps);
            let got = grads.tensors().iter().find(|(n, _)| n == name).unwrap().1.data[i];
            let err = (got - fd).abs() / (1e-4 + fd.abs().max(got.abs()));
            report.params_checked += 1;
            let fam = family_agg.entry(family_of(name)).or_insert((0.0, 0));
            fam.1 += 1;
            if err > fam.0 {
                fam.0 = err;
            }
            if err > report.max_rel_err {
                report.max_rel_err = err;
                report.worst_param = format!("{name}[{i}]");
            }
        }
    }
    report.families = family_agg
        .into_iter()
        .map(|(family, (max_rel_err, checked))| FamilyReport {
            family,
            max_rel_err,
            checked,
        })
        .collect();
    Ok(report)
}
