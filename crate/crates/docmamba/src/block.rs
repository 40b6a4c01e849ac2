//! The bidirectional Mamba encoder block.
//!
//! One block normalizes its input, projects it to X and Z, runs X through a
//! depthwise causal convolution + SiLU + selective scan in forward time and
//! (with independent parameters) in reversed time, gates both scan outputs
//! with silu(Z), and projects back to the hidden width with a residual
//! connection:
//!
//! ```text
//! out = out_proj((Y_f + Y_b) ⊙ silu(Z)) + input
//! ```
//!
//! The backward-direction result is re-reversed to forward time order before
//! gating so the sum is time-aligned.

use crate::real::{silu, silu_grad, Real};
use crate::ssm::{
    scan_backward, scan_forward_cached, selective_scan, xavier_uniform, ScanCache, ScanParams,
    SsmDims,
};
use crate::tensor::{matvec, matvec_backward_input, matvec_backward_weight, Tensor};
use crate::{Error, Result};

/// Which normalization opens the block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// RMS norm: `w ⊙ x / sqrt(mean(x²) + eps)`.
    Rms,
    /// Bias-free layer norm: `w ⊙ (x − μ) / sqrt(var + eps)`.
    Layer,
}

pub const NORM_EPS: f64 = 1e-5;

/// Static shape of a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockConfig {
    pub hidden: usize,
    pub conv_width: usize,
    pub norm: NormKind,
    pub ssm: SsmDims,
}

impl BlockConfig {
    pub fn d_inner(&self) -> usize {
        self.ssm.d_inner
    }
}

/// Parameters of one block. Forward and backward scan parameters are
/// independent sets.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockParams<T> {
    /// (hidden).
    pub norm_weight: Tensor<T>,
    /// (2·d_inner, hidden); rows 0..d_inner produce X, the rest Z.
    pub in_proj: Tensor<T>,
    /// (d_inner, conv_width) depthwise kernel, forward direction.
    pub conv_fwd: Tensor<T>,
    /// (d_inner, conv_width) depthwise kernel, backward direction.
    pub conv_bwd: Tensor<T>,
    pub scan_fwd: ScanParams<T>,
    pub scan_bwd: ScanParams<T>,
    /// (hidden, d_inner).
    pub out_proj: Tensor<T>,
}

impl<T: Real> BlockParams<T> {
    pub fn zeros(cfg: &BlockConfig) -> Self {
        let d = cfg.d_inner();
        BlockParams {
            norm_weight: Tensor::zeros(&[cfg.hidden]),
            in_proj: Tensor::zeros(&[2 * d, cfg.hidden]),
            conv_fwd: Tensor::zeros(&[d, cfg.conv_width]),
            conv_bwd: Tensor::zeros(&[d, cfg.conv_width]),
            scan_fwd: ScanParams::zeros(cfg.ssm),
            scan_bwd: ScanParams::zeros(cfg.ssm),
            out_proj: Tensor::zeros(&[cfg.hidden, d]),
        }
    }

    pub fn init(cfg: &BlockConfig, rng: &mut impl rand::Rng) -> Self {
        let mut p = Self::zeros(cfg);
        p.norm_weight.fill(T::one());
        xavier_uniform(&mut p.in_proj, rng);
        xavier_uniform(&mut p.out_proj, rng);
        let bound = 1.0 / (cfg.conv_width as f64).sqrt();
        for k in [&mut p.conv_fwd, &mut p.conv_bwd] {
            for v in k.data.iter_mut() {
                let u: f64 = rng.gen();
                *v = T::of((2.0 * u - 1.0) * bound);
            }
        }
        p.scan_fwd = ScanParams::init(cfg.ssm, rng);
        p.scan_bwd = ScanParams::init(cfg.ssm, rng);
        p
    }

    /// The same block with forward and backward direction parameters
    /// exchanged; used by the reversal-equivariance tests.
    pub fn swap_directions(&self) -> Self {
        let mut p = self.clone();
        std::mem::swap(&mut p.conv_fwd, &mut p.conv_bwd);
        std::mem::swap(&mut p.scan_fwd, &mut p.scan_bwd);
        p
    }

    pub fn tensors(&self) -> Vec<(String, &Tensor<T>)> {
        let mut out: Vec<(String, &Tensor<T>)> = vec![
            ("norm_weight".into(), &self.norm_weight),
            ("in_proj".into(), &self.in_proj),
            ("conv_fwd".into(), &self.conv_fwd),
            ("conv_bwd".into(), &self.conv_bwd),
            ("out_proj".into(), &self.out_proj),
        ];
        for (name, t) in self.scan_fwd.tensors() {
            out.push((format!("scan_fwd.{name}"), t));
        }
        for (name, t) in self.scan_bwd.tensors() {
            out.push((format!("scan_bwd.{name}"), t));
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor<T>)> {
        let mut out: Vec<(String, &mut Tensor<T>)> = vec![
            ("norm_weight".into(), &mut self.norm_weight),
            ("in_proj".into(), &mut self.in_proj),
            ("conv_fwd".into(), &mut self.conv_fwd),
            ("conv_bwd".into(), &mut self.conv_bwd),
            ("out_proj".into(), &mut self.out_proj),
        ];
        for (name, t) in self.scan_fwd.tensors_mut() {
            out.push((format!("scan_fwd.{name}"), t));
        }
        for (name, t) in self.scan_bwd.tensors_mut() {
            out.push((format!("scan_bwd.{name}"), t));
        }
        out
    }
}

/// `out[i] = weight[i] · s[i] / sqrt(mean(s²) + eps)`.
pub fn rms_normalize<T: Real>(s: &[T], weight: &[T], out: &mut [T]) {
    let h = s.len();
    let ms: T = s.iter().map(|v| *v * *v).sum::<T>() / T::of(h as f64);
    let r = (ms + T::of(NORM_EPS)).sqrt();
    for i in 0..h {
        out[i] = weight[i] * s[i] / r;
    }
}

fn layer_normalize<T: Real>(s: &[T], weight: &[T], out: &mut [T]) {
    let h = T::of(s.len() as f64);
    let mean = s.iter().copied().sum::<T>() / h;
    let var = s.iter().map(|v| (*v - mean) * (*v - mean)).sum::<T>() / h;
    let sd = (var + T::of(NORM_EPS)).sqrt();
    for (o, (v, w)) in out.iter_mut().zip(s.iter().zip(weight)) {
        *o = *w * (*v - mean) / sd;
    }
}

/// Applies the configured norm variant to one token.
pub fn normalize<T: Real>(kind: NormKind, s: &[T], weight: &[T], out: &mut [T]) {
    match kind {
        NormKind::Rms => rms_normalize(s, weight, out),
        NormKind::Layer => layer_normalize(s, weight, out),
    }
}

/// dL/ds and dL/dweight for one token of [`rms_normalize`] / layer norm.
pub fn normalize_backward<T: Real>(
    kind: NormKind,
    s: &[T],
    weight: &[T],
    grad_out: &[T],
    grad_s: &mut [T],
    grad_weight: &mut [T],
) {
    let h = s.len();
    let hf = T::of(h as f64);
    match kind {
        NormKind::Rms => {
            let ms: T = s.iter().map(|v| *v * *v).sum::<T>() / hf;
            let r = (ms + T::of(NORM_EPS)).sqrt();
            let mut dot = T::zero();
            for i in 0..h {
                dot += grad_out[i] * weight[i] * s[i];
                grad_weight[i] += grad_out[i] * s[i] / r;
            }
            let r3 = r * r * r;
            for i in 0..h {
                grad_s[i] += grad_out[i] * weight[i] / r - s[i] * dot / (hf * r3);
            }
        }
        NormKind::Layer => {
            let mean = s.iter().copied().sum::<T>() / hf;
            let var = s.iter().map(|v| (*v - mean) * (*v - mean)).sum::<T>() / hf;
            let sd = (var + T::of(NORM_EPS)).sqrt();
            let mut g_mean = T::zero();
            let mut gx_mean = T::zero();
            for i in 0..h {
                let xn = (s[i] - mean) / sd;
                let g = grad_out[i] * weight[i];
                g_mean += g;
                gx_mean += g * xn;
                grad_weight[i] += grad_out[i] * xn;
            }
            g_mean /= hf;
            gx_mean /= hf;
            for i in 0..h {
                let xn = (s[i] - mean) / sd;
                grad_s[i] += (grad_out[i] * weight[i] - g_mean - xn * gx_mean) / sd;
            }
        }
    }
}

/// Depthwise causal convolution with w−1 zeros of left padding:
/// `out_t[c] = Σ_j kernel[c,j] · x_{t−w+1+j}[c]`.
pub fn causal_conv<T: Real>(x: &[T], kernel: &Tensor<T>, len: usize) -> Vec<T> {
    let d = kernel.rows();
    let w = kernel.cols();
    debug_assert_eq!(x.len(), len * d);
    let mut out = vec![T::zero(); len * d];
    for t in 0..len {
        for c in 0..d {
            let mut acc = T::zero();
            let base = t as isize - (w as isize - 1);
            for j in 0..w {
                let src = base + j as isize;
                if src >= 0 {
                    acc += kernel.data[c * w + j] * x[src as usize * d + c];
                }
            }
            out[t * d + c] = acc;
        }
    }
    out
}

fn causal_conv_backward<T: Real>(
    x: &[T],
    kernel: &Tensor<T>,
    grad_out: &[T],
    len: usize,
    grad_x: &mut [T],
    grad_kernel: &mut Tensor<T>,
) {
    let d = kernel.rows();
    let w = kernel.cols();
    for t in 0..len {
        for c in 0..d {
            let g = grad_out[t * d + c];
            if g == T::zero() {
                continue;
            }
            let base = t as isize - (w as isize - 1);
            for j in 0..w {
                let src = base + j as isize;
                if src >= 0 {
                    grad_x[src as usize * d + c] += kernel.data[c * w + j] * g;
                    grad_kernel.data[c * w + j] += x[src as usize * d + c] * g;
                }
            }
        }
    }
}

/// Reverses a (len, d) sequence along time.
pub fn reverse_time<T: Copy>(x: &[T], d: usize) -> Vec<T> {
    let len = x.len() / d;
    let mut out = Vec::with_capacity(x.len());
    for t in (0..len).rev() {
        out.extend_from_slice(&x[t * d..(t + 1) * d]);
    }
    out
}

/// Block output plus the per-branch scan results (forward time order), for
/// probing bidirectionality.
pub struct BlockDetail<T> {
    pub out: Vec<T>,
    pub y_fwd: Vec<T>,
    pub y_bwd: Vec<T>,
}

/// One block application: `out = out_proj((Y_f + Y_b) ⊙ silu(Z)) + s_prev`.
pub fn bimamba_block<T: Real>(
    s_prev: &[T],
    params: &BlockParams<T>,
    cfg: &BlockConfig,
) -> Result<Vec<T>> {
    Ok(bimamba_block_detail(s_prev, params, cfg)?.out)
}

pub fn bimamba_block_detail<T: Real>(
    s_prev: &[T],
    params: &BlockParams<T>,
    cfg: &BlockConfig,
) -> Result<BlockDetail<T>> {
    let h = cfg.hidden;
    let d = cfg.d_inner();
    if s_prev.is_empty() || !s_prev.len().is_multiple_of(h) {
        return Err(Error::contract(format!(
            "block input length {} is not a positive multiple of hidden={h}",
            s_prev.len()
        )));
    }
    let len = s_prev.len() / h;

    let mut x = vec![T::zero(); len * d];
    let mut z = vec![T::zero(); len * d];
    let mut normed = vec![T::zero(); h];
    let mut xz = vec![T::zero(); 2 * d];
    for t in 0..len {
        normalize(cfg.norm, &s_prev[t * h..(t + 1) * h], &params.norm_weight.data, &mut normed);
        matvec(&params.in_proj, &normed, &mut xz);
        x[t * d..(t + 1) * d].copy_from_slice(&xz[..d]);
        z[t * d..(t + 1) * d].copy_from_slice(&xz[d..]);
    }

    let mut x_f = causal_conv(&x, &params.conv_fwd, len);
    x_f.iter_mut().for_each(|v| *v = silu(*v));
    let y_f = selective_scan(&x_f, &params.scan_fwd, cfg.ssm)?;

    let x_rev = reverse_time(&x, d);
    let mut x_b = causal_conv(&x_rev, &params.conv_bwd, len);
    x_b.iter_mut().for_each(|v| *v = silu(*v));
    let y_b_rev = selective_scan(&x_b, &params.scan_bwd, cfg.ssm)?;
    let y_b = reverse_time(&y_b_rev, d);

    let mut out = s_prev.to_vec();
    let mut gated = vec![T::zero(); d];
    let mut proj = vec![T::zero(); h];
    for t in 0..len {
        for c in 0..d {
            let g = silu(z[t * d + c]);
            gated[c] = (y_f[t * d + c] + y_b[t * d + c]) * g;
        }
        matvec(&params.out_proj, &gated, &mut proj);
        for i in 0..h {
            out[t * h + i] += proj[i];
        }
    }
    Ok(BlockDetail { out, y_fwd: y_f, y_bwd: y_b })
}

/// Forward activations retained for the block adjoint.
pub struct BlockCache<T> {
    len: usize,
    s_prev: Vec<T>,
    x: Vec<T>,
    z: Vec<T>,
    conv_f_pre: Vec<T>,
    conv_b_pre: Vec<T>,
    scan_f: ScanCache<T>,
    scan_b: ScanCache<T>,
    y_f: Vec<T>,
    y_b: Vec<T>,
}

pub fn bimamba_block_cached<T: Real>(
    s_prev: &[T],
    params: &BlockParams<T>,
    cfg: &BlockConfig,
) -> Result<(Vec<T>, BlockCache<T>)> {
    let h = cfg.hidden;
    let d = cfg.d_inner();
    if s_prev.is_empty() || !s_prev.len().is_multiple_of(h) {
        return Err(Error::contract(format!(
            "block input length {} is not a positive multiple of hidden={h}",
            s_prev.len()
        )));
    }
    let len = s_prev.len() / h;

    let mut x = vec![T::zero(); len * d];
    let mut z = vec![T::zero(); len * d];
    let mut normed = vec![T::zero(); h];
    let mut xz = vec![T::zero(); 2 * d];
    for t in 0..len {
        normalize(cfg.norm, &s_prev[t * h..(t + 1) * h], &params.norm_weight.data, &mut normed);
        matvec(&params.in_proj, &normed, &mut xz);
        x[t * d..(t + 1) * d].copy_from_slice(&xz[..d]);
        z[t * d..(t + 1) * d].copy_from_slice(&xz[d..]);
    }

    let conv_f_pre = causal_conv(&x, &params.conv_fwd, len);
    let mut x_f = conv_f_pre.clone();
    x_f.iter_mut().for_each(|v| *v = silu(*v));
    let (y_f, scan_f) = scan_forward_cached(&x_f, &params.scan_fwd, cfg.ssm)?;

    let x_rev = reverse_time(&x, d);
    let conv_b_pre = causal_conv(&x_rev, &params.conv_bwd, len);
    let mut x_b = conv_b_pre.clone();
    x_b.iter_mut().for_each(|v| *v = silu(*v));
    let (y_b_rev, scan_b) = scan_forward_cached(&x_b, &params.scan_bwd, cfg.ssm)?;
    let y_b = reverse_time(&y_b_rev, d);

    let mut out = s_prev.to_vec();
    let mut gated = vec![T::zero(); d];
    let mut proj = vec![T::zero(); h];
    for t in 0..len {
        for c in 0..d {
            let g = silu(z[t * d + c]);
            gated[c] = (y_f[t * d + c] + y_b[t * d + c]) * g;
        }
        matvec(&params.out_proj, &gated, &mut proj);
        for i in 0..h {
            out[t * h + i] += proj[i];
        }
    }

    Ok((
        out,
        BlockCache {
            len,
            s_prev: s_prev.to_vec(),
            x,
            z,
            conv_f_pre,
            conv_b_pre,
            scan_f,
            scan_b,
            y_f,
            y_b,
        },
    ))
}

/// Adjoint of [`bimamba_block_cached`]. Returns dL/ds_prev (including the
/// residual path) and accumulates parameter gradients into `grads`.
pub fn bimamba_block_backward<T: Real>(
    cache: &BlockCache<T>,
    params: &BlockParams<T>,
    cfg: &BlockConfig,
    grad_out: &[T],
    grads: &mut BlockParams<T>,
) -> Result<Vec<T>> {
    let h = cfg.hidden;
    let d = cfg.d_inner();
    let len = cache.len;
    if grad_out.len() != len * h {
        return Err(Error::contract(format!(
            "block gradient length {} does not match output {}",
            grad_out.len(),
            len * h
        )));
    }

    // residual passthrough
    let mut grad_s = grad_out.to_vec();

    // out_proj and gate
    let mut grad_yf = vec![T::zero(); len * d];
    let mut grad_yb = vec![T::zero(); len * d];
    let mut grad_z = vec![T::zero(); len * d];
    let mut gated = vec![T::zero(); d];
    let mut d_gated = vec![T::zero(); d];
    for t in 0..len {
        for (c, slot) in gated.iter_mut().enumerate() {
            let g = silu(cache.z[t * d + c]);
            *slot = (cache.y_f[t * d + c] + cache.y_b[t * d + c]) * g;
        }
        let go = &grad_out[t * h..(t + 1) * h];
        matvec_backward_weight(&mut grads.out_proj, go, &gated);
        d_gated.iter_mut().for_each(|v| *v = T::zero());
        matvec_backward_input(&params.out_proj, go, &mut d_gated);
        for c in 0..d {
            let zv = cache.z[t * d + c];
            let g = silu(zv);
            let ysum = cache.y_f[t * d + c] + cache.y_b[t * d + c];
            grad_yf[t * d + c] = d_gated[c] * g;
            grad_yb[t * d + c] = d_gated[c] * g;
            grad_z[t * d + c] = d_gated[c] * ysum * silu_grad(zv);
        }
    }

    // forward branch
    let mut grad_x = vec![T::zero(); len * d];
    {
        let grad_xf = scan_backward(&cache.scan_f, &params.scan_fwd, &grad_yf, &mut grads.scan_fwd)?;
        let mut grad_conv_pre = grad_xf;
        for (g, pre) in grad_conv_pre.iter_mut().zip(&cache.conv_f_pre) {
            *g *= silu_grad(*pre);
        }
        causal_conv_backward(
            &cache.x,
            &params.conv_fwd,
            &grad_conv_pre,
            len,
            &mut grad_x,
            &mut grads.conv_fwd,
        );
    }

    // backward branch (runs in reversed time)
    {
        let grad_yb_rev = reverse_time(&grad_yb, d);
        let grad_xb =
            scan_backward(&cache.scan_b, &params.scan_bwd, &grad_yb_rev, &mut grads.scan_bwd)?;
        let mut grad_conv_pre = grad_xb;
        for (g, pre) in grad_conv_pre.iter_mut().zip(&cache.conv_b_pre) {
            *g *= silu_grad(*pre);
        }
        let x_rev = reverse_time(&cache.x, d);
        let mut grad_x_rev = vec![T::zero(); len * d];
        causal_conv_backward(
            &x_rev,
            &params.conv_bwd,
            &grad_conv_pre,
            len,
            &mut grad_x_rev,
            &mut grads.conv_bwd,
        );
        let back = reverse_time(&grad_x_rev, d);
        for (gx, gb) in grad_x.iter_mut().zip(&back) {
            *gx += *gb;
        }
    }

    // in_proj and norm
    let mut normed = vec![T::zero(); h];
    let mut dxz = vec![T::zero(); 2 * d];
    let mut d_normed = vec![T::zero(); h];
    for t in 0..len {
        let sp = &cache.s_prev[t * h..(t + 1) * h];
        normalize(cfg.norm, sp, &params.norm_weight.data, &mut normed);
        dxz[..d].copy_from_slice(&grad_x[t * d..(t + 1) * d]);
        dxz[d..].copy_from_slice(&grad_z[t * d..(t + 1) * d]);
        matvec_backward_weight(&mut grads.in_proj, &dxz, &normed);
        d_normed.iter_mut().for_each(|v| *v = T::zero());
        matvec_backward_input(&params.in_proj, &dxz, &mut d_normed);
        normalize_backward(
            cfg.norm,
            sp,
            &params.norm_weight.data,
            &d_normed,
            &mut grad_s[t * h..(t + 1) * h],
            &mut grads.norm_weight.data,
        );
    }

    Ok(grad_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn tiny_cfg(hidden: usize) -> BlockConfig {
        BlockConfig {
            hidden,
            conv_width: 4,
            norm: NormKind::Rms,
            ssm: SsmDims {
                d_inner: hidden * 2,
                n_state: 4,
                dt_rank: 2,
            },
        }
    }

    #[test]
    fn rms_norm_of_ones_is_ones() {
        let s = vec![1.0f64; 8];
        let w = vec![1.0f64; 8];
        let mut out = vec![0.0; 8];
        rms_normalize(&s, &w, &mut out);
        for v in out {
            assert!((v - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn rms_norm_of_zeros_is_zeros() {
        let s = vec![0.0f64; 8];
        let w = vec![1.0f64; 8];
        let mut out = vec![1.0; 8];
        rms_normalize(&s, &w, &mut out);
        assert!(out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rms_norm_scale_invariant() {
        let s = vec![0.5f64, -1.25, 2.0, 0.0];
        let s2: Vec<f64> = s.iter().map(|v| v * 2.0).collect();
        let w = vec![0.7f64, 1.0, -0.3, 2.0];
        let mut a = vec![0.0; 4];
        let mut b = vec![0.0; 4];
        rms_normalize(&s, &w, &mut a);
        rms_normalize(&s2, &w, &mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-4, "rms norm not scale invariant");
        }
    }

    #[test]
    fn conv_delta_last_tap_is_identity() {
        let d = 3;
        let w = 4;
        let mut kernel = Tensor::zeros(&[d, w]);
        for c in 0..d {
            kernel.data[c * w + (w - 1)] = 1.0f64;
        }
        let mut r = rng::seeded(1, 0);
        let x: Vec<f64> = (0..6 * d).map(|_| r.gen_range(-1.0..1.0)).collect();
        assert_eq!(causal_conv(&x, &kernel, 6), x);
    }

    #[test]
    fn conv_delta_first_tap_shifts_right() {
        let d = 2;
        let mut kernel = Tensor::zeros(&[d, 2]);
        kernel.data[0] = 1.0f64; // channel 0, tap 0
        kernel.data[2] = 1.0; // channel 1, tap 0
        let x = vec![1.0, 10.0, 2.0, 20.0, 3.0, 30.0];
        let y = causal_conv(&x, &kernel, 3);
        assert_eq!(y, vec![0.0, 0.0, 1.0, 10.0, 2.0, 20.0]);
    }

    #[test]
    fn conv_single_token_sees_last_tap_only() {
        let d = 2;
        let w = 5;
        let mut r = rng::seeded(2, 0);
        let kernel = Tensor::from_vec(
            &[d, w],
            (0..d * w).map(|_| r.gen_range(-1.0..1.0)).collect::<Vec<f64>>(),
        );
        let x = vec![0.8, -0.4];
        let y = causal_conv(&x, &kernel, 1);
        for c in 0..d {
            assert!((y[c] - kernel.data[c * w + w - 1] * x[c]).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_out_proj_gives_exact_residual() {
        let cfg = tiny_cfg(8);
        let mut r = rng::seeded(4, 0);
        let mut p: BlockParams<f64> = BlockParams::init(&cfg, &mut r);
        p.out_proj.fill(0.0);
        let s: Vec<f64> = (0..5 * 8).map(|_| r.gen_range(-1.0..1.0)).collect();
        let y = bimamba_block(&s, &p, &cfg).unwrap();
        assert_eq!(y, s);
    }

    #[test]
    fn length_one_branches_coincide_when_shared() {
        let cfg = tiny_cfg(6);
        let mut r = rng::seeded(5, 0);
        let mut p: BlockParams<f64> = BlockParams::init(&cfg, &mut r);
        p.conv_bwd = p.conv_fwd.clone();
        p.scan_bwd = p.scan_fwd.clone();
        let s: Vec<f64> = (0..6).map(|_| r.gen_range(-1.0..1.0)).collect();
        let detail = bimamba_block_detail(&s, &p, &cfg).unwrap();
        assert_eq!(detail.y_fwd, detail.y_bwd);
    }

    #[test]
    fn reversal_equivariance_with_swapped_directions() {
        let cfg = tiny_cfg(16);
        let mut r = rng::seeded(3, 0);
        let p: BlockParams<f64> = BlockParams::init(&cfg, &mut r);
        let len = 32;
        let s: Vec<f64> = (0..len * 16).map(|_| r.gen_range(-1.0..1.0)).collect();

        let lhs = bimamba_block(&reverse_time(&s, 16), &p.swap_directions(), &cfg).unwrap();
        let rhs = reverse_time(&bimamba_block(&s, &p, &cfg).unwrap(), 16);
        let max = lhs
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max < 1e-5, "max abs diff {max}");
    }

    #[test]
    fn shape_preserved_for_all_lengths() {
        let cfg = tiny_cfg(8);
        let mut r = rng::seeded(6, 0);
        let p: BlockParams<f64> = BlockParams::init(&cfg, &mut r);
        for len in [1usize, 2, 7, 65] {
            let s: Vec<f64> = (0..len * 8).map(|_| r.gen_range(-1.0..1.0)).collect();
            let y = bimamba_block(&s, &p, &cfg).unwrap();
            assert_eq!(y.len(), len * 8);
        }
    }

    #[test]
    fn branch_causality_probes() {
        let cfg = tiny_cfg(8);
        let mut r = rng::seeded(7, 0);
        let p: BlockParams<f64> = BlockParams::init(&cfg, &mut r);
        let len = 10;
        let s: Vec<f64> = (0..len * 8).map(|_| r.gen_range(-1.0..1.0)).collect();
        let base = bimamba_block_detail(&s, &p, &cfg).unwrap();

        let t_hit = 4;
        let mut s2 = s.clone();
        s2[t_hit * 8 + 3] += 0.5;
        let poked = bimamba_block_detail(&s2, &p, &cfg).unwrap();

        let d = cfg.d_inner();
        for t in 0..len {
            let f_changed =
                (0..d).any(|c| (base.y_fwd[t * d + c] - poked.y_fwd[t * d + c]).abs() > 1e-12);
            let b_changed =
                (0..d).any(|c| (base.y_bwd[t * d + c] - poked.y_bwd[t * d + c]).abs() > 1e-12);
            if t < t_hit {
                assert!(!f_changed, "forward branch leaked backward at t={t}");
            }
            if t > t_hit {
                assert!(!b_changed, "backward branch leaked forward at t={t}");
            }
        }
    }

    #[test]
    fn cached_forward_matches_plain() {
        let cfg = tiny_cfg(8);
        let mut r = rng::seeded(8, 0);
        let p: BlockParams<f64> = BlockParams::init(&cfg, &mut r);
        let s: Vec<f64> = (0..9 * 8).map(|_| r.gen_range(-1.0..1.0)).collect();
        let plain = bimamba_block(&s, &p, &cfg).unwrap();
        let (cached, _) = bimamba_block_cached(&s, &p, &cfg).unwrap();
        let max = plain
            .iter()
            .zip(&cached)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max < 1e-12);
    }

    #[test]
    fn block_backward_matches_finite_differences() {
        for norm in [NormKind::Rms, NormKind::Layer] {
            let mut cfg = tiny_cfg(4);
            cfg.norm = norm;
            let mut r = rng::seeded(9, 0);
            let p: BlockParams<f64> = BlockParams::init(&cfg, &mut r);
            let len = 6;
            let s: Vec<f64> = (0..len * 4).map(|_| r.gen_range(-1.0..1.0)).collect();
            let upstream: Vec<f64> = (0..len * 4).map(|_| r.gen_range(-1.0..1.0)).collect();

            let loss = |p: &BlockParams<f64>, s: &[f64]| -> f64 {
                let y = bimamba_block(s, p, &cfg).unwrap();
                y.iter().zip(&upstream).map(|(a, b)| a * b).sum()
            };

            let (_, cache) = bimamba_block_cached(&s, &p, &cfg).unwrap();
            let mut grads = BlockParams::zeros(&cfg);
            let gs = bimamba_block_backward(&cache, &p, &cfg, &upstream, &mut grads).unwrap();

            let eps = 1e-5;
            // pass iff |a − fd| ≤ atol + rtol·max(|a|,|fd|)
            let check = |got: f64, want: f64, what: &str| {
                let lim = 1e-8 + 1e-4 * want.abs().max(got.abs());
                assert!(
                    (got - want).abs() <= lim,
                    "{what}: analytic {got} vs fd {want}"
                );
            };

            for i in (0..s.len()).step_by(5) {
                let mut sp = s.clone();
                sp[i] += eps;
                let mut sm = s.clone();
                sm[i] -= eps;
                let fd = (loss(&p, &sp) - loss(&p, &sm)) / (2.0 * eps);
                check(gs[i], fd, &format!("s[{i}]"));
            }
            let names: Vec<String> = grads.tensors().iter().map(|(n, _)| n.clone()).collect();
            for name in names {
                let tlen = p
                    .tensors()
                    .iter()
                    .find(|(n, _)| *n == name)
                    .unwrap()
                    .1
                    .len();
                for i in (0..tlen).step_by(9) {
                    let mut pp = p.clone();
                    pp.tensors_mut()
                        .iter_mut()
                        .find(|(n, _)| *n == name)
                        .unwrap()
                        .1
                        .data[i] += eps;
                    let mut pm = p.clone();
                    pm.tensors_mut()
                        .iter_mut()
                        .find(|(n, _)| *n == name)
                        .unwrap()
                        .1
                        .data[i] -= eps;
                    let fd = (loss(&pp, &s) - loss(&pm, &s)) / (2.0 * eps);
                    let got = grads
                        .tensors()
                        .iter()
                        .find(|(n, _)| *n == name)
                        .unwrap()
                        .1
                        .data[i];
                    check(got, fd, &format!("{name}[{i}]"));
                }
            }
        }
    }
}
