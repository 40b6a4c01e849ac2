//! Scaling measurements: wall time and peak memory of the encoder versus a
//! built-in quadratic softmax-attention baseline, summarized as fitted
//! power-law exponents.
//!
//! Peak memory comes from [`CountingAlloc`] when the host binary installs it
//! as the global allocator, else from analytic accounting of the largest
//! live buffer set; the report records which method was used. Benchmarks pin
//! to a single-threaded pool by default to stabilize timings.

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::time::Instant;

use rand::Rng;

use crate::model::{embed_sequence, encode, ModelConfig, ModelParams, TokenRecord};
use crate::real::Real;
use crate::rng;
use crate::ssm::{ScanParams, ScanState, SsmDims};
use crate::tensor::{matvec, Tensor};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// allocator instrumentation

static CURRENT: AtomicU64 = AtomicU64::new(0);
static PEAK: AtomicU64 = AtomicU64::new(0);
static ALLOC_CALLS: AtomicUsize = AtomicUsize::new(0);

/// A `System` wrapper that tracks live and peak heap bytes. Install in the
/// consuming binary:
///
/// ```ignore
/// #[global_allocator]
/// static ALLOC: docmamba::bench::CountingAlloc = docmamba::bench::CountingAlloc;
/// ```
pub struct CountingAlloc;

unsafe impl GlobalAlloc for CountingAlloc {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            ALLOC_CALLS.fetch_add(1, Ordering::Relaxed);
            let now = CURRENT.fetch_add(layout.size() as u64, Ordering::Relaxed)
                + layout.size() as u64;
            PEAK.fetch_max(now, Ordering::Relaxed);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        CURRENT.fetch_sub(layout.size() as u64, Ordering::Relaxed);
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let p = System.realloc(ptr, layout, new_size);
        if !p.is_null() {
            ALLOC_CALLS.fetch_add(1, Ordering::Relaxed);
            let old = layout.size() as u64;
            let new = new_size as u64;
            let now = if new >= old {
                CURRENT.fetch_add(new - old, Ordering::Relaxed) + (new - old)
            } else {
                CURRENT.fetch_sub(old - new, Ordering::Relaxed) - (old - new)
            };
            PEAK.fetch_max(now, Ordering::Relaxed);
        }
        p
    }
}

/// True when the counting allocator is routing this process's allocations.
pub fn alloc_instrumented() -> bool {
    ALLOC_CALLS.load(Ordering::Relaxed) > 0
}

/// Resets the peak to the current live size and returns the live size.
pub fn reset_peak() -> u64 {
    let now = CURRENT.load(Ordering::Relaxed);
    PEAK.store(now, Ordering::Relaxed);
    now
}

pub fn peak_bytes() -> u64 {
    PEAK.load(Ordering::Relaxed)
}

pub fn current_bytes() -> u64 {
    CURRENT.load(Ordering::Relaxed)
}

// ---------------------------------------------------------------------------
// quadratic softmax-attention baseline

/// Multi-head softmax attention over a full sequence. Returns the context
/// vectors and the (heads × L × L) attention weights. O(L²) time and memory
/// by construction.
pub fn softmax_attention<T: Real>(
    q: &[T],
    k: &[T],
    v: &[T],
    len: usize,
    hidden: usize,
    n_heads: usize,
) -> (Vec<T>, Vec<T>) {
    assert_eq!(hidden % n_heads, 0, "hidden must divide into heads");
    let dh = hidden / n_heads;
    let scale = T::of(1.0 / (dh as f64).sqrt());
    let mut attn = vec![T::zero(); n_heads * len * len];
    let mut ctx = vec![T::zero(); len * hidden];
    for h in 0..n_heads {
        let off = h * dh;
        for i in 0..len {
            let row = &mut attn[(h * len + i) * len..(h * len + i + 1) * len];
            let qi = &q[i * hidden + off..i * hidden + off + dh];
            let mut max = T::neg_infinity();
            for (j, slot) in row.iter_mut().enumerate() {
                let kj = &k[j * hidden + off..j * hidden + off + dh];
                let mut dot = T::zero();
                for (a, b) in qi.iter().zip(kj) {
                    dot += *a * *b;
                }
                *slot = dot * scale;
                max = max.max(*slot);
            }
            let mut sum = T::zero();
            for slot in row.iter_mut() {
                *slot = (*slot - max).exp();
                sum += *slot;
            }
            for slot in row.iter_mut() {
                *slot /= sum;
            }
            let out = &mut ctx[i * hidden + off..i * hidden + off + dh];
            for (j, w) in row.iter().enumerate() {
                let vj = &v[j * hidden + off..j * hidden + off + dh];
                for (o, vv) in out.iter_mut().zip(vj) {
                    *o += *w * *vv;
                }
            }
        }
    }
    (ctx, attn)
}

/// One pre-norm attention block's parameters.
#[derive(Debug, Clone)]
pub struct AttnLayer<T> {
    pub norm_weight: Tensor<T>,
    pub wq: Tensor<T>,
    pub wk: Tensor<T>,
    pub wv: Tensor<T>,
    pub wo: Tensor<T>,
}

/// The comparison model: the same embedding front-end, with softmax
/// attention blocks instead of scans.
pub struct AttentionBaseline<T> {
    /// Embedding tables only (`layers` = 0 in this config).
    pub embed: ModelParams<T>,
    pub embed_cfg: ModelConfig,
    pub layers: Vec<AttnLayer<T>>,
    pub n_heads: usize,
}

impl<T: Real> AttentionBaseline<T> {
    pub fn init(cfg: &ModelConfig, n_layers: usize, n_heads: usize, seed: u64) -> Self {
        let mut embed_cfg = cfg.clone();
        embed_cfg.layers = 0;
        let embed = ModelParams::init(&embed_cfg, seed);
        let mut r = rng::seeded(seed, rng::stream::PARAM_INIT + 100);
        let h = cfg.hidden;
        let layers = (0..n_layers)
            .map(|_| {
                let mut l = AttnLayer {
                    norm_weight: Tensor::full(&[h], T::one()),
                    wq: Tensor::zeros(&[h, h]),
                    wk: Tensor::zeros(&[h, h]),
                    wv: Tensor::zeros(&[h, h]),
                    wo: Tensor::zeros(&[h, h]),
                };
                for t in [&mut l.wq, &mut l.wk, &mut l.wv, &mut l.wo] {
                    crate::ssm::xavier_uniform(t, &mut r);
                }
                l
            })
            .collect();
        AttentionBaseline {
            embed,
            embed_cfg,
            layers,
            n_heads,
        }
    }

    /// Forward pass: embed, then per layer norm → QKV → attention → out
    /// projection → residual.
    pub fn forward(&self, records: &[TokenRecord]) -> Result<Vec<T>> {
        let h = self.embed_cfg.hidden;
        let len = records.len();
        let mut states = embed_sequence(records, &self.embed, &self.embed_cfg)?;
        let mut normed = vec![T::zero(); len * h];
        for layer in &self.layers {
            for t in 0..len {
                crate::block::rms_normalize(
                    &states[t * h..(t + 1) * h],
                    &layer.norm_weight.data,
                    &mut normed[t * h..(t + 1) * h],
                );
            }
            let mut q = vec![T::zero(); len * h];
            let mut k = vec![T::zero(); len * h];
            let mut v = vec![T::zero(); len * h];
            for t in 0..len {
                let nt = &normed[t * h..(t + 1) * h];
                matvec(&layer.wq, nt, &mut q[t * h..(t + 1) * h]);
                matvec(&layer.wk, nt, &mut k[t * h..(t + 1) * h]);
                matvec(&layer.wv, nt, &mut v[t * h..(t + 1) * h]);
            }
            let (ctx, _attn) = softmax_attention(&q, &k, &v, len, h, self.n_heads);
            let mut proj = vec![T::zero(); h];
            for t in 0..len {
                matvec(&layer.wo, &ctx[t * h..(t + 1) * h], &mut proj);
                for (s, p) in states[t * h..(t + 1) * h].iter_mut().zip(&proj) {
                    *s += *p;
                }
            }
        }
        Ok(states)
    }
}

// ---------------------------------------------------------------------------
// power-law fit and the scaling harness

/// Least-squares slope of log y against log x.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::contract("fit_power_law needs at least 2 points"));
    }
    if points.iter().any(|(x, y)| *x <= 0.0 || *y <= 0.0) {
        return Err(Error::domain("fit_power_law requires positive values"));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|(x, _)| x.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|(_, y)| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        return Err(Error::domain("fit_power_law requires distinct x values"));
    }
    Ok(num / den)
}

/// Which model the harness drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchModel {
    Docmamba,
    AttentionBaseline,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub model: BenchModel,
    pub lengths: Vec<usize>,
    /// Timed repetitions per length (one warm-up rep excluded on top).
    pub reps: usize,
    pub hidden: usize,
    pub layers: usize,
    pub n_state: usize,
    pub n_heads: usize,
    pub seed: u64,
    /// Worker threads; 1 stabilizes timings.
    pub threads: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            model: BenchModel::Docmamba,
            lengths: vec![512, 1024, 2048, 4096],
            reps: 3,
            hidden: 64,
            layers: 2,
            n_state: 16,
            n_heads: 4,
            seed: 0,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ScalingSample {
    pub length: usize,
    pub wall_time_s: f64,
    pub peak_bytes: u64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ScalingReport {
    pub model_tag: String,
    pub samples: Vec<ScalingSample>,
    pub fitted_time_exponent: f64,
    pub fitted_mem_exponent: f64,
    /// "allocator" or "analytic".
    pub mem_method: String,
    pub single_threaded: bool,
}

fn bench_model_cfg(cfg: &BenchConfig) -> ModelConfig {
    ModelConfig {
        hidden: cfg.hidden,
        layers: cfg.layers,
        d_inner: cfg.hidden * 2,
        n_state: cfg.n_state,
        ..Default::default()
    }
}

fn random_records(cfg: &ModelConfig, len: usize, seed: u64) -> Vec<TokenRecord> {
    let mut r = rng::seeded(seed, rng::stream::BENCH_INPUT);
    (0..len)
        .map(|i| {
            let mut poly = [0u16; 8];
            for p in poly.iter_mut() {
                *p = r.gen_range(0..cfg.coord_bins as u16);
            }
            TokenRecord::new(r.gen_range(0..cfg.vocab_size as u32), poly, (i / 16) as u32)
        })
        .collect()
}

fn analytic_peak(model: BenchModel, cfg: &BenchConfig, len: usize, param_bytes: u64) -> u64 {
    let sz = 4u64; // f32
    let h = cfg.hidden as u64;
    let d = 2 * h;
    let n = cfg.n_state as u64;
    let l = len as u64;
    match model {
        // embeddings + per-block live set: x/z/conv/silu/scan temporaries
        BenchModel::Docmamba => param_bytes + l * (3 * h + 10 * d + 4 * n) * sz,
        // q/k/v/ctx/normed plus the (heads, L, L) attention tensor
        BenchModel::AttentionBaseline => {
            param_bytes + l * 6 * h * sz + cfg.n_heads as u64 * l * l * sz
        }
    }
}

/// Forward-pass-only scaling measurement: median wall time of `reps`
/// repetitions (after one warm-up) and peak memory per length.
pub fn bench_scaling(cfg: &BenchConfig) -> Result<ScalingReport> {
    if cfg.lengths.len() < 4 {
        return Err(Error::contract("bench_scaling needs at least 4 lengths"));
    }
    if cfg.lengths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::contract("lengths must be strictly increasing"));
    }
    if cfg.lengths[0] < 64 {
        return Err(Error::contract("lengths must be at least 64"));
    }
    let reps = cfg.reps.max(1);
    let mcfg = bench_model_cfg(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.max(1))
        .build()
        .map_err(|e| Error::contract(format!("thread pool: {e}")))?;

    enum Built<T> {
        Scan(ModelParams<T>),
        Attn(AttentionBaseline<T>),
    }
    let built: Built<f32> = match cfg.model {
        BenchModel::Docmamba => Built::Scan(ModelParams::init(&mcfg, cfg.seed)),
        BenchModel::AttentionBaseline => Built::Attn(AttentionBaseline::init(
            &mcfg,
            cfg.layers,
            cfg.n_heads,
            cfg.seed,
        )),
    };
    let param_bytes: u64 = match &built {
        Built::Scan(p) => p.num_params() as u64 * 4,
        Built::Attn(b) => {
            (b.embed.num_params() + b.layers.len() * 4 * cfg.hidden * cfg.hidden) as u64 * 4
        }
    };
    let instrumented = alloc_instrumented();

    let mut samples = Vec::with_capacity(cfg.lengths.len());
    for &len in &cfg.lengths {
        let records = random_records(&mcfg, len, cfg.seed);
        let run = || -> Result<f32> {
            let out = match &built {
                Built::Scan(p) => pool.install(|| encode(&records, p, &mcfg))?,
                Built::Attn(b) => b.forward(&records)?,
            };
            Ok(out[0])
        };
        run()?; // warm-up, excluded

        let mut times = Vec::with_capacity(reps);
        let mut peak = 0u64;
        for _ in 0..reps {
            let base = if instrumented { reset_peak() } else { 0 };
            let t0 = Instant::now();
            let sink = run()?;
            times.push(t0.elapsed().as_secs_f64());
            std::hint::black_box(sink);
            if instrumented {
                peak = peak.max(peak_bytes().saturating_sub(base));
            }
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = times[times.len() / 2];
        let peak_b = if instrumented {
            peak + param_bytes // parameters are live during the pass
        } else {
            analytic_peak(cfg.model, cfg, len, param_bytes)
        };
        samples.push(ScalingSample {
            length: len,
            wall_time_s: median,
            peak_bytes: peak_b,
        });
    }

    let time_pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| (s.length as f64, s.wall_time_s.max(1e-9)))
        .collect();
    let mem_pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| (s.length as f64, s.peak_bytes as f64))
        .collect();
    Ok(ScalingReport {
        model_tag: match cfg.model {
            BenchModel::Docmamba => "docmamba".to_string(),
            BenchModel::AttentionBaseline => "attention_baseline".to_string(),
        },
        samples,
        fitted_time_exponent: fit_power_law(&time_pts)?,
        fitted_mem_exponent: fit_power_law(&mem_pts)?,
        mem_method: if instrumented { "allocator" } else { "analytic" }.to_string(),
        single_threaded: cfg.threads <= 1,
    })
}

/// Peak memory of incremental (stateful) scan inference over `len` tokens.
/// The token stream is generated on the fly; no sequence-length buffer ever
/// exists. Falls back to the analytic state size when uninstrumented.
pub fn incremental_scan_peak(d_inner: usize, n_state: usize, len: usize, seed: u64) -> Result<u64> {
    let dims = SsmDims {
        d_inner,
        n_state,
        dt_rank: d_inner.div_ceil(16),
    };
    let mut r = rng::seeded(seed, rng::stream::BENCH_INPUT);
    let params: ScanParams<f32> = ScanParams::init(dims, &mut r);
    let instrumented = alloc_instrumented();
    let base = if instrumented { reset_peak() } else { 0 };
    let mut state = ScanState::new(dims);
    let mut x_t = vec![0.0f32; d_inner];
    let mut y_t = vec![0.0f32; d_inner];
    let mut sink = 0.0f32;
    for _ in 0..len {
        for v in x_t.iter_mut() {
            *v = r.gen_range(-1.0..1.0);
        }
        state.step(&params, &x_t, &mut y_t)?;
        sink += y_t[0];
    }
    std::hint::black_box(sink);
    if instrumented {
        Ok(peak_bytes().saturating_sub(base).max(1))
    } else {
        // state + step scratch, independent of len
        Ok(((d_inner * n_state + 4 * d_inner + 2 * n_state + dims.dt_rank) * 4) as u64)
    }
}

/// Log-log SVG plot of one or more scaling reports.
pub fn render_scaling_svg(reports: &[&ScalingReport]) -> String {
    let (w, h, m) = (520.0, 360.0, 48.0);
    let mut all: Vec<(f64, f64)> = Vec::new();
    for r in reports {
        for s in &r.samples {
            all.push((s.length as f64, s.wall_time_s.max(1e-9)));
        }
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in &all {
        x0 = x0.min(x.ln());
        x1 = x1.max(x.ln());
        y0 = y0.min(y.ln());
        y1 = y1.max(y.ln());
    }
    if !x0.is_finite() {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\"/>\n".to_string();
    }
    let (dx, dy) = ((x1 - x0).max(1e-9), (y1 - y0).max(1e-9));
    let px = |x: f64| m + (x - x0) / dx * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / dy * (h - 2.0 * m);
    let colors = ["#1a3c8c", "#c03a2b", "#2a7d4f", "#8c6d1a"];
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w:.0} {h:.0}\">\n\
         <rect width=\"{w:.0}\" height=\"{h:.0}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"16\" font-size=\"12\">wall time vs length (log-log)</text>\n",
        m
    );
    for (ri, r) in reports.iter().enumerate() {
        let color = colors[ri % colors.len()];
        let pts: Vec<String> = r
            .samples
            .iter()
            .map(|s| {
                format!(
                    "{:.2},{:.2}",
                    px((s.length as f64).ln()),
                    py(s.wall_time_s.max(1e-9).ln())
                )
            })
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            pts.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" fill=\"{color}\">{} (t^{:.2})</text>\n",
            m,
            32.0 + 14.0 * ri as f64,
            r.model_tag,
            r.fitted_time_exponent
        ));
        for s in &r.samples {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                px((s.length as f64).ln()),
                py(s.wall_time_s.max(1e-9).ln())
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_linear_is_one() {
        let pts: Vec<(f64, f64)> = (1..6).map(|i| (i as f64, 3.0 * i as f64)).collect();
        assert!((fit_power_law(&pts).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_law_quadratic_is_two() {
        let pts: Vec<(f64, f64)> = (1..6).map(|i| (i as f64, 5.0 * (i * i) as f64)).collect();
        assert!((fit_power_law(&pts).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn power_law_noisy_three_halves() {
        let mut r = rng::seeded(1, 0);
        let pts: Vec<(f64, f64)> = (1..9)
            .map(|i| {
                let x = (i * i) as f64;
                let noise = 1.0 + 0.01 * (r.gen::<f64>() * 2.0 - 1.0);
                (x, x.powf(1.5) * noise)
            })
            .collect();
        let e = fit_power_law(&pts).unwrap();
        assert!((1.4..1.6).contains(&e), "exponent {e}");
    }

    #[test]
    fn power_law_rejects_non_positive() {
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 0.0)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0)]).is_err());
    }

    #[test]
    fn attention_single_token_weight_is_one() {
        let (ctx, attn) = softmax_attention(&[0.3f64, 0.7], &[0.1, 0.9], &[2.0, -1.0], 1, 2, 1);
        assert_eq!(attn, vec![1.0]);
        assert_eq!(ctx, vec![2.0, -1.0]);
    }

    #[test]
    fn attention_uniform_queries_give_uniform_rows() {
        let len = 5;
        let hidden = 4;
        let q = vec![0.5f64; len * hidden];
        let k = vec![0.25f64; len * hidden];
        let v: Vec<f64> = (0..len * hidden).map(|i| i as f64).collect();
        let (_, attn) = softmax_attention(&q, &k, &v, len, hidden, 2);
        for w in &attn {
            assert!((w - 1.0 / len as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn attention_rows_sum_to_one() {
        let mut r = rng::seeded(4, 0);
        let len = 16;
        let hidden = 8;
        let q: Vec<f64> = (0..len * hidden).map(|_| r.gen_range(-1.0..1.0)).collect();
        let k: Vec<f64> = (0..len * hidden).map(|_| r.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..len * hidden).map(|_| r.gen_range(-1.0..1.0)).collect();
        let (_, attn) = softmax_attention(&q, &k, &v, len, hidden, 2);
        for h in 0..2 {
            for i in 0..len {
                let s: f64 = attn[(h * len + i) * len..(h * len + i + 1) * len].iter().sum();
                assert!((s - 1.0).abs() < 1e-6, "row sum {s}");
            }
        }
    }

    #[test]
    fn baseline_forward_shapes() {
        let cfg = ModelConfig {
            hidden: 16,
            layers: 0,
            d_inner: 32,
            n_state: 4,
            ..Default::default()
        };
        let baseline: AttentionBaseline<f32> = AttentionBaseline::init(&cfg, 2, 4, 1);
        let records = random_records(&cfg, 12, 1);
        let out = baseline.forward(&records).unwrap();
        assert_eq!(out.len(), 12 * 16);
        assert!(out.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn scaling_report_protocol() {
        // small lengths keep this unit test quick; the acceptance suite runs
        // the full sweep
        let cfg = BenchConfig {
            lengths: vec![64, 96, 128, 192],
            reps: 1,
            hidden: 16,
            layers: 1,
            ..Default::default()
        };
        let report = bench_scaling(&cfg).unwrap();
        assert_eq!(report.samples.len(), 4);
        assert_eq!(report.model_tag, "docmamba");
        assert!(report.single_threaded);
        let r5 = bench_scaling(&BenchConfig { reps: 5, ..cfg }).unwrap();
        let l1: Vec<usize> = report.samples.iter().map(|s| s.length).collect();
        let l5: Vec<usize> = r5.samples.iter().map(|s| s.length).collect();
        assert_eq!(l1, l5);
    }

    #[test]
    fn bench_rejects_bad_lengths() {
        let mut cfg = BenchConfig {
            lengths: vec![64, 64, 128, 256],
            ..Default::default()
        };
        assert!(bench_scaling(&cfg).is_err());
        cfg.lengths = vec![64, 128, 256];
        assert!(bench_scaling(&cfg).is_err());
        cfg.lengths = vec![8, 64, 128, 256];
        assert!(bench_scaling(&cfg).is_err());
    }

    #[test]
    fn incremental_peak_is_length_independent_analytically() {
        let a = incremental_scan_peak(32, 8, 100, 1).unwrap();
        let b = incremental_scan_peak(32, 8, 10_000, 1).unwrap();
        if !alloc_instrumented() {
            assert_eq!(a, b);
        } else {
            let hi = a.max(b) as f64;
            let lo = a.min(b) as f64;
            assert!(hi / lo < 1.1);
        }
    }

    #[test]
    fn svg_plot_is_deterministic() {
        let report = ScalingReport {
            model_tag: "docmamba".into(),
            samples: vec![
                ScalingSample { length: 64, wall_time_s: 0.01, peak_bytes: 1000 },
                ScalingSample { length: 128, wall_time_s: 0.02, peak_bytes: 2000 },
            ],
            fitted_time_exponent: 1.0,
            fitted_mem_exponent: 1.0,
            mem_method: "analytic".into(),
            single_threaded: true,
        };
        let a = render_scaling_svg(&[&report]);
        let b = render_scaling_svg(&[&report]);
        assert_eq!(a, b);
        assert!(a.contains("polyline"));
    }
}
