//! DocMamba: a bidirectional selective state-space encoder for visually-rich
//! documents, written from scratch on plain `Vec<T>` buffers.
//!
//! The crate covers the full desk-scale pipeline:
//!
//! - [`ssm`] — the discrete selective scan (ZOH discretization, reference
//!   recurrence, optimized scan, hand-derived adjoints, incremental state).
//! - [`block`] — the bidirectional Mamba block: norm, X/Z projection,
//!   depthwise causal convolution, forward/backward scans, Z-gating, residual.
//! - [`model`] — token + 2-D position embeddings, the layer stack, the MLM
//!   and BIO tagging heads.
//! - [`scan_order`] — segment-first serialization of 2-D layouts into 1-D
//!   token orders (plus the word-first ablation variant and an SVG renderer).
//! - [`data`] — document JSON ingestion, synthetic corpus generation, MLM
//!   masking and length-bucketed batching.
//! - [`train`] — Adam with warmup/decay, MLM pre-training, BIO fine-tuning,
//!   and the finite-difference gradient checker.
//! - [`bench`] — wall-time/peak-memory scaling measurements against a
//!   quadratic softmax-attention baseline.
//!
//! Everything numeric is generic over [`real::Real`], so the same code runs
//! in `f32` (training, benchmarks) and `f64` (gradient checks).
//!
//! Start with the runnable examples:
//!
//! ```bash
//! cargo run --release --example scan_order
//! cargo run --release --example pretrain_tiny
//! cargo run --release --example bench_scaling
//! ```

pub mod bench;
pub mod block;
pub mod ckpt;
pub mod data;
pub mod metrics;
pub mod model;
pub mod real;
pub mod rng;
pub mod scan_order;
pub mod ssm;
pub mod tensor;
pub mod tokenizer;
pub mod train;

mod error;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T, E = Error> = std::result::Result<T, E>;
