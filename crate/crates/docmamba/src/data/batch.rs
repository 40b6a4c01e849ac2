//! Length-bucketed batching with a constant token budget.
//!
//! Sequences land in buckets of width 64 by `len / 64`; members of bucket β
//! are truncated to L = 64·β and batched `b = ⌊k / L⌋` at a time, so every
//! batch satisfies B × L ≤ k. Bucket 0 (sequences shorter than the bucket
//! width) truncates to its shortest member instead. Truncation keeps
//! position 0, so [CLS] always survives.

use rand::seq::SliceRandom;
use std::collections::BTreeMap;

use crate::data::prep::Sequence;
use crate::rng;
use crate::{Error, Result};

pub const DEFAULT_BUCKET_WIDTH: usize = 64;

/// A batch of equal-length truncated sequences.
#[derive(Debug, Clone)]
pub struct Batch {
    /// Common sequence length L.
    pub seq_len: usize,
    /// B sequences, each truncated to exactly `seq_len` tokens.
    pub sequences: Vec<Sequence>,
}

impl Batch {
    pub fn batch_size(&self) -> usize {
        self.sequences.len()
    }
}

/// Sequences that could not be batched.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BucketStats {
    /// Shorter than 2 tokens (only [CLS]).
    pub skipped_short: usize,
    /// Truncated length exceeds the budget k.
    pub skipped_over_budget: usize,
}

fn truncate(seq: &Sequence, len: usize) -> Sequence {
    Sequence {
        doc_id: seq.doc_id.clone(),
        records: seq.records[..len].to_vec(),
        bio_labels: seq.bio_labels[..len].to_vec(),
        word_index: seq.word_index[..len].to_vec(),
    }
}

/// Buckets, truncates and batches `seqs` under token budget `k`.
/// Deterministic for a fixed `shuffle_seed`.
pub fn bucket_batches(
    seqs: &[Sequence],
    k: usize,
    bucket_width: usize,
    shuffle_seed: u64,
) -> Result<(Vec<Batch>, BucketStats)> {
    if bucket_width == 0 || k < bucket_width {
        return Err(Error::contract(format!(
            "budget k={k} must be at least the bucket width {bucket_width}"
        )));
    }
    let mut stats = BucketStats::default();
    let mut buckets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, s) in seqs.iter().enumerate() {
        if s.len() < 2 {
            stats.skipped_short += 1;
            continue;
        }
        buckets.entry(s.len() / bucket_width).or_default().push(i);
    }

    let mut rng = rng::seeded(shuffle_seed, rng::stream::BATCH_SHUFFLE);
    let mut out = Vec::new();
    for (bucket, mut members) in buckets {
        let trunc_len = if bucket == 0 {
            members.iter().map(|&i| seqs[i].len()).min().unwrap()
        } else {
            bucket * bucket_width
        };
        if trunc_len > k {
            stats.skipped_over_budget += members.len();
            continue;
        }
        members.shuffle(&mut rng);
        let per_batch = (k / trunc_len).max(1);
        for chunk in members.chunks(per_batch) {
            out.push(Batch {
                seq_len: trunc_len,
                sequences: chunk.iter().map(|&i| truncate(&seqs[i], trunc_len)).collect(),
            });
        }
    }
    Ok((out, stats))
}
