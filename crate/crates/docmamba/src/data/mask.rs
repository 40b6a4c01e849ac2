//! MLM masking: select 15% of tokens, replace 80% of those with [MASK],
//! 10% with a random non-special token, leave 10% unchanged. Layout (polys)
//! is never touched; labels hold the original id at selected positions.

use rand::Rng;

use crate::model::IGNORE_LABEL;
use crate::tokenizer::{SpecialTokens, Tokenizer};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaskingPolicy {
    pub p_mask: f64,
    pub p_replace_mask: f64,
    pub p_replace_random: f64,
    pub p_keep: f64,
}

impl Default for MaskingPolicy {
    fn default() -> Self {
        MaskingPolicy {
            p_mask: 0.15,
            p_replace_mask: 0.8,
            p_replace_random: 0.1,
            p_keep: 0.1,
        }
    }
}

impl MaskingPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_mask) {
            return Err(Error::contract("p_mask must be in [0, 1]"));
        }
        let sum = self.p_replace_mask + self.p_replace_random + self.p_keep;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::contract(format!(
                "replacement sub-probabilities must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

/// Applies the masking recipe to one token sequence. Special tokens
/// (including [CLS] at position 0) are exempt. Returns the corrupted ids and
/// the label array (original id where selected, ignore-marker elsewhere).
pub fn apply_mlm_mask(
    token_ids: &[u32],
    policy: &MaskingPolicy,
    specials: &SpecialTokens,
    vocab_size: usize,
    rng: &mut impl Rng,
) -> (Vec<u32>, Vec<u32>) {
    let is_special = |id: u32| {
        id == specials.cls_id || id == specials.mask_id || id == specials.pad_id || id == specials.unk_id
    };
    let mut masked = token_ids.to_vec();
    let mut labels = vec![IGNORE_LABEL; token_ids.len()];
    for (i, &id) in token_ids.iter().enumerate() {
        if is_special(id) {
            continue;
        }
        if rng.gen::<f64>() >= policy.p_mask {
            continue;
        }
        labels[i] = id;
        let v: f64 = rng.gen();
        if v < policy.p_replace_mask {
            masked[i] = specials.mask_id;
        } else if v < policy.p_replace_mask + policy.p_replace_random {
            // uniform over the non-special vocabulary, by rejection
            loop {
                let cand = rng.gen_range(0..vocab_size as u32);
                if !is_special(cand) {
                    masked[i] = cand;
                    break;
                }
            }
        }
        // else: keep the original token
    }
    (masked, labels)
}

/// Convenience wrapper over a [`Sequence`](crate::data::prep::Sequence).
pub fn mask_sequence(
    seq: &crate::data::prep::Sequence,
    policy: &MaskingPolicy,
    tok: &dyn Tokenizer,
    rng: &mut impl Rng,
) -> (Vec<u32>, Vec<u32>) {
    let ids: Vec<u32> = seq.records.iter().map(|r| r.token_id).collect();
    apply_mlm_mask(&ids, policy, &tok.specials(), tok.vocab_size(), rng)
}
